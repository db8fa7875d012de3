"""Quaternion and Rodrigues-parameter algebra for attitude filtering.

Conventions
-----------
* Quaternions are stored scalar-last: ``q = [rho_x, rho_y, rho_z, q4]`` with
  vector part ``rho = q[..., :3]`` and scalar part ``q4 = q[..., 3]``. All
  rotation quaternions are unit norm; ``q`` and ``-q`` encode the same
  rotation.
* The product ``quat_multiply(a, b)`` composes successive rotations in the
  same order as attitude matrices: ``attitude_matrix(a @ b) =
  attitude_matrix(a) @ attitude_matrix(b)``.
* ``attitude_matrix(q)`` maps reference-frame vectors into the body frame.
* Angular rates are body-frame, rad/s.

All functions broadcast over leading axes, so a whole particle set can be
processed with one call (``q`` of shape ``(N, 4)``, ``omega`` of shape
``(N, 3)`` and so on).
"""

import numpy as np

__all__ = [
    "SingularError",
    "quat_identity",
    "quat_random",
    "quat_from_axis_angle",
    "quat_multiply",
    "quat_inverse",
    "quat_angle_between",
    "rate_matrix",
    "omega_transition",
    "propagate",
    "attitude_matrix",
    "error_quaternion",
    "compose_global",
    "mrp_from_error",
    "error_from_mrp",
]

# below this rotation increment the sin(phi)/|omega| factor switches to its
# series limit dt/2 to avoid 0/0
_SMALL_ROTATION = 1e-8


class SingularError(ValueError):
    """A Rodrigues-parameter conversion hit the a + dq4 singularity."""


def quat_identity():
    """Identity rotation quaternion ``[0, 0, 0, 1]``."""
    return np.array([0.0, 0.0, 0.0, 1.0])


def quat_random(rng, size=None):
    """Draw uniformly distributed unit quaternions.

    Parameters
    ----------
    rng : numpy.random.Generator
    size : int or tuple, optional
        Leading shape; ``None`` gives a single quaternion of shape ``(4,)``.
    """
    shape = (4,) if size is None else (np.atleast_1d(size).prod(), 4)
    q = rng.standard_normal(shape)
    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    if size is not None and not np.isscalar(size):
        q = q.reshape(tuple(np.atleast_1d(size)) + (4,))
    return q


def quat_from_axis_angle(axis, angle):
    """Unit quaternion for a rotation of `angle` rad about `axis`."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis, axis=-1, keepdims=True)
    angle = np.asarray(angle, dtype=float)
    half = 0.5 * angle
    rho = axis * np.sin(half)[..., None]
    return np.concatenate([rho, np.cos(half)[..., None]], axis=-1)


def _renormalize(q):
    # closure renormalization of a single algebra result; rounding drift only
    return q / np.linalg.norm(q, axis=-1, keepdims=True)


def quat_multiply(a, b):
    """Compose two rotations, ``a`` then expressed with ``b`` applied first.

    Successive-rotation order: ``attitude_matrix(quat_multiply(a, b)) ==
    attitude_matrix(a) @ attitude_matrix(b)``.

    Parameters
    ----------
    a, b : ndarray, shape (..., 4)
        Unit quaternions, scalar-last.

    Returns
    -------
    ndarray, shape (..., 4)
        Unit product quaternion (renormalized).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    av, a4 = a[..., :3], a[..., 3:]
    bv, b4 = b[..., :3], b[..., 3:]
    vec = a4 * bv + b4 * av - np.cross(av, bv)
    scal = a4 * b4 - np.sum(av * bv, axis=-1, keepdims=True)
    return _renormalize(np.concatenate([vec, scal], axis=-1))


def quat_inverse(q):
    """Conjugate quaternion: vector part negated, scalar part kept."""
    q = np.asarray(q, dtype=float)
    out = q.copy()
    out[..., :3] = -out[..., :3]
    return out


def quat_angle_between(a, b):
    """Geodesic rotation angle between two attitudes, in [0, pi].

    Equal to ``2 acos(|a . b|)`` but evaluated through atan2 of the relative
    rotation, which stays accurate near zero where acos loses half the
    digits. Invariant to the sign of either quaternion.
    """
    dq = quat_multiply(a, quat_inverse(b))
    vec = np.linalg.norm(dq[..., :3], axis=-1)
    return 2.0 * np.arctan2(vec, np.abs(dq[..., 3]))


def _skew(v):
    v = np.asarray(v, dtype=float)
    out = np.zeros(v.shape[:-1] + (3, 3))
    out[..., 0, 1] = -v[..., 2]
    out[..., 0, 2] = v[..., 1]
    out[..., 1, 0] = v[..., 2]
    out[..., 1, 2] = -v[..., 0]
    out[..., 2, 0] = -v[..., 1]
    out[..., 2, 1] = v[..., 0]
    return out


def rate_matrix(omega):
    """4x4 kinematics matrix: ``q_dot = 0.5 * rate_matrix(omega) @ q``."""
    omega = np.asarray(omega, dtype=float)
    out = np.zeros(omega.shape[:-1] + (4, 4))
    out[..., :3, :3] = -_skew(omega)
    out[..., :3, 3] = omega
    out[..., 3, :3] = -omega
    return out


def _transition_coeffs(omega, dt):
    # cos(phi) and sin(phi)/|omega| with the dt/2 series limit at small rates
    norm = np.linalg.norm(omega, axis=-1)
    phi = 0.5 * norm * dt
    small = norm * dt < _SMALL_ROTATION
    safe = np.where(small, 1.0, norm)
    s = np.where(small, 0.5 * dt, np.sin(phi) / safe)
    return np.cos(phi), s


def omega_transition(omega, dt):
    """Closed-form quaternion transition matrix for a constant body rate.

    Parameters
    ----------
    omega : ndarray, shape (..., 3)
        Body angular rate, rad/s.
    dt : float
        Step length, s (> 0).

    Returns
    -------
    ndarray, shape (..., 4, 4)
        Orthogonal matrix advancing a scalar-last quaternion by `dt` of
        rotation at constant `omega`:
        ``cos(phi) I + sin(phi)/|omega| * rate_matrix(omega)`` with
        ``phi = |omega| dt / 2``.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    omega = np.asarray(omega, dtype=float)
    c, s = _transition_coeffs(omega, dt)
    return (
        c[..., None, None] * np.eye(4)
        + s[..., None, None] * rate_matrix(omega)
    )


def propagate(q, omega, dt):
    """Advance a quaternion by `dt` at constant body rate `omega`.

    Identical to ``omega_transition(omega, dt) @ q`` but applied without
    materializing the 4x4 matrices; result renormalized.
    """
    q = np.asarray(q, dtype=float)
    omega = np.asarray(omega, dtype=float)
    c, s = _transition_coeffs(omega, dt)
    rho, q4 = q[..., :3], q[..., 3:]
    xi_vec = q4 * omega - np.cross(omega, rho)
    xi_scal = -np.sum(omega * rho, axis=-1, keepdims=True)
    xi_q = np.concatenate([xi_vec, xi_scal], axis=-1)
    return _renormalize(c[..., None] * q + s[..., None] * xi_q)


def attitude_matrix(q):
    """Direction cosine matrix mapping reference vectors into the body frame.

    Proper orthogonal and invariant to ``q -> -q``.

    Parameters
    ----------
    q : ndarray, shape (..., 4)

    Returns
    -------
    ndarray, shape (..., 3, 3)
    """
    q = np.asarray(q, dtype=float)
    rho, q4 = q[..., :3], q[..., 3]
    rr = np.einsum("...i,...j->...ij", rho, rho)
    diag = (q4 ** 2 - np.sum(rho * rho, axis=-1))[..., None, None]
    return diag * np.eye(3) + 2.0 * rr - 2.0 * q4[..., None, None] * _skew(rho)


def error_quaternion(q_particle, q_fiducial):
    """Small-rotation quaternion taking the fiducial onto a particle.

    ``compose_global(error_quaternion(q, f), f)`` recovers ``q`` up to sign.
    The output is sign-canonicalized so its scalar part is >= 0.
    """
    dq = quat_multiply(q_particle, quat_inverse(q_fiducial))
    flip = dq[..., 3:] < 0.0
    return np.where(flip, -dq, dq)


def compose_global(dq, q_fiducial):
    """Apply a local error rotation on top of a fiducial quaternion."""
    return quat_multiply(dq, q_fiducial)


def mrp_from_error(dq, a=1.0, f=1.0):
    """Convert an error quaternion to generalized Rodrigues parameters.

    ``p = f * drho / (a + dq4)``. Defaults ``a=1, f=1`` give the classic
    modified Rodrigues parameters ``p = rho / (1 + q4)``.

    Parameters
    ----------
    dq : ndarray, shape (..., 4)
        Unit error quaternion, ideally sign-canonicalized (``dq4 >= 0``).
    a, f : float
        Representation parameters; ``f = 2(a+1)`` makes ``|p|`` read as the
        rotation angle in radians for small errors.

    Raises
    ------
    SingularError
        If ``a + dq4 <= 1e-6`` (rotation at or near the representation
        singularity; unreachable for canonicalized errors when a >= 1).
    """
    dq = np.asarray(dq, dtype=float)
    denom = a + dq[..., 3]
    if np.any(denom <= 1e-6):
        raise SingularError("error rotation at the Rodrigues-parameter singularity")
    return f * dq[..., :3] / denom[..., None]


def error_from_mrp(p, a=1.0, f=1.0):
    """Convert generalized Rodrigues parameters back to a unit error quaternion.

    Closed form: with ``n2 = |p|^2``,
    ``dq4 = (f * sqrt(f^2 + (1 - a^2) n2) - a n2) / (f^2 + n2)`` and
    ``drho = (a + dq4) p / f``. Exact inverse of :func:`mrp_from_error` on the
    ``dq4 > 0`` branch.
    """
    p = np.asarray(p, dtype=float)
    n2 = np.sum(p * p, axis=-1)
    dq4 = (f * np.sqrt(f * f + (1.0 - a * a) * n2) - a * n2) / (f * f + n2)
    drho = (a + dq4)[..., None] * p / f
    return _renormalize(np.concatenate([drho, dq4[..., None]], axis=-1))
