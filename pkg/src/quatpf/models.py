"""Truth propagation and sensor models for attitude-filter simulation.

Gyro model: measured rate = true rate + bias + white noise, with the bias a
random walk. Noise densities are continuous-time (sigma_v in rad/s^(1/2),
sigma_u in rad/s^(3/2)) and scaled per step as sigma_v/sqrt(dt) and
sigma_u*sqrt(dt), so statistics are preserved across step-size changes.

Vector observations are unit reference directions seen in the body frame with
isotropic Gaussian noise, the usual star-tracker-style measurement.
"""

from dataclasses import dataclass

import numpy as np

from .quat import attitude_matrix, propagate

__all__ = [
    "GyroParams",
    "GyroMeasurement",
    "VectorObservation",
    "TruthState",
    "propagate_truth",
    "sample_gyro",
    "sample_observations",
    "log_likelihood",
]


@dataclass(frozen=True)
class GyroParams:
    """Gyro noise densities and the sampling interval."""

    sigma_v: float  # angle random walk, rad/s^(1/2)
    sigma_u: float  # rate random walk, rad/s^(3/2)
    dt: float  # s

    def __post_init__(self):
        if self.sigma_v < 0.0 or self.sigma_u < 0.0:
            raise ValueError("noise densities must be nonnegative")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")


@dataclass(frozen=True)
class GyroMeasurement:
    omega: np.ndarray  # measured body rate, rad/s
    t: float  # s


@dataclass(frozen=True)
class VectorObservation:
    """A known inertial direction measured in the body frame."""

    reference: np.ndarray  # unit 3-vector, inertial frame
    measured: np.ndarray  # 3-vector, body frame
    sigma: float  # per-axis noise std, rad

    def __post_init__(self):
        if abs(np.linalg.norm(self.reference) - 1.0) > 1e-12:
            raise ValueError("reference direction must be unit norm")
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class TruthState:
    q: np.ndarray  # true attitude quaternion, scalar-last
    beta: np.ndarray  # true gyro bias, rad/s
    omega: np.ndarray  # true body rate, rad/s
    t: float  # s


def propagate_truth(state, rate_fn, params, rng):
    """Advance the truth one step: exact attitude rotation plus bias walk.

    Parameters
    ----------
    state : TruthState
    rate_fn : callable
        ``rate_fn(t) -> (3,)`` true body rate profile.
    params : GyroParams
    rng : numpy.random.Generator
    """
    q = propagate(state.q, state.omega, params.dt)
    beta = state.beta + params.sigma_u * np.sqrt(params.dt) * rng.standard_normal(3)
    t = state.t + params.dt
    return TruthState(q=q, beta=beta, omega=np.asarray(rate_fn(t), dtype=float), t=t)


def sample_gyro(state, params, rng):
    """Noisy gyro reading of the current true rate."""
    noise = params.sigma_v / np.sqrt(params.dt) * rng.standard_normal(3)
    return GyroMeasurement(omega=state.omega + state.beta + noise, t=state.t)


def sample_observations(q_true, references, sigma, rng):
    """Measure each unit reference direction in the body frame of `q_true`.

    Returns a list of :class:`VectorObservation` with independent isotropic
    Gaussian noise of std `sigma` on each measured vector.
    """
    a = attitude_matrix(q_true)
    obs = []
    for ref in references:
        ref = np.asarray(ref, dtype=float)
        measured = a @ ref + sigma * rng.standard_normal(3)
        obs.append(VectorObservation(reference=ref, measured=measured, sigma=sigma))
    return obs


def log_likelihood(q, observations):
    """Gaussian log-likelihood of vector observations, constants dropped.

    ``sum_j -|measured_j - A(q) reference_j|^2 / (2 sigma_j^2)``. Broadcasts
    over leading axes of `q`, so a whole particle set is scored in one call.
    Invariant to ``q -> -q``.
    """
    if not observations:
        raise ValueError("observations must be nonempty")
    q = np.asarray(q, dtype=float)
    a = attitude_matrix(q)
    total = np.zeros(q.shape[:-1])
    for ob in observations:
        if ob.sigma <= 0.0:
            raise ValueError("log_likelihood requires sigma > 0")
        predicted = a @ np.asarray(ob.reference, dtype=float)
        resid = np.asarray(ob.measured, dtype=float) - predicted
        total = total - np.sum(resid * resid, axis=-1) / (2.0 * ob.sigma ** 2)
    return total
