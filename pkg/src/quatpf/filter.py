"""Bootstrap particle filter on a local/global attitude representation.

Each particle carries a global unit quaternion plus a gyro-bias hypothesis.
Particles are propagated globally through the exact quaternion transition, so
the unit norm is preserved by construction and no whole-set renormalization
pass exists anywhere in the cycle. For weighting, estimation, resampling and
jitter the particles are converted to unconstrained three-component Rodrigues
parameters about a fiducial quaternion; the 6x6 state covariance lives in
that (attitude error, bias) space and a 4x4 quaternion covariance is never
formed.

The fiducial can be chosen per filter instance:

* ``"baseline"`` - propagate the previous estimate through the gyro reading,
  the EKF-style prediction.
* ``"mmse"`` - norm-preserving weighted average of the predicted particles
  (:func:`quatpf.averaging.mmse_average`), which centers the conversion on
  the particle cloud itself.

Threading: a filter instance is single-owner mutable state (one `step` at a
time); all per-particle math is vectorized numpy with a fixed reduction
order, so results are independent of thread count and bit-reproducible per
seed.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .averaging import DegenerateAverageError, mmse_average
from .models import GyroParams, log_likelihood
from .quat import (
    compose_global,
    error_from_mrp,
    error_quaternion,
    mrp_from_error,
    propagate,
)

logger = logging.getLogger(__name__)

__all__ = [
    "BASELINE",
    "MMSE",
    "DecompositionError",
    "WeightCollapseError",
    "FilterConfig",
    "ParticleSet",
    "StateEstimate",
    "QuaternionParticleFilter",
    "initialize",
    "predict",
    "compute_fiducial",
    "to_local_errors",
    "from_local_errors",
    "update_weights",
    "effective_sample_size",
    "systematic_resample",
    "resample",
    "silverman_bandwidth",
    "regularize",
    "estimate_state",
]

BASELINE = "baseline"
MMSE = "mmse"


class WeightCollapseError(RuntimeError):
    """Every particle log-weight came out -Inf or NaN."""


class DecompositionError(ValueError):
    """A covariance square root failed (matrix materially indefinite)."""


@dataclass(frozen=True)
class FilterConfig:
    """Static filter parameters.

    ``grp_a``/``grp_f`` select the Rodrigues-parameter scaling of the local
    error state (defaults give the classic MRP; ``f = 2(a+1)`` makes the
    local state read in radians for small errors). ``jitter_bandwidth`` is
    the post-resampling perturbation scale: a float, or ``"silverman"`` for
    the dimension-based rule of thumb.
    """

    n_particles: int
    gyro: GyroParams
    fiducial: str = MMSE
    grp_a: float = 1.0
    grp_f: float = 1.0
    resample_threshold: float = 0.5
    jitter_bandwidth: float | str = "silverman"
    seed: int = 0

    def __post_init__(self):
        if self.n_particles < 10:
            raise ValueError("n_particles must be at least 10")
        if self.fiducial not in (BASELINE, MMSE):
            raise ValueError(f"fiducial must be '{BASELINE}' or '{MMSE}'")
        if not 0.0 < self.resample_threshold <= 1.0:
            raise ValueError("resample_threshold must be in (0, 1]")
        if isinstance(self.jitter_bandwidth, str):
            if self.jitter_bandwidth != "silverman":
                raise ValueError("jitter_bandwidth must be a float or 'silverman'")
        elif self.jitter_bandwidth < 0.0:
            raise ValueError("jitter_bandwidth must be nonnegative")
        if self.grp_a < 0.0 or self.grp_f <= 0.0:
            raise ValueError("require grp_a >= 0 and grp_f > 0")


@dataclass
class ParticleSet:
    quats: np.ndarray  # (N, 4) unit quaternions, scalar-last
    biases: np.ndarray  # (N, 3) gyro-bias hypotheses, rad/s
    weights: np.ndarray  # (N,) nonnegative, sum 1


@dataclass(frozen=True)
class StateEstimate:
    """Posterior summary for one step.

    `cov` is the 6x6 weighted covariance of the (local attitude error, bias)
    state: the attitude block is in Rodrigues-parameter units of the
    configured (a, f), the bias block in rad/s.
    """

    q: np.ndarray  # (4,) estimated attitude quaternion
    beta: np.ndarray  # (3,) estimated gyro bias, rad/s
    cov: np.ndarray  # (6, 6) symmetric PSD
    ess: float  # effective sample size of the weights used
    events: tuple = field(default=())  # anomalies survived this step


def _psd_sqrt(cov):
    """Square root L with L @ L.T == cov, flooring tiny negative eigenvalues.

    Raises DecompositionError when the matrix is materially indefinite or
    non-finite rather than silently repairing it.
    """
    cov = np.asarray(cov, dtype=float)
    sym = 0.5 * (cov + cov.T)
    try:
        vals, vecs = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as err:
        raise DecompositionError(f"covariance eigendecomposition failed: {err}") from err
    if not np.all(np.isfinite(vals)):
        raise DecompositionError("covariance is not finite")
    floor = max(1e-15, 1e-12 * float(vals.max(initial=0.0)))
    if vals.min() < -floor:
        raise DecompositionError("covariance is not positive semidefinite")
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def initialize(config, q0, beta0, cov0, rng):
    """Draw the initial particle set about (`q0`, `beta0`) with spread `cov0`.

    The 6-vector draws live in (local attitude error, bias) space: the
    attitude part is mapped through the Rodrigues parameters onto `q0`.
    """
    n = config.n_particles
    x = rng.standard_normal((n, 6)) @ _psd_sqrt(cov0).T
    dq = error_from_mrp(x[:, :3], config.grp_a, config.grp_f)
    quats = compose_global(dq, np.asarray(q0, dtype=float))
    biases = np.asarray(beta0, dtype=float) + x[:, 3:]
    return ParticleSet(quats=quats, biases=biases, weights=np.full(n, 1.0 / n))


def predict(ps, gyro, config, rng):
    """Propagate every particle through the gyro reading with process noise.

    Per particle: rate hypothesis = measured rate - bias + white noise, exact
    quaternion rotation over dt, then the bias random-walk step. Weights are
    untouched.
    """
    g = config.gyro
    n = ps.quats.shape[0]
    rate_noise = g.sigma_v / np.sqrt(g.dt) * rng.standard_normal((n, 3))
    omega_hat = np.asarray(gyro.omega, dtype=float) - ps.biases + rate_noise
    quats = propagate(ps.quats, omega_hat, g.dt)
    biases = ps.biases + g.sigma_u * np.sqrt(g.dt) * rng.standard_normal((n, 3))
    return ParticleSet(quats=quats, biases=biases, weights=ps.weights)


def compute_fiducial(ps, prev_estimate, gyro, config):
    """Reference quaternion about which particles become local errors.

    Baseline: the previous estimate propagated through the bias-corrected
    gyro reading. MMSE: the norm-preserving weighted average of the predicted
    particles (propagates DegenerateAverageError; the caller may proceed with
    the eigenvector it carries).
    """
    if config.fiducial == BASELINE:
        omega_hat = np.asarray(gyro.omega, dtype=float) - prev_estimate.beta
        return propagate(prev_estimate.q, omega_hat, config.gyro.dt)
    return mmse_average(ps.quats, ps.weights)


def to_local_errors(ps, fiducial, config):
    """Particles as (Rodrigues parameters about `fiducial`, bias) pairs."""
    dq = error_quaternion(ps.quats, fiducial)
    return mrp_from_error(dq, config.grp_a, config.grp_f), ps.biases


def from_local_errors(mrps, biases, fiducial, config):
    """Recompose global particle quaternions from local errors."""
    dq = error_from_mrp(mrps, config.grp_a, config.grp_f)
    return compose_global(dq, fiducial), biases


def update_weights(ps, observations):
    """Bayes update of the weights from vector observations.

    Log-space with max subtraction, so one well-matched particle cannot
    underflow the rest to an all-zero weight vector.

    Raises
    ------
    WeightCollapseError
        If no particle has a finite posterior log-weight.
    """
    ll = log_likelihood(ps.quats, observations)
    with np.errstate(divide="ignore"):
        logw = np.log(ps.weights) + ll
    finite = np.isfinite(logw)
    if not finite.any():
        raise WeightCollapseError("all particle log-weights are -Inf or NaN")
    shifted = np.where(finite, logw - logw[finite].max(), -np.inf)
    w = np.exp(shifted)
    return ParticleSet(quats=ps.quats, biases=ps.biases, weights=w / w.sum())


def effective_sample_size(weights):
    """Degeneracy diagnostic 1 / sum(w^2): N when uniform, 1 when one-hot."""
    return 1.0 / float(np.sum(np.square(weights)))


def systematic_resample(weights, rng):
    """Ancestor indices by systematic resampling (one uniform offset)."""
    n = len(weights)
    positions = (np.arange(n) + rng.random()) / n
    return np.clip(np.searchsorted(np.cumsum(weights), positions), 0, n - 1)


def resample(ps, rng):
    """Resample the particle set to uniform weights."""
    idx = systematic_resample(ps.weights, rng)
    n = len(idx)
    return ParticleSet(
        quats=ps.quats[idx], biases=ps.biases[idx], weights=np.full(n, 1.0 / n)
    )


def silverman_bandwidth(n, d=6):
    """Rule-of-thumb kernel bandwidth (4 / (n (d + 2)))^(1 / (d + 4))."""
    return (4.0 / (n * (d + 2.0))) ** (1.0 / (d + 4.0))


def regularize(mrps, biases, cov, config, rng):
    """Jitter local-error particles with the scaled covariance square root.

    Restores diversity after resampling: adds ``h * L @ n`` per particle with
    ``L L^T = cov`` and bandwidth ``h`` from the config.
    """
    n = mrps.shape[0]
    h = config.jitter_bandwidth
    if isinstance(h, str):
        h = silverman_bandwidth(n)
    noise = rng.standard_normal((n, 6)) @ (h * _psd_sqrt(cov)).T
    return mrps + noise[:, :3], biases + noise[:, 3:]


def estimate_state(mrps, biases, weights, fiducial, config):
    """Weighted posterior mean and covariance in local coordinates.

    The mean attitude error is mapped back through the exact Rodrigues
    conversion and composed onto the fiducial, so no small-angle
    approximation enters the estimate.
    """
    x = np.concatenate([mrps, biases], axis=1)
    mean = weights @ x
    d = x - mean
    cov = (weights[:, None] * d).T @ d
    cov = 0.5 * (cov + cov.T)
    dq = error_from_mrp(mean[:3], config.grp_a, config.grp_f)
    return StateEstimate(
        q=compose_global(dq, fiducial),
        beta=mean[3:],
        cov=cov,
        ess=effective_sample_size(weights),
    )


class QuaternionParticleFilter:
    """Sequential attitude/bias estimator over gyro and vector observations.

    Call :meth:`step` once per gyro interval, passing vector observations
    when available. Identical configs (including seed) and inputs give
    bit-identical estimate sequences.
    """

    def __init__(self, config, q0, beta0, cov0):
        cov0 = np.asarray(cov0, dtype=float)
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.particles = initialize(config, q0, beta0, cov0, self.rng)
        self.estimate = StateEstimate(
            q=np.asarray(q0, dtype=float),
            beta=np.asarray(beta0, dtype=float),
            cov=0.5 * (cov0 + cov0.T),
            ess=float(config.n_particles),
        )

    def step(self, gyro, observations=None):
        """Advance one filter cycle and return the new state estimate.

        Order: predict, fiducial, local conversion, weight update (when
        observations are given), estimate, then resample + jitter when the
        effective sample size drops below the configured fraction, and
        recomposition of the global particles. Sub-operation anomalies are
        survived and reported in ``StateEstimate.events``.
        """
        cfg = self.config
        n = cfg.n_particles
        events = []

        ps = predict(self.particles, gyro, cfg, self.rng)

        try:
            fiducial = compute_fiducial(ps, self.estimate, gyro, cfg)
        except DegenerateAverageError as err:
            fiducial = err.quaternion
            events.append("degenerate_average")
            logger.warning(
                "quaternion average degenerate (gap %.3e); proceeding with eigenvector",
                err.gap,
            )

        mrps, biases = to_local_errors(ps, fiducial, cfg)

        if observations:
            try:
                ps = update_weights(ps, observations)
            except WeightCollapseError:
                ps = ParticleSet(ps.quats, ps.biases, np.full(n, 1.0 / n))
                events.append("weight_collapse")
                logger.warning("weight collapse; weights reset to uniform")

        est = estimate_state(mrps, biases, ps.weights, fiducial, cfg)

        weights = ps.weights
        if est.ess < cfg.resample_threshold * n:
            idx = systematic_resample(weights, self.rng)
            mrps, biases = regularize(mrps[idx], biases[idx], est.cov, cfg, self.rng)
            weights = np.full(n, 1.0 / n)

        quats, biases = from_local_errors(mrps, biases, fiducial, cfg)
        self.particles = ParticleSet(quats=quats, biases=biases, weights=weights)

        if events:
            est = replace(est, events=tuple(events))
        self.estimate = est
        return est
