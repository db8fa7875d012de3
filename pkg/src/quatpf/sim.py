"""Scenario simulation, Monte Carlo batches and strategy comparison.

A :class:`Scenario` describes the truth motion, gyro quality, vector
observations and initialization spread. :func:`simulate_truth` realizes one
deterministic truth trajectory and measurement stream per seed, which lets
:func:`compare_fiducials` drive both fiducial strategies with common random
numbers. Per-step results land in :class:`RunMetrics` (CSV export) and batch
aggregates in plain dicts (JSON export).
"""

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .filter import BASELINE, MMSE, QuaternionParticleFilter
from .models import GyroMeasurement, GyroParams, TruthState, propagate_truth, sample_gyro, sample_observations
from .quat import quat_angle_between, quat_from_axis_angle, quat_identity, quat_multiply

__all__ = [
    "Scenario",
    "TruthData",
    "RunMetrics",
    "make_rate_fn",
    "simulate_truth",
    "run_filter",
    "run_once",
    "final_rmse",
    "sigma3_consistency",
    "run_monte_carlo",
    "compare_fiducials",
    "write_metrics_csv",
    "write_json",
]

# a run is counted as diverged when it ends with this much attitude error
DIVERGENCE_ANGLE = np.radians(10.0)

# steady-state window: steps before this time are excluded from RMSE and
# consistency aggregates
DEFAULT_EXCLUDE_S = 300.0

CSV_COLUMNS = (
    "t",
    "err_att_rad",
    "err_bias_x",
    "err_bias_y",
    "err_bias_z",
    "sig3_att",
    "ess",
    "norm_dev",
)


@dataclass(frozen=True)
class Scenario:
    """Simulation setup; all angles rad, rates rad/s, times s."""

    duration: float
    dt: float
    rate_profile: dict  # {"type": "constant", "omega": [..]} or
    #                     {"type": "sinusoidal", "amplitude": [..], "period": s}
    gyro: GyroParams
    references: tuple  # unit inertial directions observed by the sensor
    obs_sigma: float  # per-axis observation noise, rad
    obs_interval: float  # s between observation epochs (multiple of dt)
    init_attitude_error: float  # per-axis 1-sigma initial attitude error, rad
    init_bias_error: float  # per-axis 1-sigma initial bias error, rad/s

    def __post_init__(self):
        if self.dt <= 0.0 or self.duration <= 0.0:
            raise ValueError("duration and dt must be positive")
        ratio = self.obs_interval / self.dt
        if self.obs_interval <= 0.0 or abs(ratio - round(ratio)) > 1e-9:
            raise ValueError("obs_interval must be a positive multiple of dt")
        refs = tuple(np.asarray(r, dtype=float) for r in self.references)
        if len(refs) < 2:
            raise ValueError("need at least two reference directions")
        refs = tuple(r / np.linalg.norm(r) for r in refs)
        collinear = all(
            np.linalg.norm(np.cross(refs[0], r)) < 1e-6 for r in refs[1:]
        )
        if collinear:
            raise ValueError("reference directions must not all be collinear")
        object.__setattr__(self, "references", refs)
        make_rate_fn(self.rate_profile)  # validates the profile

    @property
    def n_steps(self):
        return int(round(self.duration / self.dt))

    @property
    def obs_every(self):
        return int(round(self.obs_interval / self.dt))


def make_rate_fn(profile):
    """Build ``t -> omega`` from a rate-profile description dict."""
    kind = profile.get("type")
    if kind == "constant":
        omega = np.asarray(profile["omega"], dtype=float)
        if omega.shape != (3,):
            raise ValueError("constant profile needs a 3-vector 'omega'")
        return lambda t: omega
    if kind == "sinusoidal":
        amplitude = np.broadcast_to(np.asarray(profile["amplitude"], dtype=float), (3,))
        period = float(profile["period"])
        if period <= 0.0:
            raise ValueError("sinusoidal profile needs period > 0")
        return lambda t: amplitude * np.sin(2.0 * np.pi * t / period)
    raise ValueError(f"unknown rate profile type: {kind!r}")


@dataclass(frozen=True)
class TruthData:
    """One realized trajectory plus its measurement stream and filter init."""

    t: np.ndarray  # (K,) step end times
    q_true: np.ndarray  # (K+1, 4), index 0 = initial attitude
    beta_true: np.ndarray  # (K+1, 3)
    gyro: np.ndarray  # (K, 3) measured rates for each step
    observations: tuple  # length K; per step a tuple of VectorObservation or None
    q_est0: np.ndarray  # initial attitude estimate handed to the filter
    beta_est0: np.ndarray  # initial bias estimate handed to the filter


def simulate_truth(scenario, seed):
    """Generate the deterministic truth and measurement streams for `seed`.

    The filter's initial attitude estimate is the true initial attitude
    offset by a rotation-vector draw with the scenario's per-axis 1-sigma;
    the true initial bias is drawn likewise while the filter starts at zero
    bias. Both arms of a comparison therefore see identical streams.
    """
    rate_fn = make_rate_fn(scenario.rate_profile)
    root = np.random.SeedSequence(seed)
    truth_rng, meas_rng = (np.random.default_rng(s) for s in root.spawn(2))

    k_steps = scenario.n_steps
    beta0 = scenario.init_bias_error * truth_rng.standard_normal(3)
    offset_rv = scenario.init_attitude_error * truth_rng.standard_normal(3)
    angle = np.linalg.norm(offset_rv)
    axis = offset_rv / angle if angle > 0 else np.array([1.0, 0.0, 0.0])
    q_est0 = quat_multiply(quat_from_axis_angle(axis, angle), quat_identity())

    state = TruthState(q=quat_identity(), beta=beta0, omega=rate_fn(0.0), t=0.0)
    t = np.empty(k_steps)
    q_true = np.empty((k_steps + 1, 4))
    beta_true = np.empty((k_steps + 1, 3))
    gyro = np.empty((k_steps, 3))
    observations = []
    q_true[0] = state.q
    beta_true[0] = state.beta

    for k in range(k_steps):
        gyro[k] = sample_gyro(state, scenario.gyro, meas_rng).omega
        state = propagate_truth(state, rate_fn, scenario.gyro, truth_rng)
        t[k] = state.t
        q_true[k + 1] = state.q
        beta_true[k + 1] = state.beta
        if (k + 1) % scenario.obs_every == 0:
            obs = sample_observations(
                state.q, scenario.references, scenario.obs_sigma, meas_rng
            )
            observations.append(tuple(obs))
        else:
            observations.append(None)

    return TruthData(
        t=t,
        q_true=q_true,
        beta_true=beta_true,
        gyro=gyro,
        observations=tuple(observations),
        q_est0=q_est0,
        beta_est0=np.zeros(3),
    )


@dataclass
class RunMetrics:
    """Per-step traces of one filter run against its truth."""

    t: np.ndarray
    err_att: np.ndarray  # geodesic attitude error, rad
    err_bias: np.ndarray  # (K, 3) bias error, rad/s
    sig3_att: np.ndarray  # 3-sigma attitude envelope from the covariance, rad
    ess: np.ndarray
    norm_dev: np.ndarray  # worst |1 - |q|| over estimate and particles
    wall_time_s: float
    event_steps: tuple  # (step index, events) for anomalous steps


def _initial_covariance(scenario, config):
    # the local attitude state is in Rodrigues units: angle ~ 2(a+1)/f * |p|
    mrp_sigma = scenario.init_attitude_error * config.grp_f / (2.0 * (config.grp_a + 1.0))
    return np.diag([mrp_sigma**2] * 3 + [scenario.init_bias_error**2] * 3)


def _derive_filter_seed(config_seed, run_seed):
    ss = np.random.SeedSequence([int(config_seed), int(run_seed), 0x51ED])
    return int(ss.generate_state(1)[0])


def run_filter(truth, scenario, config, run_seed):
    """Drive one filter over a realized truth and collect metrics."""
    cfg = replace(
        config,
        gyro=replace(config.gyro, dt=scenario.dt),
        seed=_derive_filter_seed(config.seed, run_seed),
    )
    filt = QuaternionParticleFilter(
        cfg, truth.q_est0, truth.beta_est0, _initial_covariance(scenario, cfg)
    )
    angle_scale = 2.0 * (cfg.grp_a + 1.0) / cfg.grp_f

    k_steps = len(truth.t)
    err_att = np.empty(k_steps)
    err_bias = np.empty((k_steps, 3))
    sig3 = np.empty(k_steps)
    ess = np.empty(k_steps)
    norm_dev = np.empty(k_steps)
    events = []

    start = time.perf_counter()
    for k in range(k_steps):
        gyro = GyroMeasurement(omega=truth.gyro[k], t=truth.t[k])
        est = filt.step(gyro, truth.observations[k])
        err_att[k] = quat_angle_between(est.q, truth.q_true[k + 1])
        err_bias[k] = est.beta - truth.beta_true[k + 1]
        sig3[k] = 3.0 * angle_scale * np.sqrt(np.trace(est.cov[:3, :3]))
        ess[k] = est.ess
        norm_dev[k] = max(
            abs(np.linalg.norm(est.q) - 1.0),
            np.max(np.abs(np.linalg.norm(filt.particles.quats, axis=1) - 1.0)),
        )
        if est.events:
            events.append((k, est.events))
    wall = time.perf_counter() - start

    return RunMetrics(
        t=truth.t.copy(),
        err_att=err_att,
        err_bias=err_bias,
        sig3_att=sig3,
        ess=ess,
        norm_dev=norm_dev,
        wall_time_s=wall,
        event_steps=tuple(events),
    )


def run_once(scenario, config, seed):
    """Simulate a fresh truth for `seed` and run the configured filter."""
    return run_filter(simulate_truth(scenario, seed), scenario, config, seed)


def _steady_mask(metrics, exclude_s):
    mask = metrics.t > exclude_s
    return mask if mask.any() else np.ones_like(mask)


def final_rmse(metrics, exclude_s=DEFAULT_EXCLUDE_S):
    """RMS attitude error over the steady-state window, rad."""
    mask = _steady_mask(metrics, exclude_s)
    return float(np.sqrt(np.mean(metrics.err_att[mask] ** 2)))


def sigma3_consistency(metrics, exclude_s=DEFAULT_EXCLUDE_S):
    """Fraction of steady-state steps with error inside the 3-sigma envelope."""
    mask = _steady_mask(metrics, exclude_s)
    return float(np.mean(metrics.err_att[mask] <= metrics.sig3_att[mask]))


def diverged(metrics):
    """True when the run ends above the divergence threshold."""
    return bool(metrics.err_att[-1] > DIVERGENCE_ANGLE)


def _mc_task(args):
    scenario, config, seed, exclude_s = args
    m = run_once(scenario, config, seed)
    return {
        "seed": seed,
        "final_rmse_rad": final_rmse(m, exclude_s),
        "sigma3_consistency": sigma3_consistency(m, exclude_s),
        "diverged": diverged(m),
        "wall_time_s": m.wall_time_s,
        "max_norm_dev": float(np.max(m.norm_dev)),
        "event_steps": len(m.event_steps),
    }


def _run_tasks(task, args_list, n_jobs):
    if n_jobs and n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(task, args_list))
    return [task(a) for a in args_list]


def run_monte_carlo(
    scenario, config, n_runs, base_seed, n_jobs=1, exclude_s=DEFAULT_EXCLUDE_S
):
    """Independent runs on seeds base_seed..base_seed+n_runs-1.

    Returns ``(summary, per_run)``; the summary holds the batch medians and
    the mean 3-sigma consistency. Aggregation is by ascending seed, so the
    result is independent of execution order or parallelism.
    """
    args = [(scenario, config, base_seed + i, exclude_s) for i in range(n_runs)]
    per_run = sorted(_run_tasks(_mc_task, args, n_jobs), key=lambda r: r["seed"])
    rmse = np.array([r["final_rmse_rad"] for r in per_run])
    summary = {
        "strategy": config.fiducial,
        "n_runs": n_runs,
        "median_final_rmse_rad": float(np.median(rmse)),
        "mean_final_rmse_rad": float(np.mean(rmse)),
        "sigma3_consistency": float(np.mean([r["sigma3_consistency"] for r in per_run])),
        "wall_time_s": float(np.sum([r["wall_time_s"] for r in per_run])),
    }
    return summary, per_run


def _paired_task(args):
    scenario, config, seed, exclude_s = args
    truth = simulate_truth(scenario, seed)
    row = {"seed": seed}
    for strategy in (BASELINE, MMSE):
        m = run_filter(truth, scenario, replace(config, fiducial=strategy), seed)
        row[f"{strategy}_final_rmse_rad"] = final_rmse(m, exclude_s)
        row[f"{strategy}_diverged"] = diverged(m)
    return row


def compare_fiducials(
    scenario, config, n_runs, base_seed, n_jobs=1, exclude_s=DEFAULT_EXCLUDE_S
):
    """Paired baseline-vs-MMSE comparison with common random numbers.

    Both strategies see the identical truth trajectory, measurement stream
    and filter seed for every run seed; only the fiducial differs.
    """
    args = [(scenario, config, base_seed + i, exclude_s) for i in range(n_runs)]
    rows = sorted(_run_tasks(_paired_task, args, n_jobs), key=lambda r: r["seed"])
    report = {
        "n_runs": n_runs,
        "base_seed": base_seed,
        "divergence_threshold_rad": float(DIVERGENCE_ANGLE),
        "convergence_exclusion_s": exclude_s,
        "runs": rows,
    }
    for strategy in (BASELINE, MMSE):
        rmse = [r[f"{strategy}_final_rmse_rad"] for r in rows]
        report[f"{strategy}_median_final_rmse_rad"] = float(np.median(rmse))
        report[f"{strategy}_divergence_count"] = int(
            sum(r[f"{strategy}_diverged"] for r in rows)
        )
    return report


def write_metrics_csv(metrics, path):
    """One row per step with the stable column set."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for k in range(len(metrics.t)):
            writer.writerow(
                [
                    f"{metrics.t[k]:.6f}",
                    f"{metrics.err_att[k]:.12e}",
                    f"{metrics.err_bias[k, 0]:.12e}",
                    f"{metrics.err_bias[k, 1]:.12e}",
                    f"{metrics.err_bias[k, 2]:.12e}",
                    f"{metrics.sig3_att[k]:.12e}",
                    f"{metrics.ess[k]:.6f}",
                    f"{metrics.norm_dev[k]:.12e}",
                ]
            )


def write_json(obj, path):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")
