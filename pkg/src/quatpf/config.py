"""JSON configuration loading with fail-fast key checking.

Scenario and filter documents mirror the :class:`~quatpf.sim.Scenario` and
:class:`~quatpf.filter.FilterConfig` fields (units as declared there). Any
unknown key is an error so typos cannot silently fall back to defaults.

The filter document omits ``gyro.dt``: the filter always runs at the
scenario's step length. It may carry its own ``gyro`` noise densities to
de-tune the filter from the simulated sensor; by default the scenario's are
used.
"""

import json

from .filter import FilterConfig
from .models import GyroParams
from .sim import Scenario

__all__ = ["load_scenario", "load_filter_config", "scenario_from_dict", "filter_config_from_dict"]

_SCENARIO_KEYS = {
    "duration",
    "dt",
    "rate_profile",
    "gyro",
    "references",
    "obs_sigma",
    "obs_interval",
    "init_attitude_error",
    "init_bias_error",
}
_GYRO_KEYS = {"sigma_v", "sigma_u"}
_PROFILE_KEYS = {
    "constant": {"type", "omega"},
    "sinusoidal": {"type", "amplitude", "period"},
}
_FILTER_KEYS = {
    "n_particles",
    "fiducial",
    "grp_a",
    "grp_f",
    "resample_threshold",
    "jitter_bandwidth",
    "seed",
    "gyro",
}


def _check_keys(doc, allowed, context):
    unknown = set(doc) - allowed
    if unknown:
        raise ValueError(f"unknown {context} keys: {sorted(unknown)}")


def scenario_from_dict(doc):
    _check_keys(doc, _SCENARIO_KEYS, "scenario")
    missing = _SCENARIO_KEYS - set(doc)
    if missing:
        raise ValueError(f"missing scenario keys: {sorted(missing)}")
    _check_keys(doc["gyro"], _GYRO_KEYS, "scenario gyro")
    profile = doc["rate_profile"]
    kind = profile.get("type")
    if kind not in _PROFILE_KEYS:
        raise ValueError(f"unknown rate profile type: {kind!r}")
    _check_keys(profile, _PROFILE_KEYS[kind], "rate profile")
    dt = float(doc["dt"])
    return Scenario(
        duration=float(doc["duration"]),
        dt=dt,
        rate_profile=profile,
        gyro=GyroParams(
            sigma_v=float(doc["gyro"]["sigma_v"]),
            sigma_u=float(doc["gyro"]["sigma_u"]),
            dt=dt,
        ),
        references=tuple(doc["references"]),
        obs_sigma=float(doc["obs_sigma"]),
        obs_interval=float(doc["obs_interval"]),
        init_attitude_error=float(doc["init_attitude_error"]),
        init_bias_error=float(doc["init_bias_error"]),
    )


def filter_config_from_dict(doc, scenario_gyro, strategy=None):
    """Build a FilterConfig; `strategy` (CLI --strategy) wins over the file."""
    _check_keys(doc, _FILTER_KEYS, "filter")
    if "n_particles" not in doc:
        raise ValueError("missing filter key: 'n_particles'")
    gyro = scenario_gyro
    if "gyro" in doc:
        _check_keys(doc["gyro"], _GYRO_KEYS, "filter gyro")
        gyro = GyroParams(
            sigma_v=float(doc["gyro"]["sigma_v"]),
            sigma_u=float(doc["gyro"]["sigma_u"]),
            dt=scenario_gyro.dt,
        )
    bandwidth = doc.get("jitter_bandwidth", "silverman")
    if not isinstance(bandwidth, str):
        bandwidth = float(bandwidth)
    return FilterConfig(
        n_particles=int(doc["n_particles"]),
        gyro=gyro,
        fiducial=strategy or doc.get("fiducial", "mmse"),
        grp_a=float(doc.get("grp_a", 1.0)),
        grp_f=float(doc.get("grp_f", 1.0)),
        resample_threshold=float(doc.get("resample_threshold", 0.5)),
        jitter_bandwidth=bandwidth,
        seed=int(doc.get("seed", 0)),
    )


def load_scenario(path):
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


def load_filter_config(path, scenario_gyro, strategy=None):
    with open(path) as fh:
        return filter_config_from_dict(json.load(fh), scenario_gyro, strategy)
