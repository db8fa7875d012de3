"""Quaternion particle filtering for attitude estimation.

A bootstrap particle filter whose particles carry global unit quaternions
(plus gyro-bias hypotheses) while all covariance work happens on a minimal
three-component local attitude-error state, so the quaternion norm is
preserved without any brute-force renormalization. The fiducial quaternion
that anchors the local errors is selectable: the EKF-style propagated
estimate, or the norm-preserving MMSE average of the particles (maximum
eigenvector of the weighted quaternion moment matrix).

Layout
------
``quatpf.quat``       quaternion / Rodrigues-parameter algebra
``quatpf.averaging``  weighted quaternion averaging and the 4x4 eigensolver
``quatpf.models``     truth propagation, gyro and vector-observation models
``quatpf.filter``     the particle filter itself
``quatpf.sim``        scenarios, Monte Carlo batches, strategy comparison
``quatpf.config``     strict JSON loading for scenario / filter documents
``quatpf.cli``        the ``qpf`` command-line driver
"""

from .averaging import (
    ConvergenceError,
    DegenerateAverageError,
    build_moment_matrix,
    eigen_sym4,
    mmse_average,
    naive_average,
)
from .filter import (
    BASELINE,
    MMSE,
    DecompositionError,
    FilterConfig,
    ParticleSet,
    QuaternionParticleFilter,
    StateEstimate,
    WeightCollapseError,
)
from .models import GyroMeasurement, GyroParams, TruthState, VectorObservation
from .quat import SingularError
from .sim import RunMetrics, Scenario, compare_fiducials, run_monte_carlo, run_once

__all__ = [
    "BASELINE",
    "MMSE",
    "ConvergenceError",
    "DecompositionError",
    "DegenerateAverageError",
    "FilterConfig",
    "GyroMeasurement",
    "GyroParams",
    "ParticleSet",
    "QuaternionParticleFilter",
    "RunMetrics",
    "Scenario",
    "SingularError",
    "StateEstimate",
    "TruthState",
    "VectorObservation",
    "WeightCollapseError",
    "build_moment_matrix",
    "compare_fiducials",
    "eigen_sym4",
    "mmse_average",
    "naive_average",
    "run_monte_carlo",
    "run_once",
]

__version__ = "0.1.0"
