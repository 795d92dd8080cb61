"""Negative refraction in a dense, optically driven five-level atomic gas.

Master equation with Lorentz-Lorenz local fields, steady-state solvers,
response extraction by linear regression, and the branch-tracked
refractive index for circularly polarized probes.
"""
__version__ = "0.1.0"

from .atomsys import DecayNetwork, DriveConfig, MediumConfig, ProbeConfig, SystemConfig, default_config  # noqa: E402
from .errors import (  # noqa: E402
    ConfigError,
    GridPointError,
    InvalidInputError,
    NirgasError,
    NumericalFailureError,
    UnsupportedConfigurationError,
)
from .index import figure_of_merit, refractive_index, track_branch  # noqa: E402
from .response import phase_averaged_response  # noqa: E402
from .steady import SolverSettings, steady_state  # noqa: E402
from .sweep import RunConfig, load_config, run_sweep  # noqa: E402

__all__ = [
    "__version__",
    "SystemConfig",
    "DriveConfig",
    "DecayNetwork",
    "MediumConfig",
    "ProbeConfig",
    "default_config",
    "SolverSettings",
    "steady_state",
    "phase_averaged_response",
    "refractive_index",
    "track_branch",
    "figure_of_merit",
    "RunConfig",
    "load_config",
    "run_sweep",
    "NirgasError",
    "InvalidInputError",
    "UnsupportedConfigurationError",
    "NumericalFailureError",
    "GridPointError",
    "ConfigError",
]
