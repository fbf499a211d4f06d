"""
slepian-mtm: discrete prolate spheroidal sequences, Thomson's multitaper
estimator and modulated Slepian dictionaries for multi-band signals.
"""

__version__ = "0.1.0"

from .errors import (
    ConsistencyError,
    DegenerateBandwidthError,
    GridMismatchError,
    NumericalError,
    ParameterDomainError,
    PreconditionError,
    SlepianError,
)
from .grid import FrequencyGrid, GridFunction
from .models import CsReport, DpssParams, ExperimentConfig, SpectrumSpec, WindowReport
from .prolate import DpssBasis, compute_dpss, critical_K, slepian_eval

__all__ = [
    "ConsistencyError",
    "CsReport",
    "DegenerateBandwidthError",
    "DpssBasis",
    "DpssParams",
    "ExperimentConfig",
    "FrequencyGrid",
    "GridFunction",
    "GridMismatchError",
    "NumericalError",
    "ParameterDomainError",
    "PreconditionError",
    "SlepianError",
    "SpectrumSpec",
    "WindowReport",
    "compute_dpss",
    "critical_K",
    "slepian_eval",
]
