"""Spin-bath noise spectroscopy with an NV-center sensor.

Models the Lorentzian magnetic noise of a fluctuating surface spin bath,
predicts sensor T1/T2 through filter-function overlaps, validates them
against an Ornstein-Uhlenbeck Monte Carlo, and inverts measured
relaxation data for the bath parameters.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError, DataError, DomainError, FitError, IdentifiabilityError,
    NoSolutionError, NumericalError, StatisticsError,
)
from .noise import (  # noqa: E402
    BathParams, NoiseSpectrum, RelaxationRateModel, autocorrelation,
    correlation_time, cutoff_frequency, nsd,
)
from .filters import EchoFilter, T1Filter, echo_filter, resonance_from_field, t1_filter  # noqa: E402
from .relaxation import (  # noqa: E402
    KAPPA, closed_form_ou_echo, coherence_function_echo, decay_signal, predict_rates,
)

__all__ = [
    "ConfigError", "DataError", "DomainError", "FitError", "IdentifiabilityError",
    "NoSolutionError", "NumericalError", "StatisticsError",
    "BathParams", "NoiseSpectrum", "RelaxationRateModel", "autocorrelation",
    "correlation_time", "cutoff_frequency", "nsd",
    "EchoFilter", "T1Filter", "echo_filter", "resonance_from_field", "t1_filter",
    "KAPPA", "closed_form_ou_echo", "coherence_function_echo", "decay_signal", "predict_rates",
]
