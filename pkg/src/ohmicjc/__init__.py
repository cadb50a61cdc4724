"""Open-system dynamics of a two-level atom in a lossy cavity coupled to an
Ohmic-class reservoir, in the single-excitation sector.

The library computes the excited-state amplitude from time-local decay rates
of the two dressed transition frequencies, derives decoherence rate and
frequency shift, and evaluates an information-backflow measure and a quantum
speed-limit ratio over a finite horizon.  Everything is in units of the atomic
frequency.
"""

__version__ = "0.1.0"

from .errors import (OhmicJCError, DomainError, UnsupportedExponentError,
                     QuadratureError, NoTransitionError,
                     RatioUndefinedError, ConfigError)
from .spectral import (ReservoirSpec, SystemSpec, TimeGrid,
                       CLOSED_FORM_EXPONENTS, spectral_density,
                       decay_rate_closed, decay_rate_quadrature,
                       decay_rate_quadrature_grid, decay_rate_series,
                       beta_series)
from .dynamics import (AMPLITUDE_FLOOR, InitialAtomState, AmplitudeTrajectory,
                       RateSeries, AtomStateSeries, amplitude, atom_state,
                       rate_series, dressed_ode_oracle)
from .measures import (TRANSITION_EPS, MeasureReport, CriticalScan,
                       trace_distance_optimal, trace_distance_general,
                       sigma_series, gamma_sigma_consistency,
                       non_markovianity, qslt_ratio, qslt_identity_residual,
                       measure_report, evaluate_point, critical_coupling)

__all__ = [
    "__version__",
    "OhmicJCError", "DomainError", "UnsupportedExponentError",
    "QuadratureError", "NoTransitionError",
    "RatioUndefinedError", "ConfigError",
    "ReservoirSpec", "SystemSpec", "TimeGrid", "CLOSED_FORM_EXPONENTS",
    "spectral_density", "decay_rate_closed", "decay_rate_quadrature",
    "decay_rate_quadrature_grid", "decay_rate_series", "beta_series",
    "AMPLITUDE_FLOOR", "InitialAtomState", "AmplitudeTrajectory", "RateSeries",
    "AtomStateSeries", "amplitude", "atom_state", "rate_series",
    "dressed_ode_oracle",
    "TRANSITION_EPS", "MeasureReport", "CriticalScan",
    "trace_distance_optimal", "trace_distance_general", "sigma_series",
    "gamma_sigma_consistency", "non_markovianity", "qslt_ratio",
    "qslt_identity_residual", "measure_report", "evaluate_point",
    "critical_coupling",
]
