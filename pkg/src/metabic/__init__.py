"""Two-emitter entanglement mediated by metasurface bound states in the continuum."""
__version__ = "0.1.0"

from .cdos import BicMode, bessel_j0, cdos, effective_beta, preset
from .constants import gamma0
from .dynamics import DickeState, SimulationGrid, closed_form_evolve, dicke_derivative, integrate
from .entanglement import (
    ConcurrenceTrace,
    c_max_analytic,
    concurrence_long_time,
    concurrence_sinh,
    dicke_concurrence,
    exact_concurrence_symmetric,
    t_max_analytic,
    wootters_concurrence,
)
from .errors import ConfigError, ConvergenceError, DomainError, IngestError
from .fitting import FitResult, SampleSeries, fit_cdos, fit_purcell, load_series
from .greens import EmitterConfig, RateSet, free_space_rates, kappa_tensor, tau_tensor
from .lattice import LatticeParams, ed_cosine_coefficients, md_cosine_coefficients
from .validity import bic_linewidth_rate, max_dipole_moment, q_factor, regime_report
