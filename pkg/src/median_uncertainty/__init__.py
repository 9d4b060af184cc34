"""Median-based and variance-based position/momentum uncertainty products."""

from .dispersion import (
    DispersionError,
    InconclusiveMomentError,
    MomentResult,
    QuartileSet,
    UncertaintyReport,
    cdf,
    discrete_quantile,
    mean_variance,
    quantile,
    quartiles,
    siqr,
    uncertainty_report,
)
from .hermite import HermiteState, haar_sample, hermite_fn, state_amplitude, state_momentum_amplitude, to_wavefunction
from .momentum import MomentumDensity, momentum_density, plancherel_check, to_momentum_amplitude
from .numerics import (
    Interval,
    NumericsError,
    QuadratureError,
    QuadratureResult,
    RootFindingError,
    bessel_k0,
    brent_root,
    integrate,
)
from .qubit import QubitState, TwoPointDist, pauli_distribution, pauli_siqr, verify_qubit_theorem
from .search import SearchResult, convergence_table, min_siqr_search, min_variance_search
from .states import (
    CATALOG,
    Density,
    MomentFlags,
    ParameterError,
    WaveFunction,
    make_cauchy,
    make_f_dist,
    make_gaussian,
    make_state,
    make_student_t,
)

__version__ = "0.1.0"
