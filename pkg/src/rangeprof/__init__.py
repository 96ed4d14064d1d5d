"""Constrained transmit-waveform design for range profiling."""
import os as _os

# Thread count for the BLAS back end; must be set before numpy loads.
_threads = _os.environ.get("RANGEPROF_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)

from .driver import (  # noqa: E402
    DesignProblem,
    LFMStart,
    MinEigStart,
    RandomPhaseStart,
    RunReport,
    design,
    objective,
    run_monotonicity_audit,
)
from .errors import (  # noqa: E402
    InvalidArgument,
    InvalidModel,
    NoSolution,
    NumericalDegeneracy,
    RangeProfError,
    UndefinedInput,
)
from .minorize import build_minorizer, mi_minorizer, mmse_minorizer  # noqa: E402
from .model import (  # noqa: E402
    DisturbanceModel,
    JammingSpec,
    SpectralBand,
    SpectralBandSet,
    TargetPrior,
    acf,
    convolution_matrix,
    esd,
    jamming_covariance,
    lfm_waveform,
    mmse_reward,
    mmse_value,
    mutual_information,
    papr,
    random_phase_waveform,
    spectral_interference_matrix,
    zcz_bounds,
)
from .qpsolve import Energy, Papr, SolverTolerances, Spectral, solve  # noqa: E402
from .scenarios import Scenario, jamming_scenario, zcz_scenario  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "DesignProblem", "LFMStart", "MinEigStart", "RandomPhaseStart", "RunReport", "design", "objective",
    "run_monotonicity_audit", "InvalidArgument", "InvalidModel", "NoSolution", "NumericalDegeneracy",
    "RangeProfError", "UndefinedInput", "build_minorizer", "mi_minorizer", "mmse_minorizer",
    "DisturbanceModel", "JammingSpec", "SpectralBand", "SpectralBandSet", "TargetPrior", "acf",
    "convolution_matrix", "esd", "jamming_covariance", "lfm_waveform", "mmse_reward", "mmse_value",
    "mutual_information", "papr", "random_phase_waveform", "spectral_interference_matrix", "zcz_bounds",
    "Energy", "Papr", "SolverTolerances", "Spectral", "solve", "Scenario", "jamming_scenario", "zcz_scenario",
]
