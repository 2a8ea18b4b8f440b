"""tailbench: tail-probability and mean-excess estimator benchmarks."""

__version__ = "0.1.0"

from .distributions import (
    BurrDist,
    GpdDist,
    HallParams,
    WeibullDist,
    WeibullTailParams,
    hall_params_of_burr,
    quantile,
    sample,
    tail_prob,
    true_mef,
)
from .errors import (
    ConfigError,
    DegenerateSampleError,
    DomainError,
    InsufficientExceedancesError,
    NoExceedanceError,
    TailbenchError,
)
from .estimators import EstimateRecord, TailTarget, mef_ne, mef_pe, mef_pi, tail_ne, tail_pi, tail_pt
from .gpd_fit import GpdParams, PotFit, fit_pot, gpd_loglik, score_at
from .kernel_estimation import (
    GAUSSIAN,
    Bandwidth,
    KernelSpec,
    al_bandwidth,
    kernel_cdf,
    kernel_density,
    kernel_mef,
    mef_bandwidth_plugin,
    mef_bandwidth_true,
    pointwise_bandwidth_plugin,
    pointwise_bandwidth_true,
)
from .simulation import SimConfig, SimResult, run_cell, run_rate_tables, run_table
from .tail_index import TailIndexEstimate, default_r, hill_fit, theoretical_r

__all__ = [name for name in dir() if not name.startswith("_")]
