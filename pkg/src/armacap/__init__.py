"""Feedback capacity and nonfeedback rates of AGN channels with ARMA(a, c) noise."""

from .arma_model import ChannelSpec, NoisePath, make_channel, sample_noise
from .capacity import (
    CapacityResult,
    FeasibleSearchConfig,
    Regime,
    Region,
    butman_rate,
    closed_form_optimum,
    feedback_capacity,
    kappa_min,
    nonfeedback_lower_bound,
    power_of_strategy,
    rate_functional,
    regime_classify,
    verify_by_search,
)
from .errors import (
    ConsistencyFailure,
    EmptyFeasibleSet,
    InvalidParams,
    NegativeDiscriminant,
    NoStabilizingRoot,
    NotStabilizable,
    OutsideRegime,
    StructuralCheckFailed,
)
from .riccati import (
    AreSolution,
    Strategy,
    StructuralReport,
    closed_loop_gain,
    dre_iterate,
    dre_step,
    solve_are,
    structural_report,
)
from .simulate import SimTrace, error_stability_check, innovation_whiteness, run_coding_scheme

__version__ = "0.1.0"
