"""Exact simulator for distributed information markets over Boolean securities."""
from .model import (
    DimensionError,
    ModelError,
    ParitySecurity,
    Prior,
    ProductBiasedPrior,
    ProductPrior,
    ResourceError,
    Security,
    SpinState,
    SymmetricLevelsPrior,
    SymmetricSecurity,
    TablePrior,
    TableSecurity,
    ThresholdSecurity,
    all_states,
    bias_from_magnetization,
    majority,
    make_parity,
    make_symmetric,
    make_table,
    make_threshold,
    payoff,
    prior_mass,
    uniform_prior,
)
from .engine import (
    Block,
    Market,
    Partition,
    PreconditionError,
    Trace,
    beta_gamma,
    check_consensus,
    clearing_price,
    conditional_bid,
    refine_partition,
    run_all_states,
    run_dynamics,
)
from .analysis import (
    classify,
    gamma0,
    is_totally_symmetric,
    parity_decompose,
    predict_round_two,
    recognize_threshold,
    walsh_hadamard,
)
from .kernel import BACKEND

__version__ = "0.1.0"
