"""Pay-what-you-want pricing: consumer payment decisions and supplier disclosure strategies."""

from .experiments import AggregateMetrics, StrategyCell, SweepParameter, compare_strategies, run_cell, sweep
from .game import (
    BehaviorMode,
    BelievedCost,
    InteractionOutcome,
    ModeKind,
    Scenario,
    classify_scenario,
    decide,
    effective_reference_price,
)
from .optimizer import ArgmaxSet, PriceRule, check_consistency, optimal_price_closed_form, optimal_price_oracle
from .population import Constant, PopulationSpec, TruncatedNormal, Uniform, sample_population
from .preferences import (
    ConsumerProfile,
    CostType,
    ParameterError,
    SupplierProfile,
    UtilityBreakdown,
    buyer_utility,
    fair_split_price,
    fair_split_utility,
    fs_extended_utility,
    midpoint_fair_price,
    no_buy_supplier_payoff,
    no_buy_utility,
    supplier_margin,
)

__version__ = "0.1.0"
