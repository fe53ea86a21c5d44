"""Run populations through supplier strategies and aggregate the results.

All strategy cells of one comparison share the same sampled population
(common random numbers). Sums use :func:`math.fsum`, which is exactly
rounded and therefore independent of the order consumers are processed in.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from typing import Optional, Sequence

from .game import BehaviorMode, BelievedCost, InteractionOutcome, decide
from .population import Constant, PopulationSpec, consumer_stream, sample_population
from .preferences import ConsumerProfile, CostType, ParameterError, SupplierProfile

METRIC_COLUMNS = (
    "demand_rate",
    "n_buyers",
    "mean_price_paid",
    "revenue",
    "total_cost_incurred",
    "profit",
    "mean_consumer_surplus",
    "free_rider_rate",
)


@dataclass(frozen=True)
class StrategyCell:
    cost: float
    cost_type: CostType = CostType.RECOVERABLE
    provide_erp: bool = False
    erp_level: Optional[float] = None
    reveal_cost: bool = False
    name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "cost_type", CostType.parse(self.cost_type))
        if self.provide_erp != (self.erp_level is not None):
            raise ParameterError("erp_level must be given exactly when provide_erp is true")
        # reuse SupplierProfile validation for cost and erp
        self.supplier()

    def supplier(self) -> SupplierProfile:
        return SupplierProfile(self.cost, self.cost_type, self.erp_level if self.provide_erp else None,
                               self.reveal_cost)

    @property
    def label(self) -> str:
        if self.name:
            return self.name
        erp = f"erp={self.erp_level:g}" if self.provide_erp else "no-erp"
        reveal = "reveal" if self.reveal_cost else "hidden"
        return f"{self.cost_type.value}/c={self.cost:g}/{erp}/{reveal}"


@dataclass(frozen=True)
class AggregateMetrics:
    n_consumers: int
    n_buyers: int
    demand_rate: float
    mean_price_paid: Optional[float]
    revenue: float
    total_cost_incurred: float
    profit: float
    mean_consumer_surplus: Optional[float]
    free_rider_rate: Optional[float]

    def as_row(self) -> dict:
        row = asdict(self)
        return {k: row[k] for k in METRIC_COLUMNS}


def aggregate(outcomes: Sequence[InteractionOutcome], cell: StrategyCell) -> AggregateMetrics:
    n = len(outcomes)
    buyers = [o for o in outcomes if o.bought]
    k = len(buyers)
    revenue = math.fsum(o.price for o in buyers)
    units = n if cell.cost_type is CostType.SUNK else k
    total_cost = cell.cost * units
    return AggregateMetrics(
        n_consumers=n,
        n_buyers=k,
        demand_rate=k / n if n else 0.0,
        mean_price_paid=revenue / k if k else None,
        revenue=revenue,
        total_cost_incurred=total_cost,
        profit=revenue - total_cost,
        mean_consumer_surplus=math.fsum(o.consumer_payoff for o in buyers) / k if k else None,
        free_rider_rate=sum(1 for o in buyers if o.price == 0) / k if k else None,
    )


def _decide_all(consumers, supplier, mode, belief, noise_seed, threads):
    def one(i: int) -> InteractionOutcome:
        rng = consumer_stream(noise_seed, i) if mode.noise_sd > 0 and noise_seed is not None else None
        return decide(consumers[i], supplier, mode, belief, rng)

    if threads <= 1 or len(consumers) < 2:
        return [one(i) for i in range(len(consumers))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(len(consumers)), chunksize=max(1, len(consumers) // (4 * threads))))


def run_cell(
    population: Sequence[ConsumerProfile],
    strategy: StrategyCell,
    mode: BehaviorMode,
    *,
    belief: BelievedCost = BelievedCost(),
    noise_seed: Optional[int] = None,
    threads: int = 1,
) -> tuple[AggregateMetrics, list[InteractionOutcome]]:
    """Apply the decision rule to every consumer and aggregate.

    Type-S suppliers are charged the cost for every unit produced (one per
    consumer), type-R suppliers only for units sold.
    """
    outcomes = _decide_all(population, strategy.supplier(), mode, belief, noise_seed, threads)
    return aggregate(outcomes, strategy), outcomes


def compare_strategies(
    population: Sequence[ConsumerProfile],
    cells: Sequence[StrategyCell],
    mode: BehaviorMode,
    *,
    belief: BelievedCost = BelievedCost(),
    noise_seed: Optional[int] = None,
    threads: int = 1,
) -> list[tuple[StrategyCell, AggregateMetrics]]:
    return [
        (cell, run_cell(population, cell, mode, belief=belief, noise_seed=noise_seed, threads=threads)[0])
        for cell in cells
    ]


class SweepParameter(enum.Enum):
    LAMBDA = "lambda"
    GAMMA = "gamma"
    ERP_LEVEL = "erp_level"
    FREE_RIDER_SHARE = "free_rider_share"
    COST = "cost"


def validate_sweep_value(parameter: SweepParameter, x: float) -> None:
    if not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x):
        raise ParameterError(f"{parameter.value} grid value must be a finite number, got {x!r}")
    ok = {
        SweepParameter.LAMBDA: 0 < x <= 1,
        SweepParameter.GAMMA: x >= 0,
        SweepParameter.ERP_LEVEL: x >= 0,
        SweepParameter.FREE_RIDER_SHARE: 0 <= x <= 1,
        SweepParameter.COST: x >= 0,
    }[parameter]
    if not ok:
        raise ParameterError(f"invalid {parameter.value} grid value {x!r}")


@dataclass(frozen=True)
class SweepRow:
    value: float
    metrics: AggregateMetrics


def sweep(
    population_spec: PopulationSpec,
    strategy_template: StrategyCell,
    parameter: SweepParameter | str,
    grid: Sequence[float],
    mode: BehaviorMode,
    *,
    threads: int = 1,
) -> list[SweepRow]:
    """One metrics row per grid value.

    Sweeping ``lambda`` or ``free_rider_share`` resamples the population with
    the same seed; every other parameter reuses one population.
    """
    parameter = SweepParameter(parameter)
    if not grid:
        raise ParameterError("sweep grid must not be empty")
    for x in grid:
        validate_sweep_value(parameter, x)

    belief = population_spec.believed_cost
    base = None
    if parameter not in (SweepParameter.LAMBDA, SweepParameter.FREE_RIDER_SHARE):
        base = sample_population(population_spec)

    rows = []
    for x in grid:
        cell = strategy_template
        population = base
        if parameter is SweepParameter.LAMBDA:
            population = sample_population(population_spec.with_(lambda_dist=Constant(x)))
        elif parameter is SweepParameter.FREE_RIDER_SHARE:
            population = sample_population(population_spec.with_(free_rider_share=x))
        elif parameter is SweepParameter.GAMMA:
            population = tuple(replace(p, gamma=x) for p in base)
        elif parameter is SweepParameter.ERP_LEVEL:
            cell = replace(strategy_template, provide_erp=True, erp_level=x)
        else:
            cell = replace(strategy_template, cost=x)
        metrics, _ = run_cell(population, cell, mode, belief=belief,
                              noise_seed=population_spec.seed, threads=threads)
        rows.append(SweepRow(x, metrics))
    return rows
