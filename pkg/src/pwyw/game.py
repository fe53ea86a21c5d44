"""One consumer meets one supplier: scenario classification and the purchase decision.

The supplier moves first (cost type, whether to post an external reference
price, whether to reveal its cost); the consumer then picks a price or walks
away. The supplier cannot refuse an offer.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .optimizer import PriceRule, optimal_price_closed_form
from .preferences import (
    ConsumerProfile,
    CostType,
    ParameterError,
    SupplierProfile,
    buyer_utility,
    fair_split_price,
    no_buy_supplier_payoff,
    no_buy_utility,
    supplier_margin,
)


class Scenario(enum.Enum):
    GAIN_SEEKING = "GainSeeking"
    HERDING = "Herding"
    INEQUITY_AVERSION = "InequityAversion"
    SELF_IMAGE = "SelfImage"
    COST_REVEALED = "CostRevealed"


class ModeKind(enum.Enum):
    LITERAL = "literal"
    FS_MODEL = "fs_model"


@dataclass(frozen=True)
class BehaviorMode:
    """How prices are formed when the cost is hidden.

    ``LITERAL`` applies the anchor rules directly (a fixed fraction of ``v``
    without a reference price, the reference price or ``v`` otherwise).
    ``FS_MODEL`` maximises the inequity-averse utility instead. ``noise_sd``
    adds a zero-mean truncated normal perturbation to literal anchor prices,
    expressed as a fraction of the anchor; off by default.
    """

    kind: ModeKind = ModeKind.LITERAL
    literal_gain_fraction: float = 0.4
    price_rule: PriceRule = PriceRule.UPPER
    noise_sd: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", ModeKind(self.kind))
        object.__setattr__(self, "price_rule", PriceRule(self.price_rule))
        if not 0 < self.literal_gain_fraction < 1:
            raise ParameterError(
                f"requires 0 < literal_gain_fraction < 1, got {self.literal_gain_fraction}")
        if not (math.isfinite(self.noise_sd) and self.noise_sd >= 0):
            raise ParameterError(f"requires noise_sd >= 0, got {self.noise_sd}")


LITERAL = BehaviorMode(ModeKind.LITERAL)
FS_MODEL = BehaviorMode(ModeKind.FS_MODEL)


@dataclass(frozen=True)
class BelievedCost:
    """What a consumer takes the hidden cost to be under a sunk-cost belief.

    ``kind`` is ``"zero"``, ``"true_cost"`` or ``"fixed"`` (then ``value`` is used).
    Under a recoverable-cost belief the believed cost is always zero.
    """

    kind: str = "true_cost"
    value: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in ("zero", "true_cost", "fixed"):
            raise ParameterError(f"unknown believed-cost rule {self.kind!r}")
        if not (math.isfinite(self.value) and self.value >= 0):
            raise ParameterError(f"requires believed cost >= 0, got {self.value}")

    def resolve(self, true_cost: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "fixed":
            return self.value
        return true_cost


@dataclass(frozen=True)
class InteractionOutcome:
    bought: bool
    price: Optional[float]
    consumer_payoff: float
    supplier_payoff: float
    scenario: Scenario


def believed_cost_type(consumer: ConsumerProfile, supplier: SupplierProfile) -> CostType:
    return supplier.cost_type.flipped() if consumer.misbelieves else supplier.cost_type


def classify_scenario(supplier: SupplierProfile, believed_type: Optional[CostType] = None) -> Scenario:
    if supplier.reveals_cost:
        return Scenario.COST_REVEALED
    kind = supplier.cost_type if believed_type is None else believed_type
    has_erp = supplier.erp is not None
    if kind is CostType.RECOVERABLE:
        return Scenario.HERDING if has_erp else Scenario.GAIN_SEEKING
    return Scenario.SELF_IMAGE if has_erp else Scenario.INEQUITY_AVERSION


def effective_reference_price(consumer: ConsumerProfile, supplier: SupplierProfile) -> float:
    if supplier.erp is None:
        return consumer.v
    return min(supplier.erp, consumer.v)


def _perturb(anchor: float, cap: float, sd: float, rng: Optional[np.random.Generator]) -> float:
    if sd == 0 or rng is None or anchor == 0:
        return anchor
    # zero-mean normal truncated symmetrically so the price stays in [0, cap]
    half_width = min(anchor, cap - anchor)
    if half_width <= 0:
        return anchor
    scale = sd * anchor
    while True:
        eps = rng.normal(0.0, scale)
        if abs(eps) <= half_width:
            return anchor + eps


def fs_inputs(consumer: ConsumerProfile, supplier: SupplierProfile,
              belief: BelievedCost = BelievedCost()) -> tuple[float, float, float, float, float]:
    """``(p_r, c, alpha, beta, gamma)`` handed to the optimiser for a hidden-cost decision.

    A recoverable-cost belief removes any loss concern (``gamma = 0``) and the
    believed cost is zero. A believed cost above the reference price is
    clamped to it: on ``[0, p_r]`` that only shifts utility by a constant.
    """
    p_r = effective_reference_price(consumer, supplier)
    if believed_cost_type(consumer, supplier) is CostType.RECOVERABLE:
        return p_r, 0.0, consumer.alpha, consumer.beta, 0.0
    c = min(belief.resolve(supplier.cost), p_r)
    return p_r, c, consumer.alpha, consumer.beta, consumer.gamma


def _hidden_cost_price(consumer: ConsumerProfile, supplier: SupplierProfile, scenario: Scenario,
                       mode: BehaviorMode, belief: BelievedCost,
                       rng: Optional[np.random.Generator]) -> float:
    if mode.kind is ModeKind.FS_MODEL:
        argmax = optimal_price_closed_form(*fs_inputs(consumer, supplier, belief))
        return argmax.representative(mode.price_rule)

    p_r = effective_reference_price(consumer, supplier)
    if scenario is Scenario.GAIN_SEEKING:
        anchor = mode.literal_gain_fraction * consumer.v
    else:
        anchor = p_r
    return _perturb(anchor, consumer.v, mode.noise_sd, rng)


def decide(
    consumer: ConsumerProfile,
    supplier: SupplierProfile,
    mode: BehaviorMode = LITERAL,
    belief: BelievedCost = BelievedCost(),
    rng: Optional[np.random.Generator] = None,
) -> InteractionOutcome:
    """Resolve one interaction into a buy/no-buy outcome with both payoffs.

    Gates are checked in order: free riders take the item at zero; under the
    self-image scenario a reference price above ``v`` means no purchase; with
    a revealed cost, ``v`` below cost means no purchase. Otherwise the price
    comes from the fair split (cost revealed) or from ``mode``.

    For a no-buy the consumer payoff is the opportunity payoff of the price she
    would have paid without the gate (priced at ``p_r = v`` in the self-image
    case), or the cost when it is revealed to exceed ``v``.
    """
    scenario = classify_scenario(supplier, believed_cost_type(consumer, supplier))
    c = supplier.cost

    if consumer.is_free_rider:
        price = 0.0
    elif scenario is Scenario.SELF_IMAGE and supplier.erp > consumer.v:
        foregone = _hidden_cost_price(consumer, supplier, scenario, mode, belief, None)
        return _no_buy(foregone, supplier, scenario)
    elif scenario is Scenario.COST_REVEALED:
        if consumer.v < c:
            return _no_buy(c, supplier, scenario)
        price = fair_split_price(consumer.v, c, consumer.lam)
    else:
        price = _hidden_cost_price(consumer, supplier, scenario, mode, belief, rng)

    return InteractionOutcome(
        bought=True,
        price=price,
        consumer_payoff=buyer_utility(consumer.v, price),
        supplier_payoff=supplier_margin(price, c),
        scenario=scenario,
    )


def _no_buy(foregone: float, supplier: SupplierProfile, scenario: Scenario) -> InteractionOutcome:
    return InteractionOutcome(
        bought=False,
        price=None,
        consumer_payoff=no_buy_utility(foregone),
        supplier_payoff=no_buy_supplier_payoff(supplier),
        scenario=scenario,
    )

