"""Utility and payoff formulas for one consumer facing one PWYW supplier.

Everything here is a pure function of the consumer and supplier parameters.
Decision rules (who buys, at what price) live in :mod:`pwyw.game`; this module
only evaluates payoffs, including negative ones that the decision layer never
selects.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np


class ParameterError(ValueError):
    """A parameter violates a model invariant."""


class CostType(enum.Enum):
    RECOVERABLE = "R"
    SUNK = "S"

    @classmethod
    def parse(cls, value: "str | CostType") -> "CostType":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper()
        aliases = {"R": cls.RECOVERABLE, "RECOVERABLE": cls.RECOVERABLE,
                   "S": cls.SUNK, "SUNK": cls.SUNK}
        try:
            return aliases[key]
        except KeyError:
            raise ParameterError(f"unknown cost type {value!r} (expected R or S)") from None

    def flipped(self) -> "CostType":
        return CostType.SUNK if self is CostType.RECOVERABLE else CostType.RECOVERABLE


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ParameterError(msg)


def _finite(name: str, x: float) -> None:
    _require(isinstance(x, (int, float)) and math.isfinite(x), f"{name} must be a finite number, got {x!r}")


def validate_preferences(alpha: float, beta: float, gamma: float) -> None:
    for name, x in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        _finite(name, x)
    _require(0 <= beta < 1, f"requires 0 <= beta < 1, got beta={beta}")
    _require(alpha >= beta, f"requires alpha >= beta, got alpha={alpha}, beta={beta}")
    _require(gamma >= 0, f"requires gamma >= 0, got gamma={gamma}")


@dataclass(frozen=True)
class ConsumerProfile:
    """Private parameters of one consumer.

    ``lam`` is the share of the surplus ``v - cost`` passed to the supplier
    when the cost is revealed. ``misbelieves`` flips the consumer's belief
    about the supplier's cost type (belief equals truth when False).
    """

    v: float
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    lam: float = 0.5
    is_free_rider: bool = False
    misbelieves: bool = False

    def __post_init__(self) -> None:
        _finite("v", self.v)
        _require(self.v >= 0, f"requires v >= 0, got v={self.v}")
        validate_preferences(self.alpha, self.beta, self.gamma)
        _finite("lambda", self.lam)
        _require(0 < self.lam <= 1, f"requires 0 < lambda <= 1, got lambda={self.lam}")


@dataclass(frozen=True)
class SupplierProfile:
    cost: float
    cost_type: CostType = CostType.RECOVERABLE
    erp: Optional[float] = None
    reveals_cost: bool = False

    def __post_init__(self) -> None:
        _finite("cost", self.cost)
        _require(self.cost >= 0, f"requires cost >= 0, got cost={self.cost}")
        object.__setattr__(self, "cost_type", CostType.parse(self.cost_type))
        if self.erp is not None:
            _finite("erp", self.erp)
            _require(self.erp >= 0, f"requires erp >= 0, got erp={self.erp}")


@dataclass(frozen=True)
class UtilityBreakdown:
    surplus_term: float
    envy_penalty: float
    altruism_penalty: float
    loss_penalty: float
    total: float


def buyer_utility(v: float, p: float) -> float:
    return v - p


def no_buy_utility(p_foregone: float) -> float:
    """Opportunity payoff of walking away: the price that was not paid."""
    return p_foregone


def supplier_margin(p: float, c: float) -> float:
    return p - c


def no_buy_supplier_payoff(supplier: SupplierProfile) -> float:
    if supplier.cost_type is CostType.SUNK:
        return -supplier.cost if supplier.cost else 0.0
    return 0.0


def fair_split_price(v: float, c: float, lam: float) -> float:
    """Price of a fair-minded consumer who knows the cost: ``c + lam * (v - c)``.

    Raises :class:`ParameterError` when ``v < c``; such a consumer does not buy.
    """
    _require(c >= 0, f"requires c >= 0, got c={c}")
    _require(v >= c, f"requires v >= c (no purchase below cost), got v={v}, c={c}")
    _require(0 < lam <= 1, f"requires 0 < lambda <= 1, got lambda={lam}")
    # clamp guards the rounding of c + lam*(v - c) against leaving [c, v]
    return min(max(c + lam * (v - c), c), v)


def fair_split_utility(v: float, c: float, lam: float) -> float:
    _require(c >= 0, f"requires c >= 0, got c={c}")
    _require(v >= c, f"requires v >= c (no purchase below cost), got v={v}, c={c}")
    _require(0 < lam <= 1, f"requires 0 < lambda <= 1, got lambda={lam}")
    return (1 - lam) * (v - c)


def midpoint_fair_price(p_r: float, c: float) -> float:
    """Price that splits the surplus ``p_r - c`` equally between the two sides."""
    _require(c >= 0, f"requires c >= 0, got c={c}")
    _require(p_r >= c, f"requires c ≤ p_r, got p_r={p_r}, c={c}")
    return (p_r + c) / 2


def _inequity_gap(p_r: float, p: float, c: float, floored: bool) -> float:
    # supplier surplus minus consumer surplus; 2p - (p_r + c) is exactly zero
    # at the midpoint price, (p - c) - (p_r - p) is not always
    if floored and p < c:
        return p - p_r
    return 2 * p - (p_r + c)


def fs_extended_utility(
    p_r: float,
    p: float,
    c: float,
    alpha: float,
    beta: float,
    gamma: float,
    *,
    floored: bool = True,
) -> UtilityBreakdown:
    """Inequity-averse utility of paying ``p`` against reference price ``p_r``.

    Envy (weight ``alpha``) applies when the supplier's surplus exceeds the
    consumer's, altruism (``beta``) in the opposite case, and ``gamma``
    charges every unit the price falls below cost. With ``floored=True`` the
    supplier surplus entering the inequity comparison is ``max(p - c, 0)``, so
    below cost the marginal penalty is ``beta + gamma``. ``floored=False`` uses
    the raw margin ``p - c``.
    """
    _require(p >= 0, f"requires p >= 0, got p={p}")
    _require(p_r >= 0, f"requires p_r >= 0, got p_r={p_r}")
    _require(c >= 0, f"requires c >= 0, got c={c}")
    validate_preferences(alpha, beta, gamma)

    surplus = p_r - p
    gap = _inequity_gap(p_r, p, c, floored)
    envy = alpha * gap if gap > 0 else 0.0
    altruism = beta * -gap if gap < 0 else 0.0
    loss = gamma * (c - p) if c > p else 0.0
    total = surplus - envy - altruism - loss
    return UtilityBreakdown(surplus, envy, altruism, loss, total)


def fs_utility_values(p_r: float, prices: np.ndarray, c: float, alpha: float, beta: float,
                      gamma: float, *, floored: bool = True) -> np.ndarray:
    """Vectorised ``fs_extended_utility(...).total`` over an array of prices."""
    prices = np.asarray(prices, dtype=float)
    gap = 2 * prices - (p_r + c)
    if floored:
        gap = np.where(prices < c, prices - p_r, gap)
    envy = alpha * np.maximum(gap, 0.0)
    altruism = beta * np.maximum(-gap, 0.0)
    loss = gamma * np.maximum(c - prices, 0.0)
    return (p_r - prices) - envy - altruism - loss
