"""Exact maximisation of the inequity-averse PWYW utility over ``[0, p_r]``.

The utility is continuous and piecewise linear in the price with kinks at the
cost ``c`` and at the fair price ``(p_r + c) / 2``, so the maximum sits on one of
those breakpoints (or on a whole segment when its slope vanishes).
:func:`optimal_price_closed_form` exploits that; :func:`optimal_price_oracle`
ignores it and searches a dense grid. :func:`check_consistency` compares the
two.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .preferences import (
    ParameterError,
    fs_extended_utility,
    fs_utility_values,
    validate_preferences,
)

# slopes within this of zero count as flat (decimal inputs such as beta + gamma == 1)
SLOPE_EPS = 1e-12
UTILITY_RTOL = 1e-9
ORACLE_RSTEP = 1e-3


def utility_tolerance(p_r: float) -> float:
    return UTILITY_RTOL * max(1.0, p_r)


def default_step(p_r: float) -> float:
    return ORACLE_RSTEP * max(1.0, p_r)


class PriceRule(enum.Enum):
    """How a single price is picked out of an argmax set."""

    UPPER = "upper"
    LOWER = "lower"
    MIDPOINT = "midpoint"


@dataclass(frozen=True)
class ArgmaxSet:
    pieces: tuple[tuple[float, float], ...]
    max_utility: float

    def __post_init__(self) -> None:
        if not self.pieces:
            raise ValueError("argmax set must be non-empty")
        prev_hi = -math.inf
        for lo, hi in self.pieces:
            if lo > hi or lo <= prev_hi:
                raise ValueError(f"pieces must be sorted and disjoint: {self.pieces}")
            prev_hi = hi

    @property
    def is_point(self) -> bool:
        return len(self.pieces) == 1 and self.pieces[0][0] == self.pieces[0][1]

    @property
    def lower(self) -> float:
        return self.pieces[0][0]

    @property
    def upper(self) -> float:
        return self.pieces[-1][1]

    def distance(self, x: float) -> float:
        """Distance from ``x`` to the nearest element of the set."""
        return min(0.0 if lo <= x <= hi else min(abs(x - lo), abs(x - hi)) for lo, hi in self.pieces)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.distance(x) <= tol

    def representative(self, rule: PriceRule = PriceRule.UPPER) -> float:
        if rule is PriceRule.UPPER:
            return self.upper
        if rule is PriceRule.LOWER:
            return self.lower
        lo, hi = self.pieces[-1]
        return (lo + hi) / 2

    def describe(self, digits: int = 9) -> str:
        def fmt(x: float) -> str:
            return f"{x:.{digits}g}"

        parts = [("{" + fmt(lo) + "}") if lo == hi else f"[{fmt(lo)}, {fmt(hi)}]" for lo, hi in self.pieces]
        return " ∪ ".join(parts)


def _check_domain(p_r: float, c: float, alpha: float, beta: float, gamma: float) -> None:
    for name, x in (("p_r", p_r), ("c", c)):
        if not isinstance(x, (int, float)) or not math.isfinite(x):
            raise ParameterError(f"{name} must be a finite number, got {x!r}")
    if c < 0:
        raise ParameterError(f"requires c >= 0, got c={c}")
    if c > p_r:
        raise ParameterError(f"requires c ≤ p_r, got p_r={p_r}, c={c}")
    validate_preferences(alpha, beta, gamma)


def segment_slopes(alpha: float, beta: float, gamma: float, *, floored: bool = True) -> tuple[float, float, float]:
    """Slopes of the utility on ``[0, c]``, ``[c, P_f]`` and ``[P_f, p_r]``."""
    below_cost = (beta + gamma) - 1 if floored else (2 * beta + gamma) - 1
    return below_cost, 2 * beta - 1, -1 - 2 * alpha


def _flat(s: float) -> float:
    return 0.0 if abs(s) <= SLOPE_EPS else s


def optimal_price_closed_form(
    p_r: float,
    c: float,
    alpha: float,
    beta: float,
    gamma: float,
    *,
    floored: bool = True,
) -> ArgmaxSet:
    """Full argmax set of the utility over ``[0, p_r]``, from breakpoint values.

    Generic outcomes: ``{0}`` when ``beta < 0.5`` and ``beta + gamma < 1``;
    ``{c}`` when ``beta < 0.5`` and ``beta + gamma > 1``; the fair price when
    ``beta > 0.5`` and paying it beats paying nothing. Flat segments whose
    endpoints both attain the maximum are returned as intervals.
    """
    _check_domain(p_r, c, alpha, beta, gamma)
    p_f = (p_r + c) / 2
    s1, s2, _ = (_flat(s) for s in segment_slopes(alpha, beta, gamma, floored=floored))
    # zero-length segments are flat: their endpoints coincide
    if c == 0:
        s1 = 0.0
    if p_f == c:
        s2 = 0.0

    # the last segment always falls, so only 0, c and P_f can win; the sign of
    # each slope orders neighbouring breakpoints without comparing float values
    if s2 <= 0:
        if s1 > 0:
            pieces = [(c, p_f if s2 == 0 else c)]
        elif s1 < 0:
            pieces = [(0.0, 0.0)]
        else:
            pieces = [(0.0, p_f if s2 == 0 else c)]
    elif s1 >= 0:
        pieces = [(p_f, p_f)]
    else:
        # valley at c: paying nothing against paying the fair price
        gain = s1 * c + s2 * (p_f - c)
        if gain > 0:
            pieces = [(p_f, p_f)]
        elif gain < 0:
            pieces = [(0.0, 0.0)]
        else:
            pieces = [(0.0, 0.0), (p_f, p_f)]

    ends = {x for piece in pieces for x in piece}
    max_u = max(fs_extended_utility(p_r, x, c, alpha, beta, gamma, floored=floored).total for x in ends)
    return ArgmaxSet(tuple((float(lo), float(hi)) for lo, hi in pieces), max_u)


def _oracle_grid(p_r: float, c: float, step: float) -> np.ndarray:
    n = int(math.floor(p_r / step + 1e-9))
    grid = np.arange(n + 1, dtype=float) * step
    grid = grid[grid <= p_r]
    return np.unique(np.concatenate([grid, [p_r, c, (p_r + c) / 2]]))


def _oracle_points(p_r, c, alpha, beta, gamma, step, tol, floored):
    grid = _oracle_grid(p_r, c, step)
    values = fs_utility_values(p_r, grid, c, alpha, beta, gamma, floored=floored)
    best = float(values.max())
    return grid, values >= best - tol, best


def optimal_price_oracle(
    p_r: float,
    c: float,
    alpha: float,
    beta: float,
    gamma: float,
    step: Optional[float] = None,
    *,
    tol: Optional[float] = None,
    floored: bool = True,
) -> ArgmaxSet:
    """Brute-force argmax on a grid of spacing ``step`` (breakpoints always included).

    Grid points within ``tol`` of the grid maximum qualify; runs of consecutive
    qualifying points are coalesced into intervals.
    """
    if step is None:
        step = default_step(p_r)
    if not step > 0:
        raise ParameterError(f"requires step > 0, got step={step}")
    _check_domain(p_r, c, alpha, beta, gamma)
    if tol is None:
        tol = utility_tolerance(p_r)

    grid, hit, best = _oracle_points(p_r, c, alpha, beta, gamma, step, tol, floored)
    pieces = []
    start = None
    for i, ok in enumerate(hit):
        if ok and start is None:
            start = i
        if start is not None and (not ok or i == len(hit) - 1):
            end = i if ok else i - 1
            pieces.append((float(grid[start]), float(grid[end])))
            start = None
    return ArgmaxSet(tuple(pieces), best)


@dataclass
class ConsistencyReport:
    passed: bool
    params: dict
    closed_form: Optional[ArgmaxSet] = None
    oracle: Optional[ArgmaxSet] = None
    worst_point_distance: float = 0.0
    utility_gap: float = 0.0
    messages: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "params": dict(self.params),
            "closed_form": None if self.closed_form is None else [list(p) for p in self.closed_form.pieces],
            "oracle": None if self.oracle is None else [list(p) for p in self.oracle.pieces],
            "worst_point_distance": self.worst_point_distance,
            "utility_gap": self.utility_gap,
            "messages": list(self.messages),
        }


def check_consistency(
    p_r: float,
    c: float,
    alpha: float,
    beta: float,
    gamma: float,
    step: Optional[float] = None,
    tol: float = 1e-6,
    utility_tol: Optional[float] = None,
    *,
    floored: bool = True,
) -> ConsistencyReport:
    """Cross-check the closed form against the grid oracle for one tuple.

    Every qualifying oracle grid point must lie within ``step + tol`` of the
    closed-form set and the two maxima must agree within ``utility_tol``.
    Failures are reported, not raised; invalid parameters still raise.
    """
    _check_domain(p_r, c, alpha, beta, gamma)
    if step is None:
        step = default_step(p_r)
    if utility_tol is None:
        utility_tol = utility_tolerance(p_r)
    params = dict(p_r=p_r, c=c, alpha=alpha, beta=beta, gamma=gamma, step=step)

    exact = optimal_price_closed_form(p_r, c, alpha, beta, gamma, floored=floored)
    oracle = optimal_price_oracle(p_r, c, alpha, beta, gamma, step, tol=utility_tol, floored=floored)
    grid, hit, best = _oracle_points(p_r, c, alpha, beta, gamma, step, utility_tol, floored)

    worst = max(exact.distance(float(x)) for x in grid[hit])
    gap = abs(best - exact.max_utility)
    messages = []
    if worst > step + tol:
        messages.append(f"oracle point {worst:.3g} away from closed-form set {exact.describe()}")
    if gap > utility_tol:
        messages.append(f"max utility mismatch {gap:.3g} (closed form {exact.max_utility!r}, oracle {best!r})")
    # the closed form must not claim points the oracle rejects
    for lo, hi in exact.pieces:
        for x in {lo, hi, (lo + hi) / 2}:
            u = fs_extended_utility(p_r, x, c, alpha, beta, gamma, floored=floored).total
            if u < best - utility_tol:
                messages.append(f"closed-form point {x!r} has utility {u!r} below oracle max {best!r}")
    return ConsistencyReport(not messages, params, exact, oracle, worst, gap, messages)


def formula_case(beta: float, gamma: float) -> str:
    """Label of the parameter region in the three-case optimal-price rule."""
    s1, s2, _ = (_flat(s) for s in segment_slopes(1.0, beta, gamma))
    if s2 > 0:
        return "beta > 0.5"
    if s2 == 0:
        return "beta = 0.5"
    if s1 < 0:
        return "beta < 0.5 and beta + gamma < 1"
    if s1 > 0:
        return "beta < 0.5 and beta + gamma > 1"
    return "beta < 0.5 and beta + gamma = 1"


def formula_price(p_r: float, c: float, beta: float, gamma: float) -> Optional[float]:
    """Price the three-case rule names for strict cases; ``None`` on boundaries."""
    case = formula_case(beta, gamma)
    return {
        "beta > 0.5": (p_r + c) / 2,
        "beta < 0.5 and beta + gamma < 1": 0.0,
        "beta < 0.5 and beta + gamma > 1": c,
    }.get(case)
