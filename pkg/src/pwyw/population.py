"""Seeded sampling of heterogeneous consumer populations.

Consumer ``i`` draws from its own generator seeded by ``(seed, i)``, so a
profile never depends on how many other consumers were drawn or in what order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
from scipy.special import ndtr, ndtri

from .game import BelievedCost
from .preferences import ConsumerProfile, ParameterError

MAX_REJECTIONS = 1000

_CONSUMER_STREAM = 0
_SHUFFLE_STREAM = 1
_MISBELIEF_STREAM = 2
_NOISE_STREAM = 3


class PopulationError(ValueError):
    pass


@dataclass(frozen=True)
class Constant:
    value: float

    def sample(self, rng: np.random.Generator) -> float:
        return float(self.value)

    @property
    def support(self) -> tuple[float, float]:
        return (self.value, self.value)


@dataclass(frozen=True)
class Uniform:
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.lo <= self.hi:
            raise ParameterError(f"uniform requires lo <= hi, got ({self.lo}, {self.hi})")

    def sample(self, rng: np.random.Generator) -> float:
        return float(rng.uniform(self.lo, self.hi))

    @property
    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)


@dataclass(frozen=True)
class TruncatedNormal:
    """Normal(mean, sd) conditioned on ``[lo, hi]``, drawn by inverse CDF."""

    mean: float
    sd: float
    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not self.sd > 0:
            raise ParameterError(f"truncated_normal requires sd > 0, got {self.sd}")
        if not self.lo < self.hi:
            raise ParameterError(f"truncated_normal requires lo < hi, got ({self.lo}, {self.hi})")
        a, b = self._cdf_bounds()
        if not b > a:
            raise ParameterError("truncated_normal bounds carry no probability mass")

    def _cdf_bounds(self) -> tuple[float, float]:
        return (float(ndtr((self.lo - self.mean) / self.sd)),
                float(ndtr((self.hi - self.mean) / self.sd)))

    def sample(self, rng: np.random.Generator) -> float:
        a, b = self._cdf_bounds()
        u = a + rng.random() * (b - a)
        x = self.mean + self.sd * float(ndtri(u))
        return min(max(x, self.lo), self.hi)

    @property
    def support(self) -> tuple[float, float]:
        return (self.lo, self.hi)


Distribution = Union[Constant, Uniform, TruncatedNormal]


def _default_v() -> Distribution:
    return Uniform(5.0, 15.0)


def _default_alpha() -> Distribution:
    return TruncatedNormal(0.85, 0.5, 0.0, 4.0)


def _default_beta() -> Distribution:
    return TruncatedNormal(0.315, 0.2, 0.0, 0.99)


def _default_gamma() -> Distribution:
    return TruncatedNormal(0.5, 0.3, 0.0, 2.0)


def _default_lambda() -> Distribution:
    return Constant(0.5)


@dataclass(frozen=True)
class PopulationSpec:
    seed: int
    size: int = 1000
    v_dist: Distribution = field(default_factory=_default_v)
    alpha_dist: Distribution = field(default_factory=_default_alpha)
    beta_dist: Distribution = field(default_factory=_default_beta)
    gamma_dist: Distribution = field(default_factory=_default_gamma)
    lambda_dist: Distribution = field(default_factory=_default_lambda)
    free_rider_share: float = 0.0
    misbelief_rate: float = 0.0
    believed_cost: BelievedCost = field(default_factory=BelievedCost)

    def __post_init__(self) -> None:
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ParameterError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if not (isinstance(self.size, int) and self.size >= 1):
            raise ParameterError(f"size must be a positive integer, got {self.size!r}")
        for name, share in (("free_rider_share", self.free_rider_share), ("misbelief_rate", self.misbelief_rate)):
            if not 0 <= share <= 1:
                raise ParameterError(f"requires 0 <= {name} <= 1, got {share}")
        checks = {
            "v": (self.v_dist, lambda lo, hi: lo >= 0, "v >= 0"),
            "beta": (self.beta_dist, lambda lo, hi: lo >= 0 and hi < 1, "beta in [0, 1)"),
            "alpha": (self.alpha_dist, lambda lo, hi: lo >= 0, "alpha >= 0"),
            "gamma": (self.gamma_dist, lambda lo, hi: lo >= 0, "gamma >= 0"),
            "lambda": (self.lambda_dist, lambda lo, hi: lo > 0 and hi <= 1, "lambda in (0, 1]"),
        }
        for name, (dist, ok, rule) in checks.items():
            if not ok(*dist.support):
                raise ParameterError(f"{name} distribution support {dist.support} violates {rule}")
        if self.alpha_dist.support[1] < self.beta_dist.support[0]:
            raise ParameterError("alpha support lies entirely below beta support; alpha >= beta unattainable")

    def with_(self, **changes) -> "PopulationSpec":
        return replace(self, **changes)


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def _sample_consumer(spec: PopulationSpec, index: int) -> dict:
    rng = _stream(spec.seed, _CONSUMER_STREAM, index)
    v = spec.v_dist.sample(rng)
    for _ in range(MAX_REJECTIONS):
        alpha = spec.alpha_dist.sample(rng)
        beta = spec.beta_dist.sample(rng)
        if alpha >= beta:
            break
    else:
        raise PopulationError(
            f"consumer {index}: no draw with alpha >= beta in {MAX_REJECTIONS} attempts; "
            "check the alpha and beta supports")
    gamma = spec.gamma_dist.sample(rng)
    lam = spec.lambda_dist.sample(rng)
    return dict(v=v, alpha=alpha, beta=beta, gamma=gamma, lam=lam)


def _flagged(seed: int, stream: int, size: int, share: float) -> set[int]:
    # the epsilon keeps shares such as 0.29 * 100 from flooring to 28
    count = min(size, math.floor(size * share + 1e-9))
    if count == 0:
        return set()
    order = _stream(seed, stream).permutation(size)
    return set(int(i) for i in order[:count])


def sample_population(spec: PopulationSpec) -> tuple[ConsumerProfile, ...]:
    """Draw ``spec.size`` consumers.

    Exactly ``floor(size * free_rider_share)`` of them are free riders, chosen
    by a seeded shuffle; misbelieving consumers are chosen the same way.
    """
    free = _flagged(spec.seed, _SHUFFLE_STREAM, spec.size, spec.free_rider_share)
    wrong = _flagged(spec.seed, _MISBELIEF_STREAM, spec.size, spec.misbelief_rate)
    return tuple(
        ConsumerProfile(**_sample_consumer(spec, i), is_free_rider=i in free, misbelieves=i in wrong)
        for i in range(spec.size)
    )


def consumer_stream(seed: int, index: int) -> np.random.Generator:
    """Generator for per-consumer behavioural noise, independent of the sampling stream."""
    return _stream(seed, _NOISE_STREAM, index)
