"""Payoffs and pure best responses for two-action games with preferences.

An agent of type ``theta`` playing ``x`` earns ``lam * (1 + hits)`` where
``lam`` is ``alpha`` if ``x == theta`` and ``beta`` otherwise, and ``hits``
counts neighbours playing the same action (coordination) or the other action
(anticoordination).

Best responses are decided in exact rational arithmetic. Rewards are read as
the nearest fraction with denominator at most ``10**6`` so that a user-facing
``alpha=0.6, beta=0.4`` is really ``3/5, 2/5`` and ties stay ties.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigError

__all__ = [
    "GameKind",
    "PayoffParams",
    "Regime",
    "as_fraction",
    "lambda_reward",
    "payoff",
    "lower_threshold",
    "upper_threshold",
    "best_response_complete",
    "best_response_incomplete",
    "regime_predict",
]

MAX_DENOMINATOR = 10**6


class GameKind(str, enum.Enum):
    CG = "CG"
    AG = "AG"

    @property
    def delta(self) -> int:
        return 1 if self is GameKind.CG else 0

    @classmethod
    def parse(cls, value) -> "GameKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ConfigError(f"unknown game {value!r} (expected CG or AG)") from None


class Regime(str, enum.Enum):
    SYMMETRIC_SATISFACTORY = "SymmetricSatisfactory"
    ONES_SATISFIED = "OnesSatisfied"
    ZEROS_SATISFIED = "ZerosSatisfied"


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(x).limit_denominator(MAX_DENOMINATOR)


@dataclass(frozen=True)
class PayoffParams:
    """Rewards for the liked (``alpha``) and disliked (``beta``) action.

    Requires ``0 < beta < alpha < 2 * beta``. ``weights`` holds coprime
    integers proportional to ``(alpha, beta)``; only the ratio matters for
    best responses.
    """

    alpha: float
    beta: float
    exact_alpha: Fraction = field(init=False, repr=False, compare=False)
    exact_beta: Fraction = field(init=False, repr=False, compare=False)
    weights: tuple[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a, b = self.alpha, self.beta
        try:
            ok = 0 < b < a < 2 * b
        except TypeError:
            raise ConfigError(f"rewards must be numbers, got alpha={a!r}, beta={b!r}") from None
        if not ok:
            raise ConfigError(f"rewards (alpha={a}, beta={b}) violate 0 < beta < alpha < 2*beta")
        fa, fb = as_fraction(a), as_fraction(b)
        if not 0 < fb < fa < 2 * fb:
            raise ConfigError(f"rewards (alpha={a}, beta={b}) too close to the validity boundary")
        ratio = fa / fb
        object.__setattr__(self, "exact_alpha", fa)
        object.__setattr__(self, "exact_beta", fb)
        object.__setattr__(self, "weights", (ratio.numerator, ratio.denominator))

    @property
    def ratio(self) -> float:
        return self.alpha / self.beta


def lambda_reward(theta: int, x: int, p: PayoffParams):
    return p.alpha if x == theta else p.beta


def payoff(theta: int, x: int, k: int, chi: int, p: PayoffParams, kind: GameKind):
    """Payoff of action ``x`` for a type-``theta`` agent with ``chi`` of ``k`` neighbours on 1.

    Works with float or Fraction rewards; pass ``PayoffParams`` or any object
    with ``alpha``/``beta`` attributes.
    """
    if not 0 <= chi <= k:
        raise ValueError(f"need 0 <= chi <= k, got chi={chi}, k={k}")
    matches = chi if x == 1 else k - chi
    hits = matches if GameKind.parse(kind) is GameKind.CG else k - matches
    return lambda_reward(theta, x, p) * (1 + hits)


def lower_threshold(k: int, p: PayoffParams) -> float:
    return (p.beta * k - (p.alpha - p.beta)) / (p.alpha + p.beta)


def upper_threshold(k: int, p: PayoffParams) -> float:
    return (p.alpha * k + (p.alpha - p.beta)) / (p.alpha + p.beta)


def _at_least_lower(chi: Fraction, k: int, a: int, b: int) -> bool:
    # chi >= (b*k - (a-b)) / (a+b)
    return chi * (a + b) >= b * k - (a - b)


def _at_most_upper(chi: Fraction, k: int, a: int, b: int) -> bool:
    # chi <= (a*k + (a-b)) / (a+b)
    return chi * (a + b) <= a * k + (a - b)


def _threshold_rule(theta: int, chi: Fraction, k: int, p: PayoffParams, kind: GameKind) -> int:
    a, b = p.weights
    kind = GameKind.parse(kind)
    if kind is GameKind.CG:
        if theta == 1:
            return 1 if _at_least_lower(chi, k, a, b) else 0
        return 0 if _at_most_upper(chi, k, a, b) else 1
    if theta == 1:
        return 1 if _at_most_upper(chi, k, a, b) else 0
    return 0 if _at_least_lower(chi, k, a, b) else 1


def best_response_complete(theta: int, k: int, chi: int, p: PayoffParams, kind: GameKind) -> int:
    """Best action given the observed count ``chi`` of neighbours playing 1.

    Exact ties go to the preferred action.
    """
    if not 0 <= chi <= k:
        raise ValueError(f"need 0 <= chi <= k, got chi={chi}, k={k}")
    return _threshold_rule(theta, Fraction(chi), k, p, kind)


def best_response_incomplete(theta: int, k: int, rho, p: PayoffParams, kind: GameKind) -> int:
    """Best action when only the degree ``k`` and population share ``rho`` of type 1 are known.

    The expected count ``rho * k`` is used unrounded.
    """
    rho = as_fraction(rho)
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    return _threshold_rule(theta, rho * k, k, p, kind)


def regime_predict(rho, p: PayoffParams) -> Regime:
    """Which incomplete-information regime a population share ``rho`` falls in."""
    rho = as_fraction(rho)
    if not 0 <= rho <= 1:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    fa, fb = p.exact_alpha, p.exact_beta
    if rho > fa / (fa + fb):
        return Regime.ONES_SATISFIED
    if rho < fb / (fa + fb):
        return Regime.ZEROS_SATISFIED
    return Regime.SYMMETRIC_SATISFACTORY
