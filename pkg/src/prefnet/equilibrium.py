"""Observables and equilibrium labels for final action profiles."""

from __future__ import annotations

import enum
import itertools
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from .dynamics import PopulationState, best_response_profile, neighbour_ones
from .errors import ConfigError
from .game import GameKind, PayoffParams, payoff
from .graph import Graph

__all__ = [
    "EquilibriumClass",
    "Observables",
    "observables",
    "classify",
    "is_fixed_point",
    "verify_nash_bruteforce",
    "enumerate_equilibria",
    "MAX_ENUMERATION_NODES",
]

MAX_ENUMERATION_NODES = 20
_CHUNK = 1 << 15

_ExactRewards = namedtuple("_ExactRewards", "alpha beta")


class EquilibriumClass(str, enum.Enum):
    SS = "SS"  # satisfactory specialized
    FS = "FS"  # frustrated specialized
    SH = "SH"  # satisfactory hybrid
    FH = "FH"  # frustrated hybrid
    NE = "NE"  # not an equilibrium

    @property
    def satisfactory(self) -> bool:
        return self in (EquilibriumClass.SS, EquilibriumClass.SH)

    @property
    def specialized(self) -> bool:
        return self in (EquilibriumClass.SS, EquilibriumClass.FS)

    @property
    def hybrid(self) -> bool:
        return self in (EquilibriumClass.SH, EquilibriumClass.FH)


@dataclass(frozen=True)
class Observables:
    d1: float
    df: float


def observables(s: PopulationState) -> Observables:
    """Fraction of agents playing 1 and fraction playing against their type."""
    if s.n == 0:
        return Observables(0.0, 0.0)
    d1 = int(s.actions.sum()) / s.n
    df = int(np.count_nonzero(s.actions != s.preferences)) / s.n
    return Observables(d1, df)


def is_fixed_point(s: PopulationState, p: PayoffParams, kind: GameKind) -> bool:
    """True when every agent already plays its complete-information best response."""
    chi = neighbour_ones(s.graph, s.actions)
    br = best_response_profile(s.preferences, s.graph.degrees, chi, 1, p, kind)
    return bool(np.array_equal(br, s.actions))


def classify(s: PopulationState, p: PayoffParams | None = None, kind: GameKind | None = None,
             require_nash: bool = False) -> EquilibriumClass:
    """Label a profile SS/FS/SH/FH by whether it is specialized and whether anyone is frustrated.

    With ``require_nash`` the profile must first be a best-response fixed point,
    otherwise ``NE`` is returned.
    """
    if require_nash:
        if p is None or kind is None:
            raise ValueError("require_nash needs payoff params and game kind")
        if not is_fixed_point(s, p, kind):
            return EquilibriumClass.NE
    specialized = s.n == 0 or bool(np.all(s.actions == s.actions[0]))
    satisfactory = not np.any(s.actions != s.preferences)
    if specialized:
        return EquilibriumClass.SS if satisfactory else EquilibriumClass.FS
    return EquilibriumClass.SH if satisfactory else EquilibriumClass.FH


def verify_nash_bruteforce(s: PopulationState, p: PayoffParams, kind: GameKind):
    """Check every unilateral deviation with exact payoffs.

    Returns ``(is_nash, violators)`` where ``violators`` lists the agents that
    strictly gain by switching.
    """
    exact = _exact(p)
    g = s.graph
    violators = []
    for i in range(g.n):
        nbrs = g.indices[g.indptr[i]:g.indptr[i + 1]]
        k = len(nbrs)
        chi = int(s.actions[nbrs].sum())
        theta, x = int(s.preferences[i]), int(s.actions[i])
        if payoff(theta, 1 - x, k, chi, exact, kind) > payoff(theta, x, k, chi, exact, kind):
            violators.append(i)
    return not violators, violators


def _exact(p):
    return _ExactRewards(p.exact_alpha, p.exact_beta)


def enumerate_equilibria(g: Graph, preferences, p: PayoffParams, kind: GameKind):
    """All pure Nash profiles of the game on ``g``, each with its class.

    Brute force over ``2**n`` profiles; refuses ``n > 20``. Profiles come back
    as tuples in lexicographic order.
    """
    n = g.n
    if n > MAX_ENUMERATION_NODES:
        raise ConfigError(f"refusing to enumerate 2**{n} profiles (limit n <= {MAX_ENUMERATION_NODES})")
    prefs = np.asarray(preferences, dtype=np.int8)
    if prefs.shape != (n,):
        raise ValueError(f"need {n} preferences, got {prefs.shape}")
    kind = GameKind.parse(kind)
    if n == 0:
        return [((), EquilibriumClass.SS)]
    adj = np.zeros((n, n), dtype=np.int64)
    adj[g.rows, g.indices] = 1
    k = g.degrees.astype(np.int64)
    # exact payoffs scaled to integers: lam in {a, b} with a/b = alpha/beta
    a, b = p.weights
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    out = []
    for start in range(0, 2**n, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, 2**n), dtype=np.int64)
        # one row per action vector, node 0 most significant
        profiles = (codes[:, None] >> shifts) & 1
        chi = profiles @ adj

        def scaled(x):
            matches = np.where(x == 1, chi, k - chi)
            hits = matches if kind is GameKind.CG else k - matches
            return np.where(x == prefs, a, b) * (1 + hits)

        stable = np.all(scaled(profiles) >= scaled(1 - profiles), axis=1)
        for row in profiles[stable]:
            out.append((tuple(int(v) for v in row), classify(PopulationState(g, prefs, row))))
    return out


def enumerate_equilibria_slow(g: Graph, preferences, p: PayoffParams, kind: GameKind):
    """Reference enumeration through ``verify_nash_bruteforce``; small ``n`` only."""
    out = []
    for row in itertools.product((0, 1), repeat=g.n):
        state = PopulationState(g, preferences, row)
        if verify_nash_bruteforce(state, p, kind)[0]:
            out.append((row, classify(state)))
    return out
