"""Round-by-round evolution of action profiles.

Best response is synchronous: every agent answers the previous round's
profile. Proportional imitation samples one neighbour per selected agent and
copies it with probability proportional to the payoff gap. Both step functions
return a new state and never mutate their input.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .errors import ConfigError
from .game import GameKind, PayoffParams, as_fraction
from .graph import Graph

__all__ = [
    "Rule",
    "Info",
    "Init",
    "Termination",
    "PopulationState",
    "DynamicsSpec",
    "RunResult",
    "init_population",
    "step_best_response",
    "step_proportional_imitation",
    "default_phi",
    "adoption_probability",
    "payoffs",
    "neighbour_ones",
    "best_response_profile",
    "simulate",
    "run",
]


class Rule(str, enum.Enum):
    BEST_RESPONSE = "BR"
    PROPORTIONAL_IMITATION = "PI"


class Info(str, enum.Enum):
    COMPLETE = "complete"
    INCOMPLETE = "incomplete"


class Init(str, enum.Enum):
    UNIFORM_RANDOM = "uniform_random"
    ALL_PREFERRED = "all_preferred"


class Termination(str, enum.Enum):
    FIXED_POINT = "FixedPoint"
    TWO_CYCLE = "TwoCycle"
    BUDGET = "StepBudgetExhausted"


def parse_enum(cls, value, what):
    if isinstance(value, cls):
        return value
    for member in cls:
        if str(value).lower() in (member.value.lower(), member.name.lower()):
            return member
    choices = ", ".join(m.value for m in cls)
    raise ConfigError(f"unknown {what} {value!r} (expected one of {choices})")


@dataclass(frozen=True, eq=False)
class PopulationState:
    """Preferences and current actions of every node of ``graph`` (int8 arrays)."""

    graph: Graph
    preferences: np.ndarray
    actions: np.ndarray

    def __post_init__(self):
        n = self.graph.n
        prefs = np.asarray(self.preferences, dtype=np.int8)
        acts = np.asarray(self.actions, dtype=np.int8)
        if prefs.shape != (n,) or acts.shape != (n,):
            raise ValueError(f"preferences and actions must have length {n}")
        if np.any((prefs != 0) & (prefs != 1)) or np.any((acts != 0) & (acts != 1)):
            raise ValueError("preferences and actions must be 0/1")
        object.__setattr__(self, "preferences", prefs)
        object.__setattr__(self, "actions", acts)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def rho(self) -> Fraction:
        """Share of type-1 agents as an exact fraction."""
        if self.n == 0:
            return Fraction(0)
        return Fraction(int(self.preferences.sum()), self.n)

    def with_actions(self, actions) -> "PopulationState":
        return replace(self, actions=actions)

    def mirrored(self) -> "PopulationState":
        return PopulationState(self.graph, 1 - self.preferences, 1 - self.actions)


@dataclass(frozen=True)
class DynamicsSpec:
    rule: Rule = Rule.BEST_RESPONSE
    update_fraction: float = 1.0
    max_steps: int = 100
    convergence_window: int = 20

    def __post_init__(self):
        object.__setattr__(self, "rule", parse_enum(Rule, self.rule, "dynamics rule"))
        if not 0 < self.update_fraction <= 1:
            raise ConfigError(f"update_fraction must lie in (0, 1], got {self.update_fraction}")
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ConfigError(f"max_steps must be a positive integer, got {self.max_steps}")
        if int(self.convergence_window) != self.convergence_window or self.convergence_window < 1:
            raise ConfigError(
                f"convergence_window must be a positive integer, got {self.convergence_window}")


@dataclass
class RunResult:
    final_state: PopulationState
    steps_taken: int
    termination: Termination
    changes: list[int] = field(default_factory=list)
    # (d1, df) after each step, index 0 is the initial profile; filled on request
    trajectory: list[tuple[float, float]] | None = None


def init_population(g: Graph, rho, init=Init.ALL_PREFERRED, rng_seed=0) -> PopulationState:
    """Assign exactly ``round(rho * n)`` type-1 agents at seeded random positions."""
    if not 0 <= rho <= 1:
        raise ConfigError(f"rho must lie in [0, 1], got {rho}")
    init = parse_enum(Init, init, "init policy")
    rng = np.random.default_rng(rng_seed)
    n = g.n
    ones = math.floor(rho * n + 0.5)
    prefs = np.zeros(n, dtype=np.int8)
    prefs[rng.permutation(n)[:ones]] = 1
    if init is Init.UNIFORM_RANDOM:
        acts = rng.integers(0, 2, size=n, dtype=np.int8)
    else:
        acts = prefs.copy()
    return PopulationState(g, prefs, acts)


def neighbour_ones(g: Graph, actions: np.ndarray) -> np.ndarray:
    """Number of neighbours playing 1, per node."""
    if g.indices.size == 0:
        return np.zeros(g.n, dtype=np.int64)
    return np.bincount(g.rows, weights=actions[g.indices], minlength=g.n).astype(np.int64)


def _int_dtype(*bounds):
    # int64 unless products could overflow; then exact Python ints
    return np.int64 if max(bounds) < 2**62 else object


def best_response_profile(theta, k, chi_num, chi_den, p: PayoffParams, kind: GameKind):
    """Vectorised exact best response to ``chi = chi_num / chi_den`` neighbours on 1.

    Compares the two actions' payoffs scaled by ``beta * chi_den`` so every
    quantity is an integer. Ties go to ``theta``.
    """
    a, b = p.weights
    kmax = int(k.max()) if k.size else 0
    dt = _int_dtype(max(a, b) * (kmax + 1) * chi_den)
    theta = np.asarray(theta).astype(dt)
    k = np.asarray(k).astype(dt)
    chi = np.asarray(chi_num).astype(dt)
    # scaled counts: chi_den * (1 + matches)
    ones_side = chi_den + chi
    zeros_side = chi_den * (1 + k) - chi
    if GameKind.parse(kind) is GameKind.AG:
        ones_side, zeros_side = zeros_side, ones_side
    w1 = np.where(theta == 1, a, b)
    w0 = np.where(theta == 0, a, b)
    u1 = w1 * ones_side
    u0 = w0 * zeros_side
    out = (u1 > u0) | ((u1 == u0) & (theta == 1))
    return out.astype(np.int8)


def step_best_response(s: PopulationState, p: PayoffParams, kind: GameKind,
                       info=Info.COMPLETE, rho=None):
    """One synchronous best-response round. Returns ``(new_state, changed)``.

    Under incomplete information every agent answers the expected count
    ``rho * k`` (``rho`` defaults to the population's own type-1 share) and the
    observed profile is ignored.
    """
    info = parse_enum(Info, info, "information regime")
    k = s.graph.degrees
    if info is Info.COMPLETE:
        new = best_response_profile(s.preferences, k, neighbour_ones(s.graph, s.actions), 1, p, kind)
    else:
        r = s.rho if rho is None else as_fraction(rho)
        if not 0 <= r <= 1:
            raise ConfigError(f"rho must lie in [0, 1], got {rho}")
        new = best_response_profile(s.preferences, k, r.numerator * k.astype(object),
                                    r.denominator, p, kind)
    changed = int(np.count_nonzero(new != s.actions))
    return s.with_actions(new), changed


def default_phi(g: Graph, p: PayoffParams) -> float:
    """Largest payoff gap any pair of agents on ``g`` can show."""
    kmax = int(g.degrees.max()) if g.n else 0
    return p.alpha * (1 + kmax) - p.beta


def adoption_probability(pi_i, pi_j, phi):
    """Chance that an agent earning ``pi_i`` copies a neighbour earning ``pi_j``."""
    gap = np.asarray(pi_j, dtype=float) - np.asarray(pi_i, dtype=float)
    return np.where(gap > 0, gap / phi, 0.0)


def payoffs(s: PopulationState, p: PayoffParams, kind: GameKind) -> np.ndarray:
    """Current float payoff of every agent."""
    k = s.graph.degrees
    chi = neighbour_ones(s.graph, s.actions)
    matches = np.where(s.actions == 1, chi, k - chi)
    hits = matches if GameKind.parse(kind) is GameKind.CG else k - matches
    lam = np.where(s.actions == s.preferences, p.alpha, p.beta)
    return lam * (1 + hits)


def step_proportional_imitation(s: PopulationState, p: PayoffParams, kind: GameKind,
                                phi: float, update_fraction: float, rng: np.random.Generator):
    """One round of proportional imitation. Returns ``(new_state, changed)``.

    ``round(update_fraction * n)`` agents are drawn; each with at least one
    neighbour looks at a uniformly random neighbour ``j`` and copies ``x_j``
    with probability ``max(0, pi_j - pi_i) / phi``. Everything is evaluated on
    the pre-step profile and applied at once.
    """
    g = s.graph
    n = g.n
    if phi < default_phi(g, p) - 1e-12:
        raise ConfigError(f"phi={phi} is below the largest attainable payoff gap "
                          f"{default_phi(g, p)}; adoption probabilities could exceed 1")
    m = math.floor(update_fraction * n + 0.5)
    if m == 0 or n == 0:
        return s, 0
    chosen = np.sort(rng.choice(n, size=m, replace=False)) if m < n else np.arange(n)
    k = g.degrees[chosen]
    # offsets drawn for every chosen agent so the stream does not depend on degrees
    u_nbr = rng.random(m)
    u_adopt = rng.random(m)
    active = k > 0
    chosen, k, u_nbr, u_adopt = chosen[active], k[active], u_nbr[active], u_adopt[active]
    pick = np.minimum((u_nbr * k).astype(np.int64), k - 1)
    j = g.indices[g.indptr[chosen] + pick]
    pi = payoffs(s, p, kind)
    prob = adoption_probability(pi[chosen], pi[j], phi)
    assert np.all((prob >= 0) & (prob <= 1 + 1e-12)), "adoption probability out of [0, 1]"
    adopt = u_adopt < prob
    new = s.actions.copy()
    new[chosen[adopt]] = s.actions[j[adopt]]
    changed = int(np.count_nonzero(new != s.actions))
    return s.with_actions(new), changed


def _observe(s):
    n = s.n
    if n == 0:
        return 0.0, 0.0
    return float(s.actions.sum()) / n, float(np.count_nonzero(s.actions != s.preferences)) / n


def simulate(state: PopulationState, spec: DynamicsSpec, p: PayoffParams, kind: GameKind,
             info=Info.COMPLETE, rng_seed=0, phi=None, record_trajectory=False) -> RunResult:
    """Iterate the chosen rule from ``state`` until it settles or the budget runs out.

    Best response stops at a fixed point (one step with no change) or a period-2
    cycle. Imitation stops after ``convergence_window`` consecutive unchanged
    steps. Incomplete information only applies to best response.
    """
    info = parse_enum(Info, info, "information regime")
    kind = GameKind.parse(kind)
    traj = [_observe(state)] if record_trajectory else None
    changes: list[int] = []
    termination = Termination.BUDGET
    s = state
    if spec.rule is Rule.BEST_RESPONSE:
        rho = state.rho
        prev = None
        for _ in range(spec.max_steps):
            nxt, changed = step_best_response(s, p, kind, info, rho)
            changes.append(changed)
            if traj is not None:
                traj.append(_observe(nxt))
            if changed == 0:
                termination = Termination.FIXED_POINT
                s = nxt
                break
            if prev is not None and np.array_equal(nxt.actions, prev.actions):
                termination = Termination.TWO_CYCLE
                s = nxt
                break
            prev, s = s, nxt
    else:
        if info is not Info.COMPLETE:
            raise ConfigError("proportional imitation needs complete information")
        if phi is None:
            phi = default_phi(state.graph, p)
        rng = np.random.default_rng(rng_seed)
        quiet = 0
        for _ in range(spec.max_steps):
            s, changed = step_proportional_imitation(s, p, kind, phi, spec.update_fraction, rng)
            changes.append(changed)
            if traj is not None:
                traj.append(_observe(s))
            quiet = quiet + 1 if changed == 0 else 0
            if quiet >= spec.convergence_window:
                termination = Termination.FIXED_POINT
                break
    return RunResult(s, len(changes), termination, changes, traj)


def run(g: Graph, spec: DynamicsSpec, p: PayoffParams, kind: GameKind, rho,
        init=Init.ALL_PREFERRED, rng_seed=0, info=Info.COMPLETE,
        record_trajectory=False) -> RunResult:
    """Seed a population on ``g`` and evolve it.

    ``rng_seed`` is split into independent streams for the population and the
    dynamics.
    """
    pop_seed, dyn_seed = np.random.SeedSequence(rng_seed).generate_state(2, dtype=np.uint64)
    state = init_population(g, rho, init, int(pop_seed))
    return simulate(state, spec, p, kind, info, int(dyn_seed), record_trajectory=record_trajectory)
