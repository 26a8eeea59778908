"""Seeded parameter sweeps and their aggregation.

Every realization gets a child seed hashed from the base seed, the parameter
coordinate and the realization index, so a sweep can be split, reordered or
run in parallel without changing any record.
"""

from __future__ import annotations

import hashlib
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import graph as graphs
from .dynamics import DynamicsSpec, Info, Init, Rule, Termination, run, parse_enum
from .equilibrium import EquilibriumClass, classify, observables
from .errors import ConfigError
from .game import GameKind, PayoffParams
from .graph import TopologySpec

log = logging.getLogger(__name__)

__all__ = [
    "SweepConfig",
    "Coordinate",
    "RealizationRecord",
    "SweepRecord",
    "SurfacePoint",
    "CLASS_LABELS",
    "reference_alpha_grid",
    "reference_beta_grid",
    "default_grid",
    "child_seed",
    "realize",
    "run_sweep",
    "aggregate",
    "figure_config",
    "FIGURES",
]

# classification column values; "none" marks runs that never reached a fixed point
CLASS_LABELS = ("SS", "FS", "SH", "FH", "NE", "none")
TERMINATIONS = tuple(t.value for t in Termination)


def _clean(x: float) -> float:
    return float(f"{x:.12g}")


def reference_alpha_grid(count: int = 8, lo: float = 0.2, hi: float = 0.9) -> tuple[float, ...]:
    return tuple(_clean(lo + (hi - lo) * i / (count - 1)) for i in range(count))


def reference_beta_grid(alpha: float, count: int = 8) -> tuple[float, ...]:
    """``count`` values evenly spaced strictly inside ``(alpha/2, alpha)``."""
    half = alpha / 2
    return tuple(_clean(half + half * (j + 1) / (count + 1)) for j in range(count))


@dataclass(frozen=True)
class SweepConfig:
    topologies: tuple[TopologySpec, ...]
    games: tuple[GameKind, ...]
    dynamics: DynamicsSpec
    info: Info
    alpha_grid: tuple[float, ...]
    beta_grid: tuple[tuple[float, ...], ...]  # one list per alpha
    rho0_grid: tuple[float, ...]
    realizations: int
    base_seed: int
    init: Init = Init.ALL_PREFERRED
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "info", parse_enum(Info, self.info, "information regime"))
        object.__setattr__(self, "init", parse_enum(Init, self.init, "init policy"))
        object.__setattr__(self, "games", tuple(GameKind.parse(g) for g in self.games))
        if len(self.beta_grid) != len(self.alpha_grid):
            raise ConfigError("need exactly one beta list per alpha value")
        for a, betas in zip(self.alpha_grid, self.beta_grid):
            for b in betas:
                PayoffParams(a, b)
        for r in self.rho0_grid:
            if not 0 <= r <= 1:
                raise ConfigError(f"rho0 values must lie in [0, 1], got {r}")
        if self.realizations < 1:
            raise ConfigError(f"realizations must be >= 1, got {self.realizations}")
        if self.info is Info.INCOMPLETE and self.dynamics.rule is Rule.PROPORTIONAL_IMITATION:
            raise ConfigError("proportional imitation needs complete information")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    @property
    def reward_pairs(self) -> list[tuple[float, float]]:
        return [(a, b) for a, betas in zip(self.alpha_grid, self.beta_grid) for b in betas]

    def coordinates(self) -> list["Coordinate"]:
        return [Coordinate(t, g, a, b, r)
                for t in self.topologies
                for g in self.games
                for a, b in self.reward_pairs
                for r in self.rho0_grid]

    @property
    def size(self) -> int:
        return len(self.coordinates()) * self.realizations


@dataclass(frozen=True)
class Coordinate:
    topology: TopologySpec
    game: GameKind
    alpha: float
    beta: float
    rho0: float

    @property
    def key(self) -> str:
        return f"{self.topology.label}|{self.game.value}|{self.alpha!r}|{self.beta!r}|{self.rho0!r}"


@dataclass(frozen=True)
class RealizationRecord:
    """One realization: its coordinates, seed, how it ended and what it looks like."""

    topology: TopologySpec
    game: GameKind
    dynamics: Rule
    info: Info
    alpha: float
    beta: float
    rho0: float
    realization: int
    seed: int
    steps: int
    termination: Termination
    d1: float
    df: float
    eq_class: str

    @property
    def ratio(self) -> float:
        return self.alpha / self.beta

    @property
    def coordinate(self) -> Coordinate:
        return Coordinate(self.topology, self.game, self.alpha, self.beta, self.rho0)


@dataclass
class SurfacePoint:
    """Aggregate over the realizations sharing one parameter coordinate."""

    topology: TopologySpec
    game: GameKind
    dynamics: Rule
    info: Info
    alpha: float
    beta: float
    rho0: float
    realizations: int
    mean_d1: float
    std_d1: float
    mean_df: float
    std_df: float
    # means over FixedPoint runs only; nan when there are none
    mean_d1_fixed: float
    mean_df_fixed: float
    terminations: dict[str, int]
    classes: dict[str, int]

    @property
    def ratio(self) -> float:
        return self.alpha / self.beta


@dataclass
class SweepRecord:
    coordinate: Coordinate
    records: list[RealizationRecord] = field(default_factory=list)

    @property
    def summary(self) -> SurfacePoint:
        return aggregate(self.records)[0]


def child_seed(base_seed: int, coordinate: Coordinate, realization: int) -> int:
    """63-bit seed keyed by coordinate and realization index, never by sweep order."""
    key = f"{int(base_seed)}|{coordinate.key}|{int(realization)}".encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little") >> 1


def realize(coordinate: Coordinate, seed: int, dynamics: DynamicsSpec, info=Info.COMPLETE,
            init=Init.ALL_PREFERRED, realization: int = 0) -> RealizationRecord:
    """Build graph and population from ``seed``, run the dynamics, and summarise."""
    info = parse_enum(Info, info, "information regime")
    graph_seed, run_seed = np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64)
    g = graphs.build(coordinate.topology, int(graph_seed))
    p = PayoffParams(coordinate.alpha, coordinate.beta)
    res = run(g, dynamics, p, coordinate.game, 1 - coordinate.rho0, init, int(run_seed), info)
    obs = observables(res.final_state)
    if res.termination is Termination.FIXED_POINT:
        strict = dynamics.rule is Rule.BEST_RESPONSE and info is Info.COMPLETE
        label = classify(res.final_state, p, coordinate.game, require_nash=strict).value
    else:
        label = "none"
    return RealizationRecord(
        topology=coordinate.topology, game=coordinate.game, dynamics=dynamics.rule, info=info,
        alpha=coordinate.alpha, beta=coordinate.beta, rho0=coordinate.rho0,
        realization=realization, seed=seed, steps=res.steps_taken, termination=res.termination,
        d1=obs.d1, df=obs.df, eq_class=label)


def _run_chunk(args):
    tasks, dynamics, info, init = args
    out = []
    for coord, seed, r in tasks:
        try:
            out.append(realize(coord, seed, dynamics, info, init, r))
        except ConfigError as exc:
            raise ConfigError(f"at {coord.key} realization {r}: {exc}") from exc
    return out


def run_sweep(cfg: SweepConfig, workers: int | None = None) -> list[SweepRecord]:
    """Run every realization of every coordinate of ``cfg``.

    The result is a pure function of ``cfg``; ``workers`` only changes speed.
    """
    workers = cfg.workers if workers is None else workers
    coords = cfg.coordinates()
    tasks = [(c, child_seed(cfg.base_seed, c, r), r)
             for c in coords for r in range(cfg.realizations)]
    log.info("sweep: %d coordinates x %d realizations", len(coords), cfg.realizations)
    if workers <= 1 or len(tasks) < 2:
        flat = _run_chunk((tasks, cfg.dynamics, cfg.info, cfg.init))
    else:
        size = max(1, math.ceil(len(tasks) / (workers * 8)))
        chunks = [(tasks[i:i + size], cfg.dynamics, cfg.info, cfg.init)
                  for i in range(0, len(tasks), size)]
        flat = []
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(_run_chunk, chunks):
                flat.extend(part)
    out = []
    for i, c in enumerate(coords):
        chunk = flat[i * cfg.realizations:(i + 1) * cfg.realizations]
        out.append(SweepRecord(c, chunk))
    return out


def _quantize(x: float) -> float:
    # aggregates are computed from the values a results file would hold
    return float(f"{x:.9g}")


def aggregate(records) -> list[SurfacePoint]:
    """Group realizations by coordinate (first-seen order) and summarise each group.

    Accepts ``RealizationRecord`` items or ``SweepRecord`` items.
    """
    flat: list[RealizationRecord] = []
    for r in records:
        flat.extend(r.records if isinstance(r, SweepRecord) else [r])
    if not flat:
        raise ValueError("nothing to aggregate")
    groups: dict[tuple, list[RealizationRecord]] = {}
    for r in flat:
        groups.setdefault((r.coordinate, r.dynamics, r.info), []).append(r)
    points = []
    for (coord, rule, info), rs in groups.items():
        d1 = np.array([_quantize(r.d1) for r in rs])
        df = np.array([_quantize(r.df) for r in rs])
        fixed = np.array([r.termination is Termination.FIXED_POINT for r in rs])
        terms = {t: 0 for t in TERMINATIONS}
        classes = {c: 0 for c in CLASS_LABELS}
        for r in rs:
            terms[r.termination.value] += 1
            classes[r.eq_class] += 1
        points.append(SurfacePoint(
            topology=coord.topology, game=coord.game, dynamics=rule, info=info,
            alpha=coord.alpha, beta=coord.beta, rho0=coord.rho0, realizations=len(rs),
            mean_d1=float(d1.mean()), std_d1=float(d1.std()),
            mean_df=float(df.mean()), std_df=float(df.std()),
            mean_d1_fixed=float(d1[fixed].mean()) if fixed.any() else math.nan,
            mean_df_fixed=float(df[fixed].mean()) if fixed.any() else math.nan,
            terminations=terms, classes=classes))
    return points


REFERENCE_ER_DEGREES = (5.0, 10.0, 20.0)
REFERENCE_BA_M = 3
REFERENCE_RHO0 = tuple(_clean(i / 10) for i in range(11))


def _reference_topologies(n):
    return tuple(TopologySpec("ER", n, mean_degree=k) for k in REFERENCE_ER_DEGREES) + (
        TopologySpec("BA", n, m_attach=REFERENCE_BA_M),)


def default_grid(base_seed: int = 0, rule=Rule.BEST_RESPONSE) -> SweepConfig:
    """Reference protocol: n=100, three ER degrees plus BA(m=3), 8x8 rewards, 11 compositions."""
    rule = parse_enum(Rule, rule, "dynamics rule")
    alphas = reference_alpha_grid()
    return SweepConfig(
        topologies=_reference_topologies(100),
        games=(GameKind.CG, GameKind.AG),
        dynamics=DynamicsSpec(rule=rule, max_steps=100),
        info=Info.COMPLETE,
        alpha_grid=alphas,
        beta_grid=tuple(reference_beta_grid(a) for a in alphas),
        rho0_grid=REFERENCE_RHO0,
        realizations=50 if rule is Rule.BEST_RESPONSE else 10,
        base_seed=base_seed,
    )


# reward pairs standing in for the ratio extremes 1 and 2, which the strict
# constraint excludes
LOW_RATIO = (0.51, 0.5)
HIGH_RATIO = (0.9, 0.46)

# name -> (game, rule, info, n, rewards, rho0 override, description)
FIGURES = {
    "fig2": ("CG", "BR", "complete", 100, "grid", None, "CG best response, d1 surface"),
    "fig3": ("CG", "BR", "complete", 100, "extremes", None, "CG best response, d_f at ratio extremes"),
    "fig4": ("CG", "BR", "complete", 1000, "grid", None, "CG best response, d1 surface, n=1000"),
    "fig5": ("CG", "BR", "complete", 1000, "extremes", None, "CG best response, d_f extremes, n=1000"),
    "fig6": ("CG", "PI", "complete", 100, "grid", None, "CG imitation, d1 surface"),
    "fig7": ("CG", "PI", "complete", 100, "extremes", None, "CG imitation, d_f at ratio extremes"),
    "fig8": ("AG", "BR", "complete", 100, "grid", None, "AG best response, d1 surface"),
    "fig9": ("AG", "BR", "complete", 100, "extremes", None, "AG best response, d_f at ratio extremes"),
    "fig10": ("AG", "PI", "complete", 100, "grid", None, "AG imitation, d1 surface"),
    "fig11": ("AG", "PI", "complete", 100, "extremes", None, "AG imitation, d_f at ratio extremes"),
    "fig12": ("CG", "BR", "incomplete", 100, "grid", None, "CG incomplete information, d1 surface"),
    "fig13": ("CG", "BR", "incomplete", 100, "extremes", None, "CG incomplete information, d_f extremes"),
    "fig14": ("CG", "BR", "incomplete", 100, "grid", (0.4, 0.5, 0.6, 0.7),
              "CG incomplete information, d_f vs ratio at rho = 0.6, 0.5, 0.4, 0.3"),
}


def figure_config(name: str, base_seed: int, realizations: int | None = None,
                  n: int | None = None) -> SweepConfig:
    """Sweep behind one of the named figures (``fig2`` .. ``fig14``)."""
    if name not in FIGURES:
        raise ConfigError(f"unknown figure {name!r}; choose from {', '.join(FIGURES)}")
    game, rule, info, size, rewards, rho0, _ = FIGURES[name]
    cfg = default_grid(base_seed, rule)
    if rewards == "extremes":
        alphas = (LOW_RATIO[0], HIGH_RATIO[0])
        betas = ((LOW_RATIO[1],), (HIGH_RATIO[1],))
    else:
        alphas, betas = cfg.alpha_grid, cfg.beta_grid
    return replace(
        cfg,
        topologies=_reference_topologies(n or size),
        games=(GameKind.parse(game),),
        info=Info(info),
        alpha_grid=alphas,
        beta_grid=betas,
        rho0_grid=rho0 or cfg.rho0_grid,
        realizations=realizations or cfg.realizations,
    )
