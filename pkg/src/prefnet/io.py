"""Config documents and results files.

Config is YAML (JSON is valid YAML too). Results are one CSV row per
realization; aggregates go to a CSV table plus a JSON document that also
echoes the config, which is what replaying a single row needs.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
import os
import tempfile

import yaml

from .dynamics import DynamicsSpec, Info, Init, Rule, Termination
from .errors import ConfigError, ResultsFormatError
from .experiments import (
    CLASS_LABELS,
    TERMINATIONS,
    RealizationRecord,
    SurfacePoint,
    SweepConfig,
    default_grid,
    reference_beta_grid,
)
from .game import GameKind, PayoffParams
from .graph import TopologySpec

__all__ = [
    "SCHEMA_VERSION",
    "RESULTS_HEADER",
    "AGGREGATE_HEADER",
    "parse_config",
    "load_config",
    "config_to_dict",
    "write_results",
    "read_results",
    "write_aggregate",
    "aggregate_paths",
    "atomic_write",
]

SCHEMA_VERSION = 1

RESULTS_HEADER = ("schema_version", "topology", "n", "mean_degree_or_m", "game", "dynamics",
                  "info", "alpha", "beta", "ratio", "rho0", "realization", "seed", "steps",
                  "termination", "d1", "df", "class")

AGGREGATE_HEADER = (("schema_version", "topology", "n", "mean_degree_or_m", "game", "dynamics",
                     "info", "alpha", "beta", "ratio", "rho0", "realizations", "mean_d1", "std_d1",
                     "mean_df", "std_df", "mean_d1_fixed", "mean_df_fixed")
                    + TERMINATIONS + CLASS_LABELS)

_TOP_KEYS = {"schema_version", "base_seed", "topologies", "games", "dynamics", "info", "init",
             "rewards", "rho0", "realizations", "workers"}


def fmt(x) -> str:
    """Nine significant digits; integers and labels pass through."""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return f"{x:.9g}"
    return str(x)


# -- config ------------------------------------------------------------------

def _line_index(node, path="", out=None):
    """Map key paths to 1-based source lines by walking the composed YAML tree."""
    if out is None:
        out = {}
    out.setdefault(path, node.start_mark.line + 1)
    if isinstance(node, yaml.MappingNode):
        for knode, vnode in node.value:
            sub = f"{path}.{knode.value}" if path else str(knode.value)
            out[sub] = knode.start_mark.line + 1
            _line_index(vnode, sub, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, item in enumerate(node.value):
            _line_index(item, f"{path}[{i}]", out)
    return out


class _Checker:
    def __init__(self, lines):
        self.lines = lines

    def fail(self, path, message):
        line = None
        probe = path
        while probe and line is None:
            line = self.lines.get(probe)
            probe = probe.rsplit(".", 1)[0] if "." in probe else probe.rsplit("[", 1)[0] if "[" in probe else ""
        raise ConfigError(message, path=path, line=line)

    def mapping(self, value, path, allowed):
        if not isinstance(value, dict):
            self.fail(path, "expected a mapping")
        for key in value:
            if key not in allowed:
                self.fail(f"{path}.{key}" if path else str(key),
                          f"unknown key (allowed: {', '.join(sorted(allowed))})")
        return value

    def integer(self, value, path, minimum=None):
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            self.fail(path, f"must be >= {minimum}, got {value}")
        return value

    def number(self, value, path):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, f"expected a number, got {value!r}")
        return float(value)

    def listing(self, value, path, nonempty=True):
        if not isinstance(value, list):
            self.fail(path, "expected a list")
        if nonempty and not value:
            self.fail(path, "must not be empty")
        return value

    def choice(self, value, path, cls):
        try:
            return cls.parse(value) if cls is GameKind else _enum_from(cls, value)
        except (ConfigError, ValueError):
            allowed = ", ".join(m.value for m in cls)
            self.fail(path, f"unknown value {value!r} (allowed: {allowed})")


def _enum_from(cls, value):
    for m in cls:
        if str(value).lower() in (m.value.lower(), m.name.lower()):
            return m
    raise ValueError(value)


def parse_config(text: str) -> SweepConfig:
    """Validate a YAML config document and fill omitted keys from the default grid.

    Errors carry the key path and source line of the offending entry.
    """
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"syntax error: {getattr(exc, 'problem', exc)}",
                          line=mark.line + 1 if mark else None) from None
    lines = _line_index(root) if root is not None else {}
    c = _Checker(lines)
    if data is None:
        data = {}
    c.mapping(data, "", _TOP_KEYS)
    if "schema_version" not in data:
        c.fail("schema_version", "missing required key")
    if data["schema_version"] != SCHEMA_VERSION:
        c.fail("schema_version", f"unsupported schema version {data['schema_version']!r} "
                                 f"(this build reads {SCHEMA_VERSION})")
    if "base_seed" not in data:
        c.fail("base_seed", "missing required key; every run needs an explicit seed")
    base_seed = c.integer(data["base_seed"], "base_seed", minimum=0)

    dyn = data.get("dynamics", {})
    c.mapping(dyn, "dynamics", {"rule", "update_fraction", "max_steps", "convergence_window"})
    rule = c.choice(dyn.get("rule", "BR"), "dynamics.rule", Rule)
    defaults = default_grid(base_seed, rule)
    kwargs = {"rule": rule}
    if "update_fraction" in dyn:
        kwargs["update_fraction"] = c.number(dyn["update_fraction"], "dynamics.update_fraction")
    if "max_steps" in dyn:
        kwargs["max_steps"] = c.integer(dyn["max_steps"], "dynamics.max_steps", minimum=1)
    if "convergence_window" in dyn:
        kwargs["convergence_window"] = c.integer(dyn["convergence_window"],
                                                 "dynamics.convergence_window", minimum=1)
    try:
        dynamics = DynamicsSpec(**kwargs)
    except ConfigError as exc:
        c.fail("dynamics", str(exc))

    topologies = defaults.topologies
    if "topologies" in data:
        topologies = []
        for i, t in enumerate(c.listing(data["topologies"], "topologies")):
            path = f"topologies[{i}]"
            c.mapping(t, path, {"kind", "n", "mean_degree", "m_attach"})
            kind = str(t.get("kind", "")).upper()
            if kind not in ("ER", "BA"):
                c.fail(f"{path}.kind", f"expected ER or BA, got {t.get('kind')!r}")
            n = c.integer(t.get("n", 100), f"{path}.n", minimum=2)
            try:
                if kind == "ER":
                    if "m_attach" in t:
                        c.fail(f"{path}.m_attach", "ER topologies take mean_degree, not m_attach")
                    if "mean_degree" not in t:
                        c.fail(f"{path}.mean_degree", "missing required key for ER")
                    k = c.number(t["mean_degree"], f"{path}.mean_degree")
                    topologies.append(TopologySpec("ER", n, mean_degree=k))
                else:
                    if "mean_degree" in t:
                        c.fail(f"{path}.mean_degree", "BA topologies take m_attach, not mean_degree")
                    m = c.integer(t.get("m_attach", 3), f"{path}.m_attach", minimum=1)
                    topologies.append(TopologySpec("BA", n, m_attach=m))
            except ConfigError as exc:
                if exc.path:
                    raise
                c.fail(path, str(exc))
        topologies = tuple(topologies)

    games = defaults.games
    if "games" in data:
        games = tuple(c.choice(g, f"games[{i}]", GameKind)
                      for i, g in enumerate(c.listing(data["games"], "games")))

    info = c.choice(data.get("info", "complete"), "info", Info)
    if info is Info.INCOMPLETE and rule is Rule.PROPORTIONAL_IMITATION:
        c.fail("info", "proportional imitation needs complete information")
    init = c.choice(data.get("init", defaults.init.value), "init", Init)

    alphas, betas = defaults.alpha_grid, defaults.beta_grid
    if "rewards" in data:
        rw = c.mapping(data["rewards"], "rewards", {"alpha", "beta", "beta_count"})
        if "beta" in rw and "beta_count" in rw:
            c.fail("rewards", "give either beta or beta_count, not both")
        if "alpha" in rw:
            alphas = tuple(c.number(a, f"rewards.alpha[{i}]")
                           for i, a in enumerate(c.listing(rw["alpha"], "rewards.alpha")))
        if "beta" in rw:
            blist = c.listing(rw["beta"], "rewards.beta")
            if len(blist) != len(alphas):
                c.fail("rewards.beta", f"need one beta list per alpha ({len(alphas)}), got {len(blist)}")
            betas = tuple(
                tuple(c.number(b, f"rewards.beta[{i}][{j}]")
                      for j, b in enumerate(c.listing(row, f"rewards.beta[{i}]")))
                for i, row in enumerate(blist))
        else:
            count = c.integer(rw.get("beta_count", 8), "rewards.beta_count", minimum=1)
            betas = tuple(reference_beta_grid(a, count) for a in alphas)
        for i, (a, row) in enumerate(zip(alphas, betas)):
            for j, b in enumerate(row):
                try:
                    PayoffParams(a, b)
                except ConfigError as exc:
                    c.fail(f"rewards.beta[{i}][{j}]" if "beta" in rw else f"rewards.alpha[{i}]",
                           str(exc))

    rho0 = defaults.rho0_grid
    if "rho0" in data:
        rho0 = tuple(c.number(r, f"rho0[{i}]") for i, r in enumerate(c.listing(data["rho0"], "rho0")))
        for i, r in enumerate(rho0):
            if not 0 <= r <= 1:
                c.fail(f"rho0[{i}]", f"must lie in [0, 1], got {r}")

    realizations = c.integer(data.get("realizations", defaults.realizations), "realizations", 1)
    workers = c.integer(data.get("workers", 1), "workers", 1)
    return SweepConfig(topologies=topologies, games=games, dynamics=dynamics, info=info,
                       alpha_grid=alphas, beta_grid=betas, rho0_grid=rho0,
                       realizations=realizations, base_seed=base_seed, init=init, workers=workers)


def load_config(path) -> SweepConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_to_dict(cfg: SweepConfig) -> dict:
    """Inverse of ``parse_config``: a document that parses back to ``cfg``."""
    topologies = []
    for t in cfg.topologies:
        if t.kind == "ER":
            topologies.append({"kind": "ER", "n": t.n, "mean_degree": t.mean_degree})
        else:
            topologies.append({"kind": "BA", "n": t.n, "m_attach": t.m_attach})
    d = cfg.dynamics
    return {
        "schema_version": SCHEMA_VERSION,
        "base_seed": cfg.base_seed,
        "topologies": topologies,
        "games": [g.value for g in cfg.games],
        "dynamics": {"rule": d.rule.value, "update_fraction": d.update_fraction,
                     "max_steps": d.max_steps, "convergence_window": d.convergence_window},
        "info": cfg.info.value,
        "init": cfg.init.value,
        "rewards": {"alpha": list(cfg.alpha_grid), "beta": [list(b) for b in cfg.beta_grid]},
        "rho0": list(cfg.rho0_grid),
        "realizations": cfg.realizations,
        "workers": cfg.workers,
    }


# -- results -----------------------------------------------------------------

def atomic_write(path, text: str) -> None:
    """Write ``text`` to a temp file next to ``path`` and rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _topology_cells(t: TopologySpec):
    return t.kind, t.n, fmt(float(t.mean_degree)) if t.kind == "ER" else t.m_attach


def _record_row(r: RealizationRecord):
    kind, n, param = _topology_cells(r.topology)
    return (SCHEMA_VERSION, kind, n, param, r.game.value, r.dynamics.value, r.info.value,
            fmt(r.alpha), fmt(r.beta), fmt(r.ratio), fmt(r.rho0), r.realization, r.seed,
            r.steps, r.termination.value, fmt(r.d1), fmt(r.df), r.eq_class)


def _csv_text(header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_results(records, path) -> None:
    """One row per realization under ``RESULTS_HEADER``; accepts sweep or realization records."""
    flat = []
    for r in records:
        flat.extend(getattr(r, "records", [r]))
    atomic_write(path, _csv_text(RESULTS_HEADER, (_record_row(r) for r in flat)))


def _topology_from(kind, n, param, row):
    try:
        if kind == "ER":
            return TopologySpec("ER", int(n), mean_degree=float(param))
        return TopologySpec("BA", int(n), m_attach=int(param))
    except (ValueError, ConfigError) as exc:
        raise ResultsFormatError(f"bad topology: {exc}", row) from None


def read_results(path) -> list[RealizationRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ResultsFormatError("empty file", 1) from None
        if tuple(header) != RESULTS_HEADER:
            raise ResultsFormatError(f"unexpected header {header}", 1)
        out = []
        for rowno, row in enumerate(reader, start=2):
            if len(row) != len(RESULTS_HEADER):
                raise ResultsFormatError(f"expected {len(RESULTS_HEADER)} fields, got {len(row)}",
                                         rowno)
            f = dict(zip(RESULTS_HEADER, row))
            try:
                if int(f["schema_version"]) != SCHEMA_VERSION:
                    raise ValueError(f"schema_version {f['schema_version']}")
                if f["class"] not in CLASS_LABELS:
                    raise ValueError(f"class {f['class']!r}")
                out.append(RealizationRecord(
                    topology=_topology_from(f["topology"], f["n"], f["mean_degree_or_m"], rowno),
                    game=GameKind(f["game"]), dynamics=Rule(f["dynamics"]), info=Info(f["info"]),
                    alpha=float(f["alpha"]), beta=float(f["beta"]), rho0=float(f["rho0"]),
                    realization=int(f["realization"]), seed=int(f["seed"]),
                    steps=int(f["steps"]), termination=Termination(f["termination"]),
                    d1=float(f["d1"]), df=float(f["df"]), eq_class=f["class"]))
            except ValueError as exc:
                raise ResultsFormatError(str(exc), rowno) from None
        return out


def _point_row(p: SurfacePoint):
    kind, n, param = _topology_cells(p.topology)
    return ((SCHEMA_VERSION, kind, n, param, p.game.value, p.dynamics.value, p.info.value,
             fmt(p.alpha), fmt(p.beta), fmt(p.ratio), fmt(p.rho0), p.realizations,
             fmt(p.mean_d1), fmt(p.std_d1), fmt(p.mean_df), fmt(p.std_df),
             fmt(p.mean_d1_fixed), fmt(p.mean_df_fixed))
            + tuple(p.terminations[t] for t in TERMINATIONS)
            + tuple(p.classes[c] for c in CLASS_LABELS))


def aggregate_csv(points) -> str:
    return _csv_text(AGGREGATE_HEADER, (_point_row(p) for p in points))


def aggregate_json(points, cfg: SweepConfig | None = None) -> str:
    surface = []
    for p in points:
        kind, n, param = _topology_cells(p.topology)
        surface.append({
            "topology": {"kind": kind, "n": n, "parameter": float(param) if kind == "ER" else param},
            "game": p.game.value, "dynamics": p.dynamics.value, "info": p.info.value,
            "alpha": p.alpha, "beta": p.beta, "ratio": float(fmt(p.ratio)), "rho0": p.rho0,
            "realizations": p.realizations,
            "d1": {"mean": float(fmt(p.mean_d1)), "std": float(fmt(p.std_d1)),
                   "mean_fixed": None if math.isnan(p.mean_d1_fixed) else float(fmt(p.mean_d1_fixed))},
            "df": {"mean": float(fmt(p.mean_df)), "std": float(fmt(p.std_df)),
                   "mean_fixed": None if math.isnan(p.mean_df_fixed) else float(fmt(p.mean_df_fixed))},
            "terminations": p.terminations,
            "classes": p.classes,
        })
    doc = {"schema_version": SCHEMA_VERSION,
           "config": config_to_dict(cfg) if cfg is not None else None,
           "surface": surface}
    return json.dumps(doc, indent=1, sort_keys=False) + "\n"


def aggregate_paths(results_path):
    stem, _ = os.path.splitext(results_path)
    return stem + ".aggregate.csv", stem + ".aggregate.json"


def write_aggregate(points, csv_path, json_path=None, cfg: SweepConfig | None = None) -> None:
    atomic_write(csv_path, aggregate_csv(points))
    if json_path is not None:
        atomic_write(json_path, aggregate_json(points, cfg))
