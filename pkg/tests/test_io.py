import json
import math
from dataclasses import replace

import pytest
import yaml
from hypothesis import given, settings, strategies as st

from prefnet import io
from prefnet.dynamics import DynamicsSpec, Info, Init, Rule, Termination
from prefnet.errors import ConfigError, ResultsFormatError
from prefnet.experiments import (
    SweepConfig,
    aggregate,
    default_grid,
    run_sweep,
)
from prefnet.game import GameKind
from prefnet.graph import TopologySpec


def tiny():
    return SweepConfig(topologies=(TopologySpec("ER", 20, mean_degree=4),), games=(GameKind.CG,),
                       dynamics=DynamicsSpec(), info=Info.COMPLETE, alpha_grid=(0.6,),
                       beta_grid=((0.4, 0.5),), rho0_grid=(0.3, 0.5), realizations=2, base_seed=1)


def records(cfg=None):
    return [r for s in run_sweep(cfg or tiny()) for r in s.records]


def test_minimal_config_echoes_defaults():
    cfg = io.parse_config("schema_version: 1\nbase_seed: 5\n")
    assert cfg == default_grid(5)


def test_minimal_imitation_config_uses_imitation_defaults():
    cfg = io.parse_config("schema_version: 1\nbase_seed: 5\ndynamics:\n  rule: PI\n")
    assert cfg.realizations == 10 and cfg.dynamics.rule is Rule.PROPORTIONAL_IMITATION


def test_beta_equal_alpha_rejected_naming_pair():
    text = "schema_version: 1\nbase_seed: 0\nrewards:\n  alpha: [0.5]\n  beta: [[0.5]]\n"
    with pytest.raises(ConfigError) as exc:
        io.parse_config(text)
    assert exc.value.path == "rewards.beta[0][0]"
    assert "alpha=0.5" in str(exc.value) and "beta=0.5" in str(exc.value)
    assert exc.value.line == 5


def test_alpha_not_below_twice_beta_rejected():
    text = "schema_version: 1\nbase_seed: 0\nrewards:\n  alpha: [0.9]\n  beta: [[0.45]]\n"
    with pytest.raises(ConfigError):
        io.parse_config(text)


def test_missing_base_seed():
    with pytest.raises(ConfigError) as exc:
        io.parse_config("schema_version: 1\n")
    assert exc.value.path == "base_seed"


@pytest.mark.parametrize("text,path,line", [
    ("schema_version: 1\nbase_seed: 0\ncolour: red\n", "colour", 3),
    ("schema_version: 1\nbase_seed: 0\ndynamics:\n  rule: BR\n  speed: 2\n", "dynamics.speed", 5),
    ("schema_version: 1\nbase_seed: 0\ntopologies:\n  - kind: ER\n    n: 50\n    mean_degree: 60\n",
     "topologies[0]", 4),
    ("schema_version: 1\nbase_seed: 0\ntopologies:\n  - kind: XX\n", "topologies[0].kind", 4),
    ("schema_version: 1\nbase_seed: 0\nrho0: [0.1, 1.5]\n", "rho0[1]", 3),
    ("schema_version: 1\nbase_seed: 0\nrealizations: 0\n", "realizations", 3),
    ("schema_version: 1\nbase_seed: 0\ngames: [CG, XG]\n", "games[1]", 3),
    ("schema_version: 2\nbase_seed: 0\n", "schema_version", 1),
    ("schema_version: 1\nbase_seed: 0\ndynamics:\n  rule: PI\ninfo: incomplete\n", "info", 5),
])
def test_schema_errors_carry_path_and_line(text, path, line):
    with pytest.raises(ConfigError) as exc:
        io.parse_config(text)
    assert exc.value.path == path
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}: {path}: ")


def test_syntax_error_has_line():
    with pytest.raises(ConfigError) as exc:
        io.parse_config("schema_version: 1\nbase_seed: [0\nrho0: 1\n")
    assert exc.value.line is not None and "syntax" in str(exc.value)


def test_full_config_parses():
    text = """
schema_version: 1
base_seed: 3
topologies:
  - {kind: ER, n: 50, mean_degree: 6}
  - {kind: BA, n: 50, m_attach: 2}
games: [AG]
dynamics: {rule: PI, update_fraction: 0.5, max_steps: 400, convergence_window: 10}
init: uniform_random
rewards: {alpha: [0.6, 0.8], beta_count: 3}
rho0: [0.5]
realizations: 4
workers: 2
"""
    cfg = io.parse_config(text)
    assert [t.label for t in cfg.topologies] == ["ER(n=50,k=6.0)", "BA(n=50,m=2)"]
    assert cfg.games == (GameKind.AG,) and cfg.init is Init.UNIFORM_RANDOM
    assert cfg.dynamics == DynamicsSpec(Rule.PROPORTIONAL_IMITATION, 0.5, 400, 10)
    assert len(cfg.reward_pairs) == 6 and cfg.realizations == 4 and cfg.workers == 2


def test_config_dict_round_trip():
    for cfg in (default_grid(9), tiny(), replace(tiny(), init=Init.UNIFORM_RANDOM)):
        text = yaml.safe_dump(io.config_to_dict(cfg))
        assert io.parse_config(text) == cfg


def test_empty_results_header_only(tmp_path):
    path = tmp_path / "r.csv"
    io.write_results([], path)
    assert path.read_text() == ",".join(io.RESULTS_HEADER) + "\n"
    assert io.read_results(path) == []


def test_results_row_formatting(tmp_path):
    rec = replace(records()[0], d1=0.5, df=1 / 3)
    path = tmp_path / "r.csv"
    io.write_results([rec], path)
    row = dict(zip(io.RESULTS_HEADER, path.read_text().splitlines()[1].split(",")))
    assert row["d1"] == "0.5"
    assert row["df"] == "0.333333333"
    assert row["ratio"] == "1.5"


def test_results_round_trip(tmp_path):
    recs = records()
    path = tmp_path / "r.csv"
    io.write_results(run_sweep(tiny()), path)
    assert io.read_results(path) == recs


@settings(max_examples=50, deadline=None)
@given(d1=st.floats(0, 1), df=st.floats(0, 1))
def test_results_round_trip_precision(tmp_path_factory, d1, df):
    rec = replace(records()[0], d1=d1, df=df)
    path = tmp_path_factory.mktemp("rt") / "r.csv"
    io.write_results([rec], path)
    back = io.read_results(path)[0]
    assert back.d1 == pytest.approx(d1, rel=1e-8, abs=1e-12)
    assert back.df == pytest.approx(df, rel=1e-8, abs=1e-12)


def set_field(line, name, value):
    cells = line.split(",")
    cells[io.RESULTS_HEADER.index(name)] = value
    return ",".join(cells)


@pytest.mark.parametrize("mutate,row", [
    (lambda lines: lines[:2] + [lines[2] + ",extra"] + lines[3:], 3),
    (lambda lines: lines[:3] + [set_field(lines[3], "termination", "Sideways")] + lines[4:], 4),
    (lambda lines: lines[:3] + [set_field(lines[3], "d1", "half")] + lines[4:], 4),
    (lambda lines: lines[:2] + [lines[2].replace(",CG,", ",XG,")] + lines[3:], 3),
    (lambda lines: ["bogus,header"] + lines[1:], 1),
])
def test_malformed_results_report_row(tmp_path, mutate, row):
    path = tmp_path / "r.csv"
    io.write_results(records(), path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(mutate(lines)) + "\n")
    with pytest.raises(ResultsFormatError) as exc:
        io.read_results(path)
    assert exc.value.row == row


def test_aggregate_table_counts_grid_coordinates():
    cfg = replace(default_grid(0), topologies=(TopologySpec("ER", 10, mean_degree=3),),
                  games=(GameKind.CG,), realizations=1)
    assert len(cfg.reward_pairs) * len(cfg.rho0_grid) == 704
    text = io.aggregate_csv(aggregate(run_sweep(cfg)))
    lines = text.splitlines()
    assert lines[0].split(",") == list(io.AGGREGATE_HEADER)
    assert len(lines) == 1 + 704


def test_aggregate_json_echoes_config(tmp_path):
    cfg = tiny()
    points = aggregate(run_sweep(cfg))
    csv_path, json_path = io.aggregate_paths(str(tmp_path / "out.csv"))
    assert csv_path.endswith("out.aggregate.csv") and json_path.endswith("out.aggregate.json")
    io.write_aggregate(points, csv_path, json_path, cfg)
    doc = json.loads(open(json_path).read())
    assert io.parse_config(yaml.safe_dump(doc["config"])) == cfg
    assert len(doc["surface"]) == len(points)
    for entry in doc["surface"]:
        assert sum(entry["classes"].values()) == cfg.realizations


def test_fmt():
    assert io.fmt(0.1 + 0.2) == "0.3"
    assert io.fmt(1 / 3) == "0.333333333"
    assert io.fmt(math.nan) == "nan"
    assert io.fmt(7) == "7"


def test_atomic_write_leaves_nothing_on_failure(tmp_path):
    target = tmp_path / "x.txt"
    with pytest.raises(TypeError):
        io.atomic_write(target, object())
    assert list(tmp_path.iterdir()) == []


def test_termination_values_are_stable():
    assert [t.value for t in Termination] == ["FixedPoint", "TwoCycle", "StepBudgetExhausted"]
