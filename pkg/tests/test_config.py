import csv
import io
import json
from pathlib import Path

import jsonschema
import pytest

from pwyw.config import (
    ConfigError,
    fmt_number,
    json_text,
    load_config,
    metrics_csv,
    metrics_records,
    parse_config,
    sweep_csv,
    sweep_records,
    trace_csv,
)
from pwyw.experiments import METRIC_COLUMNS, SweepParameter, StrategyCell, run_cell, sweep
from pwyw.game import BelievedCost, ModeKind, PriceRule
from pwyw.population import Constant, TruncatedNormal, Uniform, sample_population
from pwyw.preferences import CostType

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "results.schema.json").read_text())


def minimal(**over):
    doc = {"population": {"seed": 1, "size": 20}, "strategies": [{"cost": 4}]}
    doc.update(over)
    return doc


def test_defaults_are_filled_in():
    cfg = parse_config(minimal())
    assert cfg.population.size == 20
    assert cfg.population.v_dist == Uniform(5.0, 15.0)
    assert cfg.strategies[0].cost_type is CostType.RECOVERABLE
    assert not cfg.strategies[0].provide_erp
    assert cfg.mode.kind is ModeKind.LITERAL
    assert cfg.sweep is None
    assert cfg.output.format == "csv" and cfg.output.precision == 9


def test_full_document_round_trips_into_objects(tmp_path):
    doc = {
        "population": {
            "seed": 9, "size": 50, "v": 10, "alpha": {"kind": "uniform", "lo": 0.5, "hi": 2},
            "beta": {"kind": "truncated_normal", "mean": 0.3, "sd": 0.1, "lo": 0, "hi": 0.9},
            "gamma": {"kind": "constant", "value": 0.4}, "lambda": 0.75,
            "free_rider_share": 0.1, "misbelief_rate": 0.2, "believed_cost": {"fixed": 3},
        },
        "strategies": [{"name": "si", "cost": 4, "cost_type": "S", "erp": 8, "reveal_cost": False}],
        "mode": {"kind": "fs_model", "price_rule": "midpoint", "noise_sd": 0.0},
        "sweep": {"parameter": "erp_level", "values": [6, 8], "strategy": "si"},
        "output": {"path": "sub/out.json", "format": "json", "precision": 6},
    }
    path = tmp_path / "run.json"
    path.write_text(json.dumps(doc))
    cfg = load_config(path)
    pop = cfg.population
    assert pop.v_dist == Constant(10.0)
    assert pop.beta_dist == TruncatedNormal(0.3, 0.1, 0, 0.9)
    assert pop.lambda_dist == Constant(0.75)
    assert pop.believed_cost == BelievedCost("fixed", 3)
    cell = cfg.strategies[0]
    assert cell.cost_type is CostType.SUNK and cell.erp_level == 8 and cell.label == "si"
    assert cfg.mode.price_rule is PriceRule.MIDPOINT
    assert cfg.sweep.parameter is SweepParameter.ERP_LEVEL and cfg.sweep.values == (6.0, 8.0)
    assert cfg.output.path == tmp_path / "sub" / "out.json"


def test_mode_may_be_a_bare_string():
    assert parse_config(minimal(mode="fs_model")).mode.kind is ModeKind.FS_MODEL


@pytest.mark.parametrize("doc, path", [
    ({"strategies": [{"cost": 1}]}, "$.population"),
    (minimal(population={"size": 3}), "$.population.seed"),
    (minimal(population={"seed": -1}), "$.population.seed"),
    (minimal(population={"seed": 1, "size": 0}), "$.population.size"),
    (minimal(population={"seed": 1, "beta": {"kind": "uniform", "lo": 0, "hi": 1.5}}), "$.population"),
    (minimal(population={"seed": 1, "v": {"kind": "weird"}}), "$.population.v.kind"),
    (minimal(population={"seed": 1, "gamma": {"kind": "uniform", "lo": 2, "hi": 1}}), "$.population.gamma"),
    (minimal(population={"seed": 1, "free_rider_share": 1.5}), "$.population.free_rider_share"),
    (minimal(population={"seed": 1, "believed_cost": "maybe"}), "$.population.believed_cost"),
    (minimal(strategies=[]), "$.strategies"),
    (minimal(strategies=[{"cost": 4}, {"cost": -1}]), "$.strategies[1].cost"),
    (minimal(strategies=[{"cost": 4, "cost_type": "X"}]), "$.strategies[0].cost_type"),
    (minimal(strategies=[{"cost": 4, "colour": "red"}]), "$.strategies[0].colour"),
    (minimal(strategies=[{"cost": "4"}]), "$.strategies[0].cost"),
    (minimal(mode={"kind": "psychic"}), "$.mode.kind"),
    (minimal(mode={"price_rule": "median"}), "$.mode.price_rule"),
    (minimal(sweep={"parameter": "delta", "values": [1]}), "$.sweep.parameter"),
    (minimal(sweep={"parameter": "lambda", "values": []}), "$.sweep.values"),
    (minimal(sweep={"parameter": "lambda", "values": [0.5, 0]}), "$.sweep.values[1]"),
    (minimal(sweep={"parameter": "cost", "values": [1], "strategy": 3}), "$.sweep.strategy"),
    (minimal(output={"precision": 0}), "$.output.precision"),
    (minimal(output={"precision": 18}), "$.output.precision"),
    (minimal(output={"format": "xml"}), "$.output.format"),
])
def test_errors_name_the_offending_json_path(doc, path):
    with pytest.raises(ConfigError) as info:
        parse_config(doc)
    assert info.value.path == path
    assert str(info.value).startswith(path + ":")


def test_invalid_json_text_is_a_config_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match=r"^\$: invalid JSON"):
        load_config(bad)


def test_missing_file_raises_oserror(tmp_path):
    with pytest.raises(OSError):
        load_config(tmp_path / "absent.json")


@pytest.mark.parametrize("x, p, text", [
    (None, 9, "NA"), (3, 9, "3"), (7.0, 9, "7"), (-0.0, 9, "0"),
    (1 / 3, 9, "0.333333333"), (1 / 3, 3, "0.333"), (123456789.123, 4, "1.235e+08"),
])
def test_fmt_number(x, p, text):
    assert fmt_number(x, p) == text


def _results(n=40):
    cfg = parse_config(minimal(population={"seed": 3, "size": n}, strategies=[
        {"cost": 4}, {"cost": 4, "cost_type": "S", "erp": 30}, {"cost": 20, "reveal_cost": True}]))
    pop = sample_population(cfg.population)
    return [(c.label, run_cell(pop, c, cfg.mode)[0]) for c in cfg.strategies]


@pytest.mark.parametrize("precision", [3, 9, 17])
def test_csv_and_json_agree_up_to_precision(precision):
    rows = _results()
    table = list(csv.DictReader(io.StringIO(metrics_csv(rows, precision))))
    records = json.loads(json_text(metrics_records(rows, precision)))
    assert len(table) == len(records) == 3
    for line, rec in zip(table, records):
        assert line["cell"] == rec["cell"]
        for col in METRIC_COLUMNS:
            if rec[col] is None:
                assert line[col] == "NA"
            else:
                assert float(line[col]) == rec[col]


def test_csv_header_has_eight_metric_columns():
    header = metrics_csv(_results(), 9).splitlines()[0].split(",")
    assert header == ["cell"] + list(METRIC_COLUMNS) and len(METRIC_COLUMNS) == 8


def test_no_buyer_cell_writes_na():
    rows = _results()
    table = list(csv.DictReader(io.StringIO(metrics_csv(rows, 9))))
    # cost 20 revealed: no one with v <= 15 buys
    assert table[2]["n_buyers"] == "0"
    assert table[2]["mean_price_paid"] == "NA"


def test_results_json_matches_documented_schema():
    jsonschema.validate(metrics_records(_results(), 9), SCHEMA)
    cfg = parse_config(minimal(population={"seed": 3, "size": 10, "v": 10, "lambda": 0.5},
                               strategies=[{"cost": 4, "reveal_cost": True}]))
    rows = sweep(cfg.population, cfg.strategies[0], "lambda", [0.25, 1.0], cfg.mode)
    records = sweep_records(SweepParameter.LAMBDA, rows, 9)
    jsonschema.validate(records, SCHEMA)
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate([{**records[0], "cell": "x"}], SCHEMA)


def test_sweep_csv_leads_with_parameter_column():
    cfg = parse_config(minimal(population={"seed": 3, "size": 10, "v": 10},
                               strategies=[{"cost": 4, "reveal_cost": True}]))
    rows = sweep(cfg.population, cfg.strategies[0], "lambda", [0.25, 0.5], cfg.mode)
    lines = sweep_csv(SweepParameter.LAMBDA, rows, 9).splitlines()
    assert lines[0].startswith("lambda,demand_rate,")
    assert [ln.split(",")[0] for ln in lines[1:]] == ["0.25", "0.5"]


def test_trace_csv_rows_per_consumer():
    pop = sample_population(parse_config(minimal()).population)
    _, outcomes = run_cell(pop, StrategyCell(4.0, "S", True, 100.0), parse_config(minimal()).mode)
    text = trace_csv(outcomes, 9)
    lines = text.splitlines()
    assert lines[0] == "consumer_index,scenario,bought,price,consumer_payoff,supplier_payoff"
    assert len(lines) == 21
    assert all(",SelfImage,false,NA," in ln for ln in lines[1:])
    assert "\r" not in text
