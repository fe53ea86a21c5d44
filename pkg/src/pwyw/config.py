"""Run configuration (one JSON document) and result writers.

Validation errors carry the JSON path of the offending field, e.g.
``$.strategies[1].cost``. See ``docs/config.md`` for the full schema.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

from .experiments import METRIC_COLUMNS, AggregateMetrics, StrategyCell, SweepParameter, SweepRow, validate_sweep_value
from .game import BehaviorMode, BelievedCost, InteractionOutcome
from .population import Constant, Distribution, PopulationSpec, TruncatedNormal, Uniform
from .preferences import ParameterError

NA = "NA"
DEFAULT_PRECISION = 9


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


@dataclass(frozen=True)
class SweepConfig:
    parameter: SweepParameter
    values: tuple[float, ...]
    strategy: int = 0


@dataclass(frozen=True)
class OutputConfig:
    path: Path
    format: str = "csv"
    precision: int = DEFAULT_PRECISION


@dataclass(frozen=True)
class RunConfig:
    population: PopulationSpec
    strategies: tuple[StrategyCell, ...]
    mode: BehaviorMode = field(default_factory=BehaviorMode)
    sweep: Optional[SweepConfig] = None
    output: OutputConfig = field(default_factory=lambda: OutputConfig(Path("results.csv")))


# -- parsing -----------------------------------------------------------------

def _obj(node: Any, path: str) -> dict:
    if not isinstance(node, dict):
        raise ConfigError(path, "expected an object")
    return node


def _known(node: dict, path: str, keys: Sequence[str]) -> None:
    extra = sorted(set(node) - set(keys))
    if extra:
        raise ConfigError(f"{path}.{extra[0]}", "unknown field")


def _num(node: dict, key: str, path: str, default: Any = ...) -> float:
    if key not in node:
        if default is ...:
            raise ConfigError(f"{path}.{key}", "required field missing")
        return default
    x = node[key]
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        raise ConfigError(f"{path}.{key}", f"expected a finite number, got {x!r}")
    return x


def _int(node: dict, key: str, path: str, default: Any = ...) -> int:
    x = _num(node, key, path, default)
    if not isinstance(x, int):
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {x!r}")
    return x


def _bool(node: dict, key: str, path: str, default: bool) -> bool:
    x = node.get(key, default)
    if not isinstance(x, bool):
        raise ConfigError(f"{path}.{key}", f"expected true or false, got {x!r}")
    return x


def _str(node: dict, key: str, path: str, default: Any = ...) -> str:
    if key not in node:
        if default is ...:
            raise ConfigError(f"{path}.{key}", "required field missing")
        return default
    x = node[key]
    if not isinstance(x, str):
        raise ConfigError(f"{path}.{key}", f"expected a string, got {x!r}")
    return x


def _build(path: str, factory, *args, **kwargs):
    try:
        return factory(*args, **kwargs)
    except ParameterError as exc:
        raise ConfigError(path, str(exc)) from None


def parse_distribution(node: Any, path: str) -> Distribution:
    if isinstance(node, (int, float)) and not isinstance(node, bool):
        return Constant(float(node))
    node = _obj(node, path)
    kind = _str(node, "kind", path)
    if kind == "constant":
        _known(node, path, ("kind", "value"))
        return Constant(_num(node, "value", path))
    if kind == "uniform":
        _known(node, path, ("kind", "lo", "hi"))
        return _build(path, Uniform, _num(node, "lo", path), _num(node, "hi", path))
    if kind == "truncated_normal":
        _known(node, path, ("kind", "mean", "sd", "lo", "hi"))
        return _build(path, TruncatedNormal, *(_num(node, k, path) for k in ("mean", "sd", "lo", "hi")))
    raise ConfigError(f"{path}.kind", f"unknown distribution {kind!r}")


def parse_belief(node: Any, path: str) -> BelievedCost:
    if node in ("zero", "true_cost"):
        return BelievedCost(node)
    if isinstance(node, dict) and set(node) == {"fixed"}:
        value = _num(node, "fixed", path)
        return _build(f"{path}.fixed", BelievedCost, "fixed", value)
    raise ConfigError(path, 'expected "zero", "true_cost" or {"fixed": <cost>}')


def parse_population(node: Any, path: str = "$.population") -> PopulationSpec:
    node = _obj(node, path)
    _known(node, path, ("seed", "size", "v", "alpha", "beta", "gamma", "lambda",
                        "free_rider_share", "misbelief_rate", "believed_cost"))
    seed = _int(node, "seed", path)
    if not 0 <= seed < 2**64:
        raise ConfigError(f"{path}.seed", "must be an unsigned 64-bit integer")
    kwargs: dict[str, Any] = dict(seed=seed)
    if "size" in node:
        kwargs["size"] = _int(node, "size", path)
        if kwargs["size"] < 1:
            raise ConfigError(f"{path}.size", "must be >= 1")
    for key, attr in (("v", "v_dist"), ("alpha", "alpha_dist"), ("beta", "beta_dist"),
                      ("gamma", "gamma_dist"), ("lambda", "lambda_dist")):
        if key in node:
            kwargs[attr] = parse_distribution(node[key], f"{path}.{key}")
    for key in ("free_rider_share", "misbelief_rate"):
        if key in node:
            kwargs[key] = _num(node, key, path)
            if not 0 <= kwargs[key] <= 1:
                raise ConfigError(f"{path}.{key}", "must lie in [0, 1]")
    if "believed_cost" in node:
        kwargs["believed_cost"] = parse_belief(node["believed_cost"], f"{path}.believed_cost")
    return _build(path, PopulationSpec, **kwargs)


def parse_strategy(node: Any, path: str) -> StrategyCell:
    node = _obj(node, path)
    _known(node, path, ("name", "cost", "cost_type", "erp", "reveal_cost"))
    cost = _num(node, "cost", path)
    if cost < 0:
        raise ConfigError(f"{path}.cost", "must be >= 0")
    erp = node.get("erp")
    if erp is not None:
        erp = _num(node, "erp", path)
        if erp < 0:
            raise ConfigError(f"{path}.erp", "must be >= 0")
    cost_type = _str(node, "cost_type", path, "R")
    if cost_type.upper() not in ("R", "S", "RECOVERABLE", "SUNK"):
        raise ConfigError(f"{path}.cost_type", f'expected "R" or "S", got {cost_type!r}')
    return _build(path, StrategyCell, cost=cost, cost_type=cost_type, provide_erp=erp is not None,
                  erp_level=erp, reveal_cost=_bool(node, "reveal_cost", path, False),
                  name=_str(node, "name", path, ""))


def parse_mode(node: Any, path: str = "$.mode") -> BehaviorMode:
    if isinstance(node, str):
        node = {"kind": node}
    node = _obj(node, path)
    _known(node, path, ("kind", "gain_fraction", "price_rule", "noise_sd"))
    kind = _str(node, "kind", path, "literal")
    if kind not in ("literal", "fs_model"):
        raise ConfigError(f"{path}.kind", f'expected "literal" or "fs_model", got {kind!r}')
    rule = _str(node, "price_rule", path, "upper")
    if rule not in ("upper", "lower", "midpoint"):
        raise ConfigError(f"{path}.price_rule", f"unknown price rule {rule!r}")
    return _build(path, BehaviorMode, kind, _num(node, "gain_fraction", path, 0.4), rule,
                  _num(node, "noise_sd", path, 0.0))


def parse_sweep(node: Any, strategies: Sequence[StrategyCell], path: str = "$.sweep") -> SweepConfig:
    node = _obj(node, path)
    _known(node, path, ("parameter", "values", "strategy"))
    name = _str(node, "parameter", path)
    try:
        parameter = SweepParameter(name)
    except ValueError:
        raise ConfigError(f"{path}.parameter", f"unknown sweep parameter {name!r}") from None
    values = node.get("values")
    if not isinstance(values, list):
        raise ConfigError(f"{path}.values", "expected a list of numbers")
    if not values:
        raise ConfigError(f"{path}.values", "sweep grid must not be empty")
    for i, x in enumerate(values):
        _build(f"{path}.values[{i}]", validate_sweep_value, parameter, x)
    ref = node.get("strategy", 0)
    if isinstance(ref, str):
        names = [s.name for s in strategies]
        if ref not in names:
            raise ConfigError(f"{path}.strategy", f"no strategy named {ref!r}")
        index = names.index(ref)
    elif isinstance(ref, int) and not isinstance(ref, bool) and 0 <= ref < len(strategies):
        index = ref
    else:
        raise ConfigError(f"{path}.strategy", f"expected a strategy index or name, got {ref!r}")
    return SweepConfig(parameter, tuple(float(x) for x in values), index)


def parse_output(node: Any, base_dir: Path, path: str = "$.output") -> OutputConfig:
    node = _obj(node, path)
    _known(node, path, ("path", "format", "precision"))
    fmt = _str(node, "format", path, "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"{path}.format", f'expected "csv" or "json", got {fmt!r}')
    precision = _int(node, "precision", path, DEFAULT_PRECISION)
    if not 1 <= precision <= 17:
        raise ConfigError(f"{path}.precision", "must lie in [1, 17]")
    target = Path(_str(node, "path", path, f"results.{fmt}"))
    if not target.is_absolute():
        target = base_dir / target
    return OutputConfig(target, fmt, precision)


def parse_config(doc: Any, base_dir: Path = Path(".")) -> RunConfig:
    doc = _obj(doc, "$")
    _known(doc, "$", ("population", "strategies", "mode", "sweep", "output"))
    if "population" not in doc:
        raise ConfigError("$.population", "required field missing")
    population = parse_population(doc["population"])
    raw = doc.get("strategies")
    if not isinstance(raw, list) or not raw:
        raise ConfigError("$.strategies", "expected a non-empty list of strategy cells")
    strategies = tuple(parse_strategy(s, f"$.strategies[{i}]") for i, s in enumerate(raw))
    mode = parse_mode(doc.get("mode", {}))
    sweep = parse_sweep(doc["sweep"], strategies) if doc.get("sweep") is not None else None
    output = parse_output(doc.get("output", {}), base_dir)
    return RunConfig(population, strategies, mode, sweep, output)


def load_config(path: Path | str) -> RunConfig:
    """Read and validate a config file. ``OSError`` propagates; bad content raises :class:`ConfigError`."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from None
    return parse_config(doc, path.parent)


# -- writing -----------------------------------------------------------------

def fmt_number(x: Optional[float], precision: int) -> str:
    if x is None:
        return NA
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    text = format(x, f".{precision}g")
    return "0" if text == "-0" else text


def _json_number(x: Optional[float], precision: int):
    if x is None or (isinstance(x, int) and not isinstance(x, bool)):
        return x
    return float(fmt_number(x, precision))


def metrics_records(rows: Sequence[tuple[str, AggregateMetrics]], precision: int) -> list[dict]:
    return [{"cell": label, **{k: _json_number(v, precision) for k, v in m.as_row().items()}}
            for label, m in rows]


def sweep_records(parameter: SweepParameter, rows: Sequence[SweepRow], precision: int) -> list[dict]:
    return [{"parameter": parameter.value, "value": _json_number(r.value, precision),
             **{k: _json_number(v, precision) for k, v in r.metrics.as_row().items()}} for r in rows]


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def metrics_csv(rows: Sequence[tuple[str, AggregateMetrics]], precision: int) -> str:
    return _csv_text(
        ("cell",) + METRIC_COLUMNS,
        [[label] + [fmt_number(v, precision) for v in m.as_row().values()] for label, m in rows],
    )


def sweep_csv(parameter: SweepParameter, rows: Sequence[SweepRow], precision: int) -> str:
    return _csv_text(
        (parameter.value,) + METRIC_COLUMNS,
        [[fmt_number(r.value, precision)] + [fmt_number(v, precision) for v in r.metrics.as_row().values()]
         for r in rows],
    )


TRACE_COLUMNS = ("consumer_index", "scenario", "bought", "price", "consumer_payoff", "supplier_payoff")


def trace_csv(outcomes: Sequence[InteractionOutcome], precision: int) -> str:
    return _csv_text(TRACE_COLUMNS, [
        [str(i), o.scenario.value, "true" if o.bought else "false", fmt_number(o.price, precision),
         fmt_number(o.consumer_payoff, precision), fmt_number(o.supplier_payoff, precision)]
        for i, o in enumerate(outcomes)
    ])


def json_text(records: list[dict]) -> str:
    return json.dumps(records, indent=2, allow_nan=False) + "\n"


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
