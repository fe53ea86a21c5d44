"""Command-line entry point: ``pwyw solve | simulate | sweep``.

Exit codes: 0 success, 1 I/O failure, 2 invalid parameters or configuration.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import (
    ConfigError,
    RunConfig,
    fmt_number,
    json_text,
    load_config,
    metrics_csv,
    metrics_records,
    sweep_csv,
    sweep_records,
    trace_csv,
    write_text,
)
from .experiments import AggregateMetrics, run_cell, sweep
from .game import ModeKind, fs_inputs
from .optimizer import check_consistency, formula_case, formula_price, optimal_price_closed_form
from .population import PopulationError, sample_population
from .preferences import ParameterError

EXIT_IO = 1
EXIT_INVALID = 2


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


# -- solve -------------------------------------------------------------------

def cmd_solve(args: argparse.Namespace) -> int:
    if args.pr is None and args.v is None:
        return _fail(EXIT_INVALID, "give --pr, or --v with an optional --erp")
    p_r = args.pr if args.pr is not None else (min(args.v, args.erp) if args.erp is not None else args.v)
    floored = not args.unfloored
    try:
        result = optimal_price_closed_form(p_r, args.c, args.alpha, args.beta, args.gamma, floored=floored)
    except ParameterError as exc:
        return _fail(EXIT_INVALID, str(exc))

    case = formula_case(args.beta, args.gamma)
    if result.is_point:
        print(f"P* = {fmt_number(result.lower, 9)} (case: {case})")
    else:
        tag = "indifference" if len(result.pieces) == 1 else "tie"
        print(f"P* ∈ {result.describe()} ({tag})")
        print(f"case: {case}")
    print(f"max utility: {fmt_number(result.max_utility, 9)}")

    expected = formula_price(p_r, args.c, args.beta, args.gamma)
    if floored and expected is not None and not (result.is_point and result.lower == expected):
        print(f"note: the three-case rule names {fmt_number(expected, 9)}, "
              f"which is not utility-maximising here")

    if args.verify:
        report = check_consistency(p_r, args.c, args.alpha, args.beta, args.gamma, args.step, floored=floored)
        status = "pass" if report.passed else "FAIL"
        print(f"oracle check: {status} (step={fmt_number(report.params['step'], 6)}, "
              f"worst distance={fmt_number(report.worst_point_distance, 3)}, "
              f"utility gap={fmt_number(report.utility_gap, 3)})")
        for msg in report.messages:
            print(f"  {msg}")
    return 0


# -- simulate / sweep --------------------------------------------------------

def _load(path: str) -> RunConfig:
    return load_config(path)


def _output_path(cfg: RunConfig, override: Optional[str]) -> Path:
    return Path(override) if override else cfg.output.path


def _summary(rows: Sequence[tuple[str, AggregateMetrics]], first: str = "cell") -> str:
    header = (first, "demand", "mean_price", "revenue", "profit")
    lines = [header]
    for label, m in rows:
        lines.append((label, fmt_number(m.demand_rate, 4), fmt_number(m.mean_price_paid, 6),
                      fmt_number(m.revenue, 8), fmt_number(m.profit, 8)))
    widths = [max(len(r[i]) for r in lines) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in lines)


def _verify_population(cfg: RunConfig, population) -> tuple[int, int]:
    checked = failed = 0
    seen = set()
    for cell in cfg.strategies:
        supplier = cell.supplier()
        if supplier.reveals_cost:
            continue
        for consumer in population:
            if consumer.is_free_rider:
                continue
            key = fs_inputs(consumer, supplier, cfg.population.believed_cost)
            if key in seen:
                continue
            seen.add(key)
            checked += 1
            failed += not check_consistency(*key).passed
    return checked, failed


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        cfg = _load(args.config)
        population = sample_population(cfg.population)
        results = []
        traces = []
        for cell in cfg.strategies:
            metrics, outcomes = run_cell(population, cell, cfg.mode, belief=cfg.population.believed_cost,
                                         noise_seed=cfg.population.seed, threads=args.threads)
            results.append((cell.label, metrics))
            traces.append(outcomes)
    except ConfigError as exc:
        return _fail(EXIT_INVALID, f"invalid config: {exc}")
    except (ParameterError, PopulationError) as exc:
        return _fail(EXIT_INVALID, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))

    out = _output_path(cfg, args.output)
    precision = cfg.output.precision
    if cfg.output.format == "json":
        text = json_text(metrics_records(results, precision))
    else:
        text = metrics_csv(results, precision)
    try:
        write_text(out, text)
        if args.trace:
            for k, outcomes in enumerate(traces):
                write_text(out.with_name(f"{out.stem}_trace_{k}.csv"), trace_csv(outcomes, precision))
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))

    print(_summary(results))
    print(f"wrote {out}")
    if args.verify:
        if cfg.mode.kind is ModeKind.FS_MODEL:
            checked, failed = _verify_population(cfg, population)
            print(f"oracle check: {checked - failed}/{checked} optimiser inputs agree")
        else:
            print("oracle check: skipped (literal mode does not use the optimiser)")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    try:
        cfg = _load(args.config)
        if cfg.sweep is None:
            raise ConfigError("$.sweep", "required for the sweep command")
        spec = cfg.sweep
        rows = sweep(cfg.population, cfg.strategies[spec.strategy], spec.parameter, list(spec.values),
                     cfg.mode, threads=args.threads)
    except ConfigError as exc:
        return _fail(EXIT_INVALID, f"invalid config: {exc}")
    except (ParameterError, PopulationError) as exc:
        return _fail(EXIT_INVALID, str(exc))
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))

    out = _output_path(cfg, args.output)
    precision = cfg.output.precision
    if cfg.output.format == "json":
        text = json_text(sweep_records(spec.parameter, rows, precision))
    else:
        text = sweep_csv(spec.parameter, rows, precision)
    try:
        write_text(out, text)
    except OSError as exc:
        return _fail(EXIT_IO, str(exc))

    print(_summary([(fmt_number(r.value, 6), r.metrics) for r in rows], spec.parameter.value))
    print(f"wrote {out}")
    return 0


# -- parser ------------------------------------------------------------------

def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pwyw", description="Pay-what-you-want consumer and supplier simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="optimal price of one consumer")
    solve.add_argument("--pr", type=float, help="reference price p_r")
    solve.add_argument("--v", type=float, help="internal reference price (used with --erp when --pr is absent)")
    solve.add_argument("--erp", type=float, help="external reference price")
    solve.add_argument("--c", type=float, required=True, help="unit cost")
    solve.add_argument("--alpha", type=float, required=True)
    solve.add_argument("--beta", type=float, required=True)
    solve.add_argument("--gamma", type=float, default=0.0)
    solve.add_argument("--verify", action="store_true", help="cross-check against the grid oracle")
    solve.add_argument("--step", type=float, default=None, help="oracle grid step (default 1e-3 * max(1, p_r))")
    solve.add_argument("--unfloored", action="store_true",
                       help="use the raw supplier margin in the inequity terms")
    solve.set_defaults(func=cmd_solve)

    for name, func, text in (("simulate", cmd_simulate, "run every strategy cell on one population"),
                             ("sweep", cmd_sweep, "sweep one parameter over a grid")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config", help="JSON run configuration")
        p.add_argument("-o", "--output", help="override output.path from the config")
        p.add_argument("--threads", type=_positive_int, default=1)
        p.add_argument("--verify", action="store_true")
        if name == "simulate":
            p.add_argument("--trace", action="store_true", help="also write per-consumer outcome CSVs")
        p.set_defaults(func=func)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
