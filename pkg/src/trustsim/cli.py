"""Command line interface.

Subcommands: ``analyze`` (calibrate the mechanism constants), ``simulate``
(run a config file and export metrics CSV), ``oracle`` (Monte-Carlo
validation of the closed forms), ``plot`` (render a metrics CSV as SVG).

Exit codes: 0 success / validation pass, 1 oracle fail, 2 usage or config
error, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from . import game, oracle
from .chart import write_chart
from .engine import ConfigError, SchemaError, Simulation
from .ledger import EventCsvSink
from .runconfig import config_keys, load_run_config

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_IO = 3


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trustsim",
        description="Calibrate and simulate the volunteer-credit trust mechanism.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", help="calibration report for (n, j, p)")
    analyze.add_argument("--n", type=int, required=True)
    analyze.add_argument("--j", type=int, required=True)
    analyze.add_argument("--p", type=float, required=True)
    analyze.add_argument("--epsilon", type=float, default=0.01,
                         help="tolerated liar escape probability (default 0.01)")
    analyze.add_argument("--margin", type=float, default=0.1,
                         help="safety margin over the penalty bound (default 0.1)")
    analyze.add_argument("--reward", type=float, default=10.0)
    analyze.add_argument("--cost", type=float, default=1.0)
    analyze.set_defaults(handler=_cmd_analyze)

    simulate = sub.add_parser("simulate", help="run a simulation config file")
    simulate.add_argument("config", help="path to a key=value config file")
    simulate.add_argument("--seeds", default=None,
                          help="comma-separated seed list; one metrics CSV per seed")
    for key in config_keys():
        simulate.add_argument(f"--{key.replace('_', '-')}", dest=f"set_{key}",
                              default=None, metavar="VALUE",
                              help=f"override config key {key}")
    simulate.set_defaults(handler=_cmd_simulate)

    orc = sub.add_parser("oracle", help="Monte-Carlo validation of the closed forms")
    orc_sub = orc.add_subparsers(dest="oracle_command", required=True)
    liar = orc_sub.add_parser("liar-payoff", help="per-round liar payoff estimate")
    liar.add_argument("--p", type=float, required=True)
    liar.add_argument("--penalty", type=float, required=True)
    liar.add_argument("--j", type=int, required=True)
    liar.add_argument("--trials", type=_count, default=1_000_000)
    liar.add_argument("--seed", type=int, default=0)
    liar.add_argument("--sigmas", type=float, default=4.0)
    liar.set_defaults(handler=_cmd_oracle_liar)
    escape = orc_sub.add_parser("escape", help="liar escape frequency estimate")
    escape.add_argument("--j", type=int, required=True)
    escape.add_argument("--p", type=float, required=True)
    escape.add_argument("--streak", type=int, required=True)
    escape.add_argument("--trials", type=_count, default=100_000)
    escape.add_argument("--seed", type=int, default=0)
    escape.add_argument("--sigmas", type=float, default=4.0)
    escape.set_defaults(handler=_cmd_oracle_escape)

    plot = sub.add_parser("plot", help="render a metrics CSV as an SVG line chart")
    plot.add_argument("csv", help="metrics CSV path")
    plot.add_argument("svg", help="output SVG path")
    plot.set_defaults(handler=_cmd_plot)
    return parser


def _count(text: str) -> int:
    return int(float(text))  # accepts 1e6


def _cmd_analyze(args) -> int:
    bound_dom = game.penalty_bound_dominance(args.n, args.j, args.p)
    bound_desc = game.penalty_bound_descending(args.j, args.p)
    penalty = game.recommended_penalty(args.j, args.p, args.margin)
    liar_payoff = game.expected_liar_payoff(args.p, penalty, args.j)
    threshold = game.recommend_threshold(args.j, args.p, args.epsilon)
    params = game.GameParams(
        n=args.n, j=args.j, p=args.p, penalty=penalty,
        reward=args.reward, cost=args.cost,
    )
    matrix = game.payoff_matrix(params)
    result = game.eliminate_dominated(matrix)

    print(f"calibration for n={args.n} j={args.j} p={args.p!r}")
    print(f"  penalty_bound_dominance  = {bound_dom!r}")
    print(f"  penalty_bound_descending = {bound_desc!r}")
    print(f"  recommended_penalty      = {penalty!r}  (margin {args.margin!r})")
    print(f"  liar_payoff_at_penalty   = {liar_payoff!r}")
    print(f"  recommended_threshold    = {threshold}  (epsilon {args.epsilon!r})")
    print(f"  lying_dominated          = {game.lying_is_dominated(params)}")
    print("payoff matrix (requester / responder):")
    rows = {}
    for sel, label in ((game.Selection.BY_TRUST, "by_trust"), (game.Selection.RANDOM, "random")):
        rows[label] = [
            f"{cell.requester!r} / {cell.responder!r}"
            for cell in (
                matrix.cell(sel, game.Response.TRUTHFUL),
                matrix.cell(sel, game.Response.LYING),
            )
        ]
    width = max(len(text) for cells in rows.values() for text in cells)
    width = max(width, len("truthful"), len("lying"))
    print(f"  {'':10s} {'truthful':>{width}s} | {'lying':>{width}s}")
    for label, cells in rows.items():
        print(f"  {label:10s} {cells[0]:>{width}s} | {cells[1]:>{width}s}")
    if result.profile is not None:
        sel, resp = result.profile
        print(f"dominance outcome: ({sel.value}, {resp.value})")
    else:
        print(
            "dominance outcome: tie — surviving strategies "
            f"{[s.value for s in result.requester]} x {[r.value for r in result.responder]}"
        )
    return EXIT_OK


def _cmd_simulate(args) -> int:
    overrides = {
        key: getattr(args, f"set_{key}")
        for key in config_keys()
        if getattr(args, f"set_{key}") is not None
    }
    run = load_run_config(args.config, overrides)
    if args.seeds is not None:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip()]
        if not seeds:
            raise ValueError("empty --seeds list")
    else:
        seeds = [run.sim.rng_seed]

    for seed in seeds:
        sim_config = dataclasses.replace(run.sim, rng_seed=seed)
        metrics_path = (
            run.metrics_csv
            if args.seeds is None
            else _with_seed_suffix(run.metrics_csv, seed)
        )
        if run.trace_csv is not None:
            trace_path = (
                run.trace_csv
                if args.seeds is None
                else _with_seed_suffix(run.trace_csv, seed)
            )
            with open(trace_path, "w", newline="") as trace_fh:
                sim = Simulation(sim_config, event_sink=EventCsvSink(trace_fh))
                series = sim.run()
        else:
            sim = Simulation(sim_config)
            series = sim.run()
        series.write_csv(metrics_path)
        last = series.rows[-1]
        print(
            f"seed={seed} cycles={len(series)} wrote {metrics_path} | final averages: "
            f"good={_fmt(last.avg_trust_good)} bad={_fmt(last.avg_trust_bad)} "
            f"liar={_fmt(last.avg_trust_liar)} "
            f"newcomer_good={_fmt(last.avg_trust_newcomer_good)} "
            f"success_rate={_fmt(last.success_rate)} penalties={last.penalties}"
        )
    return EXIT_OK


def _fmt(value: float | None) -> str:
    return "-" if value is None else f"{value:.6f}"


def _with_seed_suffix(path: str, seed: int) -> str:
    stem, dot, ext = path.rpartition(".")
    if not dot:
        return f"{path}.seed{seed}"
    return f"{stem}.seed{seed}.{ext}"


def _cmd_oracle_liar(args) -> int:
    expected = game.expected_liar_payoff(args.p, args.penalty, args.j)
    result = oracle.mc_liar_payoff(args.p, args.penalty, args.j, args.trials, args.seed)
    return _verdict("liar-payoff", expected, result, args.sigmas)


def _cmd_oracle_escape(args) -> int:
    expected = game.escape_probability(args.j, args.p, args.streak)
    result = oracle.mc_escape_frequency(args.j, args.p, args.streak, args.trials, args.seed)
    return _verdict("escape", expected, result, args.sigmas)


def _verdict(name: str, expected: float, result, sigmas: float) -> int:
    ok = oracle.within_sigmas(expected, result, sigmas)
    print(
        f"{name}: closed_form={expected!r} mc_mean={result.mean!r} "
        f"std_error={result.std_error!r} trials={result.trials} "
        f"sigmas={sigmas:g} verdict={'PASS' if ok else 'FAIL'}"
    )
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_plot(args) -> int:
    write_chart(args.csv, args.svg)
    print(f"wrote {args.svg}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
