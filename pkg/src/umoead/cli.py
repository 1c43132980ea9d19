"""Command-line entry point.

Subcommands::

    umoead run --config run.json [--problem P] [--n N] [--seed S] [--mode M] [--out DIR]
    umoead metrics --input objectives.csv --ref 1.1,1.1 [--K 50]
    umoead oracle --problem zdt1 --lambda 0.5,0.5

Exit status is 0 on success, 2 for usage or configuration errors and 1
for failures during a run.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .errors import ConfigurationError, DomainError, NotAvailableError, UmoeadError
from .harness import RunConfig, export, read_objectives, run
from .metrics import report
from .problems import analytic_h, get_problem, numeric_h_oracle

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigurationError(f"{self.prog}: {message}")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="umoead", description="MOEA/D with surrogate-guided uniform weight adjustment.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="run the optimizer and export results")
    p_run.add_argument("--config", help="JSON run configuration")
    p_run.add_argument("--problem")
    p_run.add_argument("--n", type=int, help="population size N")
    p_run.add_argument("--seed", type=int)
    p_run.add_argument("--mode", choices=("umoead", "moead"))
    p_run.add_argument("--out", help="output directory")

    p_met = sub.add_parser("metrics", help="score an objective set")
    p_met.add_argument("--input", required=True, help="objectives.csv or a plain numeric CSV")
    p_met.add_argument("--ref", required=True, type=_floats, help="reference point, e.g. 1.1,1.1")
    p_met.add_argument("--K", type=float, default=50.0, help="sharpness of the soft minimum distance")

    p_orc = sub.add_parser("oracle", help="print the Pareto objective on the ray of a weight")
    p_orc.add_argument("--problem", required=True)
    p_orc.add_argument("--lambda", dest="lam", required=True, type=_floats)
    return parser


def _cmd_run(args) -> int:
    config = RunConfig.load(args.config) if args.config else RunConfig()
    overrides = {
        "problem": args.problem,
        "N": args.n,
        "seed": args.seed,
        "mode": args.mode,
        "out": args.out,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if overrides:
        config = RunConfig.from_dict({**config.to_dict(), **overrides})
    result = run(config)
    if config.out:
        export(result, config.out)
    last = result.rounds[-1].metrics
    print(json.dumps({"hv": last.hv, "spacing": last.spacing, "delta": last.delta, "out": config.out}))
    return EXIT_OK


def _cmd_metrics(args) -> int:
    Y = read_objectives(args.input)
    if Y.ndim != 2 or Y.shape[1] != len(args.ref):
        raise ConfigurationError(f"reference point has {len(args.ref)} components, objectives have {Y.shape[-1]}")
    print(report(Y, np.array(args.ref), args.K).to_json())
    return EXIT_OK


def _cmd_oracle(args) -> int:
    problem = get_problem(args.problem)
    lam = np.array(args.lam)
    if lam.shape != (problem.m,):
        raise ConfigurationError(f"{problem.id} needs a weight with {problem.m} components")
    if not np.isclose(lam.sum(), 1.0, atol=1e-9):
        raise ConfigurationError(f"weight components must sum to 1, got {lam.sum():g}")
    try:
        try:
            y = analytic_h(problem, lam)
        except NotAvailableError:
            y = numeric_h_oracle(problem, lam)
    except DomainError as exc:
        raise ConfigurationError(str(exc)) from exc
    print(" ".join(format(float(v), ".12g") for v in y))
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "metrics": _cmd_metrics, "oracle": _cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigurationError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UmoeadError, OSError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
