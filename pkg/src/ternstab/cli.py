"""Command-line interface.

Exit codes: 0 when every checked law passes, 1 when some check fails,
2 on configuration or runtime errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import TernstabError
from .harness import (
    ExperimentConfig,
    Scenario,
    emit_report,
    load_config,
    render_csv,
    render_json,
    run_scenario,
)
from .algebra import AlgebraDescriptor
from .mappings import ControlForm
from .stabilizer import Direction


def _add_common(parser: argparse.ArgumentParser, *, samples: int, tol: float) -> None:
    parser.add_argument("--algebra", type=str, default="matrix:2", help="matrix:N | diag:D | module:D")
    parser.add_argument("--samples", type=int, default=samples)
    parser.add_argument("--tol", type=float, default=tol)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--out", type=Path, default=None, help="write report to this path")
    parser.add_argument("--format", choices=["json", "csv"], default="json")


def _add_theta(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--theta", type=float, default=None, help="analytic control level")
    group.add_argument(
        "--theta-empirical",
        type=int,
        default=None,
        metavar="SAMPLES",
        help="measure the control level on this many seeded samples (default 2000)",
    )
    parser.add_argument("--theta-radius", type=float, default=3.0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ternstab",
        description="Numerical stability verification on finite-dimensional C*-ternary algebras",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    axioms = sub.add_parser("verify-axioms", help="check the C*-ternary algebra laws")
    _add_common(axioms, samples=1000, tol=1e-9)

    stab = sub.add_parser("stabilize", help="approximate-homomorphism recovery pipeline")
    _add_common(stab, samples=50, tol=1e-10)
    stab.add_argument("--form", choices=["sum", "product"], default="sum")
    stab.add_argument("--direction", choices=["contract", "expand"], default="contract")
    stab.add_argument("--r", type=float, default=4.0)
    stab.add_argument("--c", type=float, default=0.01)
    _add_theta(stab)

    deriv = sub.add_parser("derivation", help="approximate-derivation recovery pipeline")
    _add_common(deriv, samples=50, tol=1e-10)
    deriv.add_argument("--form", choices=["sum", "product"], default="sum")
    deriv.add_argument("--direction", choices=["contract", "expand"], default="contract")
    deriv.add_argument("--r", type=float, default=4.0)
    deriv.add_argument("--c", type=float, default=0.01)
    _add_theta(deriv)

    iso = sub.add_parser("isomorphism", help="exact-multiplicativity isomorphism checks")
    _add_common(iso, samples=50, tol=1e-10)
    iso.add_argument("--r", type=float, default=4.0)
    iso.add_argument("--theta", type=float, default=1.0)

    counter = sub.add_parser("counterexample", help="critical-exponent counterexample suite")
    _add_common(counter, samples=100_000, tol=1e-10)
    counter.add_argument("--theta", type=float, default=1.0)

    lin = sub.add_parser("linearity", help="C-linearity certificate on an exact map")
    _add_common(lin, samples=200, tol=1e-11)

    run = sub.add_parser("run", help="run a JSON experiment config")
    run.add_argument("--config", type=Path, required=True)
    run.add_argument("--out", type=Path, default=None)
    run.add_argument("--format", choices=["json", "csv"], default="json")

    return parser


_STABILITY_BY_REGIME = {
    ("sum", "contract"): Scenario.STABILITY_SUM_CONTRACT,
    ("sum", "expand"): Scenario.STABILITY_SUM_EXPAND,
    ("product", "contract"): Scenario.STABILITY_PROD_CONTRACT,
    ("product", "expand"): Scenario.STABILITY_PROD_EXPAND,
}


def _theta_kwargs(args: argparse.Namespace) -> dict:
    kwargs = {"theta_radius": args.theta_radius}
    if args.theta is not None:
        kwargs["theta"] = args.theta
    else:
        kwargs["theta_samples"] = args.theta_empirical or 2000
    return kwargs


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    algebra = AlgebraDescriptor.parse(args.algebra)
    common = {"samples": args.samples, "tol": args.tol, "seed": args.seed}
    if args.command == "verify-axioms":
        return ExperimentConfig(Scenario.AXIOMS, algebra, **common)
    if args.command == "stabilize":
        scenario = _STABILITY_BY_REGIME[(args.form, args.direction)]
        return ExperimentConfig(
            scenario, algebra, r=args.r, c=args.c, **_theta_kwargs(args), **common
        )
    if args.command == "derivation":
        return ExperimentConfig(
            Scenario.DERIVATION,
            algebra,
            r=args.r,
            c=args.c,
            form=ControlForm(args.form),
            direction=Direction(args.direction),
            **_theta_kwargs(args),
            **common,
        )
    if args.command == "isomorphism":
        return ExperimentConfig(
            Scenario.ISOMORPHISM, algebra, r=args.r, theta=args.theta, **common
        )
    if args.command == "counterexample":
        return ExperimentConfig(
            Scenario.COUNTEREXAMPLE, algebra, theta=args.theta, r=1.0, **common
        )
    if args.command == "linearity":
        return ExperimentConfig(Scenario.LINEARITY, algebra, **common)
    raise AssertionError(f"unhandled command {args.command}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            config = load_config(args.config)
        else:
            config = config_from_args(args)
        report = run_scenario(config)
    except TernstabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    text = render_json(report) if args.format == "json" else render_csv(report)
    if args.out is not None:
        try:
            emit_report(report, args.format, args.out)
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    else:
        sys.stdout.write(text)
    print(
        f"{config.scenario.value}: {'PASS' if report.passed else 'FAIL'} "
        f"({len(report.laws)} laws, {report.wall_clock_seconds:.2f}s)",
        file=sys.stderr,
    )
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
