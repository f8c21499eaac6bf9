"""Command-line surface: ``point``, ``sweep``, ``mc`` and ``validate``.

Exit codes: 0 success, 1 a validation gate failed, 2 usage error. Data goes to
stdout (or ``--output``); logs go to stderr.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from typing import Callable, List, Optional, Sequence

from pydantic import ValidationError

from . import analytic, experiments
from .graph import run_validation
from .models import (
    ChannelParams,
    EventTag,
    McResponse,
    PointResponse,
    Scheme,
    SweepSpec,
    SweepVariable,
    SystemConfig,
)
from .modes import db_to_linear
from .oracle import QuadratureError, mc_estimate
from .settings import get_settings

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_GATE_FAILED = 1
EXIT_USAGE = 2

DEFAULT_POWER_DB = 30.0
DEFAULT_R0 = 3.0


# Flag validators; argparse prefixes the message with the flag name.


def _float(value: str) -> float:
    try:
        x = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}")
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"must be finite, got {value!r}")
    return x


def _decibel(value: str) -> float:
    x = _float(value)
    try:
        db_to_linear(x)
    except OverflowError:
        raise argparse.ArgumentTypeError(f"out of range: {value!r} dB")
    return x


def _positive(value: str) -> float:
    x = _float(value)
    if x <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value!r}")
    return x


def _non_negative(value: str) -> float:
    x = _float(value)
    if x < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value!r}")
    return x


def _count(minimum: int) -> Callable[[str], int]:
    def parse(value: str) -> int:
        try:
            n = int(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer: {value!r}")
        if n < minimum:
            raise argparse.ArgumentTypeError(f"must be at least {minimum}, got {value!r}")
        return n

    return parse


def _omega(value: str) -> List[float]:
    parts = value.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(
            f"expected four comma-separated means (O11,O12,O21,O22), got {value!r}"
        )
    return [_positive(p) for p in parts]


def _schemes(value: str) -> List[Scheme]:
    try:
        out = [Scheme(p.strip()) for p in value.split(",") if p.strip()]
    except ValueError:
        choices = ",".join(s.value for s in Scheme)
        raise argparse.ArgumentTypeError(f"unknown scheme in {value!r} (choose from {choices})")
    if not out:
        raise argparse.ArgumentTypeError("at least one scheme is required")
    return out


# Parser


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    ps = p.add_mutually_exclusive_group()
    ps.add_argument("--ps-db", type=_decibel, help="source power, dB relative to sigma2 (default 30)")
    ps.add_argument("--ps", type=_positive, help="source power, linear")
    pr = p.add_mutually_exclusive_group()
    pr.add_argument("--pr-db", type=_decibel, help="relay power, dB relative to sigma2 (default 30)")
    pr.add_argument("--pr", type=_positive, help="relay power, linear")
    rsi = p.add_mutually_exclusive_group()
    rsi.add_argument("--kr", type=_non_negative, help="RSI coefficient k_r (default 0)")
    rsi.add_argument("--rsi-var", type=_non_negative, help="RSI variance k_r * p_r, linear")
    p.add_argument("--sigma2", type=_positive, default=1.0, help="noise variance (default 1)")
    p.add_argument("--r0", type=_positive, default=DEFAULT_R0, help="target rate, bits/s/Hz (default 3)")
    p.add_argument(
        "--omega",
        type=_omega,
        default=[1.0, 1.0, 1.0, 1.0],
        help="mean squared gains O11,O12,O21,O22 (default 1,1,1,1)",
    )


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=["csv", "json"], default=None)
    p.add_argument("--output", "-o", default=None, help="write to this path instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybrid-relay",
        description="Outage analysis of a two-antenna hybrid HD/FD decode-and-forward relay.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    point = sub.add_parser("point", help="closed-form outage breakdown for one configuration")
    _add_config_flags(point)
    _add_output_flags(point)

    sweep = sub.add_parser("sweep", help="outage table over a parameter grid")
    target = sweep.add_mutually_exclusive_group(required=True)
    target.add_argument("--var", choices=[v.value for v in SweepVariable])
    target.add_argument(
        "--preset",
        type=int,
        choices=[3, 4, 5, 6],
        help="published figure setup; overrides the configuration flags",
    )
    sweep.add_argument("--from", dest="start", type=_float, default=None)
    sweep.add_argument("--to", dest="stop", type=_float, default=None)
    sweep.add_argument("--step", type=_positive, default=None)
    sweep.add_argument("--schemes", type=_schemes, default=None, help="comma list (default proposed,traditional)")
    sweep.add_argument("--mc", type=_count(0), default=0, help="Monte Carlo samples per point (0: analytic only)")
    sweep.add_argument("--seed", type=_count(0), default=None)
    _add_config_flags(sweep)
    _add_output_flags(sweep)

    mc = sub.add_parser("mc", help="analytic vs Monte Carlo for one configuration")
    mc.add_argument("--samples", type=_count(1), default=1_000_000)
    mc.add_argument("--seed", type=_count(0), default=None)
    mc.add_argument("--workers", type=_count(1), default=None)
    _add_config_flags(mc)
    _add_output_flags(mc)

    validate = sub.add_parser("validate", help="run the invariant gates")
    validate.add_argument("--grid-size", type=_count(1), default=None)
    validate.add_argument("--mc-samples", type=_count(0), default=None)
    validate.add_argument("--seed", type=_count(0), default=None)
    _add_output_flags(validate)
    return parser


# Argument mapping


def config_from_args(args: argparse.Namespace) -> SystemConfig:
    p_s = args.ps if args.ps is not None else db_to_linear(
        DEFAULT_POWER_DB if args.ps_db is None else args.ps_db
    )
    p_r = args.pr if args.pr is not None else db_to_linear(
        DEFAULT_POWER_DB if args.pr_db is None else args.pr_db
    )
    k_r = args.kr if args.kr is not None else 0.0
    if args.rsi_var is not None:
        k_r = args.rsi_var / p_r
    o11, o12, o21, o22 = args.omega
    return SystemConfig(
        p_s=p_s,
        p_r=p_r,
        sigma2=args.sigma2,
        k_r=k_r,
        r0=args.r0,
        channel=ChannelParams(omega_11=o11, omega_12=o12, omega_21=o21, omega_22=o22),
    )


def sweep_from_args(args: argparse.Namespace) -> SweepSpec:
    seed = get_settings().default_seed if args.seed is None else args.seed
    if args.preset is not None:
        spec = experiments.figure_setup(args.preset, mc_samples=args.mc, seed=seed)
    else:
        variable = SweepVariable(args.var)
        if variable is SweepVariable.RSI_VAR and args.rsi_var is not None:
            raise ValueError("argument --rsi-var: cannot be held fixed while sweeping rsi-var")
        start, stop, step = experiments.default_grid(variable)
        spec = SweepSpec(
            variable=variable,
            start=start,
            stop=stop,
            step=step,
            base=config_from_args(args),
            rsi_var=args.rsi_var,
            mc_samples=args.mc,
            seed=seed,
        )
    updates = {}
    for key in ("start", "stop", "step"):
        if getattr(args, key) is not None:
            updates[key] = getattr(args, key)
    if args.schemes is not None:
        updates["schemes"] = args.schemes
    # re-validate the merged grid and schemes
    return SweepSpec.model_validate({**spec.model_dump(), **updates})


# Commands


def _emit(text: str, args: argparse.Namespace) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _format(args: argparse.Namespace) -> str:
    return args.format or get_settings().output_format


def cmd_point(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    breakdown = analytic.system_outage(config)
    p_trad = experiments.traditional_outage(config)
    if _format(args) == "json":
        body = PointResponse(breakdown=breakdown, p_traditional=p_trad)
        _emit(body.model_dump_json(indent=2) + "\n", args)
    else:
        pairs = experiments.breakdown_pairs(breakdown, p_trad)
        meta = {"degenerate_events": experiments.degenerate_label(breakdown)}
        _emit(experiments.render_table(["quantity", "value"], pairs, meta), args)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = sweep_from_args(args)
    rows = experiments.run_sweep(spec)
    records = experiments.table_rows(rows)
    if _format(args) == "json":
        _emit(experiments.render_json(records), args)
    else:
        meta = {"sweep_variable": spec.variable.value, "seed": spec.seed, "n_samples": spec.mc_samples}
        _emit(experiments.render_csv(records, meta), args)
    return EXIT_OK


def cmd_mc(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    est = mc_estimate(config, args.samples, args.seed, max_workers=args.workers)
    closed = analytic.system_outage(config)
    p_trad = experiments.traditional_outage(config)
    if _format(args) == "json":
        body = McResponse(analytic=closed, p_traditional=p_trad, estimate=est)
        _emit(body.model_dump_json(indent=2) + "\n", args)
        return EXIT_OK

    cells = [
        ("p_fd", closed.p_fd, est.p_fd),
        ("p_hd", closed.p_hd, est.p_hd),
        ("p_sys", closed.p_sys, est.p_sys),
        ("p_traditional", p_trad, est.p_traditional),
    ]
    for tag in EventTag:
        cells.append((f"pr_event_{tag.value}", closed.pr_event[tag], est.pr_event[tag]))
        terms = closed.cond_hd[tag]
        cells += [
            (f"cond_sr_{tag.value}", terms.p_sr, est.cond_sr[tag]),
            (f"cond_rd_{tag.value}", terms.p_rd, est.cond_rd[tag]),
            (f"cond_joint_{tag.value}", terms.p_joint, est.cond_joint[tag]),
            (f"cond_hd_{tag.value}", terms.p_total, est.cond_hd[tag]),
        ]
    rows = [(name, p_an, e.p_hat, e.stderr, e.n, e.status) for name, p_an, e in cells]
    meta = {"seed": est.seed, "n_samples": est.n, "chunk_size": est.chunk_size}
    _emit(
        experiments.render_table(
            ["quantity", "p_analytic", "p_mc", "stderr", "n", "status"], rows, meta
        ),
        args,
    )
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    report = run_validation(args.grid_size, args.mc_samples, args.seed)
    if _format(args) == "json":
        _emit(report.model_dump_json(indent=2) + "\n", args)
    else:
        rows = [
            (g.name, g.passed, g.checked, g.failures, g.worst, g.detail) for g in report.gates
        ]
        meta = {
            "passed": report.passed,
            "seed": report.seed,
            "grid_size": report.grid_size,
            "mc_samples": report.mc_samples,
        }
        _emit(
            experiments.render_table(
                ["gate", "passed", "checked", "failures", "worst", "detail"], rows, meta
            ),
            args,
        )
    for gate in report.gates:
        if not gate.passed:
            logger.error("gate %s failed: %s", gate.name, gate.detail)
    return EXIT_OK if report.passed else EXIT_GATE_FAILED


COMMANDS = {
    "point": cmd_point,
    "sweep": cmd_sweep,
    "mc": cmd_mc,
    "validate": cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with 2 on usage errors

    logging.basicConfig(
        level=get_settings().log_level.upper(),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        first = exc.errors()[0]
        loc = ".".join(str(p) for p in first.get("loc", ()))
        parser.error(f"invalid configuration ({loc}): {first.get('msg')}")
    except ValueError as exc:
        parser.error(str(exc))
    except QuadratureError as exc:
        logger.error("%s", exc)
        return EXIT_GATE_FAILED
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
