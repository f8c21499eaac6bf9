"""Parameter sweeps behind the outage figures, and the single-antenna baseline.

The traditional hybrid scheme uses only Ant-1 for reception and Ant-2 for
transmission in the HD mode as well, so its HD SINRs are g11 * p_s / sigma2
and g22 * p_r / sigma2. FD failure events are the same as for the proposed
scheme; given an event, each HD hop outage is a truncated single-exponential
probability of the very gain the event conditions on.
"""

from __future__ import annotations

import asyncio
import csv
import io
import logging
import math
from typing import Dict, Iterable, List, Optional, Tuple

from pydantic import TypeAdapter, ValidationError

from . import analytic
from .channel import GENERATOR_NAME, gain_cdf
from .models import (
    EventTag,
    Hop,
    HopTerms,
    OutageBreakdown,
    Scheme,
    SchemeResult,
    SweepRow,
    SweepSpec,
    SweepVariable,
    SystemConfig,
    TableRow,
)
from .modes import compute_thresholds, db_to_linear
from .oracle import QuadratureError, mc_estimate_async
from .settings import get_settings

logger = logging.getLogger(__name__)

TABLE_COLUMNS = [
    "sweep_variable",
    "value",
    "scheme",
    "p_analytic",
    "p_mc",
    "stderr",
    "n_samples",
    "seed",
    "status",
]

POWER_REFERENCE = "dB relative to the noise variance sigma2"


# Traditional single-antenna baseline


def _conditional_gain_cdf(
    rate: float, m: float, lo: float, hi: float
) -> Tuple[float, bool]:
    """Pr{X < m | lo <= X < hi} for X ~ Exp(rate), scaled by exp(rate*lo)."""
    mass = -math.expm1(-rate * (hi - lo))
    if not (mass > analytic.DEGENERATE_MASS):
        return gain_cdf(rate, m), True
    w = min(hi, m) - lo
    if w <= 0:
        return 0.0, False
    if w >= hi - lo:
        return 1.0, False
    return analytic.clamp_probability(-math.expm1(-rate * w) / mass), False


def traditional_conditional_hd_outage(tag: EventTag, config: SystemConfig) -> HopTerms:
    th = compute_thresholds(config)
    ch = config.channel
    lo, hi = analytic.hop_window(tag, Hop.SR, th)
    p_sr, deg_sr = _conditional_gain_cdf(ch.lambda_11, th.m2, lo, hi)
    lo, hi = analytic.hop_window(tag, Hop.RD, th)
    p_rd, deg_rd = _conditional_gain_cdf(ch.lambda_22, th.m2p, lo, hi)
    return HopTerms(
        p_sr=p_sr,
        p_rd=p_rd,
        p_joint=p_sr * p_rd,
        p_total=analytic.union_probability(p_sr, p_rd),
        degenerate=deg_sr or deg_rd,
    )


def traditional_breakdown(config: SystemConfig) -> OutageBreakdown:
    th = compute_thresholds(config)
    ch = config.channel
    pr_event = {tag: analytic.event_probability(tag, config) for tag in EventTag}
    cond_hd = {tag: traditional_conditional_hd_outage(tag, config) for tag in EventTag}
    p_sys = sum(pr_event[tag] * cond_hd[tag].p_total for tag in EventTag)
    return OutageBreakdown(
        p_fd=analytic.fd_outage(config),
        p_hd=analytic.union_probability(
            gain_cdf(ch.lambda_11, th.m2), gain_cdf(ch.lambda_22, th.m2p)
        ),
        p_sys=analytic.clamp_probability(p_sys),
        pr_event=pr_event,
        cond_hd=cond_hd,
        thresholds=th,
        degenerate_events=[tag for tag in EventTag if cond_hd[tag].degenerate],
    )


def traditional_outage(config: SystemConfig) -> float:
    return traditional_breakdown(config).p_sys


# Grids and presets

DEFAULT_GRIDS: Dict[SweepVariable, Tuple[float, float, float]] = {
    SweepVariable.P_R_DB: (0.0, 40.0, 1.0),
    SweepVariable.P_S_DB: (0.0, 40.0, 1.0),
    SweepVariable.R0: (0.5, 6.0, 0.25),
    # 1e-2 .. 1e2, log-spaced
    SweepVariable.RSI_VAR: (-20.0, 20.0, 1.0),
}


def default_grid(variable: SweepVariable) -> Tuple[float, float, float]:
    return DEFAULT_GRIDS[variable]


def grid_values(start: float, stop: float, step: float) -> List[float]:
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(count)]


# figure -> (swept variable, fixed sigma2_RSI or None, schemes)
FIGURE_PRESETS: Dict[int, Tuple[SweepVariable, Optional[float], List[Scheme]]] = {
    3: (SweepVariable.P_R_DB, 1.0, [Scheme.PROPOSED, Scheme.TRADITIONAL]),
    4: (SweepVariable.R0, 1.0, [Scheme.PROPOSED, Scheme.TRADITIONAL]),
    5: (SweepVariable.P_S_DB, 1.0, [Scheme.PROPOSED, Scheme.FD_ONLY, Scheme.HD_ONLY]),
    6: (SweepVariable.RSI_VAR, None, [Scheme.PROPOSED, Scheme.FD_ONLY, Scheme.HD_ONLY]),
}


def figure_setup(figure: int, mc_samples: int = 0, seed: Optional[int] = None) -> SweepSpec:
    """Sweep presets of the published outage figures (3 to 6).

    Every preset starts from P_S = P_R = 30 dB and R0 = 3.
    """
    if figure not in FIGURE_PRESETS:
        raise ValueError(f"no preset for figure {figure}")
    variable, rsi_var, schemes = FIGURE_PRESETS[figure]
    seed = get_settings().default_seed if seed is None else seed
    p30 = db_to_linear(30.0)
    base = SystemConfig(p_s=p30, p_r=p30, r0=3.0)
    start, stop, step = default_grid(variable)
    return SweepSpec(
        variable=variable,
        start=start,
        stop=stop,
        step=step,
        base=base.with_rsi_var(rsi_var) if rsi_var is not None else base,
        rsi_var=rsi_var,
        mc_samples=mc_samples,
        seed=seed,
        schemes=list(schemes),
    )


def config_at(spec: SweepSpec, value: float) -> SystemConfig:
    """System configuration at one grid value of the sweep."""
    base = spec.base
    if spec.variable is SweepVariable.P_R_DB:
        config = base.evolve(p_r=db_to_linear(value))
    elif spec.variable is SweepVariable.P_S_DB:
        config = base.evolve(p_s=db_to_linear(value))
    elif spec.variable is SweepVariable.R0:
        config = base.evolve(r0=value)
    else:
        return base.with_rsi_var(db_to_linear(value))
    if spec.rsi_var is not None:
        config = config.with_rsi_var(spec.rsi_var)
    return config


# Sweep engine


def _analytic_results(
    config: SystemConfig, schemes: Iterable[Scheme]
) -> Tuple[OutageBreakdown, Dict[Scheme, float]]:
    breakdown = analytic.system_outage(config)
    values: Dict[Scheme, float] = {
        Scheme.PROPOSED: breakdown.p_sys,
        Scheme.FD_ONLY: breakdown.p_fd,
        Scheme.HD_ONLY: breakdown.p_hd,
    }
    if Scheme.TRADITIONAL in schemes:
        values[Scheme.TRADITIONAL] = traditional_outage(config)
    return breakdown, values


async def _evaluate_row(spec: SweepSpec, index: int, value: float) -> SweepRow:
    try:
        config = config_at(spec, value)
        breakdown, values = await asyncio.to_thread(
            _analytic_results, config, spec.schemes
        )
        estimates = {}
        if spec.mc_samples > 0:
            est = await mc_estimate_async(config, spec.mc_samples, spec.seed)
            estimates = {
                Scheme.PROPOSED: est.p_sys,
                Scheme.TRADITIONAL: est.p_traditional,
                Scheme.FD_ONLY: est.p_fd,
                Scheme.HD_ONLY: est.p_hd,
            }
    except (ValidationError, ValueError, ArithmeticError, QuadratureError) as exc:
        logger.warning("[sweep] row %s (%s=%s) failed: %s", index, spec.variable.value, value, exc)
        return SweepRow(
            index=index,
            variable=spec.variable,
            value=value,
            results=[SchemeResult(scheme=s) for s in spec.schemes],
            n_samples=spec.mc_samples,
            seed=spec.seed,
            status=f"error: {type(exc).__name__}",
        )

    results = []
    for scheme in spec.schemes:
        mc = estimates.get(scheme)
        results.append(
            SchemeResult(
                scheme=scheme,
                p_analytic=values[scheme],
                p_mc=mc.p_hat if mc else None,
                stderr=mc.stderr if mc else None,
            )
        )
    return SweepRow(
        index=index,
        variable=spec.variable,
        value=value,
        results=results,
        n_samples=spec.mc_samples,
        seed=spec.seed,
        breakdown=breakdown,
    )


async def run_sweep_async(spec: SweepSpec) -> List[SweepRow]:
    values = grid_values(spec.start, spec.stop, spec.step)
    logger.info(
        "[sweep] %s: %s points, mc_samples=%s seed=%s",
        spec.variable.value,
        len(values),
        spec.mc_samples,
        spec.seed,
    )
    semaphore = asyncio.Semaphore(get_settings().max_concurrency)

    async def guarded(i: int, v: float) -> SweepRow:
        async with semaphore:
            return await _evaluate_row(spec, i, v)

    # gather returns rows in grid order regardless of completion order
    return list(await asyncio.gather(*(guarded(i, v) for i, v in enumerate(values))))


def run_sweep(spec: SweepSpec) -> List[SweepRow]:
    return asyncio.run(run_sweep_async(spec))


# Output


def table_rows(rows: Iterable[SweepRow]) -> List[TableRow]:
    out: List[TableRow] = []
    for row in rows:
        for res in row.results:
            out.append(
                TableRow(
                    sweep_variable=row.variable.value,
                    value=row.value,
                    scheme=res.scheme.value,
                    p_analytic=res.p_analytic,
                    p_mc=res.p_mc,
                    stderr=res.stderr,
                    n_samples=row.n_samples,
                    seed=row.seed,
                    status=row.status,
                )
            )
    return out


def breakdown_pairs(breakdown: OutageBreakdown, p_traditional: float) -> List[Tuple[str, float]]:
    """Flat (quantity, value) listing of one analytic evaluation."""
    pairs: List[Tuple[str, float]] = [
        ("p_fd", breakdown.p_fd),
        ("p_hd", breakdown.p_hd),
        ("p_sys", breakdown.p_sys),
        ("p_traditional", p_traditional),
    ]
    for tag in EventTag:
        terms = breakdown.cond_hd[tag]
        pairs += [
            (f"pr_event_{tag.value}", breakdown.pr_event[tag]),
            (f"cond_sr_{tag.value}", terms.p_sr),
            (f"cond_rd_{tag.value}", terms.p_rd),
            (f"cond_joint_{tag.value}", terms.p_joint),
            (f"cond_hd_{tag.value}", terms.p_total),
        ]
    pairs += list(breakdown.thresholds.model_dump().items())
    return pairs


def degenerate_label(breakdown: OutageBreakdown) -> str:
    """Events whose conditioning set had no numerical mass, e.g. "A,C", or "none"."""
    return ",".join(tag.value for tag in breakdown.degenerate_events) or "none"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render_table(
    columns: List[str], rows: Iterable[Iterable], metadata: Optional[Dict[str, object]] = None
) -> str:
    """CSV with ``#`` metadata lines; floats carry 17 significant digits."""
    buf = io.StringIO()
    meta: Dict[str, object] = {"generator": GENERATOR_NAME, "power_reference": POWER_REFERENCE}
    meta.update(metadata or {})
    for key, value in meta.items():
        buf.write(f"# {key}={_fmt(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_csv(records: List[TableRow], metadata: Optional[Dict[str, object]] = None) -> str:
    rows = []
    for rec in records:
        data = rec.model_dump()
        rows.append([data[col] for col in TABLE_COLUMNS])
    return render_table(TABLE_COLUMNS, rows, metadata)


_TABLE_ADAPTER = TypeAdapter(List[TableRow])


def render_json(records: List[TableRow]) -> str:
    return _TABLE_ADAPTER.dump_json(records, indent=2).decode("utf-8") + "\n"
