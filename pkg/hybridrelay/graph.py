"""LangGraph self-check pipeline: partition -> quadrature -> montecarlo -> dominance -> figure_claims -> continuity.

Each node appends one GateResult. The Monte Carlo gate is skipped when
``mc_samples`` is 0, which leaves a quadrature-only validation.
"""

from __future__ import annotations

import logging
import math
from typing import Any, Dict, List, Optional

import numpy as np
from langgraph.graph import END, StateGraph
from typing_extensions import TypedDict

from . import analytic, experiments, oracle
from .models import (
    ChannelParams,
    EventTag,
    GateResult,
    Hop,
    Scheme,
    SweepRow,
    SystemConfig,
    ValidationReport,
)
from .settings import get_settings

logger = logging.getLogger(__name__)

# slack for identities and orderings that hold exactly in real arithmetic
EXACT_SLACK = 1e-12
QUAD_TOL = 1e-8
MC_SIGMAS = 3.0
MC_EXCEEDANCE_SHARE = 0.05
CONTINUITY_STEP = 1e-7
CONTINUITY_TOL = 1e-6
MIN_IMPROVEMENT = 10.0
# upper end of the low-rate region for the improvement claim
LOW_R0 = 2.0


class ValidationState(TypedDict, total=False):
    # Input
    grid_size: int
    mc_samples: int
    seed: int

    # Working
    sweeps: Dict[int, List[SweepRow]]

    # Output
    gates: List[GateResult]


def random_configs(seed: int, count: int, stream: int = 0) -> List[SystemConfig]:
    """Randomized configurations; every fourth has all means equal, the next one pairwise equal."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, stream])))
    configs: List[SystemConfig] = []
    for i in range(count):
        omegas = 10.0 ** rng.uniform(-1.0, 1.0, 4)
        if i % 4 == 0:
            omegas[:] = omegas[0]
        elif i % 4 == 1:
            omegas[1] = omegas[0]
            omegas[2] = omegas[3]
        p_s_db, p_r_db = rng.uniform(-10.0, 40.0, 2)
        configs.append(
            SystemConfig(
                p_s=10.0 ** (p_s_db / 10.0),
                p_r=10.0 ** (p_r_db / 10.0),
                k_r=float(rng.uniform(0.0, 10.0)),
                r0=float(rng.uniform(0.25, 6.0)),
                channel=ChannelParams(
                    omega_11=float(omegas[0]),
                    omega_12=float(omegas[1]),
                    omega_21=float(omegas[2]),
                    omega_22=float(omegas[3]),
                ),
            )
        )
    return configs


def _gate(
    name: str, checked: int, failures: int, worst: Optional[float], detail: str, allowed: int = 0
) -> GateResult:
    passed = checked > 0 and failures <= allowed
    level = logging.INFO if passed else logging.WARNING
    logger.log(level, "[validate] %s: %s/%s failures (%s)", name, failures, checked, detail)
    return GateResult(
        name=name,
        passed=passed,
        checked=checked,
        failures=failures,
        worst=worst,
        detail=detail,
    )


def _append(state: ValidationState, gate: GateResult) -> ValidationState:
    state["gates"] = [*state.get("gates", []), gate]
    return state


# Gates


def node_partition(state: ValidationState) -> ValidationState:
    configs = random_configs(state["seed"], 5 * state["grid_size"], stream=1)
    worst = 0.0
    failures = 0
    for config in configs:
        total = sum(analytic.event_probability(tag, config) for tag in EventTag)
        err = abs(total - analytic.fd_outage(config))
        worst = max(worst, err)
        failures += err > EXACT_SLACK
    return _append(
        state,
        _gate("partition", len(configs), failures, worst, f"max |sum Pr(e) - p_fd| = {worst:.3g}"),
    )


def node_quadrature(state: ValidationState) -> ValidationState:
    configs = random_configs(state["seed"], state["grid_size"], stream=2)
    worst = 0.0
    failures = 0
    checked = 0
    notes: List[str] = []
    for idx, config in enumerate(configs):
        for tag in EventTag:
            for hop in Hop:
                checked += 1
                closed, _ = analytic.conditional_hop_outage(tag, hop, config)
                try:
                    numeric = oracle.quad_conditional(tag, hop, config)
                except oracle.QuadratureError as exc:
                    failures += 1
                    notes.append(f"config {idx} {tag.value}/{hop.value}: {exc}")
                    continue
                err = abs(closed - numeric)
                worst = max(worst, err)
                if err > QUAD_TOL:
                    failures += 1
                    if len(notes) < 5:
                        notes.append(f"config {idx} {tag.value}/{hop.value}: |diff|={err:.3g}")
    detail = f"max |closed - quad| = {worst:.3g}"
    if notes:
        detail += "; " + "; ".join(notes)
    return _append(state, _gate("quadrature", checked, failures, worst, detail))


def _mc_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, 3, index]).generate_state(1)[0])


def node_montecarlo(state: ValidationState) -> ValidationState:
    s = get_settings()
    n = state["mc_samples"]
    configs = random_configs(state["seed"], s.validate_mc_configs, stream=3)
    checked = 0
    failures = 0
    worst = 0.0

    def cell(p_an: float, p_hat: Optional[float], se_hat: Optional[float], count: int) -> None:
        nonlocal checked, failures, worst
        if p_hat is None:
            return
        # a zero-count estimate has zero stderr; fall back to the analytic binomial one
        se = max(se_hat or 0.0, math.sqrt(p_an * (1.0 - p_an) / count))
        z = abs(p_hat - p_an) / se if se > 0 else (0.0 if p_hat == p_an else math.inf)
        checked += 1
        worst = max(worst, z)
        failures += z > MC_SIGMAS

    for idx, config in enumerate(configs):
        est = oracle.mc_estimate(config, n, _mc_seed(state["seed"], idx))
        closed = analytic.system_outage(config)
        trad = experiments.traditional_breakdown(config)
        cell(closed.p_fd, est.p_fd.p_hat, est.p_fd.stderr, n)
        cell(closed.p_hd, est.p_hd.p_hat, est.p_hd.stderr, n)
        cell(closed.p_sys, est.p_sys.p_hat, est.p_sys.stderr, n)
        cell(trad.p_sys, est.p_traditional.p_hat, est.p_traditional.stderr, n)
        for tag in EventTag:
            cond = est.cond_hd[tag]
            if cond.status != "ok":
                continue
            terms = closed.cond_hd[tag]
            cell(terms.p_total, cond.p_hat, cond.stderr, cond.n)
            joint = est.cond_joint[tag]
            cell(terms.p_joint, joint.p_hat, joint.stderr, joint.n)
    allowed = int(MC_EXCEEDANCE_SHARE * checked)
    return _append(
        state,
        _gate(
            "montecarlo",
            checked,
            failures,
            worst,
            f"n={n}, {failures} of {checked} cells beyond {MC_SIGMAS:g} sigma, worst z = {worst:.3g}",
            allowed=allowed,
        ),
    )


def _route_after_quadrature(state: ValidationState) -> str:
    return "montecarlo" if state.get("mc_samples", 0) > 0 else "dominance"


def _column(rows: List[SweepRow], scheme: Scheme) -> List[Optional[float]]:
    out = []
    for row in rows:
        match = [r.p_analytic for r in row.results if r.scheme is scheme]
        out.append(match[0] if match else None)
    return out


def node_dominance(state: ValidationState) -> ValidationState:
    sweeps: Dict[int, List[SweepRow]] = {}
    for figure in (3, 4, 5, 6):
        spec = experiments.figure_setup(figure).model_copy(
            update={"schemes": list(Scheme)}
        )
        sweeps[figure] = experiments.run_sweep(spec)
    state["sweeps"] = sweeps

    configs = random_configs(state["seed"], state["grid_size"], stream=4)
    points = []
    for rows in sweeps.values():
        for row in rows:
            if row.status != "ok" or row.breakdown is None:
                points.append(None)
                continue
            p = {r.scheme: r.p_analytic for r in row.results}
            points.append(p)
    for config in configs:
        b = analytic.system_outage(config)
        points.append(
            {
                Scheme.PROPOSED: b.p_sys,
                Scheme.FD_ONLY: b.p_fd,
                Scheme.HD_ONLY: b.p_hd,
                Scheme.TRADITIONAL: experiments.traditional_outage(config),
            }
        )

    failures = 0
    worst = -math.inf
    for p in points:
        if p is None:
            failures += 1
            continue
        bound = min(p[Scheme.FD_ONLY], p[Scheme.HD_ONLY], p[Scheme.TRADITIONAL])
        excess = p[Scheme.PROPOSED] - bound
        worst = max(worst, excess)
        failures += excess > EXACT_SLACK
    return _append(
        state,
        _gate(
            "dominance",
            len(points),
            failures,
            worst,
            f"max p_sys - min(p_fd, p_hd, p_traditional) = {worst:.3g}",
        ),
    )


def _nondecreasing(values: List[float]) -> bool:
    return all(b >= a - EXACT_SLACK for a, b in zip(values, values[1:]))


def _nonincreasing(values: List[float]) -> bool:
    return all(b <= a + EXACT_SLACK for a, b in zip(values, values[1:]))


def figure_claims(sweeps: Dict[int, List[SweepRow]]) -> Dict[str, Any]:
    """Qualitative ordering claims on the figure presets; name -> (passed, note)."""
    claims: Dict[str, Any] = {}

    rows = sweeps[3]
    prop, trad = _column(rows, Scheme.PROPOSED), _column(rows, Scheme.TRADITIONAL)
    claims["pr_sweep_proposed_beats_traditional"] = (
        all(p <= t + EXACT_SLACK for p, t in zip(prop, trad)),
        f"{len(rows)} points",
    )

    rows = sweeps[4]
    prop, trad = _column(rows, Scheme.PROPOSED), _column(rows, Scheme.TRADITIONAL)
    ratios = [
        t / p for row, p, t in zip(rows, prop, trad) if row.value <= LOW_R0 and p > 0
    ]
    best = max(ratios) if ratios else 0.0
    claims["r0_sweep_low_rate_improvement"] = (
        best >= MIN_IMPROVEMENT,
        f"max traditional/proposed ratio {best:.4g}",
    )
    claims["r0_sweep_monotone"] = (
        _nondecreasing(prop) and _nondecreasing(trad),
        "outage nondecreasing in R0",
    )

    rows = sweeps[5]
    prop = _column(rows, Scheme.PROPOSED)
    fd, hd = _column(rows, Scheme.FD_ONLY), _column(rows, Scheme.HD_ONLY)
    fd_wins = [i for i, (f, h) in enumerate(zip(fd, hd)) if f < h]
    hd_wins = [i for i, (f, h) in enumerate(zip(fd, hd)) if h < f]
    crossover = hd_wins[0] if hd_wins else None
    claims["ps_sweep_crossover"] = (
        bool(fd_wins) and bool(hd_wins),
        f"HD-only first better at index {crossover}",
    )
    claims["ps_sweep_monotone"] = (
        _nonincreasing(prop) and _nonincreasing(fd) and _nonincreasing(hd),
        "outage nonincreasing in P_S",
    )

    rows = sweeps[6]
    prop = _column(rows, Scheme.PROPOSED)
    fd, hd = _column(rows, Scheme.FD_ONLY), _column(rows, Scheme.HD_ONLY)
    spread = max(hd) - min(hd)
    claims["rsi_sweep_hd_constant"] = (spread <= EXACT_SLACK, f"HD-only spread {spread:.3g}")
    claims["rsi_sweep_fd_nondecreasing"] = (_nondecreasing(fd), "FD-only vs RSI variance")
    claims["rsi_sweep_hybrid_below_modes"] = (
        all(p <= min(f, h) + EXACT_SLACK for p, f, h in zip(prop, fd, hd)),
        "proposed <= min(FD-only, HD-only)",
    )
    return claims


def node_figure_claims(state: ValidationState) -> ValidationState:
    sweeps = state["sweeps"]
    if any(row.status != "ok" for rows in sweeps.values() for row in rows):
        return _append(
            state,
            _gate("figure_claims", 1, 1, None, "figure presets produced failed rows"),
        )
    claims = figure_claims(sweeps)
    failed = [name for name, (ok, _) in claims.items() if not ok]
    detail = "; ".join(f"{name}: {note}" for name, (_, note) in claims.items())
    if failed:
        detail = "failed " + ", ".join(failed) + "; " + detail
    return _append(state, _gate("figure_claims", len(claims), len(failed), None, detail))


def _outputs(config: SystemConfig) -> List[float]:
    b = analytic.system_outage(config)
    values = [b.p_fd, b.p_hd, b.p_sys, experiments.traditional_outage(config)]
    for tag in EventTag:
        values += [b.pr_event[tag], b.cond_hd[tag].p_sr, b.cond_hd[tag].p_rd]
    return values


def node_continuity(state: ValidationState) -> ValidationState:
    # random_configs makes every fourth config fully equal-rate and the next pairwise equal
    configs = random_configs(state["seed"], state["grid_size"], stream=5)
    worst = 0.0
    failures = 0
    for config in configs:
        ref = _outputs(config)
        omegas = config.channel.model_dump()
        for key in omegas:
            for sign in (1.0, -1.0):
                nudged = dict(omegas, **{key: omegas[key] * (1.0 + sign * CONTINUITY_STEP)})
                moved = _outputs(config.evolve(channel=nudged))
                delta = max(abs(a - b) for a, b in zip(ref, moved))
                worst = max(worst, delta)
                failures += delta > CONTINUITY_TOL
    return _append(
        state,
        _gate(
            "continuity",
            len(configs) * 8,
            failures,
            worst,
            f"max output change under {CONTINUITY_STEP:g} relative mean perturbation = {worst:.3g}",
        ),
    )


def build_graph() -> StateGraph:
    g = StateGraph(ValidationState)
    g.add_node("partition", node_partition)
    g.add_node("quadrature", node_quadrature)
    g.add_node("montecarlo", node_montecarlo)
    g.add_node("dominance", node_dominance)
    g.add_node("figure_claims", node_figure_claims)
    g.add_node("continuity", node_continuity)

    g.set_entry_point("partition")
    g.add_edge("partition", "quadrature")
    g.add_conditional_edges(
        "quadrature",
        _route_after_quadrature,
        {"montecarlo": "montecarlo", "dominance": "dominance"},
    )
    g.add_edge("montecarlo", "dominance")
    g.add_edge("dominance", "figure_claims")
    g.add_edge("figure_claims", "continuity")
    g.add_edge("continuity", END)
    return g


def run_validation(
    grid_size: Optional[int] = None,
    mc_samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> ValidationReport:
    s = get_settings()
    state: ValidationState = {
        "grid_size": s.validate_grid_size if grid_size is None else grid_size,
        "mc_samples": s.validate_mc_samples if mc_samples is None else mc_samples,
        "seed": s.default_seed if seed is None else seed,
        "gates": [],
    }
    final = graph.invoke(state)
    gates = final.get("gates", [])
    return ValidationReport(
        passed=bool(gates) and all(g.passed for g in gates),
        seed=state["seed"],
        grid_size=state["grid_size"],
        mc_samples=state["mc_samples"],
        gates=gates,
    )


# Expose a compiled graph for `langgraph dev` (module path: hybridrelay.graph:graph)
graph = build_graph().compile()
