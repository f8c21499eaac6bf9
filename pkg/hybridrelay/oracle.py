"""Verification engines independent of the closed forms in ``analytic``.

Monte Carlo: draws gain blocks chunk by chunk from streams split off one root
seed and evaluates the protocol in the capacity domain. Chunks are fixed-size,
so the estimate depends on (seed, n, chunk size) only, never on how many
workers ran them.

Quadrature: the inner variable of every conditional-outage double integral has
an exponential CDF, so only the outer truncated-exponential integral is left
for adaptive 1D quadrature.
"""

from __future__ import annotations

import asyncio
import logging
import math
import warnings
from typing import Dict, List, Optional

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from .analytic import DEGENERATE_MASS
from .channel import GENERATOR_NAME, gain_cdf, gain_pdf, sample_gain_block, spawn_streams
from .models import (
    Estimate,
    EventTag,
    Hop,
    McCounts,
    McEstimate,
    SystemConfig,
)
from .modes import capacity_block, compute_thresholds
from .settings import get_settings

logger = logging.getLogger(__name__)

INSUFFICIENT_SAMPLES = "insufficient conditioning samples"

# exp(-40) is far below the quadrature tolerance
TAIL_SPAN = 40.0


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature fails every subdivision budget."""


# Monte Carlo


def _simulate_chunk(
    config: SystemConfig, rng: np.random.Generator, size: int
) -> McCounts:
    block = sample_gain_block(config.channel, rng, size)
    cap = capacity_block(block, config)
    r0 = config.r0

    sr_fail = cap.fd_sr < r0
    rd_fail = cap.fd_rd < r0
    hd_sr_out = cap.hd_sr < r0
    hd_rd_out = cap.hd_rd < r0
    fd_out = sr_fail | rd_fail
    hd_out = hd_sr_out | hd_rd_out
    trad_hd_out = (cap.trad_sr < r0) | (cap.trad_rd < r0)

    c_fd = np.minimum(cap.fd_sr, cap.fd_rd)
    c_hd = np.minimum(cap.hd_sr, cap.hd_rd)
    selected_fd = int(np.count_nonzero(c_fd >= c_hd))

    events = {
        EventTag.A: sr_fail & ~rd_fail,
        EventTag.B: ~sr_fail & rd_fail,
        EventTag.C: sr_fail & rd_fail,
    }

    def per_event(mask: np.ndarray) -> Dict[EventTag, int]:
        return {tag: int(np.count_nonzero(ev & mask)) for tag, ev in events.items()}

    return McCounts(
        n=size,
        fd_out=int(np.count_nonzero(fd_out)),
        hd_out=int(np.count_nonzero(hd_out)),
        sys_out=int(np.count_nonzero(fd_out & hd_out)),
        trad_out=int(np.count_nonzero(fd_out & trad_hd_out)),
        selected_fd=selected_fd,
        selected_hd=size - selected_fd,
        no_event=int(np.count_nonzero(~fd_out)),
        event={tag: int(np.count_nonzero(ev)) for tag, ev in events.items()},
        event_sr_out=per_event(hd_sr_out),
        event_rd_out=per_event(hd_rd_out),
        event_joint_out=per_event(hd_sr_out & hd_rd_out),
        event_hd_out=per_event(hd_out),
        event_trad_hd_out=per_event(trad_hd_out),
    )


def _ratio(hits: int, total: int, min_total: int = 1) -> Estimate:
    if total < min_total:
        return Estimate(n=total, status=INSUFFICIENT_SAMPLES)
    p = hits / total
    return Estimate(p_hat=p, stderr=math.sqrt(p * (1.0 - p) / total), n=total)


def _summarize(
    counts: McCounts, seed: int, chunk_size: int, min_conditioning: int
) -> McEstimate:
    n = counts.n

    def conditional(hits: Dict[EventTag, int]) -> Dict[EventTag, Estimate]:
        return {
            tag: _ratio(hits[tag], counts.event[tag], min_conditioning)
            for tag in EventTag
        }

    return McEstimate(
        seed=seed,
        n=n,
        generator=GENERATOR_NAME,
        chunk_size=chunk_size,
        p_fd=_ratio(counts.fd_out, n),
        p_hd=_ratio(counts.hd_out, n),
        p_sys=_ratio(counts.sys_out, n),
        p_traditional=_ratio(counts.trad_out, n),
        pr_event={tag: _ratio(counts.event[tag], n) for tag in EventTag},
        cond_hd=conditional(counts.event_hd_out),
        cond_sr=conditional(counts.event_sr_out),
        cond_rd=conditional(counts.event_rd_out),
        cond_joint=conditional(counts.event_joint_out),
        counts=counts,
    )


async def mc_estimate_async(
    config: SystemConfig,
    n: int,
    seed: Optional[int] = None,
    max_workers: Optional[int] = None,
) -> McEstimate:
    """Monte Carlo outage estimates from ``n`` realizations."""
    if n < 1:
        raise ValueError("n must be at least 1")
    s = get_settings()
    seed = s.default_seed if seed is None else seed
    chunk_size = s.mc_chunk_size
    n_chunks = -(-n // chunk_size)
    sizes = [chunk_size] * (n_chunks - 1) + [n - chunk_size * (n_chunks - 1)]
    # one generator per chunk, each used by a single worker
    streams = spawn_streams(seed, n_chunks)

    semaphore = asyncio.Semaphore(max_workers or s.max_concurrency)

    async def guarded(i: int) -> McCounts:
        async with semaphore:
            counts = await asyncio.to_thread(
                _simulate_chunk, config, streams[i], sizes[i]
            )
            logger.debug("[mc] chunk %s/%s done", i + 1, n_chunks)
            return counts

    # gather keeps chunk order, and integer counts add exactly
    parts = await asyncio.gather(*(guarded(i) for i in range(n_chunks)))
    total = McCounts()
    for part in parts:
        total = total.merged(part)
    logger.info("[mc] n=%s seed=%s chunks=%s sys_out=%s", n, seed, n_chunks, total.sys_out)
    return _summarize(total, seed, chunk_size, s.min_conditioning_samples)


def mc_estimate(
    config: SystemConfig,
    n: int,
    seed: Optional[int] = None,
    max_workers: Optional[int] = None,
) -> McEstimate:
    return asyncio.run(mc_estimate_async(config, n, seed, max_workers))


# Quadrature


def _quad_once(
    func, lo: float, hi: float, points: List[float], limit: int, epsabs: float
) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("error", IntegrationWarning)
        try:
            value, _abserr = quad(
                func,
                lo,
                hi,
                points=points or None,
                epsabs=epsabs,
                epsrel=1e-12,
                limit=limit,
            )
        except IntegrationWarning as exc:
            raise QuadratureError(
                f"quadrature did not converge with limit={limit}: {exc}"
            ) from exc
    return value


def integrate(
    func, lo: float, hi: float, points: Optional[List[float]] = None
) -> float:
    """Adaptive quadrature with escalating subdivision budgets."""
    s = get_settings()
    limits = s.quad_limits
    for attempt in Retrying(
        stop=stop_after_attempt(len(limits)),
        retry=retry_if_exception_type(QuadratureError),
        reraise=True,
    ):
        with attempt:
            limit = limits[attempt.retry_state.attempt_number - 1]
            return _quad_once(func, lo, hi, points or [], limit, s.quad_epsabs)
    raise QuadratureError("no quadrature attempt was made")


def _hop_setup(tag: EventTag, hop: Hop, config: SystemConfig):
    """(conditioned rate, other rate, outage threshold, lo, hi) for one hop."""
    th = compute_thresholds(config)
    ch = config.channel
    if hop is Hop.SR:
        failing = tag in (EventTag.A, EventTag.C)
        lo, hi = (0.0, th.m1) if failing else (th.m1, math.inf)
        return ch.lambda_11, ch.lambda_12, th.m2, lo, hi
    failing = tag in (EventTag.B, EventTag.C)
    lo, hi = (0.0, th.m3) if failing else (th.m3, math.inf)
    return ch.lambda_22, ch.lambda_21, th.m2p, lo, hi


def _breakpoints(a: float, b: float, m: float, lo: float, end: float) -> List[float]:
    # where the truncated density decays and where the partner CDF drops
    candidates = (lo + 1.0 / a, lo + 5.0 / a, m - 1.0 / b, m - 5.0 / b)
    return sorted({p for p in candidates if lo < p < end})


def quad_conditional(tag: EventTag, hop: Hop, config: SystemConfig) -> float:
    """HD outage of ``hop`` given FD event ``tag`` by numerical integration.

    Integrates the truncated density of the conditioned gain against the
    exponential CDF of the partner gain evaluated at the remaining margin.
    """
    a, b, m, lo, hi = _hop_setup(tag, hop, config)
    mass = gain_cdf(a, hi - lo)
    if not (mass > DEGENERATE_MASS):
        # empty conditioning set: unconditional hop outage
        lo, mass = 0.0, 1.0
        upper = m
    else:
        upper = min(hi, m)
    if upper <= lo:
        return 0.0
    # density mass beyond this point is below exp(-TAIL_SPAN)
    end = min(upper, lo + TAIL_SPAN / a)

    def integrand(x: float) -> float:
        return gain_pdf(a, max(x - lo, 0.0)) / mass * gain_cdf(b, max(m - x, 0.0))

    value = integrate(integrand, lo, end, _breakpoints(a, b, m, lo, end))
    return min(1.0, max(0.0, value))
