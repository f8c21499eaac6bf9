"""Closed-form outage probabilities of the hybrid HD/FD relay.

The FD mode fails through one of three disjoint events over the two
independent FD hops (A: sr only, B: rd only, C: both). System outage is the
intersection of FD and HD outage, so by total probability

    P_sys = sum_e Pr{e} * Pr{HD outage | e}.

Each event is a product set in (g11, g22), hence the HD sr hop (g11 + g12)
and the HD rd hop (g21 + g22) stay conditionally independent and the HD term
is p_sr + p_rd - p_sr * p_rd. Every per-hop conditional has the form

    Pr{X + Y < m | lo <= X < hi},  X ~ Exp(a), Y ~ Exp(b)

which ``_conditional_sum_cdf`` evaluates in closed form.
"""

from __future__ import annotations

import logging
import math
from typing import Dict, Tuple

from .channel import EQUAL_RATE_REL_TOL, sum_gain_cdf
from .models import EventTag, Hop, HopTerms, OutageBreakdown, SystemConfig, Thresholds
from .modes import compute_thresholds

logger = logging.getLogger(__name__)

# Conditioning mass at or below this is treated as empty.
DEGENERATE_MASS = 1e-300


def clamp_probability(p: float) -> float:
    return min(1.0, max(0.0, p))


def union_probability(p: float, q: float) -> float:
    """Pr{U or V} for independent U, V with probabilities p and q."""
    return clamp_probability(p + q - p * q)


def _tail_mass(rate: float, width: float) -> float:
    """Pr{X < width} for X ~ Exp(rate), width may be +inf."""
    return -math.expm1(-rate * width)


def _window_integral(a: float, b: float, m: float, w: float) -> float:
    """Integral of exp(-a*s - b*(m - s)) over s in [0, w], with 0 <= w <= m."""
    d = b - a
    if abs(d) <= EQUAL_RATE_REL_TOL * max(a, b):
        # series of expm1(d*w)/d around the equal-rate limit
        dw = d * w
        return math.exp(-b * m) * w * (1.0 + dw / 2.0 + dw * dw / 6.0)
    if d > 0:
        return math.exp(-b * (m - w) - a * w) * (-math.expm1(-d * w)) / d
    return math.exp(-b * m) * math.expm1(d * w) / d


def _conditional_sum_cdf(
    a: float, b: float, m: float, lo: float, hi: float
) -> Tuple[float, bool]:
    """Pr{X + Y < m | lo <= X < hi} for X ~ Exp(a), Y ~ Exp(b).

    Returns (probability, degenerate). Both numerator and conditioning mass
    are scaled by exp(a*lo), so a far-out ``lo`` does not underflow.
    """
    mass = _tail_mass(a, hi - lo)
    if not (mass > DEGENERATE_MASS):
        return sum_gain_cdf(a, b, m), True
    w = min(hi, m) - lo
    if w <= 0:
        return 0.0, False
    shifted_m = m - lo
    numerator = _tail_mass(a, w) - a * _window_integral(a, b, shifted_m, w)
    return clamp_probability(numerator / mass), False


def hop_window(tag: EventTag, hop: Hop, th: Thresholds) -> Tuple[float, float]:
    """Range of the FD-hop gain (g11 for sr, g22 for rd) implied by the event."""
    if hop is Hop.SR:
        # sr hop fails in A and C: g11 < m1
        return (0.0, th.m1) if tag in (EventTag.A, EventTag.C) else (th.m1, math.inf)
    # rd hop fails in B and C: g22 < m3
    return (0.0, th.m3) if tag in (EventTag.B, EventTag.C) else (th.m3, math.inf)


def conditional_hop_outage(
    tag: EventTag, hop: Hop, config: SystemConfig
) -> Tuple[float, bool]:
    """HD outage of one hop given the FD failure event ``tag``."""
    th = compute_thresholds(config)
    ch = config.channel
    lo, hi = hop_window(tag, hop, th)
    if hop is Hop.SR:
        return _conditional_sum_cdf(ch.lambda_11, ch.lambda_12, th.m2, lo, hi)
    return _conditional_sum_cdf(ch.lambda_22, ch.lambda_21, th.m2p, lo, hi)


def fd_outage(config: SystemConfig) -> float:
    th = compute_thresholds(config)
    ch = config.channel
    return -math.expm1(-(ch.lambda_11 * th.m1 + ch.lambda_22 * th.m3))


def hd_outage(config: SystemConfig) -> float:
    th = compute_thresholds(config)
    ch = config.channel
    p_sr = sum_gain_cdf(ch.lambda_11, ch.lambda_12, th.m2)
    p_rd = sum_gain_cdf(ch.lambda_21, ch.lambda_22, th.m2p)
    return union_probability(p_sr, p_rd)


def event_probability(tag: EventTag, config: SystemConfig) -> float:
    th = compute_thresholds(config)
    ch = config.channel
    q_sr = _tail_mass(ch.lambda_11, th.m1)
    q_rd = _tail_mass(ch.lambda_22, th.m3)
    if tag is EventTag.A:
        return q_sr * math.exp(-ch.lambda_22 * th.m3)
    if tag is EventTag.B:
        return math.exp(-ch.lambda_11 * th.m1) * q_rd
    return q_sr * q_rd


def conditional_hd_outage(tag: EventTag, config: SystemConfig) -> HopTerms:
    p_sr, deg_sr = conditional_hop_outage(tag, Hop.SR, config)
    p_rd, deg_rd = conditional_hop_outage(tag, Hop.RD, config)
    return HopTerms(
        p_sr=p_sr,
        p_rd=p_rd,
        p_joint=p_sr * p_rd,
        p_total=union_probability(p_sr, p_rd),
        degenerate=deg_sr or deg_rd,
    )


def system_outage(config: SystemConfig) -> OutageBreakdown:
    pr_event: Dict[EventTag, float] = {}
    cond_hd: Dict[EventTag, HopTerms] = {}
    degenerate = []
    for tag in EventTag:
        pr_event[tag] = event_probability(tag, config)
        cond_hd[tag] = conditional_hd_outage(tag, config)
        if cond_hd[tag].degenerate:
            degenerate.append(tag)
    if degenerate:
        logger.debug("degenerate conditioning for events %s", degenerate)
    p_fd = fd_outage(config)
    p_hd = hd_outage(config)
    p_sys = sum(pr_event[tag] * cond_hd[tag].p_total for tag in EventTag)
    return OutageBreakdown(
        p_fd=p_fd,
        p_hd=p_hd,
        p_sys=clamp_probability(p_sys),
        pr_event=pr_event,
        cond_hd=cond_hd,
        thresholds=compute_thresholds(config),
        degenerate_events=degenerate,
    )
