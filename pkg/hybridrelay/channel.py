"""Rayleigh link model: exponential squared gains, their sums, and seeded sampling.

Every squared gain |h_ij|^2 is exponential with mean Omega_ij (rate
lambda_ij = 1 / Omega_ij). MRC/MRT adds two independent gains, so the
two-gain sum is hypoexponential, or Erlang-2 when the rates coincide.
"""

from __future__ import annotations

import logging
import math
from typing import List, NamedTuple

import numpy as np

from .models import ChannelParams, GainSample

logger = logging.getLogger(__name__)

# Relative rate gap below which the equal-rate limit is used.
EQUAL_RATE_REL_TOL = 1e-6

GENERATOR_NAME = "PCG64"


class DomainError(ValueError):
    """Raised when a distribution function is called outside its domain."""


class GainBlock(NamedTuple):
    """Column arrays of squared gains, one entry per realization."""

    g11: np.ndarray
    g12: np.ndarray
    g21: np.ndarray
    g22: np.ndarray


def _check_rate(lam: float, name: str = "lambda") -> None:
    if not (lam > 0) or math.isinf(lam):
        raise DomainError(f"{name} must be positive and finite, got {lam!r}")


def _check_gain(x: float) -> None:
    if not (x >= 0):
        raise DomainError(f"gain must be non-negative, got {x!r}")


def gain_pdf(lam: float, x: float) -> float:
    """Exponential density lambda * exp(-lambda * x)."""
    _check_rate(lam)
    _check_gain(x)
    return lam * math.exp(-lam * x)


def gain_cdf(lam: float, x: float) -> float:
    """Exponential CDF 1 - exp(-lambda * x); ``x`` may be +inf."""
    _check_rate(lam)
    _check_gain(x)
    return -math.expm1(-lam * x)


def rates_nearly_equal(lam_a: float, lam_b: float) -> bool:
    return abs(lam_a - lam_b) <= EQUAL_RATE_REL_TOL * max(lam_a, lam_b)


def _sum_cdf(lam_a: float, lam_b: float, x: float) -> float:
    if math.isinf(x):
        return 1.0
    # Sorted so that the result is exactly symmetric in the two rates.
    a, b = sorted((lam_a, lam_b))
    if rates_nearly_equal(a, b):
        lam = 0.5 * (a + b)
        return -math.expm1(-lam * x) - lam * x * math.exp(-lam * x)
    # 1 - [b e^{-ax} - a e^{-bx}] / (b - a), rearranged to avoid cancellation
    d = b - a
    value = -math.expm1(-a * x) - a * math.exp(-a * x) * (-math.expm1(-d * x)) / d
    return min(1.0, max(0.0, value))


def sum_gain_cdf(lam_a: float, lam_b: float, x: float) -> float:
    """CDF of the sum of two independent exponential gains."""
    _check_rate(lam_a, "lambda_a")
    _check_rate(lam_b, "lambda_b")
    _check_gain(x)
    return _sum_cdf(lam_a, lam_b, x)


def sum_gain_pdf(lam_a: float, lam_b: float, x: float) -> float:
    """Density of the sum of two independent exponential gains."""
    _check_rate(lam_a, "lambda_a")
    _check_rate(lam_b, "lambda_b")
    _check_gain(x)
    a, b = sorted((lam_a, lam_b))
    if rates_nearly_equal(a, b):
        lam = 0.5 * (a + b)
        return lam * lam * x * math.exp(-lam * x)
    d = b - a
    return a * b * math.exp(-a * x) * (-math.expm1(-d * x)) / d


def spawn_streams(seed: int, count: int) -> List[np.random.Generator]:
    """Independent generators split from one root seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.PCG64(child)) for child in children]


def sample_gains(params: ChannelParams, rng: np.random.Generator) -> GainSample:
    """Draw one realization by inverse-CDF of four uniforms."""
    u = rng.random(4)
    g = -np.asarray(params.omegas()) * np.log1p(-u)
    return GainSample(g11=float(g[0]), g12=float(g[1]), g21=float(g[2]), g22=float(g[3]))


def sample_gain_block(
    params: ChannelParams, rng: np.random.Generator, size: int
) -> GainBlock:
    """Draw ``size`` realizations; row i matches the i-th ``sample_gains`` call."""
    u = rng.random((size, 4))
    g = -np.asarray(params.omegas())[None, :] * np.log1p(-u)
    return GainBlock(g[:, 0], g[:, 1], g[:, 2], g[:, 3])
