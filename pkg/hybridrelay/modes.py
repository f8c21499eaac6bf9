"""Per-realization physics of the relay: thresholds, SINRs, capacities, mode choice.

FD mode: Ant-1 receives from S while Ant-2 forwards to D, so the relay hop
suffers residual self-interference of variance k_r * p_r. HD mode: both
antennas receive (MRC) in the first sub-slot and both transmit (MRT) in the
second, which costs the 1/2 pre-factor but sums the two gains per hop.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Tuple, Union

import numpy as np

from .channel import GainBlock
from .models import GainSample, Mode, ModeDecision, SystemConfig, Thresholds

Gains = Union[GainSample, GainBlock]

_LN2 = math.log(2.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(value: float) -> float:
    return 10.0 * math.log10(value)


def compute_thresholds(config: SystemConfig) -> Thresholds:
    """SINR thresholds t1 (FD), t2 (HD) and their gain-domain counterparts."""
    # 2^R0 - 1 and 4^R0 - 1 via expm1 so that small R0 keeps its digits
    t1 = math.expm1(config.r0 * _LN2)
    t2 = math.expm1(2.0 * config.r0 * _LN2)
    return Thresholds(
        t1=t1,
        t2=t2,
        m1=t1 * (config.k_r * config.p_r + config.sigma2) / config.p_s,
        m2=t2 * config.sigma2 / config.p_s,
        m2p=t2 * config.sigma2 / config.p_r,
        m3=t1 * config.sigma2 / config.p_r,
    )


def fd_sinr(sample: Gains, config: SystemConfig) -> Tuple:
    """(gamma_f_r, gamma_f_d) for the FD mode."""
    gamma_fr = sample.g11 * config.p_s / (config.k_r * config.p_r + config.sigma2)
    gamma_fd = sample.g22 * config.p_r / config.sigma2
    return gamma_fr, gamma_fd


def hd_sinr(sample: Gains, config: SystemConfig) -> Tuple:
    """(gamma_h_r, gamma_h_d) for the HD mode with MRC at the relay and MRT to D."""
    gamma_hr = (sample.g11 + sample.g12) * config.p_s / config.sigma2
    gamma_hd = (sample.g21 + sample.g22) * config.p_r / config.sigma2
    return gamma_hr, gamma_hd


def capacities(sample: GainSample, config: SystemConfig) -> ModeDecision:
    gamma_fr, gamma_fd = fd_sinr(sample, config)
    gamma_hr, gamma_hd = hd_sinr(sample, config)
    c_fd = math.log2(1.0 + min(gamma_fr, gamma_fd))
    c_hd = 0.5 * math.log2(1.0 + min(gamma_hr, gamma_hd))
    return ModeDecision(
        c_fd=c_fd,
        c_hd=c_hd,
        # ties go to FD
        selected=Mode.FD if c_fd >= c_hd else Mode.HD,
        outage=max(c_fd, c_hd) < config.r0,
    )


class HopCapacities(NamedTuple):
    """Per-hop capacities of one gain block (bits/s/Hz)."""

    fd_sr: np.ndarray
    fd_rd: np.ndarray
    hd_sr: np.ndarray
    hd_rd: np.ndarray
    # single-antenna HD baseline (no MRC/MRT)
    trad_sr: np.ndarray
    trad_rd: np.ndarray


def capacity_block(block: GainBlock, config: SystemConfig) -> HopCapacities:
    gamma_fr, gamma_fd = fd_sinr(block, config)
    gamma_hr, gamma_hd = hd_sinr(block, config)
    return HopCapacities(
        fd_sr=np.log2(1.0 + gamma_fr),
        fd_rd=np.log2(1.0 + gamma_fd),
        hd_sr=0.5 * np.log2(1.0 + gamma_hr),
        hd_rd=0.5 * np.log2(1.0 + gamma_hd),
        trad_sr=0.5 * np.log2(1.0 + block.g11 * config.p_s / config.sigma2),
        trad_rd=0.5 * np.log2(1.0 + block.g22 * config.p_r / config.sigma2),
    )
