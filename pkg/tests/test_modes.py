import math

import numpy as np
import pytest
from pydantic import ValidationError

from hybridrelay.channel import sample_gain_block
from hybridrelay.models import ChannelParams, GainSample, Mode, SystemConfig
from hybridrelay.modes import (
    capacities,
    capacity_block,
    compute_thresholds,
    db_to_linear,
    fd_sinr,
    hd_sinr,
    linear_to_db,
)


def _cfg(**kw) -> SystemConfig:
    base = dict(p_s=1.0, p_r=1.0, sigma2=1.0, k_r=0.0, r0=1.0)
    base.update(kw)
    return SystemConfig(**base)


def _gains(g11=0.0, g12=0.0, g21=0.0, g22=0.0) -> GainSample:
    return GainSample(g11=g11, g12=g12, g21=g21, g22=g22)


class TestThresholds:
    def test_unit_case(self, baseline_config):
        th = compute_thresholds(baseline_config)
        assert (th.t1, th.t2, th.m1, th.m2, th.m2p, th.m3) == pytest.approx(
            (1.0, 3.0, 1.0, 3.0, 3.0, 1.0), rel=1e-14
        )

    def test_vanishing_rate(self):
        th = compute_thresholds(_cfg(r0=1e-7))
        assert max(th.model_dump().values()) < 1e-6
        assert th.t1 == pytest.approx(1e-7 * math.log(2.0), rel=1e-6)

    def test_published_setup(self):
        th = compute_thresholds(_cfg(p_s=1000.0, p_r=1000.0, k_r=0.001, r0=3.0))
        assert th.t1 == pytest.approx(7.0, rel=1e-14)
        assert th.t2 == pytest.approx(63.0, rel=1e-14)
        assert th.m1 == pytest.approx(0.014, rel=1e-12)
        assert th.m3 == pytest.approx(0.007, rel=1e-12)
        assert th.m2 == pytest.approx(0.063, rel=1e-12)
        assert th.m2p == pytest.approx(0.063, rel=1e-12)

    @pytest.mark.parametrize("r0", [1e-6, 0.25, 1.0, 3.0, 6.0])
    def test_hd_threshold_from_fd_threshold(self, r0):
        th = compute_thresholds(_cfg(r0=r0))
        assert th.t2 == pytest.approx(th.t1**2 + 2 * th.t1, rel=1e-12)

    def test_relay_hop_threshold_scales_with_relay_power(self):
        th = compute_thresholds(_cfg(p_s=2.0, p_r=8.0))
        assert th.m2 == pytest.approx(1.5)
        assert th.m2p == pytest.approx(0.375)


class TestSinr:
    def test_fd_unit(self):
        assert fd_sinr(_gains(g11=1.0, g22=1.0), _cfg()) == (1.0, 1.0)

    def test_fd_interference_doubles_denominator(self):
        gamma_fr, _ = fd_sinr(_gains(g11=1.0), _cfg(k_r=1.0))
        assert gamma_fr == 0.5

    def test_fd_general(self):
        cfg = _cfg(p_s=10.0, p_r=4.0, k_r=0.25)
        assert fd_sinr(_gains(g11=2.0, g22=0.5), cfg) == pytest.approx((10.0, 2.0))

    def test_hd_zero(self):
        assert hd_sinr(_gains(), _cfg()) == (0.0, 0.0)

    def test_hd_mrc_adds_gains(self):
        gamma_hr, _ = hd_sinr(_gains(g11=1.0, g12=1.0), _cfg())
        assert gamma_hr == 2.0

    def test_hd_general(self):
        cfg = _cfg(p_s=2.0, p_r=3.0)
        sample = _gains(g11=0.3, g12=0.7, g21=1.5, g22=0.5)
        assert hd_sinr(sample, cfg) == pytest.approx((2.0, 6.0))

    def test_hd_relay_sinr_from_fd_relay_sinr(self):
        rng = np.random.default_rng(21)
        cfg = _cfg(p_s=5.0, p_r=3.0, sigma2=0.7, k_r=0.4)
        for g11, g12, g21, g22 in rng.uniform(0.01, 5.0, size=(20, 4)):
            sample = _gains(g11, g12, g21, g22)
            gamma_fr, _ = fd_sinr(sample, cfg)
            gamma_hr, _ = hd_sinr(sample, cfg)
            lhs = gamma_hr * (cfg.k_r * cfg.p_r + cfg.sigma2)
            rhs = gamma_fr * cfg.sigma2 * (1.0 + g12 / g11)
            assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_hd_ignores_self_interference(self):
        sample = _gains(0.3, 0.7, 1.5, 0.5)
        assert hd_sinr(sample, _cfg(k_r=0.0)) == hd_sinr(sample, _cfg(k_r=50.0))


class TestCapacities:
    def test_tie_goes_to_fd_and_boundary_is_not_outage(self):
        # FD SINRs (1, 1) and HD SINRs (3, 3)
        decision = capacities(_gains(g11=1.0, g12=2.0, g21=2.0, g22=1.0), _cfg())
        assert decision.c_fd == 1.0
        assert decision.c_hd == 1.0
        assert decision.selected is Mode.FD
        assert decision.outage is False

    def test_zero_gains(self):
        decision = capacities(_gains(), _cfg(r0=0.01))
        assert decision.c_fd == 0.0
        assert decision.c_hd == 0.0
        assert decision.outage is True

    def test_fd_selected(self):
        decision = capacities(_gains(g11=7.0, g22=7.0), _cfg(r0=3.0))
        assert decision.c_fd == pytest.approx(3.0)
        assert decision.c_hd == pytest.approx(1.5)
        assert decision.selected is Mode.FD
        assert decision.outage is False

    def test_hd_selected_under_strong_interference(self):
        decision = capacities(_gains(1.0, 1.0, 1.0, 1.0), _cfg(k_r=100.0))
        assert decision.selected is Mode.HD

    def test_block_matches_scalar(self, skewed_config):
        block = sample_gain_block(skewed_config.channel, np.random.default_rng(3), 50)
        cap = capacity_block(block, skewed_config)
        for i in range(50):
            sample = GainSample(
                g11=block.g11[i], g12=block.g12[i], g21=block.g21[i], g22=block.g22[i]
            )
            decision = capacities(sample, skewed_config)
            assert min(cap.fd_sr[i], cap.fd_rd[i]) == pytest.approx(decision.c_fd, rel=1e-12)
            assert min(cap.hd_sr[i], cap.hd_rd[i]) == pytest.approx(decision.c_hd, rel=1e-12)

    def test_traditional_hd_never_beats_mrc(self, skewed_config):
        block = sample_gain_block(skewed_config.channel, np.random.default_rng(4), 1000)
        cap = capacity_block(block, skewed_config)
        assert np.all(cap.trad_sr <= cap.hd_sr)
        assert np.all(cap.trad_rd <= cap.hd_rd)


class TestUnits:
    @pytest.mark.parametrize("db", [-20.0, -3.0, 0.0, 13.7, 30.0, 40.0])
    def test_db_round_trip(self, db):
        assert linear_to_db(db_to_linear(db)) == pytest.approx(db, abs=1e-12)

    def test_thirty_db(self):
        assert db_to_linear(30.0) == pytest.approx(1000.0, rel=1e-14)


class TestConfig:
    def test_rsi_variance_builder(self):
        cfg = _cfg(p_r=1000.0).with_rsi_var(1.0)
        assert cfg.k_r == pytest.approx(0.001)
        assert cfg.rsi_var == pytest.approx(1.0)

    def test_evolve_revalidates(self):
        with pytest.raises(ValidationError):
            _cfg().evolve(p_s=-1.0)

    @pytest.mark.parametrize(
        "field, value", [("p_s", 0.0), ("p_r", -2.0), ("k_r", -0.1), ("r0", 0.0), ("p_s", math.nan)]
    )
    def test_rejects_bad_values(self, field, value):
        with pytest.raises(ValidationError):
            _cfg(**{field: value})

    def test_rejects_non_positive_mean(self):
        with pytest.raises(ValidationError):
            ChannelParams(omega_22=0.0)

    def test_frozen(self):
        cfg = _cfg()
        with pytest.raises(ValidationError):
            cfg.p_s = 2.0


class TestCapacityProperties:
    def _samples(self, seed, count=200):
        rng = np.random.default_rng(seed)
        return [_gains(*g) for g in rng.exponential(1.0, size=(count, 4))]

    def test_raising_a_gain_never_lowers_capacity(self, skewed_config):
        for sample in self._samples(5):
            ref = capacities(sample, skewed_config)
            for field in ("g11", "g12", "g21", "g22"):
                raised = sample.model_copy(update={field: getattr(sample, field) * 1.5 + 0.1})
                moved = capacities(raised, skewed_config)
                assert moved.c_fd >= ref.c_fd
                assert moved.c_hd >= ref.c_hd

    def test_outage_means_both_modes_fail(self, skewed_config):
        for cfg in (skewed_config, skewed_config.evolve(r0=0.3), skewed_config.evolve(k_r=20.0)):
            for sample in self._samples(6):
                decision = capacities(sample, cfg)
                assert decision.outage == (decision.c_fd < cfg.r0 and decision.c_hd < cfg.r0)
