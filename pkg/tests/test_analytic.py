"""Closed-form outage checks on hand-derivable configurations."""

import math

import pytest

from hybridrelay import analytic
from hybridrelay.channel import sum_gain_cdf
from hybridrelay.graph import random_configs
from hybridrelay.models import ChannelParams, EventTag, Hop, SystemConfig

E1 = math.exp(-1.0)
COND_SR_A = 1 - math.exp(-3.0) / (1 - E1)  # 0.9212381
COND_RD_A = 1 - 3 * math.exp(-2.0)  # 0.5939942


class TestModeOutage:
    def test_fd_baseline(self, baseline_config):
        assert analytic.fd_outage(baseline_config) == pytest.approx(1 - math.exp(-2.0), rel=1e-14)
        assert analytic.fd_outage(baseline_config) == pytest.approx(0.8646647, abs=1e-7)

    def test_hd_baseline(self, baseline_config):
        assert analytic.hd_outage(baseline_config) == pytest.approx(
            1 - 16 * math.exp(-6.0), rel=1e-13
        )
        assert analytic.hd_outage(baseline_config) == pytest.approx(0.9603400, abs=1e-7)

    def test_vanishing_rate(self, baseline_config):
        cfg = baseline_config.evolve(r0=1e-9)
        assert analytic.fd_outage(cfg) < 1e-8
        assert analytic.hd_outage(cfg) < 1e-8

    def test_strong_interference_breaks_fd(self, baseline_config):
        assert analytic.fd_outage(baseline_config.evolve(k_r=1e6)) == pytest.approx(1.0, abs=1e-12)

    def test_hd_independent_of_interference(self, skewed_config):
        values = {analytic.hd_outage(skewed_config.evolve(k_r=k)) for k in (0.0, 0.5, 10.0)}
        assert len(values) == 1


class TestEvents:
    def test_event_a(self, baseline_config):
        assert analytic.event_probability(EventTag.A, baseline_config) == pytest.approx(
            (1 - E1) * E1, rel=1e-14
        )
        assert (1 - E1) * E1 == pytest.approx(0.2325442, abs=1e-7)

    def test_event_c(self, baseline_config):
        assert analytic.event_probability(EventTag.C, baseline_config) == pytest.approx(
            (1 - E1) ** 2, rel=1e-14
        )

    def test_partition_identity(self, baseline_config, skewed_config):
        for cfg in (baseline_config, skewed_config):
            total = sum(analytic.event_probability(tag, cfg) for tag in EventTag)
            assert total == pytest.approx(analytic.fd_outage(cfg), abs=1e-15)

    def test_strong_source_removes_source_hop_events(self, baseline_config):
        cfg = baseline_config.evolve(p_s=1e12)
        assert analytic.event_probability(EventTag.A, cfg) < 1e-11
        assert analytic.event_probability(EventTag.C, cfg) < 1e-11


class TestConditionalOutage:
    def test_event_a(self, baseline_config):
        terms = analytic.conditional_hd_outage(EventTag.A, baseline_config)
        assert terms.p_sr == pytest.approx(COND_SR_A, rel=1e-13)
        assert terms.p_rd == pytest.approx(COND_RD_A, rel=1e-13)
        assert terms.p_total == pytest.approx(COND_SR_A + COND_RD_A - COND_SR_A * COND_RD_A)
        assert terms.p_total == pytest.approx(0.9680222, abs=1e-7)
        assert terms.p_joint == pytest.approx(COND_SR_A * COND_RD_A, rel=1e-13)

    def test_event_b_mirrors_a(self, baseline_config):
        terms = analytic.conditional_hd_outage(EventTag.B, baseline_config)
        assert terms.p_sr == pytest.approx(COND_RD_A, rel=1e-13)
        assert terms.p_rd == pytest.approx(COND_SR_A, rel=1e-13)

    def test_event_c(self, baseline_config):
        terms = analytic.conditional_hd_outage(EventTag.C, baseline_config)
        assert terms.p_sr == pytest.approx(COND_SR_A, rel=1e-13)
        assert terms.p_rd == pytest.approx(COND_SR_A, rel=1e-13)
        assert terms.p_total == pytest.approx(0.9937966, abs=1e-7)

    def test_disjoint_window_gives_zero(self):
        # m1 = 11 >= m2 = 3: given B the source gain alone already clears the HD threshold
        cfg = SystemConfig(p_s=1.0, p_r=1.0, k_r=10.0, r0=1.0)
        p_sr, degenerate = analytic.conditional_hop_outage(EventTag.B, Hop.SR, cfg)
        assert p_sr == 0.0
        assert degenerate is False

    def test_far_window_does_not_underflow(self):
        # exp(-lambda * m1) underflows, the shifted form still has full mass
        cfg = SystemConfig(p_s=1e-3, p_r=1.0, k_r=10.0, r0=6.0)
        p_sr, degenerate = analytic.conditional_hop_outage(EventTag.B, Hop.SR, cfg)
        assert degenerate is False
        assert 0.0 <= p_sr <= 1.0

    def test_empty_conditioning_falls_back_to_unconditional(self):
        cfg = SystemConfig(p_s=1e300, p_r=1.0, r0=1e-5)
        p_sr, degenerate = analytic.conditional_hop_outage(EventTag.A, Hop.SR, cfg)
        assert degenerate is True
        m2 = math.expm1(2e-5 * math.log(2.0)) / 1e300
        assert p_sr == sum_gain_cdf(1.0, 1.0, m2)
        breakdown = analytic.system_outage(cfg)
        assert breakdown.degenerate_events == [EventTag.A, EventTag.C]

    def test_continuity_at_equal_means(self, baseline_config):
        ref = analytic.conditional_hd_outage(EventTag.A, baseline_config)
        for omega in (1 + 1e-7, 1 - 1e-7):
            cfg = baseline_config.evolve(channel=ChannelParams(omega_12=omega, omega_21=omega))
            moved = analytic.conditional_hd_outage(EventTag.A, cfg)
            assert moved.p_sr == pytest.approx(ref.p_sr, abs=1e-6)
            assert moved.p_rd == pytest.approx(ref.p_rd, abs=1e-6)

    def test_window_integral_branches_agree(self):
        # equal-rate series on one side of the tolerance, exact form on the other
        near = analytic._conditional_sum_cdf(1.0, 1.0 + 0.5e-6, 2.5, 0.0, 1.2)[0]
        far = analytic._conditional_sum_cdf(1.0, 1.0 + 1.5e-6, 2.5, 0.0, 1.2)[0]
        assert near == pytest.approx(far, abs=1e-6)
        below = analytic._conditional_sum_cdf(1.0 + 1.5e-6, 1.0, 2.5, 0.4, 5.0)[0]
        above = analytic._conditional_sum_cdf(1.0 + 0.5e-6, 1.0, 2.5, 0.4, 5.0)[0]
        assert below == pytest.approx(above, abs=1e-6)

    def test_joint_term_completes_the_union(self, skewed_config):
        for tag in EventTag:
            terms = analytic.conditional_hd_outage(tag, skewed_config)
            assert terms.p_joint == terms.p_sr * terms.p_rd
            assert terms.p_total == pytest.approx(terms.p_sr + terms.p_rd - terms.p_joint, abs=1e-15)


class TestSystemOutage:
    def test_baseline(self, baseline_config):
        b = analytic.system_outage(baseline_config)
        pr_a = (1 - E1) * E1
        pr_c = (1 - E1) ** 2
        cond_a = COND_SR_A + COND_RD_A - COND_SR_A * COND_RD_A
        cond_c = 1 - (1 - COND_SR_A) ** 2
        assert b.p_sys == pytest.approx(2 * pr_a * cond_a + pr_c * cond_c, rel=1e-13)
        assert b.p_sys == pytest.approx(0.8473, abs=1e-4)

    def test_vanishing_rate(self, baseline_config):
        assert analytic.system_outage(baseline_config.evolve(r0=1e-9)).p_sys < 1e-12

    def test_hybrid_below_both_modes(self, baseline_config, skewed_config):
        for cfg in (baseline_config, skewed_config, skewed_config.evolve(k_r=5.0)):
            b = analytic.system_outage(cfg)
            assert b.p_sys <= min(b.p_fd, b.p_hd) + 1e-12

    def test_breakdown_carries_thresholds(self, skewed_config):
        b = analytic.system_outage(skewed_config)
        assert b.thresholds.m2p == pytest.approx(b.thresholds.t2 / 5.0)
        assert set(b.pr_event) == set(EventTag)
        assert b.degenerate_events == []


class TestHelpers:
    def test_union_probability(self):
        assert analytic.union_probability(0.5, 0.5) == 0.75
        assert analytic.union_probability(1.0, 0.3) == 1.0
        assert analytic.union_probability(0.0, 0.0) == 0.0

    def test_clamp(self):
        assert analytic.clamp_probability(1.0 + 1e-16) == 1.0
        assert analytic.clamp_probability(-1e-18) == 0.0


class TestInterferenceMonotonicity:
    K_R_GRID = [0.0, 1e-3, 0.01, 0.1, 1.0, 10.0, 100.0]

    def test_outage_nondecreasing_in_interference(self):
        for cfg in random_configs(seed=17, count=60):
            p_fd, p_sys = [], []
            for k_r in self.K_R_GRID:
                b = analytic.system_outage(cfg.evolve(k_r=k_r))
                p_fd.append(b.p_fd)
                p_sys.append(b.p_sys)
            assert all(y >= x - 1e-10 for x, y in zip(p_fd, p_fd[1:]))
            assert all(y >= x - 1e-10 for x, y in zip(p_sys, p_sys[1:]))

    def test_baseline_system_outage_grows_with_interference(self, baseline_config):
        low = analytic.system_outage(baseline_config).p_sys
        high = analytic.system_outage(baseline_config.evolve(k_r=2.0)).p_sys
        assert high > low
        assert high <= analytic.hd_outage(baseline_config) + 1e-12
