import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riscalc.channel import GlobalConfig, RisLinkConfig
from riscalc.errors import SeriesConvergenceError, ValidationError
from riscalc.metrics import (
    BPSK,
    QPSK,
    ModulationScheme,
    asep_from_cdf,
    asep_quadrature,
    asep_series,
    asymptotic_outage,
    asymptotic_summary,
    finite_snr_slope,
    log_asymptotic_outage,
    log_ub_outage,
    outage_probability,
    ub_outage,
)
from riscalc.snr_stats import Scenario, SeriesTruncation

from conftest import db
from test_snr_stats import ORACLE, random_scenario

# BPSK, K=3, N=5 Rayleigh: 40-digit mpmath quadrature of the product CDF
ASEP_100DB = 2.00417657319886e-7
ASEP_105DB = 2.97222641478141569e-11


def iid_scenario(seed):
    rng = np.random.default_rng(seed)
    link = RisLinkConfig(
        int(rng.integers(1, 40)),
        m1=float(rng.uniform(0.5, 5)),
        m2=float(rng.uniform(0.5, 5)),
        omega1=float(rng.uniform(0.3, 3)),
        omega2=float(rng.uniform(0.3, 3)),
        d1_m=float(rng.uniform(1, 15)),
        d2_m=float(rng.uniform(1, 15)),
    )
    return Scenario(GlobalConfig(), [link] * int(rng.integers(1, 5)))


class TestModulation:
    def test_presets(self):
        assert (BPSK.p, BPSK.q) == (1.0, 1.0)
        assert (QPSK.p, QPSK.q) == (1.0, 0.5)

    def test_validation(self):
        with pytest.raises(ValidationError):
            ModulationScheme(0.0, 1.0)
        with pytest.raises(ValidationError):
            ModulationScheme(1.0, -1.0)


class TestOutage:
    def test_exact_oracle(self, iid3):
        assert outage_probability(iid3, db(100)) == pytest.approx(ORACLE[100][2], rel=1e-10)

    def test_asymptotic_closed_form(self, iid3):
        x, _, _ = ORACLE[120]
        a = iid3.fits[0].a
        expect = (x**a / math.gamma(a + 1)) ** 3
        assert asymptotic_outage(iid3, db(120)) == pytest.approx(expect, rel=1e-11)

    def test_asymptote_approaches_exact(self, iid3):
        ratios = [asymptotic_outage(iid3, db(s)) / outage_probability(iid3, db(s)) for s in (120, 140, 160)]
        assert ratios[0] > ratios[1] > ratios[2] > 1.0
        assert ratios[2] == pytest.approx(1.0, rel=0.02)

    def test_ub_closed_form(self, iid3):
        x, _, _ = ORACLE[100]
        a = iid3.fits[0].a
        assert ub_outage(iid3, db(100)) == pytest.approx((math.e * x / a) ** (3 * a), rel=1e-11)

    @given(st.integers(0, 100_000), st.integers(1, 4), st.floats(60, 140))
    @settings(max_examples=100, deadline=None)
    def test_ub_dominates(self, seed, k, snr_db):
        scn = random_scenario(k, seed)
        s = db(snr_db)
        assert log_ub_outage(scn, s) >= log_asymptotic_outage(scn, s)
        assert ub_outage(scn, s) >= outage_probability(scn, s)


class TestAsymptoticSummary:
    def test_diversity_order(self, iid3):
        summary = asymptotic_summary(iid3)
        assert summary.diversity_order == pytest.approx(1.5 * iid3.fits[0].a, rel=1e-14)
        assert summary.per_link_exponents == (iid3.fits[0].a / 2,) * 3

    def test_non_iid_has_no_coding_gain(self):
        scn = random_scenario(3, 8)
        assert asymptotic_summary(scn).coding_gain is None

    @pytest.mark.parametrize("seed", range(10))
    def test_coding_gain_reproduces_asymptote(self, seed):
        scn = iid_scenario(seed)
        summary = asymptotic_summary(scn)
        s = db(95.0)
        log_form = -summary.diversity_order * math.log(summary.coding_gain * s)
        assert log_form == pytest.approx(log_asymptotic_outage(scn, s), rel=1e-12)

    def test_slope_of_asymptote_is_exact(self, iid3):
        la = log_asymptotic_outage(iid3, db(100))
        lb = log_asymptotic_outage(iid3, db(110))
        assert -(lb - la) / math.log(10) == pytest.approx(asymptotic_summary(iid3).diversity_order, rel=1e-12)

    def test_finite_slope_trends_to_diversity(self, iid3):
        g_d = asymptotic_summary(iid3).diversity_order
        lo = finite_snr_slope(iid3, 100, 110)
        hi = finite_snr_slope(iid3, 150, 160)
        assert lo < hi < g_d
        assert hi == pytest.approx(g_d, rel=0.01)


class TestAsep:
    def test_rayleigh_closed_form(self):
        s = 10.0
        val = asep_from_cdf(lambda g: -math.expm1(-g / s), BPSK, breakpoints=[s])
        assert val == pytest.approx(0.5 * (1 - math.sqrt(s / (1 + s))), rel=1e-10)

    def test_quadrature_oracle(self, iid3):
        assert asep_quadrature(iid3, BPSK, db(100)) == pytest.approx(ASEP_100DB, rel=1e-9)
        assert asep_quadrature(iid3, BPSK, db(105)) == pytest.approx(ASEP_105DB, rel=1e-9)

    def test_series_refuses_when_cancellation_dominates(self, iid3):
        with pytest.raises(SeriesConvergenceError):
            asep_series(iid3, BPSK, db(100), SeriesTruncation(40))

    @pytest.mark.parametrize("snr_db", [110, 120, 130])
    def test_series_agrees_with_quadrature(self, iid3, snr_db):
        s = db(snr_db)
        series, err = asep_series(iid3, BPSK, s, SeriesTruncation(40), with_tail=True)
        quad = asep_quadrature(iid3, BPSK, s)
        assert series == pytest.approx(quad, rel=1e-6)
        assert abs(series - quad) <= err + 1e-9 * quad

    def test_series_single_link_small_shape(self):
        scn = Scenario(GlobalConfig(), [RisLinkConfig(1)])
        s = db(125)
        assert asep_series(scn, QPSK, s) == pytest.approx(asep_quadrature(scn, QPSK, s), rel=1e-6)

    def test_qpsk_above_bpsk(self, iid3):
        # same p, smaller q
        for snr_db in (90, 100, 110):
            assert asep_quadrature(iid3, QPSK, db(snr_db)) > asep_quadrature(iid3, BPSK, db(snr_db))

    def test_asep_decreases_with_snr(self, iid3):
        vals = [asep_quadrature(iid3, BPSK, db(s)) for s in range(70, 131, 10)]
        assert all(b < a for a, b in zip(vals, vals[1:]))
        assert 0 < vals[0] < 0.5
