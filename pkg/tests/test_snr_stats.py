import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from riscalc.channel import GlobalConfig, RisLinkConfig
from riscalc.errors import DomainError, SeriesConvergenceError, ValidationError
from riscalc.snr_stats import (
    Scenario,
    SeriesTruncation,
    normalized_argument,
    selection_cdf,
    selection_cdf_series,
    selection_pdf,
    series_coefficients,
    snr_cdf,
    snr_pdf,
)

from conftest import db

# K=3, N=5 Rayleigh, d=5/5 m, gamma_out=1; 40-digit mpmath incomplete gamma
ORACLE = {
    80: (16.40069218023924434, 0.99180316581263412189, 0.97561051098034908177),
    100: (1.640069218023924434, 0.00028208751615340136076, 2.2446653383998794226e-11),
    120: (0.1640069218023924434, 9.2201835338881656274e-12, 7.8382425469826087204e-34),
}


def random_scenario(draw_k, seed):
    rng = np.random.default_rng(seed)
    links = [
        RisLinkConfig(
            int(rng.integers(1, 30)),
            m1=float(rng.uniform(0.5, 4)),
            m2=float(rng.uniform(0.5, 4)),
            omega1=float(rng.uniform(0.2, 3)),
            omega2=float(rng.uniform(0.2, 3)),
            d1_m=float(rng.uniform(1, 20)),
            d2_m=float(rng.uniform(1, 20)),
        )
        for _ in range(draw_k)
    ]
    return Scenario(GlobalConfig(), links)


class TestScenario:
    def test_cached_fits(self, iid3):
        assert iid3.n_links == 3
        assert len(iid3.fits) == len(iid3.path_losses) == 3
        assert iid3.outage_threshold == 1.0

    def test_with_links(self, iid3):
        assert iid3.with_links([RisLinkConfig(2)]).n_links == 1

    def test_rejects_empty(self, config):
        with pytest.raises(ValidationError):
            Scenario(config, [])

    def test_truncation_validation(self):
        with pytest.raises(ValidationError):
            SeriesTruncation(0)


class TestSingleLink:
    @pytest.mark.parametrize("snr_db", sorted(ORACLE))
    def test_cdf_oracle(self, iid3, snr_db):
        x, F, _ = ORACLE[snr_db]
        fit, pl = iid3.fits[0], iid3.path_losses[0]
        assert normalized_argument(fit, pl, db(snr_db), 1.0) == pytest.approx(x, rel=1e-12)
        assert snr_cdf(fit, pl, db(snr_db), 1.0) == pytest.approx(F, rel=1e-10)

    def test_pdf_integrates_to_cdf(self, iid3):
        fit, pl = iid3.fits[0], iid3.path_losses[0]
        s = db(90)
        for g in [0.3, 5.0, 40.0]:
            val = integrate.quad(lambda t: snr_pdf(fit, pl, s, t), 0, g, epsrel=1e-12, limit=200)[0]
            assert val == pytest.approx(snr_cdf(fit, pl, s, g), rel=1e-9)

    def test_domain(self, iid3):
        fit, pl = iid3.fits[0], iid3.path_losses[0]
        with pytest.raises(DomainError):
            snr_cdf(fit, pl, 1e9, -1.0)
        with pytest.raises(DomainError):
            snr_pdf(fit, pl, 1e9, 0.0)


class TestSelection:
    @pytest.mark.parametrize("snr_db", sorted(ORACLE))
    def test_product_oracle(self, iid3, snr_db):
        assert selection_cdf(iid3, db(snr_db), 1.0) == pytest.approx(ORACLE[snr_db][2], rel=1e-10)

    def test_pdf_is_derivative(self):
        scn = random_scenario(3, 17)
        s = db(100)
        for g in [0.5, 3.0, 25.0]:
            val = integrate.quad(lambda t: selection_pdf(scn, s, t), 0, g, epsrel=1e-12, limit=400)[0]
            assert val == pytest.approx(selection_cdf(scn, s, g), rel=1e-8, abs=1e-300)

    @given(st.integers(0, 10_000), st.integers(1, 4), st.floats(40, 160))
    @settings(max_examples=60, deadline=None)
    def test_cdf_is_monotone_distribution(self, seed, k, snr_db):
        scn = random_scenario(k, seed)
        g = np.concatenate([[0.0], np.logspace(-6, 8, 80)])
        F = selection_cdf(scn, db(snr_db), g)
        assert F[0] == 0.0
        assert np.all(np.diff(F) >= 0)
        assert np.all((F >= 0) & (F <= 1))

    @given(st.integers(0, 10_000), st.floats(40, 160))
    @settings(max_examples=40, deadline=None)
    def test_adding_link_lowers_cdf(self, seed, snr_db):
        scn = random_scenario(3, seed)
        fewer = scn.with_links(scn.links[:2])
        assert selection_cdf(scn, db(snr_db), 1.0) <= selection_cdf(fewer, db(snr_db), 1.0)


class TestSeries:
    def test_coefficients(self, iid3):
        fit = iid3.fits[0]
        log_mag, sign = series_coefficients(fit, 0.7, 4)
        n = np.arange(4)
        expect = 0.7 ** (fit.a + n) / (np.array([1, 1, 2, 6]) * (fit.a + n) * math.gamma(fit.a))
        np.testing.assert_allclose(np.exp(log_mag), expect, rtol=1e-12)
        np.testing.assert_array_equal(sign, [1, -1, 1, -1])

    @pytest.mark.parametrize("snr_db", [100, 120])
    def test_matches_product(self, iid3, snr_db):
        value, tail = selection_cdf_series(iid3, db(snr_db), 1.0, SeriesTruncation(30), with_tail=True)
        exact = ORACLE[snr_db][2]
        assert abs(value - exact) <= tail
        assert value == pytest.approx(exact, rel=1e-8)

    def test_tail_bounds_truncation_error(self):
        scn = random_scenario(2, 3)
        s = db(110)
        exact = selection_cdf(scn, s, 2.0)
        for T in (2, 4, 8, 16):
            try:
                value, tail = selection_cdf_series(scn, s, 2.0, SeriesTruncation(T), with_tail=True)
            except SeriesConvergenceError:
                continue
            assert abs(value - exact) <= tail * (1 + 1e-9) + 1e-300

    def test_inadmissible(self, iid3):
        # x = 16.4 exceeds a + T/2 = 8.05 + 2.5
        with pytest.raises(SeriesConvergenceError, match="RIS 1"):
            selection_cdf_series(iid3, db(80), 1.0, SeriesTruncation(5))

    def test_zero(self, iid3):
        assert selection_cdf_series(iid3, db(100), 0.0) == 0.0
