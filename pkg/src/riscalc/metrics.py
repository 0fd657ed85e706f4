"""Outage probability, high-SNR asymptotics and average symbol error probability."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special

from .errors import NumericalError, SeriesConvergenceError, ValidationError
from .numerics import ln_gamma
from .snr_stats import Scenario, SeriesTruncation, selection_cdf, series_coefficients

__all__ = [
    "ModulationScheme",
    "BPSK",
    "QPSK",
    "AsymptoticSummary",
    "outage_probability",
    "log_asymptotic_outage",
    "asymptotic_outage",
    "log_ub_outage",
    "ub_outage",
    "asymptotic_summary",
    "finite_snr_slope",
    "asep_series",
    "asep_from_cdf",
    "asep_quadrature",
]


@dataclass(frozen=True)
class ModulationScheme:
    """Constants of the error-rate template ``P_e = E[p Q(sqrt(2 q gamma))]``."""

    p: float
    q: float
    label: str = ""

    def __post_init__(self):
        if not self.p > 0:
            raise ValidationError(f"modulation p must be > 0, got {self.p}")
        if not self.q > 0:
            raise ValidationError(f"modulation q must be > 0, got {self.q}")


BPSK = ModulationScheme(1.0, 1.0, "BPSK")
QPSK = ModulationScheme(1.0, 0.5, "QPSK")


@dataclass(frozen=True)
class AsymptoticSummary:
    diversity_order: float
    coding_gain: Optional[float]
    per_link_exponents: tuple


def _exp(log_value: float) -> float:
    # far below the power-law regime the bounds exceed the float range
    return math.inf if log_value > 709.0 else math.exp(log_value)


def outage_probability(scn: Scenario, avg_snr: float) -> float:
    """Probability that the selected SNR falls at or below the outage threshold."""
    return float(selection_cdf(scn, avg_snr, scn.outage_threshold))


def _log_x(scn: Scenario, avg_snr: float):
    g_out = scn.outage_threshold
    return [
        0.5 * (math.log(g_out) + math.log(pl) - math.log(avg_snr) - 2.0 * math.log(f.b))
        for f, pl in zip(scn.fits, scn.path_losses)
    ]


def log_asymptotic_outage(scn: Scenario, avg_snr: float) -> float:
    return sum(
        f.a * lx - ln_gamma(f.a + 1.0) for f, lx in zip(scn.fits, _log_x(scn, avg_snr))
    )


def asymptotic_outage(scn: Scenario, avg_snr: float) -> float:
    """High-SNR power law: leading term of each link's incomplete-gamma series."""
    return _exp(log_asymptotic_outage(scn, avg_snr))


def log_ub_outage(scn: Scenario, avg_snr: float) -> float:
    return sum(
        f.a + f.a * lx - f.a * math.log(f.a) for f, lx in zip(scn.fits, _log_x(scn, avg_snr))
    )


def ub_outage(scn: Scenario, avg_snr: float) -> float:
    """Upper bound ``prod_k (e x_k / a_k)^a_k`` on the outage probability."""
    return _exp(log_ub_outage(scn, avg_snr))


def _is_iid(scn: Scenario) -> bool:
    f0, pl0 = scn.fits[0], scn.path_losses[0]
    return all(
        math.isclose(f.a, f0.a, rel_tol=1e-12)
        and math.isclose(f.b, f0.b, rel_tol=1e-12)
        and math.isclose(pl, pl0, rel_tol=1e-12)
        for f, pl in zip(scn.fits, scn.path_losses)
    )


def asymptotic_summary(scn: Scenario) -> AsymptoticSummary:
    """Diversity order and, for identical links, coding gain.

    The high-SNR outage behaves as ``(G_c * avg_snr) ** -G_d``.
    """
    exponents = tuple(f.a / 2.0 for f in scn.fits)
    coding_gain = None
    if _is_iid(scn):
        f, pl = scn.fits[0], scn.path_losses[0]
        # identical links: every factor shares one offset, so no 1/K root
        log_gc = (
            2.0 * math.log(f.b)
            + (2.0 / f.a) * ln_gamma(f.a + 1.0)
            - math.log(scn.outage_threshold)
            - math.log(pl)
        )
        coding_gain = math.exp(log_gc)
    return AsymptoticSummary(sum(exponents), coding_gain, exponents)


def finite_snr_slope(scn: Scenario, snr_db_lo: float, snr_db_hi: float) -> float:
    """Negative log-log slope of the exact outage between two average SNRs (dB)."""
    p_lo = outage_probability(scn, 10.0 ** (snr_db_lo / 10.0))
    p_hi = outage_probability(scn, 10.0 ** (snr_db_hi / 10.0))
    return -(math.log10(p_hi) - math.log10(p_lo)) / ((snr_db_hi - snr_db_lo) / 10.0)


def _asep_series_logs(scn, mod, avg_snr, terms):
    log_total = np.zeros(())
    sign_total = np.ones(())
    half_power = np.zeros(())
    for fit, pl in zip(scn.fits, scn.path_losses):
        y = math.sqrt(pl / (avg_snr * fit.b**2))
        log_mag, sign = series_coefficients(fit, y, terms)
        log_total = np.add.outer(log_total, log_mag)
        sign_total = np.multiply.outer(sign_total, sign)
        half_power = np.add.outer(half_power, (fit.a + np.arange(terms)) / 2.0)
    s = half_power + 0.5
    return log_total + special.gammaln(s) - s * math.log(mod.q), sign_total


def asep_series(
    scn: Scenario, mod: ModulationScheme, avg_snr: float,
    trunc: SeriesTruncation | None = None, *, rtol: float = 1e-7, with_tail: bool = False,
):
    """ASEP from the term-wise integrated CDF series (``T**K`` terms).

    The alternating terms can exceed the result by many orders of magnitude,
    so the sum is accepted only when the per-link argument at ``gamma = 1/q``
    is at most ``a_k + T/2`` *and* the estimated error (first dropped layer
    of terms plus accumulated rounding) is below ``rtol`` times the value.
    Otherwise :class:`SeriesConvergenceError` is raised.
    """
    trunc = trunc or SeriesTruncation()
    T = trunc.terms_per_index
    for k, (fit, pl) in enumerate(zip(scn.fits, scn.path_losses)):
        x = math.sqrt(pl / (avg_snr * fit.b**2 * mod.q))
        if x > fit.a + T / 2.0:
            raise SeriesConvergenceError(
                f"ASEP series argument for RIS {k + 1} is {x:.6g}, above a + T/2 = "
                f"{fit.a + T / 2.0:.6g}"
            )
    prefactor = mod.p * math.sqrt(mod.q) / (2.0 * math.sqrt(math.pi))
    logs, signs = _asep_series_logs(scn, mod, avg_snr, T + 1)
    mags = np.exp(logs)
    kept = (slice(0, T),) * scn.n_links
    value = prefactor * math.fsum((signs[kept] * mags[kept]).ravel())
    dropped = float(mags.sum() - mags[kept].sum())
    finite = logs[kept][np.isfinite(logs[kept])]
    scale = 1.0 + (float(np.abs(finite).max()) if finite.size else 0.0)
    rounding = 8.0 * scn.n_links * scale * np.finfo(float).eps * float(mags[kept].sum())
    error = prefactor * (dropped + rounding)
    if not error <= rtol * abs(value):
        raise SeriesConvergenceError(
            f"ASEP series error estimate {error:.3g} exceeds rtol * |value| "
            f"({rtol:g} * {abs(value):.3g}); increase terms_per_index or the SNR"
        )
    return (value, error) if with_tail else value


def asep_from_cdf(cdf: Callable, mod: ModulationScheme, breakpoints=()) -> float:
    """``p sqrt(q) / (2 sqrt(pi)) * int_0^inf exp(-q g) g^-1/2 F(g) dg``.

    Integrated in ``u = sqrt(g)`` so the endpoint singularity disappears.
    ``breakpoints`` are SNR values where the integrand changes character.
    """
    def integrand(u):
        return 2.0 * math.exp(-mod.q * u * u) * float(cdf(u * u))

    # integrand bounded by 2 exp(-q u^2); beyond u_max the omitted mass is < 1e-300
    u_max = math.sqrt(700.0 / mod.q)
    pts = sorted({math.sqrt(g) for g in breakpoints if 0 < g and math.sqrt(g) < u_max}
                 | {math.sqrt(c / mod.q) for c in (0.25, 1.0, 4.0, 16.0, 64.0)})
    edges = [0.0] + pts + [u_max]
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        for lo, hi in zip(edges[:-1], edges[1:]):
            try:
                val, _ = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-11, limit=200)
            except integrate.IntegrationWarning as exc:
                raise NumericalError(f"ASEP quadrature did not converge on [{lo}, {hi}]: {exc}")
            total += val
    return mod.p * math.sqrt(mod.q) / (2.0 * math.sqrt(math.pi)) * total


def asep_quadrature(scn: Scenario, mod: ModulationScheme, avg_snr: float) -> float:
    """ASEP by adaptive quadrature of the product-form CDF."""
    # the integrand of the power-law regime peaks at g = G_d / q
    g_d = sum(f.a for f in scn.fits) / 2.0
    medians = [avg_snr * (f.a * f.b) ** 2 / pl for f, pl in zip(scn.fits, scn.path_losses)]
    breakpoints = [g_d / mod.q, 0.5 * g_d / mod.q, 2.0 * g_d / mod.q, *medians]
    return asep_from_cdf(lambda g: selection_cdf(scn, avg_snr, g), mod, breakpoints)
