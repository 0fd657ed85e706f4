"""Distribution of the per-RIS and the selection-combined end-to-end SNR.

With perfect phase alignment the SNR through RIS ``k`` is
``gamma_k = (avg_snr / P_L) * Z_k**2`` where ``Z_k`` is Gamma(a_k, b_k).
Selecting the best RIS gives ``gamma* = max_k gamma_k`` whose CDF is the
product of the per-link CDFs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .channel import GammaFit, GlobalConfig, RisLinkConfig, fit_gamma, path_loss
from .errors import DomainError, SeriesConvergenceError, ValidationError
from .numerics import reg_lower_inc_gamma

__all__ = [
    "Scenario",
    "SeriesTruncation",
    "normalized_argument",
    "snr_cdf",
    "snr_pdf",
    "selection_cdf",
    "selection_cdf_series",
    "selection_pdf",
]

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class Scenario:
    """K RIS links sharing one global configuration.

    Gamma fits and path losses are computed once at construction.
    """

    config: GlobalConfig
    links: tuple
    fits: tuple = field(init=False, repr=False)
    path_losses: tuple = field(init=False, repr=False)

    def __post_init__(self):
        links = tuple(self.links)
        if len(links) < 1:
            raise ValidationError("a scenario needs at least one RIS link")
        for link in links:
            if not isinstance(link, RisLinkConfig):
                raise ValidationError(f"expected RisLinkConfig, got {type(link).__name__}")
        object.__setattr__(self, "links", links)
        object.__setattr__(self, "fits", tuple(fit_gamma(link) for link in links))
        object.__setattr__(
            self, "path_losses", tuple(path_loss(link, self.config) for link in links)
        )

    @property
    def n_links(self) -> int:
        return len(self.links)

    @property
    def outage_threshold(self) -> float:
        return self.config.outage_threshold_linear

    def with_links(self, links) -> "Scenario":
        return Scenario(self.config, tuple(links))


@dataclass(frozen=True)
class SeriesTruncation:
    """Rectangular truncation of the multi-index series: ``T`` terms per index."""

    terms_per_index: int = 20

    def __post_init__(self):
        t = self.terms_per_index
        if isinstance(t, bool) or int(t) != t or t < 1:
            raise ValidationError(f"terms_per_index must be a positive integer, got {t}")


def normalized_argument(fit: GammaFit, pl: float, avg_snr: float, gamma):
    """Gamma-CDF argument ``sqrt(P_L * gamma / (avg_snr * b**2))``."""
    return np.sqrt(pl * np.asarray(gamma, dtype=float) / (avg_snr * fit.b**2))


def snr_cdf(fit: GammaFit, pl: float, avg_snr: float, gamma):
    """CDF of the end-to-end SNR through a single RIS."""
    gamma = np.asarray(gamma, dtype=float)
    if np.any(~(gamma >= 0)):
        raise DomainError("snr_cdf requires gamma >= 0")
    return reg_lower_inc_gamma(fit.a, normalized_argument(fit, pl, avg_snr, gamma))


def _log_snr_pdf(fit: GammaFit, pl: float, avg_snr: float, gamma):
    z = np.sqrt(pl * gamma / avg_snr)
    # f_Z(z) * dz/dgamma with dz/dgamma = z / (2 gamma)
    return (
        (fit.a - 1.0) * np.log(z)
        - z / fit.b
        - special.gammaln(fit.a)
        - fit.a * math.log(fit.b)
        + np.log(z / (2.0 * gamma))
    )


def snr_pdf(fit: GammaFit, pl: float, avg_snr: float, gamma):
    """Density of the end-to-end SNR through a single RIS, ``gamma > 0``."""
    gamma = np.asarray(gamma, dtype=float)
    if np.any(~(gamma > 0)):
        raise DomainError("snr_pdf requires gamma > 0")
    out = np.exp(_log_snr_pdf(fit, pl, avg_snr, gamma))
    return float(out) if out.ndim == 0 else out


def selection_cdf(scn: Scenario, avg_snr: float, gamma):
    """CDF of the selected SNR, evaluated as the product of per-link CDFs."""
    gamma = np.asarray(gamma, dtype=float)
    out = np.ones_like(gamma)
    for fit, pl in zip(scn.fits, scn.path_losses):
        out = out * snr_cdf(fit, pl, avg_snr, gamma)
    return float(out) if out.ndim == 0 else out


def selection_pdf(scn: Scenario, avg_snr: float, gamma):
    """Density of the selected SNR: ``sum_j f_j(gamma) prod_{k != j} F_k(gamma)``."""
    gamma = np.asarray(gamma, dtype=float)
    if np.any(~(gamma > 0)):
        raise DomainError("selection_pdf requires gamma > 0")
    cdfs = [np.asarray(snr_cdf(f, pl, avg_snr, gamma)) for f, pl in zip(scn.fits, scn.path_losses)]
    total = np.zeros_like(gamma)
    for j, (fit, pl) in enumerate(zip(scn.fits, scn.path_losses)):
        term = np.asarray(snr_pdf(fit, pl, avg_snr, gamma))
        for k, cdf in enumerate(cdfs):
            if k != j:
                term = term * cdf
        total = total + term
    return float(total) if total.ndim == 0 else total


def series_coefficients(fit: GammaFit, y: float, terms: int):
    """Per-index factors ``(-1)^n y^(a+n) / (n! (a+n) Gamma(a))`` as (log|.|, sign)."""
    n = np.arange(terms, dtype=float)
    with np.errstate(divide="ignore"):
        log_mag = (
            (fit.a + n) * math.log(y) if y > 0 else np.full(terms, -np.inf)
        ) - special.gammaln(n + 1.0) - np.log(fit.a + n) - special.gammaln(fit.a)
    sign = np.where(n % 2 == 0, 1.0, -1.0)
    return log_mag, sign


def _check_admissible(scn: Scenario, xs, trunc: SeriesTruncation):
    for k, (fit, x) in enumerate(zip(scn.fits, xs)):
        limit = fit.a + trunc.terms_per_index / 2.0
        if x > limit:
            raise SeriesConvergenceError(
                f"series argument for RIS {k + 1} is {x:.6g}, above the admissible "
                f"limit a + T/2 = {limit:.6g}; raise terms_per_index or use the product form"
            )


def _link_remainder(fit: GammaFit, x: float, terms: int) -> float:
    # |sum_{n>=T} x^(a+n) / (n! (a+n) Gamma(a))| <= x^a e^x P(T, x) / ((a+T) Gamma(a))
    if x == 0:
        return 0.0
    log_r = (
        fit.a * math.log(x)
        + x
        + math.log(max(special.gammainc(terms, x), 1e-300))
        - math.log(fit.a + terms)
        - special.gammaln(fit.a)
    )
    return math.exp(log_r)


def selection_cdf_series(
    scn: Scenario, avg_snr: float, gamma: float, trunc: SeriesTruncation | None = None,
    *, with_tail: bool = False,
):
    """Truncated multi-index power series for the selected-SNR CDF.

    Sums ``T**K`` products of per-index terms. Raises
    :class:`SeriesConvergenceError` when any per-link argument exceeds
    ``a_k + T/2``. With ``with_tail=True`` returns ``(value, tail_bound)``,
    where ``tail_bound`` bounds the truncation remainder plus a rounding
    allowance from the absolute term sum.
    """
    trunc = trunc or SeriesTruncation()
    if not gamma >= 0:
        raise DomainError("selection_cdf_series requires gamma >= 0")
    T = trunc.terms_per_index
    ys = [math.sqrt(pl / (avg_snr * f.b**2)) for f, pl in zip(scn.fits, scn.path_losses)]
    xs = [y * math.sqrt(gamma) for y in ys]
    _check_admissible(scn, xs, trunc)
    if gamma == 0:
        return (0.0, 0.0) if with_tail else 0.0

    log_total = np.zeros(())
    sign_total = np.ones(())
    for fit, x in zip(scn.fits, xs):
        log_mag, sign = series_coefficients(fit, x, T)
        log_total = np.add.outer(log_total, log_mag)
        sign_total = np.multiply.outer(sign_total, sign)
    terms = sign_total * np.exp(log_total)
    value = math.fsum(terms.ravel())

    if not with_tail:
        return value
    abs_sums = []
    rems = []
    for fit, x in zip(scn.fits, xs):
        log_mag, _ = series_coefficients(fit, x, T)
        abs_sums.append(float(np.exp(log_mag).sum()))
        rems.append(_link_remainder(fit, x, T))
    tail = float(np.prod(np.add(abs_sums, rems)) - np.prod(abs_sums))
    # exp(log) carries a relative error of order eps * |log|
    finite = log_total[np.isfinite(log_total)]
    scale = 1.0 + (float(np.abs(finite).max()) if finite.size else 0.0)
    tail += 8.0 * scn.n_links * scale * _EPS * float(np.abs(terms).sum())
    return value, tail
