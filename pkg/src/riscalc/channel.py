"""Per-RIS link physics: path loss, double-Nakagami statistics and the Gamma fit.

An RIS link is the cascade source -> RIS -> destination. Each of the
``N`` elements contributes the product ``V = alpha * beta`` of two
independent Nakagami amplitudes; the coherent sum ``Z = sum(V)`` is
approximated by a moment-matched Gamma distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import kve

from .errors import DomainError, NumericalError, ValidationError
from .numerics import ln_gamma

SPEED_OF_LIGHT = 299_792_458.0  # m/s

__all__ = [
    "SPEED_OF_LIGHT",
    "GlobalConfig",
    "RisLinkConfig",
    "GammaFit",
    "db_to_linear",
    "linear_to_db",
    "path_loss",
    "log_product_moment",
    "product_moment",
    "element_shape_ratio",
    "element_scale",
    "fit_gamma",
    "product_pdf",
]


def db_to_linear(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    return 10.0 * np.log10(np.asarray(value, dtype=float))


@dataclass(frozen=True)
class GlobalConfig:
    """System-wide parameters.

    Attributes
    ----------
    carrier_frequency_hz : float
        Carrier frequency ``f_c``.
    outage_threshold_linear : float
        Outage SNR threshold ``gamma_out`` as a linear power ratio.
    avg_snr_grid_db : tuple of float
        Average-SNR sweep grid in dB.
    """

    carrier_frequency_hz: float = 2.4e9
    outage_threshold_linear: float = 1.0
    avg_snr_grid_db: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.carrier_frequency_hz > 0:
            raise ValidationError(
                f"carrier_frequency_hz must be > 0, got {self.carrier_frequency_hz}"
            )
        if not self.outage_threshold_linear > 0:
            raise ValidationError(
                f"outage_threshold_linear must be > 0, got {self.outage_threshold_linear}"
            )
        object.__setattr__(self, "avg_snr_grid_db", tuple(float(v) for v in self.avg_snr_grid_db))

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency_hz


@dataclass(frozen=True)
class RisLinkConfig:
    """One RIS-assisted path: element count, per-hop fading, geometry and gains."""

    n_elements: int = 1
    m1: float = 1.0
    m2: float = 1.0
    omega1: float = 1.0
    omega2: float = 1.0
    d1_m: float = 5.0
    d2_m: float = 5.0
    g1_db: float = 5.0
    g2_db: float = 5.0
    efficiency: float = 1.0

    def __post_init__(self):
        n = self.n_elements
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise ValidationError(f"n_elements must be a positive integer, got {n}")
        object.__setattr__(self, "n_elements", int(n))
        for name in ("m1", "m2"):
            if not getattr(self, name) >= 0.5:
                raise ValidationError(f"{name} must satisfy m >= 0.5, got {getattr(self, name)}")
        for name in ("omega1", "omega2", "d1_m", "d2_m"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0, got {getattr(self, name)}")
        if not 0 < self.efficiency <= 1:
            raise ValidationError(f"efficiency must lie in (0, 1], got {self.efficiency}")
        for name in ("g1_db", "g2_db"):
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"{name} must be finite")


@dataclass(frozen=True)
class GammaFit:
    """Moment-matched Gamma approximation of ``Z = sum_i alpha_i beta_i``."""

    a: float
    b: float
    mean_z: float
    var_z: float

    @classmethod
    def from_moments(cls, mean_z: float, var_z: float) -> "GammaFit":
        if not (var_z > 0 and mean_z > 0):
            raise NumericalError(f"degenerate moments: mean={mean_z}, var={var_z}")
        return cls(a=mean_z**2 / var_z, b=var_z / mean_z, mean_z=mean_z, var_z=var_z)


def path_loss(link: RisLinkConfig, config: GlobalConfig) -> float:
    """Overall linear path loss ``P_L`` of the S-RIS-D cascade (far-field model)."""
    lam = config.wavelength_m
    log_gain = (
        4.0 * math.log(lam / (4.0 * math.pi))
        + math.log(10.0) * (link.g1_db + link.g2_db) / 10.0
        - 2.0 * math.log(link.d1_m)
        - 2.0 * math.log(link.d2_m)
        + math.log(link.efficiency)
    )
    return math.exp(-log_gain)


def _theta(m, omega):
    return math.sqrt(m / omega)


def log_product_moment(link: RisLinkConfig, r: float) -> float:
    """``ln E[V^r]`` for ``V = alpha * beta``."""
    if not r > 0:
        raise DomainError(f"moment order must be > 0, got {r}")
    t1 = _theta(link.m1, link.omega1)
    t2 = _theta(link.m2, link.omega2)
    return (
        ln_gamma(link.m1 + r / 2)
        + ln_gamma(link.m2 + r / 2)
        - ln_gamma(link.m1)
        - ln_gamma(link.m2)
        - r * math.log(t1 * t2)
    )


def product_moment(link: RisLinkConfig, r: float) -> float:
    """r-th raw moment of the double-Nakagami product ``V``."""
    return math.exp(log_product_moment(link, r))


def element_shape_ratio(link: RisLinkConfig) -> float:
    """``E[V]^2 / Var[V]``, the Gamma shape contributed by each element.

    Depends on the fading shapes only; the spreads cancel.
    """
    # E[V^2]/E[V]^2 computed in log space; the ratio exceeds 1 strictly
    log_ratio = log_product_moment(link, 2.0) - 2.0 * log_product_moment(link, 1.0)
    excess = math.expm1(log_ratio)
    if not excess > 0:
        raise NumericalError("Var[V] <= 0 for the given fading parameters")
    return 1.0 / excess


def element_scale(link: RisLinkConfig) -> float:
    """``Var[V] / E[V]``, the Gamma scale; independent of the element count."""
    fit = fit_gamma(RisLinkConfig(1, link.m1, link.m2, link.omega1, link.omega2))
    return fit.b


def fit_gamma(link: RisLinkConfig) -> GammaFit:
    """Gamma shape/scale matching the first two moments of the element sum."""
    n = link.n_elements
    mean_v = product_moment(link, 1.0)
    var_v = mean_v * mean_v * math.expm1(
        log_product_moment(link, 2.0) - 2.0 * log_product_moment(link, 1.0)
    )
    if not var_v > 0:
        raise NumericalError("Var[V] <= 0 for the given fading parameters")
    return GammaFit.from_moments(n * mean_v, n * var_v)


def product_pdf(link: RisLinkConfig, v):
    """Density of ``V = alpha * beta`` (double-Nakagami), ``v > 0``."""
    v = np.asarray(v, dtype=float)
    if np.any(~(v > 0)):
        raise DomainError("product_pdf requires v > 0")
    t = _theta(link.m1, link.omega1) * _theta(link.m2, link.omega2)
    ms = link.m1 + link.m2
    log_norm = math.log(4.0) + ms * math.log(t) - ln_gamma(link.m1) - ln_gamma(link.m2)
    arg = 2.0 * t * v
    # kve(x) = kv(x) e^x keeps large arguments finite
    kv_scaled = kve(abs(link.m1 - link.m2), arg)
    out = np.exp(log_norm + (ms - 1.0) * np.log(v) - arg) * kv_scaled
    return float(out) if out.ndim == 0 else out
