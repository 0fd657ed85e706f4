"""Element-count and placement optimization on the outage upper bound.

The bound ``prod_k (e x_k / a_k)^a_k`` with ``a_k = N_k c_k`` has a concave
logarithm ``f(N)``. Requiring ``f(N) = ln P_th`` is handled by path
following: replace ``f`` with its tangent at the current iterate (an affine
majorant), solve the resulting box-constrained linear problem, repeat.
Placement minimizes a concave function over a box, so the optimum is a
vertex; both vertex enumeration and the linearized iteration are provided.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import xlogy

from .channel import GlobalConfig, RisLinkConfig, element_scale, fit_gamma, path_loss
from .errors import InfeasibleError, NumericalError, ValidationError
from .numerics import Tolerance, ln_gamma

__all__ = [
    "ElementProblem",
    "PlacementProblem",
    "UbCoefficients",
    "AffineModel",
    "IterationRecord",
    "ElementSolution",
    "PlacementSolution",
    "shape_per_element",
    "ub_coefficients",
    "ub_outage_log",
    "linearize_f",
    "solve_box_lp",
    "solve_feasibility",
    "minimize_total_elements",
    "placement_links",
    "placement_objective",
    "optimize_placement",
]


@dataclass(frozen=True)
class ElementProblem:
    """Find element counts meeting an outage-bound target.

    ``links`` supply fading, geometry and gains; their ``n_elements`` are
    ignored. ``start_point`` defaults to ``n_max`` for every RIS.
    """

    links: tuple
    config: GlobalConfig
    n_max: float
    p_out_th: float
    avg_snr: float
    start_point: Optional[tuple] = None
    tol: Tolerance = field(default_factory=Tolerance)

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        if not self.links:
            raise ValidationError("at least one RIS is required")
        if not self.n_max > 0:
            raise ValidationError(f"n_max must be > 0, got {self.n_max}")
        if not 0 < self.p_out_th < 1:
            raise ValidationError(f"p_out_th must lie in (0, 1), got {self.p_out_th}")
        if not self.avg_snr > 0:
            raise ValidationError(f"avg_snr must be > 0, got {self.avg_snr}")
        start = self.start_point
        if start is None:
            start = (float(self.n_max),) * len(self.links)
        start = tuple(float(v) for v in start)
        if len(start) != len(self.links):
            raise ValidationError("start_point needs one entry per RIS")
        if any(not 0 < v <= self.n_max for v in start):
            raise ValidationError(f"start_point entries must lie in (0, n_max], got {start}")
        object.__setattr__(self, "start_point", start)


@dataclass(frozen=True)
class PlacementProblem:
    """Place each RIS on the S-D segment of length ``total_distance_m``."""

    links: tuple
    config: GlobalConfig
    avg_snr: float
    total_distance_m: float
    d_min_m: float = 0.1
    start_point: Optional[tuple] = None
    tol: Tolerance = field(default_factory=Tolerance)

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))
        if not self.links:
            raise ValidationError("at least one RIS is required")
        D = self.total_distance_m
        if not D > 0:
            raise ValidationError(f"total_distance_m must be > 0, got {D}")
        if not 0 < self.d_min_m < D / 2:
            raise ValidationError(f"d_min_m must lie in (0, D/2), got {self.d_min_m}")
        if not self.avg_snr > 0:
            raise ValidationError(f"avg_snr must be > 0, got {self.avg_snr}")
        start = self.start_point
        if start is None:
            start = tuple(min(max(l.d1_m, self.d_min_m), D - self.d_min_m) for l in self.links)
        start = tuple(float(v) for v in start)
        if len(start) != len(self.links):
            raise ValidationError("start_point needs one entry per RIS")
        if any(not self.d_min_m <= v <= D - self.d_min_m for v in start):
            raise ValidationError(f"start_point entries must lie in [d_min, D - d_min], got {start}")
        object.__setattr__(self, "start_point", start)

    @property
    def bounds(self):
        return self.d_min_m, self.total_distance_m - self.d_min_m


@dataclass(frozen=True)
class UbCoefficients:
    c: tuple
    x: tuple
    z: tuple
    ln_p_th: Optional[float] = None


@dataclass(frozen=True)
class AffineModel:
    """``intercept + gradient . N``"""

    intercept: float
    gradient: tuple

    def __call__(self, n) -> float:
        return self.intercept + float(np.dot(self.gradient, np.asarray(n, dtype=float)))


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    point: tuple
    objective: float
    residual: float


@dataclass(frozen=True)
class ElementSolution:
    elements: tuple
    continuous: tuple
    log_ub: float
    trace: tuple

    @property
    def total(self) -> int:
        return int(sum(self.elements))


@dataclass(frozen=True)
class PlacementSolution:
    d: tuple
    value: float
    extreme_points: tuple
    iterative_d: tuple
    iterative_value: float
    trace: tuple


def shape_per_element(link: RisLinkConfig) -> float:
    """Gamma shape contributed per element, from the fading shapes alone."""
    m1, m2 = link.m1, link.m2
    # products of Gammas in log space; ratio = Gamma(m1+1/2)^2 Gamma(m2+1/2)^2 / (m1 m2 Gamma(m1)^2 Gamma(m2)^2)
    log_ratio = 2 * (ln_gamma(m1 + 0.5) + ln_gamma(m2 + 0.5) - ln_gamma(m1) - ln_gamma(m2))
    log_ratio -= math.log(m1 * m2)
    ratio = math.exp(log_ratio)
    return 1.0 / (1.0 - ratio) - 1.0


def _log_z(link, config, avg_snr, a, b):
    lam = config.wavelength_m
    gains = math.log(10.0) * (link.g1_db + link.g2_db) / 10.0
    return (
        a
        + 0.5 * a * (math.log(config.outage_threshold_linear) - math.log(avg_snr) - 2 * math.log(b))
        + 2.0 * a * math.log(4.0 * math.pi)
        - 0.5 * a * (4.0 * math.log(lam) + gains + math.log(link.efficiency))
        - a * math.log(a)
    )


def ub_coefficients(problem) -> UbCoefficients:
    """Per-RIS constants of the bound for an element or placement problem.

    ``x_k`` uses the per-element Gamma scale, which does not depend on
    ``N_k``; ``z_k`` uses the shape implied by each link's own element count.
    """
    cfg = problem.config
    c, x, z = [], [], []
    for link in problem.links:
        ck = shape_per_element(link)
        bk = element_scale(link)
        pl = path_loss(link, cfg)
        c.append(ck)
        x.append(math.sqrt(cfg.outage_threshold_linear * pl / (problem.avg_snr * bk * bk)))
        z.append(math.exp(_log_z(link, cfg, problem.avg_snr, link.n_elements * ck, bk)))
    p_th = getattr(problem, "p_out_th", None)
    return UbCoefficients(tuple(c), tuple(x), tuple(z), None if p_th is None else math.log(p_th))


def ub_outage_log(n: Sequence[float], coeffs: UbCoefficients) -> float:
    """Log of the outage upper bound as a function of element counts."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        raise ValidationError("element counts must be nonnegative")
    a = n * np.asarray(coeffs.c)
    return float(np.sum(a + xlogy(a, np.asarray(coeffs.x)) - xlogy(a, a)))


def linearize_f(anchor: Sequence[float], coeffs: UbCoefficients) -> AffineModel:
    """Tangent of ``ub_outage_log`` at ``anchor``; majorizes it everywhere.

    A coordinate anchored at zero has an unbounded slope; it is returned
    with a zero gradient and callers must keep it fixed at zero.
    """
    anchor = np.asarray(anchor, dtype=float)
    c = np.asarray(coeffs.c)
    x = np.asarray(coeffs.x)
    grad = np.zeros_like(anchor)
    active = anchor > 0
    grad[active] = c[active] * np.log(x[active] / (anchor[active] * c[active]))
    return AffineModel(float(np.sum(anchor * c)), tuple(grad))


def _project(gradient, rhs, lower, upper, anchor):
    # N(t) = clip(anchor + t g); g.N(t) is nondecreasing and piecewise linear in t
    g, lo, hi, n0 = gradient, lower, upper, anchor

    def h(t):
        return float(np.dot(g, np.clip(n0 + t * g, lo, hi)))

    nz = g != 0
    knots = np.concatenate([(lo[nz] - n0[nz]) / g[nz], (hi[nz] - n0[nz]) / g[nz], [0.0]])
    knots = np.unique(knots)
    values = np.array([h(t) for t in knots])
    first = int(np.searchsorted(values, rhs, side="left"))
    last = int(np.searchsorted(values, rhs, side="right")) - 1
    if first >= len(knots):
        t = knots[-1]
    elif last < 0:
        t = knots[0]
    elif first <= last:
        # h is flat at rhs over [knots[first], knots[last]]: stay nearest the anchor
        t = min(max(0.0, knots[first]), knots[last])
    else:
        v0, v1 = values[last], values[first]
        t = knots[last] + (rhs - v0) * (knots[first] - knots[last]) / (v1 - v0)
    return np.clip(n0 + t * g, lo, hi)


def _greedy(gradient, rhs, lower, upper, objective):
    n = lower.copy()
    residual = rhs - float(np.dot(gradient, n))
    if residual == 0:
        return n
    direction = math.copysign(1.0, residual)
    useful = [k for k in range(len(n)) if direction * gradient[k] > 0]
    # most constraint progress per unit objective first; stable sort keeps index order on ties
    useful.sort(key=lambda k: -abs(gradient[k]) / objective[k])
    remaining = abs(residual)
    for k in useful:
        step = min(upper[k] - lower[k], remaining / abs(gradient[k]))
        n[k] += step
        remaining -= step * abs(gradient[k])
        if remaining <= 0:
            break
    return n


def solve_box_lp(gradient, rhs, lower, upper, objective=None, anchor=None, atol=1e-12):
    """Solve ``gradient . N = rhs`` with ``lower <= N <= upper``.

    Without ``objective``: the feasible point closest (Euclidean) to
    ``anchor``. With ``objective`` (positive costs): a minimizer of
    ``objective . N``, found greedily, so at most one coordinate is strictly
    between its bounds.
    """
    g = np.asarray(gradient, dtype=float)
    lo = np.asarray(lower, dtype=float)
    hi = np.asarray(upper, dtype=float)
    if np.any(lo > hi):
        raise ValidationError("lower bound exceeds upper bound")
    if not np.any(g != 0):
        raise ValidationError("equality gradient is identically zero")
    reach_lo = float(np.sum(np.minimum(g * lo, g * hi)))
    reach_hi = float(np.sum(np.maximum(g * lo, g * hi)))
    slack = atol * (1.0 + abs(rhs))
    if rhs < reach_lo - slack or rhs > reach_hi + slack:
        side = "lower" if rhs < reach_lo else "upper"
        raise InfeasibleError(
            f"hyperplane value {rhs:.6g} lies outside the attainable range "
            f"[{reach_lo:.6g}, {reach_hi:.6g}]; the {side} end of the box is binding "
            f"(upper bounds {hi.tolist()})"
        )
    if objective is None:
        n0 = np.clip(np.asarray(anchor if anchor is not None else lo, dtype=float), lo, hi)
        return _project(g, rhs, lo, hi, n0)
    cost = np.asarray(objective, dtype=float)
    if np.any(cost <= 0):
        raise ValidationError("objective coefficients must be positive")
    return _greedy(g, rhs, lo, hi, cost)


def _path_follow(problem: ElementProblem, objective):
    coeffs = ub_coefficients(problem)
    n = np.asarray(problem.start_point, dtype=float)
    upper_full = np.full_like(n, float(problem.n_max))
    trace = []
    for it in range(1, problem.tol.max_iter + 1):
        model = linearize_f(n, coeffs)
        upper = np.where(n > 0, upper_full, 0.0)
        try:
            n_new = solve_box_lp(
                model.gradient, coeffs.ln_p_th - model.intercept, np.zeros_like(n), upper,
                objective=objective, anchor=n,
            )
        except InfeasibleError as exc:
            raise InfeasibleError(f"iteration {it}: {exc}") from exc
        f_val = ub_outage_log(n_new, coeffs)
        trace.append(IterationRecord(it, tuple(n_new), f_val, f_val - coeffs.ln_p_th))
        step = float(np.max(np.abs(n_new - n)))
        n = n_new
        if step < problem.tol.abs_tol:
            return n, coeffs, tuple(trace)
    raise NumericalError(
        f"path following did not converge in {problem.tol.max_iter} iterations "
        f"(last step {step:.3g})"
    )


def _round_up(n, coeffs, problem):
    ints = np.ceil(n - 1e-9).astype(int)
    # bound must still meet the target after rounding
    while ub_outage_log(ints, coeffs) > coeffs.ln_p_th + 1e-12:
        grads = np.array(linearize_f(np.maximum(ints, 1e-12), coeffs).gradient)
        grads[ints >= problem.n_max] = np.inf
        k = int(np.argmin(grads))
        if not np.isfinite(grads[k]) or grads[k] >= 0:
            raise InfeasibleError("rounded solution misses the outage target within n_max")
        ints[k] += 1
    return tuple(int(v) for v in ints)


def solve_feasibility(problem: ElementProblem) -> ElementSolution:
    """Element counts whose outage bound equals the target (rounded up)."""
    n, coeffs, trace = _path_follow(problem, objective=None)
    return ElementSolution(
        _round_up(n, coeffs, problem), tuple(n), ub_outage_log(n, coeffs), trace
    )


def minimize_total_elements(problem: ElementProblem) -> ElementSolution:
    """Fewest total elements meeting the target; result depends on the start point."""
    n, coeffs, trace = _path_follow(problem, objective=np.ones(len(problem.links)))
    return ElementSolution(
        _round_up(n, coeffs, problem), tuple(n), ub_outage_log(n, coeffs), trace
    )


def placement_links(d: Sequence[float], problem: PlacementProblem) -> tuple:
    """Links moved so that RIS ``k`` sits ``d[k]`` from the source on the S-D line."""
    D = problem.total_distance_m
    out = []
    for link, dk in zip(problem.links, d):
        fields = dict(vars(link))
        fields.update(d1_m=float(dk), d2_m=float(D - dk))
        out.append(RisLinkConfig(**fields))
    return tuple(out)


def _placement_terms(problem: PlacementProblem):
    coeffs = ub_coefficients(problem)
    a = np.array([fit_gamma(link).a for link in problem.links])
    return np.log(np.asarray(coeffs.z)), a


def placement_objective(d: Sequence[float], problem: PlacementProblem) -> float:
    """Log outage bound as a function of the source-to-RIS distances."""
    d = np.asarray(d, dtype=float)
    lo, hi = problem.bounds
    if d.shape != (len(problem.links),) or np.any(d < lo) or np.any(d > hi):
        raise ValidationError(f"distances must lie in [{lo}, {hi}], got {d.tolist()}")
    log_z, a = _placement_terms(problem)
    D = problem.total_distance_m
    return float(np.sum(log_z + a * (np.log(d) + np.log(D - d))))


def optimize_placement(problem: PlacementProblem) -> PlacementSolution:
    """Minimize the log outage bound over the clamped box.

    Enumerates all ``2**K`` vertices (ties within 1e-12 relative resolve to
    the lexicographically smallest vertex) and, independently, iterates the
    linearized problem from ``start_point`` until it stops moving.
    """
    lo, hi = problem.bounds
    D = problem.total_distance_m
    table = []
    for vertex in itertools.product((lo, hi), repeat=len(problem.links)):
        table.append((vertex, placement_objective(vertex, problem)))
    best_value = min(v for _, v in table)
    tie = 1e-12 * max(1.0, abs(best_value))
    best = min((vx for vx, v in table if v <= best_value + tie))

    _, a = _placement_terms(problem)
    d = np.asarray(problem.start_point, dtype=float)
    trace = [IterationRecord(0, tuple(d), placement_objective(d, problem), 0.0)]
    for it in range(1, problem.tol.max_iter + 1):
        slope = a * (D - 2.0 * d) / (d * (D - d))
        # linear objective over a box: each coordinate goes to the bound its slope favors
        d_new = np.where(slope < 0, hi, lo)
        moved = float(np.max(np.abs(d_new - d)))
        d = d_new
        trace.append(IterationRecord(it, tuple(d), placement_objective(d, problem), moved))
        if moved < problem.tol.abs_tol:
            break
    else:
        raise NumericalError("placement iteration did not settle on a vertex")
    return PlacementSolution(
        tuple(float(v) for v in best), placement_objective(best, problem), tuple(table),
        tuple(float(v) for v in d), placement_objective(d, problem), tuple(trace),
    )
