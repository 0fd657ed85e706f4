"""Monte-Carlo ground truth for the selected end-to-end SNR.

Each trial samples ``N_k`` Nakagami amplitude pairs per RIS, forms the
coherent sum under perfect phase alignment and keeps the best RIS. Trials
are processed in chunks; chunk ``c`` of link ``k`` draws from its own
stream seeded by ``(seed, c, k)``, so results do not depend on how many
workers process the chunks, and adding a RIS leaves the other links'
samples untouched.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .metrics import ModulationScheme
from .numerics import gaussian_q
from .snr_stats import Scenario

__all__ = [
    "McRun",
    "McEstimate",
    "sample_nakagami",
    "sample_link_snr",
    "selected_snr_chunks",
    "empirical_outage",
    "empirical_cdf",
    "empirical_asep",
]


@dataclass(frozen=True)
class McRun:
    trials: int = 1_000_000
    seed: int = 0
    chunk_size: int = 1 << 16
    workers: int = 1

    def __post_init__(self):
        for name in ("trials", "chunk_size", "workers"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ValidationError(f"{name} must be a positive integer, got {v}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def n_chunks(self) -> int:
        return -(-self.trials // self.chunk_size)

    def chunk_length(self, index: int) -> int:
        return min(self.chunk_size, self.trials - index * self.chunk_size)


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    trials: int


def sample_nakagami(m: float, omega: float, rng: np.random.Generator, size=None):
    """Nakagami-m amplitudes as the square root of Gamma(m, omega/m) variates."""
    if not m >= 0.5:
        raise ValidationError(f"Nakagami shape must satisfy m >= 0.5, got {m}")
    if not omega > 0:
        raise ValidationError(f"Nakagami spread must be > 0, got {omega}")
    return np.sqrt(rng.gamma(m, omega / m, size))


def _rng(seed: int, chunk: int, link: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(chunk, link)))


def sample_link_snr(link, pl: float, avg_snr: float, rng: np.random.Generator, size: int):
    """End-to-end SNR samples through one RIS with phases perfectly aligned."""
    shape = (size, link.n_elements)
    alpha = sample_nakagami(link.m1, link.omega1, rng, shape)
    beta = sample_nakagami(link.m2, link.omega2, rng, shape)
    z = (alpha * beta).sum(axis=1)
    return (avg_snr / pl) * z * z


def _chunk(scn: Scenario, avg_snr: float, run: McRun, index: int):
    size = run.chunk_length(index)
    best = np.zeros(size)
    for k, (link, pl) in enumerate(zip(scn.links, scn.path_losses)):
        np.maximum(best, sample_link_snr(link, pl, avg_snr, _rng(run.seed, index, k), size), out=best)
    return best


def _map_chunks(scn, avg_snr, run, reducer):
    def work(index):
        return reducer(_chunk(scn, avg_snr, run, index))

    indices = range(run.n_chunks)
    if run.workers == 1:
        return [work(i) for i in indices]
    with ThreadPoolExecutor(max_workers=run.workers) as pool:
        # map preserves chunk order, keeping the reduction deterministic
        return list(pool.map(work, indices))


def selected_snr_chunks(scn: Scenario, avg_snr: float, run: McRun):
    """Yield the selected SNR ``max_k gamma_k`` chunk by chunk (serial)."""
    for index in range(run.n_chunks):
        yield _chunk(scn, avg_snr, run, index)


def _binomial(count: int, trials: int) -> McEstimate:
    p = count / trials
    return McEstimate(p, math.sqrt(p * (1.0 - p) / trials), trials)


def empirical_outage(scn: Scenario, avg_snr: float, run: McRun) -> McEstimate:
    """Fraction of trials whose selected SNR is at or below the outage threshold."""
    g_out = scn.outage_threshold
    counts = _map_chunks(scn, avg_snr, run, lambda s: int(np.count_nonzero(s <= g_out)))
    return _binomial(sum(counts), run.trials)


def empirical_cdf(scn: Scenario, avg_snr: float, gammas, run: McRun) -> list:
    """Empirical ``P[gamma* <= g]`` at each ``g`` in ``gammas``, from one set of trials."""
    gammas = np.asarray(gammas, dtype=float)
    counts = _map_chunks(
        scn, avg_snr, run, lambda s: np.count_nonzero(s[:, None] <= gammas[None, :], axis=0)
    )
    total = np.sum(counts, axis=0)
    return [_binomial(int(c), run.trials) for c in total]


def empirical_asep(
    scn: Scenario, mod: ModulationScheme, avg_snr: float, run: McRun
) -> McEstimate:
    """Sample mean of ``p Q(sqrt(2 q gamma*))``."""
    def reduce(s):
        e = gaussian_q(np.sqrt(2.0 * mod.q * s))
        return float(e.sum()), float((e * e).sum())

    parts = _map_chunks(scn, avg_snr, run, reduce)
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    n = run.trials
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / max(n - 1, 1)
    return McEstimate(mod.p * mean, mod.p * math.sqrt(var / n), n)
