"""Outage, error-rate and placement analysis for multi-RIS links over Nakagami-m fading."""

from .channel import GammaFit, GlobalConfig, RisLinkConfig, fit_gamma, path_loss
from .metrics import (
    BPSK,
    QPSK,
    ModulationScheme,
    asep_quadrature,
    asep_series,
    asymptotic_outage,
    asymptotic_summary,
    outage_probability,
    ub_outage,
)
from .montecarlo import McEstimate, McRun, empirical_asep, empirical_outage
from .optimizer import (
    ElementProblem,
    PlacementProblem,
    minimize_total_elements,
    optimize_placement,
    solve_feasibility,
)
from .snr_stats import Scenario, SeriesTruncation, selection_cdf, snr_cdf

__version__ = "0.1.0"
