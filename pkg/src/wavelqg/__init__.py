"""LQG control of the discretized wave equation on a ring.

The dynamics, costs and noise model are all circulant, so the optimal
regulator and filter reduce to closed-form per-frequency Riccati roots.
This package implements those closed forms, independent dense solvers to
validate them, locality/performance analysis over the dimensionless
parameter groups, and a Monte Carlo simulator for end-to-end checks.
"""

from .params import DimensionalParams, NondimParams, locality_residuals, nondimensionalize
from .spectral import Circulant, Spectrum, offdiag_mass
from .synthesis import (GainKind, GainSet, RiccatiSpectrum, SpectralGain,
                        assemble_gains, kf_riccati_spectrum, kf_spectral_gain,
                        lqr_riccati_spectrum, lqr_spectral_gain)
from .analysis import (CostLocalityReport, SweepGrid, build_closed_loop,
                       curve_reports, kf_cost, lqg_cost, lqg_cost_dual,
                       lqr_cost, report, sweep)
from .simulator import SimConfig, SimSummary, Trajectory, sample_correlated_noise, simulate

__version__ = "0.1.0"
