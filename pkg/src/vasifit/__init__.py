"""Simulation and calibration of multivariate generalized Vasicek models.

``dr_t = Theta (b - r_t) dt + sigma dX_t`` driven by noise ``X`` with
stationary increments (Brownian motion, fractional Brownian motion or
compound Poisson).  The mean level, noise scale and mean-reversion matrix
are recovered from one observed path by time averages, a quadratic
variation and a continuous-time algebraic Riccati equation built from the
empirical autocovariance.
"""

from .errors import VasifitError
from .estimate import EstimationConfig, FitResult, LagCovariance, build_BCD, estimate_b, estimate_gamma, estimate_sigma_sq, fit
from .experiment import McConfig, McReport, run_mc, summarize
from .matcore import SymEig, is_spd, mat_exp, sym_eig, sym_sqrt_pd
from .noise import IncrementArray, NoiseSpec, cov_V, quadratic_variation_ratio, sample_increments
from .ratesio import RateSeries, PredictionReport, extract_increments, load_csv, predict_one_step
from .riccati import CareProblem, care_closed_form_B0, care_solve
from .simulate import (
    DIAGONAL_EXAMPLE,
    NONDIAGONAL_EXAMPLE,
    ModelParams,
    PathGrid,
    coupling_residual,
    simulate_path,
    simulate_stationary_U,
)

__version__ = "0.1.0"
