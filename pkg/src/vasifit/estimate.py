"""Moment estimators for the mean level, the noise scale and the
mean-reversion matrix of a discretely observed generalized Vasicek path.

All time integrals are trapezoidal on the observation grid.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import matcore
from .errors import (
    CareError,
    ConfigurationError,
    DegenerateInputError,
    DimensionError,
    GridError,
    InsufficientDataError,
    SingularityError,
    VasifitError,
)
from .noise import NoiseSpec, cov_V
from .riccati import CareProblem, care_residual, care_solve
from .simulate import PathGrid

QV_WINDOWS = ("all_increments", "unit_interval")


@dataclass(frozen=True)
class EstimationConfig:
    """Tuning of the estimation pipeline.

    ``t_upper`` is the time instance of the Riccati coefficients (upper bound
    of the lag integrals).  ``lag_step`` defaults to the path step.  When
    ``t_upper`` is not a multiple of the lag step it is rounded down to the
    nearest multiple; the value actually used is reported in the fit
    diagnostics.
    """

    t_upper: float = 5.0
    lag_step: Optional[float] = None
    qv_window: str = "all_increments"
    clip_eps: float = matcore.CLIP_EPS
    care_tol: float = 1e-9

    def __post_init__(self):
        if not self.t_upper > 0:
            raise ConfigurationError(f"estimation.t_upper must be > 0, got {self.t_upper}")
        if self.lag_step is not None and not self.lag_step > 0:
            raise ConfigurationError(f"estimation.lag_step must be > 0, got {self.lag_step}")
        if self.qv_window not in QV_WINDOWS:
            raise ConfigurationError(
                f"estimation.qv_window must be one of {QV_WINDOWS}, got {self.qv_window!r}"
            )
        if not self.clip_eps >= 0:
            raise ConfigurationError(f"estimation.clip_eps must be >= 0, got {self.clip_eps}")
        if not self.care_tol > 0:
            raise ConfigurationError(f"estimation.care_tol must be > 0, got {self.care_tol}")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class LagCovariance:
    """``values[j]`` is the estimated autocovariance at lag ``j * lag_step``."""

    lag_step: float
    values: np.ndarray = field(repr=False)
    window: float = math.nan

    @property
    def t_upper(self):
        return (len(self.values) - 1) * self.lag_step

    def lags(self):
        return self.lag_step * np.arange(len(self.values))

    def to_csv(self, path):
        d = self.values.shape[1]
        header = ["lag"] + [f"g{i + 1}{j + 1}" for i in range(d) for j in range(d)]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for s, g in zip(self.lags(), self.values):
                writer.writerow([f"{s:.17g}"] + [f"{v:.17g}" for v in g.ravel()])


def _trapezoid_weights(n_intervals, h):
    w = np.full(n_intervals + 1, h)
    w[0] = w[-1] = 0.5 * h
    return w


def estimate_b(path: PathGrid) -> np.ndarray:
    """Time average of the path over its full duration."""
    ref = path.values[:, 0]
    w = _trapezoid_weights(path.n, path.h) / path.duration
    return ref + (path.values - ref[:, None]) @ w


def _lag_grid(path: PathGrid, cfg: EstimationConfig):
    h = path.h
    lag_step = h if cfg.lag_step is None else float(cfg.lag_step)
    ratio = lag_step / h
    stride = int(round(ratio))
    if stride < 1 or abs(ratio - stride) > 1e-9 * max(ratio, 1.0):
        raise GridError(f"lag_step={lag_step} is not an integer multiple of the path step h={h}")
    lag_step = stride * h
    n_lags = int(math.floor(cfg.t_upper / lag_step + 1e-9))
    if n_lags < 1:
        raise GridError(f"t_upper={cfg.t_upper} is shorter than one lag step ({lag_step})")
    t_eff = n_lags * lag_step
    if not t_eff < path.duration / 2:
        raise InsufficientDataError(
            f"path duration {path.duration} must exceed twice the lag range {t_eff}"
        )
    return stride, n_lags, lag_step, t_eff


def estimate_gamma(path: PathGrid, cfg: EstimationConfig = EstimationConfig()) -> LagCovariance:
    """Autocovariance estimates on the lag grid ``0, lag_step, ..., t_upper``.

    Every lag uses the same window ``[0, T]`` with ``T = duration - t_upper``,
    and both factors are centered by the path mean over that window.
    """
    stride, n_lags, lag_step, t_eff = _lag_grid(path, cfg)
    n_window = path.n - n_lags * stride
    window = n_window * path.h
    w = _trapezoid_weights(n_window, path.h) / window
    y = path.values - path.values[:, :1]
    mean = y[:, : n_window + 1] @ w
    z = y - mean[:, None]
    base = z[:, : n_window + 1].T
    values = np.empty((n_lags + 1, path.d, path.d))
    for j in range(n_lags + 1):
        shift = j * stride
        values[j] = (z[:, shift : shift + n_window + 1] * w) @ base
    values[0] = matcore.symmetrize(values[0])
    return LagCovariance(lag_step=lag_step, values=values, window=window)


def _qv_increments(path: PathGrid, cfg: EstimationConfig):
    dr = np.diff(path.values, axis=1)
    if cfg.qv_window == "unit_interval":
        n_unit = int(math.floor(1.0 / path.h + 1e-9))
        if n_unit < 1:
            raise InsufficientDataError(f"no complete increment inside [0, 1] for h={path.h}")
        dr = dr[:, :n_unit]
    return dr


def estimate_sigma_sq(path: PathGrid, spec: NoiseSpec, cfg: EstimationConfig = EstimationConfig()) -> np.ndarray:
    """Quadratic-variation estimate ``V(h)^{-1} (1/n) sum dr dr^T`` of ``sigma sigma^T``."""
    if spec.d != path.d:
        raise DimensionError(f"noise has d={spec.d}, path has d={path.d}")
    V = cov_V(spec, path.h)
    if not np.all(np.diag(V) > np.finfo(float).tiny):
        raise SingularityError(
            f"noise covariance V(h) is singular at h={path.h}; sigma is not identifiable"
        )
    dr = _qv_increments(path, cfg)
    qv = dr @ dr.T / dr.shape[1]
    return matcore.symmetrize(np.linalg.solve(V, qv))


def build_BCD(gamma: LagCovariance, sigma_sq, spec: NoiseSpec, cfg: EstimationConfig = EstimationConfig()):
    """Riccati coefficients from estimated autocovariances.

    ``B = int_0^t (g - g^T)``, ``C = 2 int_0^t (t - s) sym(g(s)) ds`` and
    ``D = sigma V(t) sigma^T - (2 g(0) - g(t) - g(t)^T)`` with ``sigma`` the
    symmetric root of ``sigma_sq``.  B is returned exactly antisymmetric,
    C and D exactly symmetric.
    """
    G = np.asarray(gamma.values, dtype=float)
    t = gamma.t_upper
    s = gamma.lags()
    w = _trapezoid_weights(len(s) - 1, gamma.lag_step)
    Gt = np.transpose(G, (0, 2, 1))
    B = np.tensordot(w, G - Gt, axes=1)
    C = np.tensordot(w * (t - s), G + Gt, axes=1)
    sigma_hat = matcore.sym_sqrt_pd(sigma_sq, clip_eps=cfg.clip_eps)
    D = sigma_hat @ cov_V(spec, t) @ sigma_hat.T - (2.0 * G[0] - G[-1] - G[-1].T)
    B = 0.5 * (B - B.T)
    C = 0.5 * (C + C.T)
    D = 0.5 * (D + D.T)
    return B, C, D


def _json_matrix(M):
    return np.asarray(M, dtype=float).tolist()


@dataclass
class FitResult:
    theta_hat: np.ndarray
    b_hat: np.ndarray
    sigma_hat: np.ndarray
    sigma_sq_hat: np.ndarray
    B_hat: np.ndarray
    C_hat: np.ndarray
    D_hat: np.ndarray
    care_residual: float
    diagnostics: dict = field(default_factory=dict)
    gamma: Optional[LagCovariance] = field(default=None, repr=False, compare=False)

    @property
    def d(self):
        return self.b_hat.size

    def recompute_residual(self):
        return care_residual(self.B_hat, self.C_hat, self.D_hat, self.theta_hat)

    def to_dict(self):
        return {
            "theta_hat": _json_matrix(self.theta_hat),
            "b_hat": _json_matrix(self.b_hat),
            "sigma_hat": _json_matrix(self.sigma_hat),
            "sigma_sq_hat": _json_matrix(self.sigma_sq_hat),
            "B_hat": _json_matrix(self.B_hat),
            "C_hat": _json_matrix(self.C_hat),
            "D_hat": _json_matrix(self.D_hat),
            "care_residual": float(self.care_residual),
            "diagnostics": self.diagnostics,
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_dict(cls, data):
        arr = {k: np.asarray(data[k], dtype=float) for k in (
            "theta_hat", "b_hat", "sigma_hat", "sigma_sq_hat", "B_hat", "C_hat", "D_hat")}
        return cls(care_residual=float(data["care_residual"]),
                   diagnostics=dict(data.get("diagnostics", {})), **arr)


def fit(path: PathGrid, spec: NoiseSpec, cfg: EstimationConfig = EstimationConfig()) -> FitResult:
    """Estimate ``(Theta, b, sigma)`` from one observed path.

    Raises an :class:`~vasifit.errors.EstimationError` subclass on degenerate
    input or when the Riccati equation has no positive definite solution;
    the exception's ``diagnostics`` attribute holds whatever was computed
    before the failure.
    """
    if spec.d != path.d:
        raise DimensionError(f"noise has d={spec.d}, path has d={path.d}")
    diagnostics = {"h": path.h, "n_steps": path.n, "duration": path.duration,
                   "qv_window": cfg.qv_window, "t_upper_requested": cfg.t_upper}
    b_hat = estimate_b(path)
    gamma = estimate_gamma(path, cfg)
    diagnostics.update(
        t_upper=gamma.t_upper,
        t_upper_snapped=bool(abs(gamma.t_upper - cfg.t_upper) > 1e-9 * cfg.t_upper),
        lag_step=gamma.lag_step,
        n_lags=len(gamma.values) - 1,
        window=gamma.window,
        gamma0_min_eig=matcore.min_sym_eigenvalue(gamma.values[0]),
    )
    sigma_sq = estimate_sigma_sq(path, spec, cfg)
    sq_eig = matcore.sym_eig(sigma_sq).eigenvalues
    diagnostics["sigma_sq_min_eig"] = float(sq_eig[-1])
    try:
        if sq_eig[0] <= cfg.clip_eps:
            raise DegenerateInputError(
                "quadratic variation of the path is zero; the noise scale is not identifiable"
            )
        sigma_hat, clipped = matcore.sym_sqrt_pd(sigma_sq, clip_eps=cfg.clip_eps, return_clipped=True)
        diagnostics["sigma_clipped"] = clipped
        B, C, D = build_BCD(gamma, sigma_sq, spec, cfg)
        diagnostics.update(B_norm=float(np.linalg.norm(B)), C_norm=float(np.linalg.norm(C)),
                           D_norm=float(np.linalg.norm(D)))
        theta_hat, info = care_solve(CareProblem(B, C, D, tol=cfg.care_tol), full_output=True)
    except VasifitError as exc:
        exc.diagnostics = dict(diagnostics, error=type(exc).__name__, b_hat=b_hat.tolist(),
                               sigma_sq_hat=sigma_sq.tolist())
        if isinstance(exc, CareError) and exc.B is not None:
            exc.diagnostics.update(B_hat=exc.B.tolist(), C_hat=exc.C.tolist(), D_hat=exc.D.tolist())
        raise
    diagnostics.update(
        solver_branch=info["branch"],
        newton_iterations=info["newton_iterations"],
        relative_residual=info["relative_residual"],
        theta_min_eig=matcore.min_sym_eigenvalue(theta_hat),
    )
    return FitResult(
        theta_hat=theta_hat,
        b_hat=b_hat,
        sigma_hat=sigma_hat,
        sigma_sq_hat=sigma_sq,
        B_hat=B,
        C_hat=C,
        D_hat=D,
        care_residual=care_residual(B, C, D, theta_hat),
        diagnostics=diagnostics,
        gamma=gamma,
    )
