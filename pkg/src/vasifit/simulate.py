"""Euler-Maruyama simulation of the generalized Vasicek model.

The model is ``dr_t = Theta (b - r_t) dt + sigma dX_t`` with a symmetric
positive definite mean-reversion matrix ``Theta``, a mean level ``b`` and a
diagonal noise scale ``sigma``.  The stationary process ``U`` is the ``b = 0``
solution started from its invariant law.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from . import matcore
from .errors import ConfigurationError, DimensionError, DomainError, SchemaError
from .noise import IncrementArray


@dataclass(frozen=True)
class ModelParams:
    """Parameter triple ``(theta, b, sigma)``.

    ``sigma`` may be given as a vector of diagonal entries.
    """

    theta: np.ndarray
    b: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        theta = np.atleast_2d(np.asarray(self.theta, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        sigma = np.asarray(self.sigma, dtype=float)
        if sigma.ndim <= 1:
            sigma = np.diag(np.atleast_1d(sigma))
        d = b.size
        if theta.shape != (d, d) or sigma.shape != (d, d) or b.ndim != 1:
            raise DimensionError(
                f"inconsistent shapes: theta {theta.shape}, b {b.shape}, sigma {sigma.shape}"
            )
        if not matcore.is_symmetric(theta):
            raise ConfigurationError("model.theta must be symmetric")
        if not matcore.is_spd(theta):
            raise ConfigurationError("model.theta must be positive definite")
        if np.any(sigma != np.diag(np.diag(sigma))) or np.any(np.diag(sigma) <= 0):
            raise ConfigurationError("model.sigma must be diagonal with positive entries")
        object.__setattr__(self, "theta", matcore.symmetrize(theta))
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "sigma", sigma)

    @property
    def d(self):
        return self.b.size

    def to_dict(self):
        return {
            "theta": self.theta.tolist(),
            "b": self.b.tolist(),
            "sigma": np.diag(self.sigma).tolist(),
        }


# The two simulated configurations used throughout the tests and demos.
DIAGONAL_EXAMPLE = ModelParams(theta=np.diag([0.5, 0.3]), b=[0.0, 0.0], sigma=[1.0, 1.0])
NONDIAGONAL_EXAMPLE = ModelParams(theta=[[0.5, 0.1], [0.1, 0.3]], b=[1.0, 3.0], sigma=[1.0, 2.0])


@dataclass(frozen=True)
class PathGrid:
    """A uniformly sampled d-dimensional path; column ``k`` is ``r_{t0 + k h}``."""

    t0: float
    h: float
    values: np.ndarray = field(repr=False)
    diagnostics: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if not self.h > 0:
            raise DomainError(f"path step must be > 0, got {self.h}")
        if values.shape[1] < 2:
            raise DomainError("a path needs at least two grid points")
        if not np.all(np.isfinite(values)):
            raise DomainError("path contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def d(self):
        return self.values.shape[0]

    @property
    def n(self):
        """Number of steps (grid points minus one)."""
        return self.values.shape[1] - 1

    @property
    def duration(self):
        return self.n * self.h

    def times(self):
        return self.t0 + self.h * np.arange(self.n + 1)

    def shifted(self, c):
        c = np.asarray(c, dtype=float).reshape(-1, 1)
        return PathGrid(self.t0, self.h, self.values + c)

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t"] + [f"r{i + 1}" for i in range(self.d)])
            for t, col in zip(self.times(), self.values.T):
                writer.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in col])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if not rows or not rows[0] or rows[0][0] != "t":
            raise SchemaError(f"{path}: expected header starting with 't'")
        try:
            data = np.array([[float(x) for x in row] for row in rows[1:] if row], dtype=float)
        except ValueError as exc:
            raise SchemaError(f"{path}: non-numeric entry ({exc})") from exc
        if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != len(rows[0]):
            raise SchemaError(f"{path}: need at least two complete rows")
        t = data[:, 0]
        n = t.size - 1
        h = (t[-1] - t[0]) / n
        if not h > 0 or np.max(np.abs(np.diff(t) - h)) > 1e-9 * max(abs(h), abs(t[-1])):
            raise SchemaError(f"{path}: time column is not uniformly spaced")
        return cls(t0=float(t[0]), h=float(h), values=data[:, 1:].T.copy())


def _check_dims(params, inc):
    if inc.d != params.d:
        raise DimensionError(f"increments have d={inc.d}, model has d={params.d}")


def simulate_path(params: ModelParams, inc: IncrementArray, r0=None) -> PathGrid:
    """Euler-Maruyama path ``r_{k+1} = r_k + Theta (b - r_k) h + sigma dX_k``.

    ``r0`` defaults to ``b``.  If ``h * ||Theta||_2 >= 2`` the explicit scheme
    is unstable; this is recorded in ``diagnostics['stability_warning']``.
    """
    _check_dims(params, inc)
    h = inc.h
    r0 = params.b.copy() if r0 is None else np.asarray(r0, dtype=float).reshape(-1)
    if r0.size != params.d:
        raise DimensionError(f"r0 has {r0.size} entries, model has d={params.d}")
    theta, b = params.theta, params.b
    noise = params.sigma @ inc.values
    out = np.empty((params.d, inc.n + 1))
    out[:, 0] = r = r0
    for k in range(inc.n):
        r = r + (theta @ (b - r)) * h + noise[:, k]
        out[:, k + 1] = r
    stiffness = h * np.linalg.norm(theta, 2)
    diagnostics = {"stiffness": float(stiffness), "stability_warning": bool(stiffness >= 2.0)}
    return PathGrid(0.0, h, out, diagnostics)


def min_burn_in(params: ModelParams, h: float) -> int:
    """Smallest burn-in with ``burn_in * h >= 10 / lambda_min(Theta)``."""
    lam_min = matcore.sym_eig(params.theta).eigenvalues[-1]
    return int(np.ceil(10.0 / (lam_min * h) - 1e-9))


def simulate_stationary_U(params: ModelParams, inc: IncrementArray, burn_in: int) -> PathGrid:
    """Approximate stationary ``U`` by running the ``b = 0`` recursion from 0.

    The first ``burn_in`` steps are discarded; the returned grid starts at
    time ``burn_in * h`` and holds ``inc.n - burn_in + 1`` points.
    """
    required = min_burn_in(params, inc.h)
    if burn_in < required:
        raise ConfigurationError(
            f"burn_in={burn_in} too small; need at least {required} steps for h={inc.h}"
        )
    if burn_in >= inc.n:
        raise ConfigurationError(f"burn_in={burn_in} leaves no samples out of {inc.n} increments")
    centered = ModelParams(params.theta, np.zeros(params.d), params.sigma)
    full = simulate_path(centered, inc, np.zeros(params.d))
    return PathGrid(burn_in * inc.h, inc.h, full.values[:, burn_in:], full.diagnostics)


def coupling_residual(params: ModelParams, inc: IncrementArray, r0, U0, propagator="discrete") -> float:
    """Maximal gap in ``r_t = P_t (r0 - U0 - b) + b + U_t`` along the grid.

    ``r`` and ``U`` are simulated with the same increments (``U`` with
    ``b = 0``).  ``propagator="discrete"`` uses ``P_{kh} = (I - h Theta)^k``,
    for which the identity is exact up to rounding; ``"continuous"`` uses
    ``e^{-Theta t}`` and carries the Euler discretization error.
    """
    _check_dims(params, inc)
    r0 = np.asarray(r0, dtype=float).reshape(-1)
    U0 = np.asarray(U0, dtype=float).reshape(-1)
    r = simulate_path(params, inc, r0).values
    U = simulate_path(ModelParams(params.theta, np.zeros(params.d), params.sigma), inc, U0).values
    gap = r0 - U0 - params.b
    if propagator == "discrete":
        step = np.eye(params.d) - inc.h * params.theta
    elif propagator == "continuous":
        step = matcore.mat_exp(-inc.h * params.theta)
    else:
        raise ValueError(f"unknown propagator {propagator!r}")
    decay = np.empty_like(r)
    decay[:, 0] = g = gap
    for k in range(inc.n):
        g = step @ g
        decay[:, k + 1] = g
    predicted = decay + params.b[:, None] + U
    return float(np.max(np.linalg.norm(r - predicted, axis=0)))
