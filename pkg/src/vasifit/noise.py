"""Stationary-increment noise drivers with independent components.

Three families are available: standard Brownian motion, fractional Brownian
motion (exact synthesis by circulant embedding of fractional Gaussian noise)
and a centered compound Poisson process with Gaussian jumps.  For each the
covariance ``V(t) = Cov(X_t)`` is known in closed form and is diagonal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, DomainError, SingularityError, SynthesisError

KINDS = ("brownian", "fbm", "compound_poisson")
CHOLESKY_MAX_POINTS = 2**15


@dataclass(frozen=True)
class NoiseSpec:
    """Descriptor of a noise family.

    ``hurst`` is only meaningful for ``kind="fbm"``; ``jump_rate`` and
    ``jump_std`` only for ``kind="compound_poisson"``.
    """

    kind: str = "fbm"
    d: int = 2
    hurst: Optional[float] = 0.5
    jump_rate: Optional[float] = None
    jump_std: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigurationError(f"noise.kind must be one of {KINDS}, got {self.kind!r}")
        if int(self.d) != self.d or self.d < 1:
            raise ConfigurationError(f"noise.d must be a positive integer, got {self.d!r}")
        if self.kind == "fbm":
            if self.hurst is None or not (0.0 < float(self.hurst) < 1.0):
                raise ConfigurationError(f"noise.hurst must be in (0, 1), got {self.hurst!r}")
        else:
            object.__setattr__(self, "hurst", None)
        if self.kind == "compound_poisson":
            for name in ("jump_rate", "jump_std"):
                value = getattr(self, name)
                if value is None or not float(value) > 0.0:
                    raise ConfigurationError(f"noise.{name} must be > 0, got {value!r}")
        else:
            object.__setattr__(self, "jump_rate", None)
            object.__setattr__(self, "jump_std", None)

    @property
    def self_similarity(self):
        """Exponent ``H`` with ``Var(X_t) ~ t^{2H}``."""
        return float(self.hurst) if self.kind == "fbm" else 0.5

    def variance(self, t):
        """Per-component variance of ``X_t``."""
        t = float(t)
        if t < 0:
            raise DomainError(f"noise covariance needs t >= 0, got {t}")
        if self.kind == "fbm":
            return t ** (2.0 * self.hurst)
        if self.kind == "brownian":
            return t
        return self.jump_rate * self.jump_std**2 * t

    def to_dict(self):
        out = {"kind": self.kind, "d": int(self.d)}
        if self.kind == "fbm":
            out["hurst"] = float(self.hurst)
        if self.kind == "compound_poisson":
            out["jump_rate"] = float(self.jump_rate)
            out["jump_std"] = float(self.jump_std)
        return out


@dataclass(frozen=True)
class IncrementArray:
    """Noise increments on a uniform grid; column ``k`` is ``X_{t_{k+1}} - X_{t_k}``."""

    h: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if self.h <= 0:
            raise DomainError(f"increment step must be > 0, got {self.h}")
        object.__setattr__(self, "values", values)

    @property
    def d(self):
        return self.values.shape[0]

    @property
    def n(self):
        return self.values.shape[1]

    def cumulative(self):
        """The noise path on the grid, starting from ``X_0 = 0``."""
        X = np.zeros((self.d, self.n + 1))
        np.cumsum(self.values, axis=1, out=X[:, 1:])
        return X


def cov_V(spec: NoiseSpec, t: float) -> np.ndarray:
    """Exact covariance matrix ``Cov(X_t)``."""
    return spec.variance(t) * np.eye(spec.d)


def component_rng(seed, replication=0, component=0):
    """Generator for one (replication, component) substream of a master seed."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(replication), int(component)))
    return np.random.default_rng(ss)


def fgn_autocovariance(hurst, n):
    """Autocovariance of unit-step fractional Gaussian noise at lags ``0..n-1``."""
    k = np.arange(n, dtype=float)
    H2 = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** H2 + np.abs(k - 1) ** H2 - 2.0 * k**H2)


@lru_cache(maxsize=32)
def _circulant_eigenvalues(hurst, n):
    rho = fgn_autocovariance(hurst, n + 1)
    c = np.concatenate([rho, rho[-2:0:-1]])
    lam = np.fft.fft(c).real
    lam.setflags(write=False)
    return lam


@lru_cache(maxsize=8)
def _toeplitz_cholesky(hurst, n):
    L = scipy.linalg.cholesky(scipy.linalg.toeplitz(fgn_autocovariance(hurst, n)), lower=True)
    L.setflags(write=False)
    return L


def sample_fgn(hurst, n, rng):
    """Exact unit-step fractional Gaussian noise of length ``n``.

    Davies-Harte circulant embedding; falls back to a Toeplitz Cholesky
    factor when the embedding has negative eigenvalues.
    """
    lam = _circulant_eigenvalues(float(hurst), int(n))
    m = lam.size
    if lam.min() >= -1e-10 * lam.max():
        z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        y = np.fft.fft(np.sqrt(np.maximum(lam, 0.0) / m) * z)
        return y.real[:n]
    if n > CHOLESKY_MAX_POINTS:
        raise SynthesisError(
            f"circulant embedding has negative eigenvalue {lam.min():.3e} and "
            f"n={n} exceeds the Cholesky fallback limit {CHOLESKY_MAX_POINTS}"
        )
    try:
        L = _toeplitz_cholesky(float(hurst), int(n))
    except np.linalg.LinAlgError as exc:
        raise SynthesisError(
            f"circulant embedding has negative eigenvalue {lam.min():.3e} and "
            f"Cholesky fallback failed: {exc}"
        ) from exc
    return L @ rng.standard_normal(n)


def sample_increments(spec: NoiseSpec, n: int, h: float, seed: int, replication: int = 0) -> IncrementArray:
    """Draw ``n`` increments at step ``h``.

    Component ``i`` uses the substream ``(seed, replication, i)``, so the
    output is a deterministic function of the arguments.
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"need at least one increment, got n={n}")
    if not h > 0:
        raise DomainError(f"step must be > 0, got h={h}")
    out = np.empty((spec.d, n))
    for i in range(spec.d):
        rng = component_rng(seed, replication, i)
        if spec.kind == "brownian":
            out[i] = np.sqrt(h) * rng.standard_normal(n)
        elif spec.kind == "fbm":
            out[i] = h**spec.hurst * sample_fgn(spec.hurst, n, rng)
        else:
            counts = rng.poisson(spec.jump_rate * h, n)
            out[i] = spec.jump_std * np.sqrt(counts) * rng.standard_normal(n)
    return IncrementArray(h=float(h), values=out)


def quadratic_variation_ratio(spec: NoiseSpec, n: int, seed: int, replication: int = 0) -> np.ndarray:
    """``V(1/n)^{-1} (1/n) sum dX dX^T`` for noise sampled on ``[0, 1]``.

    Tends to the identity as ``n`` grows.
    """
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    h = 1.0 / n
    V = cov_V(spec, h)
    if not np.all(np.diag(V) > np.finfo(float).tiny):
        raise SingularityError(f"V(1/n) is singular for n={n}")
    dX = sample_increments(spec, n, h, seed, replication).values
    qv = dX @ dX.T / n
    return np.linalg.solve(V, qv)


def fbm_covariance_zscores(hurst, n_grid=2**10, replications=5000, seed=0):
    """Standardized deviations of the sample covariance of fBm on ``k/n_grid``.

    Each entry ``(s, t)`` compares the Monte Carlo average of ``X_s X_t`` with
    ``(s^{2H} + t^{2H} - |t - s|^{2H}) / 2``, scaled by its Gaussian standard
    error ``sqrt((c_ss c_tt + c_st^2) / R)``.
    """
    spec = NoiseSpec(kind="fbm", d=1, hurst=hurst)
    h = 1.0 / n_grid
    paths = np.empty((replications, n_grid))
    for j in range(replications):
        paths[j] = np.cumsum(sample_increments(spec, n_grid, h, seed, replication=j).values[0])
    sample = paths.T @ paths / replications
    t = np.arange(1, n_grid + 1) * h
    H2 = 2.0 * hurst
    exact = 0.5 * (t[:, None] ** H2 + t[None, :] ** H2 - np.abs(t[:, None] - t[None, :]) ** H2)
    var = np.diag(exact)
    se = np.sqrt((np.outer(var, var) + exact**2) / replications)
    return (sample - exact) / se
