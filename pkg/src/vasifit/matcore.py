"""Dense matrix helpers: exponential, SPD square root, symmetric eigensystems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, DomainError, NotPSDError

RTOL = 1e-10
CLIP_EPS = 1e-12


def _as_square(A, name="A"):
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be a square matrix, got shape {A.shape}")
    return A


def symmetrize(M):
    M = np.asarray(M, dtype=float)
    return 0.5 * (M + M.T)


def is_symmetric(M, rtol=RTOL):
    M = np.asarray(M, dtype=float)
    scale = max(np.linalg.norm(M), 1.0)
    return bool(np.linalg.norm(M - M.T) <= rtol * scale)


@dataclass(frozen=True)
class SymEig:
    """Eigensystem of a symmetric matrix, eigenvalues sorted descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ Q.T


def sym_eig(M) -> SymEig:
    """Eigendecomposition of ``(M + M.T) / 2``."""
    M = _as_square(M, "M")
    w, Q = np.linalg.eigh(symmetrize(M))
    order = np.argsort(w)[::-1]
    return SymEig(eigenvalues=w[order], eigenvectors=Q[:, order])


def mat_exp(A):
    """Matrix exponential ``e^A``.

    Symmetric input goes through the eigendecomposition so that the result
    is symmetric to rounding; everything else uses scaling-and-squaring
    with a degree-13 Pade approximant (scipy's ``expm``).
    """
    A = _as_square(A)
    if not np.all(np.isfinite(A)):
        raise DomainError("matrix exponential needs finite entries")
    if np.array_equal(A, A.T):
        eig = sym_eig(A)
        Q = eig.eigenvectors
        E = (Q * np.exp(eig.eigenvalues)) @ Q.T
        return symmetrize(E)
    return scipy.linalg.expm(A)


def sym_sqrt_pd(M, clip_eps=CLIP_EPS, tol_neg=None, return_clipped=False):
    """Symmetric square root of a (numerically) positive semidefinite matrix.

    Parameters
    ----------
    M : (d, d) array_like
        Symmetrized internally.
    clip_eps : float
        Eigenvalues below this are raised to it before taking roots.
    tol_neg : float, optional
        Eigenvalues below ``-tol_neg`` raise :class:`NotPSDError`.
        Defaults to ``1e-8 * ||M||``.
    return_clipped : bool
        Also return whether any eigenvalue was clipped.
    """
    M = _as_square(M, "M")
    if not np.all(np.isfinite(M)):
        raise DomainError("square root needs finite entries")
    if clip_eps < 0:
        raise DomainError("clip_eps must be >= 0")
    if tol_neg is None:
        tol_neg = 1e-8 * np.linalg.norm(M)
    eig = sym_eig(M)
    w = eig.eigenvalues
    if w.size and w[-1] < -tol_neg:
        raise NotPSDError(
            f"matrix is not positive semidefinite: smallest eigenvalue {w[-1]:.3e}"
        )
    clipped = bool(np.any(w < clip_eps))
    w = np.maximum(w, clip_eps)
    Q = eig.eigenvectors
    S = symmetrize((Q * np.sqrt(w)) @ Q.T)
    if return_clipped:
        return S, clipped
    return S


def min_sym_eigenvalue(M):
    M = np.asarray(M, dtype=float)
    return float(np.linalg.eigvalsh(symmetrize(M))[0])


def is_spd(M, tol=0.0):
    """True iff the symmetric part of ``M`` has smallest eigenvalue > ``tol``."""
    M = _as_square(M, "M")
    if not np.all(np.isfinite(M)):
        return False
    return min_sym_eigenvalue(M) > tol
