"""Continuous-time algebraic Riccati equation for the mean-reversion matrix.

Solves ``B^T X + X B - X C X + D = 0`` for a symmetric positive definite
``X``, where ``B`` is antisymmetric, ``C`` symmetric positive semidefinite
and ``D`` symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import matcore
from .errors import (
    DegenerateEquationError,
    DomainError,
    NoPDSolutionError,
    NotPSDError,
    StructureError,
    SubspaceError,
)

DEFAULT_TOL = 1e-9
MAX_NEWTON = 50


@dataclass(frozen=True)
class CareProblem:
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        d = B.shape[0]
        for name, M in (("B", B), ("C", C), ("D", D)):
            if M.shape != (d, d):
                raise DomainError(f"{name} has shape {M.shape}, expected {(d, d)}")
            if not np.all(np.isfinite(M)):
                raise DomainError(f"{name} has non-finite entries")
        object.__setattr__(self, "B", 0.5 * (B - B.T))
        object.__setattr__(self, "C", matcore.symmetrize(C))
        object.__setattr__(self, "D", matcore.symmetrize(D))

    @property
    def d(self):
        return self.B.shape[0]

    def residual(self, X):
        return self.B.T @ X + X @ self.B - X @ self.C @ X + self.D

    def residual_scale(self, X):
        nx = np.linalg.norm(X)
        return (
            np.linalg.norm(self.D)
            + np.linalg.norm(self.B) * nx
            + np.linalg.norm(self.C) * nx**2
        )


def care_residual(B, C, D, X):
    """Frobenius norm of ``B^T X + X B - X C X + D``."""
    return float(np.linalg.norm(B.T @ X + X @ B - X @ C @ X + D))


def care_closed_form_B0(C, D):
    """Positive semidefinite root of ``X C X = D`` for symmetric PD ``C``.

    Uses ``X = C^{-1/2} (C^{1/2} D C^{1/2})^{1/2} C^{-1/2}``.
    """
    C = matcore.symmetrize(np.atleast_2d(np.asarray(C, dtype=float)))
    D = matcore.symmetrize(np.atleast_2d(np.asarray(D, dtype=float)))
    if not matcore.is_spd(C):
        raise DomainError("closed-form solution needs a positive definite C")
    eig = matcore.sym_eig(C)
    Q, w = eig.eigenvectors, eig.eigenvalues
    c_half = (Q * np.sqrt(w)) @ Q.T
    c_inv_half = (Q / np.sqrt(w)) @ Q.T
    inner = matcore.sym_sqrt_pd(c_half @ D @ c_half, clip_eps=0.0)
    return matcore.symmetrize(c_inv_half @ inner @ c_inv_half)


def _stabilizing_schur(p: CareProblem):
    d = p.d
    H = np.block([[p.B, -p.C], [-p.D, -p.B.T]])
    T, Z, sdim = scipy.linalg.schur(H, output="real", sort="lhp")
    if sdim != d:
        raise StructureError(
            f"Hamiltonian has {sdim} stable eigenvalues, expected {d}", p.B, p.C, p.D
        )
    U11, U21 = Z[:d, :d], Z[d:, :d]
    if np.linalg.cond(U11) > 1.0 / np.finfo(float).eps:
        raise SubspaceError("stable subspace basis U11 is singular", p.B, p.C, p.D)
    X = np.linalg.solve(U11.T, U21.T).T
    return matcore.symmetrize(X)


def _newton_refine(p: CareProblem, X, tol):
    """Kleinman-Newton iterations with step halving on residual growth."""
    res = np.linalg.norm(p.residual(X))
    iterations = 0
    while res > tol * p.residual_scale(X) and iterations < MAX_NEWTON:
        iterations += 1
        closed = p.B - p.C @ X
        try:
            step = scipy.linalg.solve_continuous_lyapunov(closed.T, -p.residual(X))
        except (np.linalg.LinAlgError, ValueError):
            break
        step = matcore.symmetrize(step)
        alpha = 1.0
        while alpha > 1e-4:
            candidate = X + alpha * step
            cand_res = np.linalg.norm(p.residual(candidate))
            if cand_res < res:
                break
            alpha *= 0.5
        else:
            break
        X, res = candidate, cand_res
    return X, iterations


def care_solve(p: CareProblem, full_output=False):
    """Symmetric positive definite solution of the Riccati equation.

    The stabilizing solution is read off the stable invariant subspace of the
    Hamiltonian ``[[B, -C], [-D, -B^T]]`` (ordered real Schur form), then
    polished by Newton iterations until the relative residual is below
    ``p.tol``.  When the Schur route fails and ``B`` is negligible the
    closed-form ``B = 0`` root is used instead.

    Returns
    -------
    X : ndarray
    info : dict
        Only with ``full_output=True``: ``branch`` (``schur``,
        ``schur+newton`` or ``closed_form``), ``newton_iterations``,
        ``residual`` and ``relative_residual``.
    """
    tol = p.tol
    nb, nc, nd = (np.linalg.norm(M) for M in (p.B, p.C, p.D))
    if nc <= 1e-14 * max(nb, nd) or nc == 0.0:
        raise DegenerateEquationError(
            "C is numerically zero; the equation does not identify the solution",
            p.B, p.C, p.D,
        )
    iterations = 0
    try:
        X = _stabilizing_schur(p)
        X, iterations = _newton_refine(p, X, tol)
        branch = "schur+newton" if iterations else "schur"
    except (StructureError, SubspaceError):
        if nb > tol * nc or not matcore.is_spd(p.C):
            raise
        try:
            X = care_closed_form_B0(p.C, p.D)
        except NotPSDError as exc:
            raise NoPDSolutionError(f"no positive semidefinite root of X C X = D: {exc}", p.B, p.C, p.D) from exc
        branch = "closed_form"
    X = matcore.symmetrize(X)
    res = np.linalg.norm(p.residual(X))
    scale = p.residual_scale(X)
    if not matcore.is_spd(X):
        raise NoPDSolutionError(
            f"Riccati solution is not positive definite "
            f"(smallest eigenvalue {matcore.min_sym_eigenvalue(X):.3e})",
            p.B, p.C, p.D,
        )
    if not res <= tol * scale:
        raise NoPDSolutionError(
            f"Riccati residual {res:.3e} exceeds tolerance {tol * scale:.3e}",
            p.B, p.C, p.D,
        )
    if full_output:
        info = {
            "branch": branch,
            "newton_iterations": iterations,
            "residual": float(res),
            "relative_residual": float(res / scale) if scale > 0 else 0.0,
        }
        return X, info
    return X
