import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vasifit.errors import DegenerateEquationError, DomainError, NoPDSolutionError
from vasifit.riccati import CareProblem, care_closed_form_B0, care_residual, care_solve

from conftest import random_antisymmetric, random_spd

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def ou_integrals(theta, var, t):
    """C and D for a scalar OU autocovariance var * exp(-theta s), unit sigma, Brownian noise."""
    C = 2 * var * (t / theta - (1 - math.exp(-theta * t)) / theta**2)
    D = t - 2 * var * (1 - math.exp(-theta * t))
    return C, D


def test_identity_case():
    X = care_solve(CareProblem(np.zeros((2, 2)), np.eye(2), np.eye(2)))
    np.testing.assert_allclose(X, np.eye(2), atol=1e-12)


def test_scalar_ou():
    C, D = ou_integrals(0.5, 1.0, 5.0)
    assert C == pytest.approx(12.65668, abs=1e-5)
    assert D == pytest.approx(3.16417, abs=1e-5)
    X = care_solve(CareProblem([[0.0]], [[12.65668]], [[3.16417]]))
    assert X[0, 0] == pytest.approx(0.5, abs=1e-5)


def test_two_dimensional_ou():
    thetas, variances = (0.5, 0.3), (1.0, 5.0 / 3.0)
    CD = [ou_integrals(th, v, 5.0) for th, v in zip(thetas, variances)]
    C = np.diag([c for c, _ in CD])
    D = np.diag([d for _, d in CD])
    oracle = np.sqrt(np.diag(D) / np.diag(C))
    np.testing.assert_allclose(oracle, thetas, atol=1e-12)
    X = care_solve(CareProblem(np.zeros((2, 2)), C, D))
    np.testing.assert_allclose(X, np.diag(thetas), atol=1e-5)


def test_full_output_branch():
    X, info = care_solve(CareProblem(np.zeros((1, 1)), [[4.0]], [[1.0]]), full_output=True)
    assert info["branch"] in {"schur", "schur+newton"}
    assert info["relative_residual"] <= 1e-9


def test_closed_form_examples():
    np.testing.assert_allclose(care_closed_form_B0(np.eye(2), 4 * np.eye(2)), 2 * np.eye(2), atol=1e-14)
    assert care_closed_form_B0([[12.65668]], [[3.16417]])[0, 0] == pytest.approx(math.sqrt(3.16417 / 12.65668), abs=1e-12)
    assert care_closed_form_B0([[12.65668]], [[3.16417]])[0, 0] == pytest.approx(0.5, abs=1e-5)
    with pytest.raises(DomainError):
        care_closed_form_B0(np.diag([1.0, 0.0]), np.eye(2))


def test_closed_form_random_residuals():
    rng = np.random.default_rng(0)
    for _ in range(100):
        C, D = random_spd(rng, 3), random_spd(rng, 3)
        X = care_closed_form_B0(C, D)
        assert np.linalg.norm(X @ C @ X - D) <= 1e-9 * np.linalg.norm(D)


@settings(max_examples=60, deadline=None)
@given(seed=seeds, d=st.integers(1, 5))
def test_round_trip(seed, d):
    rng = np.random.default_rng(seed)
    theta, C = random_spd(rng, d), random_spd(rng, d)
    B = random_antisymmetric(rng, d)
    D = theta @ C @ theta - B.T @ theta - theta @ B
    p = CareProblem(B, C, D)
    X = care_solve(p)
    np.testing.assert_allclose(X, theta, atol=1e-7)
    assert np.linalg.norm(p.residual(X)) <= p.tol * p.residual_scale(X)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, d=st.integers(1, 4))
def test_oracle_agreement_b0(seed, d):
    rng = np.random.default_rng(seed)
    C, D = random_spd(rng, d), random_spd(rng, d)
    np.testing.assert_allclose(care_solve(CareProblem(np.zeros((d, d)), C, D)), care_closed_form_B0(C, D), atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(seed=seeds, alpha=st.floats(0.1, 10.0))
def test_scale_covariance(seed, alpha):
    rng = np.random.default_rng(seed)
    theta, C, B = random_spd(rng, 3), random_spd(rng, 3), random_antisymmetric(rng, 3)
    D = theta @ C @ theta - B.T @ theta - theta @ B
    # (C, D) -> (alpha C, D / alpha) with B fixed maps theta -> theta / alpha
    X = care_solve(CareProblem(B, alpha * C, D / alpha))
    np.testing.assert_allclose(X, theta / alpha, atol=1e-7 * max(1.0, 1 / alpha))


def test_degenerate_c():
    with pytest.raises(DegenerateEquationError) as info:
        care_solve(CareProblem(np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2)))
    assert info.value.D is not None


def test_no_pd_solution():
    # X C X = D with D negative definite has no real symmetric root
    with pytest.raises(NoPDSolutionError) as info:
        care_solve(CareProblem(np.zeros((2, 2)), np.eye(2), -np.eye(2)))
    np.testing.assert_array_equal(info.value.C, np.eye(2))


def test_problem_symmetrizes():
    p = CareProblem([[0.0, 1.0], [0.0, 0.0]], [[1.0, 0.2], [0.0, 1.0]], [[1.0, 0.0], [0.4, 1.0]])
    np.testing.assert_array_equal(p.B, -p.B.T)
    np.testing.assert_array_equal(p.C, p.C.T)
    np.testing.assert_array_equal(p.D, p.D.T)


def test_residual_helper():
    assert care_residual(np.zeros((1, 1)), np.eye(1), np.eye(1), np.eye(1)) == 0.0


def test_closed_form_fallback(monkeypatch):
    from vasifit import riccati
    from vasifit.errors import StructureError

    def broken(p):
        raise StructureError("forced", p.B, p.C, p.D)

    monkeypatch.setattr(riccati, "_stabilizing_schur", broken)
    X, info = care_solve(CareProblem(np.zeros((2, 2)), np.eye(2), 4 * np.eye(2)), full_output=True)
    assert info["branch"] == "closed_form"
    np.testing.assert_allclose(X, 2 * np.eye(2))
    with pytest.raises(StructureError):
        care_solve(CareProblem([[0.0, 1.0], [-1.0, 0.0]], np.eye(2), 4 * np.eye(2)))
