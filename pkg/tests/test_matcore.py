import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vasifit.errors import DimensionError, DomainError, NotPSDError
from vasifit.matcore import is_spd, mat_exp, sym_eig, sym_sqrt_pd

from conftest import random_spd

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_mat_exp_zero_is_identity():
    np.testing.assert_array_equal(mat_exp(np.zeros((2, 2))), np.eye(2))


def test_mat_exp_diagonal():
    np.testing.assert_allclose(mat_exp(np.diag([math.log(2), math.log(3)])), np.diag([2.0, 3.0]), rtol=1e-12)


def test_mat_exp_scalar_oracle():
    expected = np.diag([math.exp(-2.5), math.exp(-1.5)])
    np.testing.assert_allclose(mat_exp(-5 * np.diag([0.5, 0.3])), expected, atol=1e-12)


def test_mat_exp_nonsymmetric_rotation():
    a = 0.7
    R = mat_exp(np.array([[0.0, -a], [a, 0.0]]))
    np.testing.assert_allclose(R, [[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]], atol=1e-14)


def test_mat_exp_errors():
    with pytest.raises(DimensionError):
        mat_exp(np.zeros((2, 3)))
    with pytest.raises(DomainError):
        mat_exp(np.array([[np.nan, 0.0], [0.0, 1.0]]))


@settings(max_examples=50, deadline=None)
@given(seed=seeds, d=st.integers(1, 6))
def test_mat_exp_inverse_pair(seed, d):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, d))
    A *= rng.uniform(0, 10) / max(np.linalg.norm(A, 2), 1e-12)
    E, F = mat_exp(A), mat_exp(-A)
    # forward error of scaling-and-squaring grows with ||A|| and with the
    # conditioning of the pair; non-normal A puts a heavy tail on the constant
    # (worst of 2e4 random draws: about 650)
    tol = 1e4 * np.finfo(float).eps * (1 + np.linalg.norm(A, 2)) * np.linalg.norm(E, 2) * np.linalg.norm(F, 2)
    np.testing.assert_allclose(E @ F, np.eye(d), rtol=0, atol=tol)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, d=st.integers(1, 8))
def test_mat_exp_symmetric_spectrum(seed, d):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((d, d))
    A = A + A.T
    E = mat_exp(A)
    np.testing.assert_array_equal(E, E.T)
    assert is_spd(E)
    w = sym_eig(E).eigenvalues
    # small eigenvalues are only resolved to eps * ||E|| in absolute terms
    np.testing.assert_allclose(w, np.exp(sym_eig(A).eigenvalues), rtol=1e-10,
                               atol=64 * np.finfo(float).eps * w[0])


def test_sym_sqrt_examples():
    np.testing.assert_array_equal(sym_sqrt_pd(np.eye(2)), np.eye(2))
    np.testing.assert_allclose(sym_sqrt_pd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)
    a, b = (math.sqrt(3) + 1) / 2, (math.sqrt(3) - 1) / 2
    np.testing.assert_allclose(sym_sqrt_pd([[2.0, 1.0], [1.0, 2.0]]), [[a, b], [b, a]], atol=1e-9)


def test_sym_sqrt_clipping_and_negative():
    S, clipped = sym_sqrt_pd(np.zeros((2, 2)), return_clipped=True)
    assert clipped
    np.testing.assert_allclose(S, 1e-6 * np.eye(2))
    _, clipped = sym_sqrt_pd(np.eye(2), return_clipped=True)
    assert not clipped
    with pytest.raises(NotPSDError):
        sym_sqrt_pd(np.diag([1.0, -0.5]))


@settings(max_examples=50, deadline=None)
@given(seed=seeds, d=st.integers(1, 6))
def test_sym_sqrt_roundtrip(seed, d):
    S = random_spd(np.random.default_rng(seed), d, 0.1, 10.0)
    np.testing.assert_allclose(sym_sqrt_pd(S @ S), S, atol=1e-8)


@settings(max_examples=50, deadline=None)
@given(seed=seeds, d=st.integers(1, 8))
def test_sym_eig_invariants(seed, d):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((d, d))
    M = M + M.T
    eig = sym_eig(M)
    Q = eig.eigenvectors
    assert np.all(np.diff(eig.eigenvalues) <= 0)
    np.testing.assert_allclose(eig.reconstruct(), M, atol=1e-10 * np.linalg.norm(M))
    np.testing.assert_allclose(Q.T @ Q, np.eye(d), atol=1e-12)


def test_is_spd():
    assert is_spd(np.eye(2), 0.0)
    assert not is_spd(np.diag([1.0, -1.0]), 0.0)
    theta = np.array([[0.5, 0.1], [0.1, 0.3]])
    assert is_spd(theta, 0.0)
    np.testing.assert_allclose(sym_eig(theta).eigenvalues, [0.4 + math.sqrt(0.02), 0.4 - math.sqrt(0.02)])
    assert not is_spd(np.array([[np.inf, 0.0], [0.0, 1.0]]))
