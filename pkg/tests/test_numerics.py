import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import E1_1, GAMMA_GRID, SQRT_PI, function_integral
from qwl import numerics
from qwl.errors import DomainError, NonHermitianInput
from qwl.numerics import TolerancePolicy, hermitian_eig, min_eig_psd_test, upper_incomplete_gamma


def test_policy_defaults():
    tol = TolerancePolicy()
    assert (tol.eps_psd, tol.eps_eq, tol.eps_rank, tol.quad_rel_err) == (1e-9, 1e-9, 1e-10, 1e-10)


def test_policy_rejects_nonpositive():
    with pytest.raises(ValueError):
        TolerancePolicy(eps_psd=0.0)


def test_policy_overrides_skip_none():
    tol = TolerancePolicy().with_overrides(eps_psd=1e-6, eps_eq=None)
    assert tol.eps_psd == 1e-6 and tol.eps_eq == 1e-9


def test_strict_profile_from_env(monkeypatch):
    monkeypatch.setenv("QWL_TOLERANCE_PROFILE", "strict")
    assert numerics.policy_from_env().eps_psd == 1e-11
    monkeypatch.setenv("QWL_TOLERANCE_PROFILE", "bogus")
    with pytest.raises(ValueError):
        numerics.policy_from_env()


# ---------------------------------------------------------------- eigen

@pytest.mark.parametrize("A, expected", [
    (np.eye(2), [1.0, 1.0]),
    (np.diag([2.0, -1.0]), [2.0, -1.0]),
    (np.array([[0.0, 1.0], [1.0, 0.0]]), [1.0, -1.0]),
])
def test_hermitian_eig_examples(A, expected):
    w, V = hermitian_eig(A)
    assert np.allclose(w, expected, atol=1e-14)
    assert np.allclose(V.conj().T @ V, np.eye(2), atol=1e-14)


def test_hermitian_eig_rejects_nonhermitian():
    with pytest.raises(NonHermitianInput):
        hermitian_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


@given(st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_eig_reconstruction(n, seed):
    rng = np.random.default_rng(seed)
    A = numerics.random_hermitian(rng, n, scale=3.0)
    w, V = hermitian_eig(A)
    assert np.all(np.diff(w) <= 0)
    assert np.linalg.norm(V @ np.diag(w) @ V.conj().T - A) <= 1e-10 * max(1.0, np.linalg.norm(A))


# ------------------------------------------------------------- psd test

def test_psd_identity():
    assert min_eig_psd_test(np.eye(3)) == (True, None)


def test_psd_witness_is_e2():
    ok, v = min_eig_psd_test(np.diag([1.0, -1.0]))
    assert not ok
    assert np.allclose(np.abs(v), [0.0, 1.0])


def test_swap_matrix_not_psd():
    swap = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            swap[i * 2 + j, j * 2 + i] = 1.0
    ok, v = min_eig_psd_test(swap)
    assert not ok
    assert np.real(v.conj() @ swap @ v) == pytest.approx(-1.0)


def test_psd_floor_is_relative():
    A = np.diag([1e6, -1e-4])
    assert min_eig_psd_test(A)[0] is True
    assert min_eig_psd_test(A, TolerancePolicy(eps_psd=1e-12))[0] is False


# --------------------------------------------------------------- gamma

def test_gamma_one_is_exp():
    for x in (0.0, 0.3, 2.0, 17.0):
        assert upper_incomplete_gamma(1.0, x) == pytest.approx(math.exp(-x), rel=1e-14)


def test_gamma_half_at_zero():
    assert upper_incomplete_gamma(0.5, 0.0) == pytest.approx(SQRT_PI, rel=1e-14)


def test_gamma_zero_one_is_e1():
    assert upper_incomplete_gamma(0.0, 1.0) == pytest.approx(E1_1, rel=1e-13)


@pytest.mark.parametrize("s, x, ref", GAMMA_GRID)
def test_gamma_against_frozen_mpmath(s, x, ref):
    assert upper_incomplete_gamma(s, x) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("s", [-0.5, 0.5, 1.5])
@pytest.mark.parametrize("x", [0.1, 1.0, 10.0])
def test_gamma_recurrence(s, x):
    lhs = upper_incomplete_gamma(s + 1, x)
    rhs = s * upper_incomplete_gamma(s, x) + x ** s * math.exp(-x)
    assert lhs == pytest.approx(rhs, rel=1e-11)


@pytest.mark.parametrize("s", [-0.7, -0.3, 0.4, 1.2, 2.5])
@pytest.mark.parametrize("x", [0.02, 0.3, 1.0, 3.0, 12.0])
def test_gamma_against_quadrature(s, x):
    ref = function_integral(lambda u: u ** (s - 1) * math.exp(-u), x)
    assert upper_incomplete_gamma(s, x) == pytest.approx(ref, rel=1e-9)


def test_gamma_vectorized_matches_scalar():
    s = np.array([-0.5, 0.0, 0.5, 2.0])
    x = np.array([0.3, 1.0, 5.0, 0.0])
    vec = upper_incomplete_gamma(s, x)
    assert vec.shape == (4,)
    assert np.allclose(vec, [upper_incomplete_gamma(a, b) for a, b in zip(s, x)], rtol=1e-15)


@pytest.mark.parametrize("s, x", [(-1.0, 1.0), (-1.5, 2.0), (0.0, 0.0), (-0.5, 0.0), (1.0, -1.0)])
def test_gamma_domain_errors(s, x):
    with pytest.raises(DomainError):
        upper_incomplete_gamma(s, x)


def test_gamma_infinite_argument():
    assert upper_incomplete_gamma(0.5, math.inf) == 0.0


def test_lower_plus_upper_is_gamma():
    for s in (0.3, 1.0, 2.7):
        for x in (0.1, 2.0, 30.0):
            total = numerics.lower_incomplete_gamma(s, x) + upper_incomplete_gamma(s, x)
            assert total == pytest.approx(math.gamma(s), rel=1e-13)


# ----------------------------------------------------------- quadrature

@pytest.mark.parametrize("f, a, b, ref", [
    (lambda x: 1.0, 0.0, 1.0, 1.0),
    (lambda x: math.exp(-2 * x), 0.0, math.inf, 0.5),
    (lambda x: x ** -0.5, 0.0, 1.0, 2.0),
])
def test_adaptive_quadrature_examples(f, a, b, ref):
    assert numerics.adaptive_quadrature(f, a, b) == pytest.approx(ref, rel=1e-10)


def test_null_space_and_range():
    A = np.array([[1.0, 1.0], [1.0, 1.0]])
    N = numerics.null_space(A, 1e-10)
    R = numerics.range_basis(A, 1e-10)
    assert N.shape == (2, 1) and R.shape == (2, 1)
    assert np.allclose(A @ N, 0)
