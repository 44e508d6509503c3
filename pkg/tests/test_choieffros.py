import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import is_psd
from qwl import numerics
from qwl.choieffros import (
    compression_extension,
    jankowski_idempotent,
    matrix_units,
    plus_minus,
    range_commutant,
    same_range,
    star,
    support_projection,
    theorem54_compression_check,
    verify_idempotent,
)
from qwl.errors import (
    HypothesisViolated,
    NotIdempotent,
    NotPositive,
    NumericallyDegenerateCenter,
    OperandOutsideRange,
)
from qwl.superop import SuperOperator

seeds = st.integers(0, 2**31 - 1)


def e(d, i, j):
    E = np.zeros((d, d), dtype=complex)
    E[i, j] = 1.0
    return E


def pinching(d):
    return SuperOperator.from_kraus([e(d, i, i) for i in range(d)])


def partial_trace_idempotent(rho):
    """A -> Tr_2[(I x rho^1/2) A (I x rho^1/2)] x I_2 on M_4; range {a x I_2}."""
    w, V = np.linalg.eigh(rho)
    r = V @ np.diag(np.sqrt(np.clip(w, 0, None))) @ V.conj().T
    S = np.kron(np.eye(2), r)

    def f(A):
        B = (S @ A @ S).reshape(2, 2, 2, 2)
        return np.kron(np.einsum("ikjk->ij", B), np.eye(2))

    return SuperOperator.from_function(f, 4)


def idempotent_zoo():
    rng = np.random.default_rng(11)
    rho = numerics.random_hermitian(rng, 2)
    rho = rho @ rho
    return {
        "identity": SuperOperator.identity(3),
        "pinching": pinching(3),
        "jankowski-0.5": jankowski_idempotent(0.5),
        "jankowski-0.2": jankowski_idempotent(0.2),
        "partial-trace-pure": partial_trace_idempotent(np.diag([1.0, 0.0])),
        "partial-trace-mixed": partial_trace_idempotent(rho / np.trace(rho)),
    }


ZOO = idempotent_zoo()


def random_range_element(L, rng, hermitian=False):
    A = numerics.random_complex(rng, (L.dim_in, L.dim_in))
    if hermitian:
        A = A + A.conj().T
    return L(A)


# ------------------------------------------------------ verify / support

def test_verify_examples():
    assert verify_idempotent(SuperOperator.identity(2))
    assert verify_idempotent(pinching(3))
    v = verify_idempotent(0.5 * SuperOperator.identity(2))
    assert not v and not v.detail["idempotent"]


@pytest.mark.parametrize("lam", [0.1, 0.5, 1.0])
def test_jankowski_is_idempotent(lam):
    L = jankowski_idempotent(lam)
    assert np.allclose((L @ L).action, L.action)
    assert verify_idempotent(L)


def test_support_examples():
    assert np.allclose(support_projection(SuperOperator.identity(3)), np.eye(3))
    assert np.allclose(support_projection(pinching(3)), np.eye(3))
    assert np.allclose(support_projection(jankowski_idempotent(0.5)), np.diag([1, 1, 0]))


def test_support_requires_idempotent():
    with pytest.raises(NotIdempotent):
        support_projection(0.5 * SuperOperator.identity(2))


@pytest.mark.parametrize("name", list(ZOO))
def test_support_is_minimal(name):
    L = ZOO[name]
    F = support_projection(L)
    p = L.dim_in
    assert np.allclose(L(F), L(np.eye(p)), atol=1e-10)
    # no nonzero positive part of the F-corner is killed by L
    G = np.array([[np.trace(L(e(p, a, b))) for b in range(p)] for a in range(p)]).T
    Vf = numerics.range_basis(F, 1e-9)
    assert np.min(np.linalg.eigvalsh(Vf.conj().T @ G @ Vf)) > 1e-9


@pytest.mark.parametrize("name", list(ZOO))
def test_choi_effros_identities(name, rng):
    L = ZOO[name]
    p = L.dim_in
    for _ in range(5):
        A, B = numerics.random_complex(rng, (p, p)), numerics.random_complex(rng, (p, p))
        x = L(L(A) @ B)
        assert np.allclose(x, L(L(A) @ L(B)), atol=1e-10)
        assert np.allclose(L(A @ L(B)), L(L(A) @ L(B)), atol=1e-10)


@pytest.mark.parametrize("name", list(ZOO))
def test_compressed_map_is_multiplicative(name, rng):
    L = ZOO[name]
    F = support_projection(L)
    p = L.dim_in
    phi = SuperOperator.sandwich(F) @ L
    for _ in range(5):
        A, B = numerics.random_complex(rng, (p, p)), numerics.random_complex(rng, (p, p))
        assert np.allclose(phi(phi(A) @ phi(B)), phi(A) @ phi(B), atol=1e-10)


@pytest.mark.parametrize("name", list(ZOO))
def test_range_splits_along_support(name, rng):
    L = ZOO[name]
    F = support_projection(L)
    G = np.eye(L.dim_in) - F
    for _ in range(5):
        X = random_range_element(L, rng)
        assert np.allclose(X @ F, F @ X, atol=1e-10)
        phiX = F @ X @ F
        assert np.allclose(X, phiX + G @ L(phiX) @ G, atol=1e-10)


# ----------------------------------------------------------------- star

def test_star_examples():
    L = jankowski_idempotent(0.5)
    f22 = np.diag([0, 1, 0.5]).astype(complex)
    assert np.allclose(star(L, f22, f22), f22)
    I_o = L(np.eye(3))
    A = L(np.arange(9.0).reshape(3, 3))
    assert np.allclose(star(L, A, I_o), A)


def test_star_matrix_unit_law():
    st_ = matrix_units(jankowski_idempotent(0.5))
    E = st_.factors[0].units
    assert np.allclose(star(st_.L, E[0, 1], E[1, 0]), E[0, 0], atol=1e-10)


def test_star_rejects_outside_operand():
    L = jankowski_idempotent(0.5)
    with pytest.raises(OperandOutsideRange):
        star(L, e(3, 2, 2), np.eye(3))


@pytest.mark.parametrize("name", list(ZOO))
@given(seed=seeds)
def test_star_associative_and_adjoint_compatible(name, seed):
    L = ZOO[name]
    rng = np.random.default_rng(seed)
    A, B, C = (random_range_element(L, rng) for _ in range(3))
    assert np.max(np.abs(star(L, star(L, A, B), C) - star(L, A, star(L, B, C)))) <= 1e-9
    assert np.max(np.abs(star(L, A, B).conj().T - star(L, B.conj().T, A.conj().T))) <= 1e-9


# --------------------------------------------------------- matrix units

def assert_unit_laws(st_):
    p = st_.dim
    total = np.zeros((p, p), dtype=complex)
    for fac in st_.factors:
        E = fac.units
        for i in range(fac.q):
            total += E[i, i]
            for j in range(fac.q):
                assert np.allclose(E[i, j].conj().T, E[j, i], atol=1e-9)
                for n in range(fac.q):
                    for m in range(fac.q):
                        want = E[i, m] if j == n else 0 * E[i, m]
                        assert np.allclose(star(st_.L, E[i, j], E[n, m]), want, atol=1e-9)
    assert np.allclose(total, st_.I_o, atol=1e-9)


def test_units_identity():
    st_ = matrix_units(SuperOperator.identity(2), hint=np.diag([2.0, 1.0]))
    assert [f.q for f in st_.factors] == [2]
    E = st_.factors[0].units
    for i in range(2):
        for j in range(2):
            assert np.allclose(E[i, j], e(2, i, j), atol=1e-10)


def test_units_pinching():
    st_ = matrix_units(pinching(2))
    assert sorted(f.q for f in st_.factors) == [1, 1]
    assert_unit_laws(st_)


def test_units_jankowski():
    st_ = matrix_units(jankowski_idempotent(0.5), hint=np.diag([2.0, 1.0, 0.5]))
    assert [f.q for f in st_.factors] == [2]
    E = st_.factors[0].units
    assert np.allclose(E[0, 0], e(3, 0, 0), atol=1e-10)
    assert np.allclose(E[0, 1], e(3, 0, 1), atol=1e-10)
    assert np.allclose(E[1, 0], e(3, 1, 0), atol=1e-10)
    assert np.allclose(E[1, 1], np.diag([0, 1, 0.5]), atol=1e-10)


@pytest.mark.parametrize("name", list(ZOO))
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_unit_laws_on_zoo(name, seed):
    assert_unit_laws(matrix_units(ZOO[name], seed=seed))


@pytest.mark.parametrize("name", list(ZOO))
def test_diagonal_minus_kills_other_rows(name):
    st_ = matrix_units(ZOO[name])
    for fac in st_.factors:
        E = fac.units
        for i in range(fac.q):
            Em = plus_minus(E[i, i])[1]
            for j in range(fac.q):
                if j == i:
                    continue
                for k in range(fac.q):
                    assert np.allclose(Em @ E[j, k], 0, atol=1e-9)


@pytest.mark.parametrize("name", list(ZOO))
@given(seed=seeds)
def test_star_norm_split_bound(name, seed):
    L = ZOO[name]
    rng = np.random.default_rng(seed)
    st_ = matrix_units(L)
    X = random_range_element(L, rng)
    T = star(L, X, X.conj().T)
    I_o = st_.I_o
    for fac in st_.factors:
        E = fac.units[0, 0]
        a = star(L, star(L, E, T), E)
        b = star(L, star(L, I_o - E, T), I_o - E)
        assert np.linalg.norm(T, 2) <= np.linalg.norm(a, 2) + np.linalg.norm(b, 2) + 1e-9


def test_lambda_one_warns():
    st_ = matrix_units(jankowski_idempotent(1.0))
    assert st_.warnings
    assert not matrix_units(jankowski_idempotent(0.5)).warnings


# ------------------------------------------------------------ plus_minus

def test_plus_minus_examples():
    Q = e(3, 0, 0) + e(3, 2, 2)
    plus, minus = plus_minus(Q)
    assert np.allclose(plus, Q) and np.allclose(minus, Q)
    plus, minus = plus_minus(np.diag([0.5, 0.0]))
    assert np.allclose(plus, e(2, 0, 0)) and np.allclose(minus, 0)
    plus, minus = plus_minus(np.diag([0, 1, 0.25]))
    assert np.allclose(plus, np.diag([0, 1, 1])) and np.allclose(minus, np.diag([0, 1, 0]))


def test_plus_minus_errors():
    with pytest.raises(NotPositive):
        plus_minus(np.diag([1.0, -0.5]))
    with pytest.raises(NumericallyDegenerateCenter):
        plus_minus(np.diag([1.0 - 5e-9, 0.0]))


# ------------------------------------------------------- support projection P

def test_p_examples():
    assert np.allclose(matrix_units(SuperOperator.identity(3)).P, np.eye(3))
    assert np.allclose(matrix_units(pinching(3)).P, np.eye(3))
    assert np.allclose(matrix_units(jankowski_idempotent(0.5)).P, np.diag([1, 1, 0]), atol=1e-10)


@pytest.mark.parametrize("name", list(ZOO))
def test_p_properties(name):
    st_ = matrix_units(ZOO[name])
    P = st_.P
    assert is_psd(P - st_.F, 1e-9)
    assert np.allclose(P @ st_.I_o, P, atol=1e-9)
    assert np.allclose(st_.I_o @ P, P, atol=1e-9)
    for B in st_.range_basis:
        assert np.allclose(P @ B, B @ P, atol=1e-9)
    # P lies in the double commutant
    for X in range_commutant(st_):
        assert np.allclose(P @ X, X @ P, atol=1e-9)


@given(seed=seeds)
def test_p_independent_of_idempotent(seed):
    rng = np.random.default_rng(seed)
    h = numerics.random_hermitian(rng, 2)
    rho = h @ h + 1e-3 * np.eye(2)
    L1 = partial_trace_idempotent(np.diag([1.0, 0.0]))
    L2 = partial_trace_idempotent(rho / np.trace(rho))
    assert same_range(L1, L2)
    s1, s2 = matrix_units(L1), matrix_units(L2)
    assert not np.allclose(s1.F, s2.F)
    assert np.allclose(s1.P, s2.P, atol=1e-9)
    A = numerics.random_complex(rng, (4, 4))
    for L, s in ((L1, s1), (L2, s2)):
        assert np.allclose(L(A), L(s.P @ A @ s.P), atol=1e-10)


def test_compression_extension_rebuilds_idempotent():
    L = partial_trace_idempotent(np.diag([1.0, 0.0]))
    F = support_projection(L)
    assert np.allclose(F, np.kron(np.eye(2), e(2, 0, 0)))
    down = SuperOperator.sandwich(np.kron(np.eye(2), e(2, 1, 0)), np.kron(np.eye(2), e(2, 0, 1)))
    L2 = compression_extension(L, F, down)
    assert np.allclose(L2.action, L.action)
    assert np.allclose(matrix_units(L2).P, matrix_units(L).P)


# ------------------------------------------------------------ commutant

def test_commutant_examples():
    assert len(range_commutant(matrix_units(SuperOperator.identity(3)))) == 1
    C = range_commutant(matrix_units(pinching(3)))
    assert len(C) == 3
    for X in C:
        assert np.allclose(X, np.diag(np.diag(X)))
    C = range_commutant(matrix_units(jankowski_idempotent(0.5)))
    assert len(C) == 2
    from qwl.choieffros import in_span

    assert in_span(C, e(3, 2, 2)) and in_span(C, np.eye(3))


# ------------------------------------------------------- compression check

def test_compression_check_examples():
    v = theorem54_compression_check(SuperOperator.identity(2), SuperOperator.identity(2))
    assert v and np.allclose(v.witness, np.eye(2))
    L = pinching(2)
    L1 = SuperOperator.sandwich(e(2, 0, 0))
    v = theorem54_compression_check(L, L1)
    assert v and np.allclose(v.witness, e(2, 0, 0))


def test_compression_check_preconditions():
    with pytest.raises(HypothesisViolated, match="L - L1"):
        theorem54_compression_check(SuperOperator.identity(2), SuperOperator.sandwich(e(2, 0, 0)))
    with pytest.raises(HypothesisViolated, match="L1 idempotent"):
        theorem54_compression_check(SuperOperator.identity(2), SuperOperator.transpose_map(2))
