import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from oracles import apply_map, choi_by_definition, is_psd, s_and_y
from qwl import numerics, samplers
from qwl.condform import (
    CanonicalForm,
    ConditionalClass,
    block_inequality_check,
    canonical_form,
    classify,
    complete_to_cond_zero,
    cp_criterion,
    exp_semigroup_cp_check,
    invert_cond_negative,
    unit_perturbation_decomposition,
)
from qwl.errors import (
    DegenerateInternal,
    NonHermitianMap,
    NotConditionallyNegative,
    UnitLowerBoundViolated,
)
from qwl.superop import SuperOperator, is_completely_positive

seeds = st.integers(0, 2**31 - 1)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]])
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


def tr_map(p, sign=1.0):
    return sign * SuperOperator.trace_times(np.eye(p), p, normalized=True)


def reassembly_error(L, cf):
    return np.linalg.norm(cf.reassemble().choi() - L.choi()) / L.dim_in


# -------------------------------------------------------- canonical form

def test_canonical_identity():
    cf = canonical_form(SuperOperator.identity(3))
    assert cf.s == pytest.approx(1.0)
    assert np.allclose(cf.Y, 0)
    assert len(cf.lambdas) == 0


def test_canonical_left_right_part(rng):
    Y = numerics.random_complex(rng, (3, 3))
    Y -= np.trace(Y) / 3 * np.eye(3)
    cf = canonical_form(SuperOperator.left_right(Y))
    assert cf.s == pytest.approx(0.0, abs=1e-14)
    assert np.allclose(cf.Y, Y, atol=1e-13)
    assert len(cf.lambdas) == 0


def test_canonical_normalized_trace_p2():
    L = tr_map(2)
    cf = canonical_form(L)
    assert cf.s == pytest.approx(0.25)
    assert np.allclose(cf.Y, 0)
    assert np.allclose(np.sort(cf.lambdas), [0.25] * 3)
    for X in cf.X:
        assert abs(np.trace(X)) < 1e-12
        assert np.trace(X.conj().T @ X).real / 2 == pytest.approx(1.0)
    # sum over the Paulis with identity reproduces tr(A) I
    paulis = [np.eye(2), SIGMA_X, SIGMA_Y, SIGMA_Z]
    ref = SuperOperator.from_kraus(paulis, [0.25] * 4)
    assert np.allclose(choi_by_definition(ref), choi_by_definition(L))
    assert reassembly_error(L, cf) < 1e-14


def test_canonical_rejects_nonhermitian():
    with pytest.raises(NonHermitianMap):
        canonical_form(SuperOperator.sandwich(np.eye(2), np.array([[1, 1], [0, 1]])))


@given(st.integers(1, 4), seeds)
def test_canonical_round_trip_and_invariants(d, seed):
    L = samplers.hermitian_map(np.random.default_rng(seed), d)
    cf = canonical_form(L)
    assert reassembly_error(L, cf) <= 1e-10
    assert abs(np.trace(cf.Y)) <= 1e-10
    for i, Xi in enumerate(cf.X):
        assert abs(np.trace(Xi)) <= 1e-10
        for j, Xj in enumerate(cf.X):
            assert np.trace(Xi.conj().T @ Xj) / d == pytest.approx(float(i == j), abs=1e-9)


@given(st.integers(1, 4), seeds)
def test_s_and_y_match_group_average(d, seed):
    L = samplers.hermitian_map(np.random.default_rng(seed), d)
    s, Y = s_and_y(L)
    cf = canonical_form(L)
    assert cf.s == pytest.approx(s, abs=1e-11)
    assert np.allclose(cf.Y, Y, atol=1e-11)


@given(st.integers(2, 4), seeds, seeds)
def test_s_and_y_independent_of_internal_basis(d, seed, basis_seed):
    L = samplers.hermitian_map(np.random.default_rng(seed), d)
    a = canonical_form(L)
    b = canonical_form(L, basis_seed=basis_seed)
    assert a.s == b.s
    assert np.allclose(a.Y, b.Y, atol=1e-12)
    assert np.allclose(np.sort(a.spectrum), np.sort(b.spectrum), atol=1e-11)
    assert reassembly_error(L, b) <= 1e-10


# -------------------------------------------------------------- classify

def test_classify_examples():
    assert classify(SuperOperator.identity(2)) == ConditionalClass.ZERO
    assert classify(tr_map(2)) == ConditionalClass.POSITIVE
    assert classify(tr_map(2, -1.0)) == ConditionalClass.NEGATIVE
    assert classify(SuperOperator.transpose_map(2)) == ConditionalClass.INDEFINITE


@given(st.integers(2, 3), seeds, st.sampled_from(["lindblad", "negated", "random"]))
def test_classify_against_semigroup(d, seed, kind):
    rng = np.random.default_rng(seed)
    if kind == "lindblad":
        L = samplers.lindblad_map(rng, d)
    elif kind == "negated":
        L = -samplers.lindblad_map(rng, d, rank=d * d)
    else:
        L = samplers.hermitian_map(rng, d)
    cls = classify(L).kind
    flags = exp_semigroup_cp_check(L, [1e-3, 1e-2, 1e-1])
    positive_side = cls in (ConditionalClass.POSITIVE, ConditionalClass.ZERO)
    assert positive_side == all(flags)


@given(st.integers(1, 4), seeds)
def test_cp_and_cond_negative_is_scalar(d, seed):
    rng = np.random.default_rng(seed)
    s = float(rng.uniform(0, 2))
    L = s * SuperOperator.identity(d)
    if is_completely_positive(L) and classify(L).kind in (ConditionalClass.NEGATIVE, ConditionalClass.ZERO):
        cf = canonical_form(L)
        assert len(cf.lambdas) == 0 and np.allclose(cf.Y, 0) and cf.s >= 0


@given(st.integers(2, 3), seeds)
def test_cp_cond_negative_random_maps_are_scalar(d, seed):
    # random CP maps are conditionally negative only when they are scalar
    phi = samplers.cp_map(np.random.default_rng(seed), d)
    cls = classify(phi).kind
    if cls in (ConditionalClass.NEGATIVE, ConditionalClass.ZERO):
        cf = canonical_form(phi)
        assert len(cf.lambdas) == 0 and np.allclose(cf.Y, 0, atol=1e-9)


# ----------------------------------------------------------- CP criterion

def cf_from(s, Y, lam, X):
    return CanonicalForm(s, np.asarray(Y, dtype=complex), np.asarray(lam, dtype=float), list(X),
                         spectrum=np.asarray(lam, dtype=float))


@pytest.mark.parametrize("s, Y, expected", [
    (1.0, np.zeros((2, 2)), True),
    (0.0, SIGMA_Z, False),
    (1.0, SIGMA_Z, True),
])
def test_cp_criterion_examples(s, Y, expected):
    cf = cf_from(s, Y, [1.0], [SIGMA_Z])
    v = cp_criterion(cf)
    assert bool(v) is expected
    assert bool(is_completely_positive(cf.reassemble())) is expected


def test_cp_criterion_boundary_certificate():
    v = cp_criterion(cf_from(1.0, SIGMA_Z, [1.0], [SIGMA_Z]))
    assert v.detail["sum"] == pytest.approx(1.0)
    assert v.detail["c"][0] == pytest.approx(1.0)


def test_cp_criterion_degenerate_falls_back():
    cf = cf_from(1.0, np.zeros((2, 2)), [0.0], [SIGMA_Z])
    with pytest.warns(DegenerateInternal):
        v = cp_criterion(cf)
    assert v


@given(st.integers(2, 3), seeds, st.sampled_from(["above", "below", "boundary", "outside"]))
def test_cp_criterion_matches_choi(d, seed, target):
    rng = np.random.default_rng(seed)
    n_terms = d * d - 2 if target == "outside" else None
    cf, _ = samplers.canonical_form_sample(rng, d, n_terms=n_terms, target=target)
    expected = is_psd(choi_by_definition(cf.reassemble()), 1e-9)
    assert bool(cp_criterion(cf)) == expected
    assert expected == (target in ("above", "boundary"))


@given(st.integers(2, 3), seeds)
def test_cp_criterion_on_computed_form(d, seed):
    L = samplers.hermitian_map(np.random.default_rng(seed), d, margin=0.05)
    cf = canonical_form(L)
    assume(np.all(cf.lambdas > 1e-6) and len(cf.lambdas) == d * d - 1)
    assert bool(cp_criterion(cf)) == bool(is_completely_positive(L))


# ---------------------------------------------------------- block check

def test_block_identity():
    assert block_inequality_check(canonical_form(SuperOperator.identity(2)))


def test_block_non_cp():
    assert not block_inequality_check(cf_from(0.0, SIGMA_Z, [1.0], [SIGMA_Z]))


@given(st.integers(1, 4), seeds)
def test_block_holds_for_cp(d, seed):
    phi = samplers.cp_map(np.random.default_rng(seed), d)
    assert block_inequality_check(canonical_form(phi))


# ------------------------------------------------------------- completion

def test_completion_zero_identity():
    psi = complete_to_cond_zero(SuperOperator.zero(2), np.eye(2))
    assert np.allclose(psi.action, SuperOperator.identity(2).action)


def test_completion_commutator(rng):
    C = numerics.random_hermitian(rng, 3)
    psi = complete_to_cond_zero(SuperOperator.zero(3), np.zeros((3, 3)), C)
    A = numerics.random_complex(rng, (3, 3))
    assert np.allclose(psi(A), 1j * (C @ A - A @ C))
    assert np.allclose(psi(np.eye(3)), 0)


def test_completion_of_trace_map():
    phi = tr_map(2)
    psi = complete_to_cond_zero(phi, np.eye(2))
    assert np.allclose(psi(np.eye(2)), np.eye(2))
    assert classify(psi + phi) == ConditionalClass.ZERO


@given(st.integers(1, 4), seeds)
def test_completion_property(d, seed):
    rng = np.random.default_rng(seed)
    phi = samplers.cp_map(rng, d)
    T = numerics.random_hermitian(rng, d)
    psi = complete_to_cond_zero(phi, T, numerics.random_hermitian(rng, d))
    assert np.allclose(apply_map(psi, np.eye(d)), T, atol=1e-10)
    assert classify(psi + phi) == ConditionalClass.ZERO


# -------------------------------------------------------------- inversion

def test_invert_scalar():
    inv = invert_cond_negative(2 * SuperOperator.identity(2))
    assert np.allclose(inv.action, 0.5 * np.eye(4))


def test_invert_two_minus_trace():
    phi = 2 * SuperOperator.identity(2) - tr_map(2)
    inv = invert_cond_negative(phi)
    expected = 0.5 * SuperOperator.identity(2) + 0.5 * tr_map(2)
    assert np.allclose(inv.action, expected.action)
    assert is_psd(choi_by_definition(inv))


def test_invert_errors():
    with pytest.raises(NotConditionallyNegative):
        invert_cond_negative(tr_map(2))
    with pytest.raises(UnitLowerBoundViolated):
        invert_cond_negative(-SuperOperator.identity(2))


@given(st.integers(1, 4), seeds)
def test_inverse_cp_and_monotone(d, seed):
    rng = np.random.default_rng(seed)
    phi, phi2 = samplers.ordered_cond_negative_pair(rng, d)
    inv, inv2 = invert_cond_negative(phi), invert_cond_negative(phi2)
    assert is_psd(choi_by_definition(inv))
    assert is_psd(choi_by_definition(inv - inv2))


# -------------------------------------------------------------- semigroup

def test_semigroup_examples():
    assert all(exp_semigroup_cp_check(SuperOperator.zero(2), [0.1, 1.0, 10.0]))
    assert all(exp_semigroup_cp_check(-SuperOperator.identity(2), [0.1, 1.0]))
    L = tr_map(2) - SuperOperator.identity(2)
    assert all(exp_semigroup_cp_check(L, [0.01, 0.1, 1.0]))
    assert not any(exp_semigroup_cp_check(SuperOperator.transpose_map(2), [0.01, 0.1]))


# -------------------------------------------------- small-perturbation split

@given(st.integers(2, 3), seeds, st.floats(0.05, 0.9))
def test_unit_perturbation_split(p, seed, eps):
    rng = np.random.default_rng(seed)
    delta = min(eps / (4 * p * p), 0.1 / np.sqrt(p))
    a = delta / 4
    xi2 = samplers.cp_map(rng, p)
    xi2 = xi2 * (0.5 * a / float(np.linalg.norm(xi2(np.eye(p)), 2)))
    xi1 = (1.0 - a) * SuperOperator.identity(p) + 0.1 * a * samplers.cp_map(rng, p) / p
    out = unit_perturbation_decomposition(xi1, xi2, eps)
    assert out["delta"] == pytest.approx(delta)
    assert out["hyp_unit"] < 1 and out["hyp_zeta"] < out["delta"]
    assert out["kappa"] > 0
    assert out["eta_norm"] < eps
