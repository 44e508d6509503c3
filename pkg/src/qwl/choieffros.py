"""Completely positive contractive idempotents and their range algebras.

The range of such an idempotent L is a C*-algebra under A * B = L(AB).  This
module finds its support projection, structure constants, center, matrix
units and the maximal support projection.
"""

from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import (
    HypothesisViolated,
    NotIdempotent,
    NotPositive,
    NumericallyDegenerateCenter,
    OperandOutsideRange,
)
from .numerics import Verdict, _tol
from .superop import SuperOperator, is_completely_positive, kraus, unvec, vec


def verify_idempotent(L, tol=None):
    tol = _tol(tol)
    cp = bool(is_completely_positive(L, tol))
    nI = float(np.linalg.norm(L(np.eye(L.dim_in)), 2))
    contractive = nI <= 1.0 + tol.eps_eq
    defect = float(np.max(np.abs((L @ L).action - L.action)))
    idem = defect <= tol.eps_eq * max(1.0, float(np.max(np.abs(L.action))))
    return Verdict(cp and contractive and idem, None,
                   {"cp": cp, "contractive": contractive, "norm_unit": nI,
                    "idempotent": idem, "idempotent_defect": defect})


def _require_idempotent(L, tol):
    v = verify_idempotent(L, tol)
    if not v:
        raise NotIdempotent(", ".join(k for k in ("cp", "contractive", "idempotent") if not v.detail[k]))


def support_projection(L, tol=None):
    """Projection onto the span of the ranges of the adjoint Kraus operators."""
    tol = _tol(tol)
    _require_idempotent(L, tol)
    ops = kraus(L, tol).plain_operators()
    stacked = np.hstack([S.conj().T for S in ops])
    F = numerics.projection_onto(numerics.range_basis(stacked, tol.eps_rank))
    p = L.dim_in
    for n in range(p):
        for m in range(p):
            E = np.zeros((p, p), dtype=complex)
            E[n, m] = 1.0
            if np.max(np.abs(L(E) - L(F @ E @ F))) > tol.eps_eq * 10:
                raise NotIdempotent("L(A) != L(FAF) on a matrix unit")
    return F


def in_range(L, A, tol=None):
    tol = _tol(tol)
    A = np.asarray(A, dtype=complex)
    return np.max(np.abs(L(A) - A), initial=0.0) <= tol.eps_eq * 10 * max(1.0, float(np.max(np.abs(A))))


def star(L, A, B, tol=None):
    """A * B = L(AB) for A, B in the range of L."""
    if not (in_range(L, A, tol) and in_range(L, B, tol)):
        raise OperandOutsideRange("star product operands must lie in the range")
    return L(np.asarray(A) @ np.asarray(B))


def plus_minus(A, tol=None):
    """(A+, A-): support projection and projection on eigenvalues >= 1."""
    tol = _tol(tol)
    H = numerics.symmetrize(A, tol)
    w, V = np.linalg.eigh(H)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    if w.size and w[0] < -tol.eps_psd * scale:
        raise NotPositive(f"smallest eigenvalue {w[0]:.3e}")
    band = (w >= 1.0 - 10 * tol.eps_eq) & (w < 1.0 - tol.eps_eq)
    if band.any():
        raise NumericallyDegenerateCenter("eigenvalue inside the A- ambiguity band below 1")
    plus = V[:, w > tol.eps_psd * scale]
    minus = V[:, w >= 1.0 - tol.eps_eq]
    return numerics.projection_onto(plus), numerics.projection_onto(minus)


@dataclass
class Factor:
    q: int
    units: np.ndarray          # (q, q, p, p)
    central_projection: np.ndarray


@dataclass
class ChoiEffrosStructure:
    L: SuperOperator
    F: np.ndarray
    I_o: np.ndarray
    range_basis: np.ndarray    # (r, p, p), orthonormal in Frobenius inner product
    structure: np.ndarray      # T[a, b, c]: B_a * B_b = sum_c T[a,b,c] B_c
    center: np.ndarray         # (nc, p, p)
    factors: list = field(default_factory=list)
    P: np.ndarray = None
    warnings: list = field(default_factory=list)

    @property
    def dim(self):
        return self.L.dim_in

    def coords(self, A):
        return np.array([np.vdot(B, A) for B in self.range_basis])

    def element(self, c):
        return np.tensordot(np.asarray(c), self.range_basis, axes=1)

    def star_coords(self, x, y):
        return np.einsum("a,b,abc->c", x, y, self.structure)


def _range_algebra(L, tol):
    p = L.dim_in
    R = numerics.range_basis(L.action, tol.eps_rank)
    basis = np.array([unvec(R[:, a], p) for a in range(R.shape[1])])
    r = len(basis)
    T = np.zeros((r, r, r), dtype=complex)
    for a in range(r):
        for b in range(r):
            T[a, b] = R.conj().T @ vec(L(basis[a] @ basis[b]))
    return basis, T


def _center(T, tol):
    r = T.shape[0]
    rows = []
    for b in range(r):
        rows.append((T[:, b, :] - T[b, :, :]).T)   # (c, a): coefficient of z_a
    N = numerics.null_space(np.vstack(rows), tol.eps_rank)
    return N  # columns in range coordinates


def _left_mult(T, x):
    return np.einsum("a,abc->cb", x, T)  # matrix acting on coordinates y -> x * y


def _coords_of(Basis, v):
    c, *_ = np.linalg.lstsq(Basis, v, rcond=None)
    return c


def _adjoint_coords(struct, x):
    return struct.coords(struct.element(x).conj().T)


def _minimal_central_projections(struct, Z, unit, rng, tol, attempts=6):
    """Minimal central star-projections; Z holds center coordinates as columns."""
    nc = Z.shape[1]
    if nc == 1:
        return [unit]
    herm = []
    for k in range(nc):
        z = Z[:, k]
        zs = _adjoint_coords(struct, z)
        herm.extend([0.5 * (z + zs), 0.5j * (z - zs)])
    for _ in range(attempts):
        h = sum(rng.standard_normal() * v for v in herm)
        Lh = np.column_stack([_coords_of(Z, struct.star_coords(h, Z[:, j])) for j in range(nc)])
        w, V = np.linalg.eig(Lh)
        w = w.real
        gaps = np.diff(np.sort(w))
        if gaps.size and np.min(gaps) <= 1e3 * tol.eps_rank * max(1.0, np.max(np.abs(w))):
            continue
        projs = []
        for j in range(nc):
            v = Z @ V[:, j]
            vv = struct.star_coords(v, v)
            kappa = np.vdot(v, vv) / np.vdot(v, v)
            projs.append(v / kappa)
        return projs
    raise NumericallyDegenerateCenter("could not separate the center spectrum")


def _spectral_groups(vals, q, tol):
    order = np.argsort(-vals)
    groups = [order[i * q:(i + 1) * q] for i in range(q)]
    means = np.array([vals[g].mean() for g in groups])
    spread = max(np.ptp(vals[g]) for g in groups)
    gaps = -np.diff(means) if q > 1 else np.array([np.inf])
    return means, spread, gaps


def _factor_units(struct, Pc, rng, tol, hint=None, attempts=8):
    r = struct.range_basis.shape[0]
    LP = _left_mult(struct.structure, Pc)
    Fb = numerics.range_basis(LP, tol.eps_rank)   # basis of the factor inside range coords
    dim = Fb.shape[1]
    q = int(round(np.sqrt(dim)))
    if q * q != dim:
        raise NumericallyDegenerateCenter(f"summand of dimension {dim} is not a full matrix algebra")
    if q == 1:
        return q, np.array([[struct.element(Pc)]])

    def sym(x):
        return 0.5 * (x + _adjoint_coords(struct, x))

    for attempt in range(attempts):
        if hint is not None and attempt == 0:
            y = struct.coords(np.asarray(hint, dtype=complex))
            y = struct.star_coords(Pc, struct.star_coords(y, Pc))
        else:
            y = sym(Fb @ numerics.random_complex(rng, dim))
        Ly = _left_mult(struct.structure, y)
        M = Fb.conj().T @ Ly @ Fb
        vals = np.linalg.eigvals(M).real
        means, spread, gaps = _spectral_groups(vals, q, tol)
        scale = max(1.0, float(np.max(np.abs(vals))))
        if spread > 1e-6 * scale or np.min(gaps) < 1e-4 * scale:
            continue
        e = []
        for i in range(q):
            acc = Pc.copy()
            for j in range(q):
                if j != i:
                    acc = struct.star_coords(acc, (y - means[j] * Pc) / (means[i] - means[j]))
            e.append(acc)
        z = Fb @ numerics.random_complex(rng, dim)
        units = np.zeros((q, q, struct.dim, struct.dim), dtype=complex)
        col = [e[0]]
        for i in range(1, q):
            x = struct.star_coords(struct.star_coords(e[i], z), e[0])
            xx = struct.star_coords(x, _adjoint_coords(struct, x))
            c = np.vdot(e[i], xx) / np.vdot(e[i], e[i])
            if abs(c) < 1e-8:
                break
            Ei1 = x / np.sqrt(c.real)
            M_ = struct.element(Ei1)
            k = np.unravel_index(np.argmax(np.abs(M_)), M_.shape)
            Ei1 = Ei1 * (abs(M_[k]) / M_[k])
            col.append(Ei1)
        if len(col) < q:
            continue
        for i in range(q):
            for j in range(q):
                Eij = struct.star_coords(col[i], _adjoint_coords(struct, col[j]))
                units[i, j] = struct.element(Eij)
        return q, units
    raise NumericallyDegenerateCenter("could not split the factor into matrix units")


def matrix_units(L, tol=None, seed=0, hint=None):
    """Full structure: support, range algebra, center, matrix units and P."""
    tol = _tol(tol)
    _require_idempotent(L, tol)
    rng = np.random.default_rng(seed)
    p = L.dim_in
    F = support_projection(L, tol)
    I_o = L(np.eye(p))
    basis, T = _range_algebra(L, tol)
    struct = ChoiEffrosStructure(L, F, I_o, basis, T, np.zeros((0, p, p)))
    Zc = _center(T, tol)
    struct.center = np.array([struct.element(Zc[:, k]) for k in range(Zc.shape[1])])
    unit = struct.coords(I_o)
    for Pc in _minimal_central_projections(struct, Zc, unit, rng, tol):
        q, units = _factor_units(struct, Pc, rng, tol, hint)
        struct.factors.append(Factor(q, units, struct.element(Pc)))
    struct.P = maximal_support_projection(struct, tol)
    if _projection_unit_outside_support(struct):
        struct.warnings.append("a range projection reaches outside F with eigenvalue 1; "
                               "P is reported without a reference value")
    return struct


def _projection_unit_outside_support(struct, atol=1e-9):
    """True when the unit reaches eigenvalue 1 off F, or some E_ii is an
    ordinary projection not dominated by F."""
    G = np.eye(struct.dim) - struct.F
    off = G @ struct.I_o @ G
    if off.size and np.max(np.linalg.eigvalsh(0.5 * (off + off.conj().T)), initial=0.0) >= 1.0 - atol:
        return True
    for fac in struct.factors:
        for i in range(fac.q):
            E = fac.units[i, i]
            if np.max(np.abs(E @ E - E)) <= atol and np.max(np.abs(E - struct.F @ E @ struct.F)) > atol:
                return True
    return False


def maximal_support_projection(struct, tol=None):
    """P = sum over factors of sum_i T_i, T_i = ((1/q) sum_j (E_ij E_ji)-)-."""
    tol = _tol(tol)
    p = struct.dim
    P = np.zeros((p, p), dtype=complex)
    for fac in struct.factors:
        q, E = fac.q, fac.units
        for i in range(q):
            avg = sum(plus_minus(E[i, j] @ E[j, i], tol)[1] for j in range(q)) / q
            P += plus_minus(avg, tol)[1]
    eq = tol.eps_eq * 10
    ok_psd, _ = numerics.min_eig_psd_test(P - struct.F, tol)
    if not ok_psd:
        raise HypothesisViolated("P >= F")
    for fac in struct.factors:
        for E in fac.units.reshape(-1, p, p):
            if np.max(np.abs(P @ E - E @ P)) > eq:
                raise HypothesisViolated("P commutes with matrix units")
    if np.max(np.abs(P @ struct.I_o - P)) > eq:
        raise HypothesisViolated("P I_o = P")
    return P


def range_commutant(struct_or_basis, tol=None):
    """Basis of {X : [X, B] = 0 for every range element B}."""
    tol = _tol(tol)
    basis = struct_or_basis.range_basis if isinstance(struct_or_basis, ChoiEffrosStructure) else np.asarray(struct_or_basis)
    p = basis.shape[1]
    I = np.eye(p)
    rows = [np.kron(B, I) - np.kron(I, B.T) for B in basis]
    N = numerics.null_space(np.vstack(rows), tol.eps_rank)
    return np.array([unvec(N[:, k], p) for k in range(N.shape[1])])


def in_span(basis, A, tol=None):
    tol = _tol(tol)
    Bm = np.array([vec(B) for B in basis]).T
    c, *_ = np.linalg.lstsq(Bm, vec(A), rcond=None)
    return float(np.linalg.norm(Bm @ c - vec(A))) <= tol.eps_eq * 10 * max(1.0, float(np.linalg.norm(A)))


def theorem54_compression_check(L, L1, tol=None):
    """For idempotents L >= L1 with L1(I) = E a projection: L1 = E L(.) E."""
    tol = _tol(tol)
    for name, M in (("L idempotent CP contraction", L), ("L1 idempotent CP contraction", L1)):
        if not verify_idempotent(M, tol):
            raise HypothesisViolated(name)
    if not is_completely_positive(L - L1, tol):
        raise HypothesisViolated("L - L1 completely positive")
    p = L.dim_in
    E = L1(np.eye(p))
    if np.max(np.abs(E @ E - E)) > tol.eps_eq * 10 or np.max(np.abs(E - E.conj().T)) > tol.eps_eq * 10:
        raise HypothesisViolated("L1(I) is a projection")
    basis, _ = _range_algebra(L, tol)
    commutes = all(np.max(np.abs(E @ B - B @ E)) <= tol.eps_eq * 10 for B in basis)
    comp = SuperOperator.sandwich(E) @ L
    same = float(np.max(np.abs(comp.action - L1.action)))
    return Verdict(commutes and same <= tol.eps_eq * 10, E, {"commutes": commutes, "defect": same})


def jankowski_idempotent(lam):
    """A -> F A F + lam e32 A e23 on M_3 with F = e11 + e22."""
    F = np.diag([1.0, 1.0, 0.0]).astype(complex)
    e32 = np.zeros((3, 3), dtype=complex)
    e32[2, 1] = 1.0
    return SuperOperator.sandwich(F) + lam * SuperOperator.sandwich(e32)


def same_range(L1, L2, tol=None):
    tol = _tol(tol)
    R1 = numerics.range_basis(L1.action, tol.eps_rank)
    R2 = numerics.range_basis(L2.action, tol.eps_rank)
    if R1.shape[1] != R2.shape[1]:
        return False
    return float(np.linalg.norm(R1 - R2 @ (R2.conj().T @ R1))) <= tol.eps_eq * 10


def compression_extension(L, F, psi):
    """A -> phi(A) + psi(phi(A)) with phi(A) = F L(A) F."""
    phi = SuperOperator.sandwich(F) @ L
    return phi + psi @ phi
