"""Canonical form and conditional positivity of hermitian maps on M_p.

Every hermitian L on M_p can be written

    L(A) = s A + Y A + A Y* + sum_i lam_i X_i A X_i*

with Y, X_i traceless and tr(X_i* X_j) = delta_ij for the normalized trace.
The sign pattern of the lam_i (the internal spectrum) decides conditional
positivity.
"""

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import numerics
from .errors import (
    DegenerateInternal,
    NonHermitianMap,
    NotCompletelyPositive,
    NotConditionallyNegative,
    UnitLowerBoundViolated,
)
from .numerics import Verdict, _tol
from .superop import SuperOperator, choi, is_completely_positive, vec


class ConditionalClass(str, enum.Enum):
    POSITIVE = "ConditionallyPositive"
    NEGATIVE = "ConditionallyNegative"
    ZERO = "ConditionallyZero"
    INDEFINITE = "Indefinite"


@dataclass
class ClassResult:
    kind: ConditionalClass
    certificate: np.ndarray
    floor: float

    def __eq__(self, other):
        if isinstance(other, ConditionalClass):
            return self.kind is other
        return NotImplemented


@dataclass
class CanonicalForm:
    s: float
    Y: np.ndarray
    lambdas: np.ndarray
    X: list
    # every eigenvalue of the traceless block, including dropped ones
    spectrum: np.ndarray = field(default_factory=lambda: np.zeros(0))
    scale: float = 1.0

    @property
    def dim(self):
        return self.Y.shape[0]

    def internal(self):
        return SuperOperator.from_kraus(self.X, self.lambdas) if len(self.X) else SuperOperator.zero(self.dim)

    def reassemble(self):
        p = self.dim
        L = self.s * SuperOperator.identity(p) + SuperOperator.left_right(self.Y)
        return L + self.internal()


def _traceless_basis(p):
    """Orthonormal basis (columns) of vec-space orthogonal to vec(I)."""
    u = vec(np.eye(p)) / np.sqrt(p)
    Q, _ = np.linalg.qr(np.column_stack([u, np.eye(p * p)]))
    return u, Q[:, 1:p * p]


def canonical_form(L, tol=None, basis_seed=None):
    """s, Y and the internal terms of a hermitian map on M_p.

    ``basis_seed`` rotates the traceless operator basis by a random unitary
    before diagonalizing; s, Y and the internal spectrum do not depend on it.
    """
    tol = _tol(tol)
    if L.dim_in != L.dim_out:
        raise NonHermitianMap("canonical form needs a map of M_p into itself")
    if not L.is_hermitian(tol):
        raise NonHermitianMap("map does not commute with the adjoint")
    p = L.dim_in
    C = choi(L)
    C = 0.5 * (C + C.conj().T)
    u, Vp = _traceless_basis(p)
    if basis_seed is not None:
        rng = np.random.default_rng(basis_seed)
        G = numerics.random_complex(rng, (Vp.shape[1], Vp.shape[1]))
        Vp = Vp @ np.linalg.qr(G)[0]
    s = float(np.real(u.conj() @ C @ u)) / p
    y = C @ u - u * (u.conj() @ C @ u)
    Y = (y / np.sqrt(p)).reshape(p, p)
    K = Vp.conj().T @ C @ Vp
    kappa, W = numerics.hermitian_eig(K, tol)
    lam_all = kappa / p
    scale = max(1.0, float(np.linalg.norm(C, 2)))
    keep = np.abs(kappa) > tol.eps_rank * scale
    X = [np.sqrt(p) * (Vp @ W[:, k]).reshape(p, p) for k in np.flatnonzero(keep)]
    return CanonicalForm(s, Y, lam_all[keep], X, spectrum=lam_all, scale=scale)


def classify(L, tol=None):
    tol = _tol(tol)
    cf = L if isinstance(L, CanonicalForm) else canonical_form(L, tol)
    lam = cf.spectrum
    floor = tol.eps_psd * cf.scale
    if lam.size == 0 or np.all(np.abs(lam) <= floor):
        cls = ConditionalClass.ZERO
    elif np.all(lam >= -floor):
        cls = ConditionalClass.POSITIVE
    elif np.all(lam <= floor):
        cls = ConditionalClass.NEGATIVE
    else:
        cls = ConditionalClass.INDEFINITE
    return ClassResult(cls, lam, floor)


def cp_criterion(cf, tol=None):
    """Complete positivity read off the canonical form.

    CP iff every lam_i >= 0, Y = sum c_i X_i and sum |c_i|^2 / lam_i <= s.
    Internal eigenvalues inside the positivity floor trigger a warning and
    the Choi test decides instead.
    """
    tol = _tol(tol)
    floor = tol.eps_psd * cf.scale
    p = cf.dim
    lam = np.asarray(cf.lambdas, dtype=float)
    if np.any(lam < -floor):
        return Verdict(False, None, {"reason": "negative internal eigenvalue", "lambdas": lam})
    if np.any(lam <= floor):
        warnings.warn(DegenerateInternal("internal eigenvalue within the positivity floor; using the Choi test"))
        v = is_completely_positive(cf.reassemble(), tol)
        return Verdict(v.ok, v.witness, {"reason": "degenerate internal part, Choi fallback"})
    c = np.array([np.trace(X.conj().T @ cf.Y) / p for X in cf.X], dtype=complex)
    R = cf.Y - sum((ci * X for ci, X in zip(c, cf.X)), np.zeros((p, p), dtype=complex))
    r2 = float(np.real(np.trace(R.conj().T @ R))) / p
    total = float(np.sum(np.abs(c) ** 2 / lam)) if lam.size else 0.0
    in_span = np.sqrt(r2) <= tol.eps_eq * max(1.0, float(np.linalg.norm(cf.Y)))
    bound = cf.s + tol.eps_eq * max(1.0, abs(cf.s))
    ok = bool(in_span and total <= bound)
    return Verdict(ok, None, {"c": c, "residual2": r2, "sum": total, "s": cf.s})


def block_inequality_check(cf, tol=None):
    """PSD test of [[s I, Y*], [Y, rho(I)]] with rho the internal part."""
    p = cf.dim
    rhoI = sum((l * X @ X.conj().T for l, X in zip(cf.lambdas, cf.X)), np.zeros((p, p), dtype=complex))
    M = np.block([[cf.s * np.eye(p), cf.Y.conj().T], [cf.Y, rhoI]])
    ok, w = numerics.min_eig_psd_test(M, tol)
    return Verdict(ok, w)


def complete_to_cond_zero(phi, T, C=None, tol=None):
    """psi with psi(I) = T and psi + phi conditionally zero.

    psi(A) = Y A + A Y* - phi(A) with Y = (T + phi(I))/2 + iC.
    """
    tol = _tol(tol)
    p = phi.dim_in
    T = np.asarray(T, dtype=complex)
    C = np.zeros((p, p)) if C is None else np.asarray(C, dtype=complex)
    Y = 0.5 * (T + phi(np.eye(p))) + 1j * C
    psi = SuperOperator.left_right(Y) - phi
    scale = max(1.0, float(np.max(np.abs(T))))
    if np.max(np.abs(psi(np.eye(p)) - T)) > tol.eps_eq * scale * 10:
        raise RuntimeError("completion does not reproduce psi(I) = T")
    if classify(psi + phi, tol).kind is not ConditionalClass.ZERO:
        raise RuntimeError("completion is not conditionally zero")
    return psi


def invert_cond_negative(phi, tol=None):
    tol = _tol(tol)
    cls = classify(phi, tol).kind
    if cls not in (ConditionalClass.NEGATIVE, ConditionalClass.ZERO):
        raise NotConditionallyNegative(f"map is {cls.value}")
    unit = phi(np.eye(phi.dim_in))
    low = float(np.min(np.linalg.eigvalsh(0.5 * (unit + unit.conj().T))))
    if low <= tol.eps_psd:
        raise UnitLowerBoundViolated(f"lambda_min(phi(I)) = {low:.3e}")
    inv = phi.inverse()
    if not is_completely_positive(inv, tol):
        raise NotCompletelyPositive("inverse failed the Choi test")
    return inv


def exp_semigroup_cp_check(L, t_list, tol=None):
    """CP flags of exp(tL) for each t."""
    return [bool(is_completely_positive(SuperOperator(expm(t * L.action), L.dim_in), tol))
            for t in t_list]


def unit_perturbation_decomposition(xi1, xi2, eps, tol=None):
    """Split iota - xi2 = kappa (iota + eta) as in the small-perturbation lemma.

    Returns a dict with the hypothesis value ||iota - (iota - xi2)^-1 xi1||,
    delta(eps) = min(eps / (4p^2), 0.1/sqrt(p)), kappa and ||eta||.
    """
    from .superop import hs_norm, op_norm

    tol = _tol(tol)
    p = xi1.dim_in
    iota = SuperOperator.identity(p)
    base = iota - xi2
    zeta = iota - base.inverse() @ xi1
    delta = min(eps / (4 * p * p), 0.1 / np.sqrt(p))
    b = hs_norm(base)
    s = canonical_form(base / b, tol).s
    kappa = b * s
    eta = base / kappa - iota
    return {
        "hyp_unit": float(np.linalg.norm((xi1 + xi2)(np.eye(p)), 2)),
        "hyp_zeta": op_norm(zeta, tol, assume_cp=False),
        "delta": delta,
        "kappa": kappa,
        "eta_norm": op_norm(eta, tol, assume_cp=False),
    }
