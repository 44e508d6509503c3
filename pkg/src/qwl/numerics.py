"""Dense linear algebra helpers, special functions and the tolerance policy."""

import math
import os
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate

from . import _kernels
from .errors import DomainError, NonConvergence, NonHermitianInput


@dataclass(frozen=True)
class TolerancePolicy:
    eps_psd: float = 1e-9
    eps_eq: float = 1e-9
    eps_rank: float = 1e-10
    quad_rel_err: float = 1e-10

    def __post_init__(self):
        for name in ("eps_psd", "eps_eq", "eps_rank", "quad_rel_err"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)


_PROFILES = {
    "default": TolerancePolicy(),
    "strict": TolerancePolicy(eps_psd=1e-11, eps_eq=1e-11, eps_rank=1e-12, quad_rel_err=1e-12),
}


def policy_from_env():
    name = os.environ.get("QWL_TOLERANCE_PROFILE", "default").strip().lower() or "default"
    if name not in _PROFILES:
        raise ValueError(f"unknown tolerance profile {name!r}")
    return _PROFILES[name]


DEFAULT = TolerancePolicy()


def _tol(tol):
    return policy_from_env() if tol is None else tol


def as_matrix(A):
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2:
        raise ValueError("expected a 2-d array")
    return A


def hermitian_defect(A):
    A = np.asarray(A)
    return float(np.max(np.abs(A - A.conj().T))) if A.size else 0.0


def symmetrize(A, tol=None):
    """Return (A + A*)/2 after checking A is hermitian within eps_eq."""
    tol = _tol(tol)
    A = as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise NonHermitianInput(f"matrix of shape {A.shape} is not square")
    scale = max(1.0, float(np.max(np.abs(A)))) if A.size else 1.0
    if hermitian_defect(A) > tol.eps_eq * scale:
        raise NonHermitianInput(f"symmetry defect {hermitian_defect(A):.3e}")
    return 0.5 * (A + A.conj().T)


def hermitian_eig(A, tol=None):
    """Eigenvalues in descending order and matching unitary eigenvectors."""
    H = symmetrize(A, tol)
    w, V = np.linalg.eigh(H)
    return w[::-1].copy(), V[:, ::-1].copy()


def min_eig_psd_test(A, tol=None):
    """PSD test with relative floor.  Returns (is_psd, witness or None)."""
    tol = _tol(tol)
    H = symmetrize(A, tol)
    if H.size == 0:
        return True, None
    w, V = np.linalg.eigh(H)
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] >= -tol.eps_psd * scale:
        return True, None
    return False, V[:, 0]


def is_psd(A, tol=None):
    return min_eig_psd_test(A, tol)[0]


def upper_incomplete_gamma(s, x):
    """Gamma(s, x) = int_x^inf u^(s-1) e^(-u) du for s > -1, x >= 0.

    Accepts scalars or broadcastable arrays.  Series below x = s + 1,
    continued fraction above; for s < 0 and x < 1 the value comes from
    Gamma(s, x) = (Gamma(s+1, x) - x^s e^(-x)) / s.
    """
    s_arr, x_arr = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(x, dtype=float))
    if np.any(s_arr <= -1.0):
        raise DomainError("upper incomplete gamma needs s > -1")
    if np.any(x_arr < 0.0) or np.any(np.isnan(x_arr)):
        raise DomainError("upper incomplete gamma needs x >= 0")
    if np.any((s_arr <= _kernels.S_ZERO_SNAP) & (x_arr == 0.0)):
        raise DomainError("Gamma(s, 0) diverges for s <= 0")
    out = np.empty(s_arr.shape)
    big = np.isinf(x_arr)
    out[big] = 0.0
    fin = ~big
    if fin.any():
        out[fin] = _kernels.gamma_upper_array(s_arr[fin].ravel(), x_arr[fin].ravel())
    if out.ndim == 0:
        return float(out)
    return out


def lower_incomplete_gamma(s, x):
    """gamma(s, x) = int_0^x u^(s-1) e^(-u) du for s > 0."""
    s_arr, x_arr = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(x, dtype=float))
    if np.any(s_arr <= 0.0):
        raise DomainError("lower incomplete gamma needs s > 0")
    out = np.empty(s_arr.shape)
    big = np.isinf(x_arr)
    out[big] = [math.gamma(v) for v in s_arr[big]]
    fin = ~big
    if fin.any():
        out[fin] = _kernels.gamma_lower_array(s_arr[fin].ravel(), x_arr[fin].ravel())
    if out.ndim == 0:
        return float(out)
    return out


def adaptive_quadrature(f, a, b, tol=None, points=None):
    """Oracle integral of a real function over [a, b] (b may be inf).

    Wraps QUADPACK; raises NonConvergence when the reported error exceeds
    the policy's relative target.  Test-oracle use only.
    """
    tol = _tol(tol)
    kw = dict(epsabs=0.0, epsrel=min(1e-12, tol.quad_rel_err), limit=400, full_output=1)
    if points is not None and np.isfinite(b):
        kw["points"] = points
    res = integrate.quad(f, a, b, **kw)
    val, err = res[0], res[1]
    if not np.isfinite(val) or err > max(tol.quad_rel_err * abs(val), 1e-300):
        # a second attempt on a split interval before giving up
        if np.isfinite(b) or a > 0:
            mid = a + 1.0 if not np.isfinite(b) else 0.5 * (a + b)
            if mid > a and (not np.isfinite(b) or mid < b):
                r1 = integrate.quad(f, a, mid, **kw)
                r2 = integrate.quad(f, mid, b, **kw)
                val, err = r1[0] + r2[0], r1[1] + r2[1]
        if not np.isfinite(val) or err > max(tol.quad_rel_err * abs(val), 1e-300):
            raise NonConvergence(f"quadrature error {err:.3e} on value {val:.6e}")
    return float(val)


def null_space(A, eps_rank):
    """Orthonormal basis (columns) of the numerical kernel of A."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(n, dtype=complex)
    _, sv, vh = np.linalg.svd(A)
    scale = max(1.0, sv[0]) if sv.size else 1.0
    rank = int(np.sum(sv > eps_rank * scale))
    return vh[rank:].conj().T


def range_basis(A, eps_rank):
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    u, sv, _ = np.linalg.svd(A, full_matrices=False)
    scale = max(1.0, sv[0]) if sv.size else 1.0
    rank = int(np.sum(sv > eps_rank * scale))
    return u[:, :rank]


def projection_onto(cols):
    cols = np.asarray(cols, dtype=complex)
    return cols @ cols.conj().T


def random_unit_vector(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def random_complex(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def random_hermitian(rng, n, scale=1.0):
    A = random_complex(rng, (n, n), scale)
    return 0.5 * (A + A.conj().T)


@dataclass
class Verdict:
    """A boolean decision plus whatever certifies it."""

    ok: bool
    witness: object = None
    detail: dict = None

    def __bool__(self):
        return bool(self.ok)
