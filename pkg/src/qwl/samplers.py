"""Random generators for maps and canonical forms used by tests and self-checks."""

import numpy as np

from . import numerics
from .condform import CanonicalForm, _traceless_basis, complete_to_cond_zero
from .superop import SuperOperator


def cp_map(rng, d, rank=None, scale=1.0, dout=None):
    dout = d if dout is None else dout
    rank = rng.integers(1, d * dout + 1) if rank is None else rank
    ops = [numerics.random_complex(rng, (dout, d), scale / np.sqrt(2 * d)) for _ in range(rank)]
    return SuperOperator.from_kraus(ops)


def hermitian_map(rng, d, margin=None):
    """Random hermitian map; with ``margin`` the Choi spectrum has its minimum
    at +margin or -margin times its largest eigenvalue (sign chosen at random)."""
    n = d * d
    H = numerics.random_hermitian(rng, n)
    if margin is not None:
        w, U = np.linalg.eigh(H)
        w = np.abs(w) + 0.1
        sign = 1.0 if rng.random() < 0.5 else -1.0
        w[0] = sign * margin * np.max(w)
        H = (U * w) @ U.conj().T
    return SuperOperator.from_choi(H, d)


def lindblad_map(rng, d, rank=None):
    """Conditionally positive: CP part + Y. + .Y* + s iota."""
    K = cp_map(rng, d, rank)
    Y = numerics.random_complex(rng, (d, d), 0.5)
    s = rng.normal()
    return K + SuperOperator.left_right(Y) + s * SuperOperator.identity(d)


def positive_floor_matrix(rng, d, floor):
    G = numerics.random_complex(rng, (d, d), 0.5)
    return G @ G.conj().T + floor * np.eye(d)


def cond_negative_map(rng, d, floor=0.1, rank=None):
    """Conditionally negative phi with phi(I) >= floor * I."""
    K = cp_map(rng, d, rank)
    T = positive_floor_matrix(rng, d, floor)
    C = numerics.random_hermitian(rng, d, 0.5)
    return complete_to_cond_zero(K, T, C)


def ordered_cond_negative_pair(rng, d, floor=0.1):
    """(phi, phi') conditionally negative, unit floors, phi' - phi CP."""
    K1 = cp_map(rng, d)
    K2 = cp_map(rng, d)
    T = positive_floor_matrix(rng, d, floor)
    C = numerics.random_hermitian(rng, d, 0.5)
    phi = complete_to_cond_zero(K1 + K2, T, C)
    s = float(rng.uniform(0.0, 0.5))
    phi2 = phi + K2 + s * SuperOperator.identity(d)
    return phi, phi2


def canonical_form_sample(rng, d, n_terms=None, target=None, lam_floor=0.05):
    """Random canonical data with nondegenerate positive internal part.

    ``target`` picks s relative to the critical value sum |c|^2/lam:
    'above', 'below', 'boundary' or 'outside' (Y leaves the span).
    """
    u, Vp = _traceless_basis(d)
    full = d * d - 1
    n_terms = full if n_terms is None else n_terms
    Q, _ = np.linalg.qr(numerics.random_complex(rng, (full, full)))
    X = [np.sqrt(d) * (Vp @ Q[:, k]).reshape(d, d) for k in range(n_terms)]
    lam = lam_floor + rng.random(n_terms)
    c = numerics.random_complex(rng, n_terms, 0.5)
    Y = sum(ci * Xi for ci, Xi in zip(c, X))
    crit = float(np.sum(np.abs(c) ** 2 / lam))
    target = target or rng.choice(["above", "below", "boundary"])
    if target == "above":
        s = crit + float(rng.uniform(0.05, 1.0))
    elif target == "below":
        s = crit - float(rng.uniform(0.05, 1.0))
    elif target == "boundary":
        s = crit
    elif target == "outside":
        if n_terms == full:
            raise ValueError("need a proper subset of terms to leave the span")
        extra = np.sqrt(d) * (Vp @ Q[:, n_terms]).reshape(d, d)
        Y = Y + 0.3 * extra
        s = crit + 1.0
    else:
        raise ValueError(target)
    return CanonicalForm(s, Y, lam, X, spectrum=lam.copy()), target
