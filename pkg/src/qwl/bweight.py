"""Boundary weights built from exponential-monomial atoms on (0, inf).

An atom is x -> coef * x^alpha * exp(-a x) with coef a vector.  Pairing two
atoms against an observable B (x) m(x) 1_[u,v](x), where the profile m is a
finite sum of w * x^beta * exp(-b x), yields terms

    coef * int x^(s-1) exp(-c x) dx,   s = alpha + alpha' + beta + 1,
                                        c = a + a' + b,

which are closed-form incomplete gamma values.  For s <= 0 and lower limit
0 a group of terms with equal s converges only if its coefficients cancel;
otherwise the result is the ``DIVERGENT`` marker.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .errors import InadmissiblePair, SpecInvalid
from .numerics import Verdict, _tol
from .superop import SuperOperator, is_completely_positive

S_KEY_DIGITS = 10


class _Divergent:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Divergent"

    def __reduce__(self):
        return (_Divergent, ())


DIVERGENT = _Divergent()


def is_divergent(x):
    return x is DIVERGENT


@dataclass(frozen=True)
class Atom:
    alpha: float
    a: float
    coef: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coef", np.atleast_1d(np.asarray(self.coef, dtype=complex)))
        if not self.alpha > -1.0:
            raise SpecInvalid(f"alpha must exceed -1 (got {self.alpha})")
        if not self.a > 0.0:
            raise SpecInvalid(f"decay a must be positive (got {self.a})")

    @property
    def divergent(self):
        return self.alpha <= -0.5

    def __call__(self, x):
        return self.coef * (x ** self.alpha) * math.exp(-self.a * x)

    def with_coef(self, coef):
        return Atom(self.alpha, self.a, coef)


@dataclass(frozen=True)
class ProfileTerm:
    w: complex
    beta: float = 0.0
    b: float = 0.0


LAMBDA = (ProfileTerm(1.0, 0.0, 1.0),)
ONE = (ProfileTerm(1.0, 0.0, 0.0),)
ONE_MINUS_LAMBDA = (ProfileTerm(1.0, 0.0, 0.0), ProfileTerm(-1.0, 0.0, 1.0))


@dataclass(frozen=True)
class Observable:
    """B (x) m(x) 1_[u, v](x)."""

    B: np.ndarray
    profile: tuple = LAMBDA
    window: tuple = (0.0, math.inf)

    @classmethod
    def lam(cls, B):
        return cls(np.asarray(B, dtype=complex), LAMBDA)

    @classmethod
    def one_minus_lam(cls, B):
        return cls(np.asarray(B, dtype=complex), ONE_MINUS_LAMBDA)

    @classmethod
    def identity(cls, B, u=0.0, v=math.inf):
        return cls(np.asarray(B, dtype=complex), ONE, (u, v))

    def profile_value(self, x):
        return sum(t.w * x ** t.beta * math.exp(-t.b * x) for t in self.profile)


def _gamma_block(s, c, lo, hi):
    """c^-s * int_{c lo}^{c hi} u^(s-1) e^-u du for s > 0 or lo > 0."""
    s = np.asarray(s, dtype=float)
    c = np.asarray(c, dtype=float)
    out = np.zeros(s.shape)
    scale = c ** (-s)
    xlo = c * lo
    xhi = c * hi if math.isfinite(hi) else np.full(s.shape, math.inf)
    use_lower = (s > 0) & np.isfinite(xhi) & (xhi < s + 1.0)
    if use_lower.any():
        gl = numerics.lower_incomplete_gamma(s[use_lower], xhi[use_lower])
        if lo > 0:
            gl = gl - numerics.lower_incomplete_gamma(s[use_lower], xlo[use_lower])
        out[use_lower] = gl
    rest = ~use_lower
    if rest.any():
        if lo > 0:
            up = numerics.upper_incomplete_gamma(s[rest], xlo[rest])
        else:
            up = np.array([math.gamma(v) for v in s[rest]])
        if math.isfinite(hi):
            up = up - numerics.upper_incomplete_gamma(s[rest], xhi[rest])
        out[rest] = up
    return scale * out


def integrate_terms(coef, s, c, lo, hi, group=None, ngroups=1, tol=None):
    """Sum coef * int_lo^hi x^(s-1) e^(-c x) dx per group.

    Returns (values, divergent_flags).
    """
    tol = _tol(tol)
    coef = np.asarray(coef, dtype=complex).ravel()
    s = np.asarray(s, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    group = np.zeros(coef.shape, dtype=int) if group is None else np.asarray(group).ravel()
    vals = np.zeros(ngroups, dtype=complex)
    div = np.zeros(ngroups, dtype=bool)
    if coef.size == 0:
        return vals, div
    if np.any(s <= -1.0):
        raise InadmissiblePair("combined exponent alpha + alpha' + beta + 1 must exceed -1")
    if hi <= lo:
        return vals, div
    if lo > 0:
        part = coef * _gamma_block(s, c, lo, hi)
        np.add.at(vals, group, part)
        return vals, div
    pos = s > 1e-13
    if pos.any():
        np.add.at(vals, group[pos], coef[pos] * _gamma_block(s[pos], c[pos], 0.0, hi))
    neg = ~pos
    if neg.any():
        keys = np.round(s[neg], S_KEY_DIGITS)
        idx = np.flatnonzero(neg)
        for gkey in set(zip(group[idx].tolist(), keys.tolist())):
            g, sk = gkey
            sel = idx[(group[idx] == g) & (keys == sk)]
            cf, cc = coef[sel], c[sel]
            net = cf.sum()
            if abs(net) > 1e-12 * max(np.abs(cf).sum(), 1e-300):
                div[g] = True
                continue
            if abs(sk) < 1e-13:
                val = -np.sum(cf * np.log(cc))
            else:
                val = math.gamma(sk + 1.0) / sk * np.sum(cf * np.expm1(-sk * np.log(cc)))
            if math.isfinite(hi):
                val -= np.sum(cf * cc ** (-sk) * numerics.upper_incomplete_gamma(np.full(cc.shape, sk), cc * hi))
            vals[g] += val
    return vals, div


def _pair_arrays(f, g, B, profile):
    coef, s, c = [], [], []
    for fa in f:
        left = fa.coef.conj()
        for ga in g:
            base = left @ (ga.coef if B is None else B @ ga.coef)
            if base == 0:
                continue
            for t in profile:
                coef.append(t.w * base)
                s.append(fa.alpha + ga.alpha + t.beta + 1.0)
                c.append(fa.a + ga.a + t.b)
    return np.array(coef, dtype=complex), np.array(s), np.array(c)


def gram(f, g, profile=LAMBDA, window=(0.0, math.inf), t=0.0, B=None, tol=None):
    """int over [max(u, t), v] of m(x) <f(x), B g(x)> dx, or DIVERGENT."""
    coef, s, c = _pair_arrays(f, g, None if B is None else np.asarray(B, dtype=complex), profile)
    lo = max(float(window[0]), float(t))
    vals, div = integrate_terms(coef, s, c, lo, float(window[1]), tol=tol)
    return DIVERGENT if div[0] else complex(vals[0])


def square_norm(atoms):
    """||f||^2 = int_0^inf |f|^2, DIVERGENT when some atom is not in L^2."""
    return gram(atoms, atoms, ONE)


def group_coefficients(atoms, key=("alpha", "a"), digits=S_KEY_DIGITS):
    """Sum coefficient vectors of atoms sharing the same (alpha[, a])."""
    out = {}
    for at in atoms:
        k = tuple(round(getattr(at, name), digits) for name in key)
        out[k] = out.get(k, 0) + at.coef
    return out


@dataclass
class WeightFamily:
    """theta_ij(A) = sum_k <F_ik, A F_jk>,  F_ik = L_i g_k + h_ik.

    ``lift[i]`` is the p x m isometry E_i1 V_1 carrying C^m onto the range of
    E_ii; the matrix units are recovered as E_nl = lift[n] lift[l]^*.
    """

    p: int
    q: int
    m: int
    lift: np.ndarray
    g: list
    h: list = field(default_factory=list)

    def __post_init__(self):
        self.lift = np.asarray(self.lift, dtype=complex).reshape(self.q, self.p, self.m)
        if not self.h:
            self.h = [[[] for _ in range(self.q)] for _ in self.g]
        if len(self.h) != len(self.g):
            raise SpecInvalid("h must have one entry per index k")
        for row in self.h:
            if len(row) != self.q:
                raise SpecInvalid("each h_k needs q components")

    @classmethod
    def standard(cls, q, m, g, h=None, p=None):
        p = q * m if p is None else p
        lift = np.zeros((q, p, m), dtype=complex)
        for i in range(q):
            lift[i, i * m:(i + 1) * m, :] = np.eye(m)
        return cls(p, q, m, lift, g, h or [])

    @property
    def J(self):
        return len(self.g)

    def units(self):
        return np.einsum("npm,lrm->nlpr", self.lift, self.lift.conj())

    def unit_of_range(self):
        return sum(self.lift[i] @ self.lift[i].conj().T for i in range(self.q))

    def F(self, i, k):
        lifted = [Atom(at.alpha, at.a, self.lift[i] @ at.coef) for at in self.g[k]]
        return lifted + list(self.h[k][i])

    def validate(self, tol=None):
        """Return a list of problems (empty when the family is admissible)."""
        tol = _tol(tol)
        issues = []
        for i in range(self.q):
            for j in range(self.q):
                G = self.lift[i].conj().T @ self.lift[j]
                want = np.eye(self.m) if i == j else np.zeros((self.m, self.m))
                if np.max(np.abs(G - want)) > tol.eps_eq * 10:
                    issues.append(f"lift {i},{j} is not a set of orthogonal isometries")
        for k, atoms in enumerate(self.g):
            for at in atoms:
                if at.coef.shape != (self.m,):
                    issues.append(f"g[{k}] coefficient has shape {at.coef.shape}, expected ({self.m},)")
        for k in range(self.J):
            pooled = []
            for i in range(self.q):
                for at in self.h[k][i]:
                    if at.coef.shape != (self.p,):
                        issues.append(f"h[{k}][{i}] coefficient has shape {at.coef.shape}")
                        continue
                    if at.divergent:
                        issues.append(f"h[{k}][{i}] has a non square-integrable atom (alpha <= -1/2)")
                    pooled.append(Atom(at.alpha, at.a, self.lift[i].conj().T @ at.coef))
            for key, v in group_coefficients(pooled).items():
                if np.max(np.abs(v)) > tol.eps_eq * 10:
                    issues.append(f"sum_i E_1i h_ik != 0 for k={k} at (alpha, a)={key}")
        return issues

    def scaled(self, factor):
        r = math.sqrt(factor)
        g = [[at.with_coef(r * at.coef) for at in atoms] for atoms in self.g]
        h = [[[at.with_coef(r * at.coef) for at in comp] for comp in row] for row in self.h]
        return WeightFamily(self.p, self.q, self.m, self.lift.copy(), g, h)


def evaluate_theta(W, obs, t=0.0, tol=None):
    """q x q coordinate matrix [theta_ij(obs restricted to [t, inf))], or DIVERGENT."""
    B = np.asarray(obs.B, dtype=complex)
    q = W.q
    coef, s, c, grp = [], [], [], []
    for k in range(W.J):
        Fs = [W.F(i, k) for i in range(q)]
        for i in range(q):
            for j in range(q):
                cc, ss, ce = _pair_arrays(Fs[i], Fs[j], B, obs.profile)
                coef.append(cc)
                s.append(ss)
                c.append(ce)
                grp.append(np.full(cc.shape, i * q + j))
    if not coef:
        return np.zeros((q, q), dtype=complex)
    lo = max(float(obs.window[0]), float(t))
    vals, div = integrate_terms(np.concatenate(coef), np.concatenate(s), np.concatenate(c), lo,
                                float(obs.window[1]), np.concatenate(grp), q * q, tol)
    if div.any():
        return DIVERGENT
    return vals.reshape(q, q)


def lambda_tilde_map(W, t=0.0, tol=None):
    """b -> theta(Lambda|_t(sum_nl b_nl E_nl)) as a map on q x q coordinates."""
    q = W.q
    E = W.units()
    cols = []
    for n in range(q):
        for l in range(q):
            v = evaluate_theta(W, Observable.lam(E[n, l]), t, tol)
            if is_divergent(v):
                return DIVERGENT
            cols.append(v.reshape(-1))
    return SuperOperator(np.array(cols).T, q, q)


@dataclass
class ThetaCutoff:
    t: float
    w: float
    Y: np.ndarray
    R: SuperOperator

    def reassemble(self):
        q = self.Y.shape[0]
        return (self.w * SuperOperator.identity(q) + SuperOperator.left_right(self.Y) + self.R)


def theta_cutoff(W, t, tol=None):
    """w_t iota + Y_t . + . Y_t* + R_t, the split of theta|_t Lambda~."""
    if not t > 0:
        raise ValueError("cutoff t must be positive")
    q = W.q
    w = sum(gram(W.g[k], W.g[k], LAMBDA, t=t, tol=tol) for k in range(W.J)) if W.J else 0.0
    Y = np.zeros((q, q), dtype=complex)
    for j in range(q):
        for l in range(q):
            Lc = W.lift[l].conj().T
            for k in range(W.J):
                hl = [Atom(at.alpha, at.a, Lc @ at.coef) for at in W.h[k][j]]
                if hl and W.g[k]:
                    Y[j, l] += gram(hl, W.g[k], LAMBDA, t=t, tol=tol)
    rho = rho_and_mu(W)[0]
    R = lambda_tilde_map(rho, t, tol)
    return ThetaCutoff(t, float(np.real(w)), Y, R)


def rho_and_mu(W):
    """(rho, mu): the h-only family and the scalar g-only weight on C^m."""
    rho = WeightFamily(W.p, W.q, W.m, W.lift.copy(), [[] for _ in range(W.J)],
                       [[list(comp) for comp in row] for row in W.h])
    mu = WeightFamily(W.m, 1, W.m, np.eye(W.m)[None], [list(atoms) for atoms in W.g])
    return rho, mu


# ---------------------------------------------------------------- rank checks

def _g_atoms(mu):
    return mu.g if isinstance(mu, WeightFamily) else list(mu)


def _divergent_exponents(g):
    return sorted({round(at.alpha, S_KEY_DIGITS) for atoms in g for at in atoms if at.divergent})


def leading_matrix(g, m):
    """Rows (alpha, component) over divergent alpha; column k = leading
    coefficient of g_k at x^alpha."""
    alphas = _divergent_exponents(g)
    M = np.zeros((len(alphas) * m, len(g)), dtype=complex)
    for k, atoms in enumerate(g):
        for at in atoms:
            if at.divergent:
                r = alphas.index(round(at.alpha, S_KEY_DIGITS))
                M[r * m:(r + 1) * m, k] += at.coef
    return M, alphas


def coefficient_matrix(g, dim):
    """Rows (alpha, a, component); kernel = linear relations sum c_k g_k = 0."""
    keys = sorted({(round(at.alpha, S_KEY_DIGITS), round(at.a, S_KEY_DIGITS)) for atoms in g for at in atoms})
    G = np.zeros((len(keys) * dim, len(g)), dtype=complex)
    for k, atoms in enumerate(g):
        for at in atoms:
            r = keys.index((round(at.alpha, S_KEY_DIGITS), round(at.a, S_KEY_DIGITS)))
            G[r * dim:(r + 1) * dim, k] += at.coef
    return G


def _normalize_witness(c):
    c = np.asarray(c, dtype=complex)
    j = int(np.argmax(np.abs(c) > np.max(np.abs(c)) * (1 - 1e-9)))
    c = c * (abs(c[j]) / c[j])
    c = c / np.max(np.abs(c))
    # round-off in the null space would otherwise reintroduce divergent atoms
    c[np.abs(c) < 1e-12] = 0.0
    return c


def combine(g, c):
    """Atoms of sum_k c_k g_k."""
    return [at.with_coef(ck * at.coef) for ck, atoms in zip(c, g) for at in atoms]


def strictly_infinite_mu(mu, tol=None):
    """True iff no nonzero combination sum c_k g_k lies in L^2.

    Witness on failure: coefficients c with sum c_k g_k nonzero and square
    integrable.
    """
    tol = _tol(tol)
    g = _g_atoms(mu)
    J = len(g)
    if J == 0:
        return Verdict(True)
    m = g[0][0].coef.shape[0] if g[0] else 1
    M, _ = leading_matrix(g, m)
    G = coefficient_matrix(g, m)
    NM = numerics.null_space(M, tol.eps_rank) if M.shape[0] else np.eye(J, dtype=complex)
    NG = numerics.null_space(G, tol.eps_rank) if G.shape[0] else np.eye(J, dtype=complex)
    if NM.shape[1] == NG.shape[1]:
        return Verdict(True)
    P = np.eye(J) - NG @ NG.conj().T
    cand = P @ NM
    j = int(np.argmax(np.linalg.norm(cand, axis=0)))
    return Verdict(False, _normalize_witness(cand[:, j]))


def h_independent_over_g(W, tol=None):
    """Every c with sum c_k g_k = 0 must also give sum c_k h_ik = 0."""
    tol = _tol(tol)
    J = W.J
    if J == 0:
        return Verdict(True)
    G = coefficient_matrix(W.g, W.m)
    NG = numerics.null_space(G, tol.eps_rank) if G.shape[0] else np.eye(J, dtype=complex)
    if NG.shape[1] == 0:
        return Verdict(True)
    blocks = [coefficient_matrix([W.h[k][i] for k in range(J)], W.p) for i in range(W.q)]
    H = np.vstack([b for b in blocks if b.size]) if any(b.size for b in blocks) else np.zeros((0, J))
    if H.shape[0] == 0:
        return Verdict(True)
    img = H @ NG
    norms = np.linalg.norm(img, axis=0)
    if np.max(norms) <= tol.eps_eq * max(1.0, float(np.linalg.norm(H))):
        return Verdict(True)
    j = int(np.argmax(norms))
    return Verdict(False, _normalize_witness(NG[:, j]))


def full_corner_divergence(mu, m=None, tol=None):
    """True iff <u, g_k> keeps a divergent atom for every unit u in C^m."""
    tol = _tol(tol)
    g = _g_atoms(mu)
    if m is None:
        m = mu.m if isinstance(mu, WeightFamily) else g[0][0].coef.shape[0]
    M, alphas = leading_matrix(g, m)
    # rows: (alpha, k); entry = <u, lead_{alpha,k}> as a linear form in u
    rows = []
    for r in range(len(alphas)):
        for k in range(len(g)):
            rows.append(M[r * m:(r + 1) * m, k].conj())
    A = np.array(rows, dtype=complex) if rows else np.zeros((0, m), dtype=complex)
    N = numerics.null_space(A, tol.eps_rank) if A.shape[0] else np.eye(m, dtype=complex)
    if N.shape[1] == 0:
        return Verdict(True)
    u = N[:, 0]
    u = u * (abs(u[np.argmax(np.abs(u))]) / u[np.argmax(np.abs(u))])
    return Verdict(False, u)


def corner_weight(mu, u, t=0.0, tol=None):
    """mu(Lambda|_t(u u*)), DIVERGENT when infinite."""
    g = _g_atoms(mu)
    u = np.asarray(u, dtype=complex)
    P = np.outer(u, u.conj())
    total = 0.0
    for atoms in g:
        v = gram(atoms, atoms, LAMBDA, t=t, B=P, tol=tol)
        if is_divergent(v):
            return DIVERGENT
        total += v
    return total


def lambda_cutoff_choi(W, t, tol=None):
    """Choi matrix of b -> theta(Lambda|_t(b)) over the whole ambient M_p.

    Used for CP dominance of one family over another.
    """
    p, q = W.p, W.q
    cols = []
    for n in range(p):
        for l in range(p):
            B = np.zeros((p, p), dtype=complex)
            B[n, l] = 1.0
            v = evaluate_theta(W, Observable.lam(B), t, tol)
            if is_divergent(v):
                return DIVERGENT
            cols.append(v.reshape(-1))
    return SuperOperator(np.array(cols).T, p, q).choi()


def dominates(W1, W2, t_grid, tol=None):
    """theta_1 - theta_2 CP on every Lambda|_t cutoff of the grid."""
    for t in t_grid:
        C1 = lambda_cutoff_choi(W1, t, tol)
        C2 = lambda_cutoff_choi(W2, t, tol)
        ok, w = numerics.min_eig_psd_test(C1 - C2, tol)
        if not ok:
            return Verdict(False, {"t": t, "vector": w})
    return Verdict(True)


def r_monotone(W, t, s, tol=None):
    """R_t - R_s is CP for t <= s."""
    Rt = theta_cutoff(W, t, tol).R
    Rs = theta_cutoff(W, s, tol).R
    return is_completely_positive(Rt - Rs, tol)
