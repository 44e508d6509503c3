"""q-weight maps omega = psi^-1 theta over a factor range.

Everything is computed in the coordinates of the range matrix units: a range
element sum_ij c_ij E_ij is stored as the q x q matrix c, so psi and the
skeleton phi_t are maps on M_q and every resolvent is a q^2 x q^2 inverse.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad_vec

from . import numerics
from .bweight import (
    LAMBDA,
    ONE,
    ONE_MINUS_LAMBDA,
    Atom,
    Observable,
    WeightFamily,
    corner_weight,
    dominates,
    evaluate_theta,
    full_corner_divergence,
    gram,
    group_coefficients,
    h_independent_over_g,
    is_divergent,
    lambda_tilde_map,
    rho_and_mu,
    strictly_infinite_mu,
)
from .condform import ConditionalClass, canonical_form, classify
from .errors import (
    ConditionalNegativityFailure,
    DomainError,
    EtaNotDominated,
    NotQPure,
    NotUnital,
    PsiInverseNotCP,
    PsiNotInvertible,
    PsiPrimeConditionFailure,
    SingularResolvent,
    SpecInvalid,
    UnitInequalityFailure,
    WitnessMalformed,
)
from .numerics import Verdict, _tol
from .superop import SuperOperator, is_completely_positive

NEGATIVE_SIDE = (ConditionalClass.NEGATIVE, ConditionalClass.ZERO)


def dyadic_grid(j_max=14, j_min=0):
    """t = 2^-j for j = j_min..j_max, strictly decreasing."""
    return [2.0 ** -j for j in range(j_min, j_max + 1)]


def parse_grid(text):
    """'start:stop:log:count' (or ':lin:') into a strictly decreasing list."""
    parts = text.split(":")
    if len(parts) != 4:
        raise ValueError("grid must look like start:stop:log:count")
    a, b, kind, n = float(parts[0]), float(parts[1]), parts[2], int(parts[3])
    if n < 2 or a <= 0 or b <= 0 or a == b:
        raise ValueError("grid needs positive distinct endpoints and at least two points")
    if kind == "log":
        pts = np.geomspace(a, b, n)
    elif kind == "lin":
        pts = np.linspace(a, b, n)
    else:
        raise ValueError(f"unknown grid spacing {kind!r}")
    return sorted(set(float(x) for x in pts), reverse=True)


def _check_decreasing(t_grid):
    t = list(map(float, t_grid))
    if not t or any(x <= 0 for x in t):
        raise DomainError("grid points must be positive")
    if any(b >= a for a, b in zip(t, t[1:])):
        raise DomainError("grid must be strictly decreasing")
    return t


@dataclass
class QWeightSpec:
    """(psi, theta) with theta given by a weight family; ``eta`` is an optional
    bounded family subtracted from theta (subordinates)."""

    psi: SuperOperator
    weights: WeightFamily
    eta: WeightFamily = None

    @property
    def p(self):
        return self.weights.p

    @property
    def q(self):
        return self.weights.q

    @property
    def m(self):
        return self.weights.m

    @property
    def units(self):
        return self.weights.units()

    def scaled(self, factor):
        eta = None if self.eta is None else self.eta.scaled(factor)
        return QWeightSpec(factor * self.psi, self.weights.scaled(factor), eta)


class QWeightMap:
    """Validated q-weight map.  Immutable after construction apart from caches."""

    def __init__(self, spec, checks, unital, tol):
        self.spec = spec
        self.checks = checks
        self.unital = unital
        self.tol = tol
        self.psi = spec.psi
        self.psi_inv = spec.psi.inverse()
        self.rho_lam = _rho_lambda(spec)
        self._lam_cache = {}

    # dimensions -------------------------------------------------------
    @property
    def p(self):
        return self.spec.p

    @property
    def q(self):
        return self.spec.q

    @property
    def m(self):
        return self.spec.m

    @property
    def units(self):
        return self.spec.units

    @property
    def I_o(self):
        return self.spec.weights.unit_of_range()

    def to_ambient(self, c):
        return np.einsum("ij,ijab->ab", np.asarray(c), self.units)

    # weights ----------------------------------------------------------
    def theta(self, obs, t=0.0):
        """(theta - eta)(obs restricted to [t, inf)) in range coordinates."""
        v = evaluate_theta(self.spec.weights, obs, t, self.tol)
        if is_divergent(v) or self.spec.eta is None:
            return v
        e = evaluate_theta(self.spec.eta, obs, t, self.tol)
        return v - e

    def lam_tilde(self, t):
        """theta|_t Lambda~ (minus the eta part) on M_q."""
        key = float(t)
        if key not in self._lam_cache:
            L = lambda_tilde_map(self.spec.weights, key, self.tol)
            if self.spec.eta is not None and not is_divergent(L):
                L = L - lambda_tilde_map(self.spec.eta, key, self.tol)
            self._lam_cache[key] = L
        return self._lam_cache[key]

    def omega(self, obs, t=0.0):
        """omega|_t(obs) in range coordinates."""
        v = self.theta(obs, t)
        if is_divergent(v):
            return v
        return self.psi_inv(v)

    def skeleton(self, t):
        if not t > 0:
            raise DomainError("skeleton needs t > 0")
        return self.psi_inv @ self.lam_tilde(t)

    def resolvent(self, t):
        """(iota + phi_t)^-1 on M_q."""
        A = SuperOperator.identity(self.q) + self.skeleton(t)
        if np.linalg.cond(A.action) > 1e12:
            raise SingularResolvent(f"iota + phi_t is singular at t={t}")
        return A.inverse()

    def boundary_rep(self, obs, t):
        """pi_t^#(obs) in range coordinates."""
        if not t > 0:
            raise DomainError("boundary representation needs t > 0")
        v = self.omega(obs, t)
        if is_divergent(v):
            return v
        return self.resolvent(t)(v)

    def pi_map(self, t, profile=LAMBDA, window=(0.0, math.inf)):
        """b in M_p -> pi_t^#(b (x) profile) as a map M_p -> M_q."""
        p = self.p
        R = self.resolvent(t) @ self.psi_inv
        cols = []
        for n in range(p):
            for l in range(p):
                B = np.zeros((p, p), dtype=complex)
                B[n, l] = 1.0
                cols.append(R(self.theta(Observable(B, profile, window), t)).reshape(-1))
        return SuperOperator(np.array(cols).T, p, self.q)


def _rho_lambda(spec, tol=None):
    rho, _ = rho_and_mu(spec.weights)
    L = lambda_tilde_map(rho, 0.0, tol)
    if spec.eta is not None:
        L = L - lambda_tilde_map(spec.eta, 0.0, tol)
    return L


def theta_of_unit_gap(W, tol=None):
    """theta(I - Lambda(I_o)) = theta(I_o (x) (1 - e^-x)) + theta((I - I_o) (x) 1)."""
    I_o = W.unit_of_range()
    v = evaluate_theta(W, Observable.one_minus_lam(I_o), 0.0, tol)
    return v + evaluate_theta(W, Observable.identity(np.eye(W.p) - I_o), 0.0, tol)


def _unit_matrix(spec, tol):
    v = theta_of_unit_gap(spec.weights, tol)
    if spec.eta is not None:
        v = v - theta_of_unit_gap(spec.eta, tol)
    return v


def _theta_unbounded(W, tol):
    return any(is_divergent(gram(atoms, atoms, LAMBDA, tol=tol)) for atoms in W.g)


def assemble(spec, tol=None):
    """Validate (psi, theta) and return the q-weight map handle."""
    tol = _tol(tol)
    W = spec.weights
    issues = W.validate(tol)
    if issues:
        raise SpecInvalid("; ".join(issues))
    if spec.psi.dim_in != W.q or spec.psi.dim_out != W.q:
        raise SpecInvalid(f"psi acts on M_{spec.psi.dim_in}, range coordinates are M_{W.q}")
    if not spec.psi.is_hermitian(tol):
        raise ConditionalNegativityFailure("psi is not a hermitian map")
    if not _theta_unbounded(W, tol):
        raise SpecInvalid("theta(Lambda) is finite: some g_k needs a non square-integrable atom")
    if np.linalg.cond(spec.psi.action) > 1.0 / tol.eps_rank:
        raise PsiNotInvertible("psi is singular")
    inv = spec.psi.inverse()
    v = is_completely_positive(inv, tol)
    if not v:
        raise PsiInverseNotCP(f"Choi form of psi^-1 reaches {v.detail['quadratic_form']:.3e}")
    rho_lam = _rho_lambda(spec, tol)
    cls = classify(spec.psi + rho_lam, tol)
    if cls.kind not in NEGATIVE_SIDE:
        raise ConditionalNegativityFailure(f"psi + rho Lambda~ is {cls.kind.value}")
    q = W.q
    top = spec.psi(np.eye(q))
    bottom = _unit_matrix(spec, tol)
    gap = top - bottom
    ok, w = numerics.min_eig_psd_test(gap, tol)
    if not ok:
        raise UnitInequalityFailure("psi(I_o) - theta(I - Lambda(I_o)) is not positive")
    scale = max(1.0, float(np.max(np.abs(top))))
    unital = bool(np.max(np.abs(gap)) <= tol.eps_eq * 10 * scale)
    checks = {"psi_inverse_cp": True, "conditional_class": cls.kind.value,
              "unit_gap_min_eig": float(np.min(np.linalg.eigvalsh(0.5 * (gap + gap.conj().T))))}
    return QWeightMap(spec, checks, unital, tol)


# ------------------------------------------------------------------ skeleton

def _cp(phi, tol):
    return bool(is_completely_positive(phi, tol))


def condition_iv(omega, t, s, r):
    """(iota + phi_t)^-1 (phi_s - phi_r) CP, for t <= s <= r."""
    if not (t <= s <= r):
        raise DomainError("condition (iv) needs t <= s <= r")
    return _cp(omega.resolvent(t) @ (omega.skeleton(s) - omega.skeleton(r)), omega.tol)


def integration_identity(omega, t, tol=None):
    """omega|_t(I) against e^t phi_t(I) + int_t^inf e^s phi_s(I) ds.

    Returns (defect, quadrature error estimate, reference norm).
    """
    tol = _tol(tol)
    p = omega.p
    I = np.eye(p, dtype=complex)
    lamI = Observable.lam(I)

    def phiI(s):
        v = omega.theta(lamI, s)
        return omega.psi_inv(v)

    def f(s):
        if s > 700.0:
            return np.zeros(omega.q * omega.q * 2)
        v = math.exp(s) * phiI(s).reshape(-1)
        return np.concatenate([v.real, v.imag])

    val, err = quad_vec(f, t, math.inf, epsabs=0.0, epsrel=1e-11, limit=400)
    n = omega.q * omega.q
    integral = (val[:n] + 1j * val[n:]).reshape(omega.q, omega.q)
    rhs = math.exp(t) * phiI(t) + integral
    lhs = omega.omega(Observable.identity(I), t)
    ref = max(1.0, float(np.max(np.abs(lhs))))
    return float(np.max(np.abs(lhs - rhs))) / ref, float(err) / ref, ref


def skeleton_suite(omega, t_grid, identity_tol=1e-7, with_identity=True):
    """Check the seven skeleton properties on the grid and the integration identity."""
    t = _check_decreasing(t_grid)
    tol = omega.tol
    q = omega.q
    iota = SuperOperator.identity(q)
    phi = {x: omega.skeleton(x) for x in t}
    res = {x: omega.resolvent(x) for x in t}
    asc = sorted(t)
    fails = {k: [] for k in ("i", "ii", "iii", "iv", "v", "vi", "vii")}
    I_full = Observable.identity(np.eye(omega.p))
    for a in asc:
        if not _cp(phi[a], tol):
            fails["i"].append(a)
        Rt = res[a] @ phi[a]
        if not (_cp(Rt, tol) and np.linalg.norm(Rt(np.eye(q)), 2) <= 1 + tol.eps_eq * 10):
            fails["iii"].append(a)
        top = res[a](omega.omega(I_full, a))
        if not numerics.is_psd(np.eye(q) - top, tol):
            fails["v"].append(a)
    for i, a in enumerate(asc):
        for b in asc[i + 1:]:
            if not _cp(phi[a] - phi[b], tol):
                fails["ii"].append((a, b))
            ratio = res[a] @ (iota + phi[b])
            if not _cp(iota - ratio, tol):
                fails["vi"].append((a, b))
            if classify(ratio, tol).kind not in NEGATIVE_SIDE:
                fails["vii"].append((a, b))
    for i, a in enumerate(asc):
        for j in range(i, len(asc)):
            for k in range(j, len(asc)):
                b, c = asc[j], asc[k]
                if b == c:
                    continue
                if not _cp(res[a] @ (phi[b] - phi[c]), tol):
                    fails["iv"].append((a, b, c))
    report = {"grid": t, "conditions": {k: not v for k, v in fails.items()}, "failures": fails}
    if with_identity:
        rows = []
        for x in t:
            defect, err, ref = integration_identity(omega, x, tol)
            rows.append({"t": x, "defect": defect, "quad_error": err})
        report["integration_identity"] = rows
        report["integration_ok"] = all(r["defect"] <= identity_tol for r in rows)
    report["ok"] = all(report["conditions"].values()) and report.get("integration_ok", True)
    return report


def is_admissible_skeleton(phis, tol=None):
    """Skeleton properties for a bare decreasing-t family of maps on M_q.

    Only validation; realizing a q-weight map from a skeleton is not attempted.
    """
    tol = _tol(tol)
    keys = sorted(phis)
    q = phis[keys[0]].dim_in
    iota = SuperOperator.identity(q)
    for i, a in enumerate(keys):
        if not _cp(phis[a], tol):
            return Verdict(False, {"condition": "i", "t": a})
        R = (iota + phis[a]).inverse()
        if not _cp(R @ phis[a], tol):
            return Verdict(False, {"condition": "iii", "t": a})
        for b in keys[i + 1:]:
            if not _cp(phis[a] - phis[b], tol):
                return Verdict(False, {"condition": "ii", "t": (a, b)})
            if not _cp(iota - R @ (iota + phis[b]), tol):
                return Verdict(False, {"condition": "vi", "t": (a, b)})
    return Verdict(True)


# ------------------------------------------------------------- boundary reps

def boundary_report(omega, t_grid):
    t = _check_decreasing(t_grid)
    q = omega.q
    rows = []
    I_full = Observable.identity(np.eye(omega.p))
    for x in t:
        cp = all(_cp(omega.pi_map(x, prof), omega.tol) for prof in (LAMBDA, ONE))
        top = omega.boundary_rep(I_full, x)
        rows.append({
            "t": x,
            "cp": cp,
            "norm_of_unit": float(np.linalg.norm(top, 2)),
            "below_unit": numerics.is_psd(np.eye(q) - top, omega.tol),
        })
    return {"grid": t, "rows": rows}


def index_zero_diagnostic(omega, s, t_grid):
    """||pi_t^#(I (x) 1_[s, inf))|| along a grid below s."""
    if not s > 0:
        raise DomainError("s must be positive")
    t = _check_decreasing(t_grid)
    if t[0] >= s:
        raise DomainError("grid must lie below s")
    obs = Observable.identity(np.eye(omega.p), s)
    norms = [float(np.linalg.norm(omega.boundary_rep(obs, x), 2)) for x in t]
    monotone = all(b <= a * (1 + 1e-12) + 1e-15 for a, b in zip(norms, norms[1:]))
    x = np.array([1.0 / _v(omega, tt) for tt in t[-3:]])
    y = np.array(norms[-3:])
    limit = float(np.polyval(np.polyfit(x, y, 1), 0.0)) if len(t) >= 3 else norms[-1]
    return {"s": s, "grid": t, "norms": norms, "monotone": monotone, "limit_estimate": limit}


# --------------------------------------------------------------- theta limit

def _v(omega, t):
    q = omega.q
    return float(np.real(np.trace(np.eye(q) + omega.skeleton(t)(np.eye(q))))) / q


def theta_limit(omega, t_grid, fit_points=5, degree=3):
    """Cauchy diagnostics of Theta_t = v_t^-1 (iota + phi_t) and the distance of
    the extrapolated Theta^-1 from the ray through psi."""
    t = _check_decreasing(t_grid)
    q = omega.q
    iota = SuperOperator.identity(q)
    thetas, inverses, vs = [], [], []
    for x in t:
        v = _v(omega, x)
        Th = (iota + omega.skeleton(x)) / v
        thetas.append(Th.action)
        inverses.append(v * omega.resolvent(x).action)
        vs.append(v)
    diffs = [float(np.linalg.norm(b - a)) for a, b in zip(thetas, thetas[1:])]
    tail = [float(d) for d in diffs]
    monotone = all(b <= a * (1 + 1e-9) + 1e-14 for a, b in zip(tail, tail[1:]))
    k = min(fit_points, len(t))
    deg = min(degree, k - 1)
    xs = np.array([1.0 / v for v in vs[-k:]])
    Y = np.array([M.reshape(-1) for M in inverses[-k:]])
    if deg >= 1:
        coef = np.polynomial.polynomial.polyfit(xs, Y.real, deg)[0] + 1j * np.polynomial.polynomial.polyfit(xs, Y.imag, deg)[0]
    else:
        coef = Y[-1]
    limit = coef.reshape(q * q, q * q)
    P = omega.psi.action
    kappa = float(np.real(np.vdot(P, limit)) / np.real(np.vdot(P, P)))
    dist = float(np.linalg.norm(limit - kappa * P) / max(np.linalg.norm(kappa * P), 1e-300))
    return {"grid": t, "cauchy": diffs, "monotone": monotone, "v": vs,
            "limit_inverse": limit, "scale": kappa, "relative_distance": dist}


# --------------------------------------------------------------- subordinates

def trivial_subordinate_check(omega, psi_prime, tol=None):
    """omega' = psi'^-1 theta is a q-subordinate of omega iff psi' - psi is CP."""
    tol = _tol(tol)
    assemble(QWeightSpec(psi_prime, omega.spec.weights, omega.spec.eta), tol)
    return is_completely_positive(psi_prime - omega.psi, tol)


def pi_difference_cp(omega, other, t_grid):
    """pi_t^# - pi'_t^# CP on the Lambda and 1 profiles at each grid point."""
    for x in _check_decreasing(t_grid):
        for prof in (LAMBDA, ONE):
            if not _cp(omega.pi_map(x, prof) - other.pi_map(x, prof), omega.tol):
                return Verdict(False, {"t": x, "profile": "Lambda" if prof is LAMBDA else "1"})
    return Verdict(True)


def construct_subordinate(omega, eta, psi_prime, t_grid=None, tol=None):
    """omega' = psi'^-1 (theta - eta) for a bounded eta dominated by theta."""
    tol = _tol(tol)
    grid = dyadic_grid(10) if t_grid is None else _check_decreasing(t_grid)
    if eta is None:
        eta = WeightFamily(omega.p, omega.q, omega.m, omega.spec.weights.lift.copy(), [])
    for atoms in eta.g:
        if any(at.divergent for at in atoms):
            raise EtaNotDominated("eta must be built from square-integrable atoms")
    for row in eta.h:
        for comp in row:
            if any(at.divergent for at in comp):
                raise EtaNotDominated("eta must be built from square-integrable atoms")
    if eta.J:
        if omega.spec.eta is not None:
            raise EtaNotDominated("nested subordinates are not supported")
        dom = dominates(omega.spec.weights, eta, grid, tol)
        if not dom:
            raise EtaNotDominated(f"theta - eta fails CP on the cutoff t={dom.witness['t']}")
        eta_lam = lambda_tilde_map(eta, 0.0, tol)
    else:
        eta_lam = SuperOperator.zero(omega.q)
    if not is_completely_positive(psi_prime - omega.psi - eta_lam, tol):
        raise PsiPrimeConditionFailure("psi' - psi - eta Lambda~ is not CP")
    if classify(psi_prime + omega.rho_lam - eta_lam, tol).kind not in NEGATIVE_SIDE:
        raise PsiPrimeConditionFailure("psi' + rho Lambda~ - eta Lambda~ is not conditionally negative")
    sub = assemble(QWeightSpec(psi_prime, omega.spec.weights, eta if eta.J else None), tol)
    check = pi_difference_cp(omega, sub, grid)
    sub.checks["pi_difference_cp"] = bool(check)
    return sub


# -------------------------------------------------------------------- purity

@dataclass
class PurityCertificate:
    condition_i: Verdict
    condition_ii: Verdict
    condition_iii: Verdict
    witnesses: dict = field(default_factory=dict)

    @property
    def verdict(self):
        return bool(self.condition_i) and bool(self.condition_ii) and bool(self.condition_iii)


def _negative_direction(L, tol):
    """Traceless X with sum_nm (X e_n, L(e_nm) X e_m) < 0, or None."""
    cf = canonical_form(L, tol)
    if not len(cf.lambdas):
        return None
    k = int(np.argmin(cf.lambdas))
    X = cf.X[k]
    A = [np.eye(cf.dim)[[0]].T @ np.eye(cf.dim)[[n]] for n in range(cf.dim)]
    f = [X[:, n].copy() for n in range(cf.dim)]
    return {"X": X, "lambda": float(cf.lambdas[k]), "A": A, "f": f}


def certify_q_pure(omega, tol=None):
    tol = _tol(tol)
    L = omega.psi + omega.rho_lam
    cls = classify(L, tol)
    if cls.kind is ConditionalClass.ZERO:
        ci = Verdict(True, None, {"class": cls.kind.value})
    else:
        ci = Verdict(False, _negative_direction(L, tol), {"class": cls.kind.value})
    _, mu = rho_and_mu(omega.spec.weights)
    si = strictly_infinite_mu(mu, tol)
    hi = h_independent_over_g(omega.spec.weights, tol)
    cii = Verdict(bool(si) and bool(hi), si.witness if not si else hi.witness,
                  {"strictly_infinite": bool(si), "h_independent": bool(hi)})
    ciii = full_corner_divergence(mu, tol=tol)
    wit = {}
    if not ci:
        wit["i"] = ci.witness
    if not cii:
        wit["ii"] = cii.witness
    if not ciii:
        wit["iii"] = ciii.witness
    return PurityCertificate(ci, cii, ciii, wit)


# ---------------------------------------------------------- rank-one reduction

@dataclass
class CornerCertificate:
    enlarged: QWeightMap
    Z0: np.ndarray
    z: np.ndarray
    gauge_C: np.ndarray
    s0: float
    hyper_maximal: bool
    resolvents_differ: bool
    corner_acts_as_Z0: bool
    shur_defect: float = None


def rank_one_spec(mu, s0):
    """eta = s0^-1 I_m mu as a q = 1 spec."""
    return QWeightSpec(SuperOperator(np.array([[s0]]), 1, 1), mu)


def _embed(vec_, p_new):
    out = np.zeros(p_new, dtype=complex)
    out[:vec_.shape[0]] = vec_
    return out


def reduce_to_rank_one(omega, tol=None, sweep=None):
    """Pass to the rank-one map eta over C^m and build the corner certificate."""
    tol = _tol(tol)
    if not omega.unital:
        raise NotUnital("rank-one reduction needs a unital map")
    if omega.spec.eta is not None:
        raise SpecInvalid("reduction expects a map of the form psi^-1 theta")
    W = omega.spec.weights
    q, m = W.q, W.m
    if W.p != q * m:
        raise SpecInvalid(f"reduction needs p = qm (p={W.p}, q={q}, m={m})")
    cert = certify_q_pure(omega, tol)
    if not cert.verdict:
        raise NotQPure("purity certificate failed")
    _, mu = rho_and_mu(W)
    s0 = evaluate_theta(mu, Observable.one_minus_lam(np.eye(m)), 0.0, tol)
    s0 = float(np.real(s0[0, 0]))
    eta = assemble(rank_one_spec(mu, s0), tol)

    cf = canonical_form(omega.psi + omega.rho_lam, tol)
    Q = 0.5 * cf.s * np.eye(q) + cf.Y
    r = q + 1
    pn = r * m
    h_new = []
    for k in range(W.J):
        row = [[Atom(at.alpha, at.a, _embed(at.coef, pn)) for at in W.h[k][i]] for i in range(q)]
        row.append([])
        h_new.append(row)
    W2 = WeightFamily.standard(r, m, [list(a) for a in W.g], h_new)
    Qp = np.zeros((r, r), dtype=complex)
    Qp[:q, :q] = Q
    Qp[q, q] = 0.5 * s0
    rho2, _ = rho_and_mu(W2)
    psi2 = SuperOperator.left_right(Qp) - lambda_tilde_map(rho2, 0.0, tol)
    big = assemble(QWeightSpec(psi2, W2), tol)

    Z0 = Q + 0.5 * s0 * np.eye(q)
    z = np.linalg.eigvals(Z0)
    hyper = bool(np.all(z.real > 0))
    differ = all(np.max(np.abs(np.linalg.inv(Z0 + lam * np.eye(q)) - np.linalg.inv(Z0))) > tol.eps_eq
                 for lam in (1e-3, 1e-1, 1.0, 10.0))
    acts = True
    for i in range(q):
        e = np.zeros((r, r), dtype=complex)
        e[i, q] = 1.0
        col = psi2(e)[:q, q]
        if np.max(np.abs(col - Z0[:, i])) > tol.eps_eq * 10 * max(1.0, float(np.max(np.abs(Z0)))):
            acts = False
    corner = CornerCertificate(big, Z0, z, (Q - Q.conj().T) / 2j, s0, hyper, differ, acts)
    corner.shur_defect = shur_block_defect(omega, eta, big, sweep)
    return eta, corner


def observable_sweep(p, count=20, seed=0):
    """Deterministic finite observables on C^p (bounded profiles or windows)."""
    rng = np.random.default_rng(seed)
    shapes = [(ONE_MINUS_LAMBDA, (0.0, math.inf), 0.0),
              (LAMBDA, (0.0, math.inf), 0.25),
              (ONE, (0.5, 2.0), 0.0),
              (ONE, (0.0, math.inf), 0.125)]
    out = []
    for k in range(count):
        prof, win, t = shapes[k % len(shapes)]
        B = numerics.random_complex(rng, (p, p))
        out.append((Observable(B, prof, win), t))
    return out


def shur_block_defect(omega, eta, big, sweep=None):
    """max deviation of the E- and F-blocks of omega' from omega and eta."""
    q, m = omega.q, omega.m
    pn = big.p
    sweep = observable_sweep(omega.p, 20) if sweep is None else sweep
    worst = 0.0
    for obs, t in sweep:
        B = np.zeros((pn, pn), dtype=complex)
        B[:q * m, :q * m] = obs.B
        ref = omega.omega(obs, t)
        got = big.omega(Observable(B, obs.profile, obs.window), t)
        worst = max(worst, float(np.max(np.abs(got[:q, :q] - ref))),
                    float(np.max(np.abs(got[q:, :]))), float(np.max(np.abs(got[:, q:]))))
    for k, (obs, t) in enumerate(observable_sweep(m, 20, seed=1)):
        B = np.zeros((pn, pn), dtype=complex)
        B[q * m:, q * m:] = obs.B
        ref = eta.omega(obs, t)
        got = big.omega(Observable(B, obs.profile, obs.window), t)
        worst = max(worst, float(abs(got[q, q] - ref[0, 0])),
                    float(np.max(np.abs(got[:q, :]))), float(np.max(np.abs(got[:, :q]))))
    return worst


# --------------------------------------------------------------- conjugacy

def verify_conjugacy_witness(omega1, omega2, U, lam, h_corrections=None, tol=None):
    """Check g_k = lam U f_k + h_k with U a partial isometry from T1 to T2.

    f_k, g_k are the lifted atoms L_1 g_k of the two rank-one maps and every
    h_k has to be square integrable.
    """
    tol = _tol(tol)
    W1, W2 = omega1.spec.weights, omega2.spec.weights
    if W1.q != 1 or W2.q != 1:
        raise WitnessMalformed("conjugacy witnesses are defined for range rank one")
    U = np.asarray(U, dtype=complex)
    if U.shape != (W2.p, W1.p):
        raise WitnessMalformed(f"U must be {W2.p} x {W1.p}")
    if W1.J != W2.J:
        raise WitnessMalformed("the two families need the same index set")
    if not (lam > 0):
        raise WitnessMalformed("lambda must be positive")
    T1, T2 = W1.unit_of_range(), W2.unit_of_range()
    eq = tol.eps_eq * 10
    d1 = float(np.max(np.abs(U.conj().T @ U - T1)))
    d2 = float(np.max(np.abs(U @ U.conj().T - T2)))
    if d1 > eq or d2 > eq:
        return Verdict(False, None, {"reason": "U is not a partial isometry between the ranges",
                                     "UstarU_defect": d1, "UUstar_defect": d2})
    h_corrections = [[] for _ in range(W1.J)] if h_corrections is None else h_corrections
    if len(h_corrections) != W1.J:
        raise WitnessMalformed("one correction per index k is required")
    for k in range(W1.J):
        f = W1.F(0, k)
        g = W2.F(0, k)
        h = list(h_corrections[k])
        if any(at.divergent for at in h):
            return Verdict(False, k, {"reason": "correction is not square integrable"})
        resid = list(g) + [at.with_coef(-lam * (U @ at.coef)) for at in f] + [at.with_coef(-at.coef) for at in h]
        for key, v in group_coefficients(resid).items():
            if np.max(np.abs(v)) > eq * max(1.0, lam):
                return Verdict(False, k, {"reason": "atom identity fails", "alpha_a": key})
    return Verdict(True)
