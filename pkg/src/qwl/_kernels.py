"""Hot kernels for the upper incomplete gamma function.

Two interchangeable implementations live here: a scalar kernel compiled
with numba and a vectorized pure-numpy kernel.  ``QWL_DISABLE_NUMBA=1``
forces the numpy path (also used automatically when numba is missing).
"""

import math
import os

import numpy as np
from scipy.special import zeta

EULER_GAMMA = 0.57721566490153286060651209008240243
_MAXIT = 500
_EPS = 1e-16
_FPMIN = 1e-300
# below this |s| the exponent is treated as exactly zero (E1 branch)
S_ZERO_SNAP = 1e-13
SMALL_S = 0.5
_ZETA = zeta(np.arange(2.0, 64.0))

_disabled = os.environ.get("QWL_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _disabled:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via the env flag
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f


def _lower_series(a, x):
    # gamma(a, x) for a > 0, x > 0
    ap = a
    total = 1.0 / a
    term = total
    for _ in range(_MAXIT):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x))


def _upper_cf(a, x):
    # modified Lentz evaluation of the continued fraction for Gamma(a, x)
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAXIT):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return math.exp(-x + a * math.log(x)) * h


def _lgamma1p(a):
    # log Gamma(1 + a) for |a| < SMALL_S; forming 1 + a first would lose the low digits of a
    total = 0.0
    power = -a
    for k in range(_ZETA.shape[0]):
        power *= -a
        total += _ZETA[k] * power / (k + 2)
    return total - EULER_GAMMA * a


def _upper_small_s(a, x):
    # Gamma(a, x) for small |a| and moderate x without the Gamma(a) - gamma(a, x) cancellation
    lead = (math.expm1(_lgamma1p(a)) - math.expm1(a * math.log(x))) / a
    total = 0.0
    term = 1.0
    for n in range(1, _MAXIT):
        term *= -x / n
        add = term / (a + n)
        total += add
        if abs(add) < abs(total) * _EPS:
            break
    return lead - math.exp(a * math.log(x)) * total


def _e1(x):
    if x < 1.0:
        total = 0.0
        term = 1.0
        for n in range(1, _MAXIT):
            term *= -x / n
            add = -term / n
            total += add
            if abs(add) < abs(total) * _EPS:
                break
        return -EULER_GAMMA - math.log(x) + total
    return _upper_cf(0.0, x)


def _gamma_upper_py(s, x):
    if x == 0.0:
        return math.gamma(s)
    if abs(s) < S_ZERO_SNAP:
        return _e1(x)
    if abs(s) < SMALL_S and x < max(1.0, s + 1.0):
        return _upper_small_s(s, x)
    if s > 0.0:
        if x < s + 1.0:
            return math.gamma(s) - _lower_series(s, x)
        return _upper_cf(s, x)
    # -1 < s < 0
    if x >= 1.0:
        return _upper_cf(s, x)
    return (_gamma_upper_py(s + 1.0, x) - math.exp(s * math.log(x) - x)) / s


def _gamma_lower_py(s, x):
    if x == 0.0:
        return 0.0
    if x < s + 1.0:
        return _lower_series(s, x)
    return math.gamma(s) - _upper_cf(s, x)


if HAVE_NUMBA:
    _lower_series_nb = njit(cache=True)(_lower_series)
    _upper_cf_nb = njit(cache=True)(_upper_cf)
    _lgamma1p_nb = njit(cache=True)(_lgamma1p)

    @njit(cache=True)
    def _upper_small_s_nb(a, x):
        lead = (math.expm1(_lgamma1p_nb(a)) - math.expm1(a * math.log(x))) / a
        total = 0.0
        term = 1.0
        for n in range(1, _MAXIT):
            term *= -x / n
            add = term / (a + n)
            total += add
            if abs(add) < abs(total) * _EPS:
                break
        return lead - math.exp(a * math.log(x)) * total

    @njit(cache=True)
    def _e1_nb(x):
        if x < 1.0:
            total = 0.0
            term = 1.0
            for n in range(1, _MAXIT):
                term *= -x / n
                add = -term / n
                total += add
                if abs(add) < abs(total) * _EPS:
                    break
            return -EULER_GAMMA - math.log(x) + total
        return _upper_cf_nb(0.0, x)

    @njit(cache=True)
    def _gamma_upper_nb(s, x):
        if x == 0.0:
            return math.gamma(s)
        if abs(s) < S_ZERO_SNAP:
            return _e1_nb(x)
        if abs(s) < SMALL_S and x < max(1.0, s + 1.0):
            return _upper_small_s_nb(s, x)
        if s > 0.0:
            if x < s + 1.0:
                return math.gamma(s) - _lower_series_nb(s, x)
            return _upper_cf_nb(s, x)
        if x >= 1.0:
            return _upper_cf_nb(s, x)
        up = math.gamma(s + 1.0) - _lower_series_nb(s + 1.0, x)
        return (up - math.exp(s * math.log(x) - x)) / s

    @njit(cache=True)
    def gamma_upper_array_numba(s, x):
        out = np.empty(s.shape[0])
        for i in range(s.shape[0]):
            out[i] = _gamma_upper_nb(s[i], x[i])
        return out

    @njit(cache=True)
    def _gamma_lower_nb(s, x):
        if x == 0.0:
            return 0.0
        if x < s + 1.0:
            return _lower_series_nb(s, x)
        return math.gamma(s) - _upper_cf_nb(s, x)

    @njit(cache=True)
    def gamma_lower_array_numba(s, x):
        out = np.empty(s.shape[0])
        for i in range(s.shape[0]):
            out[i] = _gamma_lower_nb(s[i], x[i])
        return out


# ---------------------------------------------------------------- numpy path

def _np_lower_series(a, x):
    ap = a.copy()
    term = 1.0 / a
    total = term.copy()
    active = np.ones(a.shape, dtype=bool)
    for _ in range(_MAXIT):
        ap += 1.0
        term = np.where(active, term * x / ap, 0.0)
        total += term
        active &= np.abs(term) >= np.abs(total) * _EPS
        if not active.any():
            break
    return total * np.exp(-x + a * np.log(x))


def _np_upper_cf(a, x):
    b = x + 1.0 - a
    c = np.full(a.shape, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(a.shape, dtype=bool)
    for i in range(1, _MAXIT):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = b + an / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = np.where(active, d * c, 1.0)
        h *= delta
        active &= np.abs(delta - 1.0) >= _EPS
        if not active.any():
            break
    return np.exp(-x + a * np.log(x)) * h


def _np_gamma_fn(s):
    return np.array([math.gamma(v) for v in s.ravel()]).reshape(s.shape)


def _np_upper_small_s(a, x):
    powers = (-a[:, None]) ** np.arange(2, _ZETA.shape[0] + 2)
    lg = powers @ (_ZETA / np.arange(2, _ZETA.shape[0] + 2)) - EULER_GAMMA * a
    lead = (np.expm1(lg) - np.expm1(a * np.log(x))) / a
    total = np.zeros_like(a)
    term = np.ones_like(a)
    for n in range(1, _MAXIT):
        term = term * (-x / n)
        add = term / (a + n)
        total += add
        if np.all(np.abs(add) < np.abs(total) * _EPS):
            break
    return lead - np.exp(a * np.log(x)) * total


def _np_e1(x):
    out = np.empty_like(x)
    small = x < 1.0
    if small.any():
        xs = x[small]
        term = np.ones_like(xs)
        total = np.zeros_like(xs)
        for n in range(1, _MAXIT):
            term = term * (-xs / n)
            add = -term / n
            total += add
            if np.all(np.abs(add) < np.abs(total) * _EPS):
                break
        out[small] = -EULER_GAMMA - np.log(xs) + total
    if (~small).any():
        out[~small] = _np_upper_cf(np.zeros(int((~small).sum())), x[~small])
    return out


def gamma_upper_array_numpy(s, x):
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.empty(s.shape)
    zero_x = x == 0.0
    if zero_x.any():
        out[zero_x] = _np_gamma_fn(s[zero_x])
    rest = ~zero_x
    snap = rest & (np.abs(s) < S_ZERO_SNAP)
    if snap.any():
        out[snap] = _np_e1(x[snap])
    rest &= ~snap
    small = rest & (np.abs(s) < SMALL_S) & (x < np.maximum(1.0, s + 1.0))
    if small.any():
        out[small] = _np_upper_small_s(s[small], x[small])
    rest &= ~small
    series = rest & (s > 0.0) & (x < s + 1.0)
    if series.any():
        ss = s[series]
        out[series] = _np_gamma_fn(ss) - _np_lower_series(ss, x[series])
    cf = rest & (((s > 0.0) & (x >= s + 1.0)) | ((s < 0.0) & (x >= 1.0)))
    if cf.any():
        out[cf] = _np_upper_cf(s[cf], x[cf])
    rec = rest & (s < 0.0) & (x < 1.0)
    if rec.any():
        ss, xs = s[rec], x[rec]
        up = _np_gamma_fn(ss + 1.0) - _np_lower_series(ss + 1.0, xs)
        out[rec] = (up - np.exp(ss * np.log(xs) - xs)) / ss
    return out


def gamma_lower_array_numpy(s, x):
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    out = np.zeros(s.shape)
    series = (x > 0.0) & (x < s + 1.0)
    if series.any():
        out[series] = _np_lower_series(s[series], x[series])
    cf = x >= s + 1.0
    if cf.any():
        out[cf] = _np_gamma_fn(s[cf]) - _np_upper_cf(s[cf], x[cf])
    return out


def backend():
    return "numba" if HAVE_NUMBA else "numpy"


def gamma_upper_array(s, x):
    if HAVE_NUMBA:
        return gamma_upper_array_numba(np.ascontiguousarray(s, dtype=float),
                                       np.ascontiguousarray(x, dtype=float))
    return gamma_upper_array_numpy(s, x)


def gamma_lower_array(s, x):
    if HAVE_NUMBA:
        return gamma_lower_array_numba(np.ascontiguousarray(s, dtype=float),
                                       np.ascontiguousarray(x, dtype=float))
    return gamma_lower_array_numpy(s, x)
