"""The numba kernels and the numpy fallback must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import GAMMA_GRID
from qwl import _kernels

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba backend disabled")


def _grid():
    s = np.array([r[0] for r in GAMMA_GRID])
    x = np.array([r[1] for r in GAMMA_GRID])
    ref = np.array([r[2] for r in GAMMA_GRID])
    return s, x, ref


def test_numpy_backend_matches_reference():
    s, x, ref = _grid()
    assert np.allclose(_kernels.gamma_upper_array_numpy(s, x), ref, rtol=1e-12, atol=0)


@needs_numba
def test_numba_backend_matches_reference():
    s, x, ref = _grid()
    assert np.allclose(_kernels.gamma_upper_array_numba(s, x), ref, rtol=1e-12, atol=0)


@needs_numba
@given(st.floats(-0.95, 6.0), st.floats(1e-4, 60.0))
def test_backends_agree_upper(s, x):
    if abs(s) < 1e-6:
        s = 0.0
    a = _kernels.gamma_upper_array_numpy(np.array([s]), np.array([x]))[0]
    b = _kernels.gamma_upper_array_numba(np.array([s]), np.array([x]))[0]
    assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


@needs_numba
@given(st.floats(0.05, 6.0), st.floats(0.0, 60.0))
def test_backends_agree_lower(s, x):
    a = _kernels.gamma_lower_array_numpy(np.array([s]), np.array([x]))[0]
    b = _kernels.gamma_lower_array_numba(np.array([s]), np.array([x]))[0]
    assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


def test_env_flag_selects_numpy():
    code = "from qwl import _kernels; print(_kernels.backend())"
    env = dict(os.environ, QWL_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_selftest_under_numpy_backend():
    code = ("from qwl.cli import run; import io; buf = io.StringIO(); "
            "print(run(['gamma-selftest'], buf))")
    env = dict(os.environ, QWL_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip().splitlines()[-1] == "0"


@pytest.mark.parametrize("s", [3e-13, -4e-12, 2e-9, -1e-6, 3e-4, -0.02, 0.3, -0.45])
@pytest.mark.parametrize("x", [1e-4, 0.05, 0.6, 0.99, 1.2])
def test_small_exponent_no_cancellation(s, x):
    import mpmath

    ref = float(mpmath.gammainc(s, x))
    for fn in (_kernels.gamma_upper_array, _kernels.gamma_upper_array_numpy):
        got = fn(np.array([s]), np.array([x]))[0]
        assert abs(got - ref) <= 1e-13 * abs(ref)
