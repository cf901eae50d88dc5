"""numba and numpy kernel families must agree."""
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from lumilink import kernels
from lumilink.modem import CONSTELLATION, PARITY_CHECK, SYNDROME_TABLE

finite = st.floats(-5, 5, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.integers(1, 300), elements=finite),
       arrays(np.float64, st.integers(1, 300), elements=finite))
def test_demap_backends_agree(re, im):
    n = min(re.size, im.size)
    y = re[:n] + 1j * im[:n]
    assert np.array_equal(kernels.demap_nearest_numba(y, CONSTELLATION),
                          kernels.demap_nearest_numpy(y, CONSTELLATION))


def test_demap_tie_goes_to_lowest_index():
    pts = np.array([1 + 0j, -1 + 0j, 0 + 1j])
    for fn in (kernels.demap_nearest_numba, kernels.demap_nearest_numpy):
        assert fn(np.array([0j]), pts)[0] == 0


@settings(max_examples=40, deadline=None)
@given(arrays(np.uint8, st.tuples(st.integers(1, 200), st.just(7)), elements=st.integers(0, 1)))
def test_syndrome_backends_agree(words):
    a = kernels.syndrome_correct_numba(words, PARITY_CHECK, SYNDROME_TABLE)
    b = kernels.syndrome_correct_numpy(words, PARITY_CHECK, SYNDROME_TABLE)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.integers(1, 500), elements=finite), st.floats(0.001, 0.45))
def test_filter_backends_agree(x, rel_fc):
    k = np.tan(np.pi * rel_fc)
    b, a1 = k / (1 + k), (k - 1) / (k + 1)
    np.testing.assert_allclose(kernels.one_pole_filter_numba(x, b, b, a1),
                               kernels.one_pole_filter_numpy(x, b, b, a1), rtol=1e-10, atol=1e-12)
    z = x + 1j * x[::-1]
    np.testing.assert_allclose(kernels.one_pole_filter_numba(z, b, b, a1),
                               kernels.one_pole_filter_numpy(z, b, b, a1), rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("top, panels, v, c0", [(20e3, 4096, 27.0, 1.7e-14), (5e3, 64, 10.0, 1e-13),
                                                (1e3, 2, 0.0, 1.7e-14)])
def test_simpson_backends_agree(top, panels, v, c0):
    a = kernels.simpson_cn2_z53_numba(top, panels, v, c0)
    b = kernels.simpson_cn2_z53_numpy(top, panels, v, c0)
    assert a == pytest.approx(b, rel=1e-12)


@pytest.mark.parametrize("flag, expected", [("0", "numpy"), ("1", "numba")])
def test_env_flag_selects_backend(flag, expected):
    env = dict(os.environ, LUMILINK_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", "import lumilink; print(lumilink.backend_name())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected
