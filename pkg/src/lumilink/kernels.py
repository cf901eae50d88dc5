"""Hot inner loops, each with a numba and a numpy implementation.

The public names (``demap_nearest``, ``syndrome_correct``, ``one_pole_filter``,
``simpson_cn2_z53``) point at the numba versions unless the backend was
disabled through ``LUMILINK_NUMBA=0``. Both families stay importable so they
can be compared against each other.
"""
import math

import numpy as np
from scipy.signal import lfilter

from ._accel import HAS_NUMBA, USE_NUMBA

_CHUNK = 1 << 16


# -- numpy ---------------------------------------------------------------------

def demap_nearest_numpy(y, points):
    y = np.asarray(y, dtype=np.complex128).ravel()
    points = np.asarray(points, dtype=np.complex128)
    out = np.empty(y.size, dtype=np.int64)
    pr, pi = points.real, points.imag
    for start in range(0, y.size, _CHUNK):
        blk = y[start:start + _CHUNK]
        d = (blk.real[:, None] - pr) ** 2 + (blk.imag[:, None] - pi) ** 2
        # argmin returns the first minimum, i.e. ties go to the lowest index
        out[start:start + _CHUNK] = np.argmin(d, axis=1)
    return out


def syndrome_correct_numpy(words, parity_check, flip_table):
    words = np.asarray(words, dtype=np.uint8)
    weights = 1 << np.arange(parity_check.shape[0])[::-1]
    syn = ((words.astype(np.int64) @ parity_check.T.astype(np.int64)) % 2) @ weights
    pos = flip_table[syn]
    fixed = words.copy()
    rows = np.nonzero(pos >= 0)[0]
    fixed[rows, pos[rows]] ^= 1
    return fixed, syn != 0


def one_pole_filter_numpy(x, b0, b1, a1):
    return lfilter([b0, b1], [1.0, a1], np.asarray(x))


def _cn2_z53_numpy(z, wind_speed, ground_constant):
    high = 0.0059 * (wind_speed / 27.0) ** 2 * (1e-5 * z) ** 10 * np.exp(-z / 1000.0)
    return (high + ground_constant * np.exp(-z / 100.0)) * z ** (5.0 / 3.0)


def simpson_cn2_z53_numpy(top, n_panels, wind_speed, ground_constant):
    z = np.linspace(0.0, top, n_panels + 1)
    f = _cn2_z53_numpy(z, wind_speed, ground_constant)
    h = top / n_panels
    return h / 3.0 * (f[0] + f[-1] + 4.0 * f[1:-1:2].sum() + 2.0 * f[2:-1:2].sum())


# -- numba ---------------------------------------------------------------------

if HAS_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _demap_loop(yr, yi, pr, pi, out):
        m = pr.size
        for n in range(yr.size):
            best = 0
            dbest = (yr[n] - pr[0]) ** 2 + (yi[n] - pi[0]) ** 2
            for j in range(1, m):
                d = (yr[n] - pr[j]) ** 2 + (yi[n] - pi[j]) ** 2
                if d < dbest:
                    dbest = d
                    best = j
            out[n] = best

    def demap_nearest_numba(y, points):
        y = np.ascontiguousarray(np.asarray(y, dtype=np.complex128).ravel())
        points = np.asarray(points, dtype=np.complex128)
        out = np.empty(y.size, dtype=np.int64)
        _demap_loop(y.real.copy(), y.imag.copy(), points.real.copy(), points.imag.copy(), out)
        return out

    @njit(cache=True)
    def _syndrome_loop(words, parity_check, flip_table, fixed, flagged):
        r, n = parity_check.shape
        for i in range(words.shape[0]):
            s = 0
            for row in range(r):
                acc = 0
                for col in range(n):
                    acc ^= words[i, col] & parity_check[row, col]
                s = (s << 1) | acc
            for col in range(n):
                fixed[i, col] = words[i, col]
            p = flip_table[s]
            if p >= 0:
                fixed[i, p] ^= 1
            flagged[i] = s != 0

    def syndrome_correct_numba(words, parity_check, flip_table):
        words = np.ascontiguousarray(words, dtype=np.uint8)
        fixed = np.empty_like(words)
        flagged = np.empty(words.shape[0], dtype=np.bool_)
        _syndrome_loop(words, np.ascontiguousarray(parity_check, dtype=np.uint8),
                       np.asarray(flip_table, dtype=np.int64), fixed, flagged)
        return fixed, flagged

    @njit(cache=True)
    def _one_pole_real(x, b0, b1, a1, y):
        prev_x = 0.0
        prev_y = 0.0
        for n in range(x.size):
            v = b0 * x[n] + b1 * prev_x - a1 * prev_y
            y[n] = v
            prev_x = x[n]
            prev_y = v

    def one_pole_filter_numba(x, b0, b1, a1):
        x = np.asarray(x)
        if np.iscomplexobj(x):
            re = np.empty(x.size)
            im = np.empty(x.size)
            _one_pole_real(np.ascontiguousarray(x.real, dtype=np.float64), b0, b1, a1, re)
            _one_pole_real(np.ascontiguousarray(x.imag, dtype=np.float64), b0, b1, a1, im)
            return re + 1j * im
        y = np.empty(x.size)
        _one_pole_real(np.ascontiguousarray(x, dtype=np.float64), b0, b1, a1, y)
        return y

    @njit(cache=True)
    def simpson_cn2_z53_numba(top, n_panels, wind_speed, ground_constant):
        h = top / n_panels
        coeff = 0.0059 * (wind_speed / 27.0) ** 2
        total = 0.0
        for i in range(n_panels + 1):
            z = i * h
            f = (coeff * (1e-5 * z) ** 10 * math.exp(-z / 1000.0)
                 + ground_constant * math.exp(-z / 100.0)) * z ** (5.0 / 3.0)
            if i == 0 or i == n_panels:
                total += f
            elif i % 2 == 1:
                total += 4.0 * f
            else:
                total += 2.0 * f
        return total * h / 3.0

else:  # pragma: no cover
    demap_nearest_numba = demap_nearest_numpy
    syndrome_correct_numba = syndrome_correct_numpy
    one_pole_filter_numba = one_pole_filter_numpy
    simpson_cn2_z53_numba = simpson_cn2_z53_numpy


if USE_NUMBA:
    demap_nearest = demap_nearest_numba
    syndrome_correct = syndrome_correct_numba
    one_pole_filter = one_pole_filter_numba
    simpson_cn2_z53 = simpson_cn2_z53_numba
else:
    demap_nearest = demap_nearest_numpy
    syndrome_correct = syndrome_correct_numpy
    one_pole_filter = one_pole_filter_numpy
    simpson_cn2_z53 = simpson_cn2_z53_numpy
