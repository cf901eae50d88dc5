import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lumilink import atmosphere as atm
from lumilink.errors import DomainError
from lumilink.linkbudget import OpticalCarrier

# Reference value from a 30-digit mpmath quadrature of the same integrand
# (breakpoints at 100 m, 1, 5, 10 km), computed before the Simpson path existed.
ORACLE_INTEGRAL_20KM = 1.18922024804931e-06
ORACLE_VARIANCE = 464594681.261424


def default_inputs(d=20e3, top=20e3, zen_deg=40.0, nm=620.0):
    return atm.PhaseVarianceInputs(d, top, math.radians(zen_deg), OpticalCarrier.from_nm(nm))


def trapezoid_oracle(profile, top, n=1_000_000):
    z = np.linspace(0.0, top, n)
    high = 0.0059 * (profile.wind_speed_mps / 27) ** 2 * (1e-5 * z) ** 10 * np.exp(-z / 1000)
    f = (high + profile.ground_constant * np.exp(-z / 100)) * z ** (5 / 3)
    return float(np.sum((f[1:] + f[:-1]) * np.diff(z)) / 2)


def test_cn2_examples():
    p = atm.CnProfile(27, 1.7e-14)
    assert atm.cn2(p, 0.0) == 1.7e-14
    assert atm.cn2(p, 1000.0) == pytest.approx(7.72e-19, rel=0.01)
    assert atm.cn2(atm.CnProfile(0, 0), 12345.0) == 0
    assert atm.cn2(p, 1e7) == pytest.approx(0.0, abs=1e-300)


def test_cn2_domain():
    with pytest.raises(DomainError):
        atm.cn2(atm.CnProfile(), -1.0)
    with pytest.raises(DomainError):
        atm.CnProfile(ground_constant=-1e-14)
    with pytest.raises(DomainError):
        atm.CnProfile(wind_speed_mps=-1)


def test_cn2_nonnegative_and_decreasing_aloft():
    p = atm.CnProfile()
    h = np.linspace(0, 60e3, 6001)
    v = atm.cn2(p, h)
    assert np.all(v >= 0)
    aloft = v[h > 20e3]
    assert np.all(np.diff(aloft) < 0)


@pytest.mark.parametrize("top", [5e3, 20e3, 30e3])
def test_simpson_vs_trapezoid_oracle(top):
    p = atm.CnProfile()
    assert atm.integrate_cn2_z53(p, top) == pytest.approx(trapezoid_oracle(p, top), rel=1e-3)


def test_simpson_vs_frozen_quadrature():
    assert atm.integrate_cn2_z53(atm.CnProfile(), 20e3) == pytest.approx(ORACLE_INTEGRAL_20KM, rel=1e-6)


def test_simpson_convergence():
    p = atm.CnProfile()
    a = atm.integrate_cn2_z53(p, 20e3, 2 ** 10)
    b = atm.integrate_cn2_z53(p, 20e3, 2 ** 11)
    assert abs(a - b) / abs(b) < 1e-6


def test_integral_trivial_and_domain():
    assert atm.integrate_cn2_z53(atm.CnProfile(0, 0), 1e4) == 0
    with pytest.raises(DomainError):
        atm.integrate_cn2_z53(atm.CnProfile(), 0.0)
    with pytest.raises(DomainError):
        atm.integrate_cn2_z53(atm.CnProfile(), 1e4, 3)


def test_phase_variance_against_oracle():
    assert atm.phase_variance(default_inputs(), atm.CnProfile()) == pytest.approx(ORACLE_VARIANCE, rel=1e-3)


def test_phase_variance_trivia():
    p = atm.CnProfile()
    assert atm.phase_variance(default_inputs(d=0.0), p) == 0
    v1 = atm.phase_variance(default_inputs(nm=1240), p)
    v2 = atm.phase_variance(default_inputs(nm=620), p)
    assert v2 == pytest.approx(4 * v1, rel=1e-12)
    with pytest.raises(DomainError):
        default_inputs(d=-1.0)
    with pytest.raises(DomainError):
        default_inputs(top=0.0)


@settings(max_examples=50)
@given(st.floats(1.0, 1e5), st.floats(0.01, 100))
def test_phase_variance_d53_homogeneity(d, alpha):
    p = atm.CnProfile()
    base = atm.phase_variance(default_inputs(d=d), p)
    scaled = atm.phase_variance(default_inputs(d=alpha * d), p)
    assert scaled == pytest.approx(alpha ** (5 / 3) * base, rel=1e-10)


@settings(max_examples=50)
@given(st.floats(0.0, 80.0))
def test_phase_variance_secant(zen):
    p = atm.CnProfile()
    ratio = atm.phase_variance(default_inputs(zen_deg=zen), p) / atm.phase_variance(default_inputs(zen_deg=0), p)
    assert ratio == pytest.approx(1 / math.cos(math.radians(zen)), rel=1e-10)


def test_refractive_phase_delay_examples():
    h = np.linspace(0, 1.0, 11)
    assert atm.refractive_phase_delay(atm.PhasePathSample(h, np.ones_like(h), 1.0),
                                      OpticalCarrier.from_nm(620)) == 0
    unit_k = OpticalCarrier(2 * math.pi)
    assert atm.refractive_phase_delay(atm.PhasePathSample(h, np.zeros_like(h), 1.0),
                                      unit_k) == pytest.approx(1.0)


def _smooth_n1(z):
    return 1e-6 * np.sin(z / 700.0) + 3e-7 * np.cos(z / 2300.0) ** 2


def test_refractive_phase_delay_grid_refinement():
    c = OpticalCarrier.from_nm(620)
    coarse = np.linspace(0, 20e3, 10_000)
    fine = np.linspace(0, 20e3, 1_000_000)
    a = atm.refractive_phase_delay(atm.PhasePathSample(coarse, _smooth_n1(coarse), 1.0003), c)
    b = atm.refractive_phase_delay(atm.PhasePathSample(fine, _smooth_n1(fine), 1.0003), c)
    assert a == pytest.approx(b, rel=1e-6)


def test_refractive_phase_delay_linearity():
    h = np.linspace(0, 5e3, 501)
    n1 = _smooth_n1(h)
    c1, c2 = OpticalCarrier(1e-6), OpticalCarrier(0.5e-6)
    base = atm.refractive_phase_delay(atm.PhasePathSample(h, n1, 1.0), c1)
    assert atm.refractive_phase_delay(atm.PhasePathSample(h, n1, 1.0), c2) == pytest.approx(2 * base, rel=1e-12)
    doubled = atm.refractive_phase_delay(atm.PhasePathSample(h, 2 * n1 - 1.0, 1.0), c1)
    assert doubled == pytest.approx(2 * base, rel=1e-9)


def test_phase_path_sample_validation():
    with pytest.raises(DomainError):
        atm.PhasePathSample(np.array([0.0]), np.array([0.0]))
    with pytest.raises(DomainError):
        atm.PhasePathSample(np.array([0.0, 0.0]), np.array([0.0, 0.0]))
    with pytest.raises(DomainError):
        atm.PhasePathSample(np.array([0.0, 1.0]), np.array([0.0]))


def test_sample_phase_pair_statistics():
    inp, p = default_inputs(), atm.CnProfile()
    phi1, phi2 = atm.sample_phase_pair(inp, p, 7, size=1_000_000)
    var = atm.phase_variance(inp, p)
    assert np.var(phi1 - phi2) == pytest.approx(var, rel=0.01)
    assert abs(np.mean(phi1 - phi2)) < 5 * math.sqrt(var / 1e6)


def test_sample_phase_pair_zero_separation_and_seed():
    p = atm.CnProfile()
    a, b = atm.sample_phase_pair(default_inputs(d=0.0), p, 3, common_variance=2.0)
    assert a == b
    assert atm.sample_phase_pair(default_inputs(), p, 11) == atm.sample_phase_pair(default_inputs(), p, 11)
    assert atm.sample_phase_pair(default_inputs(), p, 11) != atm.sample_phase_pair(default_inputs(), p, 12)
