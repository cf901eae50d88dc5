import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lumilink import diversity as dv
from lumilink.diversity import DiversityScenario
from lumilink.errors import DomainError
from lumilink.modem import IqFrame, awgn, qam16_map


@pytest.fixture
def frame(rng):
    return qam16_map(rng.integers(0, 2, 4 * 4096))


def test_identical_streams_give_zero(frame):
    assert dv.estimate_differential_phase(frame, frame) == 0.0


@pytest.mark.parametrize("delta", [0.3, -2.0, 3.1, math.pi])
def test_known_rotation_recovered(frame, delta):
    rx1 = IqFrame(frame.samples * np.exp(1j * delta))
    assert dv.estimate_differential_phase(rx1, frame) == pytest.approx(dv.wrap_phase(delta), abs=1e-12)


def test_estimator_rms_at_10db(rng):
    errs = []
    for k in range(200):
        x = qam16_map(rng.integers(0, 2, 4 * 1024))
        delta = rng.uniform(-math.pi, math.pi)
        rx1 = awgn(IqFrame(x.samples * np.exp(1j * delta)), 10.0, 2 * k)
        rx2 = awgn(x, 10.0, 2 * k + 1)
        errs.append(dv.wrap_phase(dv.estimate_differential_phase(rx1, rx2) - delta))
    assert math.sqrt(np.mean(np.square(errs))) < 0.05


def test_estimator_input_checks(frame):
    with pytest.raises(DomainError):
        dv.estimate_differential_phase(IqFrame(frame.samples[:10]), IqFrame(frame.samples[:10]))
    with pytest.raises(DomainError):
        dv.estimate_differential_phase(frame, IqFrame(frame.samples[:-1]))


def test_combining_gain_3db():
    x = IqFrame(np.exp(1j * np.linspace(0, 50, 400_000)))
    rx1, rx2 = awgn(x, 5.0, 1), awgn(x, 5.0, 2)
    single = dv.measure_snr_dB(rx1, x)
    combined = dv.measure_snr_dB(dv.combine(rx1, rx2, 0.0), x)
    assert combined - single == pytest.approx(10 * math.log10(2), abs=0.2)


def test_pi_error_is_destructive(frame):
    out = dv.combine(frame, frame, math.pi)
    assert np.max(np.abs(out.samples)) < 1e-12


@pytest.mark.parametrize("err", np.linspace(0, math.pi / 3, 5)[:-1])
def test_gain_with_phase_error(err):
    x = IqFrame(np.exp(1j * np.linspace(0, 50, 400_000)))
    rx1, rx2 = awgn(x, 5.0, 3), awgn(x, 5.0, 4)
    single = dv.measure_snr_dB(rx1, x)
    combined = dv.measure_snr_dB(dv.combine(rx1, rx2, err), x)
    expected = 10 * math.log10(1 + math.cos(err))
    assert combined - single == pytest.approx(expected, abs=0.2)
    assert combined > single


def test_differential_phase_variance_matches_model():
    # a separation small enough that the phases stay in a few radians
    sc = DiversityScenario(separation_m=0.02, frame_symbols=64, n_pilots=8)
    var = sc.phase_variance()
    assert 0.01 < var < 100
    x = qam16_map(np.zeros(4 * 64, dtype=np.uint8))
    draws = np.array([dv.simulate_two_paths(x, sc, seed=s)[2] for s in range(10_000)])
    assert np.var(draws) == pytest.approx(var, rel=0.03)


def test_zero_separation_noiseless(frame):
    sc = DiversityScenario(separation_m=0.0, es_n0_dB=math.inf)
    rx1, rx2, dphi = dv.simulate_two_paths(frame, sc, seed=4)
    assert dphi == 0.0
    est = dv.estimate_differential_phase(rx1, rx2)
    assert est == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(dv.combine(rx1, rx2, est).samples, rx1.samples, atol=1e-12)


def test_combined_ber_beats_best_single_over_seeds():
    sc = DiversityScenario()
    res = [dv.run_diversity_experiment(sc, seed=s) for s in range(20)]
    single = np.array([r.ber_single for r in res])
    combined = np.array([r.ber_combined for r in res])
    assert np.all(combined <= single)


def test_experiment_deterministic():
    a = dv.run_diversity_experiment(DiversityScenario(), seed=9)
    b = dv.run_diversity_experiment(DiversityScenario(), seed=9)
    assert (a.ber_rx, a.ber_combined, a.output.estimated_dphi) == \
        (b.ber_rx, b.ber_combined, b.output.estimated_dphi)


def test_scenario_validation():
    with pytest.raises(DomainError):
        DiversityScenario(separation_m=-1.0)
    with pytest.raises(DomainError):
        DiversityScenario(frame_symbols=32)
    with pytest.raises(DomainError):
        DiversityScenario(frame_symbols=64, n_pilots=64)


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_wrap_phase_range(phi):
    w = dv.wrap_phase(phi)
    assert -math.pi < w <= math.pi
    assert math.cos(w) == pytest.approx(math.cos(phi), abs=1e-6)
