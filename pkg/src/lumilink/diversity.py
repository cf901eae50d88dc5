"""Two-station coherent reception of one downlink frame.

Each station sees the frame rotated by its own path phase plus independent
AWGN. The differential phase is estimated from the conjugate product of the
two streams and removed before equal-gain combining. For demapping, each
stream's absolute phase is referenced to a short known pilot prefix.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .atmosphere import CnProfile, PhaseVarianceInputs, phase_variance, sample_phase_pair
from .errors import DomainError
from .linkbudget import OpticalCarrier
from .modem import IqFrame, awgn, qam16_demap, qam16_map
from .seeds import derive_seed

MIN_FRAME = 64


@dataclass(frozen=True)
class DiversityScenario:
    separation_m: float = 20_000.0
    es_n0_dB: float = 8.0
    path_top_m: float = 20_000.0
    zenith_deg: float = 40.0
    wavelength_nm: float = 620.0
    profile: CnProfile = field(default_factory=CnProfile)
    frame_symbols: int = 1024
    n_pilots: int = 64
    seed: int = 0

    def __post_init__(self):
        if not self.separation_m >= 0:
            raise DomainError("separation must be non-negative")
        if self.frame_symbols < MIN_FRAME:
            raise DomainError(f"frame must hold at least {MIN_FRAME} symbols")
        if not 0 < self.n_pilots < self.frame_symbols:
            raise DomainError("pilot count must lie strictly between 0 and the frame length")

    def phase_inputs(self):
        return PhaseVarianceInputs(self.separation_m, self.path_top_m,
                                   math.radians(self.zenith_deg),
                                   OpticalCarrier.from_nm(self.wavelength_nm))

    def phase_variance(self):
        return phase_variance(self.phase_inputs(), self.profile)


@dataclass(frozen=True, eq=False)
class CombinerOutput:
    estimated_dphi: float
    combined: IqFrame
    snr_single_dB: float
    snr_combined_dB: float


@dataclass(frozen=True, eq=False)
class DiversityResult:
    output: CombinerOutput
    true_dphi: float
    snr_rx_dB: tuple
    ber_rx: tuple
    ber_combined: float

    @property
    def ber_single(self):
        return min(self.ber_rx)


def wrap_phase(phi):
    """Map an angle onto (-pi, pi]."""
    w = math.remainder(phi, 2.0 * math.pi)
    return math.pi if w <= -math.pi else w


def simulate_two_paths(frame, scenario, seed=None):
    """Rotate ``frame`` by each path phase and add per-station AWGN.

    Returns (rx1, rx2, true_dphi) where true_dphi = phi1 - phi2, unwrapped.
    """
    seed = scenario.seed if seed is None else seed
    phi1, phi2 = sample_phase_pair(scenario.phase_inputs(), scenario.profile,
                                   derive_seed(seed, "diversity-phase"))
    rx1 = awgn(IqFrame(frame.samples * np.exp(1j * phi1)), scenario.es_n0_dB,
               derive_seed(seed, "diversity-noise", 1))
    rx2 = awgn(IqFrame(frame.samples * np.exp(1j * phi2)), scenario.es_n0_dB,
               derive_seed(seed, "diversity-noise", 2))
    return rx1, rx2, phi1 - phi2


def _check_pair(rx1, rx2, min_len=1):
    a = rx1.samples if isinstance(rx1, IqFrame) else np.asarray(rx1)
    b = rx2.samples if isinstance(rx2, IqFrame) else np.asarray(rx2)
    if a.shape != b.shape:
        raise DomainError("receiver streams differ in length")
    if a.size < min_len:
        raise DomainError(f"need at least {min_len} samples")
    return a, b


def estimate_differential_phase(rx1, rx2):
    a, b = _check_pair(rx1, rx2, MIN_FRAME)
    return wrap_phase(float(np.angle(np.vdot(b, a))))


def combine(rx1, rx2, estimated_dphi):
    a, b = _check_pair(rx1, rx2)
    return IqFrame((a + b * np.exp(1j * estimated_dphi)) / 2.0)


def measure_snr_dB(received, reference):
    """Data-aided SNR: project onto the known frame, the remainder is noise."""
    y = received.samples if isinstance(received, IqFrame) else np.asarray(received)
    x = reference.samples if isinstance(reference, IqFrame) else np.asarray(reference)
    g = np.vdot(x, y) / np.vdot(x, x)
    err = np.mean(np.abs(y - g * x) ** 2)
    sig = abs(g) ** 2 * np.mean(np.abs(x) ** 2)
    if err == 0:
        return math.inf
    if sig == 0:
        return -math.inf
    return float(10.0 * math.log10(sig / err))


def _pilot_derotate(y, x, n_pilots):
    ref = np.angle(np.vdot(x[:n_pilots], y[:n_pilots]))
    return y * np.exp(-1j * ref)


def run_diversity_experiment(scenario, seed=None):
    seed = scenario.seed if seed is None else seed
    rng = np.random.default_rng(derive_seed(seed, "diversity-bits"))
    bits = rng.integers(0, 2, 4 * scenario.frame_symbols, dtype=np.uint8)
    tx = qam16_map(bits)
    rx1, rx2, true_dphi = simulate_two_paths(tx, scenario, seed)
    est = estimate_differential_phase(rx1, rx2)
    comb = combine(rx1, rx2, est)

    np_ = scenario.n_pilots
    data_bits = bits[4 * np_:]
    bers = []
    for stream in (rx1, rx2, comb):
        y = _pilot_derotate(stream.samples, tx.samples, np_)
        rx_bits = qam16_demap(y[np_:])
        bers.append(float(np.mean(rx_bits != data_bits)))
    snr1 = measure_snr_dB(rx1, tx)
    snr2 = measure_snr_dB(rx2, tx)
    out = CombinerOutput(est, comb, max(snr1, snr2), measure_snr_dB(comb, tx))
    return DiversityResult(out, float(true_dphi), (snr1, snr2), (bers[0], bers[1]), bers[2])
