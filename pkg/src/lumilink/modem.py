"""Classical physical layer: Hamming(7,4), Gray QAM-16, AWGN and the PV-cell low-pass."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from . import kernels
from .errors import DomainError
from .seeds import derive_seed

REVERSE_BIAS_BANDWIDTH_FACTOR = 1.6

# Systematic generator, codeword order d1 d2 d3 d4 p1 p2 p3 with
# p1 = d1^d2^d4, p2 = d1^d3^d4, p3 = d2^d3^d4.
GENERATOR = np.array([
    [1, 0, 0, 0, 1, 1, 0],
    [0, 1, 0, 0, 1, 0, 1],
    [0, 0, 1, 0, 0, 1, 1],
    [0, 0, 0, 1, 1, 1, 1],
], dtype=np.uint8)
PARITY_CHECK = np.concatenate([GENERATOR[:, 4:].T, np.eye(3, dtype=np.uint8)], axis=1)


def _flip_table(parity_check):
    table = np.full(1 << parity_check.shape[0], -1, dtype=np.int64)
    for col in range(parity_check.shape[1]):
        s = int("".join(str(b) for b in parity_check[:, col]), 2)
        table[s] = col
    return table


SYNDROME_TABLE = _flip_table(PARITY_CHECK)

_GRAY_LEVELS = {(0, 0): -3.0, (0, 1): -1.0, (1, 1): 1.0, (1, 0): 3.0}


def _build_constellation():
    pts = np.empty(16, dtype=np.complex128)
    for idx in range(16):
        b = [(idx >> s) & 1 for s in (3, 2, 1, 0)]
        pts[idx] = complex(_GRAY_LEVELS[b[0], b[1]], _GRAY_LEVELS[b[2], b[3]])
    return pts / math.sqrt(10.0)


# Point index i carries the 4-bit label i, I bits first (MSB first).
CONSTELLATION = _build_constellation()
SYMBOL_BITS = np.array([[(i >> s) & 1 for s in (3, 2, 1, 0)] for i in range(16)], dtype=np.uint8)


@dataclass(frozen=True, eq=False)
class IqFrame:
    samples: np.ndarray
    avg_energy: float = field(init=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.complex128).ravel()
        object.__setattr__(self, "samples", s)
        e = float(np.mean(np.abs(s) ** 2)) if s.size else 0.0
        object.__setattr__(self, "avg_energy", e)

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True)
class PvChannelModel:
    f3db_hz: float
    sample_rate_hz: float
    reverse_biased: bool = False

    @property
    def effective_f3db_hz(self):
        if self.reverse_biased:
            return self.f3db_hz * REVERSE_BIAS_BANDWIDTH_FACTOR
        return self.f3db_hz

    def coefficients(self):
        """(b0, b1, a1) of the bilinear one-pole low-pass, prewarped at the cutoff."""
        fc = self.effective_f3db_hz
        if not fc > 0:
            raise DomainError("cutoff frequency must be positive")
        if fc >= self.sample_rate_hz / 2:
            raise DomainError("effective -3 dB frequency must sit below Nyquist")
        k = math.tan(math.pi * fc / self.sample_rate_hz)
        b = k / (1.0 + k)
        return b, b, (k - 1.0) / (k + 1.0)


# -- Hamming(7,4) ---------------------------------------------------------------

def _as_bits(bits, width):
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.shape[-1:] != (width,):
        raise DomainError(f"expected trailing dimension {width}, got shape {arr.shape}")
    if np.any(arr > 1):
        raise DomainError("bits must be 0 or 1")
    return arr


def hamming74_encode(msg):
    """Encode 4-bit messages (trailing axis 4) into 7-bit codewords."""
    m = _as_bits(msg, 4)
    return ((m.astype(np.int64) @ GENERATOR) % 2).astype(np.uint8)


def hamming74_decode(word):
    """Syndrome-decode 7-bit words; returns (data bits, corrected flags)."""
    w = _as_bits(word, 7)
    flat = w.reshape(-1, 7)
    fixed, flagged = kernels.syndrome_correct(flat, PARITY_CHECK, SYNDROME_TABLE)
    data = fixed[:, :4].reshape(w.shape[:-1] + (4,))
    flags = flagged.reshape(w.shape[:-1])
    if flags.ndim == 0:
        flags = bool(flags)
    return data, flags


# -- QAM-16 --------------------------------------------------------------------

def qam16_map(bits):
    b = np.asarray(bits, dtype=np.uint8).ravel()
    if b.size % 4:
        raise DomainError("bit count must be a multiple of 4")
    idx = b.reshape(-1, 4).astype(np.int64) @ np.array([8, 4, 2, 1])
    return IqFrame(CONSTELLATION[idx])


def qam16_demap_indices(frame):
    samples = frame.samples if isinstance(frame, IqFrame) else frame
    return kernels.demap_nearest(samples, CONSTELLATION)


def qam16_demap(frame):
    return SYMBOL_BITS[qam16_demap_indices(frame)].ravel()


# -- channels --------------------------------------------------------------------

def noise_density(avg_energy, es_n0_dB):
    return avg_energy / 10.0 ** (es_n0_dB / 10.0)


def awgn(frame, es_n0_dB, rng_seed):
    """Add circular complex Gaussian noise; ``es_n0_dB = inf`` returns the frame unchanged."""
    if math.isinf(es_n0_dB) and es_n0_dB > 0:
        return IqFrame(frame.samples.copy())
    if not math.isfinite(es_n0_dB):
        raise DomainError("Es/N0 must be finite or +inf")
    rng = np.random.default_rng(rng_seed)
    sigma = math.sqrt(noise_density(frame.avg_energy, es_n0_dB) / 2.0)
    n = frame.samples.size
    noise = sigma * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    return IqFrame(frame.samples + noise)


def pv_lowpass(frame, model):
    b0, b1, a1 = model.coefficients()
    return IqFrame(kernels.one_pole_filter(frame.samples, b0, b1, a1))


def tone_gain(model, freq_hz, n_samples=None):
    """Steady-state magnitude response of the PV channel, measured with a complex tone."""
    b0, b1, a1 = model.coefficients()
    settle = int(40.0 / max(1e-12, 1.0 - abs(a1)))
    n = n_samples or max(8192, 2 * settle)
    t = np.arange(n) / model.sample_rate_hz
    tone = IqFrame(np.exp(2j * math.pi * freq_hz * t))
    y = pv_lowpass(tone, model).samples[n // 2:]
    return float(np.sqrt(np.mean(np.abs(y) ** 2)))


def measure_cutoff_hz(model):
    """Frequency at which the measured tone gain falls to -3.0103 dB (bisection)."""
    from scipy.optimize import brentq

    target = 1.0 / math.sqrt(2.0)
    fc = model.effective_f3db_hz
    lo, hi = fc / 8.0, min(fc * 4.0, 0.499 * model.sample_rate_hz)
    return brentq(lambda f: tone_gain(model, f) - target, lo, hi, xtol=fc * 1e-6)


# -- measurement ---------------------------------------------------------------

def measure_error_rates(tx_bits, rx_bits, block_size):
    tx = np.asarray(tx_bits, dtype=np.uint8).ravel()
    rx = np.asarray(rx_bits, dtype=np.uint8).ravel()
    if tx.size != rx.size:
        raise DomainError("bit streams differ in length")
    if block_size <= 0 or tx.size % block_size:
        raise DomainError("stream length must be a positive multiple of block_size")
    if tx.size == 0:
        raise DomainError("empty bit stream")
    err = tx != rx
    return float(err.mean()), float(err.reshape(-1, block_size).any(axis=1).mean())


def qfunc(x):
    return 0.5 * erfc(np.asarray(x) / math.sqrt(2.0))


def qam16_ser_theory(es_n0_dB):
    """Square 16-QAM symbol error rate: 3 Q(x) (1 - 3/4 Q(x)), x = sqrt(Es / (5 N0))."""
    q = qfunc(np.sqrt(10.0 ** (np.asarray(es_n0_dB, dtype=float) / 10.0) / 5.0))
    return 3.0 * q * (1.0 - 0.75 * q)


def ebn0_to_esn0(eb_n0_dB, info_bits_per_symbol):
    return eb_n0_dB + 10.0 * math.log10(info_bits_per_symbol)


CODED_INFO_BITS_PER_SYMBOL = 4.0 * 4.0 / 7.0
UNCODED_INFO_BITS_PER_SYMBOL = 4.0


def simulate_uncoded_ser(n_symbols, es_n0_dB, seed):
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, 16, n_symbols)
    rx = awgn(IqFrame(CONSTELLATION[idx]), es_n0_dB, rng)
    return float(np.mean(qam16_demap_indices(rx) != idx))


def run_uncoded_chain(message_bits, es_n0_dB, seed):
    bits = np.asarray(message_bits, dtype=np.uint8).ravel()
    rx = qam16_demap(awgn(qam16_map(bits), es_n0_dB, seed))
    return measure_error_rates(bits, rx, 4)


def run_classical_chain(message_bits, es_n0_dB, seed):
    """Hamming(7,4) + QAM-16 over AWGN; returns (BER, BLER) on the 4-bit data blocks.

    Four codewords (28 bits) fill seven QAM-16 symbols. A trailing group with
    fewer than four codewords is filled with all-zero codewords that are
    dropped after decoding.
    """
    bits = np.asarray(message_bits, dtype=np.uint8).ravel()
    if bits.size % 4:
        raise DomainError("message bit count must be a multiple of 4")
    msgs = bits.reshape(-1, 4)
    code = hamming74_encode(msgs)
    n_words = code.shape[0]
    pad = (-n_words) % 4
    if pad:
        code = np.concatenate([code, np.zeros((pad, 7), dtype=np.uint8)])
    rx_frame = awgn(qam16_map(code.ravel()), es_n0_dB, seed)
    rx_code = qam16_demap(rx_frame).reshape(-1, 7)[:n_words]
    decoded, _ = hamming74_decode(rx_code)
    return measure_error_rates(bits, decoded.ravel(), 4)


def classical_bler_curve(eb_n0_grid, n_messages, seed):
    """Message (4-bit block) error rate of the coded chain on an Eb/N0 grid."""
    out = []
    for i, eb in enumerate(eb_n0_grid):
        rng = np.random.default_rng(derive_seed(seed, "classical-bler", i))
        bits = rng.integers(0, 2, 4 * n_messages, dtype=np.uint8)
        es = ebn0_to_esn0(eb, CODED_INFO_BITS_PER_SYMBOL)
        out.append(run_classical_chain(bits, es, rng)[1])
    return np.array(out)
