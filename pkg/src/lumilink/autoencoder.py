"""End-to-end learned modem: dense encoder, AWGN layer, dense softmax decoder.

Gradients are accumulated by hand in reverse mode; there is no autodiff
dependency. Training uses Adam on mini-batches of uniformly drawn messages.
"""
from __future__ import annotations

import math
import struct
import time
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import DegenerateEncodingError, DomainError, TrainingDivergedError
from .modem import IqFrame
from .seeds import derive_seed

MAGIC = b"LLAE"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class AeConfig:
    n_messages: int = 16
    bits_per_message: int = 4
    channel_uses: int = 7
    hidden_width: int = 32
    learning_rate: float = 1e-3
    batch_size: int = 256
    train_es_n0_dB: float = 10.0
    seed: int = 0
    steps: int = 5000
    log_every: int = 100
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.n_messages != 2 ** self.bits_per_message:
            raise DomainError("n_messages must equal 2**bits_per_message")
        if self.channel_uses < 1 or self.hidden_width < 1:
            raise DomainError("channel_uses and hidden_width must be positive")
        if self.batch_size < 1 or self.steps < 0 or self.log_every < 1:
            raise DomainError("batch_size and log_every must be positive, steps non-negative")
        if not self.learning_rate > 0:
            raise DomainError("learning rate must be positive")


@dataclass(eq=False)
class MlpParams:
    enc_w1: np.ndarray
    enc_b1: np.ndarray
    enc_w2: np.ndarray
    enc_b2: np.ndarray
    dec_w1: np.ndarray
    dec_b1: np.ndarray
    dec_w2: np.ndarray
    dec_b2: np.ndarray

    @classmethod
    def names(cls):
        return [f.name for f in fields(cls)]

    def arrays(self):
        return [getattr(self, n) for n in self.names()]

    @classmethod
    def from_arrays(cls, arrays):
        return cls(*[np.asarray(a, dtype=np.float64) for a in arrays])

    def copy(self):
        return MlpParams.from_arrays([a.copy() for a in self.arrays()])

    @property
    def n_messages(self):
        return self.enc_w1.shape[0]

    @property
    def channel_uses(self):
        return self.enc_w2.shape[1] // 2

    @classmethod
    def initialize(cls, config, seed=None):
        """Glorot-uniform weights and zero biases, drawn from ``seed`` (default config.seed)."""
        rng = np.random.default_rng(derive_seed(config.seed if seed is None else seed, "ae-init"))
        m, h, r = config.n_messages, config.hidden_width, 2 * config.channel_uses

        def glorot(fan_in, fan_out):
            lim = math.sqrt(6.0 / (fan_in + fan_out))
            return rng.uniform(-lim, lim, size=(fan_in, fan_out))

        return cls(glorot(m, h), np.zeros(h), glorot(h, r), np.zeros(r),
                   glorot(r, h), np.zeros(h), glorot(h, m), np.zeros(m))


@dataclass
class TrainReport:
    losses: list = field(default_factory=list)
    steps_per_epoch: int = 0
    es_n0_grid: list = field(default_factory=list)
    bler: list = field(default_factory=list)
    wall_clock_s: float = 0.0
    diverged: bool = False


# -- forward pieces -----------------------------------------------------------

def _normalize(x, n_uses):
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    if np.any(norm == 0.0):
        raise DegenerateEncodingError("encoder output is the zero vector")
    return x * (math.sqrt(n_uses) / norm), norm


def _encode_real(params, onehot):
    z1 = onehot @ params.enc_w1 + params.enc_b1
    h1 = np.maximum(z1, 0.0)
    x = h1 @ params.enc_w2 + params.enc_b2
    s, norm = _normalize(x, params.channel_uses)
    return z1, h1, x, s, norm


def _to_complex(s):
    n = s.shape[-1] // 2
    return s[..., :n] + 1j * s[..., n:]


def _to_real(c):
    return np.concatenate([c.real, c.imag], axis=-1)


def _softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _decode_real(params, y):
    z3 = y @ params.dec_w1 + params.dec_b1
    h2 = np.maximum(z3, 0.0)
    logits = h2 @ params.dec_w2 + params.dec_b2
    return z3, h2, logits


def encode_batch(params, indices):
    """Complex channel symbols, shape (len(indices), channel_uses), each row of unit mean energy."""
    idx = np.asarray(indices)
    if np.any(idx < 0) or np.any(idx >= params.n_messages):
        raise DomainError("message index out of range")
    onehot = np.eye(params.n_messages)[idx]
    return _to_complex(_encode_real(params, onehot)[3])


def encode_forward(params, message_index):
    if not 0 <= int(message_index) < params.n_messages:
        raise DomainError("message index out of range")
    return IqFrame(encode_batch(params, [int(message_index)])[0])


def decode_batch(params, received):
    received = np.asarray(received)
    if received.shape[-1] != params.channel_uses:
        raise DomainError(f"expected {params.channel_uses} complex samples per frame")
    return _softmax(_decode_real(params, _to_real(received))[2])


def decode_forward(params, frame):
    samples = frame.samples if isinstance(frame, IqFrame) else np.asarray(frame)
    return decode_batch(params, samples[None, :])[0]


def _noise_sigma(es_n0_dB):
    if math.isinf(es_n0_dB) and es_n0_dB > 0:
        return 0.0
    return math.sqrt(10.0 ** (-es_n0_dB / 10.0) / 2.0)


# -- loss and gradients -------------------------------------------------------

def loss_and_gradients(params, message_batch, es_n0_dB, seed):
    """Mean cross-entropy over the batch and its gradient w.r.t. every parameter.

    The AWGN draw depends only on ``seed`` (an int or a Generator), so with an
    int seed the loss is a deterministic function of the parameters.
    """
    idx = np.asarray(message_batch)
    if idx.size == 0:
        raise DomainError("empty message batch")
    b = idx.size
    onehot = np.eye(params.n_messages)[idx]
    z1, h1, x, s, norm = _encode_real(params, onehot)
    rng = np.random.default_rng(seed)
    sigma = _noise_sigma(es_n0_dB)
    y = s + sigma * rng.standard_normal(s.shape) if sigma else s
    z3, h2, logits = _decode_real(params, y)

    shifted = logits - logits.max(axis=1, keepdims=True)
    logsum = np.log(np.exp(shifted).sum(axis=1))
    loss = float(np.mean(logsum - shifted[np.arange(b), idx]))
    if not math.isfinite(loss):
        raise TrainingDivergedError("non-finite loss")

    dlogits = (np.exp(shifted - logsum[:, None]) - onehot) / b
    g_dec_w2 = h2.T @ dlogits
    g_dec_b2 = dlogits.sum(axis=0)
    dz3 = (dlogits @ params.dec_w2.T) * (z3 > 0)
    g_dec_w1 = y.T @ dz3
    g_dec_b1 = dz3.sum(axis=0)
    ds = dz3 @ params.dec_w1.T

    # through s = sqrt(n) x / |x|
    u = x / norm
    dx = (math.sqrt(params.channel_uses) / norm) * (ds - u * np.sum(u * ds, axis=1, keepdims=True))
    g_enc_w2 = h1.T @ dx
    g_enc_b2 = dx.sum(axis=0)
    dz1 = (dx @ params.enc_w2.T) * (z1 > 0)
    g_enc_w1 = onehot.T @ dz1
    g_enc_b1 = dz1.sum(axis=0)

    grads = MlpParams(g_enc_w1, g_enc_b1, g_enc_w2, g_enc_b2,
                      g_dec_w1, g_dec_b1, g_dec_w2, g_dec_b2)
    return loss, grads


# -- training -----------------------------------------------------------------

class Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros_like(a) for a in params.arrays()]
        self.v = [np.zeros_like(a) for a in params.arrays()]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for p, g, m, v in zip(params.arrays(), grads.arrays(), self.m, self.v):
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def train(config, es_n0_grid=(), n_eval_messages=20000, params=None):
    """Train from ``config``; optionally evaluate BLER on ``es_n0_grid`` afterwards."""
    t0 = time.perf_counter()
    params = MlpParams.initialize(config) if params is None else params.copy()
    opt = Adam(params, config.learning_rate, config.beta1, config.beta2, config.eps)
    rng = np.random.default_rng(derive_seed(config.seed, "ae-train"))
    report = TrainReport(steps_per_epoch=config.log_every)
    window = []
    for step in range(config.steps):
        batch = rng.integers(0, config.n_messages, config.batch_size)
        try:
            loss, grads = loss_and_gradients(params, batch, config.train_es_n0_dB, rng)
        except (TrainingDivergedError, DegenerateEncodingError) as exc:
            report.diverged = True
            report.wall_clock_s = time.perf_counter() - t0
            raise TrainingDivergedError(f"training stopped at step {step}: {exc}", report) from exc
        opt.step(params, grads)
        window.append(loss)
        if len(window) == config.log_every or step == config.steps - 1:
            report.losses.append(float(np.mean(window)))
            window = []
    if not all(np.all(np.isfinite(a)) for a in params.arrays()):
        report.diverged = True
        raise TrainingDivergedError("parameters became non-finite", report)
    if len(es_n0_grid):
        report.es_n0_grid = [float(v) for v in es_n0_grid]
        report.bler = [float(v) for v in
                       evaluate_bler(params, es_n0_grid, n_eval_messages, derive_seed(config.seed, "ae-eval"))]
    report.wall_clock_s = time.perf_counter() - t0
    return params, report


def evaluate_bler(params, es_n0_grid, n_messages_per_point, seed):
    """Monte Carlo message error rate with hard argmax decisions.

    Messages cycle through all indices so each is sent equally often; the
    noise stream of grid point i is seeded from (seed, i).
    """
    grid = list(es_n0_grid)
    if not grid:
        raise DomainError("empty Es/N0 grid")
    idx = np.arange(n_messages_per_point) % params.n_messages
    tx = encode_batch(params, idx)
    out = []
    for i, snr in enumerate(grid):
        sigma = _noise_sigma(snr)
        rng = np.random.default_rng(derive_seed(seed, "ae-bler", i))
        noise = sigma * (rng.standard_normal(tx.shape) + 1j * rng.standard_normal(tx.shape))
        y = tx + noise if sigma else tx
        logits = _decode_real(params, _to_real(y))[2]
        out.append(float(np.mean(np.argmax(logits, axis=1) != idx)))
    return np.array(out)


def ebn0_to_channel_esn0(eb_n0_dB, bits_per_message=4, channel_uses=7):
    """Per-channel-use Es/N0 for a unit-energy code sending k bits over n uses."""
    return np.asarray(eb_n0_dB, dtype=float) + 10.0 * math.log10(bits_per_message / channel_uses)


def required_snr(grid_db, error_rate, target):
    """SNR at which the error-rate curve crosses ``target``, by log-linear interpolation.

    Returns inf when the curve never gets down to the target on the grid.
    """
    g = np.asarray(grid_db, dtype=float)
    e = np.asarray(error_rate, dtype=float)
    for i in range(len(g) - 1):
        if e[i] >= target > e[i + 1]:
            lo = math.log10(e[i])
            hi = math.log10(e[i + 1]) if e[i + 1] > 0 else lo - 6.0
            frac = (lo - math.log10(target)) / (lo - hi)
            return float(g[i] + frac * (g[i + 1] - g[i]))
    if len(e) and e[0] < target:
        return float(g[0])
    return math.inf


# -- parameter file -------------------------------------------------------------

def save_params(path, params):
    arrays = params.arrays()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<HH", FORMAT_VERSION, len(arrays)))
        for a in arrays:
            fh.write(struct.pack("<H", a.ndim))
            fh.write(struct.pack(f"<{a.ndim}I", *a.shape))
        for a in arrays:
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())


def load_params(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise DomainError("not an LLAE parameter file")
    version, count = struct.unpack_from("<HH", blob, 4)
    if version != FORMAT_VERSION:
        raise DomainError(f"unsupported LLAE version {version}")
    pos = 8
    shapes = []
    for _ in range(count):
        (ndim,) = struct.unpack_from("<H", blob, pos)
        pos += 2
        shapes.append(struct.unpack_from(f"<{ndim}I", blob, pos))
        pos += 4 * ndim
    arrays = []
    for shape in shapes:
        n = int(np.prod(shape)) if shape else 1
        arrays.append(np.frombuffer(blob, dtype="<f8", count=n, offset=pos).reshape(shape).copy())
        pos += 8 * n
    if pos != len(blob):
        raise DomainError("trailing bytes in LLAE parameter file")
    return MlpParams.from_arrays(arrays)
