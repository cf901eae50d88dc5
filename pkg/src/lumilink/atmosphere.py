"""Turbulence profile and differential phase-delay statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError
from .linkbudget import OpticalCarrier

DEFAULT_GROUND_CONSTANT = 1.7e-14
DEFAULT_PANELS = 4096
PHASE_VARIANCE_COEFF = 2.914


@dataclass(frozen=True)
class CnProfile:
    """Hufnagel-Valley style Cn^2(h) with heights in metres."""

    wind_speed_mps: float = 27.0
    ground_constant: float = DEFAULT_GROUND_CONSTANT

    def __post_init__(self):
        if not self.wind_speed_mps >= 0:
            raise DomainError("wind speed must be non-negative")
        if not self.ground_constant >= 0:
            raise DomainError("ground constant C0 must be non-negative")

    def __call__(self, height_m):
        return cn2(self, height_m)


@dataclass(frozen=True)
class PhasePathSample:
    heights_m: np.ndarray
    n1_values: np.ndarray
    n0: float = 1.0

    def __post_init__(self):
        h = np.asarray(self.heights_m, dtype=float)
        n1 = np.asarray(self.n1_values, dtype=float)
        if h.ndim != 1 or h.size < 2:
            raise DomainError("need at least two height samples")
        if n1.shape != h.shape:
            raise DomainError("n1_values must match heights in length")
        if h[0] < 0 or np.any(np.diff(h) <= 0):
            raise DomainError("heights must start at >= 0 and strictly increase")
        object.__setattr__(self, "heights_m", h)
        object.__setattr__(self, "n1_values", n1)


@dataclass(frozen=True)
class PhaseVarianceInputs:
    separation_m: float
    path_top_m: float
    zenith_angle_rad: float
    carrier: OpticalCarrier

    def __post_init__(self):
        if not self.separation_m >= 0:
            raise DomainError("separation must be non-negative")
        if not self.path_top_m > 0:
            raise DomainError("path top H must be positive")
        if not 0.0 <= self.zenith_angle_rad < math.pi / 2:
            raise DomainError("zenith angle must lie in [0, pi/2)")


def cn2(profile, height_m):
    h = np.asarray(height_m, dtype=float)
    if np.any(h < 0):
        raise DomainError("height must be non-negative")
    high = (0.0059 * (profile.wind_speed_mps / 27.0) ** 2
            * (1e-5 * h) ** 10 * np.exp(-h / 1000.0))
    val = high + profile.ground_constant * np.exp(-h / 100.0)
    return float(val) if val.ndim == 0 else val


def integrate_cn2_z53(profile, top_m, n_panels=DEFAULT_PANELS):
    """Composite Simpson estimate of the integral of Cn^2(z) z^(5/3) over [0, top_m]."""
    if not top_m > 0:
        raise DomainError("upper height must be positive")
    if n_panels < 2 or n_panels % 2:
        raise DomainError("Simpson integration needs an even panel count >= 2")
    return float(kernels.simpson_cn2_z53(float(top_m), int(n_panels),
                                         float(profile.wind_speed_mps),
                                         float(profile.ground_constant)))


def phase_variance(inputs, profile, n_panels=DEFAULT_PANELS):
    """Variance of the differential phase between two paths, in rad^2."""
    k = inputs.carrier.wavenumber_per_m
    d, top = inputs.separation_m, inputs.path_top_m
    if d == 0:
        return 0.0
    return (PHASE_VARIANCE_COEFF * k ** 2 * (d / top) ** (5.0 / 3.0)
            / math.cos(inputs.zenith_angle_rad)
            * integrate_cn2_z53(profile, top, n_panels))


def refractive_phase_delay(sample, carrier):
    excess = sample.n0 - sample.n1_values
    return carrier.wavenumber_per_m * float(np.trapezoid(excess, sample.heights_m))


def sample_phase_pair(inputs, profile, rng_seed, size=None, common_variance=0.0,
                      n_panels=DEFAULT_PANELS):
    """Draw path phases (phi1, phi2) whose difference has the modelled variance.

    Each phase is a shared term of variance ``common_variance`` plus an
    independent term of variance sigma^2/2, so only the difference is pinned.
    """
    var = phase_variance(inputs, profile, n_panels)
    rng = np.random.default_rng(rng_seed)
    shape = () if size is None else size
    common = rng.standard_normal(shape) * math.sqrt(common_variance)
    s = math.sqrt(var / 2.0)
    e1 = rng.standard_normal(shape)
    e2 = rng.standard_normal(shape)
    phi1 = common + s * e1
    phi2 = common + s * e2
    if size is None:
        return float(phi1), float(phi2)
    return phi1, phi2


def profile_curve(profile, max_height_m, n_points):
    heights = np.linspace(0.0, max_height_m, n_points)
    return heights, cn2(profile, heights)
