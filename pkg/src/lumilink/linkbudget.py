"""Radiometric link budget for the LED downlink and the laser/PV-cell uplink.

All gains and losses are carried in dB; linear quantities are SI.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import DomainError

PLANCK = 6.62607015e-34  # J s
LIGHT_SPEED = 299_792_458.0  # m/s
EARTH_RADIUS_M = 6_371_000.0


@dataclass(frozen=True)
class OpticalCarrier:
    wavelength_m: float
    photon_energy_J: float = field(init=False)
    wavenumber_per_m: float = field(init=False)

    def __post_init__(self):
        if not (self.wavelength_m > 0 and math.isfinite(self.wavelength_m)):
            raise DomainError(f"wavelength must be positive, got {self.wavelength_m!r}")
        object.__setattr__(self, "photon_energy_J", PLANCK * LIGHT_SPEED / self.wavelength_m)
        object.__setattr__(self, "wavenumber_per_m", 2.0 * math.pi / self.wavelength_m)

    @classmethod
    def from_nm(cls, nm):
        return cls(nm * 1e-9)


@dataclass(frozen=True)
class PathGeometry:
    altitude_m: float
    zenith_angle_rad: float
    path_length_m: float

    @classmethod
    def from_orbit(cls, altitude_m, zenith_angle_rad, spherical=False):
        return cls(altitude_m, zenith_angle_rad,
                   slant_range(altitude_m, zenith_angle_rad, spherical=spherical))


@dataclass(frozen=True)
class LinkBudgetReport:
    tx_power_dBW: float
    tx_gain_dBi: float
    fspl_dB: float
    atmospheric_loss_dB: float
    pointing_loss_dB: float
    rx_gain_dBi: float
    received_power_dBW: float
    received_power_W: float
    bit_rate_bps: float | None = None
    irradiance_W_per_m2: float | None = None

    def ledger_sum(self):
        return (self.tx_power_dBW + self.tx_gain_dBi - self.fspl_dB
                - self.atmospheric_loss_dB - self.pointing_loss_dB + self.rx_gain_dBi)

    def rows(self):
        """(term, value, unit) triples in ledger order."""
        out = [
            ("tx_power_dbw", self.tx_power_dBW, "dBW"),
            ("tx_gain_dbi", self.tx_gain_dBi, "dBi"),
            ("fspl_db", self.fspl_dB, "dB"),
            ("atmospheric_loss_db", self.atmospheric_loss_dB, "dB"),
            ("pointing_loss_db", self.pointing_loss_dB, "dB"),
            ("rx_gain_dbi", self.rx_gain_dBi, "dBi"),
            ("received_power_dbw", self.received_power_dBW, "dBW"),
            ("received_power_w", self.received_power_W, "W"),
        ]
        if self.bit_rate_bps is not None:
            out.append(("bit_rate_bps", self.bit_rate_bps, "bit/s"))
        if self.irradiance_W_per_m2 is not None:
            out.append(("irradiance_w_per_m2", self.irradiance_W_per_m2, "W/m^2"))
        return out


def watts_to_dbw(watts):
    if watts <= 0:
        raise DomainError("power must be positive to express in dBW")
    return 10.0 * math.log10(watts)


def dbw_to_watts(dbw):
    if not math.isfinite(dbw):
        raise DomainError("dBW value must be finite")
    return 10.0 ** (dbw / 10.0)


def slant_range(altitude_m, zenith_angle_rad, spherical=False):
    """Line-of-sight distance from the ground station to the spacecraft.

    The default flat-Earth secant model ``h / cos(psi)`` gives 522 km for a
    400 km orbit seen 40 degrees off zenith. With ``spherical=True`` the
    law-of-cosines geometry over a 6371 km Earth is used instead (about 512 km
    for the same case).
    """
    if not altitude_m > 0:
        raise DomainError("altitude must be positive")
    if not 0.0 <= zenith_angle_rad < math.pi / 2:
        raise DomainError("zenith angle must lie in [0, pi/2)")
    if spherical:
        r = EARTH_RADIUS_M
        c = math.cos(zenith_angle_rad)
        return -r * c + math.sqrt((r * c) ** 2 + 2.0 * r * altitude_m + altitude_m ** 2)
    return altitude_m / math.cos(zenith_angle_rad)


def optical_tx_power_W(electrical_power_W, efficiency):
    if not 0.0 < efficiency <= 1.0:
        raise DomainError("efficiency must lie in (0, 1]")
    if electrical_power_W < 0:
        raise DomainError("electrical power must be non-negative")
    return electrical_power_W * efficiency


def _positive(name, value):
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be positive and finite")


def tx_gain_aperture(diameter_m, carrier):
    """Transmit gain 16 d^2 / lambda^2 in dBi."""
    _positive("diameter", diameter_m)
    return 10.0 * math.log10(16.0 * diameter_m ** 2 / carrier.wavelength_m ** 2)


def rx_gain_aperture(diameter_m, carrier):
    """Receive gain (pi d / lambda)^2 in dBi."""
    _positive("diameter", diameter_m)
    return 10.0 * math.log10((math.pi * diameter_m / carrier.wavelength_m) ** 2)


def rx_gain_area(area_m2, carrier):
    """Effective-aperture gain 4 pi A / lambda^2 in dBi."""
    _positive("area", area_m2)
    return 10.0 * math.log10(4.0 * math.pi * area_m2 / carrier.wavelength_m ** 2)


def free_space_path_loss(path_length_m, carrier):
    _positive("path length", path_length_m)
    return 20.0 * math.log10(4.0 * math.pi * path_length_m / carrier.wavelength_m)


def compose_budget(tx_power_dBW, tx_gain_dBi, fspl_dB, atm_loss_dB, pointing_loss_dB,
                   rx_gain_dBi, bit_rate_bps=None, irradiance_W_per_m2=None):
    terms = (tx_power_dBW, tx_gain_dBi, fspl_dB, atm_loss_dB, pointing_loss_dB, rx_gain_dBi)
    if not all(math.isfinite(t) for t in terms):
        raise DomainError("all budget terms must be finite")
    received = (tx_power_dBW + tx_gain_dBi - fspl_dB
                - atm_loss_dB - pointing_loss_dB + rx_gain_dBi)
    return LinkBudgetReport(
        tx_power_dBW=tx_power_dBW,
        tx_gain_dBi=tx_gain_dBi,
        fspl_dB=fspl_dB,
        atmospheric_loss_dB=atm_loss_dB,
        pointing_loss_dB=pointing_loss_dB,
        rx_gain_dBi=rx_gain_dBi,
        received_power_dBW=received,
        received_power_W=dbw_to_watts(received),
        bit_rate_bps=bit_rate_bps,
        irradiance_W_per_m2=irradiance_W_per_m2,
    )


def photon_limited_bitrate(received_power_W, carrier, photons_per_bit):
    if received_power_W < 0:
        raise DomainError("received power must be non-negative")
    _positive("photons per bit", photons_per_bit)
    return received_power_W / (carrier.photon_energy_J * photons_per_bit)


def ground_irradiance(eirp_W, path_length_m):
    if eirp_W < 0:
        raise DomainError("EIRP must be non-negative")
    _positive("path length", path_length_m)
    return eirp_W / (4.0 * math.pi * path_length_m ** 2)


def visual_magnitude(irradiance_W_per_m2, zero_point_W_per_m2):
    if not (irradiance_W_per_m2 > 0 and zero_point_W_per_m2 > 0):
        raise DomainError("irradiance and zero point must be positive")
    return -2.5 * math.log10(irradiance_W_per_m2 / zero_point_W_per_m2)


# -- scenario-level budgets ---------------------------------------------------

@dataclass(frozen=True)
class DownlinkScenario:
    wavelength_nm: float = 620.0
    altitude_km: float = 400.0
    zenith_deg: float = 40.0
    electrical_power_W: float = 140.0
    efficiency: float = 0.70
    tx_gain_dBi: float = 12.0
    rx_aperture_m: float = 0.30
    atmospheric_loss_dB: float = 2.0
    pointing_loss_dB: float = 1.0
    photons_per_bit: float = 700.0
    spherical_earth: bool = False


@dataclass(frozen=True)
class UplinkScenario:
    wavelength_nm: float = 1064.0
    altitude_km: float = 400.0
    zenith_deg: float = 40.0
    laser_power_W: float = 150.0
    efficiency: float = 1.0
    tx_aperture_m: float = 0.30
    rx_area_cm2: float = 70.0
    atmospheric_loss_dB: float = 2.0
    pointing_loss_dB: float = 1.0
    spherical_earth: bool = False


def downlink_budget(sc=DownlinkScenario()):
    carrier = OpticalCarrier.from_nm(sc.wavelength_nm)
    path = slant_range(sc.altitude_km * 1e3, math.radians(sc.zenith_deg), sc.spherical_earth)
    p_tx = watts_to_dbw(optical_tx_power_W(sc.electrical_power_W, sc.efficiency))
    report = compose_budget(p_tx, sc.tx_gain_dBi, free_space_path_loss(path, carrier),
                            sc.atmospheric_loss_dB, sc.pointing_loss_dB,
                            rx_gain_aperture(sc.rx_aperture_m, carrier))
    eirp = dbw_to_watts(p_tx + sc.tx_gain_dBi)
    return replace(
        report,
        bit_rate_bps=photon_limited_bitrate(report.received_power_W, carrier, sc.photons_per_bit),
        irradiance_W_per_m2=ground_irradiance(eirp, path),
    )


def uplink_budget(sc=UplinkScenario()):
    carrier = OpticalCarrier.from_nm(sc.wavelength_nm)
    path = slant_range(sc.altitude_km * 1e3, math.radians(sc.zenith_deg), sc.spherical_earth)
    p_tx = watts_to_dbw(optical_tx_power_W(sc.laser_power_W, sc.efficiency))
    return compose_budget(p_tx, tx_gain_aperture(sc.tx_aperture_m, carrier),
                          free_space_path_loss(path, carrier),
                          sc.atmospheric_loss_dB, sc.pointing_loss_dB,
                          rx_gain_area(sc.rx_area_cm2 * 1e-4, carrier))


# Values printed in the published budget tables, for side-by-side reports.
PUBLISHED_DOWNLINK = {
    "tx_power_dbw": 19.9,
    "tx_gain_dbi": 12.0,
    "fspl_db": 260.5,
    "atmospheric_loss_db": 2.0,
    "pointing_loss_db": 1.0,
    "rx_gain_dbi": 123.6,
    "received_power_dbw": -107.3,
    "bit_rate_bps": 8.85e4,
}
PUBLISHED_UPLINK = {
    "tx_power_dbw": 21.76,
    "tx_gain_dbi": 121.0,
    "fspl_db": 255.8,
    "atmospheric_loss_db": 2.0,
    "pointing_loss_db": 1.0,
    "rx_gain_dbi": 108.9,
    "received_power_dbw": -8.12,
}
PUBLISHED_PATH_LENGTH_M = 522e3
