"""Flat ``section.key = value`` scenario configuration.

Every key has a default; a missing file section just means defaults. Unknown
keys, unparsable values and out-of-domain values raise ``ConfigError`` naming
the key and line.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

from .errors import ConfigError, DomainError


def _f(default, check=None, msg=""):
    return field(default=default, metadata={"check": check, "msg": msg})


_pos = (lambda v: v > 0, "must be positive")
_nonneg = (lambda v: v >= 0, "must be non-negative")
_finite = (math.isfinite, "must be finite")
_zenith = (lambda v: 0 <= v < 90, "must lie in [0, 90) degrees")
_unit = (lambda v: 0 < v <= 1, "must lie in (0, 1]")


@dataclass
class LinkbudgetSection:
    altitude_km: float = _f(400.0, *_pos)
    zenith_deg: float = _f(40.0, *_zenith)
    spherical_earth: bool = _f(False)
    downlink_wavelength_nm: float = _f(620.0, *_pos)
    downlink_electrical_power_W: float = _f(140.0, *_nonneg)
    downlink_efficiency: float = _f(0.70, *_unit)
    downlink_tx_gain_dBi: float = _f(12.0, *_finite)
    rx_aperture_m: float = _f(0.30, *_pos)
    atmospheric_loss_dB: float = _f(2.0, *_finite)
    pointing_loss_dB: float = _f(1.0, *_finite)
    photons_per_bit: float = _f(700.0, *_pos)
    uplink_wavelength_nm: float = _f(1064.0, *_pos)
    uplink_power_W: float = _f(150.0, *_pos)
    uplink_efficiency: float = _f(1.0, *_unit)
    uplink_tx_aperture_m: float = _f(0.30, *_pos)
    uplink_rx_area_cm2: float = _f(70.0, *_pos)
    magnitude_zero_point_W_m2: float = _f(2.0e-8, *_pos)


@dataclass
class AtmosphereSection:
    v: float = _f(27.0, *_nonneg)
    C0: float = _f(1.7e-14, *_nonneg)
    separation_m: float = _f(20_000.0, *_nonneg)
    path_top_m: float = _f(20_000.0, *_pos)
    zenith_deg: float = _f(40.0, *_zenith)
    wavelength_nm: float = _f(620.0, *_pos)
    n_panels: int = _f(4096, lambda v: v >= 2 and v % 2 == 0, "must be an even integer >= 2")
    profile_max_height_m: float = _f(30_000.0, *_pos)
    profile_points: int = _f(301, lambda v: v >= 2, "must be >= 2")


@dataclass
class ModemSection:
    snr_axis: str = _f("ebn0", lambda v: v in ("ebn0", "esn0"), "must be 'ebn0' or 'esn0'")
    snr_grid_db: tuple = _f((0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0),
                            lambda v: len(v) > 0 and all(map(math.isfinite, v)),
                            "must be a non-empty list of finite values")
    n_bits: int = _f(100_000, lambda v: v > 0 and v % 4 == 0, "must be a positive multiple of 4")
    coded: bool = _f(True)
    pv_f3db_hz: float = _f(1.0e6, *_pos)
    pv_sample_rate_hz: float = _f(2.0e7, *_pos)
    pv_reverse_biased: bool = _f(False)


@dataclass
class AutoencoderSection:
    hidden_width: int = _f(32, *_pos)
    channel_uses: int = _f(7, *_pos)
    learning_rate: float = _f(1e-3, *_pos)
    batch_size: int = _f(256, *_pos)
    train_es_n0_dB: float = _f(10.0, *_finite)
    steps: int = _f(5000, *_nonneg)
    log_every: int = _f(100, *_pos)
    eval_grid_db: tuple = _f(tuple(float(x) for x in range(-4, 11)),
                             lambda v: len(v) > 0, "must be non-empty")
    eval_messages: int = _f(20_000, *_pos)


@dataclass
class DiversitySection:
    separation_m: float = _f(20_000.0, *_nonneg)
    es_n0_dB: float = _f(8.0, *_finite)
    frame_symbols: int = _f(1024, lambda v: v >= 64, "must be >= 64")
    n_pilots: int = _f(64, *_pos)
    n_trials: int = _f(20, *_pos)


@dataclass
class WakeupSection:
    n_faces: int = _f(6, *_pos)
    dwell_ms: int = _f(100, *_pos)
    beacon_duration_s: float = _f(5.0, *_pos)
    adc_rate_sps: float = _f(2e6, *_pos)
    poll_rate_factor: float = _f(0.05, *_unit)
    detection_threshold_dB: float = _f(6.0, *_finite)
    clock_recovery_ms: int = _f(10, *_nonneg)
    horizon_ms: int = _f(10_000, *_pos)
    randomize_start: bool = _f(False)


@dataclass
class GlobalSection:
    seed: int = _f(0, *_nonneg)


@dataclass
class ScenarioConfig:
    linkbudget: LinkbudgetSection = field(default_factory=LinkbudgetSection)
    atmosphere: AtmosphereSection = field(default_factory=AtmosphereSection)
    modem: ModemSection = field(default_factory=ModemSection)
    autoencoder: AutoencoderSection = field(default_factory=AutoencoderSection)
    diversity: DiversitySection = field(default_factory=DiversitySection)
    wakeup: WakeupSection = field(default_factory=WakeupSection)
    global_: GlobalSection = field(default_factory=GlobalSection)

    @property
    def seed(self):
        return self.global_.seed

    def sections(self):
        for f in dataclasses.fields(self):
            yield f.name.rstrip("_"), getattr(self, f.name)

    def section(self, name):
        attr = "global_" if name == "global" else name
        if attr not in {f.name for f in dataclasses.fields(self)}:
            return None
        return getattr(self, attr)


def _parse_value(raw, typ):
    raw = raw.strip()
    if typ in ("bool", bool):
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if typ in ("int", int):
        v = float(raw)
        if not v.is_integer():
            raise ValueError(f"not an integer: {raw!r}")
        return int(v)
    if typ in ("float", float):
        return float(raw)
    if typ in ("tuple", tuple):
        return tuple(float(p) for p in raw.replace(";", ",").split(",") if p.strip())
    if typ in ("str", str):
        return raw
    raise TypeError(typ)


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _check(section_name, sec, line_of):
    for f in dataclasses.fields(sec):
        check = f.metadata.get("check")
        value = getattr(sec, f.name)
        if check is not None and not check(value):
            key = f"{section_name}.{f.name}"
            raise ConfigError(f"{value!r} {f.metadata['msg']}", key=key, line=line_of.get(key))


def _cross_check(cfg, line_of):
    # module constructors enforce their own preconditions
    from .atmosphere import CnProfile
    from .autoencoder import AeConfig
    from .modem import PvChannelModel
    from .wakeup import WakeupConfig

    m = cfg.modem
    checks = [
        ("atmosphere", lambda: CnProfile(cfg.atmosphere.v, cfg.atmosphere.C0)),
        ("modem.pv_f3db_hz", lambda: PvChannelModel(m.pv_f3db_hz, m.pv_sample_rate_hz,
                                                    m.pv_reverse_biased).coefficients()),
        ("autoencoder", lambda: AeConfig(hidden_width=cfg.autoencoder.hidden_width,
                                         channel_uses=cfg.autoencoder.channel_uses)),
        ("diversity.n_pilots", lambda: _pilots_ok(cfg.diversity)),
        ("wakeup", lambda: WakeupConfig(cfg.wakeup.n_faces, cfg.wakeup.dwell_ms)),
    ]
    for key, build in checks:
        try:
            build()
        except DomainError as exc:
            raise ConfigError(str(exc), key=key, line=line_of.get(key)) from exc


def _pilots_ok(div):
    if div.n_pilots >= div.frame_symbols:
        raise DomainError("n_pilots must be smaller than frame_symbols")


def parse_config_text(text):
    cfg = ScenarioConfig()
    line_of = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'section.key = value'", line=lineno)
        key, raw = (p.strip() for p in stripped.split("=", 1))
        if "." not in key:
            raise ConfigError("key must be 'section.key'", key=key, line=lineno)
        sec_name, name = key.split(".", 1)
        sec = cfg.section(sec_name)
        if sec is None:
            raise ConfigError("unknown section", key=key, line=lineno)
        types = {f.name: f.type for f in dataclasses.fields(sec)}
        if name not in types:
            raise ConfigError("unknown key", key=key, line=lineno)
        try:
            value = _parse_value(raw, types[name])
        except ValueError as exc:
            raise ConfigError(f"malformed value: {exc}", key=key, line=lineno) from exc
        setattr(sec, name, value)
        line_of[key] = lineno
    for name, sec in cfg.sections():
        _check(name, sec, line_of)
    _cross_check(cfg, line_of)
    return cfg


def parse_config(path):
    if path is None:
        return parse_config_text("")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return parse_config_text(text)


def dump_config(cfg):
    lines = []
    for name, sec in cfg.sections():
        for f in dataclasses.fields(sec):
            lines.append(f"{name}.{f.name} = {_format_value(getattr(sec, f.name))}")
    return "\n".join(lines) + "\n"


def save_config(cfg, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_config(cfg))
