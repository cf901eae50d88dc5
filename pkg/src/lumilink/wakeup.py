"""Discrete-event model of the PV-cell uplink wake-up receiver.

The receiver polls the faces round-robin, one dwell per face. A face's
envelope is checked at every 1 ms tick of its dwell; the first tick with the
link-start beacon above threshold raises BeaconDetected. After a clock
recovery delay the receiver snapshots every face and locks onto the one with
the highest SNR. Commands arriving once the link is up are executed,
commands arriving earlier produce a ProtocolError event.
"""
from __future__ import annotations

import bisect
import csv
import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError
from .seeds import derive_seed


class EventKind(str, Enum):
    SCAN_START = "ScanStart"
    FACE_DWELL = "FaceDwell"
    BEACON_DETECTED = "BeaconDetected"
    CLOCK_RECOVERED = "ClockRecovered"
    FACE_SELECTED = "FaceSelected"
    TELEMETRY_DELIVERED = "TelemetryDelivered"
    POWER_CYCLE_ISSUED = "PowerCycleIssued"
    PROTOCOL_ERROR = "ProtocolError"


@dataclass(frozen=True)
class WakeupEvent:
    timestamp_ms: int
    kind: EventKind
    face_id: int | None = None
    detail: str = ""


@dataclass(frozen=True)
class WakeupConfig:
    n_faces: int = 6
    dwell_ms: int = 100
    beacon_duration_s: float = 5.0
    adc_rate_sps: float = 2e6
    poll_rate_factor: float = 0.05
    detection_threshold_dB: float = 6.0
    clock_recovery_ms: int = 10
    randomize_start: bool = False

    def __post_init__(self):
        if self.n_faces < 1:
            raise DomainError("need at least one face")
        if self.dwell_ms <= 0:
            raise DomainError("dwell must be positive")
        if self.clock_recovery_ms < 0:
            raise DomainError("clock recovery delay must be non-negative")
        if not 0 < self.poll_rate_factor <= 1:
            raise DomainError("poll_rate_factor must lie in (0, 1]")
        if self.beacon_duration_s * 1000 < self.cycle_ms:
            warnings.warn("beacon shorter than one polling cycle; detection is not guaranteed",
                          stacklevel=2)

    @property
    def cycle_ms(self):
        return self.n_faces * self.dwell_ms

    @property
    def revisit_gap_ms(self):
        """Longest stretch during which a given face is not being listened to."""
        return (self.n_faces - 1) * self.dwell_ms

    @property
    def beacon_duration_ms(self):
        return int(round(self.beacon_duration_s * 1000))

    @property
    def poll_rate_sps(self):
        return self.adc_rate_sps * self.poll_rate_factor


@dataclass(frozen=True)
class FaceSignal:
    """Step-function trace: value at t is the last change point at or before t."""

    face_id: int
    times_ms: tuple = ()
    snr_dB: tuple = ()
    beacon_present: tuple = ()

    def __post_init__(self):
        if not len(self.times_ms) == len(self.snr_dB) == len(self.beacon_present):
            raise DomainError("trace columns differ in length")
        if any(b <= a for a, b in zip(self.times_ms, self.times_ms[1:])):
            raise DomainError("trace times must strictly increase")

    def at(self, t_ms):
        i = bisect.bisect_right(self.times_ms, t_ms) - 1
        if i < 0:
            return -math.inf, False
        return self.snr_dB[i], bool(self.beacon_present[i])

    def link_snr(self, t_ms):
        snr, beacon = self.at(t_ms)
        return snr if beacon else -math.inf

    def first_detection(self, start_ms, end_ms, threshold_dB):
        """First integer tick in [start, end) where the beacon is above threshold."""
        if self.link_snr(start_ms) >= threshold_dB:
            return start_ms
        i = bisect.bisect_right(self.times_ms, start_ms)
        while i < len(self.times_ms) and self.times_ms[i] < end_ms:
            if self.beacon_present[i] and self.snr_dB[i] >= threshold_dB:
                return self.times_ms[i]
            i += 1
        return None


@dataclass
class WakeupState:
    mode: str = "scanning"
    face_id: int | None = None


@dataclass(frozen=True)
class Telemetry:
    payload: bytes = b""


@dataclass(frozen=True)
class PowerCycle:
    pass


def _fmt(x):
    return f"{x:.12g}"


def select_face(snapshot):
    """Index of the highest SNR; ties go to the lowest face id."""
    snr = list(snapshot)
    if not snr:
        raise DomainError("no faces to select from")
    return int(np.argmax(np.asarray(snr, dtype=float)))


def _check_faces(config, faces):
    if not faces:
        raise DomainError("empty face set")
    ids = [f.face_id for f in faces]
    if sorted(ids) != list(range(len(faces))):
        raise DomainError("face ids must be 0..n-1 and unique")
    if len(faces) != config.n_faces:
        raise DomainError(f"config expects {config.n_faces} faces, got {len(faces)}")
    return sorted(faces, key=lambda f: f.face_id)


def run_scan(config, faces, horizon_ms, seed=0, start_ms=0):
    """Poll faces until a link is established or the horizon is reached.

    Returns the event log. The log ends with FaceSelected when the link came up.
    """
    faces = _check_faces(config, faces)
    if horizon_ms <= 0:
        raise DomainError("horizon must be positive")
    n = len(faces)
    face = 0
    if config.randomize_start:
        face = int(np.random.default_rng(derive_seed(seed, "wakeup-start")).integers(n))
    log = [WakeupEvent(start_ms, EventKind.SCAN_START, None,
                       f"adc_rate_sps={_fmt(config.adc_rate_sps)};"
                       f"poll_rate_sps={_fmt(config.poll_rate_sps)}")]
    t = start_ms
    thr = config.detection_threshold_dB
    while t < horizon_ms:
        end = min(t + config.dwell_ms, horizon_ms)
        log.append(WakeupEvent(t, EventKind.FACE_DWELL, face))
        hit = faces[face].first_detection(t, end, thr)
        if hit is not None:
            log.append(WakeupEvent(hit, EventKind.BEACON_DETECTED, face,
                                   f"snr_db={_fmt(faces[face].link_snr(hit))}"))
            t_clk = hit + config.clock_recovery_ms
            if t_clk >= horizon_ms:
                break
            if faces[face].link_snr(t_clk) >= thr:
                log.append(WakeupEvent(t_clk, EventKind.CLOCK_RECOVERED, face))
                snapshot = [f.link_snr(t_clk) for f in faces]
                chosen = select_face(snapshot)
                log.append(WakeupEvent(t_clk, EventKind.FACE_SELECTED, chosen,
                                       "snapshot=" + "|".join(_fmt(s) for s in snapshot)))
                return log
            # beacon lost before the clock locked: resume polling
            t = t_clk
            face = (face + 1) % n
            continue
        t = end
        face = (face + 1) % n
    return log


def handle_command(state, command, t_ms):
    """Apply one uplink command; returns (new state, events)."""
    if state.mode != "linked":
        name = type(command).__name__
        return state, [WakeupEvent(t_ms, EventKind.PROTOCOL_ERROR, state.face_id,
                                   f"{name} before link established")]
    if isinstance(command, Telemetry):
        return state, [WakeupEvent(t_ms, EventKind.TELEMETRY_DELIVERED, state.face_id,
                                   "payload=" + bytes(command.payload).hex())]
    if isinstance(command, PowerCycle):
        return WakeupState("scanning", None), [
            WakeupEvent(t_ms, EventKind.POWER_CYCLE_ISSUED, state.face_id)]
    raise DomainError(f"unknown command {command!r}")


def run_session(config, faces, horizon_ms, commands=(), seed=0):
    """Scan, then play timed commands; a power cycle restarts scanning at its timestamp."""
    pending = sorted(commands, key=lambda c: c[0])
    log = []
    t = 0
    k = 0
    while t < horizon_ms:
        segment = run_scan(config, faces, horizon_ms, seed, start_ms=t)
        linked_at = segment[-1].timestamp_ms if segment[-1].kind is EventKind.FACE_SELECTED else None
        state = WakeupState()
        early = []
        while k < len(pending) and (linked_at is None or pending[k][0] < linked_at):
            early.extend(handle_command(state, pending[k][1], pending[k][0])[1])
            k += 1
        log.extend(_merge(segment, early))
        if linked_at is None:
            break
        state = WakeupState("linked", segment[-1].face_id)
        restart = None
        while k < len(pending):
            t_cmd, cmd = pending[k]
            k += 1
            state, events = handle_command(state, cmd, t_cmd)
            log.extend(events)
            if state.mode == "scanning":
                restart = t_cmd
                break
        if restart is None:
            break
        t = restart
    return log


def _merge(primary, extra):
    out = list(primary) + list(extra)
    out.sort(key=lambda e: e.timestamp_ms)  # stable: scan events stay ahead on ties
    return out


def beacon_scenario(config, beacon_face, onset_ms, snr_dB=20.0, background_dB=-10.0):
    """Faces with a single beacon of ``config.beacon_duration_s`` on one face."""
    off = config.beacon_duration_ms + onset_ms
    faces = []
    for f in range(config.n_faces):
        if f != beacon_face:
            faces.append(FaceSignal(f, (0,), (background_dB,), (False,)))
        elif onset_ms > 0:
            faces.append(FaceSignal(f, (0, onset_ms, off), (background_dB, snr_dB, background_dB),
                                    (False, True, False)))
        else:
            faces.append(FaceSignal(f, (0, off), (snr_dB, background_dB), (True, False)))
    return faces


def first_event_time(log, kind):
    for e in log:
        if e.kind is kind:
            return e.timestamp_ms
    return None


# -- CSV ----------------------------------------------------------------------

def read_traces(path, config):
    rows = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        need = {"time_ms", "face_id", "snr_db", "beacon"}
        if reader.fieldnames is None or not need <= set(reader.fieldnames):
            raise DomainError(f"trace CSV needs columns {sorted(need)}")
        for line, row in enumerate(reader, start=2):
            try:
                fid = int(row["face_id"])
                t = int(row["time_ms"])
                snr = float(row["snr_db"])
                beacon = row["beacon"].strip().lower() in ("1", "true", "yes")
            except ValueError as exc:
                raise DomainError(f"line {line}: {exc}") from exc
            if not 0 <= fid < config.n_faces:
                raise DomainError(f"line {line}: face_id {fid} outside 0..{config.n_faces - 1}")
            rows.setdefault(fid, []).append((t, snr, beacon))
    faces = []
    for fid in range(config.n_faces):
        pts = sorted(rows.get(fid, []))
        faces.append(FaceSignal(fid, tuple(p[0] for p in pts), tuple(p[1] for p in pts),
                                tuple(p[2] for p in pts)))
    return faces


def write_events(path, events):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["timestamp_ms", "kind", "face_id", "detail"])
        for e in events:
            w.writerow([e.timestamp_ms, e.kind.value, "" if e.face_id is None else e.face_id,
                        e.detail])


def read_commands(path):
    out = []
    with open(path, newline="") as fh:
        for line, row in enumerate(csv.DictReader(fh), start=2):
            kind = row.get("command", "").strip().lower()
            t = int(row["time_ms"])
            if kind == "telemetry":
                out.append((t, Telemetry(row.get("payload", "").encode())))
            elif kind in ("powercycle", "power_cycle"):
                out.append((t, PowerCycle()))
            else:
                raise DomainError(f"line {line}: unknown command {kind!r}")
    return out
