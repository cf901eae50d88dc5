"""Command-line entry point: ``lumilink [--config F] [--out DIR] [--seed N] <subcommand>``.

Exit codes: 0 success, 1 validation/usage error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import atmosphere, autoencoder, diversity, linkbudget, modem, wakeup
from .config import parse_config
from .errors import ConfigError, DomainError, TrainingDivergedError
from .seeds import derive_seed

log = logging.getLogger("lumilink")

SUBCOMMANDS = ("linkbudget", "atmosphere", "simulate-ber", "train-autoencoder",
               "diversity-sim", "wakeup-sim", "report")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def num(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else num(v) for v in row])
    log.info("wrote %s", path)


# -- subcommands ----------------------------------------------------------------

def _scenarios(cfg):
    lb = cfg.linkbudget
    down = linkbudget.DownlinkScenario(
        wavelength_nm=lb.downlink_wavelength_nm, altitude_km=lb.altitude_km,
        zenith_deg=lb.zenith_deg, electrical_power_W=lb.downlink_electrical_power_W,
        efficiency=lb.downlink_efficiency, tx_gain_dBi=lb.downlink_tx_gain_dBi,
        rx_aperture_m=lb.rx_aperture_m, atmospheric_loss_dB=lb.atmospheric_loss_dB,
        pointing_loss_dB=lb.pointing_loss_dB, photons_per_bit=lb.photons_per_bit,
        spherical_earth=lb.spherical_earth)
    up = linkbudget.UplinkScenario(
        wavelength_nm=lb.uplink_wavelength_nm, altitude_km=lb.altitude_km,
        zenith_deg=lb.zenith_deg, laser_power_W=lb.uplink_power_W,
        efficiency=lb.uplink_efficiency, tx_aperture_m=lb.uplink_tx_aperture_m,
        rx_area_cm2=lb.uplink_rx_area_cm2, atmospheric_loss_dB=lb.atmospheric_loss_dB,
        pointing_loss_dB=lb.pointing_loss_dB, spherical_earth=lb.spherical_earth)
    return down, up


def _path_length(cfg):
    lb = cfg.linkbudget
    return linkbudget.slant_range(lb.altitude_km * 1e3, math.radians(lb.zenith_deg),
                                  lb.spherical_earth)


def cmd_linkbudget(cfg, out, args):
    down, up = _scenarios(cfg)
    dl = linkbudget.downlink_budget(down)
    ul = linkbudget.uplink_budget(up)
    extra = [("path_length_m", _path_length(cfg), "m"),
             ("visual_magnitude",
              linkbudget.visual_magnitude(dl.irradiance_W_per_m2,
                                          cfg.linkbudget.magnitude_zero_point_W_m2), "mag")]
    write_csv(out / "linkbudget_downlink.csv", ["term", "value", "unit"], dl.rows() + extra)
    write_csv(out / "linkbudget_uplink.csv", ["term", "value", "unit"],
              ul.rows() + extra[:1])
    for title, rows in (("downlink", dl.rows() + extra), ("uplink", ul.rows())):
        print(f"{title}:")
        for term, value, unit in rows:
            print(f"  {term:<22}{value:>16.6g} {unit}")
    return 0


def cmd_atmosphere(cfg, out, args):
    a = cfg.atmosphere
    profile = atmosphere.CnProfile(a.v, a.C0)
    heights, values = atmosphere.profile_curve(profile, a.profile_max_height_m, a.profile_points)
    write_csv(out / "cn2_profile.csv", ["height_m", "cn2"], zip(heights, values))
    inputs = atmosphere.PhaseVarianceInputs(a.separation_m, a.path_top_m,
                                            math.radians(a.zenith_deg),
                                            linkbudget.OpticalCarrier.from_nm(a.wavelength_nm))
    integral = atmosphere.integrate_cn2_z53(profile, a.path_top_m, a.n_panels)
    var = atmosphere.phase_variance(inputs, profile, a.n_panels)
    write_csv(out / "phase_variance.csv", ["quantity", "value", "unit"], [
        ("cn2_z53_integral", integral, "m^2"),
        ("phase_variance", var, "rad^2"),
        ("phase_std", math.sqrt(var), "rad"),
    ])
    print(f"sigma^2_phi = {var:.6g} rad^2")
    return 0


def cmd_simulate_ber(cfg, out, args):
    m = cfg.modem
    rows = []
    for i, snr in enumerate(m.snr_grid_db):
        seed = derive_seed(cfg.seed, "simulate-ber", i)
        rng = np.random.default_rng(seed)
        bits = rng.integers(0, 2, m.n_bits, dtype=np.uint8)
        info_per_sym = modem.CODED_INFO_BITS_PER_SYMBOL if m.coded else modem.UNCODED_INFO_BITS_PER_SYMBOL
        es = snr if m.snr_axis == "esn0" else modem.ebn0_to_esn0(snr, info_per_sym)
        chain = modem.run_classical_chain if m.coded else modem.run_uncoded_chain
        ber, bler = chain(bits, es, rng)
        rows.append((snr, ber, bler, m.n_bits, seed))
    write_csv(out / "ber.csv", ["snr_db", "ber", "bler", "n_bits", "seed"], rows)
    return 0


def cmd_train_autoencoder(cfg, out, args):
    a = cfg.autoencoder
    conf = autoencoder.AeConfig(hidden_width=a.hidden_width, channel_uses=a.channel_uses,
                                learning_rate=a.learning_rate, batch_size=a.batch_size,
                                train_es_n0_dB=a.train_es_n0_dB, seed=cfg.seed,
                                steps=a.steps, log_every=a.log_every)
    params, report = autoencoder.train(conf, a.eval_grid_db, a.eval_messages)
    log.info("training took %.2f s", report.wall_clock_s)
    autoencoder.save_params(out / "ae_params.llae", params)
    write_csv(out / "ae_train_loss.csv", ["epoch", "step", "loss"],
              [(i, (i + 1) * report.steps_per_epoch, v) for i, v in enumerate(report.losses)])
    shift = 10.0 * math.log10(4.0 / conf.channel_uses)
    write_csv(out / "ae_bler.csv", ["es_n0_db", "eb_n0_db", "bler"],
              [(s, s - shift, b) for s, b in zip(report.es_n0_grid, report.bler)])
    eb = [s - shift for s in report.es_n0_grid]
    classical = modem.classical_bler_curve(eb, a.eval_messages, derive_seed(cfg.seed, "ae-classical"))
    write_csv(out / "ae_vs_classical.csv", ["eb_n0_db", "bler_autoencoder", "bler_classical"],
              zip(eb, report.bler, classical))
    return 0


def _diversity_scenario(cfg, seed):
    a, d = cfg.atmosphere, cfg.diversity
    return diversity.DiversityScenario(
        separation_m=d.separation_m, es_n0_dB=d.es_n0_dB, path_top_m=a.path_top_m,
        zenith_deg=a.zenith_deg, wavelength_nm=a.wavelength_nm,
        profile=atmosphere.CnProfile(a.v, a.C0), frame_symbols=d.frame_symbols,
        n_pilots=d.n_pilots, seed=seed)


def cmd_diversity_sim(cfg, out, args):
    rows = []
    for i in range(cfg.diversity.n_trials):
        seed = derive_seed(cfg.seed, "diversity-sim", i)
        r = diversity.run_diversity_experiment(_diversity_scenario(cfg, seed))
        rows.append((seed, r.true_dphi, r.output.estimated_dphi, r.output.snr_single_dB,
                     r.output.snr_combined_dB, r.ber_single, r.ber_combined))
    write_csv(out / "diversity.csv", ["seed", "true_dphi", "est_dphi", "snr_single_db",
                                      "snr_combined_db", "ber_single", "ber_combined"], rows)
    return 0


def _wakeup_config(cfg):
    w = cfg.wakeup
    return wakeup.WakeupConfig(
        n_faces=w.n_faces, dwell_ms=w.dwell_ms, beacon_duration_s=w.beacon_duration_s,
        adc_rate_sps=w.adc_rate_sps, poll_rate_factor=w.poll_rate_factor,
        detection_threshold_dB=w.detection_threshold_dB,
        clock_recovery_ms=w.clock_recovery_ms, randomize_start=w.randomize_start)


def cmd_wakeup_sim(cfg, out, args):
    conf = _wakeup_config(cfg)
    if args.traces:
        faces = wakeup.read_traces(args.traces, conf)
    else:
        faces = wakeup.beacon_scenario(conf, beacon_face=min(2, conf.n_faces - 1), onset_ms=250)
    commands = wakeup.read_commands(args.commands) if args.commands else ()
    events = wakeup.run_session(conf, faces, cfg.wakeup.horizon_ms, commands, seed=cfg.seed)
    wakeup.write_events(out / "wakeup_events.csv", events)
    return 0


def cmd_report(cfg, out, args):
    down, up = _scenarios(cfg)
    rows = []
    text = []
    for name, rep, published in (("downlink", linkbudget.downlink_budget(down),
                                  linkbudget.PUBLISHED_DOWNLINK),
                                 ("uplink", linkbudget.uplink_budget(up),
                                  linkbudget.PUBLISHED_UPLINK)):
        computed = {term: value for term, value, _ in rep.rows()}
        computed["path_length_m"] = _path_length(cfg)
        table = [("path_length_m", linkbudget.PUBLISHED_PATH_LENGTH_M)] + list(published.items())
        text.append(f"{name:<10}{'term':<22}{'published':>14}{'computed':>14}{'delta':>12}")
        for term, pub in table:
            comp = computed[term]
            rows.append((name, term, pub, comp, comp - pub))
            text.append(f"{'':<10}{term:<22}{pub:>14.6g}{comp:>14.6g}{comp - pub:>12.4g}")
    write_csv(out / "report_linkbudget.csv",
              ["link", "term", "published", "computed", "delta"], rows)
    (out / "report.txt").write_text("\n".join(text) + "\n", encoding="utf-8")
    print("\n".join(text))
    return 0


HANDLERS = {
    "linkbudget": cmd_linkbudget,
    "atmosphere": cmd_atmosphere,
    "simulate-ber": cmd_simulate_ber,
    "train-autoencoder": cmd_train_autoencoder,
    "diversity-sim": cmd_diversity_sim,
    "wakeup-sim": cmd_wakeup_sim,
    "report": cmd_report,
}


def build_parser():
    p = _Parser(prog="lumilink", description="Small-satellite optical link simulator.")
    p.add_argument("--config", help="section.key = value file")
    p.add_argument("--out", help="output directory (default: $LUMILINK_OUT or .)")
    p.add_argument("--seed", type=int, help="master seed, overrides global.seed")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="subcommand", metavar="SUBCOMMAND", parser_class=_Parser)
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        if name == "wakeup-sim":
            sp.add_argument("--traces", help="CSV: time_ms,face_id,snr_db,beacon")
            sp.add_argument("--commands", help="CSV: time_ms,command,payload")
    return p


def _fail(code, kind, message):
    message = " ".join(str(message).split())
    print(f"lumilink: error: code={code} kind={kind} msg={message}", file=sys.stderr)
    return code


def dispatch(subcommand, cfg, output_dir, args=None):
    if subcommand not in HANDLERS:
        return _fail(1, "usage", f"unknown subcommand {subcommand!r}")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    args = args if args is not None else argparse.Namespace(traces=None, commands=None)
    try:
        return HANDLERS[subcommand](cfg, out, args)
    except (ConfigError, DomainError) as exc:
        return _fail(1, "validation", exc)
    except TrainingDivergedError as exc:
        return _fail(2, "divergence", exc)
    except Exception as exc:  # noqa: BLE001
        return _fail(2, "runtime", f"{type(exc).__name__}: {exc}")


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        return _fail(1, "usage", exc)
    if args.subcommand is None:
        parser.print_usage(sys.stderr)
        return _fail(1, "usage", "missing subcommand")
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        return _fail(1, "config", exc)
    if args.seed is not None:
        if args.seed < 0:
            return _fail(1, "validation", "seed must be non-negative")
        cfg.global_.seed = args.seed
    out = args.out or os.environ.get("LUMILINK_OUT") or "."
    return dispatch(args.subcommand, cfg, out, args)


if __name__ == "__main__":
    sys.exit(main())
