import csv
import os
import subprocess
import sys

import pytest

from lumilink import cli

FAST = """\
modem.snr_grid_db = 2, 6
modem.n_bits = 4000
autoencoder.steps = 40
autoencoder.log_every = 10
autoencoder.eval_grid_db = 0, 6
autoencoder.eval_messages = 800
diversity.n_trials = 3
diversity.frame_symbols = 256
atmosphere.n_panels = 256
atmosphere.profile_points = 31
wakeup.horizon_ms = 3000
"""

OUTPUTS = {
    "linkbudget": ["linkbudget_downlink.csv", "linkbudget_uplink.csv"],
    "atmosphere": ["cn2_profile.csv", "phase_variance.csv"],
    "simulate-ber": ["ber.csv"],
    "train-autoencoder": ["ae_train_loss.csv", "ae_bler.csv", "ae_vs_classical.csv", "ae_params.llae"],
    "diversity-sim": ["diversity.csv"],
    "wakeup-sim": ["wakeup_events.csv"],
    "report": ["report_linkbudget.csv", "report.txt"],
}


@pytest.fixture
def fast_cfg(tmp_path):
    p = tmp_path / "fast.cfg"
    p.write_text(FAST)
    return p


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_linkbudget_fspl(tmp_path):
    assert cli.main(["--out", str(tmp_path), "linkbudget"]) == 0
    table = {r[0]: float(r[1]) for r in rows(tmp_path / "linkbudget_downlink.csv")[1:]}
    assert table["fspl_db"] == pytest.approx(260.5, abs=0.1)


@pytest.mark.parametrize("sub", sorted(OUTPUTS))
def test_byte_identical_reruns(tmp_path, fast_cfg, sub):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.main(["--config", str(fast_cfg), "--out", str(out), "--seed", "7", sub]) == 0
    for name in OUTPUTS[sub]:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
        if name.endswith(".csv"):
            content = rows(a / name)
            assert len(content) >= 2 and all(content[0])


def test_seed_changes_stochastic_output(tmp_path, fast_cfg):
    for seed in ("1", "2"):
        assert cli.main(["--config", str(fast_cfg), "--out", str(tmp_path / seed),
                         "--seed", seed, "simulate-ber"]) == 0
    assert (tmp_path / "1" / "ber.csv").read_bytes() != (tmp_path / "2" / "ber.csv").read_bytes()


def test_number_formatting():
    assert cli.num(0.1 + 0.2) == "0.3"
    assert cli.num(1e-20) == "1e-20"
    assert cli.num(7) == "7"
    assert cli.num(True) == "1"


def test_unknown_subcommand_exit_1(capsys):
    assert cli.main(["frobnicate"]) == 1
    err = capsys.readouterr().err
    assert "usage:" in err
    assert err.strip().splitlines()[-1].startswith("lumilink: error: code=1 kind=usage")


def test_missing_subcommand_exit_1():
    assert cli.main([]) == 1


def test_dispatch_unknown(tmp_path):
    from lumilink.config import ScenarioConfig
    assert cli.dispatch("nope", ScenarioConfig(), tmp_path) == 1


def test_bad_config_exit_1(tmp_path, capsys):
    p = tmp_path / "bad.cfg"
    p.write_text("atmosphere.C0 = -1\n")
    assert cli.main(["--config", str(p), "--out", str(tmp_path), "atmosphere"]) == 1
    err = capsys.readouterr().err.strip()
    assert len(err.splitlines()) == 1
    assert "code=1" in err and "atmosphere.C0" in err and "line=1" in err


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_runtime_failure_exit_2(tmp_path, capsys):
    p = tmp_path / "diverge.cfg"
    p.write_text("autoencoder.learning_rate = 1e300\nautoencoder.steps = 20\n"
                 "autoencoder.eval_grid_db = 0\n")
    assert cli.main(["--config", str(p), "--out", str(tmp_path), "train-autoencoder"]) == 2
    assert "code=2" in capsys.readouterr().err


def test_bad_trace_file_exit_1(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("time_ms,face_id\n0,0\n")
    assert cli.main(["--out", str(tmp_path), "wakeup-sim", "--traces", str(p)]) == 1


def test_env_out_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("LUMILINK_OUT", str(tmp_path / "envout"))
    assert cli.main(["report"]) == 0
    assert (tmp_path / "envout" / "report_linkbudget.csv").exists()


def test_report_tables(tmp_path):
    assert cli.main(["--out", str(tmp_path), "report"]) == 0
    table = rows(tmp_path / "report_linkbudget.csv")
    assert table[0] == ["link", "term", "published", "computed", "delta"]
    links = {r[0] for r in table[1:]}
    assert links == {"downlink", "uplink"}
    for r in table[1:]:
        assert float(r[4]) == pytest.approx(float(r[3]) - float(r[2]), rel=1e-9, abs=1e-9)


def test_console_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "lumilink", "--out", str(tmp_path), "linkbudget"],
                         capture_output=True, text=True, env=dict(os.environ))
    assert out.returncode == 0
    assert "fspl_db" in out.stdout
