import subprocess
import sys
from pathlib import Path

import pytest

from ddident.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_check(capsys):
    rc, out, _ = run(capsys, "check")
    assert rc == 0 and "Theorem 1: satisfied (𝒯𝒲 ≈ 240π ≥ 48π)" in out


def test_check_from_config(capsys):
    rc, out, _ = run(capsys, "check", "--config", str(CONFIGS / "reference.json"))
    assert rc == 0 and "Theorem 1: satisfied" in out


def test_run_prints_triplets(capsys, tmp_path):
    rc, out, _ = run(capsys, "run", "--out", str(tmp_path))
    lines = out.splitlines()
    assert rc == 0 and lines[0] == "tau,nu,re_alpha,im_alpha" and len(lines) == 7
    assert (tmp_path / "triplets.csv").read_text() == out
    assert (tmp_path / "result.json").exists()


def test_sweep_header(capsys):
    rc, out, _ = run(capsys, "sweep", "--trials", "2", "--snr", "20,inf")
    lines = out.splitlines()
    assert rc == 0 and lines[0] == "snr_db,e2_delay,e2_doppler,failures"
    assert [l.split(",")[0] for l in lines[1:]] == ["20.0", "inf"]


def test_sweep_deterministic(capsys):
    a = run(capsys, "sweep", "--trials", "3", "--snr", "10", "--seed", "5")[1]
    b = run(capsys, "sweep", "--trials", "3", "--snr", "10", "--seed", "5")[1]
    assert a == b


def test_leakage(capsys):
    rc, out, _ = run(capsys, "leakage")
    assert rc == 0 and out.splitlines()[0] == "l,m,tau,nu,abs,arg"


def test_mf_compare(capsys):
    rc, out, err = run(capsys, "mf-compare")
    assert rc == 0 and out.startswith("method,target") and "total cost" in err


def test_studies(capsys):
    rc, out, _ = run(capsys, "taps-study", "--trials", "2", "--snr", "60", "--taps", "35")
    assert rc == 0 and out.splitlines()[0].startswith("taps,snr_db")
    rc, out, _ = run(capsys, "probe-study", "--trials", "2", "--snr", "60", "--periods", "1,32")
    assert rc == 0 and len(out.splitlines()) == 3
    rc, out, _ = run(capsys, "samples-study", "--trials", "2", "--snr", "50", "--counts", "248")
    assert rc == 0 and out.splitlines()[1].startswith("248,")


def test_malformed_config(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    rc, _, err = run(capsys, "check", "--config", str(bad))
    assert rc == 2 and "config" in err and "line 1" in err


def test_stage_labeled_failure(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"system": {"groups": [{"tau": "1us", "dopplers": [{"nu": 0}]}]},'
                   ' "sampler": {"capture_count": 246}}')
    rc, _, err = run(capsys, "run", "--config", str(cfg))
    assert rc == 1 and "acquire" in err


def test_unknown_subcommand():
    with pytest.raises(SystemExit):
        main(["fly"])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ddident.cli", "check"], capture_output=True, text=True)
    assert proc.returncode == 0 and "satisfied" in proc.stdout
