import json
import math
from pathlib import Path

import numpy as np
import pytest

from ddident.config import ConfigError, load_scenario, parse_quantity, scenario_from_dict
from ddident.harness import reference_system

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.mark.parametrize("text,value", [
    ("10us", 10e-6), ("2.7 µs", 2.7e-6), ("10kHz", 1e4), ("1.2MHz", 1.2e6), ("-3.1kHz", -3.1e3),
    ("0.48ms", 0.48e-3), ("30dB", 30.0), ("inf", math.inf), (5, 5.0), ("1e-6s", 1e-6), ("7ns", 7e-9),
])
def test_parse_quantity(text, value):
    assert parse_quantity(text) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("bad", ["10 parsecs", "abc", "", True, None, [1]])
def test_parse_quantity_rejects(bad):
    with pytest.raises(ConfigError):
        parse_quantity(bad, "probe.T")


def test_reference_config_matches_builtin():
    sc = load_scenario(CONFIGS / "reference.json")
    ref = reference_system()
    np.testing.assert_allclose(sc.system.delays, ref.delays)
    for a, b in zip(sc.system.groups, ref.groups):
        np.testing.assert_allclose(a.nus, b.nus)
        np.testing.assert_allclose(a.alphas, b.alphas)
    assert sc.snr_grid == tuple(float(s) for s in range(0, 80, 10)) and sc.trials == 100
    assert sc.probe.p == 4 and sc.probe.N == 30


def test_mismatch_config():
    sc = load_scenario(CONFIGS / "mismatch.json", seed=9)
    assert sc.system.k_nu == [2, 2, 2, 8] and sc.probe.N == 8 and sc.seed == 9


def test_explicit_alpha_and_sequence():
    sc = scenario_from_dict({
        "system": {"groups": [{"tau": "1us", "dopplers": [{"nu": 0, "alpha": [0, 2]}]}]},
        "probe": {"N": 4, "sequence": [1, [0, 1], -1, [0, -1]]},
        "experiment": {"snr_db": "inf", "channel_mode": "exact"},
    })
    assert sc.system.groups[0].alphas[0] == 2j
    np.testing.assert_allclose(sc.probe.x_seq, [1, 1j, -1, -1j])
    assert sc.snr_grid == (math.inf,) and sc.channel_mode == "exact"


@pytest.mark.parametrize("cfg,key", [
    ({}, "system.groups"),
    ({"system": {"groups": [{"dopplers": []}]}}, "system.groups[0].tau"),
    ({"system": {"groups": [{"tau": "1us", "dopplers": [{"nu": "fast"}]}]}}, "dopplers[0].nu"),
    ({"system": {"groups": [{"tau": "1us", "dopplers": [{"nu": 0, "alpha": "big"}]}]}}, "alpha"),
    ({"system": {"groups": [{"tau": "1us", "dopplers": [{"nu": 0}]}]}, "probe": {"sequence": "chirp"}},
     "probe.sequence"),
    ({"system": {"groups": [{"tau": "1us", "dopplers": [{"nu": 0}]}]}, "experiment": {"channel_mode": "x"}},
     "channel_mode"),
    ({"system": {"groups": [{"tau": "1us", "dopplers": [{"nu": 0}]}]}, "experiment": {"trials": 0}}, "trials"),
    ({"system": []}, "system"),
])
def test_errors_name_the_key(cfg, key):
    with pytest.raises(ConfigError, match=key.replace("[", r"\[").replace("]", r"\]")):
        scenario_from_dict(cfg)


def test_file_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"system": ')
    with pytest.raises(ConfigError, match="invalid JSON at line 1"):
        load_scenario(bad)
    with pytest.raises(ConfigError):
        load_scenario(tmp_path / "missing.json")


def test_roundtrip_through_json(tmp_path):
    cfg = json.loads((CONFIGS / "reference.json").read_text())
    cfg["experiment"]["trials"] = 3
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg))
    assert load_scenario(path).trials == 3
