"""JSON scenario files with explicit physical units.

Quantities may be numbers (SI base units) or strings with an SI suffix such
as "10us", "2.7 µs", "10kHz", "1.2MHz"; "inf" is accepted for SNR values.

Schema (all keys optional unless noted):

    {
      "system": {"tau_max": "10us", "nu_max": "10kHz", "phase_seed": 7,
                 "groups": [{"tau": "2.7us",                                 (required)
                             "dopplers": [{"nu": "-3.1kHz", "alpha": [1, 0]}]}]},
      "probe": {"T": "10us", "p": 4, "N": 30, "sequence": "random_binary",
                "r": 1, "seed": 1, "pulse_taps": 257, "oversampling": 16},
      "sampler": {"kernel": "ideal_lowpass", "correction_taps": null,
                  "active_channels": null, "capture_count": null},
      "experiment": {"channel_mode": "narrowband", "snr_db": ["inf"], "trials": 100,
                     "seed": 0, "doppler_method": "matrix_pencil"}
    }

"sequence" is "random_binary", "alternating" (period r) or an explicit list of
numbers / [re, im] pairs. A Doppler entry without "alpha" gets unit amplitude
and a random phase drawn from phase_seed.
"""
from __future__ import annotations

import json
import math
import re

import numpy as np

_UNITS = {
    "s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "μs": 1e-6, "ns": 1e-9,
    "hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "db": 1.0, "": 1.0,
}
_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([a-zA-Zµμ]*)\s*$")


class ConfigError(ValueError):
    """Malformed scenario file; the message names the offending key."""


def parse_quantity(value, what="quantity"):
    if isinstance(value, bool):
        raise ConfigError(f"{what}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{what}: expected a number or string, got {value!r}")
    text = value.strip().lower()
    if text in ("inf", "+inf", "infinity"):
        return math.inf
    m = _QTY.match(value)
    if not m or m.group(2).lower() not in _UNITS:
        raise ConfigError(f"{what}: cannot parse {value!r}")
    return float(m.group(1)) * _UNITS[m.group(2).lower()]


def _complex(value, what):
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    raise ConfigError(f"{what}: expected a number or [re, im], got {value!r}")


def _section(cfg, name):
    sec = cfg.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"{name}: expected an object")
    return sec


def scenario_from_dict(cfg, seed=None):
    """Build a harness Scenario from a parsed config; `seed` overrides experiment.seed."""
    from .harness import Scenario, make_probe
    from .model import DelayGroup, SamplerSpec, SystemSpec

    if not isinstance(cfg, dict):
        raise ConfigError("top level: expected an object")
    sys_cfg = _section(cfg, "system")
    pr = _section(cfg, "probe")
    sa = _section(cfg, "sampler")
    ex = _section(cfg, "experiment")

    rng = np.random.default_rng(int(sys_cfg.get("phase_seed", 0)))
    groups = []
    raw_groups = sys_cfg.get("groups")
    if not raw_groups:
        raise ConfigError("system.groups: at least one delay group is required")
    for gi, g in enumerate(raw_groups):
        if "tau" not in g:
            raise ConfigError(f"system.groups[{gi}].tau: missing")
        nus, alphas = [], []
        for di, dop in enumerate(g.get("dopplers", [])):
            where = f"system.groups[{gi}].dopplers[{di}]"
            nus.append(parse_quantity(dop.get("nu"), where + ".nu"))
            if "alpha" in dop:
                alphas.append(_complex(dop["alpha"], where + ".alpha"))
            else:
                alphas.append(np.exp(2j * np.pi * rng.random()))
        try:
            groups.append(DelayGroup(parse_quantity(g["tau"], f"system.groups[{gi}].tau"), nus, alphas))
        except ValueError as e:
            raise ConfigError(f"system.groups[{gi}]: {e}") from e
    try:
        system = SystemSpec(tuple(groups), parse_quantity(sys_cfg.get("tau_max", "10us"), "system.tau_max"),
                            parse_quantity(sys_cfg.get("nu_max", "10kHz"), "system.nu_max"))
    except ValueError as e:
        raise ConfigError(f"system: {e}") from e

    seq = pr.get("sequence", "random_binary")
    if isinstance(seq, list):
        seq = np.array([_complex(v, f"probe.sequence[{i}]") for i, v in enumerate(seq)])
    elif seq not in ("random_binary", "alternating"):
        raise ConfigError(f"probe.sequence: unknown kind {seq!r}")
    try:
        probe = make_probe(
            T=parse_quantity(pr.get("T", "10us"), "probe.T"),
            p=int(pr.get("p", 4)),
            N=int(pr.get("N", 30)),
            sequence=seq,
            r=int(pr.get("r", 1)),
            seed=int(pr.get("seed", 1)),
            pulse_taps=int(pr.get("pulse_taps", 257)),
            oversampling=int(pr.get("oversampling", 16)),
        )
        sampler = SamplerSpec(
            kernel_kind=sa.get("kernel", "ideal_lowpass"),
            correction_taps=sa.get("correction_taps"),
            active_channels=sa.get("active_channels"),
            capture_count=sa.get("capture_count"),
        )
    except ValueError as e:
        raise ConfigError(f"probe/sampler: {e}") from e

    snr = ex.get("snr_db", ["inf"])
    if not isinstance(snr, list):
        snr = [snr]
    snr_grid = tuple(parse_quantity(s, "experiment.snr_db") for s in snr)
    mode = ex.get("channel_mode", "narrowband")
    if mode not in ("exact", "narrowband"):
        raise ConfigError(f"experiment.channel_mode: unknown mode {mode!r}")
    trials = int(ex.get("trials", 100))
    if trials < 1:
        raise ConfigError("experiment.trials: must be >= 1")
    return Scenario(system, probe, sampler, mode, snr_grid, trials,
                    int(ex.get("seed", 0)) if seed is None else int(seed),
                    ex.get("doppler_method", "matrix_pencil"))


def load_scenario(path, seed=None):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    except OSError as e:
        raise ConfigError(f"{path}: {e.strerror}") from e
    return scenario_from_dict(cfg, seed)
