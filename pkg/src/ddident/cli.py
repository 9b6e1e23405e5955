"""Command-line driver for the experiments (`ddident <subcommand> ...`)."""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import harness
from .baseline import quantized_leakage
from .config import ConfigError, load_scenario, parse_quantity
from .model import IdentifiabilityError, check_identifiability
from .recovery import RecoveryError
from .waveform import add_noise


def _snr_list(text):
    return tuple(parse_quantity(s, "--snr") for s in text.split(","))


def _int_list(text):
    return tuple(int(s) for s in text.split(","))


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON scenario file (defaults to the built-in reference scenario)")
    common.add_argument("--out", help="output directory for CSV/JSON files")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--format", choices=["csv"], default="csv")
    common.add_argument("--trials", type=int, help="Monte-Carlo trials per SNR point")
    common.add_argument("--snr", type=_snr_list, help="comma-separated SNR grid in dB, 'inf' allowed")

    ap = argparse.ArgumentParser(prog="ddident", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="identifiability report")
    sub.add_parser("run", parents=[common], help="single identification, prints triplets")
    sub.add_parser("sweep", parents=[common], help="SNR Monte-Carlo sweep")
    sub.add_parser("mf-compare", parents=[common], help="proposed pipeline vs matched-filter peaks")
    sub.add_parser("leakage", parents=[common], help="quantized-grid leakage coefficients")
    p = sub.add_parser("taps-study", parents=[common], help="correction filter length sweep")
    p.add_argument("--taps", type=_int_list, default=(35, 49))
    p = sub.add_parser("samples-study", parents=[common], help="capture count sweep")
    p.add_argument("--counts", type=_int_list, default=(248, 500, 1000))
    p = sub.add_parser("probe-study", parents=[common], help="alternating probe sequence sweep")
    p.add_argument("--periods", type=_int_list, default=(1, 2, 4, 32))
    p.add_argument("--N", type=int, default=32)
    return ap


def _scenario(args, default):
    sc = load_scenario(args.config, args.seed) if args.config else default()
    if args.seed is not None:
        sc = sc.with_(seed=args.seed)
    if args.trials is not None:
        sc = sc.with_(trials=args.trials)
    if args.snr is not None:
        sc = sc.with_(snr_grid=args.snr)
    return sc


def _emit(args, name, text):
    sys.stdout.write(text)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, name), "w") as fh:
            fh.write(text)


def _check(args):
    sc = _scenario(args, harness.reference_scenario)
    print(check_identifiability(sc.system, sc.probe).summary())


def _run(args):
    sc = _scenario(args, harness.reference_scenario)
    prep = harness.Prepared(sc)
    rng = np.random.default_rng(harness.trial_seed(sc.seed, 0, 0))
    res = prep.identify(add_noise(prep.clean, sc.snr_grid[0], seed=rng))
    lines = ["tau,nu,re_alpha,im_alpha"]
    lines += [f"{t!r},{nu!r},{a.real!r},{a.imag!r}" for t, nu, a in res.triplets()]
    for g, msg in sorted(res.failures.items()):
        print(f"warning: {msg}", file=sys.stderr)
    _emit(args, "triplets.csv", "\n".join(lines) + "\n")
    if args.out:
        res.to_json(os.path.join(args.out, "result.json"))


def _sweep(args):
    sc = _scenario(args, lambda: harness.reference_scenario(snr_grid=harness.SNR_GRID_DEFAULT))
    _emit(args, "sweep.csv", harness.run_scenario(sc).to_csv())


def _mf_compare(args):
    sc = _scenario(args, harness.nine_target_scenario)
    cmp = harness.mf_compare(sc)
    _emit(args, "mf_compare.csv", cmp.to_csv())
    print(f"# total cost: proposed {cmp.proposed_cost:.6g}, matched filter {cmp.mf_cost:.6g}; "
          f"MF targets displaced: {sum(cmp.mf_displaced)}", file=sys.stderr)


def _leakage(args):
    sc = _scenario(args, harness.nine_target_scenario)
    grid = quantized_leakage(sc.system, sc.probe.bandwidth, sc.probe.duration, sc.probe.T)
    _emit(args, "leakage.csv", grid.csv_text())


def _study(kind):
    def run(args):
        if kind == "taps":
            sc = _scenario(args, lambda: harness.reference_scenario(snr_grid=(40, 50, 60, 70), trials=100))
            rows = harness.taps_study(sc, args.taps)
        elif kind == "samples":
            sc = _scenario(args, lambda: harness.reference_scenario(snr_grid=(40, 50, 60, 70), trials=100))
            rows = harness.samples_study(sc, args.counts)
        else:
            sc = _scenario(args, lambda: harness.reference_scenario(
                snr_grid=(40, 50, 60, 70), trials=100,
                sampler=harness.SamplerSpec(correction_taps=49)))
            rows = harness.probe_study(sc, args.periods, args.N)
        _emit(args, f"{kind}_study.csv", harness.study_csv(rows))
    return run


COMMANDS = {
    "check": _check,
    "run": _run,
    "sweep": _sweep,
    "mf-compare": _mf_compare,
    "leakage": _leakage,
    "taps-study": _study("taps"),
    "samples-study": _study("samples"),
    "probe-study": _study("probe"),
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"error: config: {e}", file=sys.stderr)
        return 2
    except RecoveryError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (IdentifiabilityError, ValueError) as e:
        print(f"error: {args.command}: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
