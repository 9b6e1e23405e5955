"""Scenario container, MSE metrics, seeded Monte-Carlo sweeps and the experiment studies."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import baseline
from .model import DelayGroup, ProbeSpec, SamplerSpec, SystemSpec
from .recovery import RecoveryError, RecoveryResult, identify
from .sampler import design_correction, make_kernel
from .waveform import (DEFAULT_OVERSAMPLING, add_noise, apply_system, default_guard,
                       design_flat_pulse, synthesize_probe)

SNR_GRID_DEFAULT = tuple(range(0, 80, 10))


@dataclass(frozen=True)
class Scenario:
    system: SystemSpec
    probe: ProbeSpec
    sampler: SamplerSpec = SamplerSpec()
    channel_mode: str = "narrowband"
    snr_grid: tuple = (math.inf,)
    trials: int = 100
    seed: int = 0
    doppler_method: str = "matrix_pencil"
    strict: bool = True
    guard: Optional[int] = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.channel_mode not in ("exact", "narrowband"):
            raise ValueError(f"unknown channel mode {self.channel_mode!r}")
        object.__setattr__(self, "snr_grid", tuple(float(s) for s in self.snr_grid))

    def with_(self, **kw):
        return replace(self, **kw)

    def frame_guard(self):
        """Guard periods so that trimmed FIR outputs and finite captures stay inside the frame."""
        if self.guard is not None:
            return self.guard
        g = default_guard(self.probe)
        taps = self.sampler.correction_taps
        if taps:
            g += 2 * (taps - 1) // 2 + 4
        if self.sampler.capture_count:
            length = self.sampler.capture_count // self.probe.p
            g = max(g, (length - self.probe.N) // 2 + default_guard(self.probe) + 8)
        return g


class MSE(NamedTuple):
    e2_delay: float
    e2_doppler: float
    mismatched: bool = False


@dataclass(frozen=True)
class TrialRecord:
    snr_db: float
    trial: int
    e2_delay: float
    e2_doppler: float
    failed: bool
    message: str = ""


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    e2_delay: float
    e2_doppler: float
    failures: int


@dataclass
class SweepReport:
    rows: list
    records: list = field(default_factory=list)

    def to_csv(self, path=None, extra=None):
        """CSV with header snr_db,e2_delay,e2_doppler,failures. Returns the text."""
        lines = ["snr_db,e2_delay,e2_doppler,failures"]
        for r in self.rows:
            lines.append(f"{_fmt(r.snr_db)},{_fmt(r.e2_delay)},{_fmt(r.e2_doppler)},{r.failures}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows], dtype=float)


def _fmt(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def _match(a, b):
    cost = np.abs(np.subtract.outer(np.asarray(a, float), np.asarray(b, float)))
    return linear_sum_assignment(cost)


def mse_metrics(truth: SystemSpec, est: RecoveryResult) -> MSE:
    """Normalized squared errors with delays and in-group Dopplers paired by minimum-cost matching.

    e2_delay averages over the K_tau true delays, e2_doppler over the K true
    Doppler shifts. Unmatched truth entries are left out and flagged.
    """
    taus = truth.delays
    rows, cols = _match(taus, est.delays)
    mismatched = len(rows) < truth.k_tau
    e2_d = float(np.sum(((est.delays[cols] - taus[rows]) / truth.tau_max) ** 2) / truth.k_tau)
    tot = 0.0
    for r, c in zip(rows, cols):
        true_nus = truth.groups[r].nus
        est_nus = est.dopplers[c]
        if len(est_nus) != len(true_nus):
            mismatched = True
        if len(est_nus) == 0:
            continue
        rr, cc = _match(true_nus, est_nus)
        tot += float(np.sum(((est_nus[cc] - true_nus[rr]) / truth.nu_max) ** 2))
    return MSE(e2_d, tot / truth.K, mismatched)


def threads():
    env = os.environ.get("DDIDENT_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def trial_seed(seed, snr_index, trial):
    return np.random.SeedSequence([int(seed), int(snr_index), int(trial)])


class Prepared:
    """Noiseless frame plus the designed kernel and bank; shared read-only by trials."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        probe = sc.probe
        x = synthesize_probe(probe, guard=sc.frame_guard())
        self.clean = apply_system(x, sc.system, sc.channel_mode)
        self.kernel = make_kernel(sc.sampler.kernel_kind, probe.p, probe.T, probe.pulse.sim_rate)
        self.bank = design_correction(probe.pulse, self.kernel, sc.sampler, probe)
        self.truth = sc.system.sorted()

    def identify(self, y):
        sc = self.sc
        return identify(y, sc.probe, sc.sampler, self.truth.k_tau, self.truth.k_nu,
                        method=sc.doppler_method, strict=sc.strict, kernel=self.kernel, bank=self.bank)

    def trial(self, si, snr, k):
        rng = np.random.default_rng(trial_seed(self.sc.seed, si, k))
        y = add_noise(self.clean, snr, seed=rng)
        try:
            res = self.identify(y)
        except RecoveryError as e:
            return TrialRecord(snr, k, math.nan, math.nan, True, str(e))
        m = mse_metrics(self.truth, res)
        if res.failures:
            return TrialRecord(snr, k, m.e2_delay, m.e2_doppler, True, "; ".join(res.failures.values()))
        return TrialRecord(snr, k, m.e2_delay, m.e2_doppler, False)


def run_scenario(sc: Scenario, workers=None) -> SweepReport:
    """All (SNR, trial) pairs; per-trial seeds depend only on (seed, SNR index, trial)."""
    prep = Prepared(sc)
    jobs = [(si, snr, k) for si, snr in enumerate(sc.snr_grid) for k in range(sc.trials)]
    workers = threads() if workers is None else workers
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda j: prep.trial(*j), jobs))
    else:
        records = [prep.trial(*j) for j in jobs]
    rows = []
    for snr in sc.snr_grid:
        rec = [r for r in records if r.snr_db == snr]
        good = [r for r in rec if not r.failed]
        e2d = float(np.mean([r.e2_delay for r in good])) if good else math.nan
        e2n = float(np.mean([r.e2_doppler for r in good])) if good else math.nan
        rows.append(SweepRow(snr, e2d, e2n, len(rec) - len(good)))
    return SweepReport(rows, records)


def spearman_trend(report: SweepReport):
    """Spearman rank correlation of each mean MSE column with SNR."""
    from scipy.stats import spearmanr
    snr = report.column("snr_db")
    return (float(spearmanr(snr, report.column("e2_delay")).statistic),
            float(spearmanr(snr, report.column("e2_doppler")).statistic))


def trend_violations(values, factor=10.0):
    """Interior indices whose value is off by more than `factor` from the log-linear neighbor interpolation."""
    logv = np.log10(np.asarray(values, dtype=float))
    bad = []
    for i in range(1, len(logv) - 1):
        if abs(logv[i] - 0.5 * (logv[i - 1] + logv[i + 1])) > math.log10(factor):
            bad.append(i)
    return bad


# ---- scenario factories ----

def alternating_sequence(N, r):
    """+1/-1 blocks of length r: x_n = (-1)^floor(n / r)."""
    return (-1.0) ** (np.arange(N) // r)


def make_probe(T=10e-6, p=4, N=30, sequence="random_binary", r=1, seed=1, pulse_taps=257,
               oversampling=DEFAULT_OVERSAMPLING) -> ProbeSpec:
    sim_rate = oversampling * p / T
    pulse = design_flat_pulse(p, T, sim_rate, pulse_taps)
    if isinstance(sequence, str):
        if sequence == "random_binary":
            x = np.random.default_rng(seed).choice([-1.0, 1.0], N)
        elif sequence == "alternating":
            x = alternating_sequence(N, r)
        else:
            raise ValueError(f"unknown sequence kind {sequence!r}")
    else:
        x = np.asarray(sequence, dtype=complex)
    return ProbeSpec(pulse, x, T, p)


def _random_phases(rng, n):
    return np.exp(2j * np.pi * rng.random(n))


def reference_system(phase_seed=7) -> SystemSpec:
    """K = 6 pairs in two delay groups of three Dopplers, unit amplitudes and random phases."""
    rng = np.random.default_rng(phase_seed)
    return SystemSpec((
        DelayGroup(2.7e-6, [-3.1e3, 0.8e3, 4.2e3], _random_phases(rng, 3)),
        DelayGroup(6.4e-6, [-4.5e3, -1.2e3, 2.6e3], _random_phases(rng, 3)),
    ), tau_max=10e-6, nu_max=10e3)


def reference_scenario(**kw) -> Scenario:
    probe_kw = {k: kw.pop(k) for k in ("N", "p", "sequence", "r", "seed_probe") if k in kw}
    if "seed_probe" in probe_kw:
        probe_kw["seed"] = probe_kw.pop("seed_probe")
    system = kw.pop("system", None) or reference_system()
    return Scenario(system, make_probe(**probe_kw), **kw)


def mismatch_system(phase_seed=11) -> SystemSpec:
    """Four delays; the last one carries eight Doppler shifts."""
    rng = np.random.default_rng(phase_seed)
    return SystemSpec((
        DelayGroup(1.5e-6, [-2.5e3, 1.9e3], _random_phases(rng, 2)),
        DelayGroup(3.8e-6, [-0.7e3, 3.3e3], _random_phases(rng, 2)),
        DelayGroup(6.1e-6, [-4.1e3, 0.4e3], _random_phases(rng, 2)),
        DelayGroup(8.4e-6, np.linspace(-4.4e3, 4.6e3, 8), _random_phases(rng, 8)),
    ), tau_max=10e-6, nu_max=10e3)


def mismatch_scenario(p=8, N=8, **kw) -> Scenario:
    return Scenario(mismatch_system(), make_probe(p=p, N=N), **kw)


NINE_T_TOTAL = 0.48e-3
NINE_W = 1.2e6


def nine_target_system(phase_seed=3) -> SystemSpec:
    """Nine off-grid targets with pairs closer than 1/W in delay and 1/T_total in Doppler."""
    rng = np.random.default_rng(phase_seed)
    cell = 1 / NINE_T_TOTAL
    spec = [
        (1.30e-6, [-1.35, -0.60]),
        (1.90e-6, [-0.70]),
        (4.55e-6, [-1.70, 0.30, 0.75]),
        (7.20e-6, [1.40]),
        (7.75e-6, [1.60, -0.35]),
    ]
    groups = tuple(DelayGroup(t, np.array(m) * cell, _random_phases(rng, len(m))) for t, m in spec)
    return SystemSpec(groups, tau_max=10e-6, nu_max=10e3)


def nine_target_scenario(**kw) -> Scenario:
    return Scenario(nine_target_system(), make_probe(p=12, N=48, T=10e-6), **kw)


# ---- studies ----

def sweep_over(sc: Scenario, name, values, build, workers=None):
    """Run `build(sc, v)` for each v; returns (name, v, SweepRow) triples."""
    out = []
    for v in values:
        rep = run_scenario(build(sc, v), workers)
        out.extend((name, v, row) for row in rep.rows)
    return out


def taps_study(sc: Scenario, taps=(35, 49), workers=None):
    return sweep_over(sc, "taps", taps,
                      lambda s, t: s.with_(sampler=replace(s.sampler, correction_taps=int(t))), workers)


def samples_study(sc: Scenario, counts=(248, 500, 1000), workers=None):
    return sweep_over(sc, "capture_count", counts,
                      lambda s, c: s.with_(sampler=replace(s.sampler, capture_count=int(c))), workers)


def probe_study(sc: Scenario, periods=(1, 2, 4, 32), N=32, workers=None):
    def build(s, r):
        pr = s.probe
        probe = ProbeSpec(pr.pulse, alternating_sequence(N, int(r)), pr.T, pr.p)
        return s.with_(probe=probe)
    return sweep_over(sc, "r", periods, build, workers)


def study_csv(rows, path=None):
    name = rows[0][0] if rows else "value"
    lines = [f"{name},snr_db,e2_delay,e2_doppler,failures"]
    for _, v, r in rows:
        lines.append(f"{v},{_fmt(r.snr_db)},{_fmt(r.e2_delay)},{_fmt(r.e2_doppler)},{r.failures}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


@dataclass
class MFComparison:
    truth: list
    proposed: list
    mf_peaks: list
    proposed_cost: float
    mf_cost: float
    proposed_pairs: list
    mf_pairs: list
    mf_displaced: list
    surface: baseline.MFSurface = field(repr=False)

    def to_csv(self, path=None):
        lines = ["method,target,tau_true,nu_true,tau_est,nu_est,cost"]
        for method, est, pairs in (("proposed", self.proposed, self.proposed_pairs),
                                   ("matched_filter", self.mf_peaks, self.mf_pairs)):
            for ti, ei, c in pairs:
                t, e = self.truth[ti], est[ei]
                lines.append(f"{method},{ti},{t[0]!r},{t[1]!r},{e[0]!r},{e[1]!r},{c!r}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def mf_compare(sc: Scenario, tau_step=None, nu_step=None, nu_span=None) -> MFComparison:
    """Proposed pipeline vs. matched-filter peak picking on the same observation (first SNR of the grid)."""
    probe = sc.probe
    T_total = probe.duration
    W = probe.bandwidth
    tau_step = tau_step or 1 / (4 * W)
    nu_step = nu_step or 1 / (4 * T_total)
    nu_span = nu_span or sc.system.nu_max / 2
    prep = Prepared(sc)
    snr = sc.snr_grid[0]
    y = add_noise(prep.clean, snr, seed=np.random.default_rng(trial_seed(sc.seed, 0, 0)))
    res = prep.identify(y)
    truth = [(t.tau, t.nu) for t in prep.truth.triplets()]
    proposed = [(t, nu) for t, nu, _ in res.triplets()]

    x = synthesize_probe(probe, guard=sc.frame_guard())
    grid_tau = np.arange(0, sc.system.tau_max + tau_step / 2, tau_step)
    grid_nu = np.arange(-nu_span, nu_span + nu_step / 2, nu_step)
    surf = baseline.mf_surface(y, x, grid_tau, grid_nu)
    peaks = baseline.extract_peaks(surf, len(truth))

    tm, nm = sc.system.tau_max, sc.system.nu_max
    pc, pp = baseline.assignment_cost(proposed, truth, tm, nm)
    mc, mp = baseline.assignment_cost(peaks, truth, tm, nm)
    displaced = []
    for ti, ei, _ in mp:
        dt = abs(peaks[ei][0] - truth[ti][0])
        dn = abs(peaks[ei][1] - truth[ti][1])
        displaced.append(dt > 1 / (2 * W) or dn > 1 / (2 * T_total))
    return MFComparison(truth, proposed, peaks, pc, mc, pp, mp, displaced, surf)
