"""Domain types for delay-Doppler systems and pulse-train probes, plus the
identifiability checks on a (system, probe) pair.

Time-bandwidth products are reported in angular units: the probe spans
NT seconds and its pulse covers the band [-pi p/T, pi p/T], so
TW = N T * 2 pi p / T = 2 pi N p.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

DELAY_TOL = 1e-12
KERNEL_KINDS = ("ideal_lowpass", "raised_cosine_rolloff1")


class IdentifiabilityError(ValueError):
    """A configuration for which the recovery procedure is not defined."""


def _frozen(a, dtype=complex):
    a = np.array(a, dtype=dtype).reshape(-1)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DelayDopplerTriplet:
    tau: float
    nu: float
    alpha: complex = 1.0


@dataclass(frozen=True)
class DelayGroup:
    """All Doppler shifts sharing one distinct delay."""

    tau: float
    nus: np.ndarray
    alphas: np.ndarray

    def __post_init__(self):
        nus = _frozen(self.nus, float)
        alphas = _frozen(self.alphas, complex)
        if len(nus) != len(alphas):
            raise ValueError("each Doppler shift needs exactly one attenuation")
        if len(nus) == 0:
            raise ValueError(f"delay group at tau={self.tau} has no Doppler shifts")
        if len(np.unique(nus)) != len(nus):
            raise ValueError(f"duplicate Doppler shifts in group tau={self.tau}")
        object.__setattr__(self, "tau", float(self.tau))
        object.__setattr__(self, "nus", nus)
        object.__setattr__(self, "alphas", alphas)

    @property
    def size(self):
        return len(self.nus)


@dataclass(frozen=True)
class SystemSpec:
    """A parametric underspread system: delay groups inside [0, tau_max] x [-nu_max/2, nu_max/2]."""

    groups: tuple
    tau_max: float
    nu_max: float

    def __post_init__(self):
        groups = tuple(self.groups)
        taus = np.array([g.tau for g in groups])
        if len(taus) > 1:
            gaps = np.abs(taus[:, None] - taus[None, :]) + np.eye(len(taus))
            if gaps.min() <= DELAY_TOL:
                raise ValueError("delays must be pairwise distinct")
        for g in groups:
            if not (0 <= g.tau <= self.tau_max):
                raise ValueError(f"delay {g.tau} outside [0, tau_max={self.tau_max}]")
            if np.any(np.abs(g.nus) > self.nu_max / 2 * (1 + 1e-12)):
                raise ValueError(f"Doppler shifts of group tau={g.tau} outside +-nu_max/2")
        object.__setattr__(self, "groups", groups)

    @classmethod
    def from_triplets(cls, triplets: Iterable[DelayDopplerTriplet], tau_max, nu_max):
        buckets: list[list[DelayDopplerTriplet]] = []
        for t in triplets:
            for b in buckets:
                if abs(b[0].tau - t.tau) <= DELAY_TOL:
                    b.append(t)
                    break
            else:
                buckets.append([t])
        groups = [DelayGroup(b[0].tau, [t.nu for t in b], [t.alpha for t in b]) for b in buckets]
        return cls(tuple(groups), tau_max, nu_max)

    def triplets(self):
        return [DelayDopplerTriplet(g.tau, float(nu), complex(a))
                for g in self.groups for nu, a in zip(g.nus, g.alphas)]

    def sorted(self):
        """Groups ordered by delay and Dopplers ascending within each group."""
        groups = []
        for g in sorted(self.groups, key=lambda g: g.tau):
            order = np.argsort(g.nus)
            groups.append(DelayGroup(g.tau, g.nus[order], g.alphas[order]))
        return SystemSpec(tuple(groups), self.tau_max, self.nu_max)

    @property
    def delays(self):
        return np.array([g.tau for g in self.groups])

    @property
    def k_tau(self):
        return len(self.groups)

    @property
    def k_nu(self):
        return [g.size for g in self.groups]

    @property
    def k_nu_max(self):
        return max(self.k_nu, default=0)

    @property
    def K(self):
        return sum(self.k_nu)


@dataclass(frozen=True)
class PulseSpec:
    """Prototype pulse g(t) as samples at sim_rate, centered on t = 0.

    Tap k sits at t = (k - (len(taps)-1)/2) / sim_rate; taps are samples of g(t),
    so the energy is sum |taps|^2 / sim_rate.
    """

    taps: np.ndarray
    sim_rate: float
    band_edges: tuple = (0.0, 0.0)
    ripple_db: float = 0.0
    stopband_db: float = math.inf

    def __post_init__(self):
        taps = _frozen(self.taps)
        if len(taps) % 2 != 1:
            raise ValueError("pulse must have an odd number of taps")
        object.__setattr__(self, "taps", taps)
        if abs(self.energy - 1) > 1e-9:
            raise ValueError(f"pulse energy must be 1, got {self.energy:.12g}")

    @property
    def dt(self):
        return 1.0 / self.sim_rate

    @property
    def energy(self):
        return float(np.sum(np.abs(self.taps) ** 2) * self.dt)

    @property
    def times(self):
        half = (len(self.taps) - 1) // 2
        return (np.arange(len(self.taps)) - half) * self.dt

    def response(self, omega):
        """Continuous-time Fourier transform G(omega) of the bandlimited pulse."""
        omega = np.asarray(omega, dtype=float)
        return self.dt * np.exp(-1j * np.multiply.outer(omega, self.times)) @ self.taps


@dataclass(frozen=True)
class ProbeSpec:
    """Pulse train x(t) = sum_n x_n g(t - nT), n = 0..N-1, sampled with p samples per period."""

    pulse: PulseSpec
    x_seq: np.ndarray
    T: float
    p: int

    def __post_init__(self):
        x = _frozen(self.x_seq)
        if len(x) == 0:
            raise ValueError("probing sequence must be non-empty")
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"p must be a positive integer, got {self.p}")
        if self.T <= 0:
            raise ValueError("pulse repetition interval must be positive")
        object.__setattr__(self, "x_seq", x)
        object.__setattr__(self, "p", int(self.p))

    @property
    def N(self):
        return len(self.x_seq)

    @property
    def duration(self):
        return self.N * self.T

    @property
    def bandwidth(self):
        """Two-sided bandwidth p/T in Hz."""
        return self.p / self.T

    @property
    def oversampling(self):
        q = self.pulse.sim_rate * self.T / self.p
        if abs(q - round(q)) > 1e-9:
            raise ValueError("sim_rate must be an integer multiple of p/T")
        return int(round(q))


@dataclass(frozen=True)
class SamplerSpec:
    """Acquisition and correction settings.

    correction_taps=None selects the untruncated (frequency-domain) correction;
    capture_count=None captures the whole simulated frame.
    """

    kernel_kind: str = "ideal_lowpass"
    correction_taps: Optional[int] = None
    active_channels: Optional[tuple] = None
    capture_count: Optional[int] = None
    trim: bool = True

    def __post_init__(self):
        if self.kernel_kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kernel_kind!r}")
        if self.correction_taps is not None and (self.correction_taps < 1 or self.correction_taps % 2 == 0):
            raise ValueError("correction_taps must be a positive odd integer")
        if self.capture_count is not None and self.capture_count < 1:
            raise ValueError("capture_count must be positive")
        if self.active_channels is not None:
            object.__setattr__(self, "active_channels", tuple(sorted(int(c) for c in self.active_channels)))

    def channels(self, p):
        """Active channel indices (1-based) for a p-channel sampler."""
        if self.active_channels is None:
            if self.kernel_kind == "raised_cosine_rolloff1":
                return tuple(range(2, p))
            return tuple(range(1, p + 1))
        if not set(self.active_channels) <= set(range(1, p + 1)):
            raise ValueError(f"active channels {self.active_channels} not within 1..{p}")
        return self.active_channels


@dataclass(frozen=True)
class IdentifiabilityReport:
    tw_product: float
    satisfies_thm1: bool
    satisfies_corollary: bool
    p_ok: bool
    n_ok: bool
    a2_ok: bool
    a3_ratio: float
    a3_ok: bool
    k_tau: int
    k_nu_max: int
    K: int
    x_nonzero: bool = True
    notes: tuple = field(default_factory=tuple)

    @property
    def thm1_bound(self):
        return 8 * math.pi * self.k_tau * self.k_nu_max

    @property
    def corollary_bound(self):
        return 2 * math.pi * (self.K + 1) ** 2

    def summary(self):
        def pis(v):
            return f"{v / math.pi:.4g}π"

        def verdict(ok):
            return "satisfied" if ok else "NOT satisfied"

        rel = "≥" if self.tw_product >= self.thm1_bound else "<"
        crel = "≥" if self.tw_product >= self.corollary_bound else "<"
        lines = [
            f"Theorem 1: {verdict(self.satisfies_thm1)} "
            f"(\U0001d4af\U0001d4b2 ≈ {pis(self.tw_product)} {rel} {pis(self.thm1_bound)})",
            f"Corollary 1: {verdict(self.satisfies_corollary)} "
            f"(\U0001d4af\U0001d4b2 ≈ {pis(self.tw_product)} {crel} {pis(self.corollary_bound)})",
            f"  p >= 2 K_tau: {self.p_ok}",
            f"  N >= 2 K_nu,max: {self.n_ok}",
            f"  max delay < T: {self.a2_ok}",
            f"  |x_n| > 0: {self.x_nonzero}",
            f"  nu_max T = {self.a3_ratio:.4g}" + ("" if self.a3_ok else "  (warning: not << 1)"),
        ]
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)


def check_identifiability(sys: SystemSpec, probe: ProbeSpec, a3_threshold=0.1) -> IdentifiabilityReport:
    """Evaluate the sufficient identification conditions for probing `sys` with `probe`."""
    if sys.k_tau == 0:
        raise IdentifiabilityError("system has no delay-Doppler pairs")
    if probe.p % 2:
        raise IdentifiabilityError(f"p must be even, got {probe.p}")
    x_nonzero = bool(np.all(np.abs(probe.x_seq) > 0))
    if not x_nonzero:
        raise IdentifiabilityError("probing sequence has zero-valued entries")
    tw = 2 * math.pi * probe.N * probe.p
    k_tau, k_nu_max = sys.k_tau, sys.k_nu_max
    p_ok = probe.p >= 2 * k_tau
    n_ok = probe.N >= 2 * k_nu_max
    a2_ok = bool(np.max(sys.delays) < probe.T)
    a3_ratio = sys.nu_max * probe.T
    notes = []
    if sys.tau_max >= probe.T:
        notes.append("declared tau_max >= T; A2 judged on the actual delays")
    thm1 = tw >= 8 * math.pi * k_tau * k_nu_max and p_ok and n_ok and a2_ok and x_nonzero
    cor = tw >= 2 * math.pi * (sys.K + 1) ** 2 and p_ok and n_ok and a2_ok and x_nonzero
    return IdentifiabilityReport(
        tw_product=tw,
        satisfies_thm1=bool(thm1),
        satisfies_corollary=bool(cor),
        p_ok=p_ok,
        n_ok=n_ok,
        a2_ok=a2_ok,
        a3_ratio=a3_ratio,
        a3_ok=a3_ratio < a3_threshold,
        k_tau=k_tau,
        k_nu_max=k_nu_max,
        K=sys.K,
        x_nonzero=x_nonzero,
        notes=tuple(notes),
    )


def integer_partitions(n):
    """All partitions of n as ascending lists (accelerated ascending composition)."""
    a = [0] * (n + 1)
    k = 1
    y = n - 1
    while k != 0:
        x = a[k - 1] + 1
        k -= 1
        while 2 * x <= y:
            a[k] = x
            y -= x
            k += 1
        l = k + 1
        while x <= y:
            a[k] = x
            a[l] = y
            yield a[:k + 2]
            x += 1
            y -= 1
        a[k] = x + y
        y = x + y - 1
        yield a[:k + 1]


def max_group_product(K):
    """Largest K_tau * K_nu,max over every way of splitting K pairs into delay groups."""
    best = 0
    for part in integer_partitions(K):
        best = max(best, len(part) * part[-1])
    return best


def partition_bound_check(K: int) -> bool:
    """True iff K_tau * K_nu,max <= (K+1)^2 / 4 for every partition of K."""
    if K < 1:
        raise ValueError("K must be >= 1")
    return 4 * max_group_product(K) <= (K + 1) ** 2
