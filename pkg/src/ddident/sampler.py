"""Acquisition chain: LPF kernel, sampling at rate p/T, serial-to-parallel split
into p streams, and the three-stage digital correction W^-1 = Psi^-1 F Phi^-1.

Channel m (1-based) carries the analog band [2 pi m'/T, 2 pi (m'+1)/T) with
m' = m - p/2 - 1; stream DTFTs are taken over omega in [0, 2 pi/T), so
channels 1..p tile F = [-pi p/T, pi p/T) exactly.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import signal as sps

from ._dsp import angular_freqs, apply_spectral, filter_same, sequence_freqs, truncated_idtft
from .model import KERNEL_KINDS, IdentifiabilityError, ProbeSpec, PulseSpec, SamplerSpec, SystemSpec
from .waveform import DenseSignal, narrowband_sequences

PSI_FLOOR = 1e-6


def channel_offsets(p):
    """m' = m - p/2 - 1 for m = 1..p."""
    return np.arange(1, p + 1) - p // 2 - 1


def vandermonde(delays, p, T, channels=None):
    """N(tau): rows m in `channels` (1-based), N_mi = exp(-j 2 pi m' tau_i / T)."""
    mp = channel_offsets(p)
    if channels is not None:
        mp = mp[np.asarray(channels) - 1]
    return np.exp(-2j * np.pi * np.outer(mp, np.asarray(delays, dtype=float)) / T)


@dataclass(frozen=True)
class Kernel:
    """Sampling kernel s*(-t): exact frequency response plus an FIR approximation at sim_rate."""

    kind: str
    p: int
    T: float
    sim_rate: float
    taps: np.ndarray

    def response(self, omega):
        """S(omega); zero outside the half-open band [-pi p/T, pi p/T)."""
        omega = np.asarray(omega, dtype=float)
        edge = math.pi * self.p / self.T
        tol = 1e-9 * edge  # FFT bin frequencies carry roundoff at the band edges
        inside = (omega >= -edge - tol) & (omega < edge - tol)
        if self.kind == "ideal_lowpass":
            s = np.full(omega.shape, self.p / self.T)
        else:
            s = self.p / (2 * self.T) * (1 + np.cos(self.T * omega / self.p))
        return np.where(inside, s, 0.0)

    def impulse(self, t):
        """s(t) = (1/2pi) integral of S(omega) exp(j omega t) over the band."""
        u = self.p * np.asarray(t, dtype=float) / self.T
        scale = (self.p / self.T) ** 2
        if self.kind == "ideal_lowpass":
            return scale * np.sinc(u)
        return 0.5 * scale * (np.sinc(u) + 0.5 * np.sinc(u + 1) + 0.5 * np.sinc(u - 1))


def make_kernel(kind, p, T, sim_rate, taps=1025) -> Kernel:
    """Kernel of the given kind with a `taps`-long FIR version sampled at sim_rate.

    The ideal lowpass is a Kaiser-windowed sinc with cutoff pi p/T; the raised
    cosine decays as 1/t^3 and is used untapered.
    """
    if kind not in KERNEL_KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}")
    if taps % 2 != 1:
        raise ValueError("taps must be odd")
    half = (taps - 1) // 2
    t = (np.arange(taps) - half) / sim_rate
    k = Kernel(kind, p, T, sim_rate, np.zeros(0))
    h = k.impulse(t).astype(complex)
    if kind == "ideal_lowpass" and taps > 1:
        h *= sps.windows.kaiser(taps, 8.0)
    h.setflags(write=False)
    return Kernel(kind, p, T, sim_rate, h)


@dataclass(frozen=True)
class ChannelBank:
    """p streams at rate 1/T. Column j holds absolute pulse index n0 + j.

    periodic=True means the streams are one period of periodic sequences (the
    whole simulated frame was captured); otherwise samples outside are unknown.
    """

    streams: np.ndarray
    T: float
    p: int
    kind: str = "raw_c"
    n0: int = 0
    periodic: bool = False
    active: Optional[tuple] = None

    def __post_init__(self):
        s = np.array(self.streams, dtype=complex)
        if s.ndim != 2 or s.shape[0] != self.p:
            raise ValueError(f"expected {self.p} equal-length streams, got shape {s.shape}")
        s.setflags(write=False)
        object.__setattr__(self, "streams", s)
        if self.active is None:
            object.__setattr__(self, "active", tuple(range(1, self.p + 1)))

    @property
    def length(self):
        return self.streams.shape[1]

    @property
    def indices(self):
        return self.n0 + np.arange(self.length)

    def active_streams(self):
        return self.streams[np.asarray(self.active) - 1]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "channel", "re", "im"])
            for ch in range(self.p):
                for n, v in zip(self.indices, self.streams[ch]):
                    w.writerow([int(n), ch + 1, repr(float(v.real)), repr(float(v.imag))])


@dataclass(frozen=True)
class CorrectionBank:
    """Designed correction stages. taps=None means per-bin (untruncated) correction."""

    p: int
    T: float
    active: tuple
    taps: Optional[int]
    phi_filters: Optional[np.ndarray]
    psi_filters: Optional[np.ndarray]
    pulse: PulseSpec = field(repr=False)
    kernel: Kernel = field(repr=False)
    trim: bool = True

    @property
    def dft_size(self):
        return self.p

    def phi_inverse(self, omega):
        """Phi^-1_ll(omega) = (-1)^(l-1) / sqrt(p) exp(-j omega (l-1) T / p), shape (p, len(omega))."""
        l = np.arange(self.p)
        sign = (-1.0) ** l
        return sign[:, None] / math.sqrt(self.p) * np.exp(-1j * np.outer(l, omega) * self.T / self.p)

    def psi(self, omega):
        """Psi_mm(omega) = S*(w) G(w) / T at w = omega + 2 pi m'/T, shape (p, len(omega))."""
        omega = np.asarray(omega, dtype=float)
        w = omega[None, :] + 2 * np.pi * channel_offsets(self.p)[:, None] / self.T
        shape = w.shape
        w = w.reshape(-1)
        val = np.conj(self.kernel.response(w)) * self.pulse.response(w) / self.T
        return val.reshape(shape)

    def psi_inverse(self, omega):
        psi = self.psi(omega)
        out = np.zeros_like(psi)
        idx = np.asarray(self.active) - 1
        out[idx] = 1 / psi[idx]
        return out

    def to_csv(self, path):
        if self.taps is None:
            raise ValueError("untruncated correction has no taps to export")
        half = (self.taps - 1) // 2
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["filter", "channel", "k", "re", "im"])
            for name, bank in (("phi", self.phi_filters), ("psi", self.psi_filters)):
                for ch, h in enumerate(bank):
                    for k, v in enumerate(h):
                        w.writerow([name, ch + 1, k - half, repr(float(v.real)), repr(float(v.imag))])


def _frame_start(y: DenseSignal, probe: ProbeSpec):
    if y.n_start is not None:
        return y.n_start
    n = y.t0 / probe.T
    if abs(n - round(n)) > 1e-6:
        raise ValueError("signal frame must start on a multiple of T")
    return int(round(n))


def capture_window(probe: ProbeSpec, capture_count):
    """(first absolute index, samples per stream) of a capture centered on the pulse train."""
    if capture_count % probe.p:
        raise ValueError(f"capture_count {capture_count} not divisible by p={probe.p}")
    length = capture_count // probe.p
    return int(math.floor((probe.N - length) / 2)), length


def acquire(y: DenseSignal, kernel: Kernel, spec: SamplerSpec, probe: ProbeSpec, method="spectral") -> ChannelBank:
    """c_l[n] = <y(t), s(t - nT - (l-1)T/p)> for every channel l and pulse index n.

    method="spectral" filters with the exact S*(omega) on the periodic frame
    (equivalent to the Riemann sum against the periodized kernel);
    method="fir" takes Riemann sums against the kernel's FIR taps.
    """
    p = probe.p
    q = probe.oversampling
    spp = q * p
    if abs(y.sim_rate - probe.pulse.sim_rate) > 1e-6 * y.sim_rate:
        raise ValueError("signal rate differs from the probe's simulation rate")
    if len(y) % spp:
        raise ValueError("signal frame must hold a whole number of pulse periods")
    n_start = _frame_start(y, probe)
    n_periods = len(y) // spp
    if method == "spectral":
        S = kernel.response(angular_freqs(len(y), y.dt))
        z = np.fft.ifft(np.fft.fft(y.samples) * np.conj(S))
    elif method == "fir":
        z = sps.fftconvolve(y.samples, np.conj(kernel.taps[::-1]), mode="same") * y.dt
    else:
        raise ValueError(f"unknown acquisition method {method!r}")
    c = z.reshape(n_periods, spp)[:, ::q].T
    periodic = method == "spectral"
    if spec.capture_count is None:
        return ChannelBank(c, probe.T, p, "raw_c", n_start, periodic)
    first, length = capture_window(probe, spec.capture_count)
    lo = first - n_start
    if lo < 0 or lo + length > n_periods:
        raise ValueError("capture window extends beyond the simulated frame")
    return ChannelBank(c[:, lo:lo + length], probe.T, p, "raw_c", first, False)


def design_correction(pulse: PulseSpec, kernel: Kernel, spec: SamplerSpec, probe: ProbeSpec) -> CorrectionBank:
    """Design phi_l and psi_m; checks |Psi_mm| against a floor on every active channel."""
    p, T = probe.p, probe.T
    if p % 2:
        raise IdentifiabilityError("p must be even")
    active = spec.channels(p)
    taps = spec.correction_taps
    bank = CorrectionBank(p, T, active, taps, None, None, pulse, kernel, spec.trim)
    grid = max(64 * p, 8 * (taps or 1))
    omega = sequence_freqs(grid, T)
    mag = np.abs(bank.psi(omega))
    peak = mag[np.asarray(active) - 1].max()
    for m in active:
        if mag[m - 1].min() < PSI_FLOOR * peak:
            raise IdentifiabilityError(
                f"channel {m}: |Psi_mm| falls to {mag[m - 1].min() / peak:.3g} of its peak; "
                "the sampling kernel or pulse is not bounded away from zero on its band")
    if taps is None:
        return bank
    phi = np.array([truncated_idtft(lambda w, l=l: bank.phi_inverse(w)[l], taps, T, grid) for l in range(p)])
    psi = np.zeros((p, taps), dtype=complex)
    for m in active:
        psi[m - 1] = truncated_idtft(lambda w, m=m: 1 / bank.psi(w)[m - 1], taps, T, grid)
    phi.setflags(write=False)
    psi.setflags(write=False)
    return CorrectionBank(p, T, active, taps, phi, psi, pulse, kernel, spec.trim)


def correct(c: ChannelBank, bank: CorrectionBank, pad_factor=3) -> ChannelBank:
    """d = Psi^-1 F Phi^-1 c, stage by stage.

    Untruncated banks filter per DFT bin; non-periodic input is zero-extended by
    pad_factor * L on each side first. FIR banks filter in time, and with
    trim=True drop (taps-1)/2 edge samples at each end after each filtering stage.
    """
    if c.kind != "raw_c":
        raise ValueError("correct expects raw (kind='raw_c') samples")
    if c.p != bank.p:
        raise ValueError(f"bank designed for p={bank.p}, samples have p={c.p}")
    p = c.p
    if bank.taps is None:
        pad = 0 if c.periodic else pad_factor * c.length
        x = np.pad(c.streams, ((0, 0), (pad, pad)))
        n = x.shape[1]
        omega = sequence_freqs(n, c.T)
        X = np.fft.fft(x, axis=1) * bank.phi_inverse(omega)
        X = np.fft.fft(X, axis=0) / math.sqrt(p)
        X = X * bank.psi_inverse(omega)
        d = np.fft.ifft(X, axis=1)
        return ChannelBank(d, c.T, p, "corrected_d", c.n0 - pad, c.periodic, bank.active)

    half = (bank.taps - 1) // 2
    cut = half if bank.trim else 0
    u = np.array([filter_same(c.streams[l], bank.phi_filters[l])[0] for l in range(p)])
    u = u[:, cut:u.shape[1] - cut]
    v = np.fft.fft(u, axis=0) / math.sqrt(p)
    d = np.zeros_like(v)
    for m in bank.active:
        d[m - 1] = filter_same(v[m - 1], bank.psi_filters[m - 1])[0]
    d = d[:, cut:d.shape[1] - cut]
    if d.shape[1] < 1:
        raise ValueError("correction filters longer than the captured streams")
    return ChannelBank(d, c.T, p, "corrected_d", c.n0 + 2 * cut, False, bank.active)


def delayed_sequences(a_seqs, delays, T, n0, length):
    """b_i[n]: a_i (given on n = 0..N-1) delayed by tau_i over the band [0, 2 pi/T), on a periodic frame."""
    a_seqs = np.atleast_2d(np.asarray(a_seqs, dtype=complex))
    n_len = a_seqs.shape[1]
    if n0 > 0 or n0 + length < n_len:
        raise ValueError("frame must contain the indices 0..N-1")
    frame = np.zeros((a_seqs.shape[0], length), dtype=complex)
    frame[:, -n0:-n0 + n_len] = a_seqs
    delays = np.asarray(delays, dtype=float)
    return apply_spectral(frame, lambda w: np.exp(-1j * np.outer(delays, w)), T)


def forward_oracle(sys: SystemSpec, probe: ProbeSpec, a_seqs=None, n0=0, length=None, active=None) -> ChannelBank:
    """d[n] = N(tau) b[n] computed directly in the DTFT domain, bypassing the analog chain."""
    if a_seqs is None:
        a_seqs = narrowband_sequences(sys, probe)
    a_seqs = np.atleast_2d(a_seqs)
    if length is None:
        length = 8 * a_seqs.shape[1]
    b = delayed_sequences(a_seqs, sys.delays, probe.T, n0, length)
    d = vandermonde(sys.delays, probe.p, probe.T) @ b
    return ChannelBank(d, probe.T, probe.p, "corrected_d", n0, True, active)
