"""Dense-grid stand-ins for continuous-time signals: probe synthesis, the
delay-Doppler channel and in-band noise.

A DenseSignal is one period of a periodic, bandlimited signal sampled at
sim_rate. Probes live on a frame of whole pulse periods, from n_start*T to
(n_start + n_periods)*T, with guard periods on both sides of the pulse train.
Delays are applied as exact phase ramps on that frame.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import signal as sps

from ._dsp import angular_freqs, delay_response, fractional_delay
from .model import ProbeSpec, PulseSpec, SystemSpec

DEFAULT_OVERSAMPLING = 16
_HEADER_MAGIC = "ddident-dense v1"


@dataclass(frozen=True)
class DenseSignal:
    samples: np.ndarray
    sim_rate: float
    t0: float = 0.0
    probe: Optional[ProbeSpec] = None
    n_start: Optional[int] = None

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex).reshape(-1)
        if not np.all(np.isfinite(s)):
            raise ValueError("signal contains NaN or inf samples")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def dt(self):
        return 1.0 / self.sim_rate

    @property
    def times(self):
        return self.t0 + np.arange(len(self.samples)) * self.dt

    @property
    def energy(self):
        return float(np.sum(np.abs(self.samples) ** 2) * self.dt)

    def __len__(self):
        return len(self.samples)

    def replace(self, samples):
        return DenseSignal(samples, self.sim_rate, self.t0, self.probe, self.n_start)

    @property
    def n_periods(self):
        if self.probe is None:
            raise ValueError("signal carries no pulse-train framing")
        return len(self.samples) // (self.probe.oversampling * self.probe.p)

    def to_file(self, path):
        """Text header line followed by interleaved little-endian complex64 samples."""
        header = f"{_HEADER_MAGIC} sim_rate={self.sim_rate!r} t0={self.t0!r} count={len(self.samples)}\n"
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            fh.write(self.samples.astype("<c8").tobytes())

    @classmethod
    def from_file(cls, path):
        with open(path, "rb") as fh:
            header = fh.readline().decode("ascii").split()
            if " ".join(header[:2]) != _HEADER_MAGIC:
                raise ValueError(f"{path} is not a dense signal dump")
            meta = dict(kv.split("=", 1) for kv in header[2:])
            data = np.frombuffer(fh.read(), dtype="<c8")
        if len(data) != int(meta["count"]):
            raise ValueError("sample count does not match header")
        return cls(data.astype(complex), float(meta["sim_rate"]), float(meta["t0"]))


def design_flat_pulse(p, T, sim_rate, taps=257, atten_db=60.0, max_ripple_db=1.0) -> PulseSpec:
    """Kaiser-windowed sinc pulse with a flat response over [-pi p/T, pi p/T].

    The transition band runs from the band edge p/2T to twice that (or to
    Nyquist, whichever is lower); too few taps cannot resolve it, which shows
    up as in-band ripple. Raises ValueError if the ripple exceeds `max_ripple_db`.
    """
    if taps % 2 != 1:
        raise ValueError("taps must be odd")
    edge = p / (2 * T)
    nyq = sim_rate / 2
    if nyq <= edge:
        raise ValueError(f"sim_rate {sim_rate} cannot represent the band +-{edge} Hz")
    if taps == 1:
        return PulseSpec(np.array([math.sqrt(sim_rate)]), sim_rate, (-edge, edge), 0.0, 0.0)

    beta = sps.kaiser_beta(atten_db)
    stop = min(2 * edge, nyq)
    cutoff = (edge + stop) / 2
    h = sps.firwin(taps, cutoff, window=("kaiser", beta), fs=sim_rate).astype(complex)
    h *= 1 / math.sqrt(np.sum(np.abs(h) ** 2) / sim_rate)

    f, H = sps.freqz(h, worN=np.linspace(-edge, edge, 801), fs=sim_rate)
    mag_db = 20 * np.log10(np.abs(H))
    ripple = float(mag_db.max() - mag_db.min())
    _, Hs = sps.freqz(h, worN=np.linspace(stop, nyq, 801), fs=sim_rate)
    stop = float(mag_db.max() - 20 * np.log10(np.abs(Hs).max() + 1e-300))
    if ripple > max_ripple_db:
        raise ValueError(f"{taps} taps give {ripple:.3f} dB in-band ripple (limit {max_ripple_db} dB)")
    return PulseSpec(h, sim_rate, (-edge, edge), ripple, stop)


def default_guard(probe: ProbeSpec):
    """Guard periods covering the pulse tails plus a margin for the delay spread."""
    half = (len(probe.pulse.taps) - 1) / 2 * probe.pulse.dt
    return int(math.ceil(half / probe.T)) + 4


def _pulse_train(seqs, delays, probe: ProbeSpec, n_start, n_periods):
    """sum_i sum_n seqs[i][n] g(t - delays[i] - nT) on the frame, computed in the DFT domain."""
    spp = probe.oversampling * probe.p
    nd = n_periods * spp
    dt = probe.pulse.dt
    g = np.zeros(nd, dtype=complex)
    taps = probe.pulse.taps
    half = (len(taps) - 1) // 2
    if len(taps) > nd:
        raise ValueError("frame shorter than the pulse")
    g[:half + 1] = taps[half:]
    if half:
        g[-half:] = taps[:half]
    G = np.fft.fft(g)
    omega = angular_freqs(nd, dt)
    offset = (0 - n_start) * spp
    Y = np.zeros(nd, dtype=complex)
    for seq, tau in zip(seqs, delays):
        u = np.zeros(nd, dtype=complex)
        u[offset + np.arange(len(seq)) * spp] = seq
        U = np.fft.fft(u) * G
        if tau != 0:
            U = U * delay_response(omega, tau, nd)
        Y += U
    return np.fft.ifft(Y)


def synthesize_probe(probe: ProbeSpec, sim_rate=None, guard=None) -> DenseSignal:
    """x(t) = sum_n x_n g(t - nT) on a frame with `guard` empty periods on each side."""
    if sim_rate is not None and abs(sim_rate - probe.pulse.sim_rate) > 1e-6 * sim_rate:
        raise ValueError("sim_rate must match the pulse design rate")
    probe.oversampling  # validates the rate
    if guard is None:
        guard = default_guard(probe)
    n_start = -int(guard)
    n_periods = probe.N + 2 * int(guard)
    x = _pulse_train([probe.x_seq], [0.0], probe, n_start, n_periods)
    return DenseSignal(x, probe.pulse.sim_rate, n_start * probe.T, probe, n_start)


def narrowband_sequences(sys: SystemSpec, probe: ProbeSpec):
    """a_i[n] = sum_j alpha_ij x_n exp(j 2 pi nu_ij n T), one row per delay group."""
    n = np.arange(probe.N)
    rows = []
    for g in sys.groups:
        phase = np.exp(2j * np.pi * np.outer(n * probe.T, g.nus))
        rows.append(probe.x_seq * (phase @ g.alphas))
    return np.array(rows).reshape(len(rows), probe.N)


def apply_system(x: DenseSignal, sys: SystemSpec, mode="exact") -> DenseSignal:
    """Pass x through the delay-Doppler system.

    exact:      y(t) = sum alpha_ij x(t - tau_i) exp(j 2 pi nu_ij t)
    narrowband: y(t) = sum_i sum_n a_i[n] g(t - tau_i - nT), the per-pulse
                constant-phase approximation; needs a synthesized probe.
    """
    if mode == "exact":
        out = np.zeros(len(x), dtype=complex)
        t = x.times
        for g in sys.groups:
            shifted = fractional_delay(x.samples, g.tau, x.dt)
            if g.size == 1 and g.nus[0] == 0:
                out = out + g.alphas[0] * shifted
            else:
                mod = np.exp(2j * np.pi * np.outer(t, g.nus)) @ g.alphas
                out = out + shifted * mod
        return x.replace(out)
    if mode == "narrowband":
        if x.probe is None or x.n_start is None:
            raise ValueError("narrowband mode needs a signal produced by synthesize_probe")
        seqs = narrowband_sequences(sys, x.probe)
        y = _pulse_train(seqs, [g.tau for g in sys.groups], x.probe, x.n_start, x.n_periods)
        return x.replace(y)
    raise ValueError(f"unknown channel mode {mode!r}")


def band_mask(n, dt, band):
    f = np.fft.fftfreq(n, d=dt)
    lo, hi = band
    return (f >= lo) & (f < hi)


def inband_power(y: DenseSignal, band, window=None):
    """Mean power of y restricted to `band` (Hz), over the time window (seconds) if given."""
    mask = band_mask(len(y), y.dt, band)
    yb = np.fft.ifft(np.fft.fft(y.samples) * mask)
    if window is not None:
        t = y.times
        sel = (t >= window[0]) & (t < window[1])
        yb = yb[sel]
    return float(np.mean(np.abs(yb) ** 2))


def add_noise(y: DenseSignal, snr_db, band=None, seed=None, window=None) -> DenseSignal:
    """Add circular white Gaussian noise confined to `band` at the requested in-band SNR.

    Signal power is the in-band mean power over `window` (default: the probe's
    active span [0, NT) when the signal carries probe framing, else everything).
    snr_db = inf returns y unchanged.
    """
    if math.isinf(snr_db) and snr_db > 0:
        return y
    if band is None:
        if y.probe is None:
            raise ValueError("band is required for signals without probe framing")
        band = (-y.probe.bandwidth / 2, y.probe.bandwidth / 2)
    lo, hi = band
    if hi < lo:
        raise ValueError("noise band has negative width")
    if lo < -y.sim_rate / 2 or hi > y.sim_rate / 2:
        raise ValueError("noise band exceeds the Nyquist range")
    if window is None and y.probe is not None:
        window = (0.0, y.probe.duration)
    n = len(y)
    mask = band_mask(n, y.dt, band)
    nbins = int(mask.sum())
    if nbins == 0:
        return y
    p_sig = inband_power(y, band, window)
    p_noise = p_sig / 10 ** (snr_db / 10)
    rng = np.random.default_rng(seed)
    W = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2)
    noise = np.fft.ifft(W * mask) * math.sqrt(p_noise * n * n / nbins)
    return y.replace(y.samples + noise)
