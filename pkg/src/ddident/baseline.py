"""Comparison baselines: the ambiguity function and matched-filter surface, and the
quantized delay-Doppler grid whose leakage motivates off-grid recovery."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter
from scipy.optimize import linear_sum_assignment

from ._dsp import fractional_delay
from .model import SystemSpec
from .waveform import DenseSignal


@dataclass(frozen=True)
class MFSurface:
    grid_tau: np.ndarray
    grid_nu: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.grid_tau), len(self.grid_nu)):
            raise ValueError("surface values must be len(grid_tau) x len(grid_nu)")

    def csv_text(self):
        rows = [(float(t), float(nu), v) for i, t in enumerate(self.grid_tau)
                for (nu, v) in zip(self.grid_nu, self.values[i])]
        return _csv(["tau", "nu", "abs", "arg"],
                    [[repr(t), repr(nu), repr(float(abs(v))), repr(float(np.angle(v)))] for t, nu, v in rows])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.csv_text())


@dataclass(frozen=True)
class LeakageGrid:
    """alphas[l, m + M] is the coefficient of the cell (l / W, m / T_total), l = 0..L, m = -M..M."""

    L: int
    M: int
    alphas: np.ndarray
    W: float
    T_total: float

    @property
    def grid_tau(self):
        return np.arange(self.L + 1) / self.W

    @property
    def grid_nu(self):
        return np.arange(-self.M, self.M + 1) / self.T_total

    def csv_text(self):
        rows = []
        for l in range(self.L + 1):
            for k, m in enumerate(range(-self.M, self.M + 1)):
                v = self.alphas[l, k]
                rows.append([l, m, repr(l / self.W), repr(m / self.T_total),
                             repr(float(abs(v))), repr(float(np.angle(v)))])
        return _csv(["l", "m", "tau", "nu", "abs", "arg"], rows)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.csv_text())


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _correlate(y, x: DenseSignal, taus, nus):
    """sum_t y(t) x*(t - tau) exp(-j 2 pi nu t) dt over the (periodic) frame."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    nus = np.atleast_1d(np.asarray(nus, dtype=float))
    t = x.times
    prods = np.empty((len(taus), len(t)), dtype=complex)
    for i, tau in enumerate(taus):
        prods[i] = y * np.conj(fractional_delay(x.samples, tau, x.dt))
    return prods @ np.exp(-2j * np.pi * np.outer(t, nus)) * x.dt


def ambiguity(x: DenseSignal, tau, nu):
    """A(tau, nu) = integral x(t) x*(t - tau) exp(-j 2 pi nu t) dt; scalars give a complex scalar."""
    vals = _correlate(x.samples, x, tau, nu)
    if np.ndim(tau) == 0 and np.ndim(nu) == 0:
        return complex(vals[0, 0])
    return vals


def mf_surface(y: DenseSignal, x: DenseSignal, grid_tau, grid_nu) -> MFSurface:
    """chi(tau, nu) = integral y(t) x*(t - tau) exp(-j 2 pi nu t) dt on the grid."""
    if len(y) != len(x) or y.sim_rate != x.sim_rate or y.t0 != x.t0:
        raise ValueError("y and x must share the same dense frame")
    grid_tau = np.asarray(grid_tau, dtype=float)
    grid_nu = np.asarray(grid_nu, dtype=float)
    return MFSurface(grid_tau, grid_nu, _correlate(y.samples, x, grid_tau, grid_nu))


def extract_peaks(surface: MFSurface, K):
    """(tau, nu) of the K largest 3x3 local maxima of |chi|, strongest first."""
    if K < 1:
        raise ValueError("K must be at least 1")
    mag = np.abs(surface.values)
    local = maximum_filter(mag, size=3, mode="constant", cval=-np.inf)
    idx = np.argwhere((mag >= local) & (mag > 0))
    if len(idx) < K:
        raise ValueError(f"surface has {len(idx)} local maxima, fewer than K={K}")
    order = np.argsort(-mag[idx[:, 0], idx[:, 1]], kind="stable")[:K]
    return [(float(surface.grid_tau[i]), float(surface.grid_nu[k])) for i, k in idx[order]]


def quantized_leakage(sys: SystemSpec, W, T_total, T=None) -> LeakageGrid:
    """Coefficients of the system projected onto the (1/W, 1/T_total) delay-Doppler grid.

    alpha_lm = sum alpha_ij exp(j pi (m - T_total nu_ij)) sinc(m - T_total nu_ij) sinc(l - W tau_i).
    T is accepted for interface symmetry with the probe parameters and is not used.
    """
    L = int(math.ceil(W * sys.tau_max - 1e-12))
    M = int(math.ceil(T_total * sys.nu_max / 2 - 1e-12))
    l = np.arange(L + 1)
    m = np.arange(-M, M + 1)
    out = np.zeros((L + 1, 2 * M + 1), dtype=complex)
    for g in sys.groups:
        dl = np.sinc(l - W * g.tau)
        for nu, a in zip(g.nus, g.alphas):
            u = m - T_total * nu
            out += a * np.outer(dl, np.exp(1j * np.pi * u) * np.sinc(u))
    return LeakageGrid(L, M, out, float(W), float(T_total))


def assignment_cost(est, truth, tau_max, nu_max):
    """Minimum-cost matching of (tau, nu) estimates to truth.

    Pair cost is sqrt((dtau / tau_max)^2 + (dnu / nu_max)^2). Returns the total and
    a list of (truth index, estimate index, cost) for the matched pairs.
    """
    est = np.asarray(est, dtype=float).reshape(-1, 2)
    truth = np.asarray(truth, dtype=float).reshape(-1, 2)
    dt = (est[None, :, 0] - truth[:, None, 0]) / tau_max
    dn = (est[None, :, 1] - truth[:, None, 1]) / nu_max
    cost = np.hypot(dt, dn)
    rows, cols = linear_sum_assignment(cost)
    pairs = [(int(r), int(c), float(cost[r, c])) for r, c in zip(rows, cols)]
    return float(sum(p[2] for p in pairs)), pairs
