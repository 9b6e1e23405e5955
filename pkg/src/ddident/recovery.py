"""Two-step subspace recovery: delays by smoothed ESPRIT across channels, then
per-delay Dopplers from sums of complex exponentials and attenuations by least squares."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import sampler as _sampler
from ._dsp import apply_spectral, filter_same, truncated_idtft
from .model import IdentifiabilityError, ProbeSpec, SamplerSpec, SystemSpec
from .waveform import DenseSignal

DOPPLER_METHODS = ("matrix_pencil", "annihilating_filter", "esprit_temporal")
COND_LIMIT = 1e12
VANDERMONDE_COND_LIMIT = 1e8
WRAP_TOL = 1e-9


class InsufficientDOFError(IdentifiabilityError):
    """Fewer temporal samples than twice the number of Doppler shifts."""


class RecoveryError(RuntimeError):
    """A pipeline stage failed; `stage` names it and `__cause__` holds the original error."""

    def __init__(self, stage, message):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


@dataclass
class RecoveryResult:
    delays: np.ndarray
    dopplers: list
    alphas: list
    singular_values: np.ndarray
    residual: float
    eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    failures: dict = field(default_factory=dict)
    group_residuals: list = field(default_factory=list)

    @property
    def k_tau(self):
        return len(self.delays)

    @property
    def ok(self):
        return not self.failures

    @property
    def eigenvalue_moduli_error(self):
        """|lambda_i| - 1; zero for noiseless data."""
        return np.abs(self.eigenvalues) - 1

    def triplets(self):
        return [(float(t), float(nu), complex(a))
                for t, nus, als in zip(self.delays, self.dopplers, self.alphas)
                for nu, a in zip(nus, als)]

    def to_dict(self):
        return {
            "delays": [float(t) for t in self.delays],
            "dopplers": [[float(v) for v in g] for g in self.dopplers],
            "alphas": [[[float(a.real), float(a.imag)] for a in g] for g in self.alphas],
            "singular_values": [float(s) for s in self.singular_values],
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "residual": float(self.residual),
            "group_residuals": [None if r is None else float(r) for r in self.group_residuals],
            "failures": {str(k): v for k, v in self.failures.items()},
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["tau", "nu", "re_alpha", "im_alpha"])
            for t, nu, a in self.triplets():
                w.writerow([repr(t), repr(nu), repr(a.real), repr(a.imag)])


def _active_rows(d: _sampler.ChannelBank):
    act = np.asarray(d.active)
    if np.any(np.diff(act) != 1):
        raise ValueError("active channels must be contiguous for the shift-invariant structure")
    return d.streams[act - 1]


def smoothed_covariance(d: _sampler.ChannelBank):
    """Average of (M+1)x(M+1) subvector covariances over M channel offsets and all time indices.

    Uses the active channels only; with P of them, M = P // 2.
    """
    if d.kind != "corrected_d":
        raise ValueError("smoothed_covariance expects corrected (kind='corrected_d') streams")
    if d.p % 2 or d.p < 4:
        raise IdentifiabilityError(f"smoothing needs an even p >= 4, got {d.p}")
    x = _active_rows(d)
    m = x.shape[0] // 2
    if m < 1:
        raise IdentifiabilityError("fewer than two active channels")
    length = x.shape[1]
    R = np.zeros((m + 1, m + 1), dtype=complex)
    for k in range(m):
        sub = x[k:k + m + 1]
        R += sub @ sub.conj().T
    return R / (m * length)


def estimate_num_delays(R, rel_threshold=1e-6):
    s = np.linalg.svd(R, compute_uv=False)
    if s[0] == 0:
        return 0
    return int(np.sum(s >= rel_threshold * s[0]))


def esprit_eigenvalues(R, K_tau, strict=True):
    """Eigenvalues of Phi = pinv(Es_down) Es_up for the top-K_tau signal subspace of R."""
    size = R.shape[0]
    if K_tau < 1:
        raise ValueError("K_tau must be at least 1")
    if strict and K_tau > size - 1:
        raise IdentifiabilityError(
            f"K_tau={K_tau} exceeds the subarray shift capacity M={size - 1}; need more channels")
    U, _, _ = np.linalg.svd(R)
    Es = U[:, :K_tau]
    down, up = Es[:-1], Es[1:]
    if strict:
        cond = np.linalg.cond(down)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise IdentifiabilityError(f"reduced signal subspace is rank deficient (condition {cond:.3g})")
    return np.linalg.eigvals(np.linalg.pinv(down) @ up)


def _wrapped_delays(lam, T):
    tau = np.mod(-T * np.angle(lam) / (2 * np.pi), T)
    # roundoff can put a zero delay just below T, which would shift a_i by a whole period
    return np.where(T - tau <= WRAP_TOL * T, 0.0, tau)


def delays_from_eigenvalues(lam, T):
    return np.sort(_wrapped_delays(lam, T))


def esprit_delays(R, K_tau, T, strict=True):
    """Delays in [0, T) from lambda_i = exp(-j 2 pi tau_i / T), sorted ascending.

    strict=False skips the capacity and conditioning checks so that
    unidentifiable configurations still return (meaningless) estimates.
    """
    return delays_from_eigenvalues(esprit_eigenvalues(R, K_tau, strict), T)


def recover_a(d: _sampler.ChannelBank, delays, taps=None):
    """a_i[n] = e^{+j omega tau_i} applied to b[n] = pinv(N(tau)) d[n].

    Returns a K_tau x L array whose columns align with d.indices. taps=None
    applies the inverse delay per DFT bin (one period of a periodic sequence);
    otherwise with a Hann-tapered truncated filter of that length.
    """
    delays = np.asarray(delays, dtype=float)
    if len(delays) > len(d.active):
        raise IdentifiabilityError("more delays than active channels")
    N = _sampler.vandermonde(delays, d.p, d.T, d.active)
    cond = np.linalg.cond(N)
    if not np.isfinite(cond) or cond > VANDERMONDE_COND_LIMIT:
        raise IdentifiabilityError(f"delay Vandermonde matrix is ill-conditioned (condition {cond:.3g})")
    b = np.linalg.pinv(N) @ d.streams[np.asarray(d.active) - 1]
    if taps is None:
        return apply_spectral(b, lambda w: np.exp(1j * np.outer(delays, w)), d.T)
    out = np.empty_like(b)
    for i, tau in enumerate(delays):
        h = truncated_idtft(lambda w, tau=tau: np.exp(1j * w * tau), taps, d.T, max(64 * d.p, 8 * taps))
        out[i] = filter_same(b[i], h)[0]
    return out


def _hankel(x, P):
    """(N-P) x (P+1) Hankel matrix with entry [r, c] = x[r + c]."""
    n = len(x)
    idx = np.arange(n - P)[:, None] + np.arange(P + 1)[None, :]
    return x[idx]


def pencil_parameter(N, K):
    return int(min(max(N // 3, K), N - K))


def recover_dopplers(a, x_seq, K_nu, T, method="matrix_pencil"):
    """Doppler shifts in (-1/2T, 1/2T] of the K_nu exponentials in a[n] / x_n, sorted ascending."""
    a = np.asarray(a, dtype=complex)
    x_seq = np.asarray(x_seq, dtype=complex)
    if a.shape != x_seq.shape:
        raise ValueError("a and x_seq must have the same length")
    if np.any(x_seq == 0):
        raise IdentifiabilityError("probing sequence has zero-valued entries")
    N = len(a)
    if K_nu < 1:
        raise ValueError("K_nu must be at least 1")
    if N < 2 * K_nu:
        raise InsufficientDOFError(
            f"insufficient temporal degrees of freedom: N={N} < 2*K_nu={2 * K_nu}")
    at = a / x_seq
    if method == "matrix_pencil":
        Y = _hankel(at, pencil_parameter(N, K_nu))
        _, _, Vh = np.linalg.svd(Y)
        X = Vh[:K_nu].T
        z = np.linalg.eigvals(np.linalg.pinv(X[:-1]) @ X[1:])
    elif method == "esprit_temporal":
        Y = _hankel(at, pencil_parameter(N, K_nu))
        U, _, _ = np.linalg.svd(Y)
        X = U[:, :K_nu]
        z = np.linalg.eigvals(np.linalg.pinv(X[:-1]) @ X[1:])
    elif method == "annihilating_filter":
        # sum_{l=0}^{K} h[l] at[n-l] = 0 with h[0] = 1, for n = K..N-1
        rows = np.arange(K_nu, N)
        A = at[rows[:, None] - np.arange(1, K_nu + 1)[None, :]]
        h, *_ = np.linalg.lstsq(A, -at[rows], rcond=None)
        z = np.roots(np.concatenate([[1.0], h]))
    else:
        raise ValueError(f"unknown Doppler method {method!r}")
    return np.sort(np.angle(z) / (2 * np.pi * T))


def recover_attenuations(a_tilde, dopplers, T, return_residual=False):
    """Least-squares alpha for a_tilde[n] = sum_j alpha_j exp(j 2 pi nu_j n T)."""
    a_tilde = np.asarray(a_tilde, dtype=complex)
    dopplers = np.asarray(dopplers, dtype=float)
    n = np.arange(len(a_tilde))
    R = np.exp(2j * np.pi * np.outer(n * T, dopplers))
    if len(dopplers) > len(a_tilde) or np.linalg.matrix_rank(R) < len(dopplers):
        raise IdentifiabilityError("Doppler Vandermonde matrix is rank deficient (duplicate Dopplers?)")
    alpha, *_ = np.linalg.lstsq(R, a_tilde, rcond=None)
    if not return_residual:
        return alpha
    norm = np.linalg.norm(a_tilde)
    res = np.linalg.norm(a_tilde - R @ alpha) / norm if norm else 0.0
    return alpha, float(res)


def identify(y: DenseSignal, probe: ProbeSpec, spec: SamplerSpec, K_tau, K_nu_list,
             method="matrix_pencil", strict=True, acquire_method="spectral", kernel_taps=1025,
             kernel=None, bank=None):
    """Full pipeline: acquire, correct, smoothed ESPRIT, a-recovery, per-group Dopplers and attenuations.

    K_nu_list[i] is the number of Doppler shifts of the i-th smallest delay.
    Failures in Doppler recovery for one group are recorded in
    result.failures and do not stop the other groups. A prebuilt kernel and
    correction bank may be passed to skip their design in repeated runs.
    """
    K_nu_list = list(K_nu_list)
    if len(K_nu_list) != K_tau:
        raise ValueError("K_nu_list must have one entry per delay")

    def stage(name, fn, *args, **kw):
        try:
            return fn(*args, **kw)
        except (ValueError, np.linalg.LinAlgError) as e:
            raise RecoveryError(name, str(e)) from e

    if kernel is None:
        kernel = stage("kernel", _sampler.make_kernel, spec.kernel_kind, probe.p, probe.T,
                       probe.pulse.sim_rate, kernel_taps)
    c = stage("acquire", _sampler.acquire, y, kernel, spec, probe, acquire_method)
    if bank is None:
        bank = stage("correction design", _sampler.design_correction, probe.pulse, kernel, spec, probe)
    d = stage("correct", _sampler.correct, c, bank)
    R = stage("covariance", smoothed_covariance, d)
    sv = np.linalg.svd(R, compute_uv=False)
    lam = stage("delays", esprit_eigenvalues, R, K_tau, strict)
    tau = _wrapped_delays(lam, probe.T)
    order = np.argsort(tau, kind="stable")
    lam, delays = lam[order], tau[order]
    a_all = stage("a-recovery", recover_a, d, delays, spec.correction_taps)
    idx = d.indices
    lo = int(np.searchsorted(idx, 0))
    if lo + probe.N > len(idx) or idx[lo] != 0:
        raise RecoveryError("a-recovery", "corrected streams do not cover pulse indices 0..N-1")
    a_all = a_all[:, lo:lo + probe.N]

    dopplers, alphas, residuals, failures = [], [], [], {}
    for i, (a_i, k_nu) in enumerate(zip(a_all, K_nu_list)):
        try:
            nus = recover_dopplers(a_i, probe.x_seq, k_nu, probe.T, method)
            al, res = recover_attenuations(a_i / probe.x_seq, nus, probe.T, return_residual=True)
        except (ValueError, np.linalg.LinAlgError) as e:
            failures[i] = f"doppler[{i}]: {e}"
            nus, al, res = np.zeros(0), np.zeros(0, complex), None
        dopplers.append(nus)
        alphas.append(al)
        residuals.append(res)
    ok_res = [r for r in residuals if r is not None]
    return RecoveryResult(delays, dopplers, alphas, sv, float(np.mean(ok_res)) if ok_res else math.nan,
                          lam, failures, residuals)


def result_to_system(res: RecoveryResult, tau_max, nu_max) -> Optional[SystemSpec]:
    """Recovered triplets as a SystemSpec (failed groups omitted); None if nothing survived."""
    from .model import DelayGroup
    groups = [DelayGroup(t, nus, als) for t, nus, als in zip(res.delays, res.dopplers, res.alphas) if len(nus)]
    if not groups:
        return None
    return SystemSpec(tuple(groups), max(tau_max, float(np.max(res.delays))),
                      max(nu_max, 2 * max(float(np.max(np.abs(g.nus))) for g in groups)))
