"""Small FFT helpers shared by the waveform, sampler and recovery modules."""
import numpy as np
from scipy.signal import windows


def angular_freqs(n, dt):
    """Principal angular frequencies of an n-point DFT with spacing dt, in [-pi/dt, pi/dt)."""
    return 2 * np.pi * np.fft.fftfreq(n, d=dt)


def delay_response(omega, delay, n):
    """Frequency response of a pure delay on an n-point grid.

    The Nyquist bin of an even-length grid is shared by +pi/dt and -pi/dt, so it
    gets the symmetric value cos(pi * delay / dt) instead of a one-sided phase.
    """
    h = np.exp(-1j * omega * delay)
    if n % 2 == 0:
        nyq = n // 2
        h[nyq] = np.cos(omega[nyq] * delay)
    return h


def fractional_delay(x, delay, dt):
    """Circularly delay the bandlimited periodic signal x by `delay` seconds."""
    if delay == 0:
        return np.array(x, dtype=complex)
    n = x.shape[-1]
    h = delay_response(angular_freqs(n, dt), delay, n)
    return np.fft.ifft(np.fft.fft(x, axis=-1) * h, axis=-1)


def sequence_freqs(n, T):
    """DTFT bins of an n-periodic sequence at rate 1/T, covering [0, 2*pi/T)."""
    return 2 * np.pi * np.arange(n) / (n * T)


def taper(n):
    """Hann taper without zero end points, so all n taps stay in use."""
    if n == 1:
        return np.ones(1)
    return windows.hann(n + 2)[1:-1]


def truncated_idtft(response, taps, T, grid=None):
    """Centered, Hann-tapered FIR approximation of an IDTFT.

    `response` maps angular frequencies on [0, 2*pi/T) to the desired DTFT.
    Returns `taps` coefficients h[-(taps-1)/2 .. (taps-1)/2].
    """
    if taps % 2 != 1:
        raise ValueError(f"taps must be odd, got {taps}")
    if grid is None:
        grid = 8 * taps
    grid = max(int(grid), taps)
    h = np.fft.ifft(response(sequence_freqs(grid, T)))
    half = (taps - 1) // 2
    h = np.concatenate([h[grid - half:], h[:half + 1]])
    return h * taper(taps)


def filter_same(x, h):
    """Centered linear convolution of each row of x with the odd-length filter h."""
    x = np.atleast_2d(x)
    half = (len(h) - 1) // 2
    out = np.empty(x.shape, dtype=complex)
    for i, row in enumerate(x):
        out[i] = np.convolve(row, h)[half:half + x.shape[1]]
    return out


def apply_spectral(x, response, T, pad=0):
    """Per-bin filtering of sequences (rows of x) by a DTFT response on [0, 2*pi/T).

    With pad=0 the rows are treated as one period of a periodic sequence and the
    result is exact in that model. With pad>0 the rows are zero-extended by `pad`
    samples on each side first; the output then has length L + 2*pad.
    `response(omega)` may return shape (n,) or (rows, n).
    """
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    if pad:
        x = np.pad(x, ((0, 0), (pad, pad)))
    n = x.shape[1]
    X = np.fft.fft(x, axis=1)
    return np.fft.ifft(X * response(sequence_freqs(n, T)), axis=1)
