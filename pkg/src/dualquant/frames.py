"""Parseval-tight Gabor (time-frequency) analysis and synthesis.

The analysis operator maps R^L to C^P with

    c[m, j] = sum_n x[n] * w[n - j*hop] * exp(-2i*pi*m*n / M),

where ``w`` is the tight window, ``M`` the number of channels and indices
are taken modulo L.  Construction is restricted to the painless case
(window length <= M, hop divides L, M divides L), where the frame operator
is diagonal and the canonical tight window is a pointwise normalization of
the prototype.  For a tight frame the synthesis operator below is both the
adjoint and the inverse of analysis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .signals import samples_of

__all__ = ["TfFrame", "make_tight_frame", "analyze", "synthesize", "hann_window"]

_TIGHT_TOL = 1e-10


def hann_window(length: int) -> np.ndarray:
    """Hann window sampled at half-integer offsets: sin^2(pi*(n+1/2)/N).

    This periodic variant is symmetric and strictly positive, so the
    painless-case diagonal normalization below is defined for every hop,
    including the non-overlapping (rectangular) limit.
    """
    if length < 1:
        raise ValueError("window length must be >= 1")
    n = np.arange(length)
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * (n + 0.5) / length)


@dataclass(frozen=True, eq=False)
class TfFrame:
    """Tight Gabor frame bound to a fixed signal length.

    Coefficients are stored flat in C-order of shape
    ``(num_channels, num_frames)``: index ``m * num_frames + j`` holds
    channel ``m`` at time shift ``j * hop``.
    """

    window: np.ndarray
    tight_window: np.ndarray
    hop: int
    num_channels: int
    signal_len: int
    num_frames: int = field(init=False, repr=False)
    _support: np.ndarray = field(init=False, repr=False)
    _twiddle: np.ndarray = field(init=False, repr=False)
    _twiddle_conj: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        window = np.asarray(self.window, dtype=np.float64)
        tight = np.asarray(self.tight_window, dtype=np.float64)
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "tight_window", tight)
        hop, m, length = self.hop, self.num_channels, self.signal_len
        if window.ndim != 1 or window.size == 0:
            raise ValueError("window must be a nonempty 1-D array")
        if tight.shape != window.shape:
            raise ValueError("tight_window must match the window length")
        w = window.size
        if hop < 1:
            raise ValueError("hop must be >= 1")
        if hop > w:
            raise ValueError(f"hop {hop} exceeds window length {w}: coverage gap")
        if w > m:
            raise ValueError(
                f"window length {w} exceeds channel count {m}: not painless"
            )
        if length % hop or length % m:
            raise ValueError(
                f"signal length {length} must be a multiple of hop {hop} "
                f"and of channel count {m}"
            )
        frames = length // hop
        object.__setattr__(self, "num_frames", frames)
        support = (np.arange(w)[None, :] + hop * np.arange(frames)[:, None]) % length
        object.__setattr__(self, "_support", support)
        # Diagonal Parseval condition: M * sum_j w[n - j*hop]^2 == 1 for all n.
        cover = np.zeros(length)
        np.add.at(cover, support.ravel(), np.tile(tight**2, frames))
        err = np.max(np.abs(m * cover - 1.0))
        if err > _TIGHT_TOL:
            raise ValueError(
                f"tight_window fails the Parseval diagonal condition (err={err:.2e})"
            )
        shift = (hop * np.arange(frames)) % m
        angle = (np.arange(m)[:, None] * shift[None, :]) % m
        twiddle = np.exp((-2j * np.pi / m) * angle)
        object.__setattr__(self, "_twiddle", twiddle)
        object.__setattr__(self, "_twiddle_conj", np.conj(twiddle))

    @property
    def num_coeffs(self) -> int:
        return self.num_channels * self.num_frames

    @property
    def coeff_shape(self) -> tuple[int, int]:
        return (self.num_channels, self.num_frames)


def make_tight_frame(
    window_len: int, hop: int, num_channels: int, signal_len: int
) -> TfFrame:
    """Build the canonical tight frame from a Hann prototype.

    The prototype is divided pointwise by the square root of the diagonal
    frame operator, which in the painless case is hop-periodic:

        w[n] = g[n] / sqrt(M * sum_j g[n - j*hop]^2)
    """
    g = hann_window(window_len)
    if hop < 1 or hop > window_len:
        raise ValueError(f"hop must lie in [1, window_len]; got {hop}")
    diag = np.zeros(hop)
    np.add.at(diag, np.arange(window_len) % hop, g**2)
    diag *= num_channels
    tight = g / np.sqrt(diag[np.arange(window_len) % hop])
    return TfFrame(g, tight, hop, num_channels, signal_len)


def analyze(frame: TfFrame, x) -> np.ndarray:
    """Tight-frame analysis coefficients of ``x`` (flat complex array)."""
    arr = samples_of(x)
    if arr.size != frame.signal_len:
        raise ValueError(
            f"signal length {arr.size} does not match frame length {frame.signal_len}"
        )
    segs = arr[frame._support] * frame.tight_window[None, :]
    spectra = np.fft.fft(segs, n=frame.num_channels, axis=1)
    return (spectra.T * frame._twiddle).ravel()


def synthesize(frame: TfFrame, coeffs) -> np.ndarray:
    """Adjoint of :func:`analyze`; inverse of it on tight frames."""
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.ndim != 1 or c.size != frame.num_coeffs:
        raise ValueError(
            f"expected {frame.num_coeffs} coefficients, got shape {c.shape}"
        )
    m, frames = frame.coeff_shape
    w = frame.window.size
    hop, length = frame.hop, frame.signal_len
    local = c.reshape(m, frames) * frame._twiddle_conj
    v = np.fft.ifft(local, axis=0)[:w].real
    contrib = (m * frame.tight_window)[:, None] * v
    out = np.zeros(length)
    if w % hop == 0:
        # Window support splits into whole hops; each hop-block of every
        # frame lands on a disjoint stripe of the output.
        out2d = out.reshape(frames, hop)
        rows = np.arange(frames)
        for q in range(w // hop):
            out2d[(rows + q) % frames] += contrib[q * hop : (q + 1) * hop].T
    else:
        np.add.at(out, frame._support.ravel(), contrib.T.ravel())
    return out
