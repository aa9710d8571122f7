"""Frequency-domain kernels.

Everything here works on plain 1-D arrays (real or complex); a
:class:`~dtmflab.keypad.SignalBuffer` is accepted wherever samples are
expected.  The analysis window is always rectangular.

Length convention shared by :func:`dft_uniform`, :func:`goertzel` and
:func:`goertzel_power`: the input is zero-padded to ``N`` when shorter and
truncated to its first ``N`` samples when longer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.signal import lfilter

from .errors import LengthError, SingularPointError
from .keypad import BANK_FREQS, DEFAULT_FS, SignalBuffer

BACKENDS = ("dtft", "goertzel", "sbndft")

# Rows of the direct DFT evaluated per block; bounds memory at ~CHUNK * M.
_DFT_CHUNK = 256


def _samples(x) -> np.ndarray:
    if isinstance(x, SignalBuffer):
        return x.samples
    arr = np.asarray(x)
    if not np.iscomplexobj(arr):
        arr = arr.astype(np.float64, copy=False)
    return arr.reshape(-1)


def _fit(x: np.ndarray, N: int) -> np.ndarray:
    if len(x) >= N:
        return x[:N]
    return np.concatenate([x, np.zeros(N - len(x), dtype=x.dtype)])


@dataclass(frozen=True, eq=False)
class SpectrumEstimate:
    """Transform values at a set of angular frequencies.

    ``kind`` is ``"complex"`` for complex amplitudes or ``"power"`` for squared
    magnitudes.  ``eval_freqs`` records the frequencies actually evaluated when
    a backend snaps to a grid (Goertzel bins); it defaults to ``freqs``.
    """

    freqs: np.ndarray
    values: np.ndarray
    kind: str
    backend: str
    n_dft: int
    fs: float = DEFAULT_FS
    eval_freqs: np.ndarray | None = None

    def __post_init__(self):
        if len(self.freqs) != len(self.values):
            raise LengthError("freqs and values must have equal length")
        if self.kind not in ("complex", "power"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.eval_freqs is None:
            object.__setattr__(self, "eval_freqs", self.freqs)

    def __len__(self):
        return len(self.freqs)

    @property
    def power(self) -> np.ndarray:
        if self.kind == "power":
            return np.asarray(self.values, dtype=np.float64)
        return np.abs(self.values) ** 2

    @property
    def magnitude(self) -> np.ndarray:
        if self.kind == "power":
            return np.sqrt(self.values)
        return np.abs(self.values)

    @property
    def freqs_hz(self) -> np.ndarray:
        return np.asarray(self.freqs) * self.fs / (2 * math.pi)


@dataclass(frozen=True, eq=False)
class SubbandPair:
    g_low: np.ndarray
    g_high: np.ndarray

    def __post_init__(self):
        if len(self.g_low) != len(self.g_high):
            raise LengthError(
                f"subband lengths differ: {len(self.g_low)} vs {len(self.g_high)}")


class BinPower(NamedTuple):
    power: float
    k: int
    omega: float


# ---------------------------------------------------------------------------
# Direct transforms

def dtft_at(x, w: float) -> complex:
    """``sum_n x[n] exp(-j w n)`` over the finite support of ``x``."""
    x = _samples(x)
    n = np.arange(len(x))
    return complex(np.dot(x, np.exp(-1j * w * n)))


def dft_uniform(x, N: int, fast: bool = False) -> SpectrumEstimate:
    """N-point DFT, i.e. the DTFT sampled at ``2 pi k / N``.

    The direct O(N*M) sum is the default.  ``fast=True`` switches to a
    radix-2 FFT when ``N`` is a power of two and silently falls back to the
    direct sum otherwise.
    """
    if N < 1:
        raise LengthError(f"N must be >= 1, got {N}")
    fs = x.fs if isinstance(x, SignalBuffer) else DEFAULT_FS
    x = _fit(_samples(x), N)
    if fast and N & (N - 1) == 0:
        values = _fft_radix2(x.astype(np.complex128))
    else:
        values = _dft_direct(x, N)
    freqs = 2 * math.pi * np.arange(N) / N
    return SpectrumEstimate(freqs, values, "complex", "dft", N, fs)


def _dft_direct(x: np.ndarray, N: int) -> np.ndarray:
    # Twiddle exponents reduced mod N as integers keep phases exact for large k*n.
    n = np.arange(N, dtype=np.int64)
    out = np.empty(N, dtype=np.complex128)
    for k0 in range(0, N, _DFT_CHUNK):
        k = np.arange(k0, min(k0 + _DFT_CHUNK, N), dtype=np.int64)
        phase = (np.outer(k, n) % N) * (-2 * math.pi / N)
        out[k0:k0 + len(k)] = np.exp(1j * phase) @ x
    return out


def _fft_radix2(x: np.ndarray) -> np.ndarray:
    N = len(x)
    if N == 1:
        return x.copy()
    even = _fft_radix2(x[0::2])
    odd = _fft_radix2(x[1::2]) * np.exp(-2j * math.pi * np.arange(N // 2) / N)
    return np.concatenate([even + odd, even - odd])


# ---------------------------------------------------------------------------
# Goertzel

def _resonate(x: np.ndarray, theta: float) -> tuple[complex, complex]:
    """Run ``s[n] = x[n] + 2cos(theta) s[n-1] - s[n-2]``; return ``(s[-1], s[-2])``."""
    if len(x) == 0:
        return 0.0, 0.0
    s = lfilter([1.0], [1.0, -2.0 * math.cos(theta), 1.0], x)
    return s[-1], (s[-2] if len(s) > 1 else 0.0)


def goertzel(x, k: int, N: int) -> complex:
    """DFT bin ``k`` of the N-point DFT via the two-pole Goertzel resonator.

    The final direct step ``exp(j 2 pi k/N) s[N-1] - s[N-2]`` makes the result
    equal to ``dft_uniform(x, N).values[k]`` (no extra phase rotation).
    """
    if not 0 <= k < N:
        raise ValueError(f"bin k={k} out of range for N={N}")
    theta = 2 * math.pi * k / N
    s1, s2 = _resonate(_fit(_samples(x), N), theta)
    return complex(np.exp(1j * theta) * s1 - s2)


def nearest_bin(w: float, N: int) -> int:
    """Nearest integer bin to ``w`` on the N-point grid, ties rounding up."""
    return int(math.floor(w * N / (2 * math.pi) + 0.5)) % N


def goertzel_power(x, w: float, N: int) -> BinPower:
    """Squared Goertzel magnitude at the bin nearest to ``w``."""
    if not 0 <= w <= math.pi:
        raise ValueError(f"w must lie in [0, pi], got {w}")
    k = nearest_bin(w, N)
    y = goertzel(x, k, N)
    return BinPower(abs(y) ** 2, k, 2 * math.pi * k / N)


# ---------------------------------------------------------------------------
# Subband NDFT

def subband_decompose(x) -> SubbandPair:
    x = _samples(x)
    if len(x) % 2:
        raise LengthError(f"subband split needs an even length, got {len(x)}")
    even, odd = x[0::2], x[1::2]
    return SubbandPair((even + odd) / 2, (even - odd) / 2)


def subband_reconstruct(pair: SubbandPair) -> np.ndarray:
    lo, hi = np.asarray(pair.g_low), np.asarray(pair.g_high)
    if len(lo) != len(hi):
        raise LengthError(f"subband lengths differ: {len(lo)} vs {len(hi)}")
    out = np.empty(2 * len(lo), dtype=np.result_type(lo, hi))
    out[0::2] = lo + hi
    out[1::2] = lo - hi
    return out


def ndft_point(x, z: complex) -> complex:
    """Z-transform of the finite sequence at an arbitrary point: ``sum x[n] z**-n``."""
    x = _samples(x)
    if len(x) == 0:
        return 0j
    if len(x) == 1:
        return complex(x[0])
    if z == 0:
        raise SingularPointError("z = 0 is a pole of z**-n for n >= 1")
    # Horner in z**-1, highest power first.
    return complex(np.polyval(x[::-1], 1.0 / z))


def sbndft_power(x, w: float, compensate: bool = True) -> float:
    """Approximate ``|X(e^{jw})|**2`` from the low subband alone.

    ``|G_L(e^{j2w})|**2`` is computed with the magnitude-only Goertzel
    recursion on the half-length low subband.  With ``compensate`` the result
    is ``8 |G_L|**2 / (1 + cos w)``; without it the uncompensated
    ``|(1 + e^{-jw}) G_L|**2 = 2 (1 + cos w) |G_L|**2`` is returned.
    """
    if not 0 <= w < math.pi:
        if w == math.pi:
            raise SingularPointError("compensation 1 + cos(w) vanishes at w = pi")
        raise ValueError(f"w must lie in [0, pi), got {w}")
    g_low = subband_decompose(x).g_low
    theta = 2 * w
    s1, s2 = _resonate(g_low, theta)
    gl_power = abs(s1 - np.exp(-1j * theta) * s2) ** 2
    c = 1 + math.cos(w)
    if compensate:
        return float(8 * gl_power / c)
    return float(2 * c * gl_power)


# ---------------------------------------------------------------------------
# Eight-tone bank

def dtmf_bank(x, backend: str = "goertzel", N: int = 2048,
              freqs_hz=BANK_FREQS, fs: float | None = None) -> SpectrumEstimate:
    """Squared magnitudes at the DTMF frequencies with the chosen backend.

    ``dtft`` and ``sbndft`` evaluate the exact tone frequencies over the first
    ``min(len(x), N)`` samples (``sbndft`` drops a trailing odd sample);
    ``goertzel`` snaps each tone to its nearest N-point bin.
    """
    if fs is None:
        fs = x.fs if isinstance(x, SignalBuffer) else DEFAULT_FS
    x = _samples(x)
    if len(x) == 0:
        raise LengthError("cannot analyse an empty buffer")
    if N < 1:
        raise LengthError(f"N must be >= 1, got {N}")
    freqs = np.array([2 * math.pi * f / fs for f in freqs_hz])
    seg = x[:N]
    eval_freqs = freqs
    if backend == "dtft":
        values = np.array([abs(dtft_at(seg, w)) ** 2 for w in freqs])
    elif backend == "goertzel":
        bins = [goertzel_power(x, w, N) for w in freqs]
        values = np.array([b.power for b in bins])
        eval_freqs = np.array([b.omega for b in bins])
    elif backend == "sbndft":
        seg = seg[:len(seg) - len(seg) % 2]
        values = np.array([sbndft_power(seg, w) for w in freqs])
    else:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS}")
    return SpectrumEstimate(freqs, values, "power", backend, N, fs, eval_freqs)


def dominant_peaks(est: SpectrumEstimate, count: int = 2) -> list[int]:
    """Indices of the ``count`` largest local maxima over ``0 < k < N/2``."""
    mag = est.magnitude
    half = (len(mag) + 1) // 2
    peaks = [k for k in range(1, half)
             if mag[k] >= mag[k - 1] and mag[k] >= mag[k + 1] and mag[k] > 0]
    peaks.sort(key=lambda k: (-mag[k], k))
    return peaks[:count]


def band_peak_bins(x, N: int, fs: float = DEFAULT_FS,
                   split_hz: float = 1075.0) -> tuple[int, int]:
    """Strongest N-point DFT bin below and above ``split_hz``.

    ``split_hz`` defaults to the midpoint between the highest row tone and
    the lowest column tone.
    """
    mag = dft_uniform(x, N).magnitude
    half = (N + 1) // 2
    split = int(math.ceil(split_hz * N / fs))
    split = min(max(split, 2), half - 1) if half > 2 else 1
    low = 1 + int(np.argmax(mag[1:split])) if split > 1 else 0
    high = split + int(np.argmax(mag[split:half])) if half > split else 0
    return low, high
