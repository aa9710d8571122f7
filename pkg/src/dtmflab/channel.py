"""Channel impairments: calibrated white Gaussian noise and Mark/Space jitter.

All randomness comes from numpy's ``Generator`` over the PCG64 bit generator.
Streams are seeded through ``numpy.random.SeedSequence`` so that a master seed
plus a tuple of integer indices (trial number, digit index, ...) maps to an
independent, reproducible stream.  Gaussian variates use
``Generator.standard_normal``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import LengthError, ProfileError, UndefinedSnrError
from .keypad import SignalBuffer, TimingProfile


def _seed_sequence(seed: int, indices) -> np.random.SeedSequence:
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(i) for i in indices]
    return np.random.SeedSequence(entropy)


def make_rng(seed: int, *indices: int) -> np.random.Generator:
    """PCG64 generator for ``seed`` and optional sub-stream ``indices``."""
    return np.random.Generator(np.random.PCG64(_seed_sequence(seed, indices)))


def derive_seed(master: int, *indices: int) -> int:
    """Deterministic 64-bit child seed for a trial of a seeded experiment."""
    return int(_seed_sequence(master, indices).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class NoiseSpec:
    snr_db: float
    seed: int = 0

    def __post_init__(self):
        if not math.isfinite(self.snr_db):
            raise ValueError(f"snr_db must be finite, got {self.snr_db}")


@dataclass(frozen=True)
class UniformJitter:
    """Integer durations drawn uniformly from ``[mean - spread, mean + spread]``."""

    mean: float
    spread: float = 0.0

    def __post_init__(self):
        if self.spread < 0:
            raise ValueError(f"spread must be >= 0, got {self.spread}")

    def draw(self, rng: np.random.Generator, count: int, lower: int) -> list[int]:
        if count == 0:
            return []
        lo, hi = self.mean - self.spread, self.mean + self.spread
        values = rng.uniform(lo, hi, size=count) if hi > lo else np.full(count, self.mean)
        return [max(lower, int(v)) for v in np.rint(values)]


Durations = Union[Sequence[int], UniformJitter]


@dataclass(frozen=True)
class TimingJitterSpec:
    marks: Durations
    spaces: Durations
    seed: int = 0


def add_awgn(clean: SignalBuffer, spec: NoiseSpec) -> SignalBuffer:
    """Add zero-mean white Gaussian noise at ``spec.snr_db`` below the signal.

    The signal power is the empirical mean square of ``clean``, so silent gaps
    count towards it.
    """
    x = clean.samples
    if len(x) == 0:
        raise UndefinedSnrError("cannot add noise relative to an empty signal")
    power = float(np.mean(x * x))
    if power == 0.0:
        raise UndefinedSnrError("signal power is zero; SNR is undefined")
    noise_var = power * 10.0 ** (-spec.snr_db / 10.0)
    w = make_rng(spec.seed).standard_normal(len(x)) * math.sqrt(noise_var)
    return SignalBuffer(x + w, clean.fs)


def measured_snr(reference: SignalBuffer, observed: SignalBuffer) -> float:
    """``10 log10(var(reference) / var(observed - reference))`` in dB.

    Returns ``math.inf`` when the error variance is zero.
    """
    ref = np.asarray(getattr(reference, "samples", reference), dtype=np.float64)
    obs = np.asarray(getattr(observed, "samples", observed), dtype=np.float64)
    if ref.shape != obs.shape:
        raise LengthError(f"length mismatch: {ref.shape[0]} vs {obs.shape[0]}")
    sig_var = float(np.var(ref))
    if sig_var == 0.0:
        raise UndefinedSnrError("reference has zero variance")
    err_var = float(np.var(obs - ref))
    if err_var == 0.0:
        return math.inf
    return 10.0 * math.log10(sig_var / err_var)


def theoretical_error_rate(snr_db: float) -> float:
    """Noise-to-signal power ratio as a percentage, ``100 * 10**(-snr/10)``."""
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    return 100.0 * 10.0 ** (-snr_db / 10.0)


def realize_timing(n_digits: int, spec: TimingJitterSpec,
                   trailing_space: bool = False) -> TimingProfile:
    """Draw a concrete :class:`TimingProfile` for a dial string of ``n_digits``.

    Explicit lists are consumed from the front; extra values are ignored.
    Distribution draws use independent sub-streams for marks and spaces.
    """
    n_gaps = TimingProfile(trailing_space=trailing_space).n_gaps(n_digits)
    marks = _realize(spec.marks, n_digits, 1, make_rng(spec.seed, 0), "marks")
    spaces = _realize(spec.spaces, n_gaps, 0, make_rng(spec.seed, 1), "spaces")
    return TimingProfile(tuple(marks), tuple(spaces), trailing_space)


def _realize(source, count, lower, rng, name):
    if isinstance(source, UniformJitter):
        if name == "marks" and source.mean < 1:
            raise ProfileError(f"mark mean must be >= 1, got {source.mean}")
        return source.draw(rng, count, lower)
    values = [int(v) for v in source]
    if len(values) < count:
        raise ProfileError(f"{name}: need {count} values, got {len(values)}")
    values = values[:count]
    if any(v < lower for v in values):
        raise ProfileError(f"{name}: values must be >= {lower}, got {values}")
    return values
