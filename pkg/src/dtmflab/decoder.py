"""Segmentation into Mark frames, per-frame classification, number decoding."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import NoiseSpec, add_awgn, derive_seed, theoretical_error_rate
from .keypad import (BANK_FREQS, COL_FREQS, DEFAULT_FS, ROW_FREQS, SYMBOLS,
                     SignalBuffer, normalize_dial_string, symbol_at, synthesize_digit)
from .spectral import dtmf_bank

# Shortest analysis length the classifier accepts.
MIN_CLASSIFY_SAMPLES = 200
# No-tone floor, in units of (analysed samples)**2.
NO_TONE_FLOOR = 1e-6


@dataclass(frozen=True)
class SegmentationConfig:
    """Energy-detector settings.

    ``energy_threshold_ratio`` is a fraction of the peak windowed RMS; a Mark
    starts when the windowed RMS reaches it and ends once the windowed energy
    falls below ``exit_ratio`` times the entry energy.  Defaults are the
    40 ms / 40 ms Mark/Space minimums at 8192 Hz.
    """

    frame_len: int = 32
    energy_threshold_ratio: float = 0.5
    min_mark: int = 328
    min_space: int = 328
    exit_ratio: float = 0.5

    def __post_init__(self):
        if self.frame_len < 1:
            raise ValueError(f"frame_len must be >= 1, got {self.frame_len}")
        if not 0 < self.energy_threshold_ratio < 1:
            raise ValueError("energy_threshold_ratio must lie in (0, 1)")
        if not 0 < self.exit_ratio <= 1:
            raise ValueError("exit_ratio must lie in (0, 1]")
        if self.min_mark < self.frame_len:
            raise ValueError("min_mark must be >= frame_len")
        if self.min_space < 0:
            raise ValueError("min_space must be >= 0")

    @classmethod
    def standard(cls, fs: float = DEFAULT_FS, **overrides) -> SegmentationConfig:
        """40/40 ms Mark/Space minimums at sample rate ``fs``."""
        n40 = int(round(0.040 * fs))
        return cls(**{"min_mark": n40, "min_space": n40, **overrides})

    @classmethod
    def fast(cls, fs: float = DEFAULT_FS, **overrides) -> SegmentationConfig:
        """Settings for the experiment signals: Marks down to ~25 ms, Spaces
        down to 20 samples (a 21-sample Space must still split two digits)."""
        params = {"frame_len": 20, "energy_threshold_ratio": 0.5,
                  "min_mark": MIN_CLASSIFY_SAMPLES, "min_space": 20}
        return cls(**{**params, **overrides})


@dataclass(frozen=True)
class FrameRecord:
    start: int
    length: int
    energies: tuple[float, ...]
    symbol: str | None
    row_hz: int | None
    col_hz: int | None
    confidence: float


@dataclass(frozen=True)
class DecodeReport:
    digits: str
    frames: tuple[FrameRecord, ...]
    backend: str
    n_dft: int


@dataclass(frozen=True)
class Classification:
    symbol: str | None
    confidence: float
    row_hz: int | None
    col_hz: int | None
    energies: tuple[float, ...]


def windowed_rms(x: np.ndarray, frame_len: int) -> np.ndarray:
    """Centred moving RMS over ``frame_len`` samples (zero outside ``x``)."""
    kernel = np.ones(frame_len) / frame_len
    power = np.convolve(x * x, kernel, mode="same")
    return np.sqrt(np.maximum(power, 0.0))


def segment(x, cfg: SegmentationConfig | None = None) -> list[tuple[int, int]]:
    """Find Mark frames as ``(start, length)`` pairs.

    Hysteresis on the windowed RMS yields raw runs.  Two runs are merged when
    the silence between them is shorter than ``cfg.min_space``; a gap of ``g``
    below-threshold window positions is taken to span ``g + frame_len - 1``
    silent samples, since every window touching the gap must lie inside it.
    Runs shorter than ``cfg.min_mark`` are then dropped.
    """
    cfg = cfg or SegmentationConfig()
    x = np.asarray(getattr(x, "samples", x), dtype=np.float64)
    if len(x) == 0:
        return []
    rms = windowed_rms(x, cfg.frame_len)
    peak = float(rms.max())
    if peak == 0.0:
        return []
    enter = cfg.energy_threshold_ratio * peak
    leave = enter * math.sqrt(cfg.exit_ratio)

    runs = []
    active, start = False, 0
    for n, level in enumerate(rms):
        if not active and level >= enter:
            active, start = True, n
        elif active and level < leave:
            runs.append([start, n])
            active = False
    if active:
        runs.append([start, len(x)])

    merged = []
    for run in runs:
        if merged and run[0] - merged[-1][1] + cfg.frame_len - 1 < cfg.min_space:
            merged[-1][1] = run[1]
        else:
            merged.append(run)
    return [(a, b - a) for a, b in merged if b - a >= cfg.min_mark]


def classify_frame(frame, backend: str = "goertzel", N: int = 2048,
                   extended: bool = False,
                   min_samples: int = MIN_CLASSIFY_SAMPLES) -> Classification:
    """Pick the strongest row and column tone of a single Mark frame.

    Only the first ``min(len(frame), N)`` samples are analysed.  The column
    search covers 1209/1336/1477 Hz, plus 1633 Hz when ``extended``.
    ``symbol`` is None (no tone) when fewer than ``min_samples`` samples are
    analysed or either group's best energy is below the no-tone floor.
    """
    fs = frame.fs if isinstance(frame, SignalBuffer) else DEFAULT_FS
    x = np.asarray(getattr(frame, "samples", frame), dtype=np.float64)
    used = min(len(x), N)
    if used == 0:
        return Classification(None, 0.0, None, None, (0.0,) * len(BANK_FREQS))
    est = dtmf_bank(x, backend, N, fs=fs)
    energies = tuple(float(v) for v in est.values)
    if used < min_samples:
        return Classification(None, 0.0, None, None, energies)

    n_cols = 4 if extended else 3
    rows = np.array(energies[:4])
    cols = np.array(energies[4:4 + n_cols])
    floor = NO_TONE_FLOOR * used * used
    if rows.max() < floor or cols.max() < floor:
        return Classification(None, 0.0, None, None, energies)

    r, c = int(np.argmax(rows)), int(np.argmax(cols))
    confidence = min(_ratio(rows), _ratio(cols))
    f_row, f_col = ROW_FREQS[r], COL_FREQS[c]
    return Classification(symbol_at(f_row, f_col), confidence, f_row, f_col, energies)


def _ratio(group: np.ndarray) -> float:
    best, second = np.sort(group)[::-1][:2]
    return math.inf if second == 0 else float(best / second)


def decode_number(x: SignalBuffer, cfg: SegmentationConfig | None = None,
                  backend: str = "goertzel", N: int = 2048,
                  extended: bool = False) -> DecodeReport:
    """Segment ``x`` and classify each frame; no-tone frames are kept in
    ``frames`` but contribute nothing to ``digits``."""
    frames, digits = [], []
    for start, length in segment(x, cfg):
        result = classify_frame(x.slice(start, start + length), backend, N, extended)
        frames.append(FrameRecord(start, length, result.energies, result.symbol,
                                  result.row_hz, result.col_hz, result.confidence))
        if result.symbol is not None:
            digits.append(result.symbol)
    return DecodeReport("".join(digits), tuple(frames), backend, N)


# ---------------------------------------------------------------------------
# Monte Carlo error sweep

@dataclass(frozen=True)
class ErrorRatePoint:
    snr_db: float
    digit: str
    trials: int
    errors: int

    @property
    def measured_pct(self) -> float:
        return 100.0 * self.errors / self.trials

    @property
    def theoretical_pct(self) -> float:
        return theoretical_error_rate(self.snr_db)


def _count_errors(task) -> int:
    glyph, snr_db, trials, mark, backend, N, fs, master_seed = task
    clean = synthesize_digit(glyph, mark, fs)
    stream = SYMBOLS.index(glyph)
    errors = 0
    for t in range(trials):
        # Seeds ignore the SNR so each SNR point sees the same noise shapes.
        noisy = add_awgn(clean, NoiseSpec(snr_db, derive_seed(master_seed, stream, t)))
        if classify_frame(noisy, backend, N).symbol != glyph:
            errors += 1
    return errors


def digit_error_rate(trials: int, snr_db: float | Sequence[float], glyphs: str = "02589",
                     mark: int = 1000, backend: str = "goertzel", master_seed: int = 0,
                     N: int = 2048, fs: float = DEFAULT_FS,
                     workers: int = 1) -> list[ErrorRatePoint]:
    """Per-digit misclassification counts over seeded noisy single-digit bursts.

    Each trial synthesizes ``mark`` samples of the digit, adds white noise at
    the SNR, and classifies the whole burst.  Points are returned ordered by
    SNR then by position in ``glyphs``; ``workers > 1`` runs points in
    separate processes with identical results.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    snrs = [float(snr_db)] if np.isscalar(snr_db) else [float(s) for s in snr_db]
    glyphs = normalize_dial_string(glyphs)
    tasks = [(g, s, trials, mark, backend, N, fs, master_seed) for s in snrs for g in glyphs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(_count_errors, tasks))
    else:
        counts = [_count_errors(t) for t in tasks]
    return [ErrorRatePoint(t[1], t[0], trials, c) for t, c in zip(tasks, counts)]
