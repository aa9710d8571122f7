"""WAV and CSV interchange.

WAV files are RIFF/WAVE, 16-bit signed little-endian PCM, mono.  Samples are
scaled by ``32767 / 2.0`` so that the two-tone peak of +/-2 maps to full
scale; louder (noisy) samples clip and the clip count is returned.

CSV files use ``\\n`` line endings and ``%.9g`` floats (9 significant
digits), independent of the locale.
"""

from __future__ import annotations

import csv
import math
import wave
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import WavFormatError
from .keypad import BANK_FREQS, DEFAULT_FS, SignalBuffer
from .spectral import SpectrumEstimate

FULL_SCALE = 32767
AMPLITUDE_BOUND = 2.0

SPECTRUM_COLUMNS = ("k", "omega_rad", "freq_hz", "magnitude", "magnitude_normalized")
SWEEP_COLUMNS = ("snr_db", "digit", "trials", "errors", "measured_pct", "theoretical_pct")


@dataclass(frozen=True)
class WavSpec:
    sample_rate: int = DEFAULT_FS
    bit_depth: int = 16
    channels: int = 1

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.bit_depth != 16 or self.channels != 1:
            raise ValueError("only 16-bit mono PCM is supported")


def quantize(samples: np.ndarray) -> tuple[np.ndarray, int]:
    """Map float samples to int16 codes; return ``(codes, n_clipped)``."""
    scaled = np.rint(np.asarray(samples, dtype=np.float64) / AMPLITUDE_BOUND * FULL_SCALE)
    clipped = int(np.count_nonzero((scaled > 32767) | (scaled < -32768)))
    return np.clip(scaled, -32768, 32767).astype("<i2"), clipped


def dequantize(codes: np.ndarray) -> np.ndarray:
    return np.asarray(codes, dtype=np.float64) / FULL_SCALE * AMPLITUDE_BOUND


def write_wav(x: SignalBuffer, path, spec: WavSpec | None = None) -> int:
    """Write ``x`` as 16-bit mono PCM; returns the number of clipped samples.

    The header rate is ``spec.sample_rate`` when given, else ``round(x.fs)``.
    """
    samples = x.samples
    if not np.all(np.isfinite(samples)):
        raise ValueError("cannot write non-finite samples")
    spec = spec or WavSpec(int(round(x.fs)))
    codes, clipped = quantize(samples)
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(spec.sample_rate)
        fh.writeframes(codes.tobytes())
    return clipped


def read_wav(path) -> SignalBuffer:
    try:
        with wave.open(str(path), "rb") as fh:
            channels, width = fh.getnchannels(), fh.getsampwidth()
            rate, n = fh.getframerate(), fh.getnframes()
            raw = fh.readframes(n)
    except (wave.Error, EOFError) as exc:
        raise WavFormatError(f"{path}: {exc}") from exc
    if channels != 1:
        raise WavFormatError(f"{path}: expected mono, got {channels} channels")
    if width != 2:
        raise WavFormatError(f"{path}: expected 16-bit samples, got {8 * width}-bit")
    codes = np.frombuffer(raw, dtype="<i2")
    return SignalBuffer(dequantize(codes), rate)


def fmt(value) -> str:
    """Locale-independent CSV cell."""
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{float(value):.9g}"
    if value is None:
        return ""
    return str(value)


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_csv_spectrum(est: SpectrumEstimate, path) -> None:
    """One row per evaluated frequency, magnitudes normalized to the maximum."""
    mag = est.magnitude
    finite = mag[np.isfinite(mag)]
    peak = float(finite.max()) if len(finite) else 0.0
    norm = mag / peak if peak > 0 else np.zeros_like(mag)
    hz = est.freqs_hz
    rows = ((k, float(est.freqs[k]), float(hz[k]), float(mag[k]), float(norm[k]))
            for k in range(len(est)))
    write_csv(path, SPECTRUM_COLUMNS, rows)


def write_csv_sweep(rows, path) -> None:
    """``rows`` are :class:`~dtmflab.decoder.ErrorRatePoint`-like objects."""
    write_csv(path, SWEEP_COLUMNS, (
        (float(r.snr_db), r.digit, r.trials, r.errors,
         float(r.measured_pct), float(r.theoretical_pct)) for r in rows))


def write_csv_samples(x: SignalBuffer, path) -> None:
    write_csv(path, ("n", "t_s", "sample"),
              ((n, n / x.fs, float(v)) for n, v in enumerate(x.samples)))


def write_csv_report(report, path) -> None:
    header = ("frame", "start", "length", "symbol", "row_hz", "col_hz", "confidence") + \
        tuple(f"e{f}" for f in BANK_FREQS)
    write_csv(path, header, (
        (i, fr.start, fr.length, fr.symbol, fr.row_hz, fr.col_hz, float(fr.confidence))
        + tuple(float(e) for e in fr.energies)
        for i, fr in enumerate(report.frames)))
