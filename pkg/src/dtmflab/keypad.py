"""Keypad symbols, their tone pairs, and deterministic tone synthesis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AliasingError, InvalidSymbolError, ProfileError

DEFAULT_FS = 8192

ROW_FREQS = (697, 770, 852, 941)
COL_FREQS = (1209, 1336, 1477, 1633)
# Standard 3-column keypad; the 1633 Hz column carries A-D.
DIGIT_COL_FREQS = COL_FREQS[:3]
BANK_FREQS = ROW_FREQS + COL_FREQS

KEYPAD = (
    ("1", "2", "3", "A"),
    ("4", "5", "6", "B"),
    ("7", "8", "9", "C"),
    ("*", "0", "#", "D"),
)

SYMBOLS = "".join(g for row in KEYPAD for g in row)
DIGIT_SYMBOLS = "".join(g for row in KEYPAD for g in row[:3])

_SEPARATORS = "- \t"


@dataclass(frozen=True)
class DtmfSymbol:
    glyph: str
    f_row: int
    f_col: int


@dataclass(frozen=True)
class RadianPair:
    w_row: float
    w_col: float
    fs: float


@dataclass(frozen=True, eq=False)
class SignalBuffer:
    """Real-valued samples at a known sample rate.

    The sample array is copied to float64 and made read-only on construction.
    """

    samples: np.ndarray
    fs: float = DEFAULT_FS

    def __post_init__(self):
        if not self.fs > 0:
            raise ValueError(f"sample rate must be positive, got {self.fs}")
        arr = np.array(self.samples, dtype=np.float64).reshape(-1)
        arr.flags.writeable = False
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SignalBuffer):
            return NotImplemented
        return self.fs == other.fs and np.array_equal(self.samples, other.samples)

    __hash__ = None

    @property
    def duration(self) -> float:
        return len(self) / self.fs

    def slice(self, start: int, stop: int) -> SignalBuffer:
        return SignalBuffer(self.samples[start:stop], self.fs)

    def scaled(self, alpha: float) -> SignalBuffer:
        return SignalBuffer(alpha * self.samples, self.fs)


@dataclass(frozen=True)
class TimingProfile:
    """Mark/Space durations in samples.

    ``marks`` and ``spaces`` are either a single int applied to every digit/gap
    or a per-digit/per-gap sequence.  Use :meth:`resolve` to expand them for a
    concrete dial string.
    """

    marks: int | Sequence[int] = 1000
    spaces: int | Sequence[int] = 100
    trailing_space: bool = False

    def __post_init__(self):
        for name in ("marks", "spaces"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)):
                object.__setattr__(self, name, tuple(int(v) for v in value))

    def n_gaps(self, n_digits: int) -> int:
        if n_digits == 0:
            return 0
        return n_digits - 1 + (1 if self.trailing_space else 0)

    def resolve(self, n_digits: int) -> tuple[list[int], list[int]]:
        """Return explicit ``(marks, spaces)`` lists for ``n_digits`` digits."""
        n_gaps = self.n_gaps(n_digits)
        marks = _expand(self.marks, n_digits, "marks")
        spaces = _expand(self.spaces, n_gaps, "spaces")
        if any(m < 1 for m in marks):
            raise ProfileError(f"every mark must be >= 1 sample, got {marks}")
        if any(s < 0 for s in spaces):
            raise ProfileError(f"every space must be >= 0 samples, got {spaces}")
        return marks, spaces


def _expand(value, count, name):
    if isinstance(value, (int, np.integer)):
        return [int(value)] * count
    if len(value) != count:
        raise ProfileError(f"{name}: expected {count} values, got {len(value)}")
    return list(value)


_LOOKUP = {
    glyph: DtmfSymbol(glyph, ROW_FREQS[r], COL_FREQS[c])
    for r, row in enumerate(KEYPAD)
    for c, glyph in enumerate(row)
}
_REVERSE = {(s.f_row, s.f_col): g for g, s in _LOOKUP.items()}


def normalize_dial_string(text: str) -> str:
    """Strip separators ('-', whitespace) and upper-case letters.

    >>> normalize_dial_string("247-448-1221")
    '2474481221'
    """
    out = "".join(ch for ch in text if ch not in _SEPARATORS).upper()
    for ch in out:
        if ch not in _LOOKUP:
            raise InvalidSymbolError(f"invalid DTMF symbol {ch!r}")
    return out


def lookup(glyph: str) -> DtmfSymbol:
    try:
        return _LOOKUP[glyph.upper()]
    except (KeyError, AttributeError):
        raise InvalidSymbolError(f"invalid DTMF symbol {glyph!r}") from None


def symbol_frequencies(glyph: str) -> tuple[int, int]:
    """Row and column frequency in Hz for a keypad glyph."""
    sym = lookup(glyph)
    return sym.f_row, sym.f_col


def symbol_at(f_row: int, f_col: int) -> str:
    """Inverse of :func:`symbol_frequencies`."""
    try:
        return _REVERSE[(f_row, f_col)]
    except KeyError:
        raise InvalidSymbolError(f"no keypad symbol at ({f_row}, {f_col}) Hz") from None


def radian_pair(glyph: str, fs: float = DEFAULT_FS) -> RadianPair:
    f_row, f_col = symbol_frequencies(glyph)
    if not fs > 2 * f_col:
        raise AliasingError(f"fs={fs} Hz does not satisfy Nyquist for {f_col} Hz")
    return RadianPair(2 * math.pi * f_row / fs, 2 * math.pi * f_col / fs, fs)


def synthesize_digit(glyph: str, n_samples: int, fs: float = DEFAULT_FS) -> SignalBuffer:
    """``sin(w_row n) + sin(w_col n)`` for ``n = 0 .. n_samples-1``."""
    if n_samples < 0:
        raise ValueError(f"n_samples must be >= 0, got {n_samples}")
    pair = radian_pair(glyph, fs)
    n = np.arange(n_samples, dtype=np.float64)
    return SignalBuffer(np.sin(pair.w_row * n) + np.sin(pair.w_col * n), fs)


def synthesize_sequence(glyphs: str, timing: TimingProfile | None = None,
                        fs: float = DEFAULT_FS) -> SignalBuffer:
    """Concatenate digit bursts separated by zero-valued gaps."""
    glyphs = normalize_dial_string(glyphs)
    timing = timing or TimingProfile()
    marks, spaces = timing.resolve(len(glyphs))
    parts = []
    for i, glyph in enumerate(glyphs):
        parts.append(synthesize_digit(glyph, marks[i], fs).samples)
        if i < len(spaces):
            parts.append(np.zeros(spaces[i]))
    if not parts:
        return SignalBuffer(np.zeros(0), fs)
    return SignalBuffer(np.concatenate(parts), fs)


def mark_bounds(glyphs: str, timing: TimingProfile | None = None) -> list[tuple[int, int]]:
    """Ground-truth ``(start, length)`` of each mark in :func:`synthesize_sequence` output."""
    glyphs = normalize_dial_string(glyphs)
    timing = timing or TimingProfile()
    marks, spaces = timing.resolve(len(glyphs))
    bounds, pos = [], 0
    for i, m in enumerate(marks):
        bounds.append((pos, m))
        pos += m + (spaces[i] if i < len(spaces) else 0)
    return bounds
