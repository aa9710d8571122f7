"""Command-line harness: ``dtmflab <subcommand> ...``.

Every subcommand writes its artifacts plus ``manifest.json`` (the fully
resolved configuration) into ``--out-dir``.  Data goes to files and stdout,
diagnostics to stderr.  Stochastic runs require ``--seed``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .audio_io import (read_wav, write_csv, write_csv_report, write_csv_samples,
                       write_csv_spectrum, write_csv_sweep, write_wav)
from .channel import NoiseSpec, TimingJitterSpec, UniformJitter, add_awgn, realize_timing
from .decoder import SegmentationConfig, decode_number, digit_error_rate
from .errors import DtmfError
from .keypad import (DEFAULT_FS, SignalBuffer, TimingProfile, mark_bounds,
                     normalize_dial_string, radian_pair, synthesize_digit,
                     synthesize_sequence)
from .spectral import (BACKENDS, SpectrumEstimate, band_peak_bins, dft_uniform,
                       dominant_peaks, goertzel, sbndft_power)

DEMO_NUMBER = "2474481221"
JITTER_MARKS = (900, 1050, 980, 1300, 680, 900, 620)
JITTER_SPACES = (150, 201, 21, 400, 320, 80)
TIMING_DIGITS = "49158"
NFFT_LIST = (1100, 1300, 1500, 1700, 2500, 2800, 1900)
SWEEP_DIGITS = "02589"


class UsageError(DtmfError):
    """Invalid combination of command-line options."""


# ---------------------------------------------------------------------------
# helpers

def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.replace(" ", "").split(",") if v]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.replace(" ", "").split(",") if v]


def _snr_range(text: str) -> list[float]:
    """``start:stop[:step]`` inclusive of ``stop``."""
    parts = [float(v) for v in text.split(":")]
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError("expected start:stop[:step]")
    start, stop = parts[0], parts[1]
    step = parts[2] if len(parts) == 3 else 1.0
    if step <= 0:
        raise argparse.ArgumentTypeError("step must be positive")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 9) for i in range(max(count, 0))]


def _out_dir(path) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_manifest(out: Path, command: str, config: dict) -> None:
    payload = {"command": command, "version": __version__, "config": config}
    text = json.dumps(payload, indent=2, sort_keys=True, default=_jsonable)
    (out / "manifest.json").write_text(text + "\n", encoding="ascii")


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (tuple, set)):
        return list(value)
    return str(value)


def _timing(mark, space, mark_list, space_list, trailing, n_digits) -> TimingProfile:
    if mark_list or space_list:
        spec = TimingJitterSpec(mark_list or [mark] * n_digits,
                                space_list or [space] * (n_digits + 1))
        return realize_timing(n_digits, spec, trailing)
    return TimingProfile(mark, space, trailing)


def _segmentation(preset, fs, frame_len, threshold, min_mark, min_space) -> SegmentationConfig:
    overrides = {k: v for k, v in (("frame_len", frame_len),
                                   ("energy_threshold_ratio", threshold),
                                   ("min_mark", min_mark),
                                   ("min_space", min_space)) if v is not None}
    factory = SegmentationConfig.fast if preset == "fast" else SegmentationConfig.standard
    return factory(fs, **overrides)


# ---------------------------------------------------------------------------
# subcommands

def cmd_encode(digits: str, timing: TimingProfile, fs: float, out: Path,
               snr_db: float | None = None, seed: int | None = None) -> SignalBuffer:
    """Synthesize ``digits`` to ``out/signal.wav``, optionally with noise."""
    x = synthesize_sequence(digits, timing, fs)
    if snr_db is not None:
        x = add_awgn(x, NoiseSpec(snr_db, seed))
    clipped = write_wav(x, out / "signal.wav")
    if clipped:
        print(f"warning: {clipped} samples clipped", file=sys.stderr)
    return x


def cmd_decode(wav: Path, backend: str, N: int, cfg: SegmentationConfig, out: Path,
               snr_db: float | None = None, seed: int | None = None,
               extended: bool = False):
    x = read_wav(wav)
    if snr_db is not None:
        x = add_awgn(x, NoiseSpec(snr_db, seed))
    report = decode_number(x, cfg, backend, N, extended)
    write_csv_report(report, out / "decode_report.csv")
    return report


def _spectrum_estimate(x: SignalBuffer, N: int, backend: str) -> SpectrumEstimate:
    if backend == "dtft":
        return dft_uniform(x, N)
    if backend == "goertzel":
        values = np.array([goertzel(x, k, N) for k in range(N)])
        freqs = 2 * math.pi * np.arange(N) / N
        return SpectrumEstimate(freqs, values, "complex", "goertzel", N, x.fs)
    # Folded by conjugate symmetry.  Above pi/2 the low subband returns the
    # mirror image of the tone, so those bins are reported as nan.
    seg = x.samples[:N]
    seg = np.concatenate([seg, np.zeros(N - len(seg))]) if len(seg) < N else seg
    seg = seg[:len(seg) - len(seg) % 2]
    values = np.empty(N)
    for k in range(N):
        kk = min(k, N - k)
        w = 2 * math.pi * kk / N
        values[k] = math.nan if 4 * kk >= N else sbndft_power(seg, w)
    freqs = 2 * math.pi * np.arange(N) / N
    return SpectrumEstimate(freqs, values, "power", "sbndft", N, x.fs)


def cmd_spectrum(digit: str, N: int, backend: str, mark: int, fs: float, out: Path):
    """Spectrum and time-domain dump of one digit; returns the two peak bins."""
    if mark < 1:
        raise UsageError("digit length must be at least one sample")
    x = synthesize_digit(normalize_dial_string(digit), mark, fs)
    est = _spectrum_estimate(x, N, backend)
    write_csv_spectrum(est, out / "spectrum.csv")
    write_csv_samples(x, out / "time_domain.csv")
    return sorted(dominant_peaks(est, 2))


def cmd_sweep_snr(digits: str, snrs: list[float], trials: int, seed: int, out: Path,
                  mark: int = 1000, backend: str = "goertzel", N: int = 2048,
                  fs: float = DEFAULT_FS, workers: int = 1):
    if trials < 1:
        raise UsageError("trials must be >= 1")
    points = digit_error_rate(trials, snrs, digits, mark, backend, seed, N, fs, workers)
    write_csv_sweep(points, out / "sweep.csv")
    return points


TIMING_COLUMNS = ("frame", "digit", "baseline_symbol", "baseline_row_hz", "baseline_col_hz",
                  "jitter_mark", "jitter_symbol", "jitter_row_hz", "jitter_col_hz",
                  "digit_ok", "peaks_match")


def cmd_sweep_timing(digits: str, jitter: TimingJitterSpec, baseline: TimingProfile,
                     cfg: SegmentationConfig, out: Path, backend: str = "goertzel",
                     N: int = 2048, fs: float = DEFAULT_FS):
    """Decode fixed-timing and jittered renditions and compare frame winners."""
    digits = normalize_dial_string(digits)
    profile = realize_timing(len(digits), jitter)
    clean = decode_number(synthesize_sequence(digits, baseline, fs), cfg, backend, N)
    jittered_signal = synthesize_sequence(digits, profile, fs)
    write_wav(jittered_signal, out / "jittered.wav")
    jittered = decode_number(jittered_signal, cfg, backend, N)
    marks, _ = profile.resolve(len(digits))
    rows = []
    for i, d in enumerate(digits):
        b = clean.frames[i] if i < len(clean.frames) else None
        j = jittered.frames[i] if i < len(jittered.frames) else None
        rows.append((i, d,
                     b and b.symbol, b and b.row_hz, b and b.col_hz, marks[i],
                     j and j.symbol, j and j.row_hz, j and j.col_hz,
                     int(j is not None and j.symbol == d),
                     int(b is not None and j is not None
                         and (b.row_hz, b.col_hz) == (j.row_hz, j.col_hz))))
    write_csv(out / "timing.csv", TIMING_COLUMNS, rows)
    return clean, jittered, profile


NFFT_COLUMNS = ("n", "frame", "digit", "decoded", "row_bin", "row_omega", "row_expected",
                "row_within_bin", "col_bin", "col_omega", "col_expected", "col_within_bin")


def cmd_sweep_nfft(digits: str, n_list: list[int], timing: TimingProfile,
                   cfg: SegmentationConfig, out: Path, backend: str = "goertzel",
                   fs: float = DEFAULT_FS):
    """Decode one signal at several DFT lengths; report peak bins per frame."""
    digits = normalize_dial_string(digits)
    x = synthesize_sequence(digits, timing, fs)
    truth = mark_bounds(digits, timing)
    results, rows = {}, []
    for N in n_list:
        report = decode_number(x, cfg, backend, N)
        results[N] = report.digits
        width = 2 * math.pi / N
        for i, (start, length) in enumerate(truth):
            frame = x.slice(start, start + min(length, N))
            pair = radian_pair(digits[i], fs)
            kr, kc = band_peak_bins(frame, N, fs) if N >= 8 else (0, 0)
            wr, wc = 2 * math.pi * kr / N, 2 * math.pi * kc / N
            decoded = report.frames[i].symbol if i < len(report.frames) else None
            rows.append((N, i, digits[i], decoded,
                         kr, wr, pair.w_row, int(abs(wr - pair.w_row) <= width),
                         kc, wc, pair.w_col, int(abs(wc - pair.w_col) <= width)))
    write_csv(out / "nfft.csv", NFFT_COLUMNS, rows)
    write_csv(out / "nfft_digits.csv", ("n", "digits"), sorted(results.items()))
    return results


def cmd_selftest(out=sys.stdout) -> bool:
    """Run the quick oracle suites; print one PASS/FAIL line each."""
    from . import selftest
    results = selftest.run_all()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}", file=out)
    return all(ok for _, ok, _ in results)


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dtmflab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--fs", type=float, default=DEFAULT_FS, help="sample rate in Hz")
        p.add_argument("--out-dir", default=".", help="artifact directory")
        if seed:
            p.add_argument("--seed", type=int, help="RNG seed (required when stochastic)")

    def timing(p, mark=1000, space=100):
        p.add_argument("--mark", type=int, default=mark, help="Mark samples per digit")
        p.add_argument("--space", type=int, default=space, help="Space samples per gap")
        p.add_argument("--mark-list", type=_int_list, help="per-digit Marks, comma separated")
        p.add_argument("--space-list", type=_int_list, help="per-gap Spaces, comma separated")

    def segmentation(p):
        p.add_argument("--preset", choices=("fast", "standard"), default="fast",
                       help="segmenter preset: fast (20-sample Spaces) or standard (40/40 ms)")
        p.add_argument("--frame-len", type=int)
        p.add_argument("--threshold", type=float, help="fraction of peak windowed RMS")
        p.add_argument("--min-mark", type=int)
        p.add_argument("--min-space", type=int)

    def spectral(p, n=2048):
        p.add_argument("--backend", choices=BACKENDS, default="goertzel")
        p.add_argument("--n", type=int, default=n, help="DFT length N")

    p = sub.add_parser("encode", help="synthesize a dial string to WAV")
    common(p)
    timing(p)
    p.add_argument("--digits", required=True)
    p.add_argument("--trailing-space", action="store_true")
    p.add_argument("--snr", type=float, help="add white noise at this SNR (dB)")

    p = sub.add_parser("decode", help="decode a WAV file")
    common(p)
    spectral(p)
    segmentation(p)
    p.add_argument("--wav", required=True)
    p.add_argument("--snr", type=float, help="corrupt the input at this SNR (dB) first")
    p.add_argument("--extended", action="store_true", help="also detect A-D (1633 Hz)")

    p = sub.add_parser("spectrum", help="spectrum CSV of a single digit")
    common(p, seed=False)
    spectral(p)
    p.add_argument("--digit", required=True)
    p.add_argument("--mark", type=int, default=1000, help="digit length in samples")

    p = sub.add_parser("sweep-snr", help="Monte Carlo digit error rate over SNR")
    common(p)
    spectral(p)
    p.add_argument("--digits", default=SWEEP_DIGITS)
    p.add_argument("--snr", type=_float_list, help="comma separated SNR list (dB)")
    p.add_argument("--snr-range", type=_snr_range, default=_snr_range("1:5"),
                   help="start:stop[:step] in dB, inclusive (default 1:5)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--mark", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("sweep-timing", help="fixed vs jittered Mark/Space comparison")
    common(p)
    spectral(p)
    segmentation(p)
    p.add_argument("--digits", default=TIMING_DIGITS)
    p.add_argument("--mark-list", type=_int_list)
    p.add_argument("--space-list", type=_int_list)
    p.add_argument("--mark", type=float, help="distribution mode: mean Mark")
    p.add_argument("--mark-spread", type=float, default=0.0)
    p.add_argument("--space", type=float, help="distribution mode: mean Space")
    p.add_argument("--space-spread", type=float, default=0.0)
    p.add_argument("--baseline-mark", type=int, default=1000)
    p.add_argument("--baseline-space", type=int, default=100)

    p = sub.add_parser("sweep-nfft", help="decode at several DFT lengths")
    common(p)
    segmentation(p)
    p.add_argument("--backend", choices=BACKENDS, default="goertzel")
    p.add_argument("--digits", default=TIMING_DIGITS)
    p.add_argument("--n-list", type=_int_list, default=list(NFFT_LIST))
    p.add_argument("--baseline-n", type=int, default=2048)
    timing(p)
    p.add_argument("--mark-spread", type=float, default=0.0,
                   help="draw Marks uniformly around --mark (needs --seed)")
    p.add_argument("--space-spread", type=float, default=0.0,
                   help="draw Spaces uniformly around --space (needs --seed)")

    sub.add_parser("selftest", help="run the built-in oracle checks")
    return parser


def _require_seed(args, why: str):
    if args.seed is None:
        raise UsageError(f"--seed is required {why}")


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        return _dispatch(args, config)
    except (DtmfError, ValueError, OSError) as exc:
        print(f"dtmflab: error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args, config) -> int:
    cmd = args.command
    if cmd == "selftest":
        return 0 if cmd_selftest() else 1

    out = _out_dir(args.out_dir)
    fs = args.fs

    if cmd == "encode":
        digits = normalize_dial_string(args.digits)
        if args.snr is not None:
            _require_seed(args, "with --snr")
        profile = _timing(args.mark, args.space, args.mark_list, args.space_list,
                          args.trailing_space, len(digits))
        config["resolved_timing"] = dict(zip(("marks", "spaces"), profile.resolve(len(digits))))
        write_manifest(out, cmd, config)
        x = cmd_encode(digits, profile, fs, out, args.snr, args.seed)
        print(len(x))
        return 0

    if cmd == "decode":
        if args.snr is not None:
            _require_seed(args, "with --snr")
        cfg = _segmentation(args.preset, fs, args.frame_len, args.threshold,
                            args.min_mark, args.min_space)
        config["segmentation"] = vars(cfg)
        write_manifest(out, cmd, config)
        report = cmd_decode(Path(args.wav), args.backend, args.n, cfg, out,
                            args.snr, args.seed, args.extended)
        print(report.digits)
        return 0

    if cmd == "spectrum":
        write_manifest(out, cmd, config)
        peaks = cmd_spectrum(args.digit, args.n, args.backend, args.mark, fs, out)
        for k in peaks:
            print(f"k={k} omega={2 * math.pi * k / args.n:.6f} "
                  f"freq_hz={k * fs / args.n:.3f}")
        return 0

    if cmd == "sweep-snr":
        _require_seed(args, "for sweep-snr")
        snrs = args.snr if args.snr else args.snr_range
        config["snr_points"] = snrs
        write_manifest(out, cmd, config)
        points = cmd_sweep_snr(args.digits, snrs, args.trials, args.seed, out,
                               args.mark, args.backend, args.n, fs, args.workers)
        for p in points:
            print(f"snr={p.snr_db:g} digit={p.digit} measured={p.measured_pct:.3f}% "
                  f"theoretical={p.theoretical_pct:.3f}%")
        return 0

    if cmd == "sweep-timing":
        cfg = _segmentation(args.preset, fs, args.frame_len, args.threshold,
                            args.min_mark, args.min_space)
        if args.mark is not None or args.space is not None:
            _require_seed(args, "in distribution mode")
            marks = UniformJitter(args.mark if args.mark is not None else 1000,
                                  args.mark_spread)
            spaces = UniformJitter(args.space if args.space is not None else 100,
                                   args.space_spread)
        else:
            marks = args.mark_list or list(JITTER_MARKS)
            spaces = args.space_list or list(JITTER_SPACES)
        jitter = TimingJitterSpec(marks, spaces, args.seed or 0)
        baseline = TimingProfile(args.baseline_mark, args.baseline_space)
        n_digits = len(normalize_dial_string(args.digits))
        config["segmentation"] = vars(cfg)
        config["resolved_timing"] = dict(zip(
            ("marks", "spaces"), realize_timing(n_digits, jitter).resolve(n_digits)))
        write_manifest(out, cmd, config)
        clean, jittered, _ = cmd_sweep_timing(args.digits, jitter, baseline, cfg, out,
                                              args.backend, args.n, fs)
        print(f"baseline {clean.digits}")
        print(f"jittered {jittered.digits}")
        return 0

    if cmd == "sweep-nfft":
        cfg = _segmentation(args.preset, fs, args.frame_len, args.threshold,
                            args.min_mark, args.min_space)
        digits = normalize_dial_string(args.digits)
        if args.mark_spread or args.space_spread:
            _require_seed(args, "when --mark-spread/--space-spread are set")
            spec = TimingJitterSpec(UniformJitter(args.mark, args.mark_spread),
                                    UniformJitter(args.space, args.space_spread), args.seed)
            profile = realize_timing(len(digits), spec)
        else:
            profile = _timing(args.mark, args.space, args.mark_list, args.space_list,
                              False, len(digits))
        n_list = [args.baseline_n] + [n for n in args.n_list if n != args.baseline_n]
        config["segmentation"] = vars(cfg)
        config["resolved_timing"] = dict(zip(("marks", "spaces"),
                                             profile.resolve(len(digits))))
        config["n_points"] = n_list
        write_manifest(out, cmd, config)
        results = cmd_sweep_nfft(digits, n_list, profile, cfg, out, args.backend, fs)
        for N, decoded in results.items():
            print(f"N={N} {decoded}")
        return 0

    raise UsageError(f"unknown command {cmd}")


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
