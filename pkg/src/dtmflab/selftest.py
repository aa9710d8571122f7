"""Quick oracle checks behind ``dtmflab selftest``.

Each check returns ``(name, passed, detail)``.  The oracles are brute-force
sums written here independently of :mod:`dtmflab.spectral`.
"""

from __future__ import annotations

import math
import time

import numpy as np

from .channel import NoiseSpec, add_awgn, make_rng, measured_snr
from .decoder import SegmentationConfig, decode_number
from .keypad import TimingProfile, synthesize_digit, synthesize_sequence
from .spectral import (BACKENDS, goertzel, ndft_point, sbndft_power,
                       subband_decompose, subband_reconstruct)


def _dft_bin(x, k, N):
    n = np.arange(N)
    return sum(x[i] * complex(math.cos(-2 * math.pi * k * i / N),
                              math.sin(-2 * math.pi * k * i / N)) for i in n)


def check_goertzel(n_buffers=200, seed=11):
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(n_buffers):
        N = int(rng.integers(1, 65))
        x = rng.standard_normal(N)
        for k in range(N):
            worst = max(worst, abs(goertzel(x, k, N) - _dft_bin(x, k, N)) / N)
    return "goertzel == direct DFT", worst <= 1e-9, f"max err/N = {worst:.2e}"


def check_subbands(n_buffers=200, seed=12):
    rng = make_rng(seed)
    worst_rec, worst_split = 0.0, 0.0
    for _ in range(n_buffers):
        N = 2 * int(rng.integers(1, 33))
        x = rng.standard_normal(N)
        pair = subband_decompose(x)
        err = np.max(np.abs(subband_reconstruct(pair) - x)) / np.max(np.abs(x))
        worst_rec = max(worst_rec, float(err))
        z = complex(np.exp(1j * rng.uniform(0, math.pi)))
        lhs = sum(x[n] * z ** -n for n in range(N))
        rhs = ((1 + 1 / z) * ndft_point(pair.g_low, z * z)
               + (1 - 1 / z) * ndft_point(pair.g_high, z * z))
        worst_split = max(worst_split, abs(lhs - rhs))
    ok = worst_rec <= 4 * np.finfo(float).eps and worst_split <= 1e-9
    return "subband identities", ok, f"recon {worst_rec:.1e}, split {worst_split:.1e}"


def check_snr_calibration(seed=13):
    x = synthesize_digit("2", 100_000)
    errs = [abs(measured_snr(x, add_awgn(x, NoiseSpec(s, seed + s))) - s) for s in range(1, 6)]
    return "AWGN calibration", max(errs) <= 0.1, f"max |dSNR| = {max(errs):.3f} dB"


def check_round_trip():
    x = synthesize_sequence("2474481221", TimingProfile(1000, 100))
    cfg = SegmentationConfig.fast()
    got = {b: decode_number(x, cfg, b).digits for b in BACKENDS}
    ok = all(v == "2474481221" for v in got.values())
    return "clean round trip", ok, " ".join(f"{b}={v}" for b, v in got.items())


def check_cost_ratio(repeats=200):
    """Time per evaluated frequency: full Goertzel vs half-length SB-NDFT."""
    x = synthesize_digit("5", 2048).samples
    w = 2 * math.pi * 770 / 8192
    t0 = time.perf_counter()
    for _ in range(repeats):
        goertzel(x, 193, 2048)
    t1 = time.perf_counter()
    for _ in range(repeats):
        sbndft_power(x, w)
    t2 = time.perf_counter()
    ratio = (t2 - t1) / (t1 - t0)
    return ("sbndft/goertzel cost", True,
            f"recursion length 1024 vs 2048, time ratio {ratio:.2f}")


def run_all():
    return [check_goertzel(), check_subbands(), check_snr_calibration(),
            check_round_trip(), check_cost_ratio()]
