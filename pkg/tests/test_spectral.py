import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dtmflab.errors import LengthError, SingularPointError
from dtmflab.keypad import (BANK_FREQS, DIGIT_SYMBOLS, SignalBuffer, symbol_frequencies,
                            synthesize_digit)
from dtmflab.spectral import (BACKENDS, SubbandPair, band_peak_bins, dft_uniform,
                              dominant_peaks, dtft_at, dtmf_bank, goertzel, goertzel_power,
                              nearest_bin, ndft_point, sbndft_power, subband_decompose,
                              subband_reconstruct)

import oracles

# Frozen from the brute-force oracle (digit "2", 1000 samples, fs = 8192).
DIGIT2_AT_ROW = 499.16614132331193    # at w = 0.5346
DIGIT2_AT_697 = 499.18063555812125    # at w = 2 pi 697 / 8192
DIGIT2_AT_0_8 = 1.8012621706858771

finite_floats = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


def _rng(seed):
    return np.random.default_rng(seed)


# --- DTFT -------------------------------------------------------------------

def test_dtft_impulse_is_flat():
    x = np.zeros(16)
    x[0] = 1.0
    for w in np.linspace(0, math.pi, 9):
        assert dtft_at(x, w) == pytest.approx(1.0, abs=1e-14)


def test_dtft_frozen_values():
    x = synthesize_digit("2", 1000)
    assert abs(dtft_at(x, 0.5346)) == pytest.approx(DIGIT2_AT_ROW, rel=1e-9)
    assert abs(dtft_at(x, 2 * math.pi * 697 / 8192)) == pytest.approx(DIGIT2_AT_697, rel=1e-9)
    assert abs(dtft_at(x, 0.8)) == pytest.approx(DIGIT2_AT_0_8, rel=1e-9)
    assert DIGIT2_AT_ROW / DIGIT2_AT_0_8 > 50


def test_dtft_against_oracle():
    x = oracles.tone(941, 1477, 300)
    for w in (0.1, 0.7217, 1.1328, 2.9):
        assert dtft_at(x, w) == pytest.approx(oracles.dtft(x, w), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(a=finite_floats, b=finite_floats, w=st.floats(0, math.pi), seed=st.integers(0, 10**6))
def test_dtft_linearity(a, b, w, seed):
    rng = _rng(seed)
    x, y = rng.standard_normal(40), rng.standard_normal(40)
    lhs = dtft_at(a * x + b * y, w)
    rhs = a * dtft_at(x, w) + b * dtft_at(y, w)
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(a) + abs(b)) * 40


# --- DFT --------------------------------------------------------------------

def test_dft_peaks_for_digit_two():
    est = dft_uniform(synthesize_digit("2", 1000), 2048)
    assert sorted(dominant_peaks(est, 2)) == [174, 334]
    # bins 174 and 334 sit on 697 and 1336 Hz to within half a bin
    assert est.freqs_hz[174] == pytest.approx(697, abs=2)
    assert est.freqs_hz[334] == pytest.approx(1336, abs=2)


def test_dft_constant_is_dc_only():
    est = dft_uniform(np.ones(32), 32)
    assert est.values[0] == pytest.approx(32)
    assert np.max(np.abs(est.values[1:])) < 1e-12


def test_dft_matches_oracle():
    rng = _rng(3)
    for N in (1, 2, 7, 16, 33):
        x = rng.standard_normal(N)
        np.testing.assert_allclose(dft_uniform(x, N).values, oracles.dft(x, N), atol=1e-10)


def test_dft_pad_and_truncate():
    x = np.arange(10.0)
    padded = dft_uniform(x, 16).values
    np.testing.assert_allclose(padded, oracles.dft(list(x) + [0.0] * 6, 16), atol=1e-10)
    truncated = dft_uniform(x, 4).values
    np.testing.assert_allclose(truncated, oracles.dft(x[:4], 4), atol=1e-10)
    with pytest.raises(LengthError):
        dft_uniform(x, 0)


def test_dft_parseval_and_symmetry():
    x = _rng(4).standard_normal(256)
    X = dft_uniform(x, 256).values
    assert np.sum(np.abs(X) ** 2) / 256 == pytest.approx(np.sum(x ** 2), rel=1e-12)
    np.testing.assert_allclose(X[1:], np.conj(X[1:][::-1]), atol=1e-9)


@pytest.mark.parametrize("N", [1, 2, 8, 1024, 2048])
def test_dft_fast_path_matches_direct(N):
    x = _rng(N).standard_normal(N)
    np.testing.assert_allclose(dft_uniform(x, N, fast=True).values,
                               dft_uniform(x, N).values, atol=1e-8)


def test_dft_fast_falls_back_for_odd_sizes():
    x = _rng(5).standard_normal(12)
    np.testing.assert_allclose(dft_uniform(x, 12, fast=True).values,
                               oracles.dft(x, 12), atol=1e-10)


def test_dft_keeps_sample_rate():
    assert dft_uniform(SignalBuffer(np.ones(4), 8000), 4).fs == 8000


# --- Goertzel ---------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(data=st.data())
def test_goertzel_matches_oracle(data):
    N = data.draw(st.integers(1, 64))
    M = data.draw(st.integers(0, 80))
    x = _rng(data.draw(st.integers(0, 10**6))).standard_normal(M)
    k = data.draw(st.integers(0, N - 1))
    assert abs(goertzel(x, k, N) - oracles.dft_bin(list(x) + [0.0] * N, k, N)) <= 1e-9 * N


def test_goertzel_on_bin_cosine():
    N, k = 64, 5
    n = np.arange(N)
    x = np.cos(2 * math.pi * k * n / N)
    assert goertzel(x, k, N) == pytest.approx(N / 2, abs=1e-9)
    assert abs(goertzel(x, k + 1, N)) < 1e-9


def test_goertzel_zero_input_and_bad_bin():
    assert goertzel(np.zeros(50), 3, 50) == 0
    assert goertzel([], 0, 8) == 0
    with pytest.raises(ValueError):
        goertzel(np.ones(4), 4, 4)


def test_goertzel_power_snaps_to_nearest_bin():
    x = synthesize_digit("2", 1000)
    w = 2 * math.pi * 697 / 8192
    bp = goertzel_power(x, w, 2048)
    assert bp.k == 174 == nearest_bin(w, 2048)
    assert bp.omega == pytest.approx(2 * math.pi * 174 / 2048)
    assert bp.power == pytest.approx(abs(oracles.dft_bin(x.samples, 174, 2048)) ** 2, rel=1e-9)
    with pytest.raises(ValueError):
        goertzel_power(x, -0.1, 2048)


def test_nearest_bin_ties_round_up():
    assert nearest_bin(2 * math.pi * 2.5 / 16, 16) == 3
    assert nearest_bin(math.pi, 4) == 2


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(-50, 50), seed=st.integers(0, 10**6))
def test_goertzel_power_homogeneity(alpha, seed):
    x = _rng(seed).standard_normal(100)
    p1 = goertzel_power(x, 1.0, 128).power
    pa = goertzel_power(alpha * x, 1.0, 128).power
    assert pa == pytest.approx(alpha ** 2 * p1, rel=1e-9, abs=1e-9)


# --- Subbands and SB-NDFT ----------------------------------------------------

def test_subband_worked_example():
    pair = subband_decompose([1.0, 3.0, 5.0, 9.0])
    np.testing.assert_array_equal(pair.g_low, [2.0, 7.0])
    np.testing.assert_array_equal(pair.g_high, [-1.0, -2.0])
    np.testing.assert_array_equal(subband_reconstruct(pair), [1.0, 3.0, 5.0, 9.0])


def test_subband_errors():
    with pytest.raises(LengthError):
        subband_decompose([1.0, 2.0, 3.0])
    with pytest.raises(LengthError):
        SubbandPair(np.zeros(2), np.zeros(3))
    empty = subband_decompose([])
    assert len(empty.g_low) == 0 and len(subband_reconstruct(empty)) == 0


@settings(max_examples=60, deadline=None)
@given(half=st.integers(1, 64), seed=st.integers(0, 10**6))
def test_subband_round_trip(half, seed):
    x = _rng(seed).standard_normal(2 * half)
    err = np.max(np.abs(subband_reconstruct(subband_decompose(x)) - x))
    assert err <= 4 * np.finfo(float).eps * np.max(np.abs(x))


def test_subband_round_trip_exact_for_dyadic_values():
    x = _rng(9).integers(-1000, 1000, 64) / 8.0
    np.testing.assert_array_equal(subband_reconstruct(subband_decompose(x)), x)


@settings(max_examples=40, deadline=None)
@given(half=st.integers(1, 24), seed=st.integers(0, 10**6),
       r=st.floats(0.5, 2.0), phi=st.floats(0, 2 * math.pi))
def test_split_identity(half, seed, r, phi):
    x = list(_rng(seed).standard_normal(2 * half))
    z = r * complex(math.cos(phi), math.sin(phi))
    pair = subband_decompose(x)
    rhs = ((1 + 1 / z) * ndft_point(pair.g_low, z * z)
           + (1 - 1 / z) * ndft_point(pair.g_high, z * z))
    lhs = oracles.z_transform(x, z)
    # terms scale like |z|**-n, so bound the error by the largest term magnitude
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, (1 / r) ** (2 * half)) * 2 * half


def test_ndft_point_cases():
    assert ndft_point([], 0.5) == 0
    assert ndft_point([3.0], 0) == 3
    assert ndft_point([1.0, 2.0], 2.0) == pytest.approx(2.0)
    with pytest.raises(SingularPointError):
        ndft_point([1.0, 2.0], 0)


def test_sbndft_quarter_band_is_eight_gl_power():
    x = _rng(7).standard_normal(64)
    g_low = subband_decompose(x).g_low
    gl = abs(oracles.dtft(g_low, math.pi)) ** 2
    assert sbndft_power(x, math.pi / 2) == pytest.approx(8 * gl, rel=1e-9)


def test_sbndft_uncompensated_exact_without_high_band():
    g = _rng(8).standard_normal(40)
    x = np.repeat(g, 2)  # x[2n] == x[2n+1] so the high subband vanishes
    assert np.all(subband_decompose(x).g_high == 0)
    for w in (0.3, 0.5346, 1.0247, 2.0, 3.0):
        exact = abs(oracles.dtft(x, w)) ** 2
        assert sbndft_power(x, w, compensate=False) == pytest.approx(exact, rel=1e-8, abs=1e-8)


@pytest.mark.parametrize("w", [0.3, 0.5346, 1.0247, 1.5])
def test_sbndft_compensation_exact_for_complex_exponential(w):
    N = 256
    x = np.exp(1j * w * np.arange(N))
    assert sbndft_power(x, w) == pytest.approx(N ** 2, rel=1e-9)


def test_sbndft_zero_and_domain():
    assert sbndft_power(np.zeros(32), 1.0) == 0
    with pytest.raises(SingularPointError):
        sbndft_power(np.ones(4), math.pi)
    with pytest.raises(ValueError):
        sbndft_power(np.ones(4), 4.0)
    with pytest.raises(LengthError):
        sbndft_power(np.ones(5), 1.0)


@pytest.mark.parametrize("glyph", list(DIGIT_SYMBOLS))
def test_sbndft_on_tone_tracks_dtft(glyph):
    x = synthesize_digit(glyph, 1000)
    for f in symbol_frequencies(glyph):
        w = 2 * math.pi * f / 8192
        exact = abs(oracles.dtft(x.samples, w)) ** 2
        assert sbndft_power(x, w) == pytest.approx(exact, rel=0.05)


# --- DTMF bank ---------------------------------------------------------------

@pytest.mark.parametrize("backend", BACKENDS)
def test_bank_digit_nine(backend):
    est = dtmf_bank(synthesize_digit("9", 1000), backend)
    rows, cols = est.values[:4], est.values[4:]
    assert BANK_FREQS[int(np.argmax(rows))] == 852
    assert BANK_FREQS[4 + int(np.argmax(cols))] == 1477
    assert len(est) == 8 and est.kind == "power" and est.backend == backend


@pytest.mark.parametrize("backend", BACKENDS)
def test_bank_silence_and_empty(backend):
    assert np.all(dtmf_bank(np.zeros(400), backend).values == 0)
    with pytest.raises(LengthError):
        dtmf_bank([], backend)


def test_bank_unknown_backend():
    with pytest.raises(ValueError):
        dtmf_bank(np.ones(10), "fft")


def test_bank_goertzel_records_bins():
    est = dtmf_bank(synthesize_digit("1", 500), "goertzel", N=2048)
    expected = [2 * math.pi * nearest_bin(2 * math.pi * f / 8192, 2048) / 2048 for f in BANK_FREQS]
    np.testing.assert_allclose(est.eval_freqs, expected)


@pytest.mark.parametrize("length", [328, 1000])
@pytest.mark.parametrize("glyph", list(DIGIT_SYMBOLS))
def test_backends_agree_on_strongest_tones(glyph, length):
    x = synthesize_digit(glyph, length)
    winners = set()
    for backend in BACKENDS:
        v = dtmf_bank(x, backend).values
        winners.add((int(np.argmax(v[:4])), int(np.argmax(v[4:]))))
    assert len(winners) == 1


def test_band_peak_bins():
    assert band_peak_bins(synthesize_digit("2", 1000), 2048) == (174, 334)
