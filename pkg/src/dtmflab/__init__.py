"""DTMF signal laboratory: synthesis, channel impairments, spectral decoding."""

__version__ = "0.1.0"

from .channel import (NoiseSpec, TimingJitterSpec, UniformJitter, add_awgn,
                      measured_snr, realize_timing, theoretical_error_rate)
from .decoder import (DecodeReport, SegmentationConfig, classify_frame,
                      decode_number, digit_error_rate, segment)
from .errors import DtmfError
from .keypad import (DtmfSymbol, RadianPair, SignalBuffer, TimingProfile,
                     radian_pair, symbol_frequencies, synthesize_digit,
                     synthesize_sequence)
from .spectral import (SpectrumEstimate, SubbandPair, dft_uniform, dtft_at,
                       dtmf_bank, goertzel, goertzel_power, ndft_point,
                       sbndft_power, subband_decompose, subband_reconstruct)
