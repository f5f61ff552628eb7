"""Test signals usable as object content: impulses, pink noise and pink noise bursts."""
import numpy as np
import scipy.fft

from .errors import ValidationError

DEFAULT_NOISE_LEVEL_DBFS = -20.
BURST_FADE_S = 0.005


def _nb_samples(duration_s, sample_rate_hz):
    nb_samples = int(round(duration_s * sample_rate_hz))
    if nb_samples <= 0:
        raise ValidationError(f"signal duration must cover at least one sample, got {duration_s} s")
    return nb_samples


def impulse(duration_s: float, sample_rate_hz: float, index: int = 0, amplitude: float = 1.) -> np.ndarray:
    signal = np.zeros(_nb_samples(duration_s, sample_rate_hz))
    if not 0 <= index < signal.size:
        raise ValidationError(f"impulse index {index} outside the {signal.size} samples signal")
    signal[index] = amplitude
    return signal


def pink_noise(duration_s: float, sample_rate_hz: float, seed: int = 0,
               level_dbfs: float = DEFAULT_NOISE_LEVEL_DBFS) -> np.ndarray:
    """Seeded white noise shaped by 1/sqrt(f) in the frequency domain, RMS-normalized to `level_dbfs`."""
    nb_samples = _nb_samples(duration_s, sample_rate_hz)
    white = np.random.default_rng(seed).standard_normal(nb_samples)
    spectrum = scipy.fft.rfft(white)
    freqs = scipy.fft.rfftfreq(nb_samples, 1. / sample_rate_hz)
    shaping = np.zeros_like(freqs)
    shaping[1:] = 1. / np.sqrt(freqs[1:])
    pink = scipy.fft.irfft(spectrum * shaping, nb_samples)
    rms = np.sqrt(np.mean(pink ** 2))
    if rms == 0:
        return pink
    return pink * 10 ** (level_dbfs / 20.) / rms


def pink_noise_bursts(duration_s: float, sample_rate_hz: float, burst_s: float = 0.5, gap_s: float = 0.5,
                      seed: int = 0, level_dbfs: float = DEFAULT_NOISE_LEVEL_DBFS) -> np.ndarray:
    """Pink noise gated on/off, with short raised-cosine ramps at each burst edge."""
    noise = pink_noise(duration_s, sample_rate_hz, seed, level_dbfs)
    period = _nb_samples(burst_s + gap_s, sample_rate_hz)
    burst_length = _nb_samples(burst_s, sample_rate_hz)
    fade_length = min(int(round(BURST_FADE_S * sample_rate_hz)), burst_length // 2)

    burst_gate = np.zeros(period)
    burst_gate[:burst_length] = 1.
    if fade_length > 0:
        ramp = 0.5 - 0.5 * np.cos(np.pi * np.arange(fade_length) / fade_length)
        burst_gate[:fade_length] = ramp
        burst_gate[burst_length - fade_length:burst_length] = ramp[::-1]
    gate = np.resize(burst_gate, noise.size)
    return noise * gate
