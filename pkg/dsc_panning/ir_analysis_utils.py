"""
Level estimation from impulse responses and from the distance-decay room model.

    full level     L    = 10 log10( 1/T * sum |(h * w)(t)|^2 )          over the full IR duration T
    direct level   L_DS = same with h replaced by its frequency-dependent truncation h_DS
    model levels        = 10 log10( P Q / (4 pi d^2) ) and 10 log10( P Q / (4 pi) (1/d^2 + 1/D_c^2) )
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
import scipy.fft

from .errors import AnalysisError, ValidationError
from .filter_utils import WeightingSpec, band_upper_edges, octave_band_centers, weighting_magnitude
from .model import ImpulseResponse, Loudspeaker, RoomModel

logger = logging.getLogger(__name__)

# The onset is the first sample within this many dB of the global peak magnitude:
ONSET_THRESHOLD_DB = 20.


@dataclass(frozen=True)
class FdtParams:
    """
    Frequency-dependent truncation parameters. The band centered at f is truncated
    max(min_tau_s, tau_s * f_low_hz / f) after the onset. The fade closing a window spans
    fade_fraction of its length.
    """
    tau_s: float = 0.020
    f_low_hz: float = 50.
    f_high_hz: float = 16000.
    bands_per_octave: int = 3
    min_tau_s: float = 0.001
    fade_fraction: float = 0.25

    def __post_init__(self):
        if not self.min_tau_s > 0:
            raise ValidationError(f"min_tau_s must be positive, got {self.min_tau_s}")
        if not self.tau_s >= self.min_tau_s:
            raise ValidationError(f"tau_s ({self.tau_s}) must be >= min_tau_s ({self.min_tau_s})")
        if not 0 < self.f_low_hz < self.f_high_hz:
            raise ValidationError(f"need 0 < f_low_hz < f_high_hz, got {self.f_low_hz}, {self.f_high_hz}")
        if int(self.bands_per_octave) != self.bands_per_octave or self.bands_per_octave < 1:
            raise ValidationError(f"bands_per_octave must be an integer >= 1, got {self.bands_per_octave}")
        if not 0 < self.fade_fraction <= 1:
            raise ValidationError(f"fade_fraction must be in (0, 1], got {self.fade_fraction}")

    def band_centers(self) -> np.ndarray:
        return octave_band_centers(self.f_low_hz, self.f_high_hz, int(self.bands_per_octave))

    def band_taus(self) -> np.ndarray:
        return np.maximum(self.min_tau_s, self.tau_s * self.f_low_hz / self.band_centers())


def _fft_size(nb_samples):
    # Zero-padding to twice the length keeps circular wrap-around away from the IR:
    return scipy.fft.next_fast_len(2 * nb_samples, real=True)


def _check_not_silent(ir):
    if not np.any(ir.samples != 0):
        raise AnalysisError("silent response: impulse response is all zeros")


def detect_onset(ir: ImpulseResponse, threshold_db: float = ONSET_THRESHOLD_DB) -> int:
    """Index of the first sample whose magnitude is within `threshold_db` of the global peak."""
    _check_not_silent(ir)
    magnitude = np.abs(ir.samples)
    threshold = magnitude.max() * 10 ** (-threshold_db / 20.)
    return int(np.argmax(magnitude >= threshold))


def with_detected_onset(ir: ImpulseResponse) -> ImpulseResponse:
    if ir.onset_index is not None:
        return ir
    return ir.with_onset(detect_onset(ir))


def apply_weighting(samples, sample_rate_hz: float, weighting: WeightingSpec) -> np.ndarray:
    """
    Zero-phase magnitude filtering. The output is the full zero-padded circular result, so its
    energy is the complete weighted energy of the input.
    """
    samples = np.asarray(samples, dtype="float64")
    if not weighting.enabled:
        return samples
    nfft = _fft_size(samples.size)
    spectrum = scipy.fft.rfft(samples, nfft)
    freqs = scipy.fft.rfftfreq(nfft, 1. / sample_rate_hz)
    return scipy.fft.irfft(spectrum * weighting_magnitude(freqs, weighting), nfft)


def weighted_energy(samples, sample_rate_hz: float, weighting: WeightingSpec = WeightingSpec()) -> float:
    filtered = apply_weighting(samples, sample_rate_hz, weighting)
    return float(np.sum(filtered ** 2))


def level_from_ir(ir: ImpulseResponse, weighting: WeightingSpec = WeightingSpec()) -> float:
    _check_not_silent(ir)
    energy = weighted_energy(ir.samples, ir.sample_rate_hz, weighting)
    if not energy > 0:
        raise AnalysisError(f"impulse response has no energy after {weighting.name} weighting")
    return 10. * math.log10(energy / ir.num_samples)


def fade_tapers(radius):
    """
    Rising and falling halves of the fade around a segment boundary, sampled at t + 0.5 for
    t = 0 .. radius - 1. rising ** 2 + falling ** 2 = 1 and the squared tapers are raised-cosine
    fades, so folding with them is a rotation.
    """
    phase = (np.arange(radius) + 0.5) / radius
    return np.sin(np.pi / 4 * (1 + phase)), np.sin(np.pi / 4 * (1 - phase))


def _fold(samples, boundary, radius, inverse=False):
    if radius == 0:
        return
    rising, falling = fade_tapers(radius)
    after = samples[boundary:boundary + radius].copy()
    before = samples[boundary - radius:boundary][::-1].copy()
    if inverse:
        samples[boundary:boundary + radius] = rising * after - falling * before
        samples[boundary - radius:boundary] = (falling * after + rising * before)[::-1]
    else:
        samples[boundary:boundary + radius] = rising * after + falling * before
        samples[boundary - radius:boundary] = (rising * before - falling * after)[::-1]


def fdt_segments(ir: ImpulseResponse, params: FdtParams = FdtParams()):
    """
    Time segments of the truncation, as a list of (start, stop, cutoff_hz, fade_radius).

    The first segment holds everything up to the shortest band window and keeps every frequency,
    the last one starts at the longest window (tau_s) and keeps nothing. In between, a segment
    ending at time t keeps the bands whose window is still open at t. Band windows closing too
    close to each other are merged so that each segment is long enough to hold its lowest band.
    `fade_radius` is the half-length of the fade centered on the segment start.
    """
    fs = ir.sample_rate_hz
    onset = ir.onset_index
    window_ends = onset + np.round(params.band_taus() * fs).astype(int)
    upper_edges = band_upper_edges(params.band_centers())

    def cutoff(end):
        open_bands = window_ends >= end
        return float(upper_edges[open_bands].max()) if open_bands.any() else 0.

    cuts = np.unique(window_ends)
    fade_ends = [int(cuts[0])]
    for cut in cuts[1:]:
        # Lowest frequency a segment of this length resolves:
        lowest_hz = fs / (4. * (cut - fade_ends[-1]))
        if lowest_hz < cutoff(cut) or cut == cuts[-1]:
            fade_ends.append(int(cut))

    segments = []
    start, radius, previous_end = 0, 0, 0
    for i, end in enumerate(fade_ends):
        next_radius = min(int(params.fade_fraction * (end - onset) / 2), (end - previous_end) // 2)
        segments.append((start, end - next_radius, math.inf if i == 0 else cutoff(end), radius))
        start, radius, previous_end = end - next_radius, next_radius, end
    segments.append((start, ir.num_samples, 0., radius))
    return segments


def fdt_truncate(ir: ImpulseResponse, params: FdtParams = FdtParams()) -> ImpulseResponse:
    """
    Frequency-dependent truncation of an impulse response.

    The IR is cut into time segments (see `fdt_segments`), neighbouring segments overlapping
    through folded sine tapers. Each segment is expanded on a DCT-IV basis and only the
    coefficients below the segment's cutoff are kept:

        h_DS = U^T K U h

    with U orthogonal (folds, then one DCT-IV per segment) and K a 0/1 selection. This is an
    orthogonal projection: it never adds energy, truncating twice gives the same response, and an
    IR that ends before the shortest band window (e.g. an anechoic spike) is returned unchanged.
    Nothing is left from tau_s after the onset on.
    """
    if ir.onset_index is None:
        raise AnalysisError("onset missing: detect the onset before truncating")
    fs = ir.sample_rate_hz
    tau_samples = int(math.ceil(params.tau_s * fs))
    if ir.onset_index + tau_samples > ir.num_samples:
        raise AnalysisError(f"truncation time {params.tau_s * 1e3:.1f} ms exceeds the impulse response "
                            f"length after the onset ({(ir.num_samples - ir.onset_index) / fs * 1e3:.1f} ms)")

    segments = fdt_segments(ir, params)
    samples = ir.samples.copy()
    for start, _, _, radius in segments[1:]:
        _fold(samples, start, radius)
    for start, stop, cutoff_hz, _ in segments:
        if stop <= start or cutoff_hz == math.inf:
            continue
        coefficients = scipy.fft.dct(samples[start:stop], type=4, norm="ortho")
        freqs = (np.arange(stop - start) + 0.5) * fs / (2. * (stop - start))
        coefficients[freqs >= cutoff_hz] = 0.
        samples[start:stop] = scipy.fft.idct(coefficients, type=4, norm="ortho")
    for start, _, _, radius in segments[1:]:
        _fold(samples, start, radius, inverse=True)
    return ir.with_samples(samples)



def direct_level_from_ir(ir: ImpulseResponse, params: FdtParams = FdtParams(),
                         weighting: WeightingSpec = WeightingSpec()) -> float:
    # The truncated IR keeps the original length, so T is the original duration:
    return level_from_ir(fdt_truncate(with_detected_onset(ir), params), weighting)


def model_direct_level(spk: Loudspeaker) -> float:
    return 10. * math.log10(spk.power * spk.directivity / (4. * math.pi * spk.distance_m ** 2))


def model_total_level(spk: Loudspeaker, room: RoomModel) -> float:
    return 10. * math.log10(spk.power * spk.directivity / (4. * math.pi)
                            * (1. / spk.distance_m ** 2 + 1. / room.critical_distance_m ** 2))


def estimate_critical_distance(distance_m: float, drr_db: float) -> float:
    """Critical distance from a direct-to-reverberant ratio measured at a known distance."""
    return distance_m * 10 ** (drr_db / 20.)


def analyze_ir(ir: ImpulseResponse, params: FdtParams = FdtParams(),
               weighting: WeightingSpec = WeightingSpec()) -> pd.Series:
    ir = with_detected_onset(ir)
    truncated = fdt_truncate(ir, params)
    full_energy = weighted_energy(ir.samples, ir.sample_rate_hz, weighting)
    direct_energy = weighted_energy(truncated.samples, ir.sample_rate_hz, weighting)
    if full_energy - direct_energy > 0:
        drr_db = 10. * math.log10(direct_energy / (full_energy - direct_energy))
    else:
        logger.warning("No reverberant energy left after truncation, DRR is infinite")
        drr_db = math.inf
    return pd.Series({
        "onset_index": ir.onset_index,
        "onset_ms": ir.onset_index / ir.sample_rate_hz * 1e3,
        "L_dB": level_from_ir(ir, weighting),
        "L_DS_dB": level_from_ir(truncated, weighting),
        "DRR_dB": drr_db,
    })
