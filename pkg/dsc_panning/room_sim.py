"""
Deterministic synthetic room impulse responses following the direct + diffuse decay model.

Each IR has a single-sample direct pulse at t = d / c with amplitude sqrt(P Q / 4 pi) / d, and a
seeded Gaussian tail starting 5 ms after the direct sound, with an exponential envelope decaying
60 dB in rt60. The tail energy is set so that diffuse / direct energy = (d / D_c)^2 exactly.
Early reflections are not modelled.
"""
import logging
from dataclasses import replace
from typing import Dict, Sequence

import numpy as np
import scipy.signal

from .errors import RenderError, ValidationError
from .model import ImpulseResponse, Layout, Loudspeaker, RoomModel

logger = logging.getLogger(__name__)

DIFFUSE_GAP_S = 0.005
DEFAULT_IR_DURATION_S = 1.0
DEFAULT_SAMPLE_RATE = 48000
DEFAULT_SEED = 0


def synth_ir(spk: Loudspeaker, room: RoomModel, sample_rate_hz: float = DEFAULT_SAMPLE_RATE,
             seed: int = DEFAULT_SEED, duration_s: float = DEFAULT_IR_DURATION_S) -> ImpulseResponse:
    if not sample_rate_hz > 0:
        raise ValidationError(f"sample rate must be positive, got {sample_rate_hz}")
    nb_samples = int(round(duration_s * sample_rate_hz))
    direct_index = int(round(sample_rate_hz * spk.distance_m / room.speed_of_sound))
    tail_start = direct_index + int(round(DIFFUSE_GAP_S * sample_rate_hz))
    if tail_start >= nb_samples:
        raise ValidationError(f"IR duration {duration_s} s too short for a speaker at {spk.distance_m} m")

    samples = np.zeros(nb_samples)
    direct_amplitude = np.sqrt(spk.power * spk.directivity / (4. * np.pi)) / spk.distance_m
    samples[direct_index] = direct_amplitude

    diffuse_energy = direct_amplitude ** 2 * (spk.distance_m / room.critical_distance_m) ** 2
    rng = np.random.default_rng(seed)
    tail_time = np.arange(nb_samples - tail_start) / sample_rate_hz
    tail = rng.standard_normal(tail_time.size) * 10. ** (-3. * tail_time / room.rt60_s)
    tail *= np.sqrt(diffuse_energy / np.sum(tail ** 2))
    samples[tail_start:] = tail
    return ImpulseResponse(samples=samples, sample_rate_hz=sample_rate_hz)


def synth_irs(layout: Layout, room: RoomModel, sample_rate_hz: float = DEFAULT_SAMPLE_RATE,
              seed: int = DEFAULT_SEED, duration_s: float = DEFAULT_IR_DURATION_S) -> Dict[str, ImpulseResponse]:
    """One IR per speaker. All speakers share the tail realization of `seed`."""
    return {spk.id: synth_ir(spk, room, sample_rate_hz, seed, duration_s) for spk in layout}


def equidistant_layout(layout: Layout, distance_m: float = None) -> Layout:
    """Same speakers and azimuths, all at `distance_m` (default: the largest distance)."""
    distance_m = float(layout.distances.max()) if distance_m is None else float(distance_m)
    return Layout(speakers=tuple(replace(spk, distance_m=distance_m) for spk in layout))


def simulate_listening(feeds, irs: Sequence[ImpulseResponse], sample_rate_hz: float = None,
                       per_speaker: bool = False) -> np.ndarray:
    """
    Signal at the listening position: sum_i feeds_i * irs_i.

    `feeds` has shape (nb_samples, nb_speakers). With `per_speaker` the individual contributions
    are returned, shape (nb_samples + ir_length - 1, nb_speakers).
    """
    feeds = np.asarray(feeds, dtype="float64")
    if feeds.ndim == 1:
        feeds = feeds[:, None]
    irs = list(irs)
    if feeds.shape[1] != len(irs):
        raise ValidationError(f"{feeds.shape[1]} feeds for {len(irs)} impulse responses")
    rates = {ir.sample_rate_hz for ir in irs}
    if sample_rate_hz is not None:
        rates.add(sample_rate_hz)
    if len(rates) > 1:
        raise RenderError(f"sample rate mismatch between feeds and impulse responses: {sorted(rates)}")

    out_length = feeds.shape[0] + max(ir.num_samples for ir in irs) - 1
    contributions = np.zeros((out_length, len(irs)))
    if feeds.shape[0] > 0:
        for channel, ir in enumerate(irs):
            convolved = scipy.signal.fftconvolve(feeds[:, channel], ir.samples)
            contributions[:convolved.size, channel] = convolved
    if per_speaker:
        return contributions
    return contributions.sum(axis=1)
