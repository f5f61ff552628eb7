"""
Render-at-playback-time object renderer.

Per object the panning stage of the chosen mode is applied (FRC: normalized pan, DSC: DSC gains
with loudness correction, DSC_NO_LC: DSC gains only), objects are mixed per speaker, then every
speaker feed goes through its FRC gain 10^(dL_i / 20) and its alignment delay round(dt_i * fs).

Offline rendering and block streaming share `process_block`. Gains are a function of the absolute
sample index, so the output does not depend on the block partition.
"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Union

import numpy as np

from .calibration import delay_samples, frc_gains
from .errors import RenderError, ValidationError
from .model import CalibrationProfile, Layout, RenderMode, Scene, SourceObject, check_layout
from .panning_utils import DEFAULT_P, mode_gains

logger = logging.getLogger(__name__)

DEFAULT_BLOCK_SIZE = 256
CLIP_LEVEL = 1.

CANONICAL_LAYOUTS = {
    "mono": (0.,),
    "stereo": (30., -30.),
    "lcr": (30., 0., -30.),
}


@dataclass(frozen=True)
class RendererConfig:
    block_size: int = DEFAULT_BLOCK_SIZE
    # Linear gain ramp on direction changes, in samples, independent of block_size
    crossfade_samples: int = DEFAULT_BLOCK_SIZE
    p: float = DEFAULT_P

    def __post_init__(self):
        if int(self.block_size) != self.block_size or self.block_size < 1:
            raise ValidationError(f"block size must be a positive integer, got {self.block_size}")
        if int(self.crossfade_samples) != self.crossfade_samples or self.crossfade_samples < 1:
            raise ValidationError(f"crossfade must be a positive number of samples, got {self.crossfade_samples}")
        if not self.p > 0:
            raise ValidationError(f"p must be positive, got {self.p}")


class GainSchedule:
    """
    Piecewise-constant object gains with linear crossfades. Segment k starts at sample starts[k]
    from the gain reached at that time and ramps to targets[k] over `crossfade` samples.
    """

    def __init__(self, starts, targets, crossfade):
        self.starts = np.asarray(starts, dtype="int64")
        self.targets = np.asarray(targets, dtype="float64")
        self.crossfade = int(crossfade)
        self.initial = np.empty_like(self.targets)
        self.initial[0] = self.targets[0]
        for k in range(1, len(self.starts)):
            progress = min(1., (self.starts[k] - self.starts[k - 1]) / self.crossfade)
            self.initial[k] = self.initial[k - 1] + (self.targets[k - 1] - self.initial[k - 1]) * progress

    @classmethod
    def for_object(cls, obj: SourceObject, layout: Layout, profile: CalibrationProfile, mode: RenderMode,
                   config: RendererConfig) -> "GainSchedule":
        starts = [int(round(start_s * obj.sample_rate_hz)) for start_s, _ in obj.trajectory]
        targets = [mode_gains(azimuth, layout, profile, mode, config.p).gains for _, azimuth in obj.trajectory]
        return cls(starts, targets, config.crossfade_samples)

    def gains_at(self, sample_indices) -> np.ndarray:
        """Gains for absolute sample indices, shape (nb_indices, nb_speakers)."""
        sample_indices = np.asarray(sample_indices, dtype="int64")
        if len(self.starts) == 1:
            return np.broadcast_to(self.targets[0], (sample_indices.size, self.targets.shape[1]))
        segment = np.searchsorted(self.starts, sample_indices, side="right") - 1
        segment = np.maximum(segment, 0)
        elapsed = sample_indices - self.starts[segment]
        progress = np.clip(elapsed / self.crossfade, 0., 1.)[:, None]
        # First segment has no ramp: initial == target
        return self.initial[segment] + (self.targets[segment] - self.initial[segment]) * progress


class RenderState:
    """Single-owner streaming state: object gain schedules, sample position and delay lines."""

    def __init__(self, scene: Scene, layout: Layout, profile: CalibrationProfile, mode: RenderMode,
                 config: RendererConfig = RendererConfig(), block_size: int = None):
        check_layout(layout)
        profile.check_covers(layout)
        check_scene(scene)
        self.scene = scene
        self.mode = mode
        self.block_size = config.block_size if block_size is None else int(block_size)
        assert self.block_size >= 1
        self.nb_channels = len(layout)
        self.position = 0
        self.frc_gains = frc_gains(profile)
        self.delays = delay_samples(profile, scene.sample_rate_hz)
        self.latency = int(self.delays.max())
        self._history = np.zeros((self.latency, self.nb_channels))
        self._schedules = [GainSchedule.for_object(obj, layout, profile, mode, config) for obj in scene.objects]


def check_scene(scene: Scene) -> Scene:
    for obj in scene.objects:
        if obj.sample_rate_hz != scene.sample_rate_hz:
            raise RenderError(f"sample rate mismatch: object '{obj.id}' at {obj.sample_rate_hz} Hz, "
                              f"scene at {scene.sample_rate_hz} Hz")
    return scene


def process_block(state: RenderState, input_blocks: Sequence[np.ndarray]) -> np.ndarray:
    """
    Renders one block. `input_blocks` holds one mono block per scene object (zeros once an object
    has ended); returns the speaker feeds, shape (block_size, nb_speakers).
    """
    if len(input_blocks) != len(state._schedules):
        raise RenderError(f"got {len(input_blocks)} input blocks for {len(state._schedules)} objects")
    block_size = state.block_size
    sample_indices = state.position + np.arange(block_size)

    mix = np.zeros((block_size, state.nb_channels))
    for block, schedule in zip(input_blocks, state._schedules):
        block = np.asarray(block, dtype="float64")
        if block.shape != (block_size,):
            raise RenderError(f"input block of shape {block.shape}, expected ({block_size},)")
        mix += block[:, None] * schedule.gains_at(sample_indices)
    mix *= state.frc_gains[None, :]

    if state.latency > 0:
        buffered = np.concatenate([state._history, mix])
        out = np.empty_like(mix)
        for channel, delay in enumerate(state.delays):
            start = state.latency - delay
            out[:, channel] = buffered[start:start + block_size, channel]
        state._history = buffered[-state.latency:]
    else:
        out = mix
    state.position += block_size
    return out


def _padded_audio(obj, nb_samples):
    padded = np.zeros(nb_samples)
    padded[:min(obj.num_samples, nb_samples)] = obj.audio[:nb_samples]
    return padded


def _warn_on_clipping(feeds):
    if feeds.size and np.max(np.abs(feeds)) > CLIP_LEVEL:
        logger.warning("Speaker feeds clip: peak %.2f dBFS", 20. * np.log10(np.max(np.abs(feeds))))


def render(scene: Scene, layout: Layout, profile: CalibrationProfile, mode: RenderMode,
           config: RendererConfig = RendererConfig()) -> np.ndarray:
    """Offline render, shape (scene length + max delay, nb_speakers), channels in layout order."""
    profile.check_covers(layout)
    nb_samples = scene.num_samples + int(delay_samples(profile, scene.sample_rate_hz).max())
    if nb_samples == 0:
        return np.zeros((0, len(layout)))
    state = RenderState(scene, layout, profile, mode, config, block_size=nb_samples)
    feeds = process_block(state, [_padded_audio(obj, nb_samples) for obj in scene.objects])
    _warn_on_clipping(feeds)
    return feeds


def render_streaming(scene: Scene, layout: Layout, profile: CalibrationProfile, mode: RenderMode,
                     config: RendererConfig = RendererConfig()) -> np.ndarray:
    """Same output as `render`, produced block by block."""
    state = RenderState(scene, layout, profile, mode, config)
    nb_samples = scene.num_samples + state.latency
    nb_blocks = -(-nb_samples // state.block_size)
    padded = [_padded_audio(obj, nb_blocks * state.block_size) for obj in scene.objects]
    blocks = []
    for block_index in range(nb_blocks):
        block_slice = slice(block_index * state.block_size, (block_index + 1) * state.block_size)
        blocks.append(process_block(state, [audio[block_slice] for audio in padded]))
    if not blocks:
        return np.zeros((0, len(layout)))
    feeds = np.concatenate(blocks)[:nb_samples]
    _warn_on_clipping(feeds)
    return feeds


def channel_bed_to_scene(channels, sample_rate_hz: float,
                         canonical_layout: Union[str, Sequence[float]] = "stereo",
                         ids: List[str] = None) -> Scene:
    """Each bed channel becomes a static object at its canonical azimuth."""
    channels = np.asarray(channels, dtype="float64")
    if channels.ndim == 1:
        channels = channels[:, None]
    if isinstance(canonical_layout, str):
        if canonical_layout not in CANONICAL_LAYOUTS:
            raise ValidationError(f"unknown canonical layout '{canonical_layout}', "
                                  f"expected one of {list(CANONICAL_LAYOUTS)}")
        azimuths = CANONICAL_LAYOUTS[canonical_layout]
    else:
        azimuths = tuple(float(az) for az in canonical_layout)
    if channels.shape[1] != len(azimuths):
        raise ValidationError(f"channel count mismatch: {channels.shape[1]} channels for a "
                              f"{len(azimuths)}-channel canonical layout")
    ids = [f"bed_{index}" for index in range(len(azimuths))] if ids is None else list(ids)
    objects = tuple(SourceObject.static(obj_id, channels[:, index], sample_rate_hz, azimuth)
                    for index, (obj_id, azimuth) in enumerate(zip(ids, azimuths)))
    return Scene(objects=objects, sample_rate_hz=sample_rate_hz)
