"""
Domain types shared by the analysis, calibration, panning and rendering code.

Conventions:
    - azimuths in degrees, listener-centric, positive to the left (+30 = left speaker of a stereo pair)
    - distances in meters, delays in seconds
    - levels in dB of a power-like quantity, linear gains are 10 ** (dB / 20)
    - the model is planar, heights are ignored

All types are immutable after construction.
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .errors import PanningError, ProfileError, ValidationError

DEFAULT_SPEED_OF_SOUND = 343.0
DEFAULT_RT60 = 0.4
SCHEMA_VERSION = 1

# Absolute tolerance used when checking the dB identities of a loaded profile:
PROFILE_DB_TOLERANCE = 1e-9


def _readonly_array(values, dtype="float64"):
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class Loudspeaker:
    id: str
    azimuth_deg: float
    distance_m: float
    power: float = 1.0
    directivity: float = 1.0


@dataclass(frozen=True)
class Layout:
    """
    Ordered set of loudspeakers, listener at the origin. Construction does not validate,
    use `validate_layout` / `check_layout` for that.
    """
    speakers: Tuple[Loudspeaker, ...]

    def __post_init__(self):
        object.__setattr__(self, "speakers", tuple(self.speakers))

    def __len__(self):
        return len(self.speakers)

    def __iter__(self):
        return iter(self.speakers)

    @property
    def ids(self) -> List[str]:
        return [spk.id for spk in self.speakers]

    @property
    def azimuths(self) -> np.ndarray:
        return _readonly_array([spk.azimuth_deg for spk in self.speakers])

    @property
    def distances(self) -> np.ndarray:
        return _readonly_array([spk.distance_m for spk in self.speakers])

    def index_of(self, speaker_id: str) -> int:
        try:
            return self.ids.index(speaker_id)
        except ValueError:
            raise ValidationError(f"unknown speaker '{speaker_id}'")

    @property
    def span(self) -> Tuple[float, float]:
        azimuths = self.azimuths
        return float(azimuths.min()), float(azimuths.max())


def validate_layout(layout: Layout) -> List[str]:
    """
    Returns the list of violated layout invariants (empty list when the layout is ok).
    """
    problems = []
    if len(layout.speakers) == 0:
        problems.append("layout has no speakers")
        return problems

    seen = set()
    for spk in layout.speakers:
        if spk.id in seen:
            problems.append(f"duplicate id '{spk.id}'")
        seen.add(spk.id)
        if not spk.distance_m > 0:
            problems.append(f"non-positive distance for speaker '{spk.id}': {spk.distance_m}")
        if not spk.power > 0:
            problems.append(f"non-positive power for speaker '{spk.id}': {spk.power}")
        if not spk.directivity > 0:
            problems.append(f"non-positive directivity for speaker '{spk.id}': {spk.directivity}")
        if not -180. <= spk.azimuth_deg < 180.:
            problems.append(f"azimuth of speaker '{spk.id}' outside [-180, 180): {spk.azimuth_deg}")

    # Pairwise panning needs the speakers ordered by azimuth (either direction):
    if len(layout.speakers) > 1:
        steps = np.diff(layout.azimuths)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            problems.append("unordered pair azimuths: speaker azimuths must be strictly monotonic")
    return problems


def check_layout(layout: Layout) -> Layout:
    problems = validate_layout(layout)
    if problems:
        raise ValidationError("invalid layout: " + "; ".join(problems))
    return layout


@dataclass(frozen=True)
class RoomModel:
    critical_distance_m: float
    speed_of_sound: float = DEFAULT_SPEED_OF_SOUND
    rt60_s: float = DEFAULT_RT60

    def __post_init__(self):
        for name in ["critical_distance_m", "speed_of_sound", "rt60_s"]:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValidationError(f"room {name} must be positive, got {value}")


@dataclass(frozen=True, eq=False)
class ImpulseResponse:
    samples: np.ndarray
    sample_rate_hz: float
    onset_index: Optional[int] = None

    def __post_init__(self):
        samples = np.array(self.samples, dtype="float64")
        if samples.ndim != 1:
            raise ValidationError(f"impulse response must be mono, got shape {samples.shape}")
        if samples.size == 0:
            raise ValidationError("impulse response is empty")
        if not self.sample_rate_hz > 0:
            raise ValidationError(f"sample rate must be positive, got {self.sample_rate_hz}")
        if self.onset_index is not None and not 0 <= self.onset_index < samples.size:
            raise ValidationError(f"onset index {self.onset_index} out of bounds for {samples.size} samples")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def num_samples(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def with_onset(self, onset_index: int) -> "ImpulseResponse":
        return replace(self, onset_index=int(onset_index))

    def with_samples(self, samples) -> "ImpulseResponse":
        return replace(self, samples=samples)


@dataclass(frozen=True)
class SpeakerCalibration:
    id: str
    level_db: float
    direct_level_db: float
    loudness_comp_db: float
    dsc_comp_db: float
    delay_s: float


@dataclass(frozen=True)
class CalibrationProfile:
    """
    Per-speaker FRC and DSC calibration terms. The compensation terms must satisfy
        loudness_comp_db = l_ref_db - level_db
        dsc_comp_db = l_ref_ds_db - direct_level_db
    and delays are non-negative with the most distant speaker at zero.
    """
    speakers: Tuple[SpeakerCalibration, ...]
    l_ref_db: float
    l_ref_ds_db: float
    d_ref_m: float
    speed_of_sound: float = DEFAULT_SPEED_OF_SOUND

    def __post_init__(self):
        object.__setattr__(self, "speakers", tuple(self.speakers))
        if len(self.speakers) == 0:
            raise ProfileError("calibration profile has no speakers")
        ids = [spk.id for spk in self.speakers]
        if len(set(ids)) != len(ids):
            raise ProfileError(f"duplicate speaker ids in profile: {ids}")
        for spk in self.speakers:
            values = [spk.level_db, spk.direct_level_db, spk.loudness_comp_db, spk.dsc_comp_db, spk.delay_s]
            if not all(math.isfinite(v) for v in values):
                raise ProfileError(f"non-finite calibration value for speaker '{spk.id}'")
            if abs(spk.loudness_comp_db - (self.l_ref_db - spk.level_db)) > PROFILE_DB_TOLERANCE:
                raise ProfileError(f"loudness compensation of '{spk.id}' is not l_ref - level")
            if abs(spk.dsc_comp_db - (self.l_ref_ds_db - spk.direct_level_db)) > PROFILE_DB_TOLERANCE:
                raise ProfileError(f"direct sound compensation of '{spk.id}' is not l_ref_ds - direct_level")
            if spk.delay_s < 0:
                raise ProfileError(f"negative delay for speaker '{spk.id}'")
        if min(spk.delay_s for spk in self.speakers) > 1e-12:
            raise ProfileError("at least one speaker must have zero delay")

    @classmethod
    def from_levels(cls, ids: Sequence[str], levels_db, direct_levels_db, delays_s,
                    l_ref_db: float, l_ref_ds_db: float, d_ref_m: float,
                    speed_of_sound: float = DEFAULT_SPEED_OF_SOUND) -> "CalibrationProfile":
        assert len(ids) == len(levels_db) == len(direct_levels_db) == len(delays_s)
        speakers = [
            SpeakerCalibration(id=spk_id,
                               level_db=float(level),
                               direct_level_db=float(direct_level),
                               loudness_comp_db=float(l_ref_db) - float(level),
                               dsc_comp_db=float(l_ref_ds_db) - float(direct_level),
                               delay_s=float(delay))
            for spk_id, level, direct_level, delay in zip(ids, levels_db, direct_levels_db, delays_s)
        ]
        return cls(speakers=tuple(speakers), l_ref_db=float(l_ref_db), l_ref_ds_db=float(l_ref_ds_db),
                   d_ref_m=float(d_ref_m), speed_of_sound=float(speed_of_sound))

    @property
    def ids(self) -> List[str]:
        return [spk.id for spk in self.speakers]

    @property
    def level_db(self) -> np.ndarray:
        return _readonly_array([spk.level_db for spk in self.speakers])

    @property
    def direct_level_db(self) -> np.ndarray:
        return _readonly_array([spk.direct_level_db for spk in self.speakers])

    @property
    def loudness_comp_db(self) -> np.ndarray:
        return _readonly_array([spk.loudness_comp_db for spk in self.speakers])

    @property
    def dsc_comp_db(self) -> np.ndarray:
        return _readonly_array([spk.dsc_comp_db for spk in self.speakers])

    @property
    def delays_s(self) -> np.ndarray:
        return _readonly_array([spk.delay_s for spk in self.speakers])

    def check_covers(self, layout: Layout) -> "CalibrationProfile":
        """The profile must list exactly the layout speakers, in layout order."""
        if self.ids != layout.ids:
            raise ProfileError(f"profile/layout mismatch: profile speakers {self.ids}, layout speakers {layout.ids}")
        return self

    def with_references(self, l_ref_db: float = None, l_ref_ds_db: float = None) -> "CalibrationProfile":
        return CalibrationProfile.from_levels(
            self.ids, self.level_db, self.direct_level_db, self.delays_s,
            l_ref_db=self.l_ref_db if l_ref_db is None else l_ref_db,
            l_ref_ds_db=self.l_ref_ds_db if l_ref_ds_db is None else l_ref_ds_db,
            d_ref_m=self.d_ref_m, speed_of_sound=self.speed_of_sound)

    def to_frame(self) -> pd.DataFrame:
        table = pd.DataFrame({
            "L_dB": self.level_db,
            "L_DS_dB": self.direct_level_db,
            "dL_dB": self.loudness_comp_db,
            "dL_DS_dB": self.dsc_comp_db,
            "dt_ms": self.delays_s * 1e3,
        }, index=pd.Index(self.ids, name="speaker"))
        return table


class GainStage(Enum):
    RAW = "raw"
    DSC_MODIFIED = "dsc_modified"
    LOUDNESS_CORRECTED = "loudness_corrected"
    COMBINED = "combined"


class RenderMode(Enum):
    FRC = "frc"
    DSC = "dsc"
    DSC_NO_LC = "dsc-no-lc"


# Object-stage gains each rendering mode feeds to the FRC chain:
MODE_STAGES = {
    RenderMode.FRC: GainStage.RAW,
    RenderMode.DSC: GainStage.LOUDNESS_CORRECTED,
    RenderMode.DSC_NO_LC: GainStage.DSC_MODIFIED,
}


@dataclass(frozen=True, eq=False)
class GainVector:
    stage: GainStage
    gains: np.ndarray
    p_norm: float = 2.0

    def __post_init__(self):
        gains = np.array(self.gains, dtype="float64")
        if gains.ndim != 1 or gains.size == 0:
            raise PanningError(f"gain vector must be a non-empty 1D sequence, got shape {gains.shape}")
        if not np.all(np.isfinite(gains)):
            raise PanningError(f"non-finite gains: {gains}")
        if np.any(gains < 0):
            raise PanningError(f"negative gains: {gains}")
        if not self.p_norm > 0:
            raise PanningError(f"p must be positive, got {self.p_norm}")
        gains.setflags(write=False)
        object.__setattr__(self, "gains", gains)

    def __len__(self):
        return self.gains.size

    def norm(self, p: float = None) -> float:
        p = self.p_norm if p is None else p
        return float(np.sum(np.abs(self.gains) ** p) ** (1. / p))


@dataclass(frozen=True, eq=False)
class SourceObject:
    """
    Mono source. The trajectory is a sequence of (start_time_s, azimuth_deg) segments, the first
    one starting at 0; a static object has a single segment.
    """
    id: str
    audio: np.ndarray
    sample_rate_hz: float
    trajectory: Tuple[Tuple[float, float], ...] = field(default=((0.0, 0.0),))

    def __post_init__(self):
        audio = np.array(self.audio, dtype="float64")
        if audio.ndim != 1:
            raise ValidationError(f"object '{self.id}' audio must be mono, got shape {audio.shape}")
        audio.setflags(write=False)
        object.__setattr__(self, "audio", audio)

        trajectory = tuple((float(t), float(az)) for t, az in self.trajectory)
        if len(trajectory) == 0 or trajectory[0][0] != 0.:
            raise ValidationError(f"trajectory of object '{self.id}' must start at time 0")
        times = [t for t, _ in trajectory]
        if any(t1 <= t0 for t0, t1 in zip(times[:-1], times[1:])):
            raise ValidationError(f"trajectory times of object '{self.id}' must be strictly increasing")
        object.__setattr__(self, "trajectory", trajectory)

    @classmethod
    def static(cls, id: str, audio, sample_rate_hz: float, azimuth_deg: float) -> "SourceObject":
        return cls(id=id, audio=audio, sample_rate_hz=sample_rate_hz, trajectory=((0.0, float(azimuth_deg)),))

    @property
    def is_static(self) -> bool:
        return len(self.trajectory) == 1

    @property
    def azimuth_deg(self) -> float:
        return self.trajectory[0][1]

    @property
    def num_samples(self) -> int:
        return self.audio.size

    def scaled(self, factor: float) -> "SourceObject":
        return replace(self, audio=self.audio * factor)


@dataclass(frozen=True)
class Scene:
    objects: Tuple[SourceObject, ...]
    sample_rate_hz: float

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        if not self.sample_rate_hz > 0:
            raise ValidationError(f"scene sample rate must be positive, got {self.sample_rate_hz}")

    @property
    def num_samples(self) -> int:
        return max([obj.num_samples for obj in self.objects], default=0)

    def scaled(self, factor: float) -> "Scene":
        return Scene(objects=tuple(obj.scaled(factor) for obj in self.objects), sample_rate_hz=self.sample_rate_hz)


def near_far_stereo_layout(near_distance_m: float = 1.5, far_distance_m: float = 3.0) -> Layout:
    """Non-equidistant stereo pair: left speaker (+30 deg) closer than the right one (-30 deg)."""
    return Layout(speakers=(
        Loudspeaker(id="L", azimuth_deg=30., distance_m=near_distance_m),
        Loudspeaker(id="R", azimuth_deg=-30., distance_m=far_distance_m),
    ))
