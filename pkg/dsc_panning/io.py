import json
import logging
import os
from typing import Dict, Optional

import numpy as np
import pandas as pd
import soundfile as sf

from . import signals
from .errors import AnalysisError, ProfileError, ValidationError
from .model import (SCHEMA_VERSION, CalibrationProfile, ImpulseResponse, Layout, Loudspeaker, RoomModel,
                    Scene, SourceObject, SpeakerCalibration, check_layout)
from .renderer import channel_bed_to_scene

logger = logging.getLogger(__name__)

SPEAKER_COLUMNS = ["id", "azimuth_deg", "distance_m", "power", "directivity"]
PROFILE_SPEAKER_FIELDS = ["id", "level_db", "direct_level_db", "loudness_comp_db", "dsc_comp_db", "delay_s"]

SIGNAL_GENERATORS = {
    "impulse": signals.impulse,
    "pink_noise": signals.pink_noise,
    "pink_noise_bursts": signals.pink_noise_bursts,
}


def _read_json(path):
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path} is not valid JSON: {e}")
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: expected a JSON object at top level")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ValidationError(f"{path}: unsupported schema_version {version}, expected {SCHEMA_VERSION}")
    return doc


def _write_json(doc, path):
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


# ----------------------------
# Layout
# ----------------------------
def layout_from_dict(doc: dict) -> Layout:
    if not doc.get("speakers"):
        raise ValidationError("layout has no speakers")
    speakers = pd.DataFrame(doc["speakers"])
    missing = [col for col in ["id", "azimuth_deg", "distance_m"] if col not in speakers.columns]
    if missing:
        raise ValidationError(f"layout speakers miss the fields {missing}")
    for col in ["power", "directivity"]:
        if col not in speakers.columns:
            speakers[col] = 1.
        speakers[col] = speakers[col].fillna(1.)
    # Reorder:
    speakers = speakers[SPEAKER_COLUMNS]

    layout = Layout(speakers=tuple(
        Loudspeaker(id=str(row.id), azimuth_deg=float(row.azimuth_deg), distance_m=float(row.distance_m),
                    power=float(row.power), directivity=float(row.directivity))
        for row in speakers.itertuples(index=False)
    ))
    return check_layout(layout)


def room_from_dict(doc: dict) -> Optional[RoomModel]:
    room = doc.get("room")
    if room is None:
        return None
    try:
        return RoomModel(**room)
    except TypeError as e:
        raise ValidationError(f"invalid room block: {e}")


def layout_to_dict(layout: Layout, room: RoomModel = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "speakers": [{col: getattr(spk, col) for col in SPEAKER_COLUMNS} for spk in layout],
    }
    if room is not None:
        doc["room"] = {
            "critical_distance_m": room.critical_distance_m,
            "speed_of_sound": room.speed_of_sound,
            "rt60_s": room.rt60_s,
        }
    return doc


def load_layout(layout_json_path) -> Layout:
    return layout_from_dict(_read_json(layout_json_path))


def load_room(layout_json_path) -> Optional[RoomModel]:
    """Optional "room" block stored next to the speakers of a layout document."""
    return room_from_dict(_read_json(layout_json_path))


def save_layout(layout: Layout, path, room: RoomModel = None):
    _write_json(layout_to_dict(layout, room), path)


# ----------------------------
# Calibration profile
# ----------------------------
def profile_to_dict(profile: CalibrationProfile) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "l_ref_db": profile.l_ref_db,
        "l_ref_ds_db": profile.l_ref_ds_db,
        "d_ref_m": profile.d_ref_m,
        "speed_of_sound": profile.speed_of_sound,
        "speakers": [{name: getattr(spk, name) for name in PROFILE_SPEAKER_FIELDS} for spk in profile.speakers],
    }


def profile_from_dict(doc: dict) -> CalibrationProfile:
    try:
        speakers = tuple(SpeakerCalibration(**{name: record[name] for name in PROFILE_SPEAKER_FIELDS})
                         for record in doc["speakers"])
        return CalibrationProfile(speakers=speakers,
                                  l_ref_db=doc["l_ref_db"],
                                  l_ref_ds_db=doc["l_ref_ds_db"],
                                  d_ref_m=doc["d_ref_m"],
                                  speed_of_sound=doc["speed_of_sound"])
    except KeyError as e:
        raise ProfileError(f"calibration profile misses the field {e}")


def save_profile(profile: CalibrationProfile, path):
    _write_json(profile_to_dict(profile), path)


def load_profile(profile_json_path) -> CalibrationProfile:
    return profile_from_dict(_read_json(profile_json_path))


# ----------------------------
# WAV files
# ----------------------------
def read_wav(wav_path):
    """Returns (samples of shape (nb_samples, nb_channels), sample rate)."""
    data, sample_rate = sf.read(wav_path, dtype="float64", always_2d=True)
    return data, float(sample_rate)


def write_wav(path, data, sample_rate_hz: float):
    """Float32 WAV, one column per channel."""
    sf.write(path, np.asarray(data, dtype="float64"), int(round(sample_rate_hz)), subtype="FLOAT")


def read_ir(ir_wav_path) -> ImpulseResponse:
    data, sample_rate = read_wav(ir_wav_path)
    if data.shape[1] != 1:
        raise ValidationError(f"{ir_wav_path}: impulse responses must be mono, got {data.shape[1]} channels")
    return ImpulseResponse(samples=data[:, 0], sample_rate_hz=sample_rate)


def write_ir(path, ir: ImpulseResponse):
    write_wav(path, ir.samples, ir.sample_rate_hz)


def load_irs(ir_dir, layout: Layout) -> Dict[str, ImpulseResponse]:
    """One `<speaker id>.wav` per layout speaker."""
    irs = {}
    for spk in layout:
        ir_path = os.path.join(ir_dir, f"{spk.id}.wav")
        if not os.path.isfile(ir_path):
            raise AnalysisError(f"missing impulse response for speaker {spk.id}")
        irs[spk.id] = read_ir(ir_path)
    return irs


def save_irs(irs: Dict[str, ImpulseResponse], out_dir):
    os.makedirs(out_dir, exist_ok=True)
    for spk_id, ir in irs.items():
        write_ir(os.path.join(out_dir, f"{spk_id}.wav"), ir)


# ----------------------------
# Scenes
# ----------------------------
def _object_audio(record, sample_rate_hz, base_dir):
    if "audio" in record:
        data, wav_rate = read_wav(os.path.join(base_dir, record["audio"]))
        if wav_rate != sample_rate_hz:
            raise ValidationError(f"sample rate mismatch: {record['audio']} at {wav_rate} Hz, "
                                  f"scene at {sample_rate_hz} Hz")
        if data.shape[1] != 1:
            raise ValidationError(f"object audio {record['audio']} must be mono, got {data.shape[1]} channels")
        return data[:, 0]
    if "signal" in record:
        params = dict(record["signal"])
        signal_type = params.pop("type", None)
        if signal_type not in SIGNAL_GENERATORS:
            raise ValidationError(f"unknown signal type '{signal_type}', expected one of {list(SIGNAL_GENERATORS)}")
        try:
            return SIGNAL_GENERATORS[signal_type](sample_rate_hz=sample_rate_hz, **params)
        except TypeError as e:
            raise ValidationError(f"invalid {signal_type} parameters: {e}")
    raise ValidationError(f"object '{record.get('id')}' needs an 'audio' file or a generated 'signal'")


def _object_trajectory(record):
    if "trajectory" in record:
        return tuple((float(t), float(az)) for t, az in record["trajectory"])
    if "azimuth_deg" in record:
        return ((0., float(record["azimuth_deg"])),)
    raise ValidationError(f"object '{record.get('id')}' needs an 'azimuth_deg' or a 'trajectory'")


def scene_from_dict(doc: dict, base_dir: str = ".") -> Scene:
    """
    Objects reference a WAV file (relative to `base_dir`) or a generated test signal, and are
    static ("azimuth_deg") or piecewise constant ("trajectory": [[start_s, azimuth_deg], ...]).
    Channel beds ("beds") become static objects at the canonical azimuths of their layout.
    """
    if "sample_rate_hz" not in doc:
        raise ValidationError("scene misses 'sample_rate_hz'")
    sample_rate_hz = float(doc["sample_rate_hz"])
    objects = []
    for index, record in enumerate(doc.get("objects", [])):
        objects.append(SourceObject(id=str(record.get("id", f"object_{index}")),
                                    audio=_object_audio(record, sample_rate_hz, base_dir),
                                    sample_rate_hz=sample_rate_hz,
                                    trajectory=_object_trajectory(record)))
    for index, bed in enumerate(doc.get("beds", [])):
        data, wav_rate = read_wav(os.path.join(base_dir, bed["audio"]))
        if wav_rate != sample_rate_hz:
            raise ValidationError(f"sample rate mismatch: {bed['audio']} at {wav_rate} Hz, "
                                  f"scene at {sample_rate_hz} Hz")
        canonical_layout = bed.get("canonical_layout", "stereo")
        bed_scene = channel_bed_to_scene(data, sample_rate_hz, canonical_layout)
        objects.extend(SourceObject(id=f"bed{index}_{obj.id}", audio=obj.audio, sample_rate_hz=sample_rate_hz,
                                    trajectory=obj.trajectory)
                       for obj in bed_scene.objects)
    ids = [obj.id for obj in objects]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"duplicate object ids in scene: {ids}")
    logger.info("Loaded scene with %d objects at %g Hz", len(objects), sample_rate_hz)
    return Scene(objects=tuple(objects), sample_rate_hz=sample_rate_hz)


def load_scene(scene_json_path) -> Scene:
    return scene_from_dict(_read_json(scene_json_path), base_dir=os.path.dirname(os.path.abspath(scene_json_path)))
