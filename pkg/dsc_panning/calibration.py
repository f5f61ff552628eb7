"""
Full response compensation (loudness matching + time alignment) and direct sound compensation
terms, assembled into a `CalibrationProfile`.
"""
import logging
from typing import Mapping, Optional

import numpy as np
from tqdm import tqdm

from .errors import AnalysisError, ProfileError
from .filter_utils import CALIBRATION_WEIGHTING, WeightingSpec
from .ir_analysis_utils import (FdtParams, direct_level_from_ir, level_from_ir, model_direct_level,
                                model_total_level)
from .model import DEFAULT_SPEED_OF_SOUND, CalibrationProfile, Layout, RoomModel, check_layout

logger = logging.getLogger(__name__)


def db_to_gain(db):
    return 10. ** (np.asarray(db, dtype="float64") / 20.)


def loudness_compensation(levels_db, l_ref_db: float) -> np.ndarray:
    return float(l_ref_db) - np.asarray(levels_db, dtype="float64")


def dsc_compensation(direct_levels_db, l_ref_ds_db: float) -> np.ndarray:
    return float(l_ref_ds_db) - np.asarray(direct_levels_db, dtype="float64")


def time_alignment(distances_m, d_ref_m: float, speed_of_sound: float = DEFAULT_SPEED_OF_SOUND) -> np.ndarray:
    distances_m = np.asarray(distances_m, dtype="float64")
    if np.any(distances_m > d_ref_m):
        raise ProfileError(f"reference closer than speaker: d_ref = {d_ref_m} m, "
                           f"farthest speaker at {distances_m.max()} m")
    return (d_ref_m - distances_m) / speed_of_sound


def frc_gains(profile: CalibrationProfile) -> np.ndarray:
    """Linear loudness compensation gains 10^(dL_i / 20)."""
    return db_to_gain(profile.loudness_comp_db)


def delay_samples(profile: CalibrationProfile, sample_rate_hz: float) -> np.ndarray:
    # Nearest-sample rounding, max error half a sample (~10 us at 48 kHz)
    return np.round(profile.delays_s * sample_rate_hz).astype("int64")


def _ordered_irs(layout, irs):
    if not isinstance(irs, Mapping):
        irs = list(irs)
        if len(irs) != len(layout):
            raise AnalysisError(f"got {len(irs)} impulse responses for {len(layout)} speakers")
        irs = dict(zip(layout.ids, irs))
    ordered = []
    for spk_id in layout.ids:
        if irs.get(spk_id) is None:
            raise AnalysisError(f"missing impulse response for speaker {spk_id}")
        ordered.append(irs[spk_id])
    rates = sorted({ir.sample_rate_hz for ir in ordered})
    if len(rates) > 1:
        raise AnalysisError(f"sample rate mismatch across impulse responses: {rates}")
    return ordered


def measure_levels(layout: Layout, irs, weighting: WeightingSpec = CALIBRATION_WEIGHTING,
                   fdt_params: FdtParams = FdtParams()):
    """Full and direct sound levels per speaker, estimated from the impulse responses."""
    ordered = _ordered_irs(layout, irs)
    levels, direct_levels = [], []
    for spk_id, ir in zip(tqdm(layout.ids, leave=False, desc="analyzing IRs"), ordered):
        levels.append(level_from_ir(ir, weighting))
        direct_levels.append(direct_level_from_ir(ir, fdt_params, weighting))
        logger.info("Speaker %s: L = %.2f dB, L_DS = %.2f dB", spk_id, levels[-1], direct_levels[-1])
    return np.array(levels), np.array(direct_levels)


def model_levels(layout: Layout, room: RoomModel):
    levels = np.array([model_total_level(spk, room) for spk in layout])
    direct_levels = np.array([model_direct_level(spk) for spk in layout])
    return levels, direct_levels


def build_profile(layout: Layout, room: Optional[RoomModel] = None, irs=None,
                  weighting: WeightingSpec = CALIBRATION_WEIGHTING,
                  fdt_params: FdtParams = FdtParams(),
                  l_ref_db: Optional[float] = None,
                  l_ref_ds_db: Optional[float] = None,
                  speed_of_sound: Optional[float] = None) -> CalibrationProfile:
    """
    Measurement mode when `irs` is given (one IR per speaker, keyed by speaker id or in layout
    order), model mode otherwise (requires `room`).

    The references default to the quietest speaker's levels, so every compensation is an
    attenuation, and d_ref is the largest distance.
    """
    check_layout(layout)
    if irs is not None:
        levels, direct_levels = measure_levels(layout, irs, weighting, fdt_params)
    elif room is not None:
        levels, direct_levels = model_levels(layout, room)
    else:
        raise ProfileError("either impulse responses or a room model are needed to calibrate")

    if speed_of_sound is None:
        speed_of_sound = room.speed_of_sound if room is not None else DEFAULT_SPEED_OF_SOUND
    l_ref_db = float(levels.min()) if l_ref_db is None else float(l_ref_db)
    l_ref_ds_db = float(direct_levels.min()) if l_ref_ds_db is None else float(l_ref_ds_db)
    d_ref_m = float(layout.distances.max())

    return CalibrationProfile.from_levels(
        layout.ids, levels, direct_levels,
        delays_s=time_alignment(layout.distances, d_ref_m, speed_of_sound),
        l_ref_db=l_ref_db, l_ref_ds_db=l_ref_ds_db, d_ref_m=d_ref_m, speed_of_sound=speed_of_sound)
