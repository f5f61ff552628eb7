"""
Summing-localization oracle: predicts the phantom source azimuth from the amplitudes of the direct
wavefronts reaching the listener, using the stereophonic tangent law over the active pair.
"""
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from tqdm import tqdm

from .calibration import db_to_gain
from .errors import PanningError, ProfileError
from .model import MODE_STAGES, CalibrationProfile, GainVector, Layout, RenderMode
from .panning_utils import DEFAULT_P, mode_gains, normalize, pan_pairwise


@dataclass(frozen=True, eq=False)
class EffectiveDirectGains:
    gains: np.ndarray

    def __post_init__(self):
        gains = np.array(self.gains, dtype="float64")
        if not np.all(np.isfinite(gains)) or np.any(gains < 0):
            raise PanningError(f"effective direct gains must be finite and non-negative, got {gains}")
        gains.setflags(write=False)
        object.__setattr__(self, "gains", gains)


def effective_direct_gains(g_stage: GainVector, profile: CalibrationProfile, mode: RenderMode) -> EffectiveDirectGains:
    """e_i = g_i * 10^((dL_i + L_DS_i) / 20): object gain, FRC gain and direct path transfer."""
    if g_stage.stage is not MODE_STAGES[mode]:
        raise PanningError(f"{mode.value} mode expects {MODE_STAGES[mode].value} gains, got {g_stage.stage.value}")
    if len(g_stage) != len(profile.speakers):
        raise ProfileError(f"profile/layout mismatch: {len(g_stage)} gains for {len(profile.speakers)} speakers")
    return EffectiveDirectGains(g_stage.gains * db_to_gain(profile.loudness_comp_db + profile.direct_level_db))


def predict_angle(e: EffectiveDirectGains, layout: Layout) -> float:
    """
    Tangent law about the bisector of the active adjacent pair:
        tan(theta - bisector) = (e_L - e_R) / (e_L + e_R) * tan(half_aperture)
    A single active speaker localizes at its own azimuth.
    """
    azimuths = layout.azimuths
    if len(e.gains) != len(azimuths):
        raise PanningError(f"{len(e.gains)} gains for {len(azimuths)} speakers")
    active = np.flatnonzero(e.gains > 0)
    if active.size == 0:
        raise PanningError("no active speaker")
    if active.size == 1:
        return float(azimuths[active[0]])
    if active.size > 2:
        raise PanningError(f"{active.size} active speakers, the tangent law needs at most 2")

    sorted_positions = np.argsort(np.argsort(azimuths))
    if abs(int(sorted_positions[active[0]]) - int(sorted_positions[active[1]])) != 1:
        raise PanningError("active speakers are not azimuth-adjacent")
    left, right = sorted(active, key=lambda idx: azimuths[idx], reverse=True)
    bisector = 0.5 * (azimuths[left] + azimuths[right])
    half_aperture = 0.5 * (azimuths[left] - azimuths[right])
    e_left, e_right = e.gains[left], e.gains[right]
    ratio = (e_left - e_right) / (e_left + e_right)
    return float(bisector + math.degrees(math.atan(ratio * math.tan(math.radians(half_aperture)))))


def predict_reference(theta_deg: float, layout: Layout, p: float = DEFAULT_P) -> float:
    """Prediction for an equidistant, identical-speaker layout: direct amplitudes follow the panning gains."""
    return predict_angle(EffectiveDirectGains(normalize(pan_pairwise(theta_deg, layout), p).gains), layout)


def predict_mode(theta_deg: float, layout: Layout, profile: CalibrationProfile, mode: RenderMode,
                 p: float = DEFAULT_P) -> float:
    gains = mode_gains(theta_deg, layout, profile, mode, p)
    return predict_angle(effective_direct_gains(gains, profile, mode), layout)


def prediction_grid(layout: Layout, profile: CalibrationProfile, step_deg: float = 1.,
                    p: float = DEFAULT_P) -> pd.DataFrame:
    """Intended vs predicted azimuth for REF/FRC/DSC over the layout span."""
    lowest, highest = layout.span
    nb_steps = int(math.floor((highest - lowest) / step_deg + 1e-9))
    thetas = lowest + step_deg * np.arange(nb_steps + 1)
    if math.isclose(thetas[-1], highest):
        thetas[-1] = highest
    rows = []
    for theta in tqdm(thetas, leave=False, desc="predicting"):
        theta = float(theta)
        rows.append({
            "theta_deg": theta,
            "ref_deg": predict_reference(theta, layout, p),
            "frc_deg": predict_mode(theta, layout, profile, RenderMode.FRC, p),
            "dsc_deg": predict_mode(theta, layout, profile, RenderMode.DSC, p),
        })
    return pd.DataFrame(rows, columns=["theta_deg", "ref_deg", "frc_deg", "dsc_deg"])
