"""
Pairwise sin/cos amplitude panning and the direct sound compensation gain stages:

    raw                 g_i                      sin/cos law over the adjacent pair enclosing theta
    dsc_modified        g'_i = 10^((dL_DS_i - dL_i) / 20) g_i
    loudness_corrected  g''_i = g'_i / ||g'||_p
    combined            G_i = 10^(dL_DS_i / 20) g_i / ||10^((dL_DS - dL) / 20) g||_p  ( = 10^(dL_i / 20) g''_i )
"""
import numpy as np
import pandas as pd

from .calibration import db_to_gain, frc_gains
from .errors import PanningError, ProfileError
from .model import MODE_STAGES, CalibrationProfile, GainStage, GainVector, Layout, RenderMode

DEFAULT_P = 2.0


def _p_norm(gains, p):
    # Scaled by the largest magnitude: a one-hot vector has a norm equal to its entry, bit for bit
    magnitude = np.abs(np.asarray(gains, dtype="float64"))
    peak = magnitude.max()
    if peak == 0:
        return 0.
    return float(peak * np.sum((magnitude / peak) ** p) ** (1. / p))


def _check_stage(g, expected):
    if g.stage is not expected:
        raise PanningError(f"expected a {expected.value} gain vector, got {g.stage.value}")


def _check_profile(g, profile, layout=None):
    if layout is not None:
        profile.check_covers(layout)
    if len(g) != len(profile.speakers):
        raise ProfileError(f"profile/layout mismatch: {len(g)} gains for {len(profile.speakers)} calibrated speakers")


def pan_pairwise(theta_deg: float, layout: Layout) -> GainVector:
    """
    sin/cos panning between the two azimuth-adjacent speakers enclosing theta. A theta equal to a
    speaker azimuth is a hard pan to that speaker.
    """
    azimuths = layout.azimuths
    lowest, highest = layout.span
    if not lowest <= theta_deg <= highest:
        raise PanningError(f"azimuth {theta_deg} deg outside layout span [{lowest}, {highest}]")

    gains = np.zeros(len(azimuths))
    exact = np.flatnonzero(azimuths == theta_deg)
    if exact.size > 0:
        gains[exact[0]] = 1.
        return GainVector(stage=GainStage.RAW, gains=gains, p_norm=2.)

    order = np.argsort(azimuths)
    position = int(np.searchsorted(azimuths[order], theta_deg))
    right, left = order[position - 1], order[position]
    psi = 0.5 * np.pi * (theta_deg - azimuths[right]) / (azimuths[left] - azimuths[right])
    gains[left] = np.sin(psi)
    gains[right] = np.cos(psi)
    return GainVector(stage=GainStage.RAW, gains=gains, p_norm=2.)


def normalize(g: GainVector, p: float = DEFAULT_P) -> GainVector:
    norm = _p_norm(g.gains, p)
    if norm == 0:
        raise PanningError("cannot normalize an all-zero gain vector")
    return GainVector(stage=g.stage, gains=g.gains / norm, p_norm=p)


def apply_dsc(g: GainVector, profile: CalibrationProfile, layout: Layout = None) -> GainVector:
    _check_stage(g, GainStage.RAW)
    _check_profile(g, profile, layout)
    modification = db_to_gain(profile.dsc_comp_db - profile.loudness_comp_db)
    return GainVector(stage=GainStage.DSC_MODIFIED, gains=modification * g.gains, p_norm=g.p_norm)


def loudness_correct(g: GainVector, p: float = DEFAULT_P) -> GainVector:
    _check_stage(g, GainStage.DSC_MODIFIED)
    corrected = normalize(g, p)
    return GainVector(stage=GainStage.LOUDNESS_CORRECTED, gains=corrected.gains, p_norm=p)


def combined_gains(g: GainVector, profile: CalibrationProfile, p: float = DEFAULT_P,
                   layout: Layout = None) -> GainVector:
    """Single-shot combined gains, equal to frc_gain * loudness_correct(apply_dsc(g))."""
    _check_stage(g, GainStage.RAW)
    _check_profile(g, profile, layout)
    norm = _p_norm(db_to_gain(profile.dsc_comp_db - profile.loudness_comp_db) * g.gains, p)
    if norm == 0:
        raise PanningError("cannot combine an all-zero gain vector")
    return GainVector(stage=GainStage.COMBINED, gains=db_to_gain(profile.dsc_comp_db) * g.gains / norm, p_norm=p)


def apply_frc(g: GainVector, profile: CalibrationProfile) -> GainVector:
    """Per-speaker FRC loudness gain applied to object-stage gains (end of the rendering chain)."""
    _check_profile(g, profile)
    return GainVector(stage=GainStage.COMBINED, gains=frc_gains(profile) * g.gains, p_norm=g.p_norm)


def mode_gains(theta_deg: float, layout: Layout, profile: CalibrationProfile, mode: RenderMode,
               p: float = DEFAULT_P) -> GainVector:
    """Object-stage gains of a rendering mode (before the FRC gains and delays)."""
    raw = normalize(pan_pairwise(theta_deg, layout), p)
    if mode is RenderMode.FRC:
        gains = raw
    elif mode is RenderMode.DSC_NO_LC:
        gains = apply_dsc(raw, profile, layout)
    elif mode is RenderMode.DSC:
        gains = loudness_correct(apply_dsc(raw, profile, layout), p)
    else:
        raise ValueError(mode)
    assert gains.stage is MODE_STAGES[mode]
    return gains


def gain_table(theta_deg: float, layout: Layout, profile: CalibrationProfile, p: float = DEFAULT_P) -> pd.DataFrame:
    """Stage-by-stage gain vectors for one object direction, one row per speaker."""
    raw = pan_pairwise(theta_deg, layout)
    normalized = normalize(raw, p)
    dsc_modified = apply_dsc(normalized, profile, layout)
    corrected = loudness_correct(dsc_modified, p)
    table = pd.DataFrame({
        "raw": raw.gains,
        "normalized": normalized.gains,
        "dsc_modified": dsc_modified.gains,
        "loudness_corrected": corrected.gains,
        "frc_gain": frc_gains(profile),
        "frc_combined": apply_frc(normalized, profile).gains,
        "combined": combined_gains(normalized, profile, p).gains,
    }, index=pd.Index(layout.ids, name="speaker"))
    table.insert(0, "theta_deg", float(theta_deg))
    return table
