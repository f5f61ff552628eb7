"""
Model-level versions of the two listening experiments run on the near/far stereo setup:

    localization  predicted phantom source azimuth for an equidistant reference (REF), full response
                  compensation (FRC) and direct sound compensation (DSC) at a few intended angles
    loudness      A-weighted level at the listening position of an impulse object rendered on the
                  equidistant reference (REF), with DSC (DSC_LC), with DSC without the loudness
                  correction (DSC_NO_LC), plus a 10 dB attenuated anchor (ANCH)

The listener level is the A-weighted RMS of the summed listener signal. The synthetic rooms share
one diffuse tail realization across speakers, so their tails add coherently once the speakers are
time aligned. The power sum of the per-speaker contributions, the quantity the loudness correction
keeps constant, is reported as `power_sum_level_db`.
"""
import logging
import math
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from .calibration import build_profile
from .filter_utils import WeightingSpec
from .ir_analysis_utils import weighted_energy
from .localization_utils import predict_mode, predict_reference
from .model import CalibrationProfile, Layout, RenderMode, RoomModel, Scene, SourceObject
from .panning_utils import DEFAULT_P
from .renderer import RendererConfig, render
from .room_sim import (DEFAULT_IR_DURATION_S, DEFAULT_SAMPLE_RATE, DEFAULT_SEED, equidistant_layout,
                       simulate_listening, synth_irs)
from .signals import impulse

logger = logging.getLogger(__name__)

LOCALIZATION_ANGLES = (30., 15., 0., -8.)
LOUDNESS_ANGLES = (30., 15., 0.)
ANCHOR_ATTENUATION_DB = 10.
LISTENER_WEIGHTING = WeightingSpec(a_weighting=True)
IMPULSE_DURATION_S = 0.01


def run_localization_experiment(layout: Layout, profile: CalibrationProfile,
                                angles: Sequence[float] = LOCALIZATION_ANGLES,
                                p: float = DEFAULT_P) -> pd.DataFrame:
    rows = []
    for theta in tqdm(angles, leave=False, desc="localization"):
        theta = float(theta)
        ref_deg = predict_reference(theta, layout, p)
        predictions = {
            "REF": ref_deg,
            "FRC": predict_mode(theta, layout, profile, RenderMode.FRC, p),
            "DSC": predict_mode(theta, layout, profile, RenderMode.DSC, p),
        }
        for condition, predicted_deg in predictions.items():
            rows.append({
                "theta_deg": theta,
                "condition": condition,
                "predicted_deg": predicted_deg,
                "error_deg": predicted_deg - theta,
                "delta_ref_deg": predicted_deg - ref_deg,
            })
    return pd.DataFrame(rows)


def listener_level_db(signal, sample_rate_hz: float, weighting: WeightingSpec = LISTENER_WEIGHTING) -> float:
    signal = np.asarray(signal, dtype="float64")
    energy = weighted_energy(signal, sample_rate_hz, weighting)
    if not energy > 0:
        return -math.inf
    return 10. * math.log10(energy / signal.size)


def power_sum_level_db(contributions, sample_rate_hz: float, weighting: WeightingSpec = LISTENER_WEIGHTING) -> float:
    """
    Level of per-speaker listener contributions of shape (nb_samples, nb_speakers), their weighted
    energies summed as if they added incoherently.
    """
    contributions = np.asarray(contributions, dtype="float64")
    energy = sum(weighted_energy(contributions[:, channel], sample_rate_hz, weighting)
                 for channel in range(contributions.shape[1]))
    if not energy > 0:
        return -math.inf
    return 10. * math.log10(energy / contributions.shape[0])


def _pad_to(contributions, length):
    return [np.pad(c, ((0, length - c.shape[0]), (0, 0))) for c in contributions]


def run_loudness_experiment(layout: Layout, room: RoomModel, profile: CalibrationProfile = None,
                            angles: Sequence[float] = LOUDNESS_ANGLES,
                            sample_rate_hz: float = DEFAULT_SAMPLE_RATE, seed: int = DEFAULT_SEED,
                            ir_duration_s: float = DEFAULT_IR_DURATION_S,
                            config: RendererConfig = RendererConfig()) -> pd.DataFrame:
    """
    Without `profile` the setup is calibrated in measurement mode from its synthetic IRs. The
    reference setup puts every speaker at the largest distance of `layout`.
    """
    irs = synth_irs(layout, room, sample_rate_hz, seed, ir_duration_s)
    if profile is None:
        profile = build_profile(layout, room=room, irs=irs)
    ref_layout = equidistant_layout(layout)
    ref_irs = synth_irs(ref_layout, room, sample_rate_hz, seed, ir_duration_s)
    ref_profile = build_profile(ref_layout, room=room, irs=ref_irs)

    click = impulse(IMPULSE_DURATION_S, sample_rate_hz)
    rows = []
    for theta in tqdm(angles, leave=False, desc="loudness"):
        theta = float(theta)
        scene = Scene(objects=(SourceObject.static("click", click, sample_rate_hz, theta),),
                      sample_rate_hz=sample_rate_hz)
        ref_feeds = render(scene, ref_layout, ref_profile, RenderMode.FRC, config)
        dsc_feeds = render(scene, layout, profile, RenderMode.DSC, config)
        no_lc_feeds = render(scene, layout, profile, RenderMode.DSC_NO_LC, config)

        contributions = {
            "REF": simulate_listening(ref_feeds, [ref_irs[spk_id] for spk_id in ref_layout.ids], sample_rate_hz,
                                      per_speaker=True),
            "DSC_LC": simulate_listening(dsc_feeds, [irs[spk_id] for spk_id in layout.ids], sample_rate_hz,
                                         per_speaker=True),
            "DSC_NO_LC": simulate_listening(no_lc_feeds, [irs[spk_id] for spk_id in layout.ids], sample_rate_hz,
                                            per_speaker=True),
        }
        # Levels are averaged over the same duration, whatever the render latency:
        length = max(c.shape[0] for c in contributions.values())
        contributions = dict(zip(contributions, _pad_to(contributions.values(), length)))

        levels = {condition: listener_level_db(c.sum(axis=1), sample_rate_hz)
                  for condition, c in contributions.items()}
        power_levels = {condition: power_sum_level_db(c, sample_rate_hz) for condition, c in contributions.items()}
        ref_level = levels["REF"]
        levels["ANCH"] = ref_level - ANCHOR_ATTENUATION_DB
        power_levels["ANCH"] = power_levels["REF"] - ANCHOR_ATTENUATION_DB
        for condition, level in levels.items():
            rows.append({
                "theta_deg": theta,
                "condition": condition,
                "level_db": level,
                "delta_ref_db": level - ref_level,
                "power_sum_level_db": power_levels[condition],
                "power_sum_delta_ref_db": power_levels[condition] - power_levels["REF"],
            })
        logger.info("theta = %.1f deg: DSC_LC %+.2f dB, DSC_NO_LC %+.2f dB vs REF", theta,
                    levels["DSC_LC"] - ref_level, levels["DSC_NO_LC"] - ref_level)
    return pd.DataFrame(rows)


def combine_results_from_multiple_experiments(exp_dirs, file_name: str) -> pd.DataFrame:
    """
    Concatenates the `<file_name>.csv` tables of several experiment directories (one per seed or
    setup), tagging each row with the directory name.
    """
    assert isinstance(exp_dirs, (list, tuple))
    assert len(exp_dirs) > 0
    collected = []
    for exp_dir in exp_dirs:
        exp_dir = Path(exp_dir)
        assert exp_dir.is_dir(), exp_dir
        loc_df = pd.read_csv(exp_dir / f"{file_name}.csv")
        loc_df["experiment"] = exp_dir.name
        collected.append(loc_df)
    return pd.concat(collected).reset_index(drop=True)
