import numpy as np
import pytest
from hypothesis import given, settings, strategies

from dsc_panning.calibration import frc_gains, time_alignment
from dsc_panning.errors import PanningError, ProfileError
from dsc_panning.model import CalibrationProfile, GainStage, GainVector, Layout, Loudspeaker, RenderMode
from dsc_panning.panning_utils import (apply_dsc, apply_frc, combined_gains, gain_table, loudness_correct,
                                       mode_gains, normalize, pan_pairwise)


def _random_setup(rng):
    nb_speakers = int(rng.integers(2, 6))
    azimuths = np.sort(rng.uniform(-170., 170., nb_speakers))[::-1]
    distances = rng.uniform(0.5, 5., nb_speakers)
    ids = [f"S{index}" for index in range(nb_speakers)]
    layout = Layout(speakers=tuple(Loudspeaker(id=spk_id, azimuth_deg=float(az), distance_m=float(d))
                                   for spk_id, az, d in zip(ids, azimuths, distances)))
    levels = rng.uniform(-30., -5., nb_speakers)
    direct_levels = levels - rng.uniform(0., 10., nb_speakers)
    profile = CalibrationProfile.from_levels(ids, levels, direct_levels,
                                             time_alignment(distances, distances.max()),
                                             l_ref_db=rng.uniform(-30., 0.), l_ref_ds_db=rng.uniform(-40., 0.),
                                             d_ref_m=distances.max())
    theta = float(rng.uniform(azimuths.min(), azimuths.max()))
    p = float(rng.choice([1., 1.5, 2.]))
    return layout, profile, theta, p


def test_pairwise_panning_between_a_pair(layout):
    g = pan_pairwise(0., layout)
    assert g.stage is GainStage.RAW
    np.testing.assert_allclose(g.gains, [np.sqrt(0.5), np.sqrt(0.5)])
    g = pan_pairwise(15., layout)
    np.testing.assert_allclose(g.gains, [np.sin(3 * np.pi / 8), np.cos(3 * np.pi / 8)])


def test_hard_pans(layout):
    np.testing.assert_array_equal(pan_pairwise(30., layout).gains, [1., 0.])
    np.testing.assert_array_equal(pan_pairwise(-30., layout).gains, [0., 1.])


def test_out_of_span(layout):
    with pytest.raises(PanningError, match="outside layout span"):
        pan_pairwise(45., layout)


def test_only_the_enclosing_pair_is_active():
    layout = Layout(speakers=tuple(Loudspeaker(id=name, azimuth_deg=az, distance_m=2.)
                                   for name, az in [("L", 30.), ("C", 0.), ("R", -30.)]))
    g = pan_pairwise(-10., layout)
    assert g.gains[0] == 0.
    np.testing.assert_allclose(g.gains[1:], [np.sin(np.pi / 3), np.cos(np.pi / 3)])
    np.testing.assert_array_equal(pan_pairwise(0., layout).gains, [0., 1., 0.])


def test_dsc_gains_at_the_center(layout, model_profile):
    dsc = loudness_correct(apply_dsc(normalize(pan_pairwise(0., layout)), model_profile, layout))
    assert dsc.stage is GainStage.LOUDNESS_CORRECTED
    np.testing.assert_allclose(dsc.gains, [0.57708, 0.81669], atol=1e-3)
    assert dsc.norm(2.) == pytest.approx(1., abs=1e-12)
    combined = combined_gains(normalize(pan_pairwise(0., layout)), model_profile)
    np.testing.assert_allclose(combined.gains, [0.40849, 0.81669], atol=1e-3)


def test_stage_checks(layout, model_profile):
    raw = pan_pairwise(0., layout)
    with pytest.raises(PanningError, match="expected a dsc_modified"):
        loudness_correct(raw)
    with pytest.raises(PanningError, match="expected a raw"):
        apply_dsc(apply_dsc(raw, model_profile), model_profile)
    with pytest.raises(PanningError, match="all-zero"):
        normalize(GainVector(stage=GainStage.RAW, gains=[0., 0.]))


def test_profile_layout_mismatch(layout, model_profile):
    three = GainVector(stage=GainStage.RAW, gains=[1., 0., 0.])
    with pytest.raises(ProfileError, match="profile/layout mismatch"):
        apply_dsc(three, model_profile)
    renamed = Layout(speakers=tuple(Loudspeaker(id=f"X{spk.id}", azimuth_deg=spk.azimuth_deg,
                                                distance_m=spk.distance_m) for spk in layout))
    with pytest.raises(ProfileError, match="profile/layout mismatch"):
        apply_dsc(pan_pairwise(0., renamed), model_profile, renamed)


def test_combined_gains_match_the_staged_chain_on_random_setups():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        layout, profile, theta, p = _random_setup(rng)
        g = normalize(pan_pairwise(theta, layout), p)
        staged = apply_frc(loudness_correct(apply_dsc(g, profile, layout), p), profile)
        combined = combined_gains(g, profile, p, layout)
        np.testing.assert_allclose(combined.gains, staged.gains, rtol=1e-9, atol=0)
        corrected = loudness_correct(apply_dsc(g, profile), p)
        assert corrected.norm(p) == pytest.approx(1., abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(strategies.floats(min_value=-30., max_value=30.),
       strategies.floats(min_value=-40., max_value=40.),
       strategies.floats(min_value=-40., max_value=40.),
       strategies.sampled_from([1., 1.5, 2.]))
def test_reference_invariance(layout, model_profile, theta, l_ref_shift, l_ref_ds_shift, p):
    shifted = model_profile.with_references(l_ref_db=model_profile.l_ref_db + l_ref_shift,
                                            l_ref_ds_db=model_profile.l_ref_ds_db + l_ref_ds_shift)
    g = normalize(pan_pairwise(theta, layout), p)
    original = loudness_correct(apply_dsc(g, model_profile), p)
    moved = loudness_correct(apply_dsc(g, shifted), p)
    np.testing.assert_allclose(moved.gains, original.gains, rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("p", [1., 1.5, 2.])
@pytest.mark.parametrize("mode", list(RenderMode))
def test_hard_pan_is_left_untouched(layout, model_profile, p, mode):
    for index, theta in enumerate([30., -30.]):
        expected = np.zeros(2)
        expected[index] = 1.
        if mode is RenderMode.DSC_NO_LC:
            expected[index] = 10 ** ((model_profile.dsc_comp_db[index] - model_profile.loudness_comp_db[index]) / 20)
        np.testing.assert_allclose(mode_gains(theta, layout, model_profile, mode, p).gains, expected, rtol=1e-15, atol=0)
        if mode is not RenderMode.DSC_NO_LC:
            np.testing.assert_array_equal(mode_gains(theta, layout, model_profile, mode, p).gains, expected)


def test_equidistant_profile_leaves_gains_unchanged(layout, ref_layout, ref_profile):
    g = normalize(pan_pairwise(12., ref_layout))
    np.testing.assert_allclose(loudness_correct(apply_dsc(g, ref_profile)).gains, g.gains, rtol=1e-12)
    np.testing.assert_array_equal(frc_gains(ref_profile), [1., 1.])


def test_mode_stages(layout, model_profile):
    assert mode_gains(5., layout, model_profile, RenderMode.FRC).stage is GainStage.RAW
    assert mode_gains(5., layout, model_profile, RenderMode.DSC).stage is GainStage.LOUDNESS_CORRECTED
    no_lc = mode_gains(5., layout, model_profile, RenderMode.DSC_NO_LC)
    assert no_lc.stage is GainStage.DSC_MODIFIED
    np.testing.assert_allclose(mode_gains(5., layout, model_profile, RenderMode.DSC).gains,
                               no_lc.gains / no_lc.norm(2.))


def test_gain_table(layout, model_profile):
    table = gain_table(0., layout, model_profile)
    assert list(table.index) == ["L", "R"]
    assert list(table.columns) == ["theta_deg", "raw", "normalized", "dsc_modified", "loudness_corrected",
                                   "frc_gain", "frc_combined", "combined"]
    np.testing.assert_allclose(table["loudness_corrected"], [0.57708, 0.81669], atol=1e-3)
    np.testing.assert_allclose(table["combined"], table["frc_gain"] * table["loudness_corrected"], rtol=1e-12)
