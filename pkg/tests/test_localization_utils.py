import numpy as np
import pytest

from dsc_panning.errors import PanningError
from dsc_panning.localization_utils import (EffectiveDirectGains, effective_direct_gains, predict_angle,
                                            predict_mode, predict_reference, prediction_grid)
from dsc_panning.model import Layout, Loudspeaker, RenderMode
from dsc_panning.panning_utils import mode_gains, normalize, pan_pairwise


def test_symmetric_gains_localize_at_the_center(layout):
    assert predict_angle(EffectiveDirectGains([1., 1.]), layout) == pytest.approx(0., abs=1e-12)


def test_single_active_speaker(layout):
    assert predict_angle(EffectiveDirectGains([0., 0.3]), layout) == -30.


def test_tangent_law_about_the_pair_bisector():
    layout = Layout(speakers=(Loudspeaker(id="A", azimuth_deg=60., distance_m=2.),
                              Loudspeaker(id="B", azimuth_deg=0., distance_m=2.)))
    assert predict_angle(EffectiveDirectGains([1., 1.]), layout) == pytest.approx(30.)
    assert predict_angle(EffectiveDirectGains([2., 1.]), layout) > 30.


def test_too_many_active_speakers():
    layout = Layout(speakers=tuple(Loudspeaker(id=name, azimuth_deg=az, distance_m=2.)
                                   for name, az in [("L", 30.), ("C", 0.), ("R", -30.)]))
    with pytest.raises(PanningError, match="at most 2"):
        predict_angle(EffectiveDirectGains([1., 1., 1.]), layout)
    with pytest.raises(PanningError, match="not azimuth-adjacent"):
        predict_angle(EffectiveDirectGains([1., 0., 1.]), layout)


def test_effective_gains_need_the_mode_stage(layout, model_profile):
    with pytest.raises(PanningError):
        effective_direct_gains(normalize(pan_pairwise(0., layout)), model_profile, RenderMode.DSC)


def test_frc_amplitude_ratio_at_the_center(layout, model_profile):
    e = effective_direct_gains(mode_gains(0., layout, model_profile, RenderMode.FRC), model_profile, RenderMode.FRC)
    assert e.gains[0] / e.gains[1] == pytest.approx(10 ** (3.02 / 20), rel=1e-3)


def test_dsc_direct_gains_follow_the_panning_law(layout, model_profile):
    for theta in [-20., 0., 12.5, 25.]:
        e = effective_direct_gains(mode_gains(theta, layout, model_profile, RenderMode.DSC), model_profile,
                                   RenderMode.DSC)
        raw = pan_pairwise(theta, layout).gains
        ratio = e.gains / raw
        assert ratio[0] == pytest.approx(ratio[1], rel=1e-12)


def test_frc_skew_towards_the_near_speaker(layout, model_profile):
    assert predict_mode(0., layout, model_profile, RenderMode.FRC) == pytest.approx(5.68, abs=0.05)
    assert predict_mode(0., layout, model_profile, RenderMode.FRC) - predict_reference(0., layout) > 3.


def test_equidistant_layout_gives_identical_predictions(ref_layout, ref_profile):
    for theta in [-25., 0., 7.]:
        assert predict_mode(theta, ref_layout, ref_profile, RenderMode.FRC) == \
            pytest.approx(predict_mode(theta, ref_layout, ref_profile, RenderMode.DSC), abs=1e-12)


def test_prediction_grid(layout, model_profile):
    grid = prediction_grid(layout, model_profile, step_deg=1.)
    assert list(grid.columns) == ["theta_deg", "ref_deg", "frc_deg", "dsc_deg"]
    assert len(grid) == 61
    assert grid.theta_deg.iloc[0] == -30. and grid.theta_deg.iloc[-1] == 30.

    # Direct sound compensation restores the equidistant prediction
    assert np.max(np.abs(grid.dsc_deg - grid.ref_deg)) < 0.01
    # The sin/cos law and the tangent law differ by less than 2 degrees
    assert np.max(np.abs(grid.dsc_deg - grid.theta_deg)) < 2.

    interior = grid[(grid.theta_deg > -30.) & (grid.theta_deg < 30.)]
    assert np.all(interior.frc_deg > interior.ref_deg)

    hard_pans = grid[grid.theta_deg.abs() == 30.]
    np.testing.assert_array_equal(hard_pans.frc_deg, hard_pans.theta_deg)
    np.testing.assert_array_equal(hard_pans.dsc_deg, hard_pans.theta_deg)
