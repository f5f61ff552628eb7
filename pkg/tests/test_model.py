import numpy as np
import pytest

from dsc_panning.errors import PanningError, ProfileError, ValidationError
from dsc_panning.model import (CalibrationProfile, GainStage, GainVector, ImpulseResponse, Layout, Loudspeaker,
                               RoomModel, Scene, SourceObject, SpeakerCalibration, check_layout, validate_layout)


def test_near_far_layout_is_valid(layout):
    assert validate_layout(layout) == []
    assert layout.ids == ["L", "R"]
    assert layout.span == (-30., 30.)


def test_non_positive_distance():
    layout = Layout(speakers=(Loudspeaker(id="C", azimuth_deg=0., distance_m=0.),))
    problems = validate_layout(layout)
    assert len(problems) == 1
    assert "non-positive distance" in problems[0]


def test_duplicate_id():
    layout = Layout(speakers=(Loudspeaker(id="L", azimuth_deg=30., distance_m=1.),
                              Loudspeaker(id="L", azimuth_deg=-30., distance_m=1.)))
    assert any("duplicate id" in problem for problem in validate_layout(layout))
    with pytest.raises(ValidationError, match="duplicate id"):
        check_layout(layout)


def test_unordered_azimuths():
    layout = Layout(speakers=(Loudspeaker(id="L", azimuth_deg=30., distance_m=1.),
                              Loudspeaker(id="R", azimuth_deg=-30., distance_m=1.),
                              Loudspeaker(id="C", azimuth_deg=0., distance_m=1.)))
    assert any("unordered pair azimuths" in problem for problem in validate_layout(layout))


def test_azimuth_range_and_empty_layout():
    assert validate_layout(Layout(speakers=())) == ["layout has no speakers"]
    layout = Layout(speakers=(Loudspeaker(id="B", azimuth_deg=180., distance_m=1.),))
    assert any("outside [-180, 180)" in problem for problem in validate_layout(layout))


def test_room_model_validation():
    with pytest.raises(ValidationError):
        RoomModel(critical_distance_m=0.)
    with pytest.raises(ValidationError):
        RoomModel(critical_distance_m=2., rt60_s=-1.)


def test_impulse_response_validation():
    with pytest.raises(ValidationError):
        ImpulseResponse(samples=[], sample_rate_hz=48000)
    with pytest.raises(ValidationError):
        ImpulseResponse(samples=[1., 0.], sample_rate_hz=48000, onset_index=2)
    ir = ImpulseResponse(samples=np.zeros(480), sample_rate_hz=48000)
    assert ir.duration_s == pytest.approx(0.01)
    with pytest.raises(ValueError):
        ir.samples[0] = 1.


def test_profile_identities_hold(model_profile):
    np.testing.assert_allclose(model_profile.loudness_comp_db, model_profile.l_ref_db - model_profile.level_db,
                               rtol=0, atol=1e-12)
    np.testing.assert_allclose(model_profile.dsc_comp_db, model_profile.l_ref_ds_db - model_profile.direct_level_db,
                               rtol=0, atol=1e-12)
    assert model_profile.delays_s.min() == 0.
    assert np.all(model_profile.delays_s >= 0)


def test_profile_rejects_broken_identity():
    speakers = (SpeakerCalibration(id="L", level_db=-10., direct_level_db=-12., loudness_comp_db=1.,
                                   dsc_comp_db=0., delay_s=0.),)
    with pytest.raises(ProfileError, match="loudness compensation"):
        CalibrationProfile(speakers=speakers, l_ref_db=-10., l_ref_ds_db=-12., d_ref_m=1.)


def test_profile_needs_a_zero_delay():
    with pytest.raises(ProfileError, match="zero delay"):
        CalibrationProfile.from_levels(["L", "R"], [0., 0.], [0., 0.], [0.001, 0.002],
                                       l_ref_db=0., l_ref_ds_db=0., d_ref_m=3.)


def test_profile_with_references(model_profile):
    shifted = model_profile.with_references(l_ref_db=model_profile.l_ref_db + 2.)
    np.testing.assert_allclose(shifted.loudness_comp_db, model_profile.loudness_comp_db + 2.)
    np.testing.assert_array_equal(shifted.dsc_comp_db, model_profile.dsc_comp_db)


def test_profile_frame(model_profile):
    table = model_profile.to_frame()
    assert list(table.columns) == ["L_dB", "L_DS_dB", "dL_dB", "dL_DS_dB", "dt_ms"]
    assert list(table.index) == ["L", "R"]
    assert table.loc["L", "dt_ms"] == pytest.approx(1.5 / 343. * 1e3)


def test_gain_vector_validation():
    with pytest.raises(PanningError):
        GainVector(stage=GainStage.RAW, gains=[0.5, -0.1])
    with pytest.raises(PanningError):
        GainVector(stage=GainStage.RAW, gains=[np.nan, 1.])
    assert GainVector(stage=GainStage.RAW, gains=[3., 4.]).norm() == pytest.approx(5.)
    assert GainVector(stage=GainStage.RAW, gains=[3., 4.]).norm(1.) == pytest.approx(7.)


def test_source_object_trajectory():
    obj = SourceObject(id="o", audio=np.zeros(10), sample_rate_hz=48000, trajectory=[(0, 10), (0.5, -10)])
    assert not obj.is_static
    assert obj.azimuth_deg == 10.
    with pytest.raises(ValidationError, match="start at time 0"):
        SourceObject(id="o", audio=np.zeros(10), sample_rate_hz=48000, trajectory=[(0.1, 10)])
    with pytest.raises(ValidationError, match="strictly increasing"):
        SourceObject(id="o", audio=np.zeros(10), sample_rate_hz=48000, trajectory=[(0, 10), (0, 5)])
    with pytest.raises(ValidationError, match="mono"):
        SourceObject.static("o", np.zeros((10, 2)), 48000, 0.)


def test_scene_length_and_scaling():
    scene = Scene(objects=(SourceObject.static("a", np.ones(5), 48000, 0.),
                           SourceObject.static("b", np.ones(8), 48000, 10.)), sample_rate_hz=48000)
    assert scene.num_samples == 8
    np.testing.assert_array_equal(scene.scaled(2.).objects[1].audio, 2. * np.ones(8))
    assert Scene(objects=(), sample_rate_hz=48000).num_samples == 0
