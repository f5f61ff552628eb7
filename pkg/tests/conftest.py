import pytest

from dsc_panning.calibration import build_profile
from dsc_panning.model import RoomModel, near_far_stereo_layout
from dsc_panning.room_sim import equidistant_layout, synth_irs

SAMPLE_RATE = 48000
CRITICAL_DISTANCE_M = 2.114


@pytest.fixture(scope="session")
def layout():
    return near_far_stereo_layout(1.5, 3.0)


@pytest.fixture(scope="session")
def room():
    return RoomModel(critical_distance_m=CRITICAL_DISTANCE_M)


@pytest.fixture(scope="session")
def model_profile(layout, room):
    return build_profile(layout, room=room)


@pytest.fixture(scope="session")
def irs(layout, room):
    return synth_irs(layout, room, SAMPLE_RATE, seed=0)


@pytest.fixture(scope="session")
def measured_profile(layout, irs):
    return build_profile(layout, irs=irs)


@pytest.fixture(scope="session")
def ref_layout(layout):
    return equidistant_layout(layout)


@pytest.fixture(scope="session")
def ref_profile(ref_layout, room):
    return build_profile(ref_layout, room=room)
