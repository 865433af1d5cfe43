"""Gemeinsame Fixtures für die FMD-Stats Tests"""

import numpy as np
import pytest

from core.motion import MotionClip, Skeleton, humanoid_skeleton, synth_dataset


@pytest.fixture
def skeleton():
    return humanoid_skeleton()


@pytest.fixture
def chain():
    """3-Gelenk-Kette"""
    return Skeleton(('root', 'mid', 'tip'), (-1, 0, 1))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def clips(skeleton):
    """Kleiner synthetischer Datensatz: 12 Clips mit 64 Frames"""
    return synth_dataset(7, 12, skeleton, 64)


@pytest.fixture
def still_clip(skeleton):
    """Clip mit 2000 Frames in der Nullpose (102000 Koordinaten)"""
    return MotionClip(skeleton, np.zeros((2000, skeleton.num_joints, 3)))
