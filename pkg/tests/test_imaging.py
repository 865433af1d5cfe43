"""Tests für core.imaging"""

import numpy as np
import pytest

from core.errors import ValidationError
from core.imaging import MotionImage, export_png, from_image, to_image
from core.motion import DirectionalMotion, to_directional


def _unit_vectors(rng, frames, bones):
    raw = rng.normal(size=(frames, bones, 3))
    return DirectionalMotion(raw / np.linalg.norm(raw, axis=-1, keepdims=True))


@pytest.mark.parametrize("vector,pixel", [
    ((0.0, 0.0, 1.0), (0.5, 0.5, 1.0)),
    ((1.0, 0.0, 0.0), (1.0, 0.5, 0.5)),
    ((0.0, -1.0, 0.0), (0.5, 0.0, 0.5)),
])
def test_axis_vectors(vector, pixel):
    image = to_image(DirectionalMotion([[vector]]))
    np.testing.assert_array_equal(image.pixels[0, 0], pixel)


def test_image_layout_rows_are_bones(rng):
    dm = _unit_vectors(rng, frames=7, bones=4)

    image = to_image(dm)

    assert (image.height, image.width) == (4, 7)
    np.testing.assert_array_equal(image.pixels[2, 5], (dm.vectors[5, 2] + 1.0) / 2.0)


def test_round_trip(rng):
    dm = _unit_vectors(rng, frames=20, bones=16)

    back = from_image(to_image(dm))

    np.testing.assert_allclose(back.vectors, dm.vectors, rtol=0, atol=1e-12)


def test_no_clamping_for_unit_vectors(clips):
    dm = to_directional(clips[0])

    image = to_image(dm)

    np.testing.assert_array_equal(image.pixels, (dm.vectors.transpose(1, 0, 2) + 1.0) / 2.0)
    assert image.pixels.min() >= 0.0 and image.pixels.max() <= 1.0


def test_from_image_midpoint_is_origin():
    image = MotionImage(np.full((3, 5, 3), 0.5))

    dm = from_image(image)

    np.testing.assert_array_equal(dm.vectors, np.zeros((5, 3, 3)))
    assert dm.norm_deviation() == 1.0


def test_from_image_axis_pixel():
    dm = from_image(MotionImage([[[0.5, 0.5, 1.0]]]))
    np.testing.assert_array_equal(dm.vectors[0, 0], [0.0, 0.0, 1.0])


@pytest.mark.parametrize("pixels", [
    np.full((2, 2, 3), 1.5),
    np.full((2, 2, 3), -0.1),
    np.zeros((2, 2)),
    np.zeros((0, 2, 3)),
])
def test_invalid_images(pixels):
    with pytest.raises(ValidationError):
        MotionImage(pixels)


def test_rounding_residue_is_clipped():
    image = MotionImage(np.full((1, 1, 3), 1.0 + 1e-13))
    assert image.pixels.max() == 1.0


def test_flatten_length(rng):
    image = to_image(_unit_vectors(rng, frames=6, bones=4))
    assert image.flatten().shape == (4 * 6 * 3,)


def test_export_png(tmp_path, clips):
    pytest.importorskip('matplotlib')
    path = tmp_path / 'window.png'

    export_png(to_image(to_directional(clips[0])), path)

    assert path.read_bytes()[:8] == b'\x89PNG\r\n\x1a\n'
