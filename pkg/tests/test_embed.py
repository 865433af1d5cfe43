"""Tests für core.embed: PCA-Embedder, FEAT1, FMDMODEL1"""

import numpy as np
import pytest

from core.embed import (EmbedderModel, embed, export_features, fit_pca, import_features, load_model,
                        save_model)
from core.errors import (ChecksumMismatch, DimensionMismatch, InsufficientData, InsufficientSamples,
                         ParseError, ValidationError)
from core.frechet import fit_gaussian
from core.imaging import MotionImage

SHAPE = (4, 4, 3)


def _random_images(rng, count, shape=SHAPE):
    return [MotionImage(rng.random(shape)) for _ in range(count)]


@pytest.fixture
def images(rng):
    return _random_images(rng, 50)


@pytest.fixture
def model(images):
    return fit_pca(images, 5)


def test_components_orthonormal(model):
    gram = model.components @ model.components.T
    np.testing.assert_allclose(gram, np.eye(5), rtol=0, atol=1e-8)


def test_explained_variance_matches_dense_eigensolver(images, model):
    data = np.stack([image.flatten() for image in images])
    centered = data - data.mean(axis=0)
    covariance = centered.T @ centered / (len(images) - 1)
    expected = np.sort(np.linalg.eigvalsh(covariance))[::-1][:5]

    np.testing.assert_allclose(model.explained_variance, expected, rtol=1e-8, atol=0)


def test_components_span_top_eigenvectors(images, model):
    data = np.stack([image.flatten() for image in images])
    covariance = np.cov(data, rowvar=False)
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    top = eigenvectors[:, ::-1][:, :5]

    # Gleicher Unterraum: Projektion der Komponenten auf top ist verlustfrei
    projected = model.components @ top @ top.T
    np.testing.assert_allclose(projected, model.components, rtol=0, atol=1e-6)


def test_exact_low_rank_data_reconstructs(rng):
    size = int(np.prod(SHAPE))
    basis, _ = np.linalg.qr(rng.normal(size=(size, 3)))
    coefficients = rng.uniform(-0.1, 0.1, size=(20, 3))
    flat = 0.5 + coefficients @ basis.T
    images = [MotionImage(row.reshape(SHAPE)) for row in flat]

    model = fit_pca(images, 3)

    for image in images:
        assert model.reconstruction_error(image) <= 1e-8


def test_sign_convention(model):
    for component in model.components:
        assert component[np.argmax(np.abs(component))] >= 0


def test_embed_mean_image_is_zero(model):
    mean = MotionImage(model.mean_image.reshape(SHAPE))
    np.testing.assert_allclose(embed(model, mean), np.zeros(5), rtol=0, atol=1e-10)


def test_embed_is_affine(rng, model):
    a, b = _random_images(rng, 2)
    middle = MotionImage((a.pixels + b.pixels) / 2.0)
    np.testing.assert_allclose(embed(model, a) + embed(model, b) - 2.0 * embed(model, middle),
                               np.zeros(5), rtol=0, atol=1e-10)

    alpha = 0.3
    mix = MotionImage(alpha * a.pixels + (1 - alpha) * b.pixels)
    np.testing.assert_allclose(embed(model, mix), alpha * embed(model, a) + (1 - alpha) * embed(model, b),
                               rtol=0, atol=1e-9)


def test_reconstruction_error_matches_projection_residual(rng, model):
    image = _random_images(rng, 1)[0]
    centered = image.flatten() - model.mean_image
    residual = centered - model.components.T @ (model.components @ centered)

    assert abs(model.reconstruction_error(image) - np.linalg.norm(residual)) <= 1e-8


def test_projection_contraction(rng, model):
    for image in _random_images(rng, 10):
        centered = image.flatten() - model.mean_image
        assert np.linalg.norm(embed(model, image)) <= np.linalg.norm(centered) + 1e-9


def test_embed_many_matches_single(images, model):
    batch = model.embed_many(images[:4])
    for row, image in zip(batch, images[:4]):
        np.testing.assert_allclose(row, model.embed(image), rtol=0, atol=1e-12)
    assert model.embed_many([]).shape == (0, 5)


def test_permutation_invariance(rng, images, model):
    shuffled = [images[i] for i in rng.permutation(len(images))]

    other = fit_pca(shuffled, 5)

    np.testing.assert_allclose(other.explained_variance, model.explained_variance, rtol=0, atol=1e-10)
    overlap = np.abs(np.sum(other.components * model.components, axis=1))
    np.testing.assert_allclose(overlap, np.ones(5), rtol=0, atol=1e-6)


def test_fit_pca_errors(rng, images):
    with pytest.raises(InsufficientData):
        fit_pca([], 2)
    with pytest.raises(InsufficientData):
        fit_pca(images[:5], 5)
    with pytest.raises(DimensionMismatch):
        fit_pca(images[:10] + _random_images(rng, 1, (4, 5, 3)), 2)
    with pytest.raises(DimensionMismatch):
        fit_pca(images, 0)
    with pytest.raises(DimensionMismatch):
        fit_pca(images, 49)


def test_embed_dimension_mismatch(rng, model):
    with pytest.raises(DimensionMismatch):
        embed(model, _random_images(rng, 1, (4, 5, 3))[0])


def test_model_rejects_non_orthonormal_components(model):
    with pytest.raises(ValidationError):
        EmbedderModel(4, 4, model.mean_image, 2.0 * model.components, model.explained_variance)
    with pytest.raises(ValidationError):
        EmbedderModel(4, 4, model.mean_image, model.components, model.explained_variance[::-1])


def test_features_round_trip(tmp_path, rng):
    features = rng.normal(size=(7, 3))
    path = tmp_path / 'features.feat'

    export_features(features, path)

    np.testing.assert_array_equal(import_features(path), features)


def test_features_short_row(tmp_path):
    path = tmp_path / 'short.feat'
    rows = ['FEAT1 2 64', ' '.join(['0.5'] * 64), ' '.join(['0.5'] * 63)]
    path.write_text('\n'.join(rows) + '\n')

    with pytest.raises(DimensionMismatch):
        import_features(path)


def test_features_wrong_row_count(tmp_path):
    path = tmp_path / 'count.feat'
    path.write_text("FEAT1 3 2\n1 2\n3 4\n")
    with pytest.raises(ParseError):
        import_features(path)


def test_features_empty_set(tmp_path):
    path = tmp_path / 'empty.feat'
    path.write_text("# keine Daten\nFEAT1 0 4\n")

    features = import_features(path)

    assert features.shape == (0, 4)
    with pytest.raises(InsufficientSamples):
        fit_gaussian(features)


def test_model_round_trip(tmp_path, rng, model):
    path = tmp_path / 'model.fmdmodel'
    save_model(model, path)

    loaded = load_model(path)

    assert loaded.input_shape == model.input_shape
    np.testing.assert_array_equal(loaded.mean_image, model.mean_image)
    np.testing.assert_array_equal(loaded.components, model.components)
    np.testing.assert_array_equal(loaded.explained_variance, model.explained_variance)
    image = _random_images(rng, 1)[0]
    np.testing.assert_allclose(loaded.embed(image), model.embed(image), rtol=0, atol=1e-12)


@pytest.mark.parametrize("keep", [
    lambda size: size // 2,
    lambda size: size - 4,
    lambda size: size - 1,
], ids=['mitte', 'im_crc_trailer', 'ohne_newline'])
def test_model_truncated(tmp_path, model, keep):
    path = tmp_path / 'model.fmdmodel'
    save_model(model, path)
    content = path.read_bytes()
    path.write_bytes(content[:keep(len(content))])

    with pytest.raises(ParseError):
        load_model(path)


def test_model_clamps_tiny_negative_variance(model):
    variance = np.array(model.explained_variance)
    variance[-1] = -1e-13

    clamped = EmbedderModel(4, 4, model.mean_image, model.components, variance)

    assert clamped.explained_variance[-1] == 0.0
    variance[-1] = -1e-9
    with pytest.raises(ValidationError):
        EmbedderModel(4, 4, model.mean_image, model.components, variance)


def test_features_invalid_utf8(tmp_path):
    path = tmp_path / 'kaputt.feat'
    path.write_bytes(b"FEAT1 1 2\n0.5 \xff\n")

    with pytest.raises(ParseError):
        import_features(path)


def test_model_checksum(tmp_path, model):
    path = tmp_path / 'model.fmdmodel'
    save_model(model, path)
    path.write_bytes(path.read_bytes().replace(b'FMDMODEL1 4 4 5', b'FMDMODEL1 4 4 4', 1))

    with pytest.raises(ChecksumMismatch):
        load_model(path)
