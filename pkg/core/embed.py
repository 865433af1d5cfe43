"""
Embed-Modul für FMD-Stats
=========================

Bildet Bewegungsbilder auf Feature-Vektoren fester Dimension ab (Latent-
raum z). Jeder Embedder, der das Embedder-Protokoll erfüllt, kann die
Metrik speisen; eingebaut ist ein linearer PCA-Embedder - das globale
Optimum eines linearen Autoencoders mit quadratischem Rekonstruktions-
fehler. Features externer Encoder werden über FEAT1-Dateien importiert.

Feature-Mengen werden als n x d float64-Arrays gehandhabt; jede Zeile
ist ein Feature-Vektor.

Dateiformate:
-------------
    FEAT1 <n> <d>                    + n Zeilen mit d Werten
    FMDMODEL1 <H> <W> <d>            + Mittelwertbild, d Komponenten,
                                       erklärte Varianzen, CRC32 <hex>
"""

import logging
import re
import zlib
from dataclasses import dataclass
from typing import Callable, Protocol, Sequence, Tuple

import numpy as np
import scipy.linalg

from .errors import ChecksumMismatch, DimensionMismatch, InsufficientData, ParseError, ValidationError
from .formats import format_reals, parse_header, parse_int, parse_reals, read_lines
from .imaging import MotionImage

logger = logging.getLogger(__name__)

DEFAULT_LATENT_DIM = 64
ORTHONORMAL_TOLERANCE = 1e-8
VARIANCE_RESIDUE = 1e-12
TRAILER_PATTERN = re.compile(rb"CRC32 ([0-9a-f]{8})\n")


class Embedder(Protocol):
    """Vertrag für Embedder: Bilder fester Größe -> n x d Features"""

    @property
    def input_shape(self) -> Tuple[int, int]:
        ...

    @property
    def latent_dim(self) -> int:
        ...

    def embed_many(self, images: Sequence[MotionImage]) -> np.ndarray:
        ...


# Trainiert einen Embedder aus Bildern und latenter Dimension (z.B. fit_pca)
EmbedderFactory = Callable[[Sequence[MotionImage], int], Embedder]


def _canonical_signs(components: np.ndarray) -> np.ndarray:
    """Dreht jede Komponente so, dass ihr betragsgrößter Eintrag >= 0 ist"""
    largest = np.argmax(np.abs(components), axis=1)
    signs = np.sign(components[np.arange(components.shape[0]), largest])
    signs[signs == 0] = 1.0
    return components * signs[:, np.newaxis]


@dataclass(frozen=True, eq=False)
class EmbedderModel:
    """Linearer (PCA-)Embedder"""

    input_height: int
    input_width: int
    mean_image: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def __post_init__(self):
        size = int(self.input_height) * int(self.input_width) * 3
        mean = np.array(self.mean_image, dtype=np.float64).reshape(-1)
        components = np.array(self.components, dtype=np.float64)
        variance = np.array(self.explained_variance, dtype=np.float64).reshape(-1)

        if mean.shape[0] != size:
            raise DimensionMismatch(f"Mittelwertbild hat {mean.shape[0]} Werte, {size} erwartet")
        if components.ndim != 2 or components.shape[1] != size or components.shape[0] < 1:
            raise DimensionMismatch(f"Komponenten mit Form (d, {size}) erwartet, {components.shape} erhalten")
        if variance.shape[0] != components.shape[0]:
            raise DimensionMismatch("Anzahl erklärter Varianzen passt nicht zu den Komponenten")

        gram = components @ components.T
        if np.max(np.abs(gram - np.eye(components.shape[0]))) > ORTHONORMAL_TOLERANCE:
            raise ValidationError("Komponenten sind nicht orthonormal")
        variance[(variance < 0) & (variance >= -VARIANCE_RESIDUE)] = 0.0
        if np.any(variance < 0) or np.any(np.diff(variance) > 0):
            raise ValidationError("Erklärte Varianzen müssen >= 0 und absteigend sein")

        for array in (mean, components, variance):
            array.setflags(write=False)
        object.__setattr__(self, 'input_height', int(self.input_height))
        object.__setattr__(self, 'input_width', int(self.input_width))
        object.__setattr__(self, 'mean_image', mean)
        object.__setattr__(self, 'components', components)
        object.__setattr__(self, 'explained_variance', variance)

    @property
    def input_shape(self) -> Tuple[int, int]:
        return self.input_height, self.input_width

    @property
    def latent_dim(self) -> int:
        return self.components.shape[0]

    def _flatten(self, image: MotionImage) -> np.ndarray:
        if (image.height, image.width) != self.input_shape:
            raise DimensionMismatch(
                f"Bild {image.height}x{image.width}, Modell erwartet "
                f"{self.input_height}x{self.input_width}")
        return image.flatten()

    def embed(self, image: MotionImage) -> np.ndarray:
        """Feature-Vektor eines Bildes: <x - mean, c_i> für jede Komponente"""
        return self.components @ (self._flatten(image) - self.mean_image)

    def embed_many(self, images: Sequence[MotionImage]) -> np.ndarray:
        """Features mehrerer Bilder als n x d Array"""
        if not images:
            return np.empty((0, self.latent_dim), dtype=np.float64)
        data = np.stack([self._flatten(image) for image in images])
        return (data - self.mean_image) @ self.components.T

    def reconstruct(self, features: np.ndarray) -> np.ndarray:
        """Rekonstruiert flache Bilder aus Features (mean + sum z_i c_i)"""
        return self.mean_image + np.asarray(features, dtype=np.float64) @ self.components

    def reconstruction_error(self, image: MotionImage) -> float:
        """Euklidische Norm des Projektionsresiduums"""
        flat = self._flatten(image)
        return float(np.linalg.norm(flat - self.reconstruct(self.embed(image))))


def embed(model: EmbedderModel, image: MotionImage) -> np.ndarray:
    """
    Bettet ein Bewegungsbild ein

    Raises:
        DimensionMismatch: Wenn die Bildgröße nicht zum Modell passt
    """
    return model.embed(image)


def fit_pca(images: Sequence[MotionImage], d: int = DEFAULT_LATENT_DIM) -> EmbedderModel:
    """
    Trainiert den PCA-Embedder

    Die Komponenten sind die d führenden Eigenvektoren der Stichproben-
    kovarianz (Nenner n-1) der zentrierten, flachen Bilder. Berechnet über
    die SVD der zentrierten Datenmatrix; die Vorzeichen werden kanonisch
    festgelegt (betragsgrößter Eintrag >= 0).

    Args:
        images: Trainingsbilder gleicher Größe (mindestens d+1)
        d: Latente Dimension (1 <= d <= H*W*3)

    Returns:
        EmbedderModel

    Raises:
        DimensionMismatch: Bei unterschiedlichen Bildgrößen oder ungültigem d
        InsufficientData: Bei weniger als d+1 Bildern
    """
    if not images:
        raise InsufficientData("Keine Trainingsbilder")
    height, width = images[0].height, images[0].width
    for image in images:
        if (image.height, image.width) != (height, width):
            raise DimensionMismatch(
                f"Trainingsbilder unterschiedlich groß: {height}x{width} und {image.height}x{image.width}")

    size = height * width * 3
    if not 1 <= d <= size:
        raise DimensionMismatch(f"Latente Dimension {d} außerhalb [1, {size}]")
    count = len(images)
    if count < d + 1:
        raise InsufficientData(f"{count} Trainingsbilder, mindestens {d + 1} für d={d} benötigt")

    data = np.stack([image.flatten() for image in images])
    mean = data.mean(axis=0)
    centered = data - mean

    _, singular, vt = scipy.linalg.svd(centered, full_matrices=False, lapack_driver='gesdd')
    variance = np.maximum(singular[:d] ** 2 / (count - 1), 0.0)

    components = _canonical_signs(vt[:d])
    logger.debug("PCA: %d Bilder %dx%d, d=%d, erklärte Varianz %.6g von %.6g",
                 count, height, width, d, variance.sum(), (singular ** 2).sum() / (count - 1))
    return EmbedderModel(height, width, mean, components, variance)


def export_features(features: np.ndarray, path) -> None:
    """Speichert Features (n x d) im FEAT1-Format"""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2:
        raise DimensionMismatch(f"Features mit Form (n, d) erwartet, {features.shape} erhalten")
    lines = [f"FEAT1 {features.shape[0]} {features.shape[1]}"]
    lines.extend(format_reals(row) for row in features)
    with open(path, 'w', encoding='utf-8') as f:
        f.write('\n'.join(lines) + '\n')


def import_features(path) -> np.ndarray:
    """
    Lädt Features im FEAT1-Format

    Returns:
        n x d Array (n = 0 ist gültig)

    Raises:
        ParseError: Bei fehlerhafter Kopfzeile oder falscher Zeilenanzahl
        DimensionMismatch: Wenn eine Zeile nicht d Werte hat
    """
    lines, _ = read_lines(path)
    header = parse_header(lines, 'FEAT1', 2)
    count = parse_int(header[0], lines[0][0], 'n')
    dim = parse_int(header[1], lines[0][0], 'd', minimum=1)

    rows = lines[1:]
    if len(rows) != count:
        raise ParseError(lines[-1][0], f"{count} Feature-Zeilen erwartet, {len(rows)} gefunden")

    features = np.empty((count, dim), dtype=np.float64)
    for index, (number, text) in enumerate(rows):
        values = parse_reals(text, number)
        if values.shape[0] != dim:
            raise DimensionMismatch(f"Zeile {number}: {values.shape[0]} Werte, d={dim} erwartet")
        features[index] = values
    return features


def save_model(model: EmbedderModel, path) -> None:
    """Speichert ein EmbedderModel im FMDMODEL1-Format mit CRC32"""
    lines = [f"FMDMODEL1 {model.input_height} {model.input_width} {model.latent_dim}",
             format_reals(model.mean_image)]
    lines.extend(format_reals(component) for component in model.components)
    lines.append(format_reals(model.explained_variance))
    body = ('\n'.join(lines) + '\n').encode('ascii')
    checksum = zlib.crc32(body) & 0xFFFFFFFF

    with open(path, 'wb') as f:
        f.write(body)
        f.write(f"CRC32 {checksum:08x}\n".encode('ascii'))


def load_model(path) -> EmbedderModel:
    """
    Lädt ein EmbedderModel im FMDMODEL1-Format

    Raises:
        ParseError: Bei abgeschnittener oder fehlerhafter Datei
        ChecksumMismatch: Wenn die CRC32-Prüfsumme nicht stimmt
    """
    with open(path, 'rb') as f:
        content = f.read()

    # Trailer: genau 'CRC32 ' + 8 Hex-Ziffern + '\n' am Dateiende
    cut = content.rfind(b'\n', 0, len(content) - 1)
    trailer = TRAILER_PATTERN.fullmatch(content[cut + 1:])
    if cut < 0 or trailer is None:
        raise ParseError(None, "CRC32-Zeile fehlt oder ist unvollständig (Datei abgeschnitten?)")
    expected = int(trailer.group(1), 16)

    body = content[:cut + 1]
    actual = zlib.crc32(body) & 0xFFFFFFFF
    if actual != expected:
        raise ChecksumMismatch(f"CRC32 {actual:08x} berechnet, {expected:08x} erwartet")

    try:
        text_body = body.decode('ascii')
    except UnicodeDecodeError:
        raise ParseError(None, "Modelldatei enthält Nicht-ASCII-Zeichen") from None
    lines = [(number, text.strip()) for number, text in enumerate(text_body.splitlines(), start=1)
             if text.strip()]
    header = parse_header(lines, 'FMDMODEL1', 3)
    header_line = lines[0][0]
    height = parse_int(header[0], header_line, 'H', minimum=1)
    width = parse_int(header[1], header_line, 'W', minimum=1)
    dim = parse_int(header[2], header_line, 'd', minimum=1)
    if len(lines) != dim + 3:
        raise ParseError(lines[-1][0], f"{dim + 3} Zeilen erwartet, {len(lines)} gefunden")

    size = height * width * 3
    mean = parse_reals(lines[1][1], lines[1][0], expected=size)
    components = np.stack([parse_reals(text, number, expected=size) for number, text in lines[2:2 + dim]])
    variance = parse_reals(lines[-1][1], lines[-1][0], expected=dim)
    return EmbedderModel(height, width, mean, components, variance)
