"""
Imaging-Modul für FMD-Stats
Bildet Richtungsvektoren auf Bewegungsbilder ab und zurück

Zeile = Knochen, Spalte = Frame, Kanäle R/G/B = x/y/z.
Pixelwert = (Komponente + 1) / 2, ohne Quantisierung und ohne Skalierung.
"""

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, ValidationError
from .motion import DirectionalMotion

logger = logging.getLogger(__name__)

RANGE_TOLERANCE = 1e-12

try:
    from matplotlib import image as mpl_image
    MATPLOTLIB_AVAILABLE = True
except ImportError:
    MATPLOTLIB_AVAILABLE = False


@dataclass(frozen=True, eq=False)
class MotionImage:
    """H x W x 3 Bild mit Werten in [0, 1] (H = Knochen, W = Frames)"""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.array(self.pixels, dtype=np.float64)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise DimensionMismatch(f"Bild mit Form (H, W, 3) erwartet, {pixels.shape} erhalten")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise DimensionMismatch("Bildhöhe und -breite müssen >= 1 sein")
        if not np.all(np.isfinite(pixels)):
            raise ValidationError("Bild enthält nicht-endliche Werte")
        if pixels.min() < -RANGE_TOLERANCE or pixels.max() > 1.0 + RANGE_TOLERANCE:
            raise ValidationError(
                f"Pixelwerte außerhalb [0, 1]: [{pixels.min()}, {pixels.max()}]")

        # Nur Rundungsreste am Rand, siehe RANGE_TOLERANCE
        np.clip(pixels, 0.0, 1.0, out=pixels)
        pixels.setflags(write=False)
        object.__setattr__(self, 'pixels', pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def flatten(self) -> np.ndarray:
        """Bild als Vektor der Länge H*W*3"""
        return self.pixels.reshape(-1)


def to_image(dm: DirectionalMotion) -> MotionImage:
    """
    Kodiert Richtungsvektoren als Bewegungsbild

    Args:
        dm: Richtungsvektoren (F x B x 3, Einheitsnorm)

    Returns:
        MotionImage der Form B x F x 3
    """
    return MotionImage((dm.vectors.transpose(1, 0, 2) + 1.0) / 2.0)


def from_image(img: MotionImage) -> DirectionalMotion:
    """
    Dekodiert ein Bewegungsbild zurück in Richtungsvektoren

    Die Vektoren werden NICHT neu normiert; DirectionalMotion.norm_deviation()
    zeigt nicht-normierte Ergebnisse an.
    """
    return DirectionalMotion((2.0 * img.pixels - 1.0).transpose(1, 0, 2))


def export_png(img: MotionImage, path) -> None:
    """
    Speichert ein Bewegungsbild als PNG (nur zur Ansicht)

    Die Ausgabe ist 8-bit quantisiert und damit verlustbehaftet; sie wird
    nie für die Metrik verwendet.
    """
    if not MATPLOTLIB_AVAILABLE:
        raise RuntimeError("matplotlib ist nicht installiert. "
                           "Bitte installieren mit: pip install matplotlib")
    quantized = np.round(img.pixels * 255.0).astype(np.uint8)
    mpl_image.imsave(path, quantized)
    logger.debug("PNG exportiert: %s", path)
