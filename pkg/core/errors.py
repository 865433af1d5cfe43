"""
Fehlerklassen für FMD-Stats

Alle Fehler des Toolkits leiten von FmdError ab. Eingabe- und Formatfehler
sind ValidationError (CLI-Exitcode 2), numerische Probleme ComputationError
(CLI-Exitcode 1).
"""

from typing import Optional


class FmdError(Exception):
    """Basisklasse aller FMD-Stats Fehler"""


class ValidationError(FmdError, ValueError):
    """Ungültige Eingabedaten, Dateien oder Parameter"""


class ComputationError(FmdError, ArithmeticError):
    """Numerischer Fehler während einer Berechnung"""


class ParseError(ValidationError):
    """Fehlerhafte Textdatei (MOT1, FEAT1, STATS1, FMDMODEL1, Report-CSV)"""

    def __init__(self, line: Optional[int], reason: str):
        self.line = line
        self.reason = reason
        where = f"Zeile {line}: " if line is not None else ""
        super().__init__(f"{where}{reason}")


class TopologyError(ValidationError):
    """Ungültiges Parent-Array eines Skeletts"""


class DegenerateBone(ValidationError):
    """Knochen mit (nahezu) Länge 0 - zwei Gelenke fallen zusammen"""

    def __init__(self, frame: int, bone: int):
        self.frame = frame
        self.bone = bone
        super().__init__(f"Degenerierter Knochen {bone} in Frame {frame}")


class TooShort(ValidationError):
    """Clip ist kürzer als die gewünschte Fensterlänge"""

    def __init__(self, frames: int, length: int):
        self.frames = frames
        self.length = length
        super().__init__(f"Clip hat {frames} Frames, Fensterlänge {length} benötigt")


class DimensionMismatch(ValidationError):
    """Array- oder Dateidimensionen passen nicht zusammen"""


class InsufficientData(ValidationError):
    """Zu wenige Trainingsbilder für den Embedder"""


class InsufficientSamples(ValidationError):
    """Zu wenige Feature-Vektoren für eine Kovarianzschätzung"""


class ChecksumMismatch(ValidationError):
    """CRC32-Prüfsumme einer Modelldatei stimmt nicht"""


class NotSymmetric(ValidationError):
    """Matrix ist nicht symmetrisch"""


class ConfigError(ValidationError):
    """Ungültiger Konfigurationswert"""

    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"Konfiguration '{field}': {reason}")


class EigenFailure(ComputationError):
    """Eigenwertzerlegung konvergiert nicht"""
