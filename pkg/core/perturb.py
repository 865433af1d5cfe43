"""
Perturb-Modul für FMD-Stats
===========================

Drei kontrollierte Störmodelle auf Gelenkpositionen, parametrisiert
durch die Intensität zeta. Sie simulieren ein fehlerhaftes generatives
Modell.

    gaussian:    N(0, zeta^2) auf jede Koordinate (zeta = Standardabweichung in m)
    salt_pepper: pro Koordinate -0.2 m (u <= zeta/2) bzw. +0.2 m (zeta/2 < u <= zeta)
    temporal:    N(0, 0.003^2) auf zeta aufeinanderfolgende Frames ab Zufallsstart

Das Rauschen wirkt auf Positionen, also vor der Umrechnung in
Richtungsvektoren. Alle Funktionen sind rein bei gegebenem Generator.

Zufallsströme:
--------------
    derive_rng(master_seed, length, kind_index, zeta_index, repetition)
    leitet über numpy.random.SeedSequence(spawn_key=...) einen unabhängigen
    Strom pro Experimentzelle ab - unabhängig von der Ausführungsreihenfolge.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .errors import ValidationError
from .motion import MotionClip, validate_seed

NOISE_KINDS = ('gaussian', 'salt_pepper', 'temporal')

IMPULSE_AMPLITUDE = 0.2
TEMPORAL_SIGMA = 0.003

DEFAULT_GRIDS = {
    'gaussian': (0.0, 0.005, 0.01, 0.02, 0.05, 0.1),
    'salt_pepper': (0.0, 0.01, 0.05, 0.1, 0.2, 0.4),
    'temporal': (0, 2, 4, 8, 16, 32),
}


def validate_zeta(kind: str, zeta: float) -> float:
    """
    Prüft zeta gegen den Wertebereich der Rauschart

    Returns:
        zeta (bei temporal als int)

    Raises:
        ValidationError: Bei unbekannter Rauschart oder zeta außerhalb des Bereichs
    """
    if kind not in NOISE_KINDS:
        raise ValidationError(f"Unbekannte Rauschart '{kind}' (erlaubt: {', '.join(NOISE_KINDS)})")
    if not np.isfinite(zeta) or zeta < 0:
        raise ValidationError(f"zeta muss endlich und >= 0 sein: {zeta}")
    if kind == 'salt_pepper' and zeta > 1:
        raise ValidationError(f"salt_pepper: zeta ist eine Wahrscheinlichkeit in [0, 1]: {zeta}")
    if kind == 'temporal':
        if float(zeta) != int(zeta):
            raise ValidationError(f"temporal: zeta muss eine ganze Frame-Anzahl sein: {zeta}")
        return int(zeta)
    return float(zeta)


@dataclass(frozen=True)
class NoiseSpec:
    """Rauschart, Intensität und Seed"""

    kind: str
    zeta: float
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'zeta', validate_zeta(self.kind, self.zeta))
        object.__setattr__(self, 'seed', validate_seed(self.seed))


def add_gaussian(clip: MotionClip, zeta: float, rng: np.random.Generator) -> MotionClip:
    """Addiert unabhängiges N(0, zeta^2)-Rauschen auf jede Koordinate"""
    zeta = validate_zeta('gaussian', zeta)
    if zeta == 0:
        return clip
    noise = rng.normal(0.0, zeta, size=clip.positions.shape)
    return clip.with_positions(clip.positions + noise)


def add_salt_pepper(clip: MotionClip, zeta: float, rng: np.random.Generator) -> MotionClip:
    """
    Addiert Impulsrauschen (+-0.2 m) pro Koordinate

    Für jede Koordinate wird u ~ U(0, 1) gezogen:
    -0.2 falls u <= zeta/2, +0.2 falls zeta/2 < u <= zeta, sonst 0.
    """
    zeta = validate_zeta('salt_pepper', zeta)
    if zeta == 0:
        return clip
    u = rng.random(size=clip.positions.shape)
    offsets = np.where(u <= zeta / 2.0, -IMPULSE_AMPLITUDE,
                       np.where(u <= zeta, IMPULSE_AMPLITUDE, 0.0))
    return clip.with_positions(clip.positions + offsets)


def add_temporal(clip: MotionClip, zeta: int, rng: np.random.Generator) -> MotionClip:
    """
    Addiert N(0, 0.003^2) auf zeta aufeinanderfolgende Frames

    Der Start r wird gleichverteilt aus {0, ..., F - zeta} gezogen; alle
    Frames außerhalb [r, r + zeta) bleiben bitgleich.

    Raises:
        ValidationError: Wenn zeta > F
    """
    zeta = validate_zeta('temporal', zeta)
    frames = clip.num_frames
    if zeta > frames:
        raise ValidationError(f"temporal: zeta={zeta} größer als Clip-Länge {frames}")
    if zeta == 0:
        return clip

    start = int(rng.integers(0, frames - zeta + 1))
    positions = np.array(clip.positions)
    positions[start:start + zeta] += rng.normal(0.0, TEMPORAL_SIGMA, size=positions[start:start + zeta].shape)
    return clip.with_positions(positions)


NOISE_FUNCTIONS: Dict[str, Callable[[MotionClip, float, np.random.Generator], MotionClip]] = {
    'gaussian': add_gaussian,
    'salt_pepper': add_salt_pepper,
    'temporal': add_temporal,
}


def apply_noise(clip: MotionClip, spec: NoiseSpec) -> MotionClip:
    """Wendet eine NoiseSpec mit eigenem Generator auf einen Clip an"""
    return NOISE_FUNCTIONS[spec.kind](clip, spec.zeta, np.random.default_rng(spec.seed))


def apply_noise_many(clips: Sequence[MotionClip], spec: NoiseSpec,
                     rng: Optional[np.random.Generator] = None) -> List[MotionClip]:
    """
    Stört alle Clips mit einem gemeinsamen Generator (in Eingabereihenfolge)

    Args:
        clips: Clips
        spec: Rauschart und zeta
        rng: Generator (None = aus spec.seed)
    """
    generator = rng if rng is not None else np.random.default_rng(spec.seed)
    noise = NOISE_FUNCTIONS[spec.kind]
    return [noise(clip, spec.zeta, generator) for clip in clips]


def derive_seed_sequence(master_seed: int, *key: int) -> np.random.SeedSequence:
    """SeedSequence für einen Teilstrom (spawn_key = key)"""
    return np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in key))


def derive_rng(master_seed: int, *key: int) -> np.random.Generator:
    """Unabhängiger Generator für einen Teilstrom des Master-Seeds"""
    return np.random.default_rng(derive_seed_sequence(master_seed, *key))


def derive_seed(master_seed: int, *key: int) -> int:
    """64-bit Seed für einen Teilstrom (z.B. für NoiseSpec-Dateien)"""
    state = derive_seed_sequence(master_seed, *key).generate_state(2, dtype=np.uint32)
    return int(state[0]) | (int(state[1]) << 32)
