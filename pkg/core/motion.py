"""
Motion-Modul für FMD-Stats
==========================

Datenmodell für Skelette und Bewegungsclips sowie die Umrechnung der
Gelenkpositionen in Richtungsvektoren.

Datentypen:
-----------
    Skeleton:          Gelenknamen + Parent-Indizes (genau eine Wurzel mit -1)
    MotionClip:        F x J x 3 Gelenkpositionen in Metern
    DirectionalMotion: F x (J-1) x 3 Einheitsvektoren Parent -> Kind

Knochen werden immer in aufsteigender Reihenfolge der Kind-Gelenke
(ohne Wurzel) durchnummeriert. Daraus ergibt sich die Zeilenreihenfolge
des Bewegungsbildes und damit reproduzierbare Embeddings.

Dateiformat MOT1:
-----------------
    # joints hip r_hip ...        (optional, vor der Kopfzeile)
    MOT1 <J> <F> <fps>
    <J Parent-Indizes, Wurzel = -1>
    <3*J Werte pro Frame: x y z je Gelenk>   (F Zeilen)
"""

import logging
import os
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateBone, DimensionMismatch, ParseError, TooShort, TopologyError, ValidationError
from .formats import format_reals, parse_header, parse_int, parse_reals, read_lines

logger = logging.getLogger(__name__)

MIN_BONE_NORM = 1e-8
MOTION_SUFFIX = '.mot'
MAX_SEED = 2 ** 64 - 1

# Parameter der synthetischen Bewegungen
MIN_BONE_LENGTH = 0.1
MAX_BONE_LENGTH = 0.5
MAX_AMPLITUDE = 0.3
MIN_FREQUENCY = 0.1
MAX_FREQUENCY = 2.0
DEFAULT_FRAME_RATE = 25.0

HUMANOID_JOINTS = (
    'hip', 'r_hip', 'r_knee', 'r_foot', 'l_hip', 'l_knee', 'l_foot',
    'spine', 'thorax', 'neck', 'head',
    'l_shoulder', 'l_elbow', 'l_wrist', 'r_shoulder', 'r_elbow', 'r_wrist',
)
HUMANOID_PARENTS = (-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 9, 8, 11, 12, 8, 14, 15)


@dataclass(frozen=True)
class Skeleton:
    """Gelenk-Topologie eines Skeletts"""

    joint_names: Tuple[str, ...]
    parents: Tuple[int, ...]

    def __post_init__(self):
        names = tuple(str(name) for name in self.joint_names)
        parents = tuple(int(p) for p in self.parents)
        object.__setattr__(self, 'joint_names', names)
        object.__setattr__(self, 'parents', parents)
        self._validate()

    def _validate(self):
        """
        Prüft, ob das Parent-Array einen Baum beschreibt

        Raises:
            TopologyError: Bei falscher Länge, mehreren/keiner Wurzel,
                           ungültigen Indizes oder Zyklen
        """
        count = len(self.parents)
        if len(self.joint_names) != count:
            raise TopologyError(
                f"{len(self.joint_names)} Gelenknamen, aber {count} Parent-Indizes")
        if count < 2:
            raise TopologyError("Ein Skelett benötigt mindestens 2 Gelenke")

        roots = [i for i, p in enumerate(self.parents) if p == -1]
        if len(roots) != 1:
            raise TopologyError(f"Genau eine Wurzel erwartet, {len(roots)} gefunden")

        for joint, parent in enumerate(self.parents):
            if parent == -1:
                continue
            if not 0 <= parent < count or parent == joint:
                raise TopologyError(f"Ungültiger Parent {parent} für Gelenk {joint}")

        # Von jedem Gelenk aus muss die Wurzel in < J Schritten erreichbar sein
        for joint in range(count):
            current = joint
            for _ in range(count):
                if self.parents[current] == -1:
                    break
                current = self.parents[current]
            else:
                raise TopologyError(f"Zyklus im Parent-Array bei Gelenk {joint}")

    @property
    def num_joints(self) -> int:
        return len(self.parents)

    @property
    def root(self) -> int:
        return self.parents.index(-1)

    @property
    def bones(self) -> Tuple[int, ...]:
        """Kind-Gelenke der Knochen in kanonischer Reihenfolge"""
        return tuple(j for j, p in enumerate(self.parents) if p != -1)

    @property
    def bone_parents(self) -> Tuple[int, ...]:
        """Parent-Gelenke der Knochen (gleiche Reihenfolge wie bones)"""
        return tuple(self.parents[j] for j in self.bones)

    @property
    def num_bones(self) -> int:
        return self.num_joints - 1

    def topological_order(self) -> List[int]:
        """Gelenke in Breitensuche ab der Wurzel (Parents vor Kindern)"""
        children = {j: [] for j in range(self.num_joints)}
        for joint, parent in enumerate(self.parents):
            if parent != -1:
                children[parent].append(joint)

        order = []
        queue = deque([self.root])
        while queue:
            joint = queue.popleft()
            order.append(joint)
            queue.extend(children[joint])
        return order


def validate_seed(seed, name: str = 'seed') -> int:
    """Seeds sind 64-bit Ganzzahlen ohne Vorzeichen"""
    seed = int(seed)
    if not 0 <= seed <= MAX_SEED:
        raise ValidationError(f"{name} muss in [0, 2^64-1] liegen: {seed}")
    return seed


def humanoid_skeleton() -> Skeleton:
    """17-Gelenk Humanoid (Standard des Experiments)"""
    return Skeleton(HUMANOID_JOINTS, HUMANOID_PARENTS)


@dataclass(frozen=True, eq=False)
class MotionClip:
    """Bewegungsclip: F x J x 3 Gelenkpositionen (Meter)"""

    skeleton: Skeleton
    positions: np.ndarray
    frame_rate: float = DEFAULT_FRAME_RATE

    def __post_init__(self):
        positions = np.array(self.positions, dtype=np.float64)
        joints = self.skeleton.num_joints
        if positions.ndim != 3 or positions.shape[1:] != (joints, 3):
            raise DimensionMismatch(
                f"Positionen mit Form (F, {joints}, 3) erwartet, {positions.shape} erhalten")
        if positions.shape[0] < 1:
            raise DimensionMismatch("Ein Clip benötigt mindestens einen Frame")
        if not np.all(np.isfinite(positions)):
            raise ValidationError("Positionen enthalten nicht-endliche Werte")
        if not float(self.frame_rate) > 0:
            raise ValidationError(f"Bildrate muss positiv sein: {self.frame_rate}")

        positions.setflags(write=False)
        object.__setattr__(self, 'positions', positions)
        object.__setattr__(self, 'frame_rate', float(self.frame_rate))

    @property
    def num_frames(self) -> int:
        return self.positions.shape[0]

    def with_positions(self, positions: np.ndarray) -> 'MotionClip':
        """Neuer Clip mit gleichem Skelett und gleicher Bildrate"""
        return MotionClip(self.skeleton, positions, self.frame_rate)

    def translated(self, offset: Sequence[float]) -> 'MotionClip':
        """Verschiebt alle Gelenke in allen Frames um einen konstanten Vektor"""
        return self.with_positions(self.positions + np.asarray(offset, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class DirectionalMotion:
    """F x (J-1) x 3 Richtungsvektoren"""

    vectors: np.ndarray

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=np.float64)
        if vectors.ndim != 3 or vectors.shape[2] != 3:
            raise DimensionMismatch(f"Vektoren mit Form (F, B, 3) erwartet, {vectors.shape} erhalten")
        if vectors.shape[0] < 1 or vectors.shape[1] < 1:
            raise DimensionMismatch("Mindestens ein Frame und ein Knochen erforderlich")
        vectors.setflags(write=False)
        object.__setattr__(self, 'vectors', vectors)

    @property
    def num_frames(self) -> int:
        return self.vectors.shape[0]

    @property
    def num_bones(self) -> int:
        return self.vectors.shape[1]

    def norm_deviation(self) -> float:
        """Größte Abweichung einer Vektornorm von 1"""
        return float(np.max(np.abs(np.linalg.norm(self.vectors, axis=-1) - 1.0)))


def _bone_differences(clip: MotionClip) -> np.ndarray:
    skeleton = clip.skeleton
    children = np.asarray(skeleton.bones)
    parents = np.asarray(skeleton.bone_parents)
    return clip.positions[:, children, :] - clip.positions[:, parents, :]


def bone_lengths(clip: MotionClip) -> np.ndarray:
    """Knochenlängen pro Frame (F x (J-1))"""
    return np.linalg.norm(_bone_differences(clip), axis=-1)


def to_directional(clip: MotionClip) -> DirectionalMotion:
    """
    Wandelt Gelenkpositionen in normierte Knochen-Richtungsvektoren um

    Args:
        clip: Bewegungsclip

    Returns:
        DirectionalMotion mit einem Einheitsvektor pro Frame und Knochen

    Raises:
        DegenerateBone: Wenn ein Knochen in einem Frame kürzer als 1e-8 ist
    """
    diffs = _bone_differences(clip)
    norms = np.linalg.norm(diffs, axis=-1)

    degenerate = np.argwhere(norms < MIN_BONE_NORM)
    if degenerate.size:
        frame, bone = degenerate[0]
        raise DegenerateBone(int(frame), int(bone))

    return DirectionalMotion(diffs / norms[..., np.newaxis])


def window(clip: MotionClip, length: int, stride: int) -> List[MotionClip]:
    """
    Schneidet einen Clip in Fenster fester Länge

    Unvollständige Fenster am Ende werden verworfen.

    Args:
        clip: Bewegungsclip
        length: Fensterlänge L in Frames (>= 1)
        stride: Schrittweite in Frames (>= 1)

    Returns:
        Liste von Clips mit genau L Frames (Offsets 0, stride, 2*stride, ...)

    Raises:
        TooShort: Wenn der Clip weniger als L Frames hat
    """
    if length < 1 or stride < 1:
        raise ValidationError(f"Fensterlänge und Schrittweite müssen >= 1 sein ({length}, {stride})")
    frames = clip.num_frames
    if frames < length:
        raise TooShort(frames, length)

    return [clip.with_positions(clip.positions[offset:offset + length])
            for offset in range(0, frames - length + 1, stride)]


def window_dataset(clips: Sequence[MotionClip], length: int,
                   stride: Optional[int] = None) -> List[MotionClip]:
    """Fenstert alle Clips (stride=None -> nicht überlappend) in Eingabereihenfolge"""
    step = length if not stride else stride
    windows = []
    for clip in clips:
        windows.extend(window(clip, length, step))
    return windows


def _sinusoids(rng: np.random.Generator, times: np.ndarray) -> np.ndarray:
    """Summe aus 2-4 Sinusschwingungen pro Koordinate (F x 3)"""
    count = int(rng.integers(2, 5))
    amplitudes = rng.uniform(0.0, MAX_AMPLITUDE, size=(count, 1, 3))
    frequencies = rng.uniform(MIN_FREQUENCY, MAX_FREQUENCY, size=(count, 1, 3))
    phases = rng.uniform(0.0, 2.0 * np.pi, size=(count, 1, 3))
    waves = amplitudes * np.sin(2.0 * np.pi * frequencies * times[np.newaxis, :, np.newaxis] + phases)
    return waves.sum(axis=0)


def synth_dataset(seed: int, n_clips: int, skeleton: Skeleton, frames: int,
                  frame_rate: float = DEFAULT_FRAME_RATE) -> List[MotionClip]:
    """
    Erzeugt einen deterministischen synthetischen Bewegungsdatensatz

    Eine gemeinsame Ruhepose (Knochenlängen 0.1-0.5 m, zufällige
    Ruherichtungen) wird pro Clip und Gelenk durch 2-4 Sinusschwingungen
    (Amplitude <= 0.3 m, Frequenz <= 2 Hz) bewegt. Die Auslenkung wirkt nur
    tangential zur Ruherichtung, danach wird auf die Knochenlänge
    zurückskaliert: Knochen bleiben starr und degenerieren nie.

    Args:
        seed: Startwert des Zufallsgenerators
        n_clips: Anzahl Clips (>= 1)
        skeleton: Skelett-Topologie
        frames: Frames pro Clip (>= 1)
        frame_rate: Bildrate (Metadaten, bestimmt die Zeitachse der Schwingungen)

    Returns:
        Liste von n_clips MotionClips
    """
    if n_clips < 1:
        raise ValidationError(f"n_clips muss >= 1 sein: {n_clips}")
    if frames < 1:
        raise ValidationError(f"frames muss >= 1 sein: {frames}")
    seed = validate_seed(seed)

    rng = np.random.default_rng(seed)
    joints = skeleton.num_joints
    order = skeleton.topological_order()

    lengths = rng.uniform(MIN_BONE_LENGTH, MAX_BONE_LENGTH, size=joints)
    rest = rng.normal(size=(joints, 3))
    rest /= np.linalg.norm(rest, axis=1, keepdims=True)

    times = np.arange(frames, dtype=np.float64) / frame_rate
    clips = []
    for _ in range(n_clips):
        positions = np.empty((frames, joints, 3), dtype=np.float64)
        for joint in order:
            wiggle = _sinusoids(rng, times)
            parent = skeleton.parents[joint]
            if parent == -1:
                positions[:, joint] = wiggle
                continue
            direction = rest[joint]
            tangential = wiggle - np.outer(wiggle @ direction, direction)
            raw = lengths[joint] * direction + tangential
            unit = raw / np.linalg.norm(raw, axis=1, keepdims=True)
            positions[:, joint] = positions[:, parent] + lengths[joint] * unit
        clips.append(MotionClip(skeleton, positions, frame_rate))

    logger.debug("Synthetischer Datensatz: %d Clips, %d Frames, Seed %d", n_clips, frames, seed)
    return clips


def save_motion(clip: MotionClip, path) -> None:
    """Speichert einen Clip im MOT1-Format"""
    skeleton = clip.skeleton
    lines = []
    if all(name and not any(c.isspace() for c in name) for name in skeleton.joint_names):
        lines.append('# joints ' + ' '.join(skeleton.joint_names))
    lines.append(f"MOT1 {skeleton.num_joints} {clip.num_frames} {format(clip.frame_rate, '.17g')}")
    lines.append(' '.join(str(p) for p in skeleton.parents))
    for frame in clip.positions:
        lines.append(format_reals(frame.reshape(-1)))

    with open(path, 'w', encoding='utf-8') as f:
        f.write('\n'.join(lines) + '\n')


def load_motion(path) -> MotionClip:
    """
    Lädt einen Clip im MOT1-Format

    Raises:
        ParseError: Bei fehlerhaftem Aufbau der Datei
        TopologyError: Bei ungültigem Parent-Array
    """
    lines, comments = read_lines(path)
    header = parse_header(lines, 'MOT1', 3)
    header_line = lines[0][0]
    joints = parse_int(header[0], header_line, 'J', minimum=1)
    frames = parse_int(header[1], header_line, 'F', minimum=1)
    try:
        frame_rate = float(header[2])
    except ValueError:
        raise ParseError(header_line, f"Ungültige Bildrate: {header[2]}") from None
    if not (np.isfinite(frame_rate) and frame_rate > 0):
        raise ParseError(header_line, f"Bildrate muss positiv sein: {header[2]}")

    if len(lines) != frames + 2:
        raise ParseError(lines[-1][0], f"{frames} Frame-Zeilen erwartet, {len(lines) - 2} gefunden")

    parents_line, parents_text = lines[1]
    tokens = parents_text.split()
    if len(tokens) != joints:
        raise ParseError(parents_line, f"{joints} Parent-Indizes erwartet, {len(tokens)} gefunden")
    try:
        parents = [int(t) for t in tokens]
    except ValueError:
        raise ParseError(parents_line, "Parent-Indizes müssen ganze Zahlen sein") from None

    names = [f"joint_{i}" for i in range(joints)]
    for comment in comments:
        fields = comment.split()
        if fields and fields[0] == 'joints' and len(fields) == joints + 1:
            names = fields[1:]

    skeleton = Skeleton(names, parents)
    positions = np.empty((frames, joints, 3), dtype=np.float64)
    for index, (number, text) in enumerate(lines[2:]):
        positions[index] = parse_reals(text, number, expected=3 * joints).reshape(joints, 3)

    return MotionClip(skeleton, positions, frame_rate)


def save_motion_dir(clips: Sequence[MotionClip], directory, prefix: str = 'clip') -> List[Path]:
    """Speichert Clips als <prefix>_0000.mot, <prefix>_0001.mot, ..."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for index, clip in enumerate(clips):
        path = Path(directory) / f"{prefix}_{index:04d}{MOTION_SUFFIX}"
        save_motion(clip, path)
        paths.append(path)
    return paths


def load_motion_dir(directory) -> List[MotionClip]:
    """
    Lädt alle .mot-Dateien eines Verzeichnisses (nach Namen sortiert)

    Raises:
        ValidationError: Wenn keine Dateien gefunden werden
        TopologyError: Wenn die Clips unterschiedliche Skelette haben
    """
    paths = sorted(Path(directory).glob(f"*{MOTION_SUFFIX}"))
    if not paths:
        raise ValidationError(f"Keine {MOTION_SUFFIX}-Dateien in {directory}")

    clips = [load_motion(path) for path in paths]
    reference = clips[0].skeleton.parents
    for path, clip in zip(paths, clips):
        if clip.skeleton.parents != reference:
            raise TopologyError(f"{path.name}: Skelett weicht von {paths[0].name} ab")
    return clips
