"""
Config Manager für FMD-Stats
Verwaltet die Experiment-Konfiguration (flache key = value Datei)

Beispiel:
    master_seed = 20220101
    dataset = synthetic
    lengths = 18, 34, 64
    gaussian_grid = 0, 0.005, 0.01, 0.02, 0.05, 0.1

Eine Abschnittsüberschrift ist optional; fehlt sie, wird [experiment]
ergänzt. CLI-Flags überschreiben Werte aus der Datei.
"""

import configparser
import hashlib
import os
from dataclasses import dataclass, fields, replace
from typing import Any, Callable, Dict, Optional, Tuple

from .errors import ConfigError, ValidationError
from .frechet import ESTIMATORS
from .motion import MAX_SEED
from .perturb import DEFAULT_GRIDS, validate_zeta

SECTION = 'experiment'
SYNTHETIC = 'synthetic'


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameter eines Validierungsexperiments"""

    master_seed: int = 20220101
    dataset: str = SYNTHETIC
    synth_clips: int = 500
    synth_frames: int = 64
    synth_fps: float = 25.0
    lengths: Tuple[int, ...] = (18, 34, 64)
    stride: int = 0
    latent_dim: int = 64
    repetitions: int = 20
    train_fraction: float = 0.7
    gaussian_grid: Tuple[float, ...] = DEFAULT_GRIDS['gaussian']
    salt_pepper_grid: Tuple[float, ...] = DEFAULT_GRIDS['salt_pepper']
    temporal_grid: Tuple[int, ...] = DEFAULT_GRIDS['temporal']
    covariance: str = 'unbiased'
    workers: int = 1

    def grid(self, kind: str) -> Tuple[float, ...]:
        """zeta-Gitter einer Rauschart"""
        return getattr(self, f"{kind}_grid")

    def validate(self) -> 'ExperimentConfig':
        """
        Prüft alle Werte

        Returns:
            self (für Verkettung)

        Raises:
            ConfigError: Mit dem Namen des ungültigen Feldes
        """
        if not 0 <= self.master_seed <= MAX_SEED:
            raise ConfigError('master_seed', "muss in [0, 2^64-1] liegen")
        if not self.lengths:
            raise ConfigError('lengths', "mindestens eine Länge erforderlich")
        if any(length < 2 for length in self.lengths):
            raise ConfigError('lengths', "alle Längen müssen >= 2 sein")
        if len(set(self.lengths)) != len(self.lengths):
            raise ConfigError('lengths', "Längen doppelt angegeben")
        if self.stride < 0:
            raise ConfigError('stride', "muss >= 0 sein (0 = Fensterlänge)")
        if self.latent_dim < 1:
            raise ConfigError('latent_dim', "muss >= 1 sein")
        if self.repetitions < 1:
            raise ConfigError('repetitions', "muss >= 1 sein")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError('train_fraction', "muss in (0, 1) liegen")
        if self.covariance not in ESTIMATORS:
            raise ConfigError('covariance', f"erlaubt: {', '.join(ESTIMATORS)}")
        if self.workers < 1:
            raise ConfigError('workers', "muss >= 1 sein")
        if self.dataset == SYNTHETIC:
            if self.synth_clips < 2:
                raise ConfigError('synth_clips', "mindestens 2 Clips (Training und Test)")
            if self.synth_frames < max(self.lengths):
                raise ConfigError('synth_frames', f"muss >= größte Länge {max(self.lengths)} sein")
            if not self.synth_fps > 0:
                raise ConfigError('synth_fps', "muss positiv sein")
        elif not os.path.isdir(self.dataset):
            raise ConfigError('dataset', f"'{SYNTHETIC}' oder ein Verzeichnis erwartet: {self.dataset}")

        for kind in DEFAULT_GRIDS:
            name = f"{kind}_grid"
            grid = self.grid(kind)
            if not grid:
                raise ConfigError(name, "Gitter ist leer")
            if list(grid) != sorted(set(grid)):
                raise ConfigError(name, "Werte müssen aufsteigend und eindeutig sein")
            for zeta in grid:
                try:
                    validate_zeta(kind, zeta)
                except ValidationError as e:
                    raise ConfigError(name, str(e)) from None
        if max(self.temporal_grid) > max(self.lengths):
            raise ConfigError('temporal_grid', f"zeta > größte Länge {max(self.lengths)}")
        return self

    def to_items(self) -> Dict[str, str]:
        """Kanonische key/value-Darstellung (Reihenfolge der Felder)"""
        return {f.name: _format_value(getattr(self, f.name)) for f in fields(self)}

    def config_hash(self) -> str:
        """SHA-256 der kanonischen Darstellung"""
        text = '\n'.join(f"{key} = {value}" for key, value in self.to_items().items())
        return hashlib.sha256(text.encode('utf-8')).hexdigest()


def _format_value(value: Any) -> str:
    if isinstance(value, tuple):
        return ', '.join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _int_list(text: str) -> Tuple[int, ...]:
    return tuple(int(token) for token in text.replace(',', ' ').split())


def _float_list(text: str) -> Tuple[float, ...]:
    return tuple(float(token) for token in text.replace(',', ' ').split())


def _temporal_list(text: str) -> Tuple[int, ...]:
    values = _float_list(text)
    if any(v != int(v) for v in values):
        raise ValueError("ganze Frame-Anzahlen erwartet")
    return tuple(int(v) for v in values)


FIELD_PARSERS: Dict[str, Callable[[str], Any]] = {
    'master_seed': int,
    'dataset': str,
    'synth_clips': int,
    'synth_frames': int,
    'synth_fps': float,
    'lengths': _int_list,
    'stride': int,
    'latent_dim': int,
    'repetitions': int,
    'train_fraction': float,
    'gaussian_grid': _float_list,
    'salt_pepper_grid': _float_list,
    'temporal_grid': _temporal_list,
    'covariance': str,
    'workers': int,
}


def parse_value(key: str, text: str) -> Any:
    """
    Wandelt einen Konfigurationswert in den Feldtyp um

    Raises:
        ConfigError: Bei unbekanntem Schlüssel oder ungültigem Wert
    """
    if key not in FIELD_PARSERS:
        raise ConfigError(key, "unbekannter Schlüssel")
    try:
        return FIELD_PARSERS[key](str(text).strip())
    except ValueError as e:
        raise ConfigError(key, f"ungültiger Wert '{text}' ({e})") from None


class ConfigManager:
    """Lädt, überschreibt und speichert die Experiment-Konfiguration"""

    def __init__(self, config_file: Optional[str] = None):
        """
        Initialisiert den ConfigManager

        Args:
            config_file: Pfad zur Config-Datei (None = nur Standardwerte)
        """
        self.config_file = config_file
        self.values: Dict[str, Any] = {}
        if config_file:
            self.load_config()

    def load_config(self):
        """
        Lädt die Konfiguration aus der Datei

        Raises:
            ConfigError: Bei fehlender Datei, Syntaxfehlern oder ungültigen Werten
        """
        if not os.path.exists(self.config_file):
            raise ConfigError('config', f"Datei nicht gefunden: {self.config_file}")

        with open(self.config_file, 'r', encoding='utf-8') as f:
            text = f.read()
        if not any(line.strip().startswith('[') for line in text.splitlines()):
            text = f"[{SECTION}]\n{text}"

        parser = configparser.ConfigParser(interpolation=None)
        try:
            parser.read_string(text, source=self.config_file)
        except configparser.Error as e:
            raise ConfigError('config', f"Syntaxfehler: {e}") from None

        for section in parser.sections():
            if section != SECTION:
                raise ConfigError(section, f"unbekannter Abschnitt, nur [{SECTION}] erlaubt")
        if parser.has_section(SECTION):
            for key, value in parser.items(SECTION):
                self.values[key] = parse_value(key, value)

    def apply_overrides(self, overrides: Dict[str, Any]):
        """Überschreibt Werte (None-Werte werden ignoriert, Strings werden geparst)"""
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in FIELD_PARSERS:
                raise ConfigError(key, "unbekannter Schlüssel")
            if isinstance(value, list):
                value = tuple(value)
            self.values[key] = parse_value(key, value) if isinstance(value, str) else value

    def get_experiment_config(self) -> ExperimentConfig:
        """
        Gibt die validierte Konfiguration zurück

        Raises:
            ConfigError: Bei ungültigen Werten
        """
        return replace(ExperimentConfig(), **self.values).validate()

    def save_config(self, path: Optional[str] = None):
        """Speichert die aktuelle Konfiguration in kanonischer Form"""
        target = path or self.config_file
        config = replace(ExperimentConfig(), **self.values)
        with open(target, 'w', encoding='utf-8') as f:
            for key, value in config.to_items().items():
                f.write(f"{key} = {value}\n")
