"""
Experiment Module für FMD-Stats
===============================

Validiert die Metrik mit kontrolliert gestörten Bewegungen.

Ablauf pro Fensterlänge L:
--------------------------
    1. Clips (nach Clip aufgeteilt in Training/Test) auf L Frames fenstern
    2. Embedder (Standard: PCA) auf den Trainingsfenstern trainieren
    3. Saubere Testfenster einbetten -> Referenz-Statistik (einmal pro L)
    4. Für jede Zelle (Rauschart, zeta, Wiederholung): Testfenster stören,
       einbetten, Gauß-Momente schätzen, FMD gegen die Referenz
    5. Mittelwert und Standardabweichung über die Wiederholungen

Jede Zelle bekommt einen eigenen Zufallsstrom, abgeleitet aus
(master_seed, L, Rauschart, zeta-Index, Wiederholung). Parallele und
serielle Ausführung liefern daher denselben Report.

Verwendung:
----------
    report = run_experiment(ConfigManager('experiment.ini').get_experiment_config())
"""

import csv
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.stats

from core import __version__
from core.config_manager import SYNTHETIC, ExperimentConfig
from core.embed import Embedder, EmbedderFactory, fit_pca
from core.errors import DimensionMismatch, ParseError, ValidationError
from core.formats import INVALID_ENCODING
from core.frechet import GaussianStats, fit_gaussian, frechet_distance
from core.imaging import to_image
from core.motion import MotionClip, humanoid_skeleton, load_motion_dir, synth_dataset, to_directional, window_dataset
from core.perturb import NOISE_KINDS, NoiseSpec, apply_noise_many, derive_rng, derive_seed
from core.stats_exporter import REPORT_COLUMNS

logger = logging.getLogger(__name__)

# Teilströme des Master-Seeds
SYNTH_STREAM = 0
SPLIT_STREAM = 1
CELL_STREAM = 2

KIND_INDEX = {kind: index for index, kind in enumerate(NOISE_KINDS)}


@dataclass(frozen=True)
class ReportCell:
    """Ergebnis einer (Rauschart, Länge, zeta)-Zelle"""

    kind: str
    length: int
    zeta: float
    mean_fmd: float
    std_fmd: float
    reps: int

    def as_row(self) -> Dict[str, object]:
        return {
            'kind': self.kind,
            'length': self.length,
            'zeta': self.zeta,
            'mean_fmd': self.mean_fmd,
            'std_fmd': self.std_fmd,
            'reps': self.reps,
        }


@dataclass
class ExperimentReport:
    """Alle Zellen eines Experiments plus Herkunftsangaben"""

    cells: List[ReportCell]
    config_hash: str = ''
    version: str = __version__
    covariance: str = 'unbiased'
    config: Dict[str, str] = field(default_factory=dict)
    trends: Dict[str, Dict] = field(default_factory=dict)

    @property
    def kinds(self) -> List[str]:
        present = {cell.kind for cell in self.cells}
        return [kind for kind in NOISE_KINDS if kind in present]

    @property
    def lengths(self) -> List[int]:
        return sorted({cell.length for cell in self.cells})

    def series(self, kind: str, length: int) -> List[ReportCell]:
        """Zellen einer Kurve, nach zeta sortiert"""
        return sorted((c for c in self.cells if c.kind == kind and c.length == length),
                      key=lambda c: c.zeta)


def cell_zetas(config: ExperimentConfig, kind: str, length: int) -> List[Tuple[int, float]]:
    """
    zeta-Werte (mit Gitterindex), die bei Länge L ausgewertet werden

    Temporal-zeta größer als die kleinste Länge laufen nur bei der
    größten Länge (z.B. zeta=32 nur bei 64 Frames).
    """
    grid = config.grid(kind)
    shortest, longest = min(config.lengths), max(config.lengths)
    selected = []
    for index, zeta in enumerate(grid):
        if kind == 'temporal' and zeta > shortest and length != longest:
            continue
        selected.append((index, zeta))
    return selected


def encode(model: Embedder, windows: Sequence[MotionClip]) -> np.ndarray:
    """
    Fenster -> Richtungsvektoren -> Bilder -> Features (n x d)

    Raises:
        DimensionMismatch: Wenn der Embedder kein n x latent_dim Array liefert
    """
    features = np.asarray(model.embed_many([to_image(to_directional(clip)) for clip in windows]),
                          dtype=np.float64)
    if features.shape != (len(windows), model.latent_dim):
        raise DimensionMismatch(
            f"Embedder lieferte Form {features.shape}, ({len(windows)}, {model.latent_dim}) erwartet")
    return features


class ExperimentRunner:
    """Führt ein Validierungsexperiment aus"""

    def __init__(self, config: ExperimentConfig, clips: Optional[Sequence[MotionClip]] = None,
                 embedder_factory: EmbedderFactory = fit_pca):
        """
        Initialisiert den Runner

        Args:
            config: Validierte Experiment-Konfiguration
            clips: Optional bereits geladene Clips (überschreibt config.dataset)
            embedder_factory: Trainiert pro Länge einen Embedder aus
                (Trainingsbilder, latent_dim)
        """
        self.config = config
        self._clips = list(clips) if clips is not None else None
        self.embedder_factory = embedder_factory

    def load_clips(self) -> List[MotionClip]:
        """Synthetischer Datensatz oder MOT1-Verzeichnis"""
        if self._clips is not None:
            return self._clips
        config = self.config
        if config.dataset == SYNTHETIC:
            return synth_dataset(derive_seed(config.master_seed, SYNTH_STREAM), config.synth_clips,
                                 humanoid_skeleton(), config.synth_frames, config.synth_fps)
        return load_motion_dir(config.dataset)

    def split(self, clips: Sequence[MotionClip]) -> Tuple[List[MotionClip], List[MotionClip]]:
        """Teilt nach Clips in Training und Test (train_fraction)"""
        count = len(clips)
        if count < 2:
            raise ValidationError(f"Mindestens 2 Clips benötigt, {count} vorhanden")
        order = derive_rng(self.config.master_seed, SPLIT_STREAM).permutation(count)
        n_train = min(max(int(round(count * self.config.train_fraction)), 1), count - 1)
        train = sorted(order[:n_train].tolist())
        test = sorted(order[n_train:].tolist())
        return [clips[i] for i in train], [clips[i] for i in test]

    def run(self) -> ExperimentReport:
        """
        Führt alle Zellen aus und aggregiert sie

        Returns:
            ExperimentReport mit Trend-Zusammenfassung
        """
        config = self.config
        train, test = self.split(self.load_clips())
        logger.info("Datensatz: %d Trainings- und %d Test-Clips", len(train), len(test))

        cells = []
        for length in config.lengths:
            cells.extend(self._run_length(length, train, test))

        report = ExperimentReport(
            cells=cells,
            config_hash=config.config_hash(),
            covariance=config.covariance,
            config=config.to_items(),
        )
        report.trends = summarize_trends(report)
        return report

    def _run_length(self, length: int, train: Sequence[MotionClip],
                    test: Sequence[MotionClip]) -> List[ReportCell]:
        config = self.config
        stride = config.stride or length
        train_windows = window_dataset(train, length, stride)
        test_windows = window_dataset(test, length, stride)

        model = self.embedder_factory([to_image(to_directional(clip)) for clip in train_windows],
                                      config.latent_dim)
        reference = fit_gaussian(encode(model, test_windows), config.covariance)
        logger.info("L=%d: %d Trainings-, %d Testfenster, d=%d",
                    length, len(train_windows), len(test_windows), model.latent_dim)

        tasks = [(kind, index, zeta, rep)
                 for kind in NOISE_KINDS
                 for index, zeta in cell_zetas(config, kind, length)
                 for rep in range(config.repetitions)]

        def run_task(task):
            kind, index, zeta, rep = task
            rng = derive_rng(config.master_seed, CELL_STREAM, length, KIND_INDEX[kind], index, rep)
            return self._score(model, reference, test_windows, NoiseSpec(kind, zeta), rng)

        if config.workers > 1:
            with ThreadPoolExecutor(max_workers=config.workers) as pool:
                scores = list(pool.map(run_task, tasks))
        else:
            scores = [run_task(task) for task in tasks]

        grouped: Dict[Tuple[str, float], List[float]] = {}
        for (kind, _, zeta, _), score in zip(tasks, scores):
            grouped.setdefault((kind, zeta), []).append(score)

        cells = []
        for (kind, zeta), values in grouped.items():
            values = np.asarray(values)
            ddof = 1 if values.size > 1 else 0
            cells.append(ReportCell(kind, length, float(zeta), float(values.mean()),
                                    float(values.std(ddof=ddof)), int(values.size)))
        return cells

    def _score(self, model: Embedder, reference: GaussianStats, windows: Sequence[MotionClip],
               spec: NoiseSpec, rng: np.random.Generator) -> float:
        """FMD einer gestörten Testmenge gegen die saubere Referenz"""
        perturbed = apply_noise_many(windows, spec, rng)
        stats = fit_gaussian(encode(model, perturbed), self.config.covariance)
        return frechet_distance(reference, stats)


def run_experiment(config: ExperimentConfig,
                   clips: Optional[Sequence[MotionClip]] = None,
                   embedder_factory: EmbedderFactory = fit_pca) -> ExperimentReport:
    """Führt ein Experiment aus (siehe ExperimentRunner)"""
    return ExperimentRunner(config, clips, embedder_factory).run()


def _spearman(zetas: Sequence[float], means: Sequence[float]) -> Optional[float]:
    if len(zetas) < 2 or np.ptp(means) == 0:
        return None
    return float(scipy.stats.spearmanr(zetas, means)[0])


def summarize_trends(report: ExperimentReport) -> Dict[str, Dict]:
    """
    Fasst die Trends des Reports zusammen

    Returns:
        Dictionary mit
            'spearman':             {kind: {L: rho von mean_fmd über zeta}}
            'temporal_zscore':      {L: (mean(top zeta) - mean(zeta=0)) / gepoolter Standardfehler}
            'temporal_to_gaussian': {L: mean temporal(top zeta) / mean gaussian(top zeta)}
    """
    spearman: Dict[str, Dict[str, Optional[float]]] = {}
    zscores: Dict[str, Optional[float]] = {}
    ratios: Dict[str, Optional[float]] = {}

    for kind in report.kinds:
        spearman[kind] = {}
        for length in report.lengths:
            series = report.series(kind, length)
            if series:
                spearman[kind][str(length)] = _spearman([c.zeta for c in series], [c.mean_fmd for c in series])

    for length in report.lengths:
        temporal = report.series('temporal', length)
        if len(temporal) >= 2 and temporal[0].zeta == 0:
            base, top = temporal[0], temporal[-1]
            pooled = np.sqrt(base.std_fmd ** 2 / base.reps + top.std_fmd ** 2 / top.reps)
            zscores[str(length)] = float((top.mean_fmd - base.mean_fmd) / pooled) if pooled > 0 else None

        gaussian = report.series('gaussian', length)
        if temporal and gaussian and gaussian[-1].mean_fmd > 0:
            ratios[str(length)] = temporal[-1].mean_fmd / gaussian[-1].mean_fmd

    for kind, values in spearman.items():
        logger.info("Spearman %s: %s", kind, values)
    logger.info("Temporal z-Score: %s, Temporal/Gauss: %s", zscores, ratios)

    return {
        'spearman': spearman,
        'temporal_zscore': zscores,
        'temporal_to_gaussian': ratios,
    }


def load_report_csv(path) -> ExperimentReport:
    """
    Liest einen Report aus der CSV-Datei (nur Zellen, ohne Herkunft/Trends)

    Raises:
        ParseError: Bei falscher Kopfzeile oder ungültigen Werten
    """
    cells = []
    try:
        with open(path, 'r', newline='', encoding='utf-8') as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != REPORT_COLUMNS:
                raise ParseError(1, f"Spalten {','.join(REPORT_COLUMNS)} erwartet")
            for line, row in enumerate(reader, start=2):
                if row['kind'] not in NOISE_KINDS:
                    raise ParseError(line, f"Unbekannte Rauschart '{row['kind']}'")
                try:
                    cells.append(ReportCell(row['kind'], int(row['length']), float(row['zeta']),
                                            float(row['mean_fmd']), float(row['std_fmd']), int(row['reps'])))
                except (TypeError, ValueError):
                    raise ParseError(line, "Ungültiger Zahlenwert") from None
    except UnicodeDecodeError:
        raise ParseError(None, INVALID_ENCODING) from None

    report = ExperimentReport(cells=cells)
    report.trends = summarize_trends(report)
    return report
