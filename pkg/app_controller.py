"""
Application Controller für FMD-Stats
====================================

Kommandozeilen-Controller, der alle Core- und Feature-Module orchestriert.

Architektur:
-----------
    UI-Layer:
        - PlotView: SVG-Diagramme der Reports (Matplotlib)

    Feature-Layer:
        - ExperimentRunner: Validierungsexperiment über Rauschart x zeta x Länge

    Core-Layer:
        - motion / imaging: Skelette, Clips, Richtungsvektoren, Bewegungsbilder
        - perturb: Gauß-, Salt-and-Pepper- und temporales Rauschen
        - embed: PCA-Embedder, FEAT1-Import
        - frechet: Gauß-Momente und Fréchet-Distanz
        - ConfigManager / StatsExporter: Konfiguration und Report-Export

Unterbefehle:
------------
    synth, train-embedder, embed, stats, score, perturb, experiment, plot

Exitcodes: 0 = Erfolg, 2 = Validierungs-/Aufruffehler, 1 = Laufzeitfehler

Verwendung:
----------
    app = FmdStatsApp()
    sys.exit(app.run(sys.argv[1:]))

Lizenz: MIT
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from core import __version__
from core.config_manager import ConfigManager
from core.embed import export_features, fit_pca, import_features, load_model, save_model
from core.errors import FmdError, ParseError, ValidationError
from core.formats import read_lines
from core.frechet import DEFAULT_ESTIMATOR, ESTIMATORS, fit_gaussian, frechet_distance, load_stats, save_stats
from core.imaging import export_png, to_image
from core.motion import (MOTION_SUFFIX, humanoid_skeleton, load_motion, load_motion_dir, save_motion,
                         save_motion_dir, synth_dataset, to_directional, window_dataset)
from core.perturb import NOISE_KINDS, NoiseSpec, apply_noise, apply_noise_many
from core.stats_exporter import REPORT_FORMATS, StatsExporter
from features.experiment import encode, load_report_csv, run_experiment

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2


def _load_clips(path: str):
    """Einzelne .mot-Datei oder Verzeichnis mit .mot-Dateien"""
    if os.path.isdir(path):
        return load_motion_dir(path)
    return [load_motion(path)]


def _load_gaussian(path: str, covariance: str):
    """Lädt STATS1 direkt oder schätzt die Statistik aus FEAT1"""
    lines, _ = read_lines(path)
    magic = lines[0][1].split()[0] if lines else ''
    if magic == 'STATS1':
        return load_stats(path)
    if magic == 'FEAT1':
        return fit_gaussian(import_features(path), covariance)
    raise ParseError(None, f"{path}: STATS1 oder FEAT1 erwartet")


def _formats(text: str) -> List[str]:
    formats = [token.strip() for token in text.split(',') if token.strip()]
    unknown = [fmt for fmt in formats if fmt not in REPORT_FORMATS]
    if unknown or not formats:
        raise ValidationError(f"Unbekanntes Format {unknown} (erlaubt: {', '.join(REPORT_FORMATS)})")
    return formats


class FmdStatsApp:
    """Hauptanwendung - orchestriert alle Module"""

    def __init__(self):
        """Initialisiert den Parser und die Befehlstabelle"""
        self.commands = {
            'synth': self._synth,
            'train-embedder': self._train_embedder,
            'embed': self._embed,
            'stats': self._stats,
            'score': self._score,
            'perturb': self._perturb,
            'experiment': self._experiment,
            'plot': self._plot,
        }
        self.parser = self._build_parser()

    def _build_parser(self) -> argparse.ArgumentParser:
        """Erstellt den argparse-Parser mit allen Unterbefehlen"""
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument('--seed', type=int, default=None, help='Seed / Master-Seed')
        common.add_argument('--out-dir', default='.', help='Ausgabeverzeichnis')
        common.add_argument('-v', '--verbose', action='store_true', help='Debug-Ausgaben')
        common.add_argument('-q', '--quiet', action='store_true', help='Nur Warnungen und Fehler')

        parser = argparse.ArgumentParser(
            prog='fmd-stats',
            description='Fréchet Motion Distance - Berechnung und Validierung')
        parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
        sub = parser.add_subparsers(dest='command', required=True)

        p = sub.add_parser('synth', parents=[common], help='Synthetischen MOT1-Datensatz erzeugen')
        p.add_argument('--clips', type=int, default=100)
        p.add_argument('--frames', type=int, default=64)
        p.add_argument('--fps', type=float, default=25.0)

        p = sub.add_parser('train-embedder', parents=[common], help='PCA-Embedder trainieren')
        p.add_argument('--data', required=True, help='.mot-Datei oder Verzeichnis')
        p.add_argument('--length', type=int, required=True, help='Fensterlänge L')
        p.add_argument('--stride', type=int, default=None, help='Schrittweite (Standard: L)')
        p.add_argument('--latent-dim', type=int, default=64)
        p.add_argument('--out', default=None, help='Modelldatei (Standard: <out-dir>/model_L<L>.fmdmodel)')

        p = sub.add_parser('embed', parents=[common], help='MOT1 -> FEAT1')
        p.add_argument('--model', required=True)
        p.add_argument('--data', required=True, help='.mot-Datei oder Verzeichnis')
        p.add_argument('--stride', type=int, default=None, help='Schrittweite (Standard: Modellbreite)')
        p.add_argument('--out', default=None, help='FEAT1-Datei (Standard: <out-dir>/features.feat)')
        p.add_argument('--png-dir', default=None, help='Bewegungsbilder zusätzlich als PNG (verlustbehaftet)')

        p = sub.add_parser('stats', parents=[common], help='FEAT1 -> STATS1')
        p.add_argument('--features', required=True)
        p.add_argument('--out', default=None, help='STATS1-Datei (Standard: <out-dir>/stats.stats)')
        p.add_argument('--covariance', choices=list(ESTIMATORS), default=DEFAULT_ESTIMATOR)

        p = sub.add_parser('score', parents=[common], help='FMD zwischen zwei STATS1/FEAT1-Dateien')
        p.add_argument('reference', help='Referenz (STATS1 oder FEAT1)')
        p.add_argument('generated', help='Generiert (STATS1 oder FEAT1)')
        p.add_argument('--covariance', choices=list(ESTIMATORS), default=DEFAULT_ESTIMATOR)

        p = sub.add_parser('perturb', parents=[common], help='Rauschen auf MOT1-Clips anwenden')
        p.add_argument('--input', required=True, help='.mot-Datei oder Verzeichnis')
        p.add_argument('--kind', choices=NOISE_KINDS, required=True)
        p.add_argument('--zeta', type=float, required=True)
        p.add_argument('--out', default=None, help='Zieldatei (nur bei Einzeldatei)')

        p = sub.add_parser('experiment', parents=[common], help='Validierungsexperiment ausführen')
        p.add_argument('--config', default=None, help='Konfigurationsdatei (key = value)')
        p.add_argument('--format', default='csv,json,svg', help='Kommagetrennt: csv,json,svg')
        p.add_argument('--workers', type=int, default=None)
        p.add_argument('--reps', type=int, default=None, help='Wiederholungen')
        p.add_argument('--lengths', default=None, help='Fensterlängen, z.B. 18,34,64')
        p.add_argument('--latent-dim', type=int, default=None)
        p.add_argument('--clips', type=int, default=None, help='Anzahl synthetischer Clips')
        p.add_argument('--dataset', default=None, help="'synthetic' oder MOT1-Verzeichnis")

        p = sub.add_parser('plot', parents=[common], help='Report-CSV -> SVG/CSV')
        p.add_argument('--report', required=True)
        p.add_argument('--format', default='svg', help='Kommagetrennt: svg,csv,json')

        return parser

    def _configure_logging(self, args):
        """Ein stderr-Handler; -v = DEBUG, -q = WARNING"""
        level = logging.INFO
        if args.verbose:
            level = logging.DEBUG
        elif args.quiet:
            level = logging.WARNING
        logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
        logging.getLogger().setLevel(level)

    def run(self, argv: Optional[List[str]] = None) -> int:
        """
        Führt einen Unterbefehl aus

        Args:
            argv: Argumente ohne Programmnamen (None = sys.argv[1:])

        Returns:
            Exitcode
        """
        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            return int(e.code) if e.code is not None else EXIT_OK

        self._configure_logging(args)
        try:
            self.commands[args.command](args)
            return EXIT_OK
        except ValidationError as e:
            print(f"Fehler: {e}", file=sys.stderr)
            return EXIT_VALIDATION
        except (FmdError, OSError) as e:
            print(f"Fehler: {e}", file=sys.stderr)
            return EXIT_RUNTIME
        except Exception as e:
            logger.exception("Unerwarteter Fehler")
            print(f"Fehler: {e}", file=sys.stderr)
            return EXIT_RUNTIME

    def _output(self, args, explicit: Optional[str], default_name: str) -> str:
        """Zielpfad: explizit oder <out-dir>/<default_name>"""
        if explicit:
            return explicit
        os.makedirs(args.out_dir, exist_ok=True)
        return os.path.join(args.out_dir, default_name)

    def _synth(self, args):
        """Schreibt einen synthetischen Datensatz als MOT1-Dateien"""
        seed = args.seed if args.seed is not None else 0
        clips = synth_dataset(seed, args.clips, humanoid_skeleton(), args.frames, args.fps)
        save_motion_dir(clips, args.out_dir)
        print(f"{len(clips)} Clips nach {args.out_dir} geschrieben")

    def _train_embedder(self, args):
        """Trainiert einen PCA-Embedder auf gefensterten Clips"""
        windows = window_dataset(_load_clips(args.data), args.length, args.stride)
        model = fit_pca([to_image(to_directional(clip)) for clip in windows], args.latent_dim)
        path = self._output(args, args.out, f"model_L{args.length}.fmdmodel")
        save_model(model, path)
        print(f"Embedder ({len(windows)} Fenster, d={model.latent_dim}) gespeichert: {path}")

    def _embed(self, args):
        """Bettet gefensterte Clips mit einem gespeicherten Modell ein"""
        model = load_model(args.model)
        windows = window_dataset(_load_clips(args.data), model.input_width, args.stride)

        if args.png_dir:
            os.makedirs(args.png_dir, exist_ok=True)
            for index, clip in enumerate(windows):
                export_png(to_image(to_directional(clip)), os.path.join(args.png_dir, f"window_{index:04d}.png"))

        features = encode(model, windows)
        path = self._output(args, args.out, 'features.feat')
        export_features(features, path)
        print(f"{features.shape[0]} Feature-Vektoren (d={features.shape[1]}) gespeichert: {path}")

    def _stats(self, args):
        """Schätzt Gauß-Momente einer FEAT1-Datei"""
        stats = fit_gaussian(import_features(args.features), args.covariance)
        path = self._output(args, args.out, 'stats.stats')
        save_stats(stats, path)
        print(f"Statistik (d={stats.dim}, n={stats.n}) gespeichert: {path}")

    def _score(self, args):
        """Gibt die FMD zwischen Referenz und generierter Menge aus"""
        reference = _load_gaussian(args.reference, args.covariance)
        generated = _load_gaussian(args.generated, args.covariance)
        value = frechet_distance(reference, generated)
        print(f"FMD: {value:.6g}")
        print(f"estimator: {reference.estimator}/{generated.estimator}  "
              f"d={reference.dim}  n_r={reference.n}  n_g={generated.n}")

    def _perturb(self, args):
        """Stört eine Datei oder alle Dateien eines Verzeichnisses"""
        spec = NoiseSpec(args.kind, args.zeta, args.seed if args.seed is not None else 0)
        if os.path.isdir(args.input):
            paths = sorted(Path(args.input).glob(f"*{MOTION_SUFFIX}"))
            clips = load_motion_dir(args.input)
            os.makedirs(args.out_dir, exist_ok=True)
            for path, clip in zip(paths, apply_noise_many(clips, spec)):
                save_motion(clip, os.path.join(args.out_dir, path.name))
            print(f"{len(clips)} Clips gestört ({spec.kind}, zeta={spec.zeta}) nach {args.out_dir}")
            return

        target = self._output(args, args.out, Path(args.input).name)
        save_motion(apply_noise(load_motion(args.input), spec), target)
        print(f"Clip gestört ({spec.kind}, zeta={spec.zeta}): {target}")

    def _experiment(self, args):
        """Führt das Validierungsexperiment aus und schreibt die Reports"""
        formats = _formats(args.format)
        manager = ConfigManager(args.config)
        manager.apply_overrides({
            'master_seed': args.seed,
            'workers': args.workers,
            'repetitions': args.reps,
            'lengths': args.lengths,
            'latent_dim': args.latent_dim,
            'synth_clips': args.clips,
            'dataset': args.dataset,
        })
        config = manager.get_experiment_config()

        report = run_experiment(config)
        exporter = StatsExporter(args.out_dir)
        for fmt in formats:
            print(f"Report: {exporter.export_report(report, fmt)}")

    def _plot(self, args):
        """Rendert einen gespeicherten Report-CSV erneut"""
        report = load_report_csv(args.report)
        exporter = StatsExporter(args.out_dir)
        for fmt in _formats(args.format):
            print(f"Report: {exporter.export_report(report, fmt)}")
