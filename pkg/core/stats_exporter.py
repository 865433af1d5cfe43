"""
Report-Export-Modul für FMD-Stats
Exportiert Experiment-Reports als CSV, JSON oder SVG

Dateinamen und Inhalte enthalten keine Zeitstempel: zwei Läufe mit
gleichem Seed erzeugen byte-identische Dateien.
"""

import csv
import json
import logging
import os
from typing import Any, Dict, List

from .errors import ValidationError

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ['kind', 'length', 'zeta', 'mean_fmd', 'std_fmd', 'reps']
REPORT_FORMATS = ('csv', 'json', 'svg')
JSON_MAGIC = 'FMDREPORT1'


class StatsExporter:
    """Exportiert Reports in verschiedene Formate"""

    def __init__(self, export_directory: str):
        """
        Initialisiert den Exporter

        Args:
            export_directory: Verzeichnis für Exports
        """
        self.export_directory = export_directory
        self._ensure_directory_exists()

    def _ensure_directory_exists(self):
        """Stellt sicher, dass das Export-Verzeichnis existiert"""
        os.makedirs(self.export_directory, exist_ok=True)

    def _generate_filename(self, base_name: str, extension: str) -> str:
        """Vollständiger Dateipfad <export_directory>/<base_name>.<extension>"""
        return os.path.join(self.export_directory, f"{base_name}.{extension}")

    def export_to_csv(self, data: List[Dict[str, Any]], base_name: str = 'fmd_report') -> str:
        """
        Exportiert Zeilen als CSV

        Args:
            data: Liste von Dictionaries mit Daten
            base_name: Basis-Dateiname

        Returns:
            Pfad zur erstellten Datei
        """
        if not data:
            raise ValidationError("Keine Daten zum Exportieren vorhanden")

        filepath = self._generate_filename(base_name, 'csv')
        with open(filepath, 'w', newline='', encoding='utf-8') as f:
            writer = csv.DictWriter(f, fieldnames=list(data[0].keys()), lineterminator='\n')
            writer.writeheader()
            writer.writerows(data)
        return filepath

    def export_to_json(self, document: Dict[str, Any], base_name: str = 'fmd_report') -> str:
        """Exportiert ein Dictionary als JSON (Schlüsselreihenfolge bleibt erhalten)"""
        filepath = self._generate_filename(base_name, 'json')
        with open(filepath, 'w', encoding='utf-8') as f:
            json.dump(document, f, indent=2, ensure_ascii=False)
            f.write('\n')
        return filepath

    def export_report(self, report, fmt: str, base_name: str = 'fmd_report') -> str:
        """
        Exportiert einen Experiment-Report

        Args:
            report: ExperimentReport
            fmt: 'csv', 'json' oder 'svg'
            base_name: Basis-Dateiname

        Returns:
            Pfad zur erstellten Datei

        Raises:
            ValidationError: Bei leerem Report oder unbekanntem Format
        """
        if not report.cells:
            raise ValidationError("Leerer Report - nichts zu exportieren")

        if fmt == 'csv':
            filepath = self.export_to_csv([cell.as_row() for cell in report.cells], base_name)
        elif fmt == 'json':
            filepath = self.export_to_json(report_document(report), base_name)
        elif fmt == 'svg':
            from ui.plot_view import PlotView
            filepath = self._generate_filename(base_name, 'svg')
            PlotView().render_report(report, filepath)
        else:
            raise ValidationError(f"Unbekanntes Format '{fmt}' (erlaubt: {', '.join(REPORT_FORMATS)})")

        logger.info("Report geschrieben: %s", filepath)
        return filepath


def report_document(report) -> Dict[str, Any]:
    """JSON-Dokument eines Reports inklusive Herkunft und Trends"""
    return {
        'format': JSON_MAGIC,
        'version': report.version,
        'config_hash': report.config_hash,
        'covariance': report.covariance,
        'config': report.config,
        'cells': [cell.as_row() for cell in report.cells],
        'trends': report.trends,
    }
