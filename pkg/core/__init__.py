"""
Core Module für FMD-Stats
Enthält Datenmodell, Numerik, Konfiguration und Export
"""

__version__ = '1.0.0'

from .config_manager import ConfigManager, ExperimentConfig
from .stats_exporter import StatsExporter

__all__ = ['ConfigManager', 'ExperimentConfig', 'StatsExporter', '__version__']
