"""
Features Module für FMD-Stats
Enthält die Experiment-Orchestrierung
"""

from .experiment import ExperimentReport, ExperimentRunner, ReportCell, load_report_csv, run_experiment

__all__ = ['ExperimentReport', 'ExperimentRunner', 'ReportCell', 'load_report_csv', 'run_experiment']
