"""
UI Module für FMD-Stats
Enthält die Diagramm-Ausgabe
"""

from .plot_view import PlotView

__all__ = ['PlotView']
