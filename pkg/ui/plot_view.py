"""
Plot View Module für FMD-Stats
Rendert Experiment-Reports als SVG (Matplotlib, ohne GUI-Backend)

Layout: ein Panel pro Rauschart, eine Kurve pro Fensterlänge mit
+-1 Standardabweichung als Band. Die SVG-Gruppen tragen IDs
(panel-<kind>, curve-<kind>-<L>, band-<kind>-<L>).
"""

import logging

try:
    import matplotlib
    matplotlib.use('Agg')
    from matplotlib.figure import Figure
    from matplotlib.backends.backend_svg import FigureCanvasSVG
    MATPLOTLIB_AVAILABLE = True
except ImportError:
    MATPLOTLIB_AVAILABLE = False

import numpy as np

from core.errors import ValidationError

logger = logging.getLogger(__name__)

SVG_HASHSALT = 'fmd-stats'

KIND_TITLES = {
    'gaussian': 'Gauß-Rauschen',
    'salt_pepper': 'Salt-and-Pepper-Rauschen',
    'temporal': 'Temporales Rauschen',
}
KIND_XLABELS = {
    'gaussian': 'ζ (Standardabweichung, m)',
    'salt_pepper': 'ζ (Impuls-Wahrscheinlichkeit)',
    'temporal': 'ζ (gestörte Frames)',
}
LENGTH_COLORS = ['#007acc', 'tab:red', 'tab:green', 'tab:orange', 'tab:purple', 'tab:brown']


class PlotView:
    """Erzeugt die Report-Diagramme"""

    def __init__(self, panel_width: float = 4.2, panel_height: float = 3.4):
        """
        Initialisiert die Plot View

        Args:
            panel_width: Breite eines Panels in Zoll
            panel_height: Höhe der Abbildung in Zoll
        """
        self.panel_width = panel_width
        self.panel_height = panel_height

    def render_report(self, report, path: str) -> str:
        """
        Zeichnet mittlere FMD über zeta und speichert die Abbildung als SVG

        Args:
            report: ExperimentReport
            path: Zieldatei

        Returns:
            Pfad zur erstellten Datei
        """
        if not MATPLOTLIB_AVAILABLE:
            raise RuntimeError("matplotlib ist nicht installiert.\n"
                               "Bitte installieren mit: pip install matplotlib")

        kinds = report.kinds
        if not kinds:
            raise ValidationError("Leerer Report - nichts zu zeichnen")

        figure = Figure(figsize=(self.panel_width * len(kinds), self.panel_height))
        FigureCanvasSVG(figure)
        axes = figure.subplots(1, len(kinds), squeeze=False)[0]

        for ax, kind in zip(axes, kinds):
            self._draw_panel(ax, report, kind)

        # tight_layout kann bei sehr kleinen Diagrammen fehlschlagen
        try:
            figure.tight_layout(pad=1.5)
        except ValueError:
            pass

        # Feste Salt für reproduzierbare SVG-IDs, nur für diesen Export
        with matplotlib.rc_context({'svg.hashsalt': SVG_HASHSALT}):
            figure.savefig(path, format='svg', metadata={'Date': None})
        logger.debug("SVG gespeichert: %s", path)
        return path

    def _draw_panel(self, ax, report, kind: str):
        """Ein Panel: eine Kurve plus Band pro Länge"""
        ax.set_gid(f"panel-{kind}")

        for index, length in enumerate(report.lengths):
            series = report.series(kind, length)
            if not series:
                continue
            zetas = np.array([cell.zeta for cell in series])
            means = np.array([cell.mean_fmd for cell in series])
            stds = np.array([cell.std_fmd for cell in series])
            color = LENGTH_COLORS[index % len(LENGTH_COLORS)]

            ax.fill_between(zetas, means - stds, means + stds, color=color, alpha=0.2,
                            linewidth=0, gid=f"band-{kind}-{length}")
            ax.plot(zetas, means, color=color, linewidth=2, marker='o', markersize=4,
                    label=f"{length} Frames", gid=f"curve-{kind}-{length}")

        ax.set_title(KIND_TITLES.get(kind, kind), fontsize=11)
        ax.set_xlabel(KIND_XLABELS.get(kind, 'ζ'), fontsize=10)
        ax.set_ylabel('Mittlere FMD', fontsize=10)
        ax.grid(True, alpha=0.3, linestyle='--')
        ax.set_ylim(bottom=0)
        ax.legend(loc='upper left', fontsize=8)
