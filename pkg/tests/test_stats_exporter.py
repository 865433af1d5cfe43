"""Tests für core.stats_exporter und ui.plot_view"""

import csv
import json

import pytest

from core.errors import ValidationError
from core.stats_exporter import JSON_MAGIC, REPORT_COLUMNS, StatsExporter
from features.experiment import ExperimentReport, ReportCell, load_report_csv, summarize_trends

LENGTHS = (18, 34)
GRIDS = {
    'gaussian': (0.0, 0.01, 0.05),
    'salt_pepper': (0.0, 0.1, 0.4),
    'temporal': (0, 8, 16),
}


def _full_report():
    cells = []
    for kind, grid in GRIDS.items():
        for length in LENGTHS:
            for index, zeta in enumerate(grid):
                cells.append(ReportCell(kind, length, float(zeta), 0.5 * index * length, 0.1 * index, 5))
    report = ExperimentReport(cells=cells, config_hash='abc123')
    report.trends = summarize_trends(report)
    return report


@pytest.fixture
def exporter(tmp_path):
    return StatsExporter(str(tmp_path / 'reports'))


def test_single_cell_csv(exporter):
    report = ExperimentReport(cells=[ReportCell('gaussian', 64, 0.01, 1.25, 0.5, 20)])

    path = exporter.export_report(report, 'csv')

    with open(path, newline='') as f:
        rows = list(csv.reader(f))
    assert rows == [REPORT_COLUMNS, ['gaussian', '64', '0.01', '1.25', '0.5', '20']]
    assert path.endswith('fmd_report.csv')


def test_csv_parse_csv_is_stable(tmp_path):
    first = StatsExporter(str(tmp_path / 'a')).export_report(_full_report(), 'csv')
    second = StatsExporter(str(tmp_path / 'b')).export_report(load_report_csv(first), 'csv')

    with open(first, 'rb') as a, open(second, 'rb') as b:
        assert a.read() == b.read()


def test_json_document(exporter):
    report = _full_report()

    with open(exporter.export_report(report, 'json'), encoding='utf-8') as f:
        document = json.load(f)

    assert document['format'] == JSON_MAGIC
    assert document['config_hash'] == 'abc123'
    assert len(document['cells']) == len(report.cells)
    assert document['cells'][0] == report.cells[0].as_row()
    assert document['trends']['spearman']['gaussian']['18'] == pytest.approx(1.0)


def test_empty_report(exporter):
    with pytest.raises(ValidationError):
        exporter.export_report(ExperimentReport(cells=[]), 'csv')


def test_unknown_format(exporter):
    with pytest.raises(ValidationError):
        exporter.export_report(_full_report(), 'xlsx')


def test_svg_panels_and_curves(exporter):
    pytest.importorskip('matplotlib')

    with open(exporter.export_report(_full_report(), 'svg'), encoding='utf-8') as f:
        svg = f.read()

    assert svg.count('id="panel-') == 3
    assert svg.count('id="curve-') == 3 * len(LENGTHS)
    assert svg.count('id="band-') == 3 * len(LENGTHS)
    for kind in GRIDS:
        for length in LENGTHS:
            assert f'id="curve-{kind}-{length}"' in svg


def test_svg_skips_missing_series(exporter):
    pytest.importorskip('matplotlib')
    cells = [ReportCell('temporal', 64, 0.0, 0.0, 0.0, 2), ReportCell('temporal', 64, 32.0, 1.0, 0.2, 2),
             ReportCell('gaussian', 18, 0.0, 0.0, 0.0, 2), ReportCell('gaussian', 18, 0.1, 3.0, 0.1, 2)]

    with open(exporter.export_report(ExperimentReport(cells=cells), 'svg'), encoding='utf-8') as f:
        svg = f.read()

    assert svg.count('id="panel-') == 2
    assert svg.count('id="curve-') == 2


def test_svg_is_reproducible(tmp_path):
    pytest.importorskip('matplotlib')
    first = StatsExporter(str(tmp_path / 'a')).export_report(_full_report(), 'svg')
    second = StatsExporter(str(tmp_path / 'b')).export_report(_full_report(), 'svg')

    with open(first, 'rb') as a, open(second, 'rb') as b:
        assert a.read() == b.read()


def test_svg_leaves_global_rcparams_untouched(tmp_path):
    matplotlib = pytest.importorskip('matplotlib')
    before = matplotlib.rcParams['svg.hashsalt']

    StatsExporter(str(tmp_path)).export_report(_full_report(), 'svg')

    assert matplotlib.rcParams['svg.hashsalt'] == before
