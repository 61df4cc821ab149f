import math

import pytest
from lxml import etree

from tempered_plaplacian.core_types import CheckRecord, DiagnosticsReport
from tempered_plaplacian.report import (
    CSV_COLUMNS, line_plot, read_json, render_plots, summary_lines, write_csv, write_json
)

SVG = '{http://www.w3.org/2000/svg}'


@pytest.fixture
def report():
    plot = {'title': 'Minimum over time', 'xlabel': 't', 'ylabel': 'min',
            'x': [0.0, 1.0, 2.0], 'series': {'minimum': [0.0, -0.5, float('nan')],
                                              'threshold': [-1.0, -1.0, -1.0]}}
    records = (
        CheckRecord('dichotomy', 0.25, 1e-8, 'strictly-positive', True),
        CheckRecord('antisymmetric_evolution', -0.5, -1.0, 'pass', True, details={'plot': plot}),
        CheckRecord('hopf_stability', None, 0.5, 'skipped', False, informational=True),
        CheckRecord('hopf_ratio', math.inf, 0.0, 'hopf fails', False),
    )
    return DiagnosticsReport(records, {'param_hash': 'abc123', 'seed': 4})


def test_csv(tmp_path, report):
    path = write_csv(report, tmp_path / 'diagnostics.csv', 'abc123')
    lines = path.read_text().splitlines()
    assert lines[0] == ','.join(CSV_COLUMNS)
    assert lines[1] == 'dichotomy,abc123,0.25,1e-08,strictly-positive'
    assert lines[3] == 'hopf_stability,abc123,,0.5,skipped'
    assert len(lines) == 5


def test_json_round_trip(tmp_path, report):
    restored = read_json(write_json(report, tmp_path / 'diagnostics.json'))
    assert [r.name for r in restored.records] == [r.name for r in report.records]
    assert [r.verdict for r in restored.records] == [r.verdict for r in report.records]
    assert restored.record('hopf_ratio').value is None
    assert restored.record('hopf_stability').informational
    assert restored.metadata['seed'] == 4
    assert restored.passed == report.passed is False


def test_plots(tmp_path, report):
    written = render_plots(report, tmp_path)
    assert [path.name for path in written] == ['antisymmetric_evolution.svg']
    root = etree.parse(str(written[0])).getroot()
    assert root.tag == SVG + 'svg'
    assert len(root.findall(SVG + 'polyline')) == 2
    assert 'Minimum over time' in [text.text for text in root.iter(SVG + 'text')]


def test_empty_plot_is_valid():
    tree = line_plot([], {'value': []}, 'nothing')
    assert tree.getroot().findall(SVG + 'polyline') == []


def test_summary_marks_failures(report):
    lines = summary_lines(report)
    assert lines[0].startswith('[  ok] dichotomy')
    assert lines[2].startswith('[info] hopf_stability')
    assert lines[3].startswith('[FAIL] hopf_ratio')
