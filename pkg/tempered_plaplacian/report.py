#!/usr/bin/env python
# coding: utf-8
"""Diagnostics output: one CSV row per check, a JSON dump and SVG line plots."""
import csv
import json
import logging
import math

from pathlib import Path

import numpy as np
from inflection import parameterize
from lxml import etree

from .core_types import CheckRecord, DiagnosticsReport

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

CSV_COLUMNS = ('check', 'param_hash', 'value', 'threshold', 'verdict')
SVG_NS = 'http://www.w3.org/2000/svg'
WIDTH, HEIGHT, MARGIN = 640, 400, 60
COLORS = ('#1f77b4', '#d62728', '#2ca02c', '#ff7f0e', '#9467bd')


def _format_cell(value):
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, float, np.integer, np.floating)):
        return '{:.17g}'.format(float(value))
    return str(value)


def write_csv(report, path, param_hash=''):
    path = Path(path)
    with path.open('w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for record in report.records:
            writer.writerow([record.name, param_hash, _format_cell(record.value),
                             _format_cell(record.threshold), record.verdict])
    logger.info('Diagnostics CSV written to {}'.format(path))
    return path


def _plain(value):
    """JSON-compatible copy of nested numpy and tuple data; non-finite floats become None."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value) if math.isfinite(value) else None
    return value


def report_to_dict(report):
    return {
        'metadata': _plain(report.metadata),
        'passed': report.passed,
        'records': [_plain({
            'name': record.name,
            'value': record.value,
            'threshold': record.threshold,
            'verdict': record.verdict,
            'passed': record.passed,
            'informational': record.informational,
            'details': record.details,
        }) for record in report.records],
    }


def write_json(report, path):
    path = Path(path)
    with path.open('w') as handle:
        json.dump(report_to_dict(report), handle, indent=2, sort_keys=True)
        handle.write('\n')
    return path


def read_json(path):
    """Rebuild a report from write_json output."""
    with Path(path).open() as handle:
        data = json.load(handle)
    records = tuple(CheckRecord(item['name'], item['value'], item['threshold'], item['verdict'],
                                item['passed'], item.get('informational', False),
                                item.get('details') or {})
                    for item in data.get('records', []))
    return DiagnosticsReport(records, data.get('metadata') or {})


def _scale(values, low, high, lower_pixel, upper_pixel):
    if high == low:
        return [(lower_pixel + upper_pixel) / 2.0 for _ in values]
    return [lower_pixel + (v - low) / (high - low) * (upper_pixel - lower_pixel) for v in values]


def line_plot(x, series, title='', xlabel='', ylabel=''):
    """SVG document with one polyline per named series sharing the x values."""
    svg = etree.Element('{%s}svg' % SVG_NS, nsmap={None: SVG_NS},
                        width=str(WIDTH), height=str(HEIGHT),
                        viewBox='0 0 {} {}'.format(WIDTH, HEIGHT))
    etree.SubElement(svg, '{%s}rect' % SVG_NS, width=str(WIDTH), height=str(HEIGHT),
                     fill='white')
    heading = etree.SubElement(svg, '{%s}text' % SVG_NS, x=str(WIDTH // 2), y='24')
    heading.set('text-anchor', 'middle')
    heading.text = title
    points = [(float(a), float(b)) for name in series for a, b in zip(x, series[name])
              if b is not None and math.isfinite(float(b))]
    if points:
        xs, ys = zip(*points)
        x_low, x_high, y_low, y_high = min(xs), max(xs), min(ys), max(ys)
    else:
        x_low = x_high = y_low = y_high = 0.0
    left, right = MARGIN, WIDTH - MARGIN // 2
    bottom, top = HEIGHT - MARGIN, MARGIN // 2 + 10
    etree.SubElement(svg, '{%s}line' % SVG_NS, x1=str(left), y1=str(bottom), x2=str(right),
                     y2=str(bottom), stroke='black')
    etree.SubElement(svg, '{%s}line' % SVG_NS, x1=str(left), y1=str(bottom), x2=str(left),
                     y2=str(top), stroke='black')
    for text, (px, py), anchor in (
            (xlabel, ((left + right) / 2, HEIGHT - 15), 'middle'),
            (ylabel, (15, (top + bottom) / 2), 'middle'),
            ('{:.4g}'.format(x_low), (left, bottom + 18), 'start'),
            ('{:.4g}'.format(x_high), (right, bottom + 18), 'end'),
            ('{:.4g}'.format(y_low), (left - 4, bottom), 'end'),
            ('{:.4g}'.format(y_high), (left - 4, top + 4), 'end')):
        label = etree.SubElement(svg, '{%s}text' % SVG_NS, x='{:.1f}'.format(px),
                                 y='{:.1f}'.format(py))
        label.set('text-anchor', anchor)
        label.set('font-size', '12')
        label.text = text
    for number, (name, values) in enumerate(series.items()):
        pairs = [(float(a), float(b)) for a, b in zip(x, values)
                 if b is not None and math.isfinite(float(b))]
        if not pairs:
            continue
        px = _scale([a for a, _ in pairs], x_low, x_high, left, right)
        py = _scale([b for _, b in pairs], y_low, y_high, bottom, top)
        color = COLORS[number % len(COLORS)]
        line = etree.SubElement(svg, '{%s}polyline' % SVG_NS, fill='none', stroke=color)
        line.set('points', ' '.join('{:.2f},{:.2f}'.format(a, b) for a, b in zip(px, py)))
        line.set('stroke-width', '1.5')
        legend = etree.SubElement(svg, '{%s}text' % SVG_NS, x=str(right - 4),
                                  y=str(top + 14 * (number + 1)), fill=color)
        legend.set('text-anchor', 'end')
        legend.set('font-size', '12')
        legend.text = name
    return etree.ElementTree(svg)


def write_svg(tree, path):
    path = Path(path)
    tree.write(str(path), pretty_print=True, xml_declaration=True, encoding='utf-8')
    return path


def render_plots(report, out_dir):
    """One SVG per record whose details carry a 'plot' entry."""
    out_dir = Path(out_dir)
    written = []
    for record in report.records:
        plot = (record.details or {}).get('plot')
        if not plot or not plot.get('x'):
            continue
        tree = line_plot(plot['x'], plot['series'], plot.get('title', record.name),
                         plot.get('xlabel', ''), plot.get('ylabel', ''))
        path = out_dir / '{}.svg'.format(parameterize(record.name, separator='_'))
        written.append(write_svg(tree, path))
        logger.debug('Plot {} written'.format(path))
    return written


def summary_lines(report):
    """Human-readable verdict lines, failures marked."""
    lines = []
    for record in report.records:
        mark = 'ok' if record.passed else ('info' if record.informational else 'FAIL')
        lines.append('[{:>4}] {}: {} (value={}, threshold={})'.format(
            mark, record.name, record.verdict, _format_cell(record.value),
            _format_cell(record.threshold)))
    return lines
