#!/usr/bin/env python
# coding: utf-8
"""Snapshot and residual CSV files.

A snapshot starts with `# key=value` header lines (n, s, p, lambda, f, h, t,
c_norm, kind) followed by rows `x1,...,xn,value` for grid fields or
`r,value` for radial fields. Numbers are written with 17 significant digits
so a file reads back to the identical doubles.
"""
import csv
import logging

from pathlib import Path
from typing import Any, Dict, NamedTuple

import numpy as np

from .core_types import GridField, RadialField
from .exceptions import ContractViolation, InvalidParameter, SnapshotParseError

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

HEADER_KEYS = ('n', 's', 'p', 'lambda', 'f', 'h', 't', 'c_norm', 'kind')
REQUIRED_KEYS = ('n', 'h', 't')


def format_number(value):
    return '{:.17g}'.format(float(value))


class Snapshot(NamedTuple):
    field: Any
    t: float
    header: Dict[str, str]


def save_snapshot(field, t, path, params=None):
    """Write a grid or radial field at time t."""
    path = Path(path)
    header = {'n': str(field.n)}
    if params is not None:
        header.update({
            's': format_number(params.s),
            'p': format_number(params.p),
            'lambda': format_number(params.lam),
            'f': params.tempering.label,
            'c_norm': format_number(params.c_norm),
        })
    if isinstance(field, GridField):
        header['h'] = format_number(field.h)
        header['kind'] = 'grid'
        coordinates = field.coordinates.reshape(-1, field.n)
        values = field.values.reshape(-1)
    else:
        header['h'] = format_number(np.max(np.diff(field.radii)))
        header['kind'] = 'radial'
        coordinates = field.radii[:, None]
        values = field.values
    header['t'] = format_number(t)
    with path.open('w', newline='') as handle:
        for key in HEADER_KEYS:
            if key in header:
                handle.write('# {}={}\n'.format(key, header[key]))
        writer = csv.writer(handle, lineterminator='\n')
        for point, value in zip(coordinates, values):
            writer.writerow([format_number(c) for c in point] + [format_number(value)])
    logger.debug('Snapshot t={} written to {}'.format(t, path))
    return path


def _parse_float(text, line):
    try:
        return float(text)
    except ValueError:
        raise SnapshotParseError('not a number: {!r}'.format(text), line=line)


def read_snapshot(path, n=None):
    """Parse a snapshot file; n, when given, must match the header."""
    header = {}
    rows = []
    with Path(path).open(newline='') as handle:
        for number, raw in enumerate(handle, start=1):
            text = raw.strip()
            if not text:
                continue
            if text.startswith('#'):
                if rows:
                    raise SnapshotParseError('header line after data rows', line=number)
                key, sep, value = text[1:].strip().partition('=')
                if not sep or key.strip() not in HEADER_KEYS:
                    raise SnapshotParseError('bad header line {!r}'.format(text), line=number)
                header[key.strip()] = value.strip()
                continue
            for key in REQUIRED_KEYS:
                if key not in header:
                    raise SnapshotParseError('missing header key {!r}'.format(key), line=number)
            rows.append((number, next(csv.reader([text]))))
    for key in REQUIRED_KEYS:
        if key not in header:
            raise SnapshotParseError('missing header key {!r}'.format(key))
    try:
        dimension = int(header['n'])
    except ValueError:
        raise SnapshotParseError('n must be an integer, got {!r}'.format(header['n']))
    if n is not None and dimension != n:
        raise SnapshotParseError('snapshot has n={}, expected n={}'.format(dimension, n))
    kind = header.get('kind', 'grid')
    t = _parse_float(header['t'], None)
    h = _parse_float(header['h'], None)
    if kind == 'grid':
        field = _grid_from_rows(dimension, h, rows)
    elif kind == 'radial':
        field = _radial_from_rows(dimension, rows)
    else:
        raise SnapshotParseError('unknown field kind {!r}'.format(kind))
    return Snapshot(field, t, header)


def _grid_from_rows(n, h, rows):
    try:
        empty = GridField.zeros(n, h)
    except (ContractViolation, InvalidParameter) as error:
        raise SnapshotParseError('invalid grid header: {}'.format(error))
    values = np.zeros(empty.values.shape)
    for number, row in rows:
        if len(row) != n + 1:
            raise SnapshotParseError('expected {} columns, got {}'.format(n + 1, len(row)),
                                     line=number)
        point = [_parse_float(c, number) for c in row[:n]]
        try:
            index = empty.index_of(point)
        except (ContractViolation, InvalidParameter) as error:
            raise SnapshotParseError(str(error), line=number)
        values[index] = _parse_float(row[n], number)
    try:
        return GridField(n, h, values)
    except (ContractViolation, InvalidParameter) as error:
        raise SnapshotParseError('invalid grid field: {}'.format(error))


def _radial_from_rows(n, rows):
    radii, values = [], []
    for number, row in rows:
        if len(row) != 2:
            raise SnapshotParseError('expected 2 columns, got {}'.format(len(row)), line=number)
        radii.append(_parse_float(row[0], number))
        values.append(_parse_float(row[1], number))
    try:
        return RadialField(n, np.array(radii), np.array(values))
    except (ContractViolation, InvalidParameter) as error:
        raise SnapshotParseError('invalid radial field: {}'.format(error))


def load_snapshot(path, n=None):
    return read_snapshot(path, n).field


def save_residuals(trajectory, path):
    """Residual series as `t,residual` rows."""
    path = Path(path)
    with path.open('w', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(['t', 'residual'])
        for t, residual in trajectory.residuals:
            writer.writerow([format_number(t), format_number(residual)])
    return path
