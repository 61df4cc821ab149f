#!/usr/bin/env python
# coding: utf-8
"""Reflections across the planes {x_axis = alpha} and the moving-plane scan.

psi_alpha(x) = phi(x^alpha) - phi(x) on Sigma_alpha = {x_axis < alpha}
inside the ball. Reflected points off the grid are read through multilinear
interpolation, and reflections that leave the ball see phi = 0.
"""
import logging
import math

from dataclasses import replace
from typing import NamedTuple, Optional, Tuple

import numpy as np

from ..core_types import CheckRecord, ReflectionSpec
from .common import Diagnostics, as_grid, interpolator, require_converged

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

SYMMETRIC = 'symmetric'
ASYMMETRY = 'asymmetry detected'
# Cap on the early-snapshot tolerance, as a fraction of the initial maximum.
EARLY_TOL_FRACTION = 0.1


def reflect_values(field, spec, points):
    """phi at the reflections of the given points."""
    return interpolator(field)(spec.reflect(points))


def mirror_field(field, spec):
    """The field x -> phi(x^alpha) on the grid of `field`."""
    grid = as_grid(field)
    values = reflect_values(grid, spec, grid.coordinates)
    return grid.with_values(values)


def sigma_mask(field, spec):
    return field.interior_mask & spec.in_sigma(field.coordinates)


def reflect_field(field, spec):
    """psi_alpha on Sigma_alpha inside the ball, zero at every other node."""
    grid = as_grid(field)
    mask = sigma_mask(grid, spec)
    psi = np.where(mask, mirror_field(grid, spec).values - grid.values, 0.0)
    return grid.with_values(psi)


class PlaneRow(NamedTuple):
    alpha: float
    minimum: float
    argmin: Optional[Tuple[float, ...]]

    @property
    def empty(self):
        return self.argmin is None


class MovingPlaneScan(NamedTuple):
    rows: Tuple[PlaneRow, ...]
    tol: float

    @property
    def passed(self):
        return all(row.empty or row.minimum >= -self.tol for row in self.rows)

    @property
    def minimum(self):
        values = [row.minimum for row in self.rows if not row.empty]
        return min(values) if values else math.nan


def plane_minimum(field, spec):
    grid = as_grid(field)
    mask = sigma_mask(grid, spec)
    if not np.any(mask):
        return PlaneRow(spec.alpha, math.nan, None)
    psi = reflect_field(grid, spec).values[mask]
    position = int(np.argmin(psi))
    argmin = tuple(float(c) for c in grid.coordinates[mask][position])
    return PlaneRow(spec.alpha, float(psi[position]), argmin)


def moving_plane_scan(profile, alphas, tol, axis=1, check_converged=True):
    """Minimum of psi_alpha over Sigma_alpha for every alpha in the scan."""
    field = require_converged(profile, 'moving_plane_scan') if check_converged else \
        getattr(profile, 'field', profile)
    rows = []
    for alpha in alphas:
        row = plane_minimum(field, ReflectionSpec(alpha, axis))
        if row.empty:
            logger.info('alpha={}: Sigma_alpha holds no interior node'.format(alpha))
        rows.append(row)
    scan = MovingPlaneScan(tuple(rows), tol)
    if not scan.passed:
        logger.warning('Moving-plane scan found psi_alpha down to {}'.format(scan.minimum))
    return scan


def early_tolerance(field, tol):
    """tol, capped at EARLY_TOL_FRACTION of max |phi| when the field is nonzero."""
    peak = float(np.max(np.abs(as_grid(field).values)))
    if peak > 0:
        return min(tol, EARLY_TOL_FRACTION * peak)
    return tol


def scan_record(name, scan):
    verdict = SYMMETRIC if scan.passed else ASYMMETRY
    details = {
        'rows': [[row.alpha, None if row.empty else row.minimum,
                  None if row.empty else list(row.argmin)] for row in scan.rows],
        'plot': {
            'title': 'Minimum of psi_alpha',
            'xlabel': 'alpha',
            'ylabel': 'min psi_alpha',
            'x': [row.alpha for row in scan.rows if not row.empty],
            'series': {'minimum': [row.minimum for row in scan.rows if not row.empty],
                       'threshold': [-scan.tol for row in scan.rows if not row.empty]},
        },
    }
    return CheckRecord(name, scan.minimum, -scan.tol, verdict, scan.passed,
                       informational=not scan.passed, details=details)


@Diagnostics.register
class MovingPlane:

    @classmethod
    def process(cls, context, report):
        scan = moving_plane_scan(context.profile, context.settings.alphas, context.tolerance)
        report = report.extended(scan_record(cls.name, scan))
        trajectory = context.trajectory
        if trajectory is not None and len(trajectory) > 1:
            initial = trajectory.snapshots[0][1]
            early = moving_plane_scan(initial, context.settings.alphas,
                                      early_tolerance(initial, context.tolerance),
                                      check_converged=False)
            record = scan_record(cls.name + '_early', early)
            report = report.extended(replace(record, informational=True))
        return report
