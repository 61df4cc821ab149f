#!/usr/bin/env python
# coding: utf-8
"""Time series of the antisymmetric difference w_alpha = u(x^alpha, t) - u(x, t)."""
import logging

from typing import NamedTuple, Tuple

import numpy as np

from ..core_types import CheckRecord, ReflectionSpec
from ..exceptions import PreconditionError, ResolutionError
from ..solver import initial_field, run
from .common import Diagnostics, as_grid, late_minimum, spacing
from .moving_plane import reflect_field, sigma_mask

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

LATE_FRACTION = 0.2


class EvolutionResult(NamedTuple):
    times: Tuple[float, ...]
    minima: Tuple[float, ...]
    tol: float
    late_tol: float

    @property
    def minimum(self):
        return float(np.min(self.minima))

    @property
    def late_minimum(self):
        return late_minimum(self.minima, LATE_FRACTION)

    @property
    def passed(self):
        return self.minimum >= -self.tol and self.late_minimum >= -self.late_tol


class NarrowRegionResult(NamedTuple):
    strip_minimum: float
    region_minimum: float
    delta_strip: float
    tol: float

    @property
    def passed(self):
        return self.strip_minimum >= -self.tol


def w_minimum(field, spec, mask=None):
    """Minimum of w_alpha over Sigma_alpha (optionally restricted by mask)."""
    grid = as_grid(field)
    region = sigma_mask(grid, spec)
    if mask is not None:
        region = region & mask
    if not np.any(region):
        raise ResolutionError('no interior node lies in the requested part of Sigma_alpha')
    return float(np.min(reflect_field(grid, spec).values[region]))


def strip_mask(field, spec, delta_strip):
    grid = as_grid(field)
    coordinate = grid.coordinates[..., spec.axis - 1]
    return (coordinate > spec.alpha - delta_strip) & (coordinate < spec.alpha)


def _trajectory(config, spec, tol, trajectory):
    start = initial_field(config) if trajectory is None else trajectory.snapshots[0][1]
    initial_minimum = w_minimum(start, spec)
    if initial_minimum < -tol / 10.0:
        raise PreconditionError('initial data violates w_alpha >= 0 (min {}) for alpha = {}'
                                .format(initial_minimum, spec.alpha))
    if trajectory is None:
        trajectory, _ = run(config)
    return trajectory


def antisymmetric_evolution_check(config, spec, tol=None, trajectory=None):
    """min of w_alpha over Sigma_alpha at every snapshot of a run.

    Passes when every minimum is >= -tol and the last 20% of the snapshots
    stay above -tol/10. tol defaults to 10 h.
    """
    if tol is None:
        tol = 10.0 * spacing(initial_field(config))
    trajectory = _trajectory(config, spec, tol, trajectory)
    minima = tuple(w_minimum(field, spec) for _, field in trajectory.snapshots)
    result = EvolutionResult(tuple(trajectory.times), minima, tol, tol / 10.0)
    logger.info('w_alpha for alpha={}: min {} (late {})'.format(
        spec.alpha, result.minimum, result.late_minimum))
    return result


def narrow_region_check(config, spec, delta_strip, tol=None, trajectory=None):
    """Late-time minimum of w_alpha over {alpha - delta_strip < x_axis < alpha}."""
    h = spacing(initial_field(config))
    if delta_strip < h:
        raise ResolutionError('strip unresolved: delta_strip = {} < h = {}'.format(delta_strip, h))
    if tol is None:
        tol = 10.0 * h
    trajectory = _trajectory(config, spec, tol, trajectory)
    late = [field for _, field in trajectory.late_snapshots(LATE_FRACTION)]
    strip = min(w_minimum(field, spec, strip_mask(field, spec, delta_strip)) for field in late)
    region = min(w_minimum(field, spec) for field in late)
    return NarrowRegionResult(strip, region, delta_strip, tol)


def _reflection(context):
    return ReflectionSpec(context.settings.alpha)


@Diagnostics.register
class AntisymmetricEvolution:

    @classmethod
    def process(cls, context, report):
        result = antisymmetric_evolution_check(context.simulation, _reflection(context),
                                               context.tolerance, context.trajectory)
        details = {
            'alpha': context.settings.alpha,
            'late_minimum': result.late_minimum,
            'late_threshold': -result.late_tol,
            'plot': {'title': 'Minimum of w_alpha over time', 'xlabel': 't',
                     'ylabel': 'min w_alpha', 'x': list(result.times),
                     'series': {'minimum': list(result.minima)}},
        }
        verdict = 'pass' if result.passed else 'fail'
        return report.extended(CheckRecord(cls.name, result.minimum, -result.tol, verdict,
                                           result.passed, details=details))


@Diagnostics.register
class NarrowRegion:

    @classmethod
    def process(cls, context, report):
        result = narrow_region_check(context.simulation, _reflection(context),
                                     context.settings.delta_strip, context.tolerance,
                                     context.trajectory)
        details = {'alpha': context.settings.alpha, 'delta_strip': result.delta_strip,
                   'region_minimum': result.region_minimum}
        verdict = 'pass' if result.passed else 'fail'
        return report.extended(CheckRecord(cls.name, result.strip_minimum, -result.tol, verdict,
                                           result.passed, details=details))
