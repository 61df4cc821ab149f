#!/usr/bin/env python
# coding: utf-8
"""Operator values of the barrier Phi(x) = (1 - |x|^2)_+^s along a radius."""
import logging
import math

from typing import NamedTuple, Tuple

import numpy as np

from ..core_types import CheckRecord
from ..exceptions import InvalidParameter
from ..operator import QuadratureSpec, barrier_field, eval_function_levels
from .common import Diagnostics

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

# Refinement stability between the two finest depths.
STABILITY = 0.05
# Largest admitted ratio between the outermost two sampled values.
GROWTH_FACTOR = 2.0
# Spread across radii for the p = 2, lambda = 0 constancy oracle.
CONSTANCY = 0.02

DEFAULT_QUADRATURE = QuadratureSpec(max_depth=4, min_depth=2, rtol=1e-4)


def default_radii(h=1.0 / 64):
    return (0.0, 0.5, 0.9, 0.99, 1.0 - 4 * h)


class BarrierRow(NamedTuple):
    radius: float
    value: float
    previous: float
    depth: int

    @property
    def relative_change(self):
        if self.value == self.previous:
            return 0.0
        return abs(self.value - self.previous) / max(abs(self.value), abs(self.previous))


class BarrierScan(NamedTuple):
    rows: Tuple[BarrierRow, ...]
    bound: float
    growth: float
    flags: Tuple[str, ...]

    @property
    def stable(self):
        return all(row.relative_change < STABILITY for row in self.rows)

    @property
    def passed(self):
        return self.stable and self.growth <= GROWTH_FACTOR


def _point(n, radius):
    x = np.zeros(n)
    x[0] = radius
    return x


def barrier_boundedness_scan(params, radii=None, quad=None):
    """Evaluate L Phi at (r, 0, ...) for each sampled radius.

    A radius passes when its two finest refinement depths agree within 5%;
    the scan records B = max |L Phi| and fails on growth when the value at the
    outermost radius exceeds twice the value at the radius before it.
    """
    quad = quad or DEFAULT_QUADRATURE
    radii = sorted(set(float(r) for r in (radii or default_radii())))
    if any(not 0 <= r < 1 for r in radii):
        raise InvalidParameter('sample radii must lie in [0, 1)', key='barrier_radii')
    phi = barrier_field(params.s)
    rows = []
    for radius in radii:
        result = eval_function_levels(phi, _point(params.n, radius), params, quad)
        estimates = result.estimates
        previous = estimates[-2] if len(estimates) > 1 else estimates[-1]
        rows.append(BarrierRow(radius, estimates[-1], previous, len(estimates) - 1))
        logger.debug('L Phi at r={}: {} (depth {})'.format(radius, estimates[-1],
                                                           len(estimates) - 1))
    magnitudes = [abs(row.value) for row in rows]
    growth = 0.0
    if len(rows) > 1:
        growth = magnitudes[-1] / magnitudes[-2] if magnitudes[-2] > 0 else math.inf
    flags = tuple(params.regime_flags())
    if params.reduced_accuracy:
        logger.warning('s = {} >= 1 - 1/p: quadrature accuracy is reduced'.format(params.s))
    return BarrierScan(tuple(rows), max(magnitudes), growth, flags)


class ConstancyResult(NamedTuple):
    radii: Tuple[float, ...]
    values: Tuple[Tuple[float, ...], ...]
    spreads: Tuple[float, ...]
    floor: float = 1e-6

    @property
    def spread(self):
        return self.spreads[-1]

    @property
    def contracting(self):
        """Spread at the finest depth at most half of the one before, or below the floor."""
        if len(self.spreads) < 2:
            return False
        return self.spreads[-1] <= 0.5 * self.spreads[-2] or self.spreads[-1] <= self.floor

    @property
    def passed(self):
        return self.spread <= CONSTANCY and self.contracting


def relative_spread(values):
    values = np.asarray(values, dtype=float)
    scale = np.mean(np.abs(values))
    return float((values.max() - values.min()) / scale) if scale > 0 else 0.0


def barrier_constancy_check(params, radii=(0.0, 0.3, 0.6, 0.9), quad=None, perturb=None):
    """Spread of L Phi across radii per refinement depth.

    For p = 2 and lambda = 0, L Phi is constant in the ball, whatever the
    normalization. Spreads at or below the quadrature rtol count as
    converged. `perturb`, when given, replaces the parameters for the
    second half of the radii.
    """
    quad = quad or DEFAULT_QUADRATURE
    phi = barrier_field(params.s)
    per_radius = []
    for index, radius in enumerate(radii):
        current = params
        if perturb is not None and index >= len(radii) // 2:
            current = perturb
        result = eval_function_levels(phi, _point(params.n, radius), current, quad,
                                      stop_when_converged=False)
        per_radius.append(result.estimates)
    depths = min(len(estimates) for estimates in per_radius)
    by_depth = tuple(tuple(estimates[k] for estimates in per_radius) for k in range(depths))
    spreads = tuple(relative_spread(values) for values in by_depth)
    return ConstancyResult(tuple(radii), by_depth, spreads, max(1e-6, quad.rtol))


@Diagnostics.register
class BarrierBoundedness:

    @classmethod
    def process(cls, context, report):
        settings = context.settings
        radii = settings.barrier_radii or default_radii(context.h)
        scan = barrier_boundedness_scan(context.params, radii, context.quadrature)
        details = {
            'rows': [[row.radius, row.value, row.previous, row.relative_change, row.depth]
                     for row in scan.rows],
            'growth': scan.growth,
            'flags': list(scan.flags),
            'plot': {'title': 'Operator applied to the barrier', 'xlabel': '|x|',
                     'ylabel': 'L Phi', 'x': [row.radius for row in scan.rows],
                     'series': {'value': [row.value for row in scan.rows]}},
        }
        verdict = 'bounded' if scan.passed else ('unstable' if not scan.stable else 'growing')
        return report.extended(CheckRecord(cls.name, scan.bound, STABILITY, verdict, scan.passed,
                                           details=details))
