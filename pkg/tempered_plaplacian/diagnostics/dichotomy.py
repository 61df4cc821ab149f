#!/usr/bin/env python
# coding: utf-8
"""Steady profiles vanish identically or are positive throughout the ball."""
import logging

from typing import NamedTuple, Tuple

import numpy as np

from ..core_types import CheckRecord
from .common import Diagnostics, node_table, require_converged, spacing

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

IDENTICALLY_ZERO = 'identically-zero'
STRICTLY_POSITIVE = 'strictly-positive'
VIOLATION = 'VIOLATION'


class DichotomyResult(NamedTuple):
    verdict: str
    max_value: float
    inner_min: float
    offending: Tuple[Tuple[float, ...], ...] = ()

    @property
    def passed(self):
        return self.verdict != VIOLATION


def dichotomy_check(profile, tol=1e-8):
    """Classify a steady profile.

    identically-zero when max phi <= tol, strictly-positive when phi > tol at
    every interior node with d >= 2h, VIOLATION otherwise.
    """
    field = require_converged(profile, 'dichotomy_check')
    h = spacing(field)
    points, values, distances = node_table(field)
    max_value = float(np.max(values)) if values.size else 0.0
    inner = distances >= 2 * h
    inner_min = float(np.min(values[inner])) if np.any(inner) else max_value
    if max_value <= tol:
        return DichotomyResult(IDENTICALLY_ZERO, max_value, inner_min)
    if inner_min > tol:
        return DichotomyResult(STRICTLY_POSITIVE, max_value, inner_min)
    bad = inner & (values <= tol)
    offending = tuple(tuple(float(c) for c in point) for point in points[bad])
    logger.warning('Dichotomy violated at {} nodes'.format(len(offending)))
    return DichotomyResult(VIOLATION, max_value, inner_min, offending)


@Diagnostics.register
class Dichotomy:

    tolerance = 1e-8

    @classmethod
    def process(cls, context, report):
        result = dichotomy_check(context.profile, cls.tolerance)
        details = {'max_value': result.max_value,
                   'offending': [list(point) for point in result.offending]}
        return report.extended(CheckRecord(cls.name, result.inner_min, cls.tolerance,
                                           result.verdict, result.passed, details=details))
