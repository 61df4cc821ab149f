#!/usr/bin/env python
# coding: utf-8
"""Boundary behaviour of steady profiles: phi >= c d^s near the unit sphere."""
import logging
import math

from dataclasses import replace
from typing import NamedTuple, Optional, Tuple

import numpy as np

from ..core_types import CheckRecord, GridField
from ..exceptions import InvalidParameter, ResolutionError
from ..solver import run
from .common import Diagnostics, interpolator, node_table, require_converged, spacing

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

TRIVIAL = 'trivial profile'
HOPF_HOLDS = 'hopf holds'
HOPF_FAILS = 'hopf fails'
HOPF_UNSTABLE = 'hopf unstable under refinement'
NORMAL_STEPS = (4, 8, 16)


class HopfResult(NamedTuple):
    band: Tuple[float, float]
    c_hat: float
    argmin: Optional[Tuple[float, ...]]
    normal_derivatives: Tuple[Tuple[Tuple[float, ...], float], ...]
    trivial: bool
    stable: Optional[bool] = None

    @property
    def verdict(self):
        if self.trivial:
            return TRIVIAL
        negative = all(value < 0 for _, value in self.normal_derivatives)
        return HOPF_HOLDS if self.c_hat > 0 and negative else HOPF_FAILS


def sample_normals(n, count=8):
    """Outward unit normals at sample boundary points."""
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        angles = 2.0 * math.pi * np.arange(count) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])
    axes = np.eye(n)
    return np.concatenate([axes, -axes])


def normal_derivative(field, nu, s, h):
    """Extrapolated limit of phi(x0 - tau nu) / tau^s as tau -> 0, with sign.

    phi(x0 - tau nu)/tau^s is sampled at tau = 4h, 8h, 16h and the quadratic
    through the three samples is evaluated at tau = 0. The fractional normal
    derivative along the outward normal is the negated limit.
    """
    nu = np.asarray(nu, dtype=float)
    nu = nu / np.linalg.norm(nu)
    taus = np.array(NORMAL_STEPS, dtype=float) * h
    points = nu[None, :] * (1.0 - taus)[:, None]
    quotients = interpolator(field)(points) / taus ** s
    coefficients = np.polyfit(taus, quotients, 2)
    return -float(coefficients[-1])


def hopf_ratio(profile, s, band, normals=None, check_converged=True):
    """Minimum of phi / d^s over interior nodes with d in the band."""
    field = require_converged(profile, 'hopf_ratio') if check_converged else \
        getattr(profile, 'field', profile)
    d_lo, d_hi = float(band[0]), float(band[1])
    h = spacing(field)
    if not 0 < d_lo < d_hi:
        raise InvalidParameter('Hopf band needs 0 < d_lo < d_hi', key='band')
    if d_lo < 2 * h:
        logger.warning('Hopf band starts at {} < 2h = {}; boundary nodes are under-resolved'
                       .format(d_lo, 2 * h))
    points, values, distances = node_table(field)
    inside = (distances >= d_lo) & (distances <= d_hi)
    if not np.any(inside):
        raise ResolutionError('no interior node has distance in [{}, {}]'.format(d_lo, d_hi))
    ratios = values[inside] / distances[inside] ** s
    position = int(np.argmin(ratios))
    c_hat = max(float(ratios[position]), 0.0)
    argmin = tuple(float(c) for c in points[inside][position])
    trivial = float(np.max(np.abs(values))) <= 1e-12
    if trivial:
        return HopfResult((d_lo, d_hi), 0.0, argmin, (), True)
    if normals is None:
        normals = sample_normals(field.n)
    derivatives = tuple((tuple(float(c) for c in nu), normal_derivative(field, nu, s, h))
                        for nu in np.atleast_2d(normals))
    logger.debug('Hopf ratio c_hat={} at {}'.format(c_hat, argmin))
    return HopfResult((d_lo, d_hi), c_hat, argmin, derivatives, False)


def hopf_temporal_stability(snapshots, s, band, count=3, tolerance=0.05):
    """c_hat over the last `count` snapshots and whether it varies by at most `tolerance`."""
    values = [hopf_ratio(field, s, band, check_converged=False).c_hat
              for _, field in snapshots[-count:]]
    largest = max(values)
    spread = (largest - min(values)) / largest if largest > 0 else 0.0
    return tuple(values), spread, spread <= tolerance


def hopf_refinement(coarse, fine, tolerance=0.2):
    """Mark the fine-grid result stable when c_hat moved by at most `tolerance`."""
    if coarse.trivial and fine.trivial:
        return fine._replace(stable=True)
    reference = max(coarse.c_hat, fine.c_hat)
    change = abs(coarse.c_hat - fine.c_hat) / reference if reference > 0 else math.inf
    return fine._replace(stable=bool(change <= tolerance and min(coarse.c_hat, fine.c_hat) > 0))


def refined_discretization(discretization, h):
    """The same discretization at spacing h; radial mode gets round(1/h) cells."""
    if discretization.mode == 'grid':
        return replace(discretization, h=h)
    return replace(discretization, radial_points=max(4, int(round(1.0 / h))))


def hopf_rerun(simulation, result, h, band):
    """Rerun the simulation at spacing h and mark `result` stable against it.

    Returns the marked result and the rerun's HopfResult, or None when the
    rerun did not reach a steady state.
    """
    rerun = replace(simulation,
                    discretization=refined_discretization(simulation.discretization, h))
    _, profile = run(rerun)
    if not profile.converged:
        logger.warning('Refinement run at h={} did not converge'.format(h))
        return result, None
    other = hopf_ratio(profile, simulation.params.s, band)
    return result._replace(stable=hopf_refinement(other, result).stable), other


def profile_series(field, s, c_hat):
    """Profile along the positive first axis with the envelope c_hat d^s."""
    if isinstance(field, GridField):
        radii = np.asarray(field.axis)
        radii = radii[(radii >= 0) & (radii <= 1.0)]
    else:
        radii = np.asarray(field.radii)
    points = np.zeros((radii.size, field.n))
    points[:, 0] = radii
    values = interpolator(field)(points)
    return {
        'x': radii.tolist(),
        'series': {
            'profile': values.tolist(),
            'envelope': (c_hat * np.clip(1.0 - radii, 0.0, None) ** s).tolist(),
        },
    }


@Diagnostics.register
class HopfRatio:

    @classmethod
    def process(cls, context, report):
        settings = context.settings
        h = max(context.h, settings.refine_h or 0.0)
        band = (settings.band_lo or 2 * h, settings.band_hi)
        result = hopf_ratio(context.profile, context.params.s, band)
        plot = profile_series(context.profile.field, context.params.s, result.c_hat)
        plot.update({'title': 'Steady profile and c d^s envelope', 'xlabel': 'r',
                     'ylabel': 'u'})
        details = {
            'band': list(result.band),
            'argmin': list(result.argmin) if result.argmin else None,
            'normal_derivatives': [[list(nu), value] for nu, value in result.normal_derivatives],
            'plot': plot,
        }
        if settings.refine_h is not None and context.simulation is not None:
            result, other = hopf_rerun(context.simulation, result, settings.refine_h, band)
            details['refinement'] = {'h': settings.refine_h,
                                     'c_hat': None if other is None else other.c_hat,
                                     'stable': result.stable}
        verdict = result.verdict
        if verdict != HOPF_FAILS and result.stable is False:
            verdict = HOPF_UNSTABLE
        record = CheckRecord(cls.name, result.c_hat, 0.0, verdict,
                             verdict not in (HOPF_FAILS, HOPF_UNSTABLE), details=details)
        return report.extended(record)


@Diagnostics.register
class HopfStability:
    """c_hat on the last three snapshots agrees within 5%."""

    tolerance = 0.05

    @classmethod
    def process(cls, context, report):
        trajectory = context.trajectory
        if trajectory is None or len(trajectory) < 3:
            return report.extended(CheckRecord(cls.name, None, cls.tolerance, 'skipped', False,
                                               informational=True,
                                               details={'reason': 'fewer than 3 snapshots'}))
        settings = context.settings
        band = (settings.band_lo or 2 * context.h, settings.band_hi)
        values, spread, stable = hopf_temporal_stability(trajectory.snapshots, context.params.s,
                                                         band, tolerance=cls.tolerance)
        if max(values) <= 0:
            verdict, stable = TRIVIAL, True
        else:
            verdict = 'stable' if stable else 'unstable'
        return report.extended(CheckRecord(cls.name, spread, cls.tolerance, verdict, stable,
                                           details={'c_hat': list(values)}))
