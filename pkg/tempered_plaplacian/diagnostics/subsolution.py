#!/usr/bin/env python
# coding: utf-8
"""Subsolution inequality for v = chi_D u_inf + delta eta(t) Phi.

On a ball B_eps(x_bar) away from D and for t near 1, v_t + L v <= 0 must
hold; the test samples the left-hand side and bisects for the largest delta
keeping it nonpositive.
"""
import logging
import math

from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

import numpy as np

from ..core_types import CheckRecord, SteadyProfile
from ..exceptions import InvalidParameter, PreconditionError
from ..operator import QuadratureSpec, ScalarFieldFn, barrier_phi, eval_function_levels
from .common import Diagnostics, interpolator, node_table

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

BISECTION_STEPS = 8
MAX_HALVINGS = 30
SAMPLE_TIMES = (-0.75, -0.5, 0.0, 0.5, 0.75)
DEFAULT_QUADRATURE = QuadratureSpec(max_depth=3, min_depth=1, rtol=1e-3)


@dataclass(frozen=True)
class SubsolutionSpec:
    r_d: float = 0.3
    delta: float = 0.0
    eps0: float = 0.5
    x_bar: Tuple[float, ...] = ()
    eps_ball: float = 0.1

    def __post_init__(self):
        if not 0 < self.r_d < 1:
            raise InvalidParameter('r_D must lie in (0, 1)', key='r_d')
        if self.delta < 0:
            raise InvalidParameter('delta must be >= 0', key='delta')
        if not 0 < self.eps0 < 1:
            raise InvalidParameter('eps0 must lie in (0, 1)', key='eps0')
        if not self.eps_ball > 0:
            raise InvalidParameter('eps_ball must be > 0', key='eps_ball')
        if self.x_bar:
            radius = float(np.linalg.norm(self.x_bar))
            if radius - self.eps_ball < self.r_d or radius + self.eps_ball >= 1:
                raise InvalidParameter('B_eps(x_bar) must lie in the ball and avoid D',
                                       key='x_bar')

    def center(self, n):
        """x_bar, defaulting to the point midway between D and the sphere on the first axis."""
        if self.x_bar:
            if len(self.x_bar) != n:
                raise InvalidParameter('x_bar must have {} coordinates'.format(n), key='x_bar')
            return np.asarray(self.x_bar, dtype=float)
        center = np.zeros(n)
        center[0] = 0.5 * (self.r_d + 1.0)
        if center[0] - self.eps_ball < self.r_d or center[0] + self.eps_ball >= 1:
            raise InvalidParameter('eps_ball too large for the default x_bar', key='eps_ball')
        return center


def eta(t, eps0):
    """Smooth cutoff equal to 1 on |t-1| <= eps0/2 and 0 for |t-1| >= eps0."""
    xi = np.clip((eps0 - np.abs(np.asarray(t, dtype=float) - 1.0)) / (0.5 * eps0), 0.0, 1.0)
    return xi ** 3 * (10.0 - 15.0 * xi + 6.0 * xi ** 2)


def eta_prime(t, eps0):
    t = np.asarray(t, dtype=float)
    offset = t - 1.0
    xi = (eps0 - np.abs(offset)) / (0.5 * eps0)
    ramp = (xi > 0) & (xi < 1)
    slope = 30.0 * xi ** 2 * (1.0 - xi) ** 2 * (-np.sign(offset)) / (0.5 * eps0)
    return np.where(ramp, slope, 0.0)


def lower_solution(u_inf, spec, s, amplitude):
    """x -> chi_D(x) u_inf(x) + amplitude Phi(x)."""
    inner = interpolator(u_inf)
    r_d = spec.r_d

    def rule(points):
        points = np.asarray(points, dtype=float)
        radius = np.sqrt(np.sum(points ** 2, axis=-1))
        core = np.where(radius < r_d, inner(points), 0.0)
        return core + amplitude * barrier_phi(points, s)
    return ScalarFieldFn(rule, 1.0, 'holder-s-at-boundary', (r_d,))


class SubsolutionSample(NamedTuple):
    x: Tuple[float, ...]
    t: float
    value: float


class SubsolutionResult(NamedTuple):
    delta: float
    max_value: float
    samples: Tuple[SubsolutionSample, ...]
    delta_star: Optional[float]
    unconverged: int = 0

    @property
    def quadrature_converged(self):
        return self.unconverged == 0

    @property
    def passed(self):
        return self.max_value <= 0


def _steady_field(source):
    if hasattr(source, 'snapshots'):
        return source.final
    if isinstance(source, SteadyProfile):
        return source.field
    return source


class _Sampler(object):
    """Caches operator values per (amplitude, sample point)."""

    def __init__(self, u_inf, spec, params, quad):
        self.u_inf = u_inf
        self.spec = spec
        self.params = params
        self.quad = quad
        n = params.n
        center = spec.center(n)
        offsets = [np.zeros(n)] + [sign * 0.5 * spec.eps_ball * e
                                   for e in np.eye(n) for sign in (1.0, -1.0)]
        self.points = [center + offset for offset in offsets]
        self.times = [1.0 + fraction * spec.eps0 for fraction in SAMPLE_TIMES]
        self._cache = {}
        self.unconverged = 0

    def operator_value(self, amplitude, index):
        key = (amplitude, index)
        if key not in self._cache:
            field = lower_solution(self.u_inf, self.spec, self.params.s, amplitude)
            result = eval_function_levels(field, self.points[index], self.params, self.quad)
            if not result.converged:
                self.unconverged += 1
                logger.warning('Shell quadrature did not converge at x = {} for amplitude {}'
                               .format(self.points[index].tolist(), amplitude))
            self._cache[key] = result.value
        return self._cache[key]

    def samples(self, delta):
        out = []
        for t in self.times:
            amplitude = float(delta * eta(t, self.spec.eps0))
            slope = float(delta * eta_prime(t, self.spec.eps0))
            for index, x in enumerate(self.points):
                value = slope * float(barrier_phi(x, self.params.s)) + \
                    self.operator_value(amplitude, index)
                out.append(SubsolutionSample(tuple(float(c) for c in x), t, value))
        return out

    def max_value(self, delta):
        return max(sample.value for sample in self.samples(delta))


def subsolution_comparison_test(source, spec, params, quad=None, bisect=True):
    """Max of v_t + L v over the sampled (x, t) for the configured delta.

    source is a trajectory (its last snapshot is u_inf), a steady profile or
    a field. With bisect, delta* is searched on [0, 10 max u_inf] by halving
    until the maximum is <= 0 and bisecting the last bracket 8 times.
    Operator values whose quadrature did not converge are counted in
    `unconverged`.
    """
    quad = quad or DEFAULT_QUADRATURE
    u_inf = _steady_field(source)
    points, values, _ = node_table(u_inf)
    in_d = np.sum(points ** 2, axis=1) < spec.r_d ** 2
    if not np.any(in_d) or float(np.min(values[in_d])) <= 0:
        raise PreconditionError('u_inf is not positive on D = B_{}(0)'.format(spec.r_d))
    sampler = _Sampler(u_inf, spec, params, quad)
    samples = sampler.samples(spec.delta)
    max_value = max(sample.value for sample in samples)
    delta_star = None
    if bisect:
        delta_star = _search_delta(sampler, 10.0 * float(np.max(values)))
    logger.info('Subsolution test: max {} at delta={} (delta*={})'.format(
        max_value, spec.delta, delta_star))
    return SubsolutionResult(spec.delta, max_value, tuple(samples), delta_star,
                             sampler.unconverged)


def _search_delta(sampler, upper):
    """Largest delta in [0, upper] with a nonpositive sampled maximum.

    delta is halved from upper until the inequality first holds, then the
    bracket between that delta and the last failing one is bisected.
    """
    if sampler.max_value(0.0) > 0:
        return 0.0
    if sampler.max_value(upper) <= 0:
        return upper
    high, low = upper, 0.5 * upper
    for _ in range(MAX_HALVINGS):
        if sampler.max_value(low) <= 0:
            break
        high, low = low, 0.5 * low
    else:
        logger.warning('No admissible delta above {}'.format(high))
        return 0.0
    for _ in range(BISECTION_STEPS):
        middle = 0.5 * (low + high)
        if sampler.max_value(middle) <= 0:
            low = middle
        else:
            high = middle
    return low


@Diagnostics.register
class SubsolutionComparison:

    @classmethod
    def process(cls, context, report):
        settings = context.settings
        spec = SubsolutionSpec(settings.r_d, settings.delta, settings.eps0, settings.x_bar,
                               settings.eps_ball)
        source = context.trajectory if context.trajectory is not None else context.profile
        result = subsolution_comparison_test(source, spec, context.params, context.quadrature)
        details = {
            'delta': result.delta,
            'delta_star': result.delta_star,
            'quadrature_converged': result.quadrature_converged,
            'unconverged_evaluations': result.unconverged,
            'samples': [[list(sample.x), sample.t, sample.value] for sample in result.samples],
        }
        verdict = 'holds' if result.passed else 'fails'
        value = result.max_value if math.isfinite(result.max_value) else None
        return report.extended(CheckRecord(cls.name, value, 0.0, verdict, result.passed,
                                           details=details))
