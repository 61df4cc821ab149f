#!/usr/bin/env python
# coding: utf-8
"""Principal-value evaluation of the tempered fractional p-Laplacian.

Three evaluators share the same kernel:

* grid mode: punched-hole lattice sum over every offset of the symmetric
  grid, with the mass beyond the lattice reach added as G(u(x)) times a
  kernel tail;
* radial mode: polar reduction about x = (r, 0, ..., 0) with precomputed
  kernel rows, so a profile update is a dense matrix contraction;
* function mode: graded spherical shells about x with antipodal pairing,
  refined until two successive depths agree.
"""
import logging
import math
import time

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from scipy import integrate

from .core_types import BOUNDARY_TOL, GridField, RadialField
from .exceptions import ContractViolation, InvalidParameter, NumericalAbort, QuadratureError
from .kernel import KernelSpec, exterior_mass, g_power, kernel_weight, tail_integral
from .quadrature import breakpoint_rule, gauss_legendre

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

# Inner shell radius of function mode, relative to the nearest radial break.
INNER_SHELL = 2.0 ** -10
# Smallest admitted excess of the inner power law over sp.
MIN_INNER_EXCESS = 0.1
# Batch timing records kept per grid operator.
TIMING_HISTORY = 256


@dataclass(frozen=True)
class QuadratureSpec:
    """Discretization knobs of the principal-value integral.

    hole is the excluded radius around the evaluation node in units of h,
    cutoff the far radius where numeric tail integration hands over to the
    closed-form bound (None picks it from eps_tail).
    """

    hole: float = 1.0
    eps_tail: float = 1e-8
    cutoff: Optional[float] = None
    angular_points: int = 256
    max_depth: int = 6
    min_depth: int = 1
    rtol: float = 1e-7
    gauss_points: int = 8
    chunk_size: int = 1024

    def __post_init__(self):
        if not self.hole >= 1:
            raise InvalidParameter('hole radius must be at least one grid cell', key='hole')
        if self.cutoff is not None and not self.cutoff > 2:
            raise InvalidParameter('far cutoff must exceed 2', key='cutoff')
        if self.angular_points < 16 or self.angular_points % 2:
            raise InvalidParameter('angular_points must be even and >= 16', key='angular_points')
        if not 0 <= self.min_depth <= self.max_depth:
            raise InvalidParameter('need 0 <= min_depth <= max_depth', key='max_depth')
        if not self.rtol > 0 or not self.eps_tail > 0:
            raise InvalidParameter('rtol and eps_tail must be positive', key='rtol')

    def tail(self, R, kernel):
        return tail_integral(float(R), kernel, self.eps_tail, self.cutoff)


class TimingRecord(NamedTuple):
    targets: int
    offsets: int
    kernel_evals: int
    seconds: float


def _sequential_sum(rows):
    total = rows[0].copy()
    for row in rows[1:]:
        total += row
    return total


def _neumaier_add(total, compensation, term):
    updated = total + term
    compensation += np.where(np.abs(total) >= np.abs(term),
                             (total - updated) + term,
                             (term - updated) + total)
    return updated, compensation


class GridOperator(object):
    """Dense lattice sum for one (params, n, h, quadrature) geometry.

    Offsets are grouped into orbits of the grid's symmetry group. Each
    orbit's contributions are sorted and their positive and negative parts
    summed separately, and orbits are accumulated with Neumaier compensation
    in lexicographic order of their canonical offset. The result for a node
    therefore does not depend on which other nodes are evaluated alongside,
    is exactly odd in u, and is identical at symmetric nodes of a symmetric
    field.
    """

    def __init__(self, params, n, h, quad):
        if params.n != n:
            raise ContractViolation('operator dimension {} does not match field dimension {}'
                                    .format(params.n, n))
        self.params = params
        self.kernel = KernelSpec(params)
        self.n = n
        self.h = h
        self.quad = quad
        self.reach = 2.0 + 2.0 * h
        self.kmax = int(math.ceil(self.reach / h))
        self.orbits, self.weights = self._build_orbits()
        self.offset_count = int(sum(len(orbit) for orbit in self.orbits))
        self.tail = quad.tail(self.reach, self.kernel)
        self.row_mass = math.fsum(
            float(w) * len(orbit) for w, orbit in zip(self.weights, self.orbits)) + self.tail
        self.reset_timings()
        logger.debug('Grid operator n={} h={}: {} offsets in {} orbits, tail {}'.format(
            n, h, self.offset_count, len(self.orbits), self.tail))

    def reset_timings(self):
        """Drop the batch records and zero the running totals."""
        self.timings = deque(maxlen=TIMING_HISTORY)
        self.calls = 0
        self.kernel_evals = 0
        self.seconds = 0.0

    def _build_orbits(self):
        span = np.arange(-self.kmax, self.kmax + 1)
        offsets = np.stack(np.meshgrid(*([span] * self.n), indexing='ij'), axis=-1)
        offsets = offsets.reshape(-1, self.n)
        norms = np.sqrt(np.sum(offsets.astype(float) ** 2, axis=1))
        keep = (norms >= self.quad.hole - 1e-12) & (norms * self.h <= self.reach + 1e-12)
        offsets = offsets[keep]
        canonical = np.sort(np.abs(offsets), axis=1)
        keys, inverse = np.unique(canonical, axis=0, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        order = np.argsort(inverse, kind='stable')
        splits = np.cumsum(np.bincount(inverse, minlength=len(keys)))[:-1]
        orbits = np.split(offsets[order], splits)
        radii = np.sqrt(np.sum(keys.astype(float) ** 2, axis=1)) * self.h
        weights = kernel_weight(radii, self.kernel) * self.h ** self.n
        return orbits, np.atleast_1d(weights)

    def evaluate(self, field, targets=None, threads=1):
        """Operator values at the target nodes (all interior nodes by default)."""
        if field.n != self.n or field.h != self.h:
            raise ContractViolation('field geometry does not match the operator')
        if targets is None:
            targets = field.interior_indices()
        targets = tuple(np.atleast_1d(np.asarray(t, dtype=np.intp)) for t in targets)
        if not np.all(field.interior_mask[targets]):
            raise ContractViolation('operator evaluated at an exterior node')
        started = time.perf_counter()
        padded = np.pad(np.asarray(field.values, dtype=float), self.kmax)
        strides = padded.shape[0] ** np.arange(self.n - 1, -1, -1)
        flat_targets = sum((t + self.kmax) * stride for t, stride in zip(targets, strides))
        flat_targets = np.asarray(flat_targets, dtype=np.intp)
        flat_orbits = [orbit @ strides for orbit in self.orbits]
        flat = padded.ravel()
        chunk = self.quad.chunk_size
        chunks = [flat_targets[i:i + chunk] for i in range(0, flat_targets.size, chunk)]

        def accumulate(chunk_targets):
            return self._accumulate(flat, chunk_targets, flat_orbits)

        if threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(accumulate, chunks))
        else:
            results = [accumulate(c) for c in chunks]
        values = np.concatenate(results) if results else np.zeros(0)
        if not np.all(np.isfinite(values)):
            raise NumericalAbort('operator produced non-finite values')
        record = TimingRecord(flat_targets.size, self.offset_count,
                              flat_targets.size * self.offset_count,
                              time.perf_counter() - started)
        self.timings.append(record)
        self.calls += 1
        self.kernel_evals += record.kernel_evals
        self.seconds += record.seconds
        logger.debug('Lattice sum: {} targets x {} offsets in {:.3f}s'.format(
            record.targets, record.offsets, record.seconds))
        return values

    def _accumulate(self, flat, targets, flat_orbits):
        p = self.params.p
        centre = flat[targets]
        total = np.zeros_like(centre)
        compensation = np.zeros_like(centre)
        for offsets, weight in zip(flat_orbits, self.weights):
            neighbours = flat[targets[None, :] + offsets[:, None]]
            terms = g_power(centre[None, :] - neighbours, p)
            positive = np.sort(np.where(terms > 0, terms, 0.0), axis=0)
            negative = np.sort(np.where(terms < 0, -terms, 0.0), axis=0)
            orbit_sum = (_sequential_sum(positive) - _sequential_sum(negative)) * weight
            total, compensation = _neumaier_add(total, compensation, orbit_sum)
        return (total + compensation) + g_power(centre, p) * self.tail


def grid_operator(params, n, h, quad=None):
    """Cached lattice operator of one geometry; quad None means the default spec."""
    return _grid_operator(params, n, h, quad or QuadratureSpec())


@lru_cache(maxsize=16)
def _grid_operator(params, n, h, quad):
    return GridOperator(params, n, h, quad)


def eval_grid(u, index, params, quad=None, threads=1):
    """Operator value at one interior node of a grid field."""
    quad = quad or QuadratureSpec()
    index = tuple(int(i) for i in index)
    if not u.interior_mask[index]:
        raise ContractViolation('node {} is not interior'.format(index))
    targets = tuple(np.array([i]) for i in index)
    return float(grid_operator(params, u.n, u.h, quad).evaluate(u, targets, threads)[0])


def eval_grid_all(u, params, quad=None, threads=1):
    """Operator values at every interior node; exterior nodes are 0."""
    quad = quad or QuadratureSpec()
    operator = grid_operator(params, u.n, u.h, quad)
    targets = u.interior_indices()
    values = np.zeros_like(u.values)
    values[targets] = operator.evaluate(u, targets, threads)
    return u.with_values(values)


class RadialOperator(object):
    """Kernel rows of the polar reduction for one set of radii.

    Each radial cell carries a Gauss-Legendre rule in rho and a midpoint rule
    with `angular_points` cells in the polar angle. The cells touching the
    singular point (rho, theta) = (r, 0) are excluded.
    """

    def __init__(self, params, radii, quad):
        if params.n not in (2, 3):
            raise ContractViolation('radial mode supports n = 2 or n = 3')
        self.params = params
        self.kernel = KernelSpec(params)
        self.radii = np.asarray(radii, dtype=float)
        self.quad = quad
        nodes, weights = gauss_legendre(quad.gauss_points)
        left, right = self.radii[:-1], self.radii[1:]
        self.fraction = 0.5 * (nodes + 1.0)
        self.rho = left[:, None] + (right - left)[:, None] * self.fraction[None, :]
        rho_weights = 0.5 * (right - left)[:, None] * weights[None, :]
        interior = int(np.count_nonzero(self.radii < 1.0 - BOUNDARY_TOL))
        self.rows = np.zeros((interior,) + self.rho.shape)
        self.exterior = np.zeros(interior)
        angular = self._angular_measure()
        theta = (np.arange(quad.angular_points) + 0.5) * math.pi / quad.angular_points
        half_sine = np.sin(0.5 * theta)
        volume = self.rho ** (params.n - 1) * rho_weights
        for j in range(interior):
            r = self.radii[j]
            if r == 0:
                row = kernel_weight(self.rho, self.kernel) * angular.sum()
                row[0, :] = 0.0
            else:
                gap = (r - self.rho)[:, :, None] ** 2
                chord = 4.0 * r * self.rho[:, :, None] * half_sine[None, None, :] ** 2
                weighted = kernel_weight(np.sqrt(gap + chord), self.kernel) * angular
                for cell in (j - 1, j):
                    if 0 <= cell < weighted.shape[0]:
                        weighted[cell, :, 0] = 0.0
                row = weighted.sum(axis=2)
            self.rows[j] = row * volume
            self.exterior[j] = exterior_mass(float(r), self.kernel, quad.eps_tail)
        self.row_mass = float(np.max(self.rows.reshape(interior, -1).sum(axis=1) + self.exterior))

    def _angular_measure(self):
        count = self.quad.angular_points
        edges = np.linspace(0.0, math.pi, count + 1)
        if self.params.n == 2:
            return np.full(count, 2.0 * math.pi / count)
        return 2.0 * math.pi * (np.cos(edges[:-1]) - np.cos(edges[1:]))

    def profile_at_nodes(self, values):
        values = np.asarray(values, dtype=float)
        return ((1.0 - self.fraction)[None, :] * values[:-1, None]
                + self.fraction[None, :] * values[1:, None])

    def evaluate(self, field, rows=None):
        if rows is None:
            rows = np.arange(self.rows.shape[0])
        rows = np.atleast_1d(np.asarray(rows, dtype=np.intp))
        if np.any(rows >= self.rows.shape[0]) or np.any(rows < 0):
            raise ContractViolation('radial operator evaluated at r >= 1')
        p = self.params.p
        centre = field.values[rows]
        profile = self.profile_at_nodes(field.values)
        terms = g_power(centre[:, None, None] - profile[None, :, :], p) * self.rows[rows]
        values = terms.reshape(rows.size, -1).sum(axis=1) + g_power(centre, p) * self.exterior[rows]
        if not np.all(np.isfinite(values)):
            raise NumericalAbort('radial operator produced non-finite values')
        return values


@lru_cache(maxsize=16)
def _radial_operator(params, radii, quad):
    return RadialOperator(params, radii, quad)


def radial_operator(params, field, quad):
    return _radial_operator(params, tuple(field.radii.tolist()), quad)


def eval_radial(U, j, params, quad=None):
    """Operator value of the radial field at radius index j (r_j < 1)."""
    quad = quad or QuadratureSpec()
    if U.n != params.n:
        raise ContractViolation('radial field dimension does not match the operator')
    if not U.radii[j] < 1.0 - BOUNDARY_TOL:
        raise ContractViolation('radial operator is not defined on the boundary r = 1')
    return float(radial_operator(params, U, quad).evaluate(U, [j])[0])


def eval_radial_all(U, params, quad=None):
    quad = quad or QuadratureSpec()
    values = np.zeros_like(U.values)
    operator = radial_operator(params, U, quad)
    values[:operator.rows.shape[0]] = operator.evaluate(U)
    return U.with_values(values)


@dataclass(frozen=True, eq=False)
class ScalarFieldFn:
    """Analytically given field x -> u(x), zero outside support_radius.

    interfaces lists the radii of origin-centred spheres where u is not
    smooth; the shell quadrature places breakpoints on them.
    """

    rule: Callable[[np.ndarray], np.ndarray]
    support_radius: float = 1.0
    smoothness: str = 'holder-s-at-boundary'
    interfaces: Tuple[float, ...] = ()

    def __post_init__(self):
        if not 0 < self.support_radius <= 1:
            raise InvalidParameter('support radius must lie in (0, 1]', key='support_radius')
        if self.smoothness not in ('c11-interior', 'holder-s-at-boundary'):
            raise InvalidParameter('unknown smoothness tag {!r}'.format(self.smoothness))
        interfaces = set(float(r) for r in self.interfaces) | {float(self.support_radius)}
        object.__setattr__(self, 'interfaces', tuple(sorted(interfaces)))

    def __call__(self, points):
        points = np.asarray(points, dtype=float)
        radius = np.sqrt(np.sum(points ** 2, axis=-1))
        values = np.asarray(self.rule(points), dtype=float)
        return np.where(radius < self.support_radius, values, 0.0)

    def __neg__(self):
        rule = self.rule
        return ScalarFieldFn(lambda x: -rule(x), self.support_radius, self.smoothness,
                             self.interfaces)


def barrier_phi(x, s):
    """Phi(x) = (1 - |x|^2)_+^s."""
    x = np.asarray(x, dtype=float)
    gap = 1.0 - np.sum(x ** 2, axis=-1)
    values = np.where(gap > 0, np.power(np.maximum(gap, 0.0), s), 0.0)
    return float(values) if values.ndim == 0 else values


def barrier_field(s):
    return ScalarFieldFn(lambda x: barrier_phi(x, s), 1.0, 'holder-s-at-boundary')


class QuadratureResult(NamedTuple):
    value: float
    estimates: Tuple[float, ...]
    converged: bool


def _frame(x):
    """Orthonormal basis whose first vector points along x."""
    n = x.size
    radius = float(np.linalg.norm(x))
    lead = x / radius if radius > 1e-14 else np.eye(n)[0]
    basis, _ = np.linalg.qr(np.column_stack([lead, np.eye(n)]))
    basis = basis[:, :n]
    if np.dot(basis[:, 0], lead) < 0:
        basis = -basis
    return basis


def _polar_breaks(r, t, interfaces):
    """Polar angles in (0, pi/2) where x + t w or x - t w crosses an interface."""
    breaks = [0.0, 0.5 * math.pi]
    if r <= 1e-14:
        return breaks
    for rho in interfaces:
        c = (rho * rho - r * r - t * t) / (2.0 * r * t)
        if -1.0 < c < 1.0:
            angle = math.acos(c)
            for candidate in (angle, math.pi - angle):
                if 0.0 < candidate < 0.5 * math.pi:
                    breaks.append(candidate)
    return breaks


def _half_sphere(n, r, t, interfaces, depth, points):
    """Directions w and weights covering half of the unit sphere.

    Together with -w the directions cover the full sphere; the polar angle is
    measured from the direction of x.
    """
    if n == 1:
        return np.ones((1, 1)), np.ones(1)
    breaks = _polar_breaks(r, t, interfaces)
    crossing = len(breaks) > 2
    levels = 2 + 2 * depth if crossing else 2 + depth
    theta, theta_weights = breakpoint_rule(breaks, levels, points, graded=crossing)
    if n == 2:
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        directions = np.concatenate([np.column_stack([cos_t, sin_t]),
                                     np.column_stack([cos_t, -sin_t])])
        return directions, np.concatenate([theta_weights, theta_weights])
    azimuths = 8 * (2 + depth)
    psi = 2.0 * math.pi * np.arange(azimuths) / azimuths
    cos_t, sin_t = np.cos(theta)[:, None], np.sin(theta)[:, None]
    directions = np.stack([np.broadcast_to(cos_t, (theta.size, azimuths)),
                           sin_t * np.cos(psi)[None, :],
                           sin_t * np.sin(psi)[None, :]], axis=-1).reshape(-1, 3)
    weights = (theta_weights * np.sin(theta))[:, None] * np.full(azimuths, 2.0 * math.pi / azimuths)
    return directions, weights.ravel()


class _Shells(object):
    """Paired direction sums of one evaluation point at one refinement depth."""

    def __init__(self, u, x, params, quad, depth):
        self.u = u
        self.x = x
        self.p = params.p
        self.r = float(np.linalg.norm(x))
        self.centre = float(u(x[None, :])[0])
        self.frame = _frame(x)
        self.quad = quad
        self.depth = depth

    def paired_sum(self, t):
        """Sum over directions w of G(u(x) - u(x + t w)) + G(u(x) - u(x - t w))."""
        directions, weights = _half_sphere(self.x.size, self.r, t, self.u.interfaces,
                                           self.depth, self.quad.gauss_points)
        steps = t * (directions @ self.frame.T)
        paired = (g_power(self.centre - self.u(self.x[None, :] + steps), self.p)
                  + g_power(self.centre - self.u(self.x[None, :] - steps), self.p))
        return float(np.sum(weights * paired))


def _inner_shell(shells, t0, kernel):
    """Kernel integral over {|z| < t0} with the paired sum modelled as B t^q.

    q is read off the paired sums at t0 and t0 / 2; below t0 the sum is a
    difference of nearly equal values and is never evaluated.
    """
    outer = shells.paired_sum(t0)
    if outer == 0.0:
        return 0.0
    inner = shells.paired_sum(0.5 * t0)
    sp = kernel.params.sp
    order = 2.0
    if inner != 0.0 and (inner > 0) == (outer > 0):
        order = math.log2(outer / inner)
    order = max(order, sp + MIN_INNER_EXCESS)
    params = kernel.params

    def smooth_part(t):
        return params.c_norm * math.exp(-params.lam * float(params.tempering(t)))

    # integral of t^(q-1-sp) c exp(-lambda f(t)) = integral of t^q K(t) t^(n-1)
    mass, _ = integrate.quad(smooth_part, 0.0, t0, weight='alg', wvar=(order - 1.0 - sp, 0.0))
    return outer / t0 ** order * mass


def eval_function_at_depth(u, x, params, quad, depth):
    """Single refinement level of the shell quadrature."""
    x = np.asarray(x, dtype=float).reshape(-1)
    n = params.n
    kernel = KernelSpec(params)
    shells = _Shells(u, x, params, quad, depth)
    r = shells.r
    far = max(rho + r for rho in u.interfaces)
    radial_breaks = [far] + [abs(rho - r) for rho in u.interfaces] + \
        [rho + r for rho in u.interfaces]
    t0 = INNER_SHELL * min(t for t in radial_breaks if t > 0)
    radial_breaks = [t0] + [t for t in radial_breaks if t > t0]
    t_nodes, t_weights = breakpoint_rule(radial_breaks, 4 + 4 * depth,
                                         quad.gauss_points, parts=1 + depth // 2)
    contributions = [_inner_shell(shells, t0, kernel)]
    for t, t_weight in zip(t_nodes, t_weights):
        radial = kernel_weight(t, kernel) * t ** (n - 1) * t_weight
        contributions.append(radial * shells.paired_sum(t))
    return math.fsum(contributions) + g_power(shells.centre, params.p) * quad.tail(far, kernel)


def eval_function_levels(u, x, params, quad=None, stop_when_converged=True):
    """Refinement sequence of the shell quadrature at an interior point."""
    quad = quad or QuadratureSpec()
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != params.n:
        raise ContractViolation('point has dimension {}, operator {}'.format(x.size, params.n))
    if not np.linalg.norm(x) < 1.0 - BOUNDARY_TOL:
        raise ContractViolation('function mode needs an interior point |x| < 1')
    estimates = []
    converged = False
    for depth in range(quad.max_depth + 1):
        estimates.append(eval_function_at_depth(u, x, params, quad, depth))
        if depth >= max(quad.min_depth, 1):
            change = abs(estimates[-1] - estimates[-2])
            converged = change <= quad.rtol * abs(estimates[-1])
            if converged and stop_when_converged:
                break
    logger.debug('Shell quadrature at {}: {} levels, converged={}'.format(
        x.tolist(), len(estimates), converged))
    return QuadratureResult(estimates[-1], tuple(estimates), converged)


def eval_function(u, x, params, quad=None):
    """Operator value of an analytic field at an interior point."""
    result = eval_function_levels(u, x, params, quad)
    if not result.converged:
        raise QuadratureError('shell quadrature did not converge at x = {}'.format(
            np.asarray(x).tolist()), estimates=result.estimates[-2:])
    return result.value


def apply_operator(field, params, quad=None, threads=1):
    """Operator values for a grid or radial field, as a field of the same kind."""
    if isinstance(field, GridField):
        return eval_grid_all(field, params, quad, threads)
    elif isinstance(field, RadialField):
        return eval_radial_all(field, params, quad)
    raise TypeError('unsupported field type {}'.format(type(field).__name__))


def row_mass(field, params, quad=None):
    """Discrete kernel row mass (hole excluded, tail included) of the field's geometry."""
    quad = quad or QuadratureSpec()
    if isinstance(field, GridField):
        return grid_operator(params, field.n, field.h, quad).row_mass
    return radial_operator(params, field, quad).row_mass
