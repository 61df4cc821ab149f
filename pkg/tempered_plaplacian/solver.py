#!/usr/bin/env python
# coding: utf-8
"""Forward Euler integration of u_t + L u = g(t, u) on the unit ball.

L is the tempered fractional p-Laplacian, u vanishes outside the ball at all
times, and the run stops at t_end or once the max-norm rate of change stays
below tol_steady over the steady window.
"""
import logging
import math

from typing import NamedTuple, Tuple

import numpy as np

from .core_types import GridField, RadialField, SteadyProfile
from .exceptions import ContractViolation, InvalidParameter, NumericalAbort
from .kernel import g_power_slope
from .operator import QuadratureSpec, apply_operator, barrier_phi, row_mass

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

# Relative slack when matching snapshot times.
TIME_EPS = 1e-12


class Trajectory(object):
    """Snapshots (t, field) of one run with the per-step residual series."""

    def __init__(self, config):
        self.config = config
        self.snapshots = []
        self.residuals = []
        self.steps = 0

    def add_snapshot(self, t, field):
        if self.snapshots and not t > self.snapshots[-1][0]:
            raise ContractViolation('snapshot times must be strictly increasing')
        if np.any(field.values[~field.interior_mask] != 0):
            raise ContractViolation('snapshot at t = {} is not exterior-zero'.format(t))
        self.snapshots.append((float(t), field))

    def add_residual(self, t, residual):
        self.residuals.append((float(t), float(residual)))

    @property
    def times(self):
        return [t for t, _ in self.snapshots]

    @property
    def fields(self):
        return [field for _, field in self.snapshots]

    @property
    def final(self):
        return self.snapshots[-1][1]

    def late_snapshots(self, fraction=0.2):
        """The final `fraction` of the snapshots, at least one."""
        count = max(1, int(math.ceil(fraction * len(self.snapshots))))
        return self.snapshots[-count:]

    def __len__(self):
        return len(self.snapshots)

    def __repr__(self):
        return 'Trajectory(snapshots={}, steps={})'.format(len(self.snapshots), self.steps)


def _bump(points, center, radius):
    gap = 1.0 - np.sum((points - center) ** 2, axis=-1) / radius ** 2
    return np.where(gap > 0, np.maximum(gap, 0.0) ** 2, 0.0)


def initial_field(config):
    """Initial field of a simulation, exterior-zero by construction."""
    initial = config.initial
    n = config.params.n
    discretization = config.discretization
    center = np.zeros(n)
    if initial.center:
        if len(initial.center) != n:
            raise InvalidParameter('initial center must have {} coordinates'.format(n),
                                   key='center')
        center = np.asarray(initial.center, dtype=float)
    elif initial.kind == 'asymmetric_bump':
        center[0] = -0.3

    def rule(points):
        if initial.kind == 'zero':
            return np.zeros(points.shape[:-1])
        elif initial.kind == 'barrier':
            return initial.amplitude * barrier_phi(points, config.params.s)
        elif initial.kind in ('bump', 'asymmetric_bump'):
            return initial.amplitude * _bump(points, center, initial.radius)
        rng = np.random.default_rng(initial.seed)
        noise = rng.random(points.shape[:-1])
        return initial.amplitude * noise * barrier_phi(points, config.params.s)

    if discretization.mode == 'grid':
        return GridField.from_function(n, discretization.h, rule)
    if initial.kind in ('asymmetric_bump', 'random') or np.any(center != 0):
        raise InvalidParameter('radial mode needs radially symmetric initial data',
                               key='initial')
    points = discretization.radial_points

    def profile(r):
        lifted = np.zeros((r.size, n))
        lifted[:, 0] = r
        return rule(lifted)
    return RadialField.uniform(n, points, profile)


def stable_dt(u, params, reaction, dt_max, quad=None):
    """Largest step the explicit scheme accepts for the current field.

    dt = min(dt_max, 0.5 / (Lambda + L_g)) with
    Lambda = G'(2 |u|_inf) = (p-1) (2 |u|_inf)^(p-2) times the kernel row mass and
    L_g the Lipschitz bound of g on [-|u|_inf - 1, |u|_inf + 1].
    """
    norm = u.max_norm
    scale = float(g_power_slope(2.0 * norm, params.p))
    operator_bound = scale * row_mass(u, params, quad) if scale > 0 else 0.0
    reaction_bound = reaction.lipschitz_bound(norm + 1.0)
    total = operator_bound + reaction_bound
    if total <= 0:
        return float(dt_max)
    return float(min(dt_max, 0.5 / total))


def step(u, t, dt, params, reaction, quad=None, threads=1):
    """u + dt (g(t, u) - L u) at interior nodes, zero outside."""
    if not dt > 0:
        raise ContractViolation('time step must be positive')
    operator_values = apply_operator(u, params, quad, threads).values
    update = u.values + dt * (reaction(t, u.values) - operator_values)
    if not np.all(np.isfinite(update[u.interior_mask])):
        raise NumericalAbort('non-finite update at t = {}; dt = {} is likely too large'
                             .format(t, dt), t=t)
    return u.with_values(update)


class _SteadyWindow(object):
    """Tracks how long the rate of change has stayed below the tolerance."""

    def __init__(self, tol, length):
        self.tol = tol
        self.length = length
        self.since = None
        self.rates = []

    def update(self, t_start, t_end, rate):
        if rate < self.tol:
            if self.since is None:
                self.since = t_start
                self.rates = []
            self.rates.append(rate)
            return t_end - self.since >= self.length - TIME_EPS
        self.since = None
        self.rates = []
        return False

    @property
    def residual(self):
        return max(self.rates) if self.rates else math.inf


def run(config, u0=None):
    """Integrate a configured problem; returns (Trajectory, SteadyProfile)."""
    params, reaction = config.params, config.reaction
    quad = config.quadrature or QuadratureSpec()
    u = initial_field(config) if u0 is None else u0
    trajectory = Trajectory(config)
    trajectory.add_snapshot(0.0, u)
    window = _SteadyWindow(config.tol_steady, config.steady_window)
    t = 0.0
    next_snapshot = config.snapshot_every
    converged = False
    rate = math.inf
    logger.info('Simulating {} field, n={}, s={}, p={}, lambda={}, reaction {}, t_end={}'.format(
        config.discretization.mode, params.n, params.s, params.p, params.lam, reaction.label,
        config.t_end))
    while t < config.t_end * (1.0 - TIME_EPS):
        if config.dt_policy == 'fixed':
            dt = config.dt
        else:
            dt = stable_dt(u, params, reaction, config.dt_max, quad)
        dt = min(dt, config.t_end - t, next_snapshot - t)
        try:
            updated = step(u, t, dt, params, reaction, quad, config.threads)
        except NumericalAbort as error:
            raise NumericalAbort(str(error), t=t, step=trajectory.steps) from error
        rate = float(np.max(np.abs(updated.values - u.values))) / dt
        trajectory.steps += 1
        trajectory.add_residual(t + dt, rate)
        converged = window.update(t, t + dt, rate)
        u, t = updated, t + dt
        logger.debug('step {}: t={:.6g}, dt={:.3g}, rate={:.3g}'.format(
            trajectory.steps, t, dt, rate))
        if t >= next_snapshot * (1.0 - TIME_EPS):
            trajectory.add_snapshot(t, u)
            next_snapshot += config.snapshot_every
        if converged:
            break
    if trajectory.snapshots[-1][0] < t:
        trajectory.add_snapshot(t, u)
    residual = window.residual if converged else rate
    if converged:
        logger.info('Steady state detected at t={:.6g} after {} steps (residual {:.3g})'.format(
            t, trajectory.steps, residual))
    else:
        logger.info('Reached t={:.6g} after {} steps without steady state (rate {:.3g})'.format(
            t, trajectory.steps, rate))
    profile = SteadyProfile(u, t, residual if math.isfinite(residual) else 0.0, converged,
                            config.tol_steady)
    return trajectory, profile


class ComparisonResult(NamedTuple):
    max_excess: float
    times: Tuple[float, ...]
    holds: bool


def compare_trajectories(lower, upper, tol=1e-10):
    """max over common snapshot times and nodes of lower - upper."""
    upper_by_time = {round(t, 12): field for t, field in upper.snapshots}
    excess = []
    times = []
    for t, field in lower.snapshots:
        other = upper_by_time.get(round(t, 12))
        if other is None:
            continue
        times.append(t)
        excess.append(float(np.max(field.values - other.values)))
    if not times:
        raise ContractViolation('trajectories share no snapshot time')
    worst = max(excess)
    return ComparisonResult(worst, tuple(times), worst <= tol)
