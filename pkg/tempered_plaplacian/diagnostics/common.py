#!/usr/bin/env python
# coding: utf-8
import logging

from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Any, Optional, Tuple, Type

import inflection
import numpy as np
from scipy.interpolate import RegularGridInterpolator

from ..core_types import BOUNDARY_TOL, CheckRecord, GridField, SteadyProfile
from ..exceptions import InvalidParameter, PreconditionError, ResolutionError

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

# Finest grid used when a radial profile is lifted onto a Cartesian grid.
LIFT_SPACING = 1.0 / 64


@dataclass(frozen=True)
class DiagnosticSettings:
    """Toggles and tolerances of the diagnostics run.

    band_lo defaults to 2h. tol_factor scales h into tol_w = tol_mp.
    refine_h, when set, reruns the simulation at that spacing and compares c_hat.
    """

    checks: Tuple[str, ...] = ()
    band_lo: Optional[float] = None
    band_hi: float = 0.2
    alphas: Tuple[float, ...] = (-0.9, -0.7, -0.5, -0.3, -0.1, 0.0)
    alpha: float = -0.5
    delta_strip: float = 0.1
    tol_factor: float = 10.0
    r_d: float = 0.3
    delta: float = 0.0
    eps0: float = 0.5
    x_bar: Tuple[float, ...] = ()
    eps_ball: float = 0.1
    barrier_radii: Tuple[float, ...] = ()
    refine_h: Optional[float] = None

    def __post_init__(self):
        band_lo = self.band_lo
        if not self.band_hi > 0 or (band_lo is not None and not 0 < band_lo < self.band_hi):
            raise InvalidParameter('Hopf band needs 0 < band_lo < band_hi', key='band_lo')
        if not self.tol_factor > 0:
            raise InvalidParameter('tol_factor must be > 0', key='tol_factor')
        if self.refine_h is not None and not 0 < self.refine_h <= 0.5:
            raise InvalidParameter('refine_h must lie in (0, 0.5]', key='refine_h')
        if any(not -1 < a <= 0 for a in self.alphas) or not self.alphas:
            raise InvalidParameter('moving-plane alphas must lie in (-1, 0]', key='alphas')
        object.__setattr__(self, 'checks', tuple(self.checks))
        object.__setattr__(self, 'alphas', tuple(float(a) for a in self.alphas))
        object.__setattr__(self, 'x_bar', tuple(float(x) for x in self.x_bar))
        object.__setattr__(self, 'barrier_radii', tuple(float(r) for r in self.barrier_radii))


@dataclass
class DiagnosticContext:
    """Inputs shared by all checks of one diagnose run."""

    profile: SteadyProfile
    simulation: Any
    trajectory: Any = None
    settings: DiagnosticSettings = field(default_factory=DiagnosticSettings)
    quadrature: Any = None

    @property
    def params(self):
        return self.simulation.params

    @property
    def h(self):
        return spacing(self.profile.field)

    @property
    def tolerance(self):
        return self.settings.tol_factor * self.h


class Diagnostics:
    """Registry of checks, run in registration order."""

    _classes = OrderedDict()

    @classmethod
    def register(cls, class_: Type) -> Type:
        name = getattr(class_, 'name', None) or inflection.underscore(class_.__name__)
        class_.name = name
        class_.title = inflection.titleize(name)
        cls._classes[name] = class_
        return class_

    @classmethod
    def names(cls):
        return list(cls._classes)

    @classmethod
    def get(cls, name):
        if name not in cls._classes:
            raise InvalidParameter('unknown diagnostic {!r}'.format(name), key='checks')
        return cls._classes[name]

    @classmethod
    def run(cls, context, report, enabled=None):
        """Run the enabled checks (all by default) and return the extended report."""
        names = cls.names() if not enabled else [cls.get(name).name for name in enabled]
        for name in names:
            check = cls._classes[name]
            logger.info('Running {}'.format(check.title))
            try:
                report = check.process(context, report)
            except (PreconditionError, ResolutionError) as error:
                logger.warning('{} skipped: {}'.format(check.title, error))
                report = report.extended(CheckRecord(name, None, None, 'skipped', False,
                                                     informational=True,
                                                     details={'reason': str(error)}))
        return report


def spacing(field):
    """Grid spacing, or the largest radial cell for radial profiles."""
    if isinstance(field, GridField):
        return field.h
    return float(np.max(np.diff(field.radii)))


def as_grid(field, h=None):
    """Grid view of a field; radial profiles are lifted onto a grid of spacing h."""
    if isinstance(field, GridField):
        return field
    if h is None:
        h = max(spacing(field), LIFT_SPACING)
    n = field.n if field.n <= 3 else 3
    return field.to_grid(h, n)


def interpolator(field):
    """Callable points -> values, multilinear on grids, linear in r for radial profiles.

    Values are zero outside the open unit ball.
    """
    if isinstance(field, GridField):
        table = RegularGridInterpolator((np.asarray(field.axis),) * field.n, field.values,
                                        method='linear', bounds_error=False, fill_value=0.0)

        def evaluate(points):
            points = np.asarray(points, dtype=float)
            shape = points.shape[:-1]
            flat = points.reshape(-1, field.n)
            values = table(flat)
            inside = np.sum(flat ** 2, axis=1) < (1.0 - BOUNDARY_TOL) ** 2
            return np.where(inside, values, 0.0).reshape(shape)
        return evaluate

    def evaluate_radial(points):
        points = np.asarray(points, dtype=float)
        return field(np.sqrt(np.sum(points ** 2, axis=-1)))
    return evaluate_radial


def node_table(field):
    """Interior nodes of a field as (points, values, distances to the boundary)."""
    if isinstance(field, GridField):
        mask = field.interior_mask
        return field.coordinates[mask], field.values[mask], field.distance[mask]
    mask = field.interior_mask
    points = np.zeros((int(np.count_nonzero(mask)), field.n))
    points[:, 0] = field.radii[mask]
    return points, field.values[mask], field.distance[mask]


def require_converged(profile, check):
    if isinstance(profile, SteadyProfile):
        if not profile.converged:
            raise PreconditionError('{} needs a converged steady profile'.format(check))
        return profile.field
    return profile


def late_minimum(series, fraction=0.2):
    """Minimum over the final `fraction` of a series, at least one entry."""
    count = max(1, int(np.ceil(fraction * len(series))))
    return float(np.min(series[-count:]))
