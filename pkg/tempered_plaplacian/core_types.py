#!/usr/bin/env python
# coding: utf-8
"""Parameter, field and configuration types shared by every module.

All types are immutable once constructed. Field values are stored in numpy
arrays flagged read-only, so the objects can be handed to worker threads
without copies.
"""
import hashlib
import json
import logging
import math

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Any, ClassVar, Dict, NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import gamma

from .exceptions import ContractViolation, InvalidParameter

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

# |x| within this distance of 1 counts as boundary, hence exterior.
BOUNDARY_TOL = 1e-12
MAX_GRID_DIMENSION = 3


def _read_only(values):
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


def sphere_area(n):
    """Surface area of the unit sphere in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (n / 2.0) / gamma(n / 2.0)


def standard_normalization(n, s, p):
    """Constant of the linear tempered fractional Laplacian of order beta = sp."""
    beta = s * p
    value = gamma(n / 2.0) / (2.0 * math.pi ** (n / 2.0) * abs(gamma(-beta)))
    if not math.isfinite(value) or value <= 0:
        raise InvalidParameter('standard normalization is undefined for sp = {}'.format(beta),
                               key='normalization')
    return float(value)


class TemperingFunction(object):
    """Nondecreasing radial map f entering the tempering factor exp(-lambda f(r))."""

    KINDS = ('zero', 'identity', 'power', 'tabulated')

    def __init__(self, kind='identity', beta=1.0, knots=()):
        if kind not in self.KINDS:
            raise InvalidParameter('unknown tempering kind {!r}'.format(kind), key='tempering')
        self.kind = kind
        self.beta = float(beta)
        self.knots = tuple((float(r), float(v)) for r, v in knots)
        if kind == 'power' and not self.beta > 0:
            raise InvalidParameter('power tempering needs beta > 0', key='beta')
        if kind == 'tabulated':
            self._check_knots()

    def _check_knots(self):
        if len(self.knots) < 2:
            raise InvalidParameter('tabulated tempering needs at least two knots', key='knots')
        radii = np.array([r for r, _ in self.knots])
        levels = np.array([v for _, v in self.knots])
        if radii[0] < 0 or np.any(np.diff(radii) <= 0):
            raise InvalidParameter('tempering knots must have sorted, distinct, nonnegative radii',
                                   key='knots')
        if not np.all(np.isfinite(levels)):
            raise InvalidParameter('tempering knot values must be finite', key='knots')
        if np.any(np.diff(levels) < 0):
            raise InvalidParameter('tempering function must be nondecreasing', key='knots')

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == 'zero':
            return np.zeros_like(r)
        elif self.kind == 'identity':
            return r.copy()
        elif self.kind == 'power':
            return np.power(r, self.beta)
        radii = [k[0] for k in self.knots]
        levels = [k[1] for k in self.knots]
        return np.interp(r, radii, levels)

    def is_nondecreasing(self, mesh=None):
        """Check monotonicity on a sample mesh of distances."""
        if mesh is None:
            mesh = np.linspace(0.0, 10.0, 2001)
        return bool(np.all(np.diff(self(mesh)) >= 0))

    @property
    def label(self):
        if self.kind == 'power':
            return 'power:{!r}'.format(self.beta)
        elif self.kind == 'tabulated':
            return 'tabulated:' + ';'.join('{!r}:{!r}'.format(r, v) for r, v in self.knots)
        return self.kind

    @classmethod
    def from_label(cls, label):
        kind, _, rest = label.strip().partition(':')
        if kind == 'power':
            return cls('power', beta=float(rest))
        elif kind == 'tabulated':
            knots = [pair.split(':') for pair in rest.split(';') if pair]
            return cls('tabulated', knots=[(float(r), float(v)) for r, v in knots])
        return cls(kind)

    def __eq__(self, other):
        return isinstance(other, TemperingFunction) and self.label == other.label

    def __hash__(self):
        return hash(self.label)

    def __repr__(self):
        return 'TemperingFunction({})'.format(self.label)


@dataclass(frozen=True)
class OperatorParams:
    """Full parameterization of the tempered fractional p-Laplacian."""

    n: int
    s: float
    p: float
    lam: float = 0.0
    c_norm: float = 1.0
    tempering: TemperingFunction = field(default_factory=TemperingFunction)
    normalization: str = 'unit'

    NORMALIZATIONS: ClassVar[Tuple[str, ...]] = ('unit', 'standard', 'explicit')

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameter('n must be an integer >= 1', key='n')
        if not 0 < self.s < 1:
            raise InvalidParameter('s must lie in (0,1)', key='s')
        if not self.p >= 2:
            raise InvalidParameter('p must be >= 2', key='p')
        if not self.lam >= 0:
            raise InvalidParameter('lambda must be >= 0', key='lambda')
        if not self.c_norm > 0:
            raise InvalidParameter('c_norm must be > 0', key='c_norm')
        if self.normalization not in self.NORMALIZATIONS:
            raise InvalidParameter('unknown normalization {!r}'.format(self.normalization),
                                   key='normalization')
        if self.lam > 1:
            logger.warning('lambda = {} is not small; results leave the regime of the theory'
                           .format(self.lam))

    @classmethod
    def build(cls, n, s, p, lam=0.0, tempering=None, normalization='unit', c_norm=None):
        """Create parameters, resolving c_norm from the normalization choice."""
        if tempering is None:
            tempering = TemperingFunction('identity')
        if c_norm is not None:
            normalization = 'explicit'
        elif normalization == 'standard':
            c_norm = standard_normalization(n, s, p)
        else:
            c_norm = 1.0
        return cls(n=int(n), s=float(s), p=float(p), lam=float(lam), c_norm=float(c_norm),
                   tempering=tempering, normalization=normalization)

    @property
    def sp(self):
        return self.s * self.p

    @property
    def in_symmetry_regime(self):
        return self.p > 2 and self.n >= 2

    @property
    def reduced_accuracy(self):
        """True when s >= 1 - 1/p, where the punched-hole error decays slowly."""
        return self.s >= 1.0 - 1.0 / self.p

    def regime_flags(self):
        flags = []
        if not self.in_symmetry_regime:
            flags.append('outside p > 2, n >= 2 regime')
        if self.reduced_accuracy:
            flags.append('reduced quadrature accuracy (s >= 1-1/p)')
        if self.lam > 1:
            flags.append('lambda > 1')
        return flags

    def with_c_norm(self, c_norm):
        return replace(self, c_norm=float(c_norm), normalization='explicit')

    def as_dict(self):
        return {
            'n': self.n,
            's': self.s,
            'p': self.p,
            'lambda': self.lam,
            'c_norm': self.c_norm,
            'normalization': self.normalization,
            'f': self.tempering.label,
        }

    def param_hash(self):
        encoded = json.dumps(self.as_dict(), sort_keys=True).encode('utf-8')
        return hashlib.sha1(encoded).hexdigest()[:12]


class NodeTag(Enum):
    INTERIOR = 'interior'
    EXTERIOR = 'exterior'


class NodeClass(NamedTuple):
    tag: NodeTag
    d: float


def classify_node(x):
    """Tag a point as interior or exterior of the unit ball with its boundary distance."""
    radius = float(np.linalg.norm(np.atleast_1d(np.asarray(x, dtype=float))))
    if radius < 1.0 - BOUNDARY_TOL:
        return NodeClass(NodeTag.INTERIOR, 1.0 - radius)
    elif radius <= 1.0 + BOUNDARY_TOL:
        return NodeClass(NodeTag.EXTERIOR, 0.0)
    return NodeClass(NodeTag.EXTERIOR, radius - 1.0)


@dataclass(frozen=True)
class ReflectionSpec:
    """Hyperplane {x_axis = alpha}; axis is 1-based."""

    alpha: float
    axis: int = 1

    def __post_init__(self):
        if not abs(self.alpha) < 1:
            raise InvalidParameter('|alpha| must be < 1', key='alpha')
        if self.axis < 1:
            raise InvalidParameter('axis is a 1-based coordinate index', key='axis')

    def reflect(self, points):
        points = np.array(points, dtype=float)
        points[..., self.axis - 1] = 2.0 * self.alpha - points[..., self.axis - 1]
        return points

    def in_sigma(self, points):
        """Mask of points strictly on the x_axis < alpha side."""
        return np.asarray(points)[..., self.axis - 1] < self.alpha


@dataclass(frozen=True, eq=False)
class GridField:
    """Scalar field on the symmetric Cartesian grid covering [-1,1]^n plus a ghost layer.

    The grid has nodes i*h for |i| <= N + 1 with N = ceil(1/h) in every
    coordinate, so the origin is a node and the grid is symmetric.
    """

    n: int
    h: float
    values: np.ndarray

    def __post_init__(self):
        if not 1 <= self.n <= MAX_GRID_DIMENSION:
            raise InvalidParameter('grid mode supports n = 1, 2, 3', key='n')
        if not 0 < self.h <= 0.5:
            raise InvalidParameter('h must lie in (0, 0.5]', key='h')
        values = _read_only(self.values)
        if values.shape != (self.size,) * self.n:
            raise ContractViolation('values have shape {}, expected {}'
                                    .format(values.shape, (self.size,) * self.n))
        if not np.all(np.isfinite(values)):
            raise ContractViolation('grid field holds non-finite values')
        if np.any(values[~self.interior_mask] != 0):
            raise ContractViolation('grid field is not zero on exterior nodes')
        object.__setattr__(self, 'values', values)

    @staticmethod
    def half_width(h):
        return int(math.ceil(1.0 / h - 1e-9))

    @property
    def N(self):
        return self.half_width(self.h)

    @property
    def size(self):
        return 2 * self.half_width(self.h) + 3

    @property
    def offset(self):
        """Array index of the origin along each axis."""
        return self.N + 1

    @cached_property
    def axis(self):
        return _read_only((np.arange(self.size) - self.offset) * self.h)

    @cached_property
    def coordinates(self):
        return _read_only(self.make_coordinates(self.n, self.h))

    @staticmethod
    def make_coordinates(n, h):
        size = 2 * GridField.half_width(h) + 3
        axis = (np.arange(size) - (GridField.half_width(h) + 1)) * h
        return np.stack(np.meshgrid(*([axis] * n), indexing='ij'), axis=-1)

    @cached_property
    def radius(self):
        return _read_only(np.sqrt(np.sum(self.coordinates ** 2, axis=-1)))

    @cached_property
    def interior_mask(self):
        mask = self.make_coordinates(self.n, self.h)
        mask = np.sqrt(np.sum(mask ** 2, axis=-1)) < 1.0 - BOUNDARY_TOL
        mask.setflags(write=False)
        return mask

    @cached_property
    def distance(self):
        """Distance to the unit sphere at every node."""
        return _read_only(np.abs(1.0 - self.radius))

    @classmethod
    def zeros(cls, n, h):
        size = 2 * cls.half_width(h) + 3
        return cls(n, h, np.zeros((size,) * n))

    @classmethod
    def from_function(cls, n, h, rule):
        """Sample rule(points) on the grid, forcing exterior nodes to zero."""
        points = cls.make_coordinates(n, h)
        values = np.asarray(rule(points), dtype=float)
        radius = np.sqrt(np.sum(points ** 2, axis=-1))
        values = np.where(radius < 1.0 - BOUNDARY_TOL, values, 0.0)
        return cls(n, h, values)

    def with_values(self, values):
        values = np.where(self.interior_mask, np.asarray(values, dtype=float), 0.0)
        return GridField(self.n, self.h, values)

    def interior_indices(self):
        """Index arrays of the interior nodes in lexicographic order."""
        return np.nonzero(self.interior_mask)

    def index_of(self, point):
        index = tuple(int(round(c / self.h)) + self.offset for c in np.atleast_1d(point))
        if len(index) != self.n or any(not 0 <= i < self.size for i in index):
            raise ContractViolation('point {} is not a grid node'.format(point))
        return index

    def node(self, index):
        return self.coordinates[tuple(index)]

    @property
    def max_norm(self):
        return float(np.max(np.abs(self.values)))

    def __repr__(self):
        return 'GridField(n={}, h={!r}, nodes={})'.format(self.n, self.h, self.values.size)


@dataclass(frozen=True, eq=False)
class RadialField:
    """Radial profile U on 0 = r_0 < ... < r_M = 1 representing u(x) = U(|x|)."""

    n: int
    radii: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidParameter('n must be an integer >= 1', key='n')
        radii = _read_only(self.radii)
        values = _read_only(self.values)
        if radii.ndim != 1 or radii.size < 2 or radii[0] != 0.0 or radii[-1] != 1.0:
            raise ContractViolation('radii must run from 0 to 1')
        if np.any(np.diff(radii) <= 0):
            raise ContractViolation('radii must be strictly increasing')
        if values.shape != radii.shape:
            raise ContractViolation('one value per radius is required')
        if not np.all(np.isfinite(values)):
            raise ContractViolation('radial field holds non-finite values')
        if values[-1] != 0:
            raise ContractViolation('radial field must vanish at r = 1')
        object.__setattr__(self, 'radii', radii)
        object.__setattr__(self, 'values', values)

    @classmethod
    def uniform(cls, n, points, profile=None):
        """Field on points + 1 equally spaced radii, sampled from profile(r)."""
        radii = np.linspace(0.0, 1.0, int(points) + 1)
        values = np.zeros_like(radii) if profile is None else np.asarray(profile(radii), float)
        values = np.array(values, dtype=float)
        values[-1] = 0.0
        return cls(n, radii, values)

    @property
    def interior_mask(self):
        return self.radii < 1.0 - BOUNDARY_TOL

    @property
    def distance(self):
        return 1.0 - self.radii

    @property
    def max_norm(self):
        return float(np.max(np.abs(self.values)))

    def with_values(self, values):
        values = np.where(self.interior_mask, np.asarray(values, dtype=float), 0.0)
        return RadialField(self.n, self.radii, values)

    def __call__(self, r):
        """Piecewise-linear profile, zero for r >= 1."""
        return np.interp(np.asarray(r, dtype=float), self.radii, self.values, right=0.0)

    def to_grid(self, h, n=None):
        n = self.n if n is None else n
        return GridField.from_function(n, h, lambda x: self(np.sqrt(np.sum(x ** 2, axis=-1))))

    def __repr__(self):
        return 'RadialField(n={}, points={})'.format(self.n, self.radii.size)


@dataclass(frozen=True)
class ReactionTerm:
    """Nonlinearity g(t, u) with g(t, 0) = 0.

    Kinds: zero, linear (g = -kappa u), logistic (g = u (1 - u)) and
    polynomial (g = c1 u + c2 u^2 + ...).
    """

    kind: str = 'zero'
    kappa: float = 0.0
    coefficients: Tuple[float, ...] = ()

    KINDS: ClassVar[Tuple[str, ...]] = ('zero', 'linear', 'logistic', 'polynomial')

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InvalidParameter('unknown reaction kind {!r}'.format(self.kind), key='kind')
        object.__setattr__(self, 'coefficients', tuple(float(c) for c in self.coefficients))
        if self.kind == 'polynomial' and not self.coefficients:
            raise InvalidParameter('polynomial reaction needs coefficients', key='coefficients')

    def __call__(self, t, u):
        u = np.asarray(u, dtype=float)
        if self.kind == 'zero':
            return np.zeros_like(u)
        elif self.kind == 'linear':
            return -self.kappa * u
        elif self.kind == 'logistic':
            return u * (1.0 - u)
        accumulated = np.full_like(u, self.coefficients[-1])
        for coefficient in reversed(self.coefficients[:-1]):
            accumulated = coefficient + u * accumulated
        return u * accumulated

    def lipschitz_bound(self, bound):
        """Lipschitz constant of g(t, .) on [-bound, bound]."""
        bound = abs(float(bound))
        if self.kind == 'zero':
            return 0.0
        elif self.kind == 'linear':
            return abs(self.kappa)
        elif self.kind == 'logistic':
            return 1.0 + 2.0 * bound
        return math.fsum(k * abs(c) * bound ** (k - 1)
                         for k, c in enumerate(self.coefficients, start=1))

    def derivative_at_zero(self):
        """g_u(t, 0)."""
        if self.kind == 'zero':
            return 0.0
        elif self.kind == 'linear':
            return -self.kappa
        elif self.kind == 'logistic':
            return 1.0
        return self.coefficients[0]

    def assumption_flags(self):
        """Standing assumptions on g; only the first two are enforced by the solver."""
        return {
            'g(t,0)=0': True,
            'lipschitz': True,
            'g_u(t,0)<=0': self.derivative_at_zero() <= 0,
            'g_u continuous near 0': True,
        }

    @property
    def label(self):
        if self.kind == 'linear':
            return 'linear:{!r}'.format(self.kappa)
        elif self.kind == 'polynomial':
            return 'polynomial:' + ','.join(repr(c) for c in self.coefficients)
        return self.kind


@dataclass(frozen=True)
class InitialData:
    """Initial profile menu: zero, barrier, bump, asymmetric_bump, random."""

    kind: str = 'barrier'
    amplitude: float = 0.5
    center: Tuple[float, ...] = ()
    radius: float = 0.5
    seed: int = 0

    KINDS: ClassVar[Tuple[str, ...]] = ('zero', 'barrier', 'bump', 'asymmetric_bump', 'random')

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise InvalidParameter('unknown initial data {!r}'.format(self.kind), key='initial')
        if self.amplitude < 0:
            raise InvalidParameter('initial amplitude must be >= 0', key='amplitude')
        if not 0 < self.radius <= 1:
            raise InvalidParameter('bump radius must lie in (0, 1]', key='radius')
        object.__setattr__(self, 'center', tuple(float(c) for c in self.center))


@dataclass(frozen=True)
class Discretization:
    """Grid mode (Cartesian, spacing h) or radial mode (radial_points cells)."""

    mode: str = 'grid'
    h: float = 1.0 / 16
    radial_points: int = 128

    def __post_init__(self):
        if self.mode not in ('grid', 'radial'):
            raise InvalidParameter('discretization mode must be grid or radial', key='mode')
        if not 0 < self.h <= 0.5:
            raise InvalidParameter('h must lie in (0, 0.5]', key='h')
        if self.radial_points < 4:
            raise InvalidParameter('radial mode needs at least 4 cells', key='radial_points')


@dataclass(frozen=True)
class SimulationConfig:
    params: OperatorParams
    reaction: ReactionTerm = field(default_factory=ReactionTerm)
    initial: InitialData = field(default_factory=InitialData)
    discretization: Discretization = field(default_factory=Discretization)
    dt_policy: str = 'auto'
    dt: Optional[float] = None
    dt_max: float = 1e-2
    t_end: float = 1.0
    tol_steady: float = 1e-6
    steady_window: float = 0.5
    snapshot_every: float = 0.1
    quadrature: Optional[Any] = None
    threads: int = 1

    def __post_init__(self):
        if not self.t_end > 0:
            raise InvalidParameter('t_end must be > 0', key='t_end')
        if not self.tol_steady > 0:
            raise InvalidParameter('tol_steady must be > 0', key='tol_steady')
        if self.dt_policy not in ('auto', 'fixed'):
            raise InvalidParameter('dt_policy must be auto or fixed', key='dt_policy')
        if self.dt_policy == 'fixed' and not (self.dt and self.dt > 0):
            raise InvalidParameter('fixed dt policy needs dt > 0', key='dt')
        if not self.dt_max > 0:
            raise InvalidParameter('dt_max must be > 0', key='dt_max')
        if self.steady_window < 0 or not self.snapshot_every > 0:
            raise InvalidParameter('steady_window >= 0 and snapshot_every > 0 are required',
                                   key='snapshot_every')
        if self.threads < 1:
            raise InvalidParameter('threads must be >= 1', key='threads')


@dataclass(frozen=True)
class SteadyProfile:
    """Approximate omega-limit element of a run."""

    field: Any
    t_reached: float
    residual: float
    converged: bool
    tol_steady: float = math.inf

    def __post_init__(self):
        if not self.residual >= 0:
            raise ContractViolation('residual must be >= 0')
        if self.converged and self.residual > self.tol_steady:
            raise ContractViolation('a converged profile must have residual <= tol_steady')

    label = 'approximate omega-limit element'


@dataclass(frozen=True)
class CheckRecord:
    name: str
    value: Any
    threshold: Any
    verdict: str
    passed: bool
    informational: bool = False
    details: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class DiagnosticsReport:
    records: Tuple[CheckRecord, ...] = ()
    metadata: Dict[str, Any] = field(default_factory=dict)

    def extended(self, record):
        logger.info('{}: {} (value={}, threshold={})'.format(
            record.name, record.verdict, record.value, record.threshold))
        return replace(self, records=self.records + (record,))

    def record(self, name):
        for record in self.records:
            if record.name == name:
                return record
        raise KeyError(name)

    @property
    def passed(self):
        return all(r.passed or r.informational for r in self.records)

    @property
    def failures(self):
        return [r.name for r in self.records if not (r.passed or r.informational)]
