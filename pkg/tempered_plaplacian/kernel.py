#!/usr/bin/env python
# coding: utf-8
"""Pointwise kernel, the nonlinearity G and far-field kernel masses.

The kernel is K(r) = c_norm exp(-lambda f(r)) r^-(n+sp). Fields handled by
the package vanish outside the unit ball, so every integral beyond a cutoff
reduces to G(u(x)) times a pure kernel mass; the helpers below compute those
masses and the closed-form upper bound that caps them.
"""
import logging
import math

from functools import lru_cache

import numpy as np
from scipy import integrate

from .core_types import OperatorParams, sphere_area
from .exceptions import KernelDomainError

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

MAX_CUTOFF = 1e8


def g_power(t, p):
    """G(t) = |t|^(p-2) t, with G(0) = 0 for every p >= 2."""
    t = np.asarray(t, dtype=float)
    if p == 2:
        result = t.copy()
    else:
        magnitude = np.abs(t)
        nonzero = magnitude > 0
        scale = np.zeros_like(t)
        scale[nonzero] = np.exp((p - 2.0) * np.log(magnitude[nonzero]))
        result = scale * t
    return float(result) if result.ndim == 0 else result


def g_power_slope(t, p):
    """G'(t) = (p-1)|t|^(p-2); at t = 0 this is 1 for p = 2 and 0 otherwise."""
    if p == 2:
        return np.ones_like(np.asarray(t, dtype=float))
    return (p - 1.0) * np.power(np.abs(np.asarray(t, dtype=float)), p - 2.0)


class KernelSpec(object):
    """Radial tempered kernel attached to a set of operator parameters."""

    def __init__(self, params):
        if not isinstance(params, OperatorParams):
            raise TypeError('KernelSpec expects OperatorParams')
        self.params = params

    @property
    def n(self):
        return self.params.n

    @property
    def exponent(self):
        return self.params.n + self.params.sp

    @property
    def untempered(self):
        """True when exp(-lambda f) is identically 1."""
        return self.params.lam == 0 or self.params.tempering.kind == 'zero'

    def radial_density(self, r):
        """sigma_{n-1} K(r) r^(n-1), the kernel mass per unit radius."""
        r = np.asarray(r, dtype=float)
        params = self.params
        damping = np.exp(-params.lam * params.tempering(r))
        return sphere_area(self.n) * params.c_norm * damping * np.power(r, -1.0 - params.sp)

    def __eq__(self, other):
        return isinstance(other, KernelSpec) and self.params == other.params

    def __hash__(self):
        return hash(self.params)

    def __repr__(self):
        return 'KernelSpec({})'.format(self.params)


def kernel_weight(r, spec):
    """K(r) for r > 0."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise KernelDomainError('kernel evaluated at non-positive distance')
    params = spec.params
    damping = np.exp(-params.lam * params.tempering(r))
    weight = params.c_norm * damping / np.power(r, spec.exponent)
    return float(weight) if weight.ndim == 0 else weight


def tail_mass(R, spec):
    """Upper bound of the kernel mass over {|z| > R}; exact when lambda f vanishes."""
    if not R > 0:
        raise KernelDomainError('tail cutoff must be positive')
    params = spec.params
    damping = math.exp(-params.lam * float(params.tempering(R)))
    return sphere_area(params.n) * params.c_norm * damping * R ** (-params.sp) / params.sp


def far_cutoff(spec, eps_tail):
    """Smallest doubling of 2 beyond which the bound on the kernel mass is <= eps_tail."""
    R = 2.0
    while tail_mass(R, spec) > eps_tail and R < MAX_CUTOFF:
        R *= 2.0
    return R


@lru_cache(maxsize=256)
def tail_integral(R, spec, eps_tail=1e-8, R_far=None):
    """Kernel mass over {|z| > R}.

    Closed form when the kernel is untempered. Otherwise the shell between R
    and the far cutoff is integrated numerically and the closed-form bound
    covers the rest, so the result exceeds the true mass by at most eps_tail.
    """
    bound = tail_mass(R, spec)
    if spec.untempered:
        return bound
    if R_far is None:
        R_far = far_cutoff(spec, eps_tail)
    R_far = max(R_far, R)
    shell = 0.0
    if R_far > R:
        edges = np.geomspace(R, R_far, int(math.ceil(math.log2(R_far / R))) + 1)
        shell = math.fsum(
            integrate.quad(spec.radial_density, a, b, epsrel=1e-12, epsabs=0.0, limit=200)[0]
            for a, b in zip(edges[:-1], edges[1:])
        )
    remainder = tail_mass(R_far, spec)
    logger.debug('Tail mass beyond {}: shell {} + remainder {}'.format(R, shell, remainder))
    return min(shell + remainder, bound)


def _outside_measure(n, r, t):
    """Measure of directions w on the unit sphere with |x + t w| > 1, |x| = r."""
    if r == 0:
        return sphere_area(n) if t > 1 else 0.0
    c = (1.0 - r * r - t * t) / (2.0 * r * t)
    c = min(1.0, max(-1.0, c))
    if n == 1:
        return float(abs(r + t) > 1) + float(abs(r - t) > 1)
    elif n == 2:
        return 2.0 * math.acos(c)
    elif n == 3:
        return 2.0 * math.pi * (1.0 - c)
    raise KernelDomainError('exterior mass is implemented for n <= 3')


@lru_cache(maxsize=4096)
def exterior_mass(r, spec, eps_tail=1e-8):
    """Kernel mass seen from a point at radius r < 1 over the exterior {|y| > 1}."""
    if not 0 <= r < 1:
        raise KernelDomainError('exterior mass needs 0 <= r < 1')
    if r == 0:
        return tail_integral(1.0, spec, eps_tail)
    params = spec.params

    def integrand(t):
        damping = math.exp(-params.lam * float(params.tempering(t)))
        return params.c_norm * damping * t ** (-1.0 - params.sp) * _outside_measure(params.n, r, t)

    crescent, _ = integrate.quad(integrand, 1.0 - r, 1.0 + r, epsrel=eps_tail,
                                 epsabs=0.0, limit=200)
    return crescent + tail_integral(1.0 + r, spec, eps_tail)
