import math

import numpy as np
import pytest
from scipy import integrate

from tempered_plaplacian.core_types import OperatorParams
from tempered_plaplacian.exceptions import KernelDomainError
from tempered_plaplacian.kernel import (
    KernelSpec, exterior_mass, far_cutoff, g_power, g_power_slope, kernel_weight, tail_integral,
    tail_mass
)


def spec(n=2, s=0.5, p=2.0, lam=0.0):
    return KernelSpec(OperatorParams.build(n, s, p, lam))


def test_g_power_values():
    assert g_power(2.0, 3) == pytest.approx(4.0, rel=1e-15)
    assert g_power(-2.0, 3) == pytest.approx(-4.0, rel=1e-15)
    assert g_power(0.0, 2.5) == 0.0
    assert g_power(-3.0, 2) == -3.0
    assert g_power(4.0, 2.5) == pytest.approx(8.0)
    assert np.array_equal(g_power(np.array([-1.0, 0.0, 1.0]), 4), [-1.0, 0.0, 1.0])


@pytest.mark.parametrize('p', [2.0, 2.5, 3.0, 4.0])
def test_g_power_is_odd_and_increasing(p, rng):
    a, b = rng.uniform(-5, 5, (2, 500))
    assert np.array_equal(g_power(-a, p), -g_power(a, p))
    lower, upper = np.minimum(a, b), np.maximum(a, b)
    assert np.all(g_power(lower, p) <= g_power(upper, p))


def test_g_power_slope():
    assert g_power_slope(0.0, 2.0) == 1.0
    assert g_power_slope(0.0, 3.0) == 0.0
    assert g_power_slope(2.0, 3.0) == pytest.approx(4.0)


def test_kernel_weight():
    assert kernel_weight(1.0, spec()) == pytest.approx(1.0)
    assert kernel_weight(2.0, spec(lam=0.1)) == pytest.approx(math.exp(-0.2) / 8, abs=1e-12)
    assert kernel_weight(2.0, spec(lam=0.1)) == pytest.approx(0.1023413, abs=1e-7)


def test_kernel_weight_rejects_zero_distance():
    with pytest.raises(KernelDomainError):
        kernel_weight(0.0, spec())
    with pytest.raises(KernelDomainError):
        kernel_weight(np.array([1.0, -1.0]), spec())


def test_kernel_weight_decreases_in_lambda():
    r = np.linspace(0.1, 3.0, 30)
    weights = [kernel_weight(r, spec(lam=lam)) for lam in (0.0, 0.1, 0.5, 1.0)]
    for lighter, heavier in zip(weights[1:], weights[:-1]):
        assert np.all(lighter <= heavier)


def test_tail_mass_closed_form():
    assert tail_mass(10.0, spec()) == pytest.approx(2 * math.pi * 0.1)
    assert tail_mass(10.0, spec()) == pytest.approx(0.628319, abs=1e-6)
    assert tail_mass(10.0, spec(lam=1.0)) <= math.exp(-10) * 0.628319


def test_tail_mass_bounds_the_kernel_mass(rng):
    for _ in range(20):
        kernel = spec(s=rng.uniform(0.1, 0.9), p=rng.uniform(2, 4), lam=rng.uniform(0, 1))
        R = rng.uniform(0.5, 5.0)
        mass, _ = integrate.quad(kernel.radial_density, R, 100 * R, limit=200)
        assert mass <= tail_mass(R, kernel) * (1 + 1e-9)


def test_tail_integral_untempered_is_exact():
    kernel = spec(p=2.5)
    assert tail_integral(3.0, kernel) == tail_mass(3.0, kernel)


def test_tail_integral_tempered():
    kernel = spec(p=2.5, lam=0.5)
    exact, _ = integrate.quad(kernel.radial_density, 2.0, np.inf, epsabs=1e-13, limit=400)
    value = tail_integral(2.0, kernel)
    assert value <= tail_mass(2.0, kernel)
    assert value == pytest.approx(exact, abs=1e-7)
    assert tail_mass(far_cutoff(kernel, 1e-8), kernel) <= 1e-8


def test_exterior_mass_one_dimension():
    kernel = spec(n=1, s=0.5, p=2.0)
    r = 0.5
    expected = ((1 - r) ** -1.0 + (1 + r) ** -1.0) / 1.0
    assert exterior_mass(r, kernel) == pytest.approx(expected, rel=1e-7)


def test_exterior_mass_grows_toward_the_boundary():
    kernel = spec(p=2.5, lam=0.1)
    assert exterior_mass(0.0, kernel) == tail_integral(1.0, kernel)
    masses = [exterior_mass(r, kernel) for r in (0.0, 0.3, 0.6, 0.9)]
    assert masses == sorted(masses)
    with pytest.raises(KernelDomainError):
        exterior_mass(1.0, kernel)
