import pytest

from tempered_plaplacian.core_types import OperatorParams, TemperingFunction
from tempered_plaplacian.diagnostics.barrier import (
    ConstancyResult, barrier_boundedness_scan, barrier_constancy_check, default_radii,
    relative_spread
)
from tempered_plaplacian.exceptions import InvalidParameter
from tempered_plaplacian.operator import QuadratureSpec

SHALLOW = QuadratureSpec(max_depth=1, min_depth=1, rtol=1e-3)


def test_default_radii():
    assert default_radii(1.0 / 64)[-1] == pytest.approx(1 - 4.0 / 64)


def test_relative_spread():
    assert relative_spread([1.0, 1.0, 1.0]) == 0.0
    assert relative_spread([0.9, 1.1]) == pytest.approx(0.2)
    assert relative_spread([0.0, 0.0]) == 0.0


def test_constancy_needs_a_contracting_spread():
    assert ConstancyResult((0.0, 0.5), (), (4e-4, 1e-4)).passed
    assert ConstancyResult((0.0, 0.5), (), (4e-4, 5e-7)).contracting
    stagnant = ConstancyResult((0.0, 0.5), (), (1e-5, 1.6e-5, 7e-4))
    assert not stagnant.contracting
    assert not stagnant.passed
    assert ConstancyResult((0.0, 0.5), (), (1e-5, 1.6e-5, 7e-5), floor=1e-4).passed
    assert not ConstancyResult((0.0,), (), (0.01,)).passed


@pytest.mark.slow
@pytest.mark.parametrize('s', [0.3, 0.5, 0.7])
def test_barrier_is_constant_for_the_linear_operator(s):
    params = OperatorParams.build(2, s, 2.0, 0.0, TemperingFunction('identity'))
    result = barrier_constancy_check(params, (0.0, 0.3, 0.6, 0.9))
    assert len(result.spreads) == 5
    assert result.spread < 0.02
    assert result.contracting, result.spreads
    assert result.passed


def test_perturbed_normalization_breaks_constancy(linear_params):
    result = barrier_constancy_check(linear_params, (0.0, 0.3, 0.6, 0.9), SHALLOW,
                                     perturb=linear_params.with_c_norm(1.25))
    assert not result.passed
    assert result.spread > 0.1


@pytest.mark.slow
@pytest.mark.parametrize('p, s, lam, tempering', [
    (3.0, 0.5, 0.1, TemperingFunction('identity')),
    (2.5, 0.4, 0.05, TemperingFunction('power', beta=0.5)),
    (4.0, 0.3, 0.0, TemperingFunction('zero')),
])
def test_barrier_is_bounded(p, s, lam, tempering):
    params = OperatorParams.build(2, s, p, lam, tempering)
    scan = barrier_boundedness_scan(params, (0.0, 0.5, 0.9))
    assert [row.radius for row in scan.rows] == [0.0, 0.5, 0.9]
    assert scan.passed
    assert scan.bound == max(abs(row.value) for row in scan.rows)


def test_reduced_accuracy_is_flagged():
    params = OperatorParams.build(2, 0.9, 2.2)
    scan = barrier_boundedness_scan(params, (0.0,), SHALLOW)
    assert any(flag.startswith('reduced quadrature accuracy') for flag in scan.flags)
    assert scan.growth == 0.0
    assert scan.rows[0].depth == 1


def test_radii_outside_the_ball_are_rejected(params):
    with pytest.raises(InvalidParameter):
        barrier_boundedness_scan(params, (0.5, 1.0), SHALLOW)
