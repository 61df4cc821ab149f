from dataclasses import replace

import numpy as np
import pytest

from tempered_plaplacian.core_types import (
    Discretization, GridField, InitialData, OperatorParams, RadialField, ReactionTerm,
    SimulationConfig
)
from tempered_plaplacian.exceptions import ContractViolation, InvalidParameter, NumericalAbort
from tempered_plaplacian.operator import QuadratureSpec, eval_grid, row_mass
from tempered_plaplacian.solver import (
    Trajectory, compare_trajectories, initial_field, run, stable_dt, step
)

from .helpers import barrier_grid


def test_stable_dt_for_zero_field_with_p_above_two():
    params = OperatorParams.build(2, 0.5, 3.0)
    u = GridField.zeros(2, 0.125)
    assert stable_dt(u, params, ReactionTerm('zero'), 0.01) == 0.01


def test_stable_dt_uses_the_row_mass(linear_params):
    u = barrier_grid(2, 0.125, 0.5)
    expected = 0.5 / row_mass(u, linear_params)
    assert stable_dt(u, linear_params, ReactionTerm('zero'), 1.0) == pytest.approx(expected)


def test_stable_dt_scales_with_the_slope_of_g():
    params = OperatorParams.build(2, 0.5, 3.0)
    u = barrier_grid(2, 0.125, 0.5, amplitude=0.5)
    expected = 0.5 / (2.0 * 2.0 * u.max_norm * row_mass(u, params))
    assert stable_dt(u, params, ReactionTerm('zero'), 1.0) == pytest.approx(expected)


def test_stable_dt_shrinks_with_h(linear_params):
    coarse = stable_dt(barrier_grid(2, 0.125, 0.5), linear_params, ReactionTerm('zero'), 1.0)
    fine = stable_dt(barrier_grid(2, 0.0625, 0.5), linear_params, ReactionTerm('zero'), 1.0)
    assert fine < coarse


def test_zero_is_a_fixed_point(params):
    u = GridField.zeros(2, 0.125)
    updated = step(u, 0.0, 0.01, params, ReactionTerm('logistic'))
    assert np.array_equal(updated.values, u.values)


def test_step_matches_single_node_update(params):
    u = barrier_grid(2, 0.125, 0.5, amplitude=0.5)
    reaction = ReactionTerm('logistic')
    dt = stable_dt(u, params, reaction, 0.01)
    updated = step(u, 0.3, dt, params, reaction)
    for point in ([0.0, 0.0], [0.5, -0.25], [-0.75, 0.5]):
        index = u.index_of(point)
        centre = u.values[index]
        expected = centre + dt * (reaction(0.3, centre) - eval_grid(u, index, params))
        assert updated.values[index] == expected


def test_step_preserves_nonnegativity(params):
    u = barrier_grid(2, 0.125, 0.5, amplitude=0.5)
    reaction = ReactionTerm('logistic')
    dt = stable_dt(u, params, reaction, 0.01)
    updated = step(u, 0.0, dt, params, reaction)
    assert updated.values.min() >= -1e-12
    assert np.all(updated.values[~updated.interior_mask] == 0)


def test_step_rejects_non_positive_dt(params):
    with pytest.raises(ContractViolation):
        step(GridField.zeros(2, 0.125), 0.0, 0.0, params, ReactionTerm())


def test_huge_step_aborts(params):
    u = barrier_grid(2, 0.125, 0.5)
    config = SimulationConfig(params, ReactionTerm('logistic'), discretization=Discretization(
        'grid', h=0.125), dt_policy='fixed', dt=1e6, t_end=1e8, snapshot_every=1e8)
    with pytest.raises(NumericalAbort) as error:
        run(config, u0=u)
    assert error.value.step is not None


def test_zero_initial_data_converges_to_zero(params):
    config = SimulationConfig(params, ReactionTerm('logistic'), InitialData('zero'),
                              Discretization('grid', h=0.125), dt_max=0.05, t_end=1.0,
                              steady_window=0.1)
    trajectory, profile = run(config)
    assert profile.converged
    assert profile.residual == 0.0
    assert profile.field.max_norm == 0.0
    assert trajectory.steps < 20


def test_trajectory_snapshots(logistic_config):
    trajectory, profile = run(logistic_config)
    times = trajectory.times
    assert times[0] == 0.0
    assert all(b > a for a, b in zip(times, times[1:]))
    assert times[1] == pytest.approx(0.1)
    assert times[-1] == pytest.approx(profile.t_reached)
    for field in trajectory.fields:
        assert np.all(field.values[~field.interior_mask] == 0)
    assert len(trajectory.residuals) == trajectory.steps
    assert trajectory.late_snapshots(0.2)[-1][1] is trajectory.final
    assert not profile.converged
    assert profile.residual > 0


def test_runs_are_independent_of_thread_count(logistic_config):
    config = replace(logistic_config, t_end=0.1, quadrature=QuadratureSpec(chunk_size=16))
    single, _ = run(config)
    threaded, _ = run(replace(config, threads=3))
    assert single.times == threaded.times
    for a, b in zip(single.fields, threaded.fields):
        assert np.array_equal(a.values, b.values)


def test_comparison_principle(params):
    config = SimulationConfig(params, ReactionTerm('zero'), discretization=Discretization(
        'grid', h=0.125), dt_policy='fixed', dt=0.001, t_end=0.05, snapshot_every=0.025)
    lower, _ = run(config, barrier_grid(2, 0.125, 0.5, amplitude=0.25))
    upper, _ = run(config, barrier_grid(2, 0.125, 0.5, amplitude=0.5))
    result = compare_trajectories(lower, upper)
    assert result.holds
    assert len(result.times) == len(lower)
    assert not compare_trajectories(upper, lower).holds


def test_radial_run(params):
    config = SimulationConfig(params, ReactionTerm('logistic'), InitialData('barrier'),
                              Discretization('radial', radial_points=16), t_end=0.05,
                              snapshot_every=0.025)
    trajectory, profile = run(config)
    assert isinstance(profile.field, RadialField)
    assert profile.field.values[-1] == 0.0
    assert len(trajectory) >= 3


def test_initial_data(params):
    base = SimulationConfig(params, discretization=Discretization('grid', h=0.125))
    bump = initial_field(replace(base, initial=InitialData('asymmetric_bump', amplitude=1.0)))
    assert bump.values[bump.index_of([-0.25, 0.0])] > bump.values[bump.index_of([0.25, 0.0])]
    random = replace(base, initial=InitialData('random', seed=7))
    assert np.array_equal(initial_field(random).values, initial_field(random).values)
    assert initial_field(random).values.min() >= 0
    with pytest.raises(InvalidParameter):
        initial_field(replace(base, initial=InitialData('bump', center=(0.1,))))


def test_radial_mode_rejects_asymmetric_data(params):
    config = SimulationConfig(params, initial=InitialData('asymmetric_bump'),
                              discretization=Discretization('radial', radial_points=16))
    with pytest.raises(InvalidParameter):
        initial_field(config)


def test_trajectory_contract(logistic_config):
    trajectory = Trajectory(logistic_config)
    trajectory.add_snapshot(0.0, GridField.zeros(2, 0.125))
    with pytest.raises(ContractViolation):
        trajectory.add_snapshot(0.0, GridField.zeros(2, 0.125))


@pytest.mark.slow
def test_linear_decay_reaches_zero():
    params = OperatorParams.build(2, 0.5, 2.0)
    config = SimulationConfig(params, ReactionTerm('linear', kappa=1.0),
                              InitialData('barrier', amplitude=0.5),
                              Discretization('grid', h=0.125), dt_max=0.05, t_end=5.0,
                              steady_window=0.1)
    trajectory, profile = run(config)
    assert profile.converged
    assert profile.field.max_norm < 1e-5
    rates = [rate for _, rate in trajectory.residuals]
    assert rates[-1] < rates[0]
