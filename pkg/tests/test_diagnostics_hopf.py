import math

import numpy as np
import pytest

from tempered_plaplacian.config import config_from_preset
from tempered_plaplacian.core_types import (
    Discretization, DiagnosticsReport, GridField, RadialField, SimulationConfig, SteadyProfile
)
from tempered_plaplacian.diagnostics import hopf as hopf_module
from tempered_plaplacian.diagnostics.common import DiagnosticContext, DiagnosticSettings
from tempered_plaplacian.diagnostics.hopf import (
    HOPF_HOLDS, HOPF_UNSTABLE, TRIVIAL, HopfRatio, hopf_ratio, hopf_refinement,
    hopf_temporal_stability, normal_derivative, profile_series, refined_discretization
)
from tempered_plaplacian.exceptions import PreconditionError, ResolutionError

from .helpers import barrier_grid, converged


def test_ratio_recovers_the_power_law_constant():
    field = GridField.from_function(
        2, 1.0 / 16, lambda x: 0.7 * np.clip(1 - np.sqrt(np.sum(x ** 2, axis=-1)), 0, None) ** 0.5)
    result = hopf_ratio(converged(field), 0.5, (0.125, 0.25))
    assert result.c_hat == pytest.approx(0.7, rel=1e-12)


def test_ratio_of_the_barrier():
    result = hopf_ratio(converged(barrier_grid(2, 0.1, 0.5)), 0.5, (0.1, 0.2))
    assert result.c_hat == pytest.approx(math.sqrt(1.8), abs=1e-9)
    assert result.c_hat == pytest.approx(1.341641, abs=1e-6)
    assert result.argmin is not None
    assert result.verdict == HOPF_HOLDS


def test_zero_profile_is_trivial():
    result = hopf_ratio(converged(GridField.zeros(2, 0.125)), 0.5, (0.25, 0.5))
    assert result.trivial
    assert result.c_hat == 0.0
    assert result.verdict == TRIVIAL


def test_normal_derivative_of_the_barrier():
    h = 1.0 / 32
    value = normal_derivative(barrier_grid(2, h, 0.5), [1.0, 0.0], 0.5, h)
    assert value == pytest.approx(-math.sqrt(2.0), rel=1e-3)


def test_unconverged_profile_is_rejected():
    profile = SteadyProfile(barrier_grid(2, 0.125, 0.5), 1.0, 1e-3, False)
    with pytest.raises(PreconditionError):
        hopf_ratio(profile, 0.5, (0.25, 0.5))


def test_empty_band_is_unresolved():
    field = RadialField.uniform(2, 4, lambda r: 1 - r ** 2)
    with pytest.raises(ResolutionError):
        hopf_ratio(converged(field), 0.5, (0.3, 0.4))


def test_refinement_and_temporal_stability():
    coarse = hopf_ratio(converged(barrier_grid(2, 1.0 / 16, 0.5)), 0.5, (0.125, 0.25))
    fine = hopf_ratio(converged(barrier_grid(2, 1.0 / 32, 0.5)), 0.5, (0.125, 0.25))
    assert hopf_refinement(coarse, fine).stable
    field = barrier_grid(2, 1.0 / 16, 0.5)
    snapshots = [(t, field) for t in (1.0, 2.0, 3.0)]
    values, spread, stable = hopf_temporal_stability(snapshots, 0.5, (0.125, 0.25))
    assert len(values) == 3
    assert spread == 0.0 and stable


def test_profile_series():
    plot = profile_series(barrier_grid(2, 0.25, 0.5), 0.5, 1.0)
    assert plot['x'] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert plot['series']['profile'][0] == pytest.approx(1.0)
    assert plot['series']['envelope'][-1] == 0.0


def test_refined_discretization():
    assert refined_discretization(Discretization('grid', h=1.0 / 64), 1.0 / 96).h == 1.0 / 96
    radial = refined_discretization(Discretization('radial', radial_points=64), 1.0 / 96)
    assert radial.radial_points == 96


def hopf_context(params, refine_h):
    simulation = SimulationConfig(params, discretization=Discretization('grid', h=1.0 / 16))
    return DiagnosticContext(converged(barrier_grid(2, 1.0 / 16, 0.5)), simulation,
                             settings=DiagnosticSettings(refine_h=refine_h))


@pytest.mark.parametrize('amplitude, verdict', [(1.0, HOPF_HOLDS), (3.0, HOPF_UNSTABLE)])
def test_hopf_ratio_compares_against_a_rerun(monkeypatch, params, amplitude, verdict):
    spacings = []

    def rerun(config):
        h = config.discretization.h
        spacings.append(h)
        return None, converged(barrier_grid(2, h, 0.5, amplitude))

    monkeypatch.setattr(hopf_module, 'run', rerun)
    report = HopfRatio.process(hopf_context(params, 1.0 / 32), DiagnosticsReport())
    record = report.record('hopf_ratio')
    assert spacings == [1.0 / 32]
    assert record.verdict == verdict
    assert record.passed == (verdict == HOPF_HOLDS)
    assert record.details['refinement']['stable'] == (verdict == HOPF_HOLDS)
    assert record.details['band'][0] == pytest.approx(0.125)


def test_unconverged_rerun_leaves_the_ratio_unmarked(monkeypatch, params):
    field = barrier_grid(2, 1.0 / 32, 0.5)
    monkeypatch.setattr(hopf_module, 'run',
                        lambda config: (None, SteadyProfile(field, 1.0, 1e-2, False)))
    record = HopfRatio.process(hopf_context(params, 1.0 / 32),
                               DiagnosticsReport()).record('hopf_ratio')
    assert record.passed
    assert record.details['refinement'] == {'h': 1.0 / 32, 'c_hat': None, 'stable': None}


def test_no_rerun_without_refine_h(monkeypatch, params):
    monkeypatch.setattr(hopf_module, 'run', lambda config: pytest.fail('unexpected rerun'))
    record = HopfRatio.process(hopf_context(params, None), DiagnosticsReport()).record('hopf_ratio')
    assert 'refinement' not in record.details
    assert record.verdict == HOPF_HOLDS


@pytest.mark.slow
def test_steady_logistic_profile_satisfies_the_hopf_bound(logistic_steady, params):
    _, profile = logistic_steady
    h = profile.field.h
    result = hopf_ratio(profile, params.s, (2 * h, 0.2))
    assert result.c_hat > 0
    assert all(value < 0 for _, value in result.normal_derivatives)
    assert result.verdict == HOPF_HOLDS


@pytest.mark.slow
def test_hopf_constant_is_stable_from_1_16_to_1_24(logistic_steady, params):
    _, profile = logistic_steady
    simulation = config_from_preset('quick').simulation
    band = (2 * (1.0 / 16), 0.2)
    result, other = hopf_module.hopf_rerun(simulation, hopf_ratio(profile, params.s, band),
                                           1.0 / 24, band)
    assert other is not None
    assert result.stable
