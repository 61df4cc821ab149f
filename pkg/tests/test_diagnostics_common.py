import numpy as np
import pytest

from tempered_plaplacian.core_types import (
    Discretization, DiagnosticsReport, GridField, RadialField, SimulationConfig, SteadyProfile
)
from tempered_plaplacian.diagnostics import DiagnosticContext, DiagnosticSettings, Diagnostics
from tempered_plaplacian.diagnostics.common import as_grid, interpolator, late_minimum, spacing
from tempered_plaplacian.exceptions import InvalidParameter

from .helpers import barrier_grid, converged


def test_registration_order():
    assert Diagnostics.names() == [
        'dichotomy', 'hopf_ratio', 'hopf_stability', 'moving_plane', 'antisymmetric_evolution',
        'narrow_region', 'barrier_boundedness', 'subsolution_comparison',
    ]
    assert Diagnostics.get('hopf_ratio').title == 'Hopf Ratio'
    with pytest.raises(InvalidParameter):
        Diagnostics.get('hopf')


def test_settings_validation():
    with pytest.raises(InvalidParameter):
        DiagnosticSettings(band_lo=0.3, band_hi=0.2)
    with pytest.raises(InvalidParameter):
        DiagnosticSettings(alphas=(0.5,))
    assert DiagnosticSettings(alphas=[-0.5, 0]).alphas == (-0.5, 0.0)


def test_run_selected_checks(params):
    simulation = SimulationConfig(params, discretization=Discretization('grid', h=1.0 / 16))
    context = DiagnosticContext(converged(barrier_grid(2, 1.0 / 16, 0.5)), simulation)
    report = Diagnostics.run(context, DiagnosticsReport(),
                             ['dichotomy', 'hopf_ratio', 'moving_plane'])
    assert [record.name for record in report.records] == [
        'dichotomy', 'hopf_ratio', 'moving_plane']
    assert report.passed
    assert context.tolerance == pytest.approx(10.0 / 16)


def test_unconverged_profiles_are_skipped(params):
    simulation = SimulationConfig(params, discretization=Discretization('grid', h=1.0 / 8))
    profile = SteadyProfile(barrier_grid(2, 0.125, 0.5), 1.0, 1e-2, False)
    report = Diagnostics.run(DiagnosticContext(profile, simulation), DiagnosticsReport(),
                             ['dichotomy'])
    record = report.record('dichotomy')
    assert record.verdict == 'skipped'
    assert record.informational
    assert 'converged' in record.details['reason']


def test_interpolation_and_lifting():
    radial = RadialField.uniform(2, 16, lambda r: 1 - r ** 2)
    assert spacing(radial) == pytest.approx(1.0 / 16)
    grid = as_grid(radial)
    assert isinstance(grid, GridField)
    assert grid.h == pytest.approx(1.0 / 16)
    values = interpolator(radial)(np.array([[0.5, 0.0], [0.0, 0.5], [1.5, 0.0]]))
    assert values[0] == pytest.approx(values[1])
    assert values[2] == 0.0
    field = barrier_grid(2, 0.25, 0.5)
    on_node = interpolator(field)(np.array([[0.5, 0.25]]))
    assert on_node[0] == pytest.approx(field.values[field.index_of([0.5, 0.25])])


def test_late_minimum():
    assert late_minimum([5.0, -1.0, 3.0, 2.0, 4.0]) == 4.0
    assert late_minimum([5.0, -1.0, 3.0, 2.0, 4.0], 0.5) == 2.0
