"""Numerical checks of the qualitative behaviour of steady profiles and runs.

Importing the package registers every check on `Diagnostics`, in the order
they are run by default.
"""
from tempered_plaplacian.diagnostics.common import (
    DiagnosticContext, DiagnosticSettings, Diagnostics
)
from tempered_plaplacian.diagnostics.dichotomy import dichotomy_check
from tempered_plaplacian.diagnostics.hopf import hopf_ratio, hopf_temporal_stability
from tempered_plaplacian.diagnostics.moving_plane import (
    moving_plane_scan, reflect_field, reflect_values
)
from tempered_plaplacian.diagnostics.evolution import (
    antisymmetric_evolution_check, narrow_region_check
)
from tempered_plaplacian.diagnostics.barrier import (
    barrier_boundedness_scan, barrier_constancy_check
)
from tempered_plaplacian.diagnostics.subsolution import (
    SubsolutionSpec, subsolution_comparison_test
)

__all__ = [
    'DiagnosticContext', 'DiagnosticSettings', 'Diagnostics', 'SubsolutionSpec',
    'antisymmetric_evolution_check', 'barrier_boundedness_scan', 'barrier_constancy_check',
    'dichotomy_check', 'hopf_ratio', 'hopf_temporal_stability', 'moving_plane_scan',
    'narrow_region_check', 'reflect_field', 'reflect_values', 'subsolution_comparison_test',
]
