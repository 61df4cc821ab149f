from tempered_plaplacian.core_types import GridField, SteadyProfile
from tempered_plaplacian.operator import barrier_phi


def barrier_grid(n, h, s, amplitude=1.0):
    return GridField.from_function(n, h, lambda x: amplitude * barrier_phi(x, s))


def converged(field, t=1.0):
    return SteadyProfile(field, t, 0.0, True, 1e-6)
