from .core_types import (
    GridField, OperatorParams, RadialField, ReactionTerm, ReflectionSpec, SimulationConfig,
    TemperingFunction, classify_node
)
from .kernel import KernelSpec, g_power, kernel_weight, tail_mass
from .operator import (
    QuadratureSpec, ScalarFieldFn, barrier_phi, eval_function, eval_grid, eval_grid_all,
    eval_radial, eval_radial_all
)
from .solver import run, stable_dt, step
from .snapshot import load_snapshot, save_snapshot
from .config import load_preset, parse_config
