#!/usr/bin/env python
# coding: utf-8
"""Batch front-end: eval, simulate, diagnose, oracle and report modes."""
import argparse
import json
import logging
import math
import os
import sys

from pathlib import Path

import numpy as np
from scipy import integrate

from .config import MODES, config_from_preset, load_config, preset_names
from .core_types import (
    CheckRecord, DiagnosticsReport, GridField, OperatorParams, RadialField, SteadyProfile,
    TemperingFunction
)
from .diagnostics import DiagnosticContext, Diagnostics, barrier_constancy_check
from .exceptions import (
    ConfigError, ContractViolation, InvalidParameter, KernelDomainError, NumericalAbort,
    QuadratureError, SnapshotParseError
)
from .kernel import KernelSpec, g_power, kernel_weight, tail_mass
from .operator import apply_operator, barrier_phi, eval_grid_all, grid_operator
from .report import read_json, render_plots, report_to_dict, summary_lines, write_csv, write_json
from .snapshot import read_snapshot, save_residuals, save_snapshot
from .solver import initial_field, run

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

OUT_ENV = 'TFPL_OUT'
DEFAULT_OUT = 'tfpl_out'
ORACLE_RADII = (0.0, 0.3, 0.6, 0.9)
ORACLE_ORDERS = (0.3, 0.5, 0.7)
TAIL_DRAWS = 50


class Runner(object):
    """Runs one configured mode and maps its outcome to an exit code."""

    EXIT_SUCCESS = 0
    EXIT_CHECK_FAILURE = 1
    EXIT_USAGE_ERROR = 2
    EXIT_NUMERICAL_ABORT = 3

    def __init__(self, config, out_dir, json_output=False, force_failure=False, stream=None):
        self.config = config
        self.out_dir = Path(out_dir)
        self.json_output = json_output
        self.force_failure = force_failure
        self.stream = stream or sys.stdout

    def execute(self):
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            if not os.access(str(self.out_dir), os.W_OK):
                raise ConfigError('output directory {} is not writable'.format(self.out_dir))
        except OSError as error:
            logger.error('Cannot create output directory: {}'.format(error))
            return self.EXIT_USAGE_ERROR
        except ConfigError as error:
            logger.error(str(error))
            return self.EXIT_USAGE_ERROR
        command = getattr(self, 'cmd_' + self.config.mode)
        try:
            return command()
        except (ConfigError, InvalidParameter, SnapshotParseError, ContractViolation) as error:
            logger.error('{} failed: {}'.format(self.config.mode, error))
            return self.EXIT_USAGE_ERROR
        except (NumericalAbort, QuadratureError, KernelDomainError) as error:
            logger.error('Numerical abort in {}: {}'.format(self.config.mode, error))
            return self.EXIT_NUMERICAL_ABORT

    def echo(self, line):
        self.stream.write(line + '\n')

    def _metadata(self):
        simulation = self.config.simulation
        params = simulation.params
        discretization = simulation.discretization
        return {
            'params': params.as_dict(),
            'param_hash': params.param_hash(),
            'regime_flags': params.regime_flags(),
            'reaction': simulation.reaction.label,
            'reaction_assumptions': simulation.reaction.assumption_flags(),
            'discretization': {'mode': discretization.mode, 'h': discretization.h,
                               'radial_points': discretization.radial_points},
            'seed': self.config.seed,
            'threads': self.config.threads,
            'preset': self.config.preset,
        }

    def _timings(self, field):
        if not isinstance(field, GridField):
            return {}
        operator = grid_operator(self.config.params, field.n, field.h,
                                 self.config.simulation.quadrature)
        return {
            'operator_calls': operator.calls,
            'kernel_evals': int(operator.kernel_evals),
            'seconds': float(operator.seconds),
        }

    def cmd_eval(self):
        """Operator values of the initial field or of the barrier."""
        simulation = self.config.simulation
        params = simulation.params
        if self.config.target == 'barrier':
            discretization = simulation.discretization
            if discretization.mode == 'grid':
                field = GridField.from_function(params.n, discretization.h,
                                                lambda x: barrier_phi(x, params.s))
            else:
                field = RadialField.uniform(params.n, discretization.radial_points,
                                            lambda r: np.power(np.clip(1 - r * r, 0, None),
                                                               params.s))
        else:
            field = initial_field(simulation)
        values = apply_operator(field, params, simulation.quadrature, self.config.threads)
        save_snapshot(field, 0.0, self.out_dir / 'field.csv', params)
        save_snapshot(values, 0.0, self.out_dir / 'operator.csv', params)
        interior = values.values[field.interior_mask]
        self.echo('Operator of {} field: min {:.6g}, max {:.6g}'.format(
            self.config.target, float(np.min(interior)), float(np.max(interior))))
        return self.EXIT_SUCCESS

    def _simulate(self):
        simulation = self.config.simulation
        if simulation.discretization.mode == 'grid':
            grid_operator(simulation.params, simulation.params.n, simulation.discretization.h,
                          simulation.quadrature).reset_timings()
        trajectory, profile = run(simulation)
        snapshot_dir = self.out_dir / 'snapshots'
        snapshot_dir.mkdir(exist_ok=True)
        params = self.config.params
        for number, (t, field) in enumerate(trajectory.snapshots):
            save_snapshot(field, t, snapshot_dir / 'snapshot_{:04d}.csv'.format(number), params)
        save_residuals(trajectory, self.out_dir / 'residuals.csv')
        save_snapshot(profile.field, profile.t_reached, self.out_dir / 'steady.csv', params)
        return trajectory, profile

    def cmd_simulate(self):
        trajectory, profile = self._simulate()
        self.echo('{} after {} steps at t={:.6g}: residual {:.3g} ({})'.format(
            'Converged' if profile.converged else 'Stopped', trajectory.steps, profile.t_reached,
            profile.residual, SteadyProfile.label))
        return self.EXIT_SUCCESS

    def cmd_diagnose(self):
        metadata = self._metadata()
        if self.config.snapshot:
            snapshot = read_snapshot(self.config.snapshot, self.config.params.n)
            profile = SteadyProfile(snapshot.field, snapshot.t, 0.0, True,
                                    self.config.simulation.tol_steady)
            trajectory = None
            metadata['snapshot'] = str(self.config.snapshot)
        else:
            trajectory, profile = self._simulate()
            metadata.update({'steps': trajectory.steps, 't_reached': profile.t_reached,
                             'converged': profile.converged, 'residual': profile.residual,
                             'profile_label': SteadyProfile.label})
        context = DiagnosticContext(profile, self.config.simulation, trajectory,
                                    self.config.diagnostics, self.config.quadrature)
        report = DiagnosticsReport((), metadata)
        if trajectory is not None:
            if not profile.converged:
                logger.warning('Run did not reach a steady state; checks needing one are skipped')
            report = report.extended(CheckRecord(
                'steady_state', profile.residual, profile.tol_steady,
                'converged' if profile.converged else 'not converged', profile.converged,
                details={'t_reached': profile.t_reached, 'label': SteadyProfile.label}))
        report = Diagnostics.run(context, report, self.config.diagnostics.checks)
        report = DiagnosticsReport(report.records,
                                   dict(report.metadata, timings=self._timings(profile.field)))
        return self._emit(report, 'diagnostics')

    def _emit(self, report, stem):
        param_hash = report.metadata.get('param_hash', '')
        write_csv(report, self.out_dir / (stem + '.csv'), param_hash)
        write_json(report, self.out_dir / (stem + '.json'))
        render_plots(report, self.out_dir)
        if self.json_output:
            self.echo(json.dumps(report_to_dict(report), indent=2, sort_keys=True))
        else:
            for line in summary_lines(report):
                self.echo(line)
        if report.passed:
            self.echo('{} \x1B[92m[passed]\x1B[39m'.format(stem))
            return self.EXIT_SUCCESS
        self.echo('{} \x1B[91m[failed]\x1B[39m: {}'.format(stem, ', '.join(report.failures)))
        return self.EXIT_CHECK_FAILURE

    def cmd_oracle(self):
        """Closed-form kernel checks, tail bounds, oddness and barrier constancy."""
        report = DiagnosticsReport((), {'mode': 'oracle', 'seed': self.config.seed,
                                        'param_hash': self.config.params.param_hash(),
                                        'force_failure': self.force_failure})
        for record in _kernel_records():
            report = report.extended(record)
        report = report.extended(_tail_record(np.random.default_rng(self.config.seed)))
        report = report.extended(_oddness_record(self.config))
        quad = self.config.quadrature
        n = self.config.params.n
        for s in ORACLE_ORDERS:
            params = OperatorParams.build(n, s, 2.0, 0.0, TemperingFunction('identity'))
            perturb = params.with_c_norm(1.25 * params.c_norm) if self.force_failure else None
            result = barrier_constancy_check(params, ORACLE_RADII, quad, perturb)
            report = report.extended(CheckRecord(
                'constancy_s{}'.format(s), result.spread, 0.02,
                'constant' if result.passed else 'not constant', result.passed,
                details={'spreads': list(result.spreads), 'contracting': result.contracting,
                         'values': [list(v) for v in result.values]}))
        return self._emit(report, 'oracle')

    def cmd_report(self):
        report = read_json(self.config.input)
        write_csv(report, self.out_dir / 'diagnostics.csv', report.metadata.get('param_hash', ''))
        written = render_plots(report, self.out_dir)
        self.echo('Rendered {} plots from {}'.format(len(written), self.config.input))
        return self.EXIT_SUCCESS if report.passed else self.EXIT_CHECK_FAILURE


def _close(value, expected, rtol):
    return abs(value - expected) <= rtol * abs(expected)


def _kernel_records():
    params = OperatorParams.build(2, 0.5, 2.0, 0.1, TemperingFunction('identity'))
    untempered = OperatorParams.build(2, 0.5, 2.0, 0.0, TemperingFunction('identity'))
    checks = (
        ('g_power', g_power(2.0, 3.0), 4.0, 1e-15),
        ('kernel_weight', kernel_weight(2.0, KernelSpec(params)), math.exp(-0.2) / 8.0, 1e-12),
        ('tail_mass', tail_mass(10.0, KernelSpec(untempered)), 2 * math.pi * 0.1, 1e-12),
    )
    for name, value, expected, rtol in checks:
        passed = _close(value, expected, rtol)
        yield CheckRecord('closed_form_' + name, value, expected,
                          'match' if passed else 'mismatch', passed)


def _tail_record(rng):
    worst = -math.inf
    for _ in range(TAIL_DRAWS):
        params = OperatorParams.build(int(rng.integers(1, 4)), rng.uniform(0.1, 0.9),
                                      rng.uniform(2.0, 4.0), rng.uniform(0.0, 1.0),
                                      TemperingFunction('identity'))
        spec = KernelSpec(params)
        R = rng.uniform(0.5, 5.0)
        edges = np.geomspace(R, 100 * R, 8)
        numeric = math.fsum(integrate.quad(spec.radial_density, a, b, epsrel=1e-12)[0]
                            for a, b in zip(edges[:-1], edges[1:]))
        worst = max(worst, numeric - tail_mass(R, spec))
    passed = worst <= 1e-12
    return CheckRecord('tail_bound', worst, 1e-12, 'valid' if passed else 'violated', passed)


def _oddness_record(config):
    params = config.params
    h = config.simulation.discretization.h
    n = min(params.n, 3)
    if n != params.n:
        return CheckRecord('grid_oddness', None, 0.0, 'skipped', False, True)
    field = GridField.from_function(n, h, lambda x: barrier_phi(x, params.s) * (1 + x[..., 0]))
    values = eval_grid_all(field, params, config.simulation.quadrature, config.threads).values
    negated = eval_grid_all(field.with_values(-field.values), params,
                            config.simulation.quadrature, config.threads).values
    gap = float(np.max(np.abs(values + negated)))
    passed = gap == 0.0
    return CheckRecord('grid_oddness', gap, 0.0, 'exact' if passed else 'broken', passed)


def build_parser():
    parser = argparse.ArgumentParser(
        description='Evaluate, simulate and verify the tempered fractional p-Laplacian '
                    'on the unit ball')
    parser.add_argument('--config', help='Path to a run configuration file')
    parser.add_argument('--preset', help='Named preset to run without a configuration file',
                        choices=preset_names())
    parser.add_argument('--mode', choices=MODES, help='Override the configured mode')
    parser.add_argument('--out', help='Output directory (falls back to ${})'.format(OUT_ENV))
    parser.add_argument('--threads', type=int, help='Worker threads for operator sums')
    parser.add_argument('--seed', type=int, help='Seed for random initial data')
    parser.add_argument('--json', action='store_true', help='Print the report as JSON')
    parser.add_argument('--verbose', action='store_true', help='Debug logging')
    parser.add_argument('--force-failure', action='store_true', help=argparse.SUPPRESS)
    return parser


def resolve_config(args):
    if args.config:
        return load_config(args.config)
    name = args.preset or ('oracle' if args.mode == 'oracle' else None)
    if name is None:
        raise ConfigError('either --config or --preset is required')
    return config_from_preset(name)


def main(argv=None, stream=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        config = resolve_config(args)
        config = config.with_overrides(mode=args.mode, threads=args.threads, seed=args.seed)
    except ConfigError as error:
        logger.error(str(error))
        return Runner.EXIT_USAGE_ERROR
    out_dir = args.out or config.out or os.environ.get(OUT_ENV) or DEFAULT_OUT
    runner = Runner(config, out_dir, json_output=args.json, force_failure=args.force_failure,
                    stream=stream)
    return runner.execute()


if __name__ == '__main__':
    sys.exit(main())
