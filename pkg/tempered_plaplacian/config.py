#!/usr/bin/env python
# coding: utf-8
"""Run configuration files.

A configuration is a list of `key = value` lines grouped under `[section]`
headers; `#` starts a comment. Values are numbers, fractions such as 1/64,
true/false, bare words or comma-separated lists. A `[run] preset = name`
line loads defaults from presets/<name>.json, and the keys of the file
overlay them. Unknown sections and keys are errors.
"""
import json
import logging
import re

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .core_types import (
    Discretization, InitialData, OperatorParams, ReactionTerm, SimulationConfig,
    TemperingFunction
)
from .diagnostics import DiagnosticSettings, Diagnostics
from .exceptions import ConfigError, InvalidParameter
from .operator import QuadratureSpec

logger = logging.getLogger(__name__)
logger.setLevel(logging.INFO)

MODES = ('eval', 'simulate', 'diagnose', 'oracle', 'report')
SECTION_RE = re.compile(r'^\[\s*([A-Za-z_]\w*)\s*\]$')
KEY_RE = re.compile(r'^[A-Za-z_]\w*$')
FRACTION_RE = re.compile(r'^[+-]?\d+(\.\d*)?\s*/\s*\d+(\.\d*)?$')


def _number(value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError('expected a number, got {!r}'.format(value))
    return float(value)


def _integer(value):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError('expected an integer, got {!r}'.format(value))
    return value


def _text(value):
    if isinstance(value, (tuple, list)):
        raise ValueError('expected a single value, got a list')
    return str(value)


def _numbers(value):
    items = value if isinstance(value, (tuple, list)) else (value,)
    return tuple(_number(item) for item in items)


def _words(value):
    items = value if isinstance(value, (tuple, list)) else (value,)
    return tuple(_text(item) for item in items)


def _knots(value):
    knots = []
    for item in (value if isinstance(value, (tuple, list)) else (value,)):
        if isinstance(item, (tuple, list)) and len(item) == 2:
            knots.append((_number(item[0]), _number(item[1])))
            continue
        radius, sep, level = _text(item).partition(':')
        if not sep:
            raise ValueError('knots are written radius:value')
        knots.append((float(radius), float(level)))
    return tuple(knots)


def _choice(*choices):
    def convert(value):
        value = _text(value)
        if value not in choices:
            raise ValueError('expected one of {}, got {!r}'.format(', '.join(choices), value))
        return value
    return convert


SCHEMA = {
    'run': {
        'mode': _choice(*MODES), 'out': _text, 'seed': _integer, 'threads': _integer,
        'preset': _text, 'snapshot': _text, 'input': _text,
        'target': _choice('initial', 'barrier'),
    },
    'operator': {
        'n': _integer, 's': _number, 'p': _number, 'lambda': _number, 'c_norm': _number,
        'normalization': _choice(*OperatorParams.NORMALIZATIONS),
        'tempering': _choice(*TemperingFunction.KINDS), 'beta': _number, 'knots': _knots,
    },
    'reaction': {
        'kind': _choice(*ReactionTerm.KINDS), 'kappa': _number, 'coefficients': _numbers,
    },
    'grid': {
        'mode': _choice('grid', 'radial'), 'h': _number, 'radial_points': _integer,
    },
    'simulation': {
        'initial': _choice(*InitialData.KINDS), 'amplitude': _number, 'center': _numbers,
        'radius': _number, 'dt_policy': _choice('auto', 'fixed'), 'dt': _number,
        'dt_max': _number, 't_end': _number, 'tol_steady': _number, 'steady_window': _number,
        'snapshot_every': _number,
    },
    'quadrature': {
        'hole': _number, 'eps_tail': _number, 'cutoff': _number, 'angular_points': _integer,
        'max_depth': _integer, 'min_depth': _integer, 'rtol': _number, 'gauss_points': _integer,
        'chunk_size': _integer,
    },
    'diagnostics': {
        'checks': _words, 'band_lo': _number, 'band_hi': _number, 'alphas': _numbers,
        'alpha': _number, 'delta_strip': _number, 'tol_factor': _number, 'r_d': _number,
        'delta': _number, 'eps0': _number, 'x_bar': _numbers, 'eps_ball': _number,
        'barrier_radii': _numbers, 'refine_h': _number,
    },
}

# Function-mode refinement defaults of a run; QuadratureSpec's own defaults are stricter.
FUNCTION_QUADRATURE = {'max_depth': 4, 'min_depth': 2, 'rtol': 1e-4}


@dataclass(frozen=True)
class RunConfig:
    mode: str
    simulation: SimulationConfig
    quadrature: QuadratureSpec = field(default_factory=QuadratureSpec)
    diagnostics: DiagnosticSettings = field(default_factory=DiagnosticSettings)
    out: Optional[str] = None
    seed: int = 0
    threads: int = 1
    snapshot: Optional[str] = None
    input: Optional[str] = None
    target: str = 'initial'
    preset: Optional[str] = None

    @property
    def params(self):
        return self.simulation.params

    def with_overrides(self, mode=None, out=None, threads=None, seed=None):
        """Copy with command-line overrides applied."""
        config = self
        if mode is not None:
            config = replace(config, mode=mode)
        if out is not None:
            config = replace(config, out=str(out))
        if threads is not None:
            if threads < 1:
                raise ConfigError('threads must be >= 1', key='threads')
            config = replace(config, threads=threads,
                             simulation=replace(config.simulation, threads=threads))
        if seed is not None:
            initial = replace(config.simulation.initial, seed=seed)
            config = replace(config, seed=seed,
                             simulation=replace(config.simulation, initial=initial))
        return config


def load_preset(name):
    """Load a named preset from the package presets directory."""
    preset_filepath = Path(__file__).parent / 'presets' / (name + '.json')
    logger.debug('Loading preset file : {}'.format(preset_filepath))
    if not preset_filepath.exists():
        raise ConfigError('unknown preset {!r}'.format(name), key='preset')
    with preset_filepath.open() as f:
        preset = json.load(f)
    return preset


def preset_names():
    return sorted(path.stem for path in (Path(__file__).parent / 'presets').glob('*.json'))


def _parse_value(raw):
    raw = raw.strip()
    if ',' in raw:
        items = [item.strip() for item in raw.split(',')]
        if any(not item for item in items):
            raise ValueError('empty list item')
        return tuple(_parse_value(item) for item in items)
    lowered = raw.lower()
    if lowered in ('true', 'false'):
        return lowered == 'true'
    if FRACTION_RE.match(raw):
        numerator, denominator = (float(part) for part in raw.split('/'))
        if denominator == 0:
            raise ValueError('zero denominator')
        return numerator / denominator
    for kind in (int, float):
        try:
            return kind(raw)
        except ValueError:
            pass
    return raw


def tokenize(text):
    """Sections {name: {key: (value, line)}} of a configuration text."""
    sections = {}
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].rstrip()
        stripped = line.strip()
        if not stripped:
            continue
        column = len(line) - len(line.lstrip()) + 1
        if stripped.startswith('['):
            match = SECTION_RE.match(stripped)
            if not match:
                raise ConfigError('malformed section header {!r}'.format(stripped),
                                  line=number, column=column)
            current = match.group(1)
            if current not in SCHEMA:
                raise ConfigError('unknown section [{}]'.format(current), line=number,
                                  column=column, key=current)
            sections.setdefault(current, {})
            continue
        key, sep, value = stripped.partition('=')
        key = key.strip()
        if not sep:
            raise ConfigError("expected 'key = value'", line=number, column=column)
        if current is None:
            raise ConfigError('key {!r} outside of any section'.format(key), line=number,
                              column=column, key=key)
        if not KEY_RE.match(key):
            raise ConfigError('malformed key {!r}'.format(key), line=number, column=column)
        if key not in SCHEMA[current]:
            raise ConfigError('unknown key {!r} in [{}]'.format(key, current), line=number,
                              column=column, key=key)
        if key in sections[current]:
            raise ConfigError('duplicate key {!r} in [{}]'.format(key, current), line=number,
                              column=column, key=key)
        value_column = line.index('=') + 2 + len(value) - len(value.lstrip())
        if not value.strip():
            raise ConfigError('missing value for {!r}'.format(key), line=number,
                              column=value_column, key=key)
        try:
            sections[current][key] = (_parse_value(value), number)
        except ValueError as error:
            raise ConfigError('bad value for {!r}: {}'.format(key, error), line=number,
                              column=value_column, key=key)
    return sections


def _merge(preset, sections):
    merged = {}
    for section, values in preset.items():
        if section not in SCHEMA:
            raise ConfigError('unknown section [{}] in preset'.format(section), key=section)
        merged[section] = {key: (value, None) for key, value in values.items()}
    for section, values in sections.items():
        merged.setdefault(section, {}).update(values)
    return merged


def _converted(merged):
    typed = {}
    lines = {}
    for section, values in merged.items():
        typed[section] = {}
        for key, (value, line) in values.items():
            if key not in SCHEMA[section]:
                raise ConfigError('unknown key {!r} in [{}]'.format(key, section), line=line,
                                  key=key)
            try:
                typed[section][key] = SCHEMA[section][key](value)
            except ValueError as error:
                raise ConfigError('bad value for {!r}: {}'.format(key, error), line=line, key=key)
            lines[key] = line
    return typed, lines


def parse_config(text):
    """Parse and validate a configuration text into a RunConfig."""
    sections = tokenize(text)
    preset_name = sections.get('run', {}).get('preset', (None, None))[0]
    preset = load_preset(_text(preset_name)) if preset_name is not None else {}
    typed, lines = _converted(_merge(preset, sections))
    try:
        return build_run_config(typed, preset_name)
    except InvalidParameter as error:
        key = error.key
        raise ConfigError('invalid value for {}: {}'.format(key, error), line=lines.get(key),
                          key=key) from error


def config_from_preset(name):
    """RunConfig built from a preset alone."""
    typed, _ = _converted(_merge(load_preset(name), {}))
    try:
        return build_run_config(typed, name)
    except InvalidParameter as error:
        raise ConfigError('invalid value for {}: {}'.format(error.key, error),
                          key=error.key) from error


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as error:
        raise ConfigError('cannot read {}: {}'.format(path, error))
    return parse_config(text)


def build_run_config(typed, preset=None):
    run = typed.get('run', {})
    operator = typed.get('operator', {})
    reaction = typed.get('reaction', {})
    grid = typed.get('grid', {})
    simulation = typed.get('simulation', {})
    quadrature = typed.get('quadrature', {})
    diagnostics = typed.get('diagnostics', {})
    for key in ('n', 's', 'p'):
        if key not in operator:
            raise InvalidParameter('[operator] {} is required'.format(key), key=key)
    tempering = TemperingFunction(operator.get('tempering', 'identity'),
                                  beta=operator.get('beta', 1.0), knots=operator.get('knots', ()))
    params = OperatorParams.build(operator['n'], operator['s'], operator['p'],
                                  lam=operator.get('lambda', 0.0), tempering=tempering,
                                  normalization=operator.get('normalization', 'unit'),
                                  c_norm=operator.get('c_norm'))
    seed = run.get('seed', 0)
    threads = run.get('threads', 1)
    initial = InitialData(simulation.get('initial', 'barrier'),
                          amplitude=simulation.get('amplitude', 0.5),
                          center=simulation.get('center', ()),
                          radius=simulation.get('radius', 0.5), seed=seed)
    quad_options = dict(FUNCTION_QUADRATURE)
    quad_options.update(quadrature)
    quad = QuadratureSpec(**quad_options)
    sim_options = {key: simulation[key] for key in
                   ('dt_policy', 'dt', 'dt_max', 't_end', 'tol_steady', 'steady_window',
                    'snapshot_every') if key in simulation}
    sim = SimulationConfig(
        params=params,
        reaction=ReactionTerm(reaction.get('kind', 'zero'), kappa=reaction.get('kappa', 0.0),
                              coefficients=reaction.get('coefficients', ())),
        initial=initial,
        discretization=Discretization(**grid),
        quadrature=quad,
        threads=threads,
        **sim_options
    )
    for name in diagnostics.get('checks', ()):
        Diagnostics.get(name)
    settings = DiagnosticSettings(**diagnostics)
    mode = run.get('mode', 'simulate')
    if mode == 'report' and 'input' not in run:
        raise InvalidParameter('report mode needs [run] input', key='input')
    if threads < 1:
        raise InvalidParameter('threads must be >= 1', key='threads')
    return RunConfig(mode=mode, simulation=sim, quadrature=quad, diagnostics=settings,
                     out=run.get('out'), seed=seed, threads=threads,
                     snapshot=run.get('snapshot'), input=run.get('input'),
                     target=run.get('target', 'initial'), preset=preset)
