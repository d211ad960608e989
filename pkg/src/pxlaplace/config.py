"""Strict YAML run configuration.

The schema is deliberately rigid: every unknown key is an error carrying
its full path (e.g. "solver.tolerance: unknown key"), so configuration
typos fail loudly instead of silently falling back to defaults.  Numbers
are validated for type and range at parse time; object construction
(meshes, exponent fields, nonlinearities) happens in the build_* helpers
and re-raises domain errors under the offending config path.
"""

from dataclasses import dataclass

import numpy as np
import yaml

from .exponents import ExponentField, build_exponent_field, exponent_preset
from .mesh import build_mesh
from .nonlinearity import (affine_load, constant_load, expr_nonlinearity,
                           power_nonlinearity, sin_bump_load,
                           sum_nonlinearity)
from .solvers import SolverOptions
from .verification import SUITES

__all__ = ['ConfigError', 'RunConfig', 'parse_config', 'load_config',
           'build_mesh_from', 'build_exponents_from',
           'build_nonlinearity_from', 'solver_options_from']

SOLVER_KINDS = ('load', 'coercive', 'mountain_pass', 'verify')
OUTPUT_FORMATS = ('csv', 'json', 'trace')

_PROFILE_PARAMS = {
    'constant': {'value'},
    'affine': {'base', 'slope'},
    'sin-bump': {'amplitude', 'base'},
}
_EXPONENT_PRESET_PARAMS = {
    'constant': {'value'},
    'affine': {'base', 'slope', 'slope_y'},
    'sin-bump': {'base', 'amplitude'},
}


class ConfigError(ValueError):
    """Schema violation; message starts with the offending key path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__('%s: %s' % (path, message))


@dataclass
class RunConfig:
    mesh: dict
    exponents: list
    nonlinearity: dict
    solver: dict
    output: dict


def _mapping(node, path):
    if node is None:
        return {}
    if not isinstance(node, dict):
        raise ConfigError(path, 'expected a mapping, got %s'
                          % type(node).__name__)
    return node


def _reject_unknown(node, allowed, path):
    for key in sorted(set(node) - set(allowed)):
        raise ConfigError('%s.%s' % (path, key), 'unknown key')


def _number(node, key, path, default=None, minimum=None,
            exclusive=False, integer=False, required=False):
    if key not in node:
        if required:
            raise ConfigError('%s.%s' % (path, key), 'required key missing')
        return default
    value = node[key]
    if isinstance(value, str):
        # yaml 1.1 reads exponent forms like 1e-7 (no dot) as strings
        try:
            value = float(value)
        except ValueError:
            pass
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError('%s.%s' % (path, key), 'expected a number, got %r'
                          % (value,))
    if integer:
        if isinstance(value, float) and value == int(value):
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError('%s.%s' % (path, key),
                              'expected an integer, got %r' % (value,))
    else:
        value = float(value)
    if minimum is not None:
        bad = value <= minimum if exclusive else value < minimum
        if bad:
            op = '>' if exclusive else '>='
            raise ConfigError('%s.%s' % (path, key),
                              'must be %s %g, got %g' % (op, minimum, value))
    return value


def _string(node, key, path, default=None, required=False, choices=None):
    if key not in node:
        if required:
            raise ConfigError('%s.%s' % (path, key), 'required key missing')
        return default
    value = node[key]
    if not isinstance(value, str):
        raise ConfigError('%s.%s' % (path, key), 'expected a string, got %r'
                          % (value,))
    if choices is not None and value not in choices:
        raise ConfigError('%s.%s' % (path, key), 'must be one of %s, got %r'
                          % (', '.join(choices), value))
    return value


def _boolean(node, key, path, default=False):
    if key not in node:
        return default
    value = node[key]
    if not isinstance(value, bool):
        raise ConfigError('%s.%s' % (path, key), 'expected a boolean, got %r'
                          % (value,))
    return value


def _parse_mesh(node):
    node = _mapping(node, 'mesh')
    _reject_unknown(node, ('dim', 'resolution'), 'mesh')
    dim = _number(node, 'dim', 'mesh', default=1, integer=True)
    if dim not in (1, 2):
        raise ConfigError('mesh.dim', 'must be 1 or 2, got %r' % dim)
    resolution = _number(node, 'resolution', 'mesh', default=64, integer=True)
    if resolution < 2:
        raise ConfigError('mesh.resolution',
                          'resolution >= 2 required, got %d' % resolution)
    return {'dim': dim, 'resolution': resolution}


def _parse_exponent(node, path):
    node = _mapping(node, path)
    if 'values' in node:
        _reject_unknown(node, ('values',), path)
        values = node['values']
        if (not isinstance(values, list) or not values
                or not all(isinstance(v, (int, float))
                           and not isinstance(v, bool) for v in values)):
            raise ConfigError('%s.values' % path,
                              'expected a non-empty list of numbers')
        values = [float(v) for v in values]
        low = min(values)
        if not low > 1.0:
            raise ConfigError('%s.values' % path,
                              'exponents must exceed 1, got %.17g' % low)
        return {'values': values}
    preset = _string(node, 'preset', path, required=True,
                     choices=tuple(_EXPONENT_PRESET_PARAMS))
    allowed = {'preset'} | _EXPONENT_PRESET_PARAMS[preset]
    _reject_unknown(node, allowed, path)
    params = {k: _number(node, k, path) for k in node if k != 'preset'}
    # reject constant-sampler ranges that dip to 1 before any mesh exists
    if preset == 'constant':
        value = params.get('value', 2.0)
        if not value > 1.0:
            raise ConfigError('%s.value' % path,
                              'exponent must exceed 1, got %.17g' % value)
    elif preset == 'affine':
        base = params.get('base', 2.0)
        slope = params.get('slope', 1.0)
        slope_y = params.get('slope_y', 0.0)
        low = base + min(0.0, slope) + min(0.0, slope_y)
        if not low > 1.0:
            raise ConfigError(path, 'affine exponent dips to %.17g on the '
                              'unit domain; must stay above 1' % low)
    else:
        base = params.get('base', 2.0)
        amplitude = params.get('amplitude', 0.5)
        low = base + min(0.0, amplitude)
        if not low > 1.0:
            raise ConfigError(path, 'sin-bump exponent dips to %.17g; must '
                              'stay above 1' % low)
    return dict(node)


def _parse_exponents(node):
    if node is None:
        return [{'preset': 'constant', 'value': 2.0},
                {'preset': 'constant', 'value': 3.0}]
    if not isinstance(node, list) or not node:
        raise ConfigError('exponents', 'expected a non-empty list')
    return [_parse_exponent(item, 'exponents[%d]' % i)
            for i, item in enumerate(node)]


def _parse_nonlinearity(node):
    if node is None:
        return None
    node = _mapping(node, 'nonlinearity')
    kind = _string(node, 'kind', 'nonlinearity', required=True,
                   choices=('power', 'load', 'sum', 'expr'))
    path = 'nonlinearity'
    if kind == 'power':
        _reject_unknown(node, ('kind', 'q', 'kappa'), path)
        _number(node, 'q', path, required=True, minimum=1.0, exclusive=True)
        _number(node, 'kappa', path, default=1.0, minimum=0.0, exclusive=True)
    elif kind in ('load', 'sum'):
        profile = _string(node, 'profile', path, default='constant',
                          choices=tuple(_PROFILE_PARAMS))
        allowed = {'kind', 'profile'} | _PROFILE_PARAMS[profile]
        if kind == 'sum':
            allowed |= {'q', 'kappa'}
            _number(node, 'q', path, required=True, minimum=1.0,
                    exclusive=True)
            _number(node, 'kappa', path, default=1.0, minimum=0.0,
                    exclusive=True)
        _reject_unknown(node, allowed, path)
        for key in _PROFILE_PARAMS[profile]:
            _number(node, key, path)
    else:
        _reject_unknown(node, ('kind', 'expr', 'primitive', 'C1', 'C2',
                               'alpha', 'beta', 'theta', 'M', 'odd'), path)
        _string(node, 'expr', path, required=True)
        _string(node, 'primitive', path)
        for key in ('C1', 'C2', 'alpha', 'beta', 'theta', 'M'):
            _number(node, key, path)
        _boolean(node, 'odd', path)
    return dict(node)


def _parse_solver(node):
    node = _mapping(node, 'solver')
    allowed = ('kind', 'tol', 'seed', 'max_iters', 'multistart',
               'path_points', 'retension_every', 'nontrivial_floor',
               'sphere_samples', 'blowup_ratio', 'force', 'phi_target',
               'suites')
    _reject_unknown(node, allowed, 'solver')
    kind = _string(node, 'kind', 'solver', default='coercive',
                   choices=SOLVER_KINDS)
    out = {
        'kind': kind,
        'tol': _number(node, 'tol', 'solver', minimum=0.0, exclusive=True),
        'seed': _number(node, 'seed', 'solver', default=0, integer=True),
        'max_iters': _number(node, 'max_iters', 'solver', default=200000,
                             integer=True, minimum=1),
        'multistart': _number(node, 'multistart', 'solver', default=4,
                              integer=True, minimum=0),
        'path_points': _number(node, 'path_points', 'solver', default=21,
                               integer=True, minimum=3),
        'retension_every': _number(node, 'retension_every', 'solver',
                                   default=10, integer=True, minimum=1),
        'nontrivial_floor': _number(node, 'nontrivial_floor', 'solver',
                                    default=1e-2, minimum=0.0),
        'sphere_samples': _number(node, 'sphere_samples', 'solver',
                                  default=16, integer=True, minimum=1),
        'blowup_ratio': _number(node, 'blowup_ratio', 'solver',
                                default=100.0, minimum=1.0),
        'force': _boolean(node, 'force', 'solver'),
        'phi_target': _number(node, 'phi_target', 'solver', default=-1.0),
    }
    suites = node.get('suites')
    if suites is not None:
        if (not isinstance(suites, list)
                or not all(isinstance(s, str) for s in suites)):
            raise ConfigError('solver.suites', 'expected a list of suite '
                              'names')
        for s in suites:
            if s not in SUITES:
                raise ConfigError('solver.suites', 'unknown suite %r; '
                                  'choices: %s' % (s, ', '.join(SUITES)))
    out['suites'] = suites
    return out


def _parse_output(node):
    node = _mapping(node, 'output')
    _reject_unknown(node, ('dir', 'formats'), 'output')
    out_dir = _string(node, 'dir', 'output', default='out')
    formats = node.get('formats', list(OUTPUT_FORMATS))
    if (not isinstance(formats, list)
            or not all(isinstance(f, str) for f in formats)):
        raise ConfigError('output.formats', 'expected a list of format names')
    for f in formats:
        if f not in OUTPUT_FORMATS:
            raise ConfigError('output.formats', 'unknown format %r; choices: '
                              '%s' % (f, ', '.join(OUTPUT_FORMATS)))
    return {'dir': out_dir, 'formats': list(formats)}


def parse_config(text):
    """Parse and validate a YAML config document into a RunConfig."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError('<document>', 'not valid YAML: %s' % err) from None
    doc = _mapping(doc, '<document>')
    _reject_unknown(doc, ('mesh', 'exponents', 'nonlinearity', 'solver',
                          'output'), '<document>')
    cfg = RunConfig(
        mesh=_parse_mesh(doc.get('mesh')),
        exponents=_parse_exponents(doc.get('exponents')),
        nonlinearity=_parse_nonlinearity(doc.get('nonlinearity')),
        solver=_parse_solver(doc.get('solver')),
        output=_parse_output(doc.get('output')),
    )
    kind = cfg.solver['kind']
    nl_kind = (cfg.nonlinearity or {}).get('kind')
    if kind != 'verify' and cfg.nonlinearity is None:
        raise ConfigError('nonlinearity', 'required for solver kind %r'
                          % kind)
    if kind == 'load' and nl_kind != 'load':
        raise ConfigError('solver.kind', "load solver requires a "
                          "nonlinearity of kind 'load', got %r" % nl_kind)
    return cfg


def load_config(path):
    try:
        with open(path) as handle:
            text = handle.read()
    except OSError as err:
        raise ConfigError('config', 'cannot read %s: %s'
                          % (path, err)) from None
    return parse_config(text)


def build_mesh_from(cfg):
    return build_mesh(cfg.mesh['dim'], cfg.mesh['resolution'])


def build_exponents_from(cfg, mesh):
    fields = []
    for i, spec in enumerate(cfg.exponents):
        path = 'exponents[%d]' % i
        try:
            if 'values' in spec:
                values = np.asarray(spec['values'], dtype=float)
                if values.shape != (mesh.n_elements,):
                    raise ConfigError(path, 'inline table needs %d values '
                                      '(one per element), got %d'
                                      % (mesh.n_elements, values.size))
                fields.append(ExponentField(mesh, values))
            else:
                params = {k: v for k, v in spec.items() if k != 'preset'}
                fields.append(exponent_preset(spec['preset'], mesh, **params))
        except ValueError as err:
            if isinstance(err, ConfigError):
                raise
            raise ConfigError(path, str(err)) from None
    return tuple(fields)


def build_nonlinearity_from(cfg):
    spec = cfg.nonlinearity
    kind = spec['kind']
    try:
        if kind == 'power':
            return power_nonlinearity(spec['q'], spec.get('kappa', 1.0))
        if kind == 'load':
            profile = spec.get('profile', 'constant')
            params = {k: v for k, v in spec.items()
                      if k not in ('kind', 'profile')}
            if profile == 'constant':
                return constant_load(params.get('value', 1.0))
            if profile == 'affine':
                return affine_load(params.get('base', 1.0),
                                   params.get('slope', 0.0))
            return sin_bump_load(params.get('amplitude', 1.0),
                                 params.get('base', 0.0))
        if kind == 'sum':
            profile = spec.get('profile', 'constant')
            params = {k: v for k, v in spec.items()
                      if k not in ('kind', 'profile', 'q', 'kappa')}
            return sum_nonlinearity(spec['q'], spec.get('kappa', 1.0),
                                    profile, **params)
        declared = {k: spec[k] for k in ('C1', 'C2', 'alpha', 'beta',
                                         'theta', 'M', 'odd') if k in spec}
        return expr_nonlinearity(spec['expr'], spec.get('primitive'),
                                 **declared)
    except (ValueError, ArithmeticError) as err:
        raise ConfigError('nonlinearity', str(err)) from None


def solver_options_from(cfg, seed=None, tol=None):
    """SolverOptions from the solver section; seed/tol override when given."""
    s = cfg.solver
    return SolverOptions(
        tol=tol if tol is not None else s['tol'],
        max_iters=s['max_iters'],
        multistart=s['multistart'],
        seed=seed if seed is not None else s['seed'],
        path_points=s['path_points'],
        retension_every=s['retension_every'],
        nontrivial_floor=s['nontrivial_floor'],
        sphere_samples=s['sphere_samples'],
        blowup_ratio=s['blowup_ratio'],
        force=s['force'],
        phi_target=s['phi_target'],
    )
