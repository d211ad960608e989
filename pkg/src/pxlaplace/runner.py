"""Config-driven pipelines: verify suites and the three solve kinds.

Exit codes: 0 converged / all suites passed, 2 condition-check or config
rejection, 3 non-convergence or suite failure.  diagnostics.json carries
the full run record (deterministic for a fixed seed, except the separate
timestamp field); solution.csv is only ever written for a converged run.
"""

import datetime
import json
import os

import numpy as np

from .config import (ConfigError, build_exponents_from, build_mesh_from,
                     build_nonlinearity_from, solver_options_from)
from .energy import EnergySpec
from .energy import phi as phi_functional
from .lebesgue import gradient_norm, luxemburg_norm, sum_space_norm
from .mesh import atomic_write_text, interpolate, write_solution_csv
from .solvers import (CollapseError, ConditionCheckError, DescentRayError,
                      find_descent_point, minimize_coercive, mountain_gates,
                      mountain_pass,
                      palais_smale_diagnostic, solve_load, sphere_level)
from .verification import run_suites

__all__ = ['run', 'RunOutcome', 'EXIT_OK', 'EXIT_REJECTED',
           'EXIT_NOT_CONVERGED']

EXIT_OK = 0
EXIT_REJECTED = 2
EXIT_NOT_CONVERGED = 3


class RunOutcome:
    """Exit code plus everything the CLI and report renderer need."""

    def __init__(self, exit_code, diagnostics, files, result=None,
                 mesh=None, exponents=None, suite_reports=None,
                 out_dir=None):
        self.exit_code = exit_code
        self.diagnostics = diagnostics
        self.files = files
        self.result = result
        self.mesh = mesh
        self.exponents = exponents
        self.suite_reports = suite_reports
        self.out_dir = out_dir


def _jsonify(value):
    """Recursively coerce numpy scalars/arrays so json.dumps succeeds."""
    if isinstance(value, dict):
        return {str(k): _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonify(v) for v in value.tolist()]
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return value


def _config_record(cfg):
    return {'mesh': cfg.mesh, 'exponents': cfg.exponents,
            'nonlinearity': cfg.nonlinearity, 'solver': cfg.solver,
            'output': cfg.output}


def _write_json(doc, path):
    doc = dict(doc)
    doc['timestamp'] = datetime.datetime.now(
        datetime.timezone.utc).isoformat()
    atomic_write_text(path, json.dumps(_jsonify(doc), sort_keys=True,
                                       indent=2) + '\n')


def _write_trace(trace, path):
    lines = ['iteration,phi,residual_norm,step,u_norm']
    for i, row in enumerate(trace):
        lines.append('%d,%.17g,%.17g,%.17g,%.17g'
                     % (i, row.phi, row.residual_norm, row.step, row.u_norm))
    atomic_write_text(path, '\n'.join(lines) + '\n')


def _prepare_out_dir(cfg, out_dir):
    out_dir = out_dir if out_dir is not None else cfg.output['dir']
    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, '.write-probe')
        with open(probe, 'w'):
            pass
        os.remove(probe)
    except OSError as err:
        raise ConfigError('output.dir', 'not writable: %s' % err) from None
    return out_dir


def _solution_norms(u, exponents):
    norms = {}
    for i, p in enumerate(exponents):
        grad = gradient_norm(u, p)
        value = luxemburg_norm(u, p)
        norms['exponent_%d' % i] = {
            'p_minus': p.p_minus, 'p_plus': p.p_plus,
            'value_norm': {'value': value.value,
                           'iterations': value.iterations,
                           'residual': value.residual},
            'gradient_norm': {'value': grad.value,
                              'iterations': grad.iterations,
                              'residual': grad.residual},
        }
    norms['sum_space_norm'] = sum_space_norm(u, exponents)
    return norms


def _center_bump(mesh):
    """Canonical positive direction for the descent ray: product of
    sine half-waves, peaking mid-domain."""
    if mesh.dim == 1:
        return interpolate(lambda x: np.sin(np.pi * x), mesh)
    return interpolate(lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y),
                       mesh)


def _run_verify(cfg, out_dir):
    reports = run_suites(cfg.solver['suites'], seed=cfg.solver['seed'])
    passed = all(r.passed for r in reports)
    doc = {'pipeline': 'verify', 'config': _config_record(cfg),
           'passed': passed, 'suites': [r.as_dict() for r in reports]}
    files = {}
    if 'json' in cfg.output['formats']:
        path = os.path.join(out_dir, 'diagnostics.json')
        _write_json(doc, path)
        files['diagnostics'] = path
    code = EXIT_OK if passed else EXIT_NOT_CONVERGED
    return RunOutcome(code, doc, files, suite_reports=reports)


def _run_solver(cfg, out_dir):
    mesh = build_mesh_from(cfg)
    exponents = build_exponents_from(cfg, mesh)
    spec = EnergySpec(exponents)
    nl = build_nonlinearity_from(cfg)
    opts = solver_options_from(cfg)
    kind = cfg.solver['kind']
    doc = {'pipeline': kind, 'config': _config_record(cfg)}
    files = {}

    def finish(code, result=None):
        if 'json' in cfg.output['formats']:
            path = os.path.join(out_dir, 'diagnostics.json')
            _write_json(doc, path)
            files['diagnostics'] = path
        if result is not None and 'trace' in cfg.output['formats']:
            path = os.path.join(out_dir, 'trace.csv')
            _write_trace(result.trace, path)
            files['trace'] = path
        if (result is not None and result.converged
                and 'csv' in cfg.output['formats']):
            path = os.path.join(out_dir, 'solution.csv')
            write_solution_csv(result.u, path)
            files['solution'] = path
        return RunOutcome(code, doc, files, result, mesh, exponents)

    try:
        if kind == 'load':
            result = solve_load(nl, spec, opts)
        elif kind == 'coercive':
            result = minimize_coercive(nl, spec, opts)
        else:
            # gate first: a nonlinearity that fails the growth/superlinearity
            # checks must be rejected before any ray search burns iterations
            mountain_gates(nl, spec, opts)
            w = _center_bump(mesh)
            t_ray, e = find_descent_point(nl, spec, w, opts)
            result = mountain_pass(nl, spec, e, opts)
            result.meta['descent_ray_t'] = t_ray
    except ConditionCheckError as err:
        doc.update({'status': 'rejected',
                    'rejection': err.report.as_dict(),
                    'message': str(err)})
        return finish(EXIT_REJECTED)
    except (CollapseError, DescentRayError) as err:
        doc.update({'status': 'failed', 'message': str(err),
                    'error': type(err).__name__})
        return finish(EXIT_NOT_CONVERGED)

    meta = {k: v for k, v in result.meta.items() if k != 'state'}
    doc.update({
        'status': result.status,
        'phi': result.phi_value,
        'residual_norm': result.residual_norm,
        'iterations': result.iterations,
        'trace_rows': len(result.trace),
        'solver': meta,
        'condition_reports': [r.as_dict() for r in result.condition_reports],
        'palais_smale': palais_smale_diagnostic(
            result.trace, opts.blowup_ratio).as_dict(),
        'u_max_abs': result.u.max_abs(),
        'u_nodal_norm': result.u.nodal_norm(),
    })
    if np.any(result.u.values != 0.0):
        doc['norms'] = _solution_norms(result.u, exponents)
    state = result.meta.get('state')
    if state is not None:
        radius = 0.5 * sum_space_norm(result.u, exponents)
        delta = sphere_level(nl, spec, radius, opts.sphere_samples,
                             opts.seed) if radius > 0.0 else None
        work = spec.with_nonlinearity(nl)
        doc['mountain_pass'] = {
            'level': state.level, 'max_index': state.max_index,
            'path_points': len(state.path),
            'path_levels': [phi_functional(g, work) for g in state.path],
            'sphere_radius': radius, 'sphere_level': delta,
        }
    return finish(EXIT_OK if result.converged else EXIT_NOT_CONVERGED,
                  result)


def run(cfg, out_dir=None):
    """Execute the configured pipeline; returns a RunOutcome."""
    out_dir = _prepare_out_dir(cfg, out_dir)
    if cfg.solver['kind'] == 'verify':
        outcome = _run_verify(cfg, out_dir)
    else:
        outcome = _run_solver(cfg, out_dir)
    outcome.out_dir = out_dir
    return outcome
