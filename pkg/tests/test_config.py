import numpy as np
import pytest

from pxlaplace import ConfigError, parse_config
from pxlaplace.config import (build_exponents_from, build_mesh_from,
                              build_nonlinearity_from, solver_options_from)

MINIMAL = """
nonlinearity: {kind: power, q: 4.0}
"""


def test_minimal_document_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.mesh == {'dim': 1, 'resolution': 64}
    assert cfg.solver['kind'] == 'coercive'
    assert cfg.solver['seed'] == 0
    assert cfg.solver['max_iters'] == 200000
    assert cfg.solver['tol'] is None
    assert cfg.output['dir'] == 'out'
    assert set(cfg.output['formats']) == {'csv', 'json', 'trace'}
    assert len(cfg.exponents) == 2


def test_unknown_keys_rejected_with_paths():
    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL + 'solver: {kind: coercive, tolerance: 1e-8}\n')
    assert err.value.path == 'solver.tolerance'
    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL + 'extra: 1\n')
    assert err.value.path == '<document>.extra'
    with pytest.raises(ConfigError) as err:
        parse_config('nonlinearity: {kind: power, q: 4.0, spice: 1}\n')
    assert err.value.path == 'nonlinearity.spice'


def test_mesh_validation():
    with pytest.raises(ConfigError, match='resolution >= 2'):
        parse_config(MINIMAL + 'mesh: {dim: 1, resolution: 1}\n')
    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL + 'mesh: {dim: 3, resolution: 8}\n')
    assert err.value.path == 'mesh.dim'
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + 'mesh: {dim: 1, resolution: 8.5}\n')


def test_exponent_validation():
    with pytest.raises(ConfigError, match='exceed 1'):
        parse_config(MINIMAL + 'exponents: [{preset: constant, value: 1.0}]\n')
    with pytest.raises(ConfigError, match='stay above 1'):
        parse_config(MINIMAL +
                     'exponents: [{preset: affine, base: 2.0, slope: -1.5}]\n')
    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL + 'exponents: [{preset: spline}]\n')
    assert 'preset' in err.value.path
    cfg = parse_config(MINIMAL +
                       'exponents: [{preset: sin-bump, base: 2.0, amplitude: 0.5}]\n')
    assert cfg.exponents[0]['preset'] == 'sin-bump'


def test_inline_exponent_table():
    text = (MINIMAL +
            'mesh: {dim: 1, resolution: 4}\n'
            'exponents: [{values: [2.0, 2.5, 3.0, 2.2]}]\n')
    cfg = parse_config(text)
    mesh = build_mesh_from(cfg)
    fields = build_exponents_from(cfg, mesh)
    assert np.array_equal(fields[0].values, [2.0, 2.5, 3.0, 2.2])
    short = (MINIMAL +
             'mesh: {dim: 1, resolution: 4}\n'
             'exponents: [{values: [2.0, 2.5]}]\n')
    with pytest.raises(ConfigError):
        build_exponents_from(parse_config(short), mesh)


def test_nonlinearity_kind_schemas():
    with pytest.raises(ConfigError, match='q'):
        parse_config('nonlinearity: {kind: power}\n')
    with pytest.raises(ConfigError) as err:
        parse_config('nonlinearity: {kind: power, q: 4.0, expr: "t"}\n')
    assert err.value.path == 'nonlinearity.expr'
    with pytest.raises(ConfigError, match='kind'):
        parse_config('nonlinearity: {kind: cubic}\n')
    cfg = parse_config('nonlinearity: {kind: expr, expr: "t**3", C1: 0.0, '
                       'C2: 1.0, alpha: 4.0}\n')
    assert cfg.nonlinearity['expr'] == 't**3'


def test_solver_cross_checks():
    with pytest.raises(ConfigError, match='load'):
        parse_config('nonlinearity: {kind: power, q: 4.0}\n'
                     'solver: {kind: load}\n')
    cfg = parse_config('solver: {kind: verify}\n')
    assert cfg.nonlinearity is None
    with pytest.raises(ConfigError, match='nonlinearity'):
        parse_config('solver: {kind: coercive}\n')
    with pytest.raises(ConfigError, match='suite'):
        parse_config('solver: {kind: verify, suites: [no-such]}\n')


def test_top_level_shape_errors():
    with pytest.raises(ConfigError):
        parse_config('- just\n- a\n- list\n')
    with pytest.raises(ConfigError):
        parse_config('nonlinearity: power\n')
    with pytest.raises(ConfigError, match='not valid YAML'):
        parse_config('nonlinearity: {kind: power, q: 4.0\n')


def test_builders_produce_working_objects():
    cfg = parse_config('mesh: {dim: 2, resolution: 4}\n'
                       'nonlinearity: {kind: load, profile: sin-bump, '
                       'amplitude: 4.0}\n'
                       'solver: {kind: load, seed: 3}\n')
    mesh = build_mesh_from(cfg)
    assert mesh.dim == 2
    fields = build_exponents_from(cfg, mesh)
    assert len(fields) == 2
    nl = build_nonlinearity_from(cfg)
    assert nl.kind == 'load'
    opts = solver_options_from(cfg)
    assert opts.seed == 3


def test_solver_options_overrides():
    cfg = parse_config(MINIMAL + 'solver: {kind: coercive, seed: 5, '
                       'tol: 1e-7, multistart: 2}\n')
    opts = solver_options_from(cfg)
    assert opts.seed == 5 and opts.tol == 1e-7 and opts.multistart == 2
    over = solver_options_from(cfg, seed=9, tol=1e-3)
    assert over.seed == 9 and over.tol == 1e-3
    with pytest.raises(ConfigError, match='> 0'):
        parse_config(MINIMAL + 'solver: {kind: coercive, tol: -1.0}\n')
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + 'solver: {kind: coercive, seed: 1.5}\n')
    with pytest.raises(ConfigError):
        parse_config(MINIMAL + 'solver: {kind: coercive, force: 1}\n')


def test_output_validation():
    with pytest.raises(ConfigError, match='formats'):
        parse_config(MINIMAL + 'output: {dir: out, formats: [yaml]}\n')
    cfg = parse_config(MINIMAL + 'output: {dir: results, formats: [json]}\n')
    assert cfg.output == {'dir': 'results', 'formats': ['json']}
