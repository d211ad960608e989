import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import stiffness_matrix_1d
from pxlaplace import (DualVector, EnergySpec, GridFunction,
                       build_exponent_field, constant_exponent, constant_load,
                       duality_pairing, energy_J, interpolate, interval_mesh,
                       modular, monotonicity_gap, phi, phi_grad,
                       power_nonlinearity, project_dirichlet, residual_L,
                       vector_inequality_gap)


def _spec(n=32, p1=2.0, p2=3.0):
    mesh = interval_mesh(n)
    return EnergySpec([constant_exponent(p1, mesh),
                       constant_exponent(p2, mesh)])


def _random_u(mesh, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    return project_dirichlet(
        GridFunction(mesh, scale * rng.normal(size=mesh.n_nodes)))


def test_energy_zero_and_hat():
    spec = _spec()
    zero = GridFunction(spec.mesh, np.zeros(spec.mesh.n_nodes))
    assert energy_J(zero, spec) == 0.0

    mesh = interval_mesh(2)
    spec2 = EnergySpec([constant_exponent(2.0, mesh),
                        constant_exponent(2.0, mesh)])
    hat = GridFunction(mesh, np.array([0.0, 1.0, 0.0]))
    # |u'| = 2 on both halves, J = 2 * (1/2) * integral 4 = 4
    assert energy_J(hat, spec2) == pytest.approx(4.0, abs=1e-13)


def test_energy_scaling_splits_by_exponent():
    spec = _spec(16, 2.0, 3.0)
    u = _random_u(spec.mesh, 10)
    mesh = spec.mesh
    term_a = energy_J(u, EnergySpec([constant_exponent(2.0, mesh)]))
    term_b = energy_J(u, EnergySpec([constant_exponent(3.0, mesh)]))
    for t in (0.5, 1.0, 2.0, 3.7):
        want = t ** 2 * term_a + t ** 3 * term_b
        assert energy_J(t * u, spec) == pytest.approx(want, rel=1e-12)


def test_residual_zero_function_and_boundary_rows():
    spec = _spec()
    zero = GridFunction(spec.mesh, np.zeros(spec.mesh.n_nodes))
    r = residual_L(zero, spec)
    assert isinstance(r, DualVector)
    assert np.all(r.components == 0.0)
    u = _random_u(spec.mesh, 11)
    r = residual_L(u, spec)
    assert np.all(r.components[spec.mesh.boundary_mask] == 0.0)


def test_discrete_duality_identity():
    spec = _spec(48, 2.0, 3.0)
    for seed in range(10):
        u = _random_u(spec.mesh, seed, scale=2.0)
        lhs = duality_pairing(residual_L(u, spec), u)
        mags = np.linalg.norm(spec.mesh.element_gradients(u.values), axis=1)
        rhs = sum(modular(mags, p) for p in spec.exponents)
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_residual_matches_linear_stiffness():
    n = 32
    mesh = interval_mesh(n)
    spec = EnergySpec([constant_exponent(2.0, mesh),
                       constant_exponent(2.0, mesh)])
    u = _random_u(mesh, 12)
    r = residual_L(u, spec).components
    K = 2.0 * stiffness_matrix_1d(n)
    want = K @ u.values
    want[0] = want[-1] = 0.0
    assert np.max(np.abs(r - want)) <= 1e-12 * max(1.0, np.max(np.abs(want)))


def test_phi_splits_for_pure_load():
    mesh = interval_mesh(32)
    spec = EnergySpec([constant_exponent(2.0, mesh),
                       constant_exponent(3.0, mesh)],
                      constant_load(2.0))
    u = _random_u(mesh, 13)
    mids = 0.5 * (u.values[:-1] + u.values[1:])
    load_term = float(np.sum(mesh.element_measures * 2.0 * mids))
    assert phi(u, spec) == pytest.approx(energy_J(u, spec) - load_term,
                                         rel=1e-12)
    zero = GridFunction(mesh, np.zeros(mesh.n_nodes))
    assert phi(zero, spec) == 0.0


def test_phi_even_for_odd_nonlinearity():
    mesh = interval_mesh(24)
    spec = EnergySpec([constant_exponent(2.0, mesh),
                       constant_exponent(3.0, mesh)],
                      power_nonlinearity(4.0))
    for seed in range(5):
        u = _random_u(mesh, seed)
        assert phi(u, spec) == pytest.approx(phi(-1.0 * u, spec), abs=1e-12)
        gu = np.linalg.norm(phi_grad(u, spec).components)
        gmu = np.linalg.norm(phi_grad(-1.0 * u, spec).components)
        assert gu == pytest.approx(gmu, abs=1e-10 * (1.0 + gu))


def test_phi_grad_central_difference():
    mesh = interval_mesh(16)
    spec = EnergySpec([constant_exponent(2.0, mesh),
                       build_exponent_field(lambda x: 2.0 + x, mesh)],
                      power_nonlinearity(4.0))
    rng = np.random.default_rng(14)
    for _ in range(20):
        u = project_dirichlet(GridFunction(mesh, rng.normal(size=mesh.n_nodes)))
        v = project_dirichlet(GridFunction(mesh, rng.normal(size=mesh.n_nodes)))
        g = duality_pairing(phi_grad(u, spec), v)
        h = 1e-6 * (1.0 + u.max_abs()) / (1.0 + v.max_abs())
        fd = (phi(u + h * v, spec) - phi(u - h * v, spec)) / (2.0 * h)
        assert fd == pytest.approx(g, rel=1e-6, abs=1e-9)


def test_vector_gap_examples():
    lhs, rhs = vector_inequality_gap(np.array([1.0, 0.0]),
                                     np.array([0.0, 0.0]), 2.0)
    assert lhs == pytest.approx(1.0)
    assert rhs == pytest.approx(0.25)
    lhs, rhs = vector_inequality_gap(np.array([0.3, -0.7]),
                                     np.array([0.3, -0.7]), 3.5)
    assert lhs == 0.0 and rhs == 0.0
    with pytest.raises(ValueError):
        vector_inequality_gap(np.array([1.0]), np.array([0.0]), 1.0)


def test_vector_gap_batch_matches_single():
    rng = np.random.default_rng(15)
    for p in (1.3, 1.7, 2.0, 3.0, 4.5):
        xi = rng.normal(size=(40, 2))
        eta = rng.normal(size=(40, 2))
        lhs, rhs = vector_inequality_gap(xi, eta, p)
        for k in range(40):
            l1, r1 = vector_inequality_gap(xi[k], eta[k], p)
            assert l1 == pytest.approx(lhs[k], rel=1e-13, abs=1e-300)
            assert r1 == pytest.approx(rhs[k], rel=1e-13, abs=1e-300)
        assert np.all(lhs >= rhs - 1e-12 * (1.0 + np.abs(rhs)))


def test_monotonicity_gap_cases():
    spec = _spec(24)
    u = _random_u(spec.mesh, 16)
    v = _random_u(spec.mesh, 17)
    assert monotonicity_gap(u, u, spec) == pytest.approx(0.0, abs=1e-14)
    assert monotonicity_gap(u, v, spec) > 0.0

    mesh = interval_mesh(24)
    lin = EnergySpec([constant_exponent(2.0, mesh),
                      constant_exponent(2.0, mesh)])
    a = _random_u(mesh, 18)
    b = _random_u(mesh, 19)
    gap = monotonicity_gap(a, b, lin)
    d = a.values - b.values
    K = 2.0 * stiffness_matrix_1d(24)
    assert gap == pytest.approx(float(d @ (K @ d)), rel=1e-12)


def test_duality_pairing_bilinear():
    spec = _spec(16)
    u = _random_u(spec.mesh, 20)
    v = _random_u(spec.mesh, 21)
    w = _random_u(spec.mesh, 22)
    r = residual_L(u, spec)
    lhs = duality_pairing(r, 2.0 * v + (-1.5) * w)
    rhs = 2.0 * duality_pairing(r, v) - 1.5 * duality_pairing(r, w)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-14)
    zero = residual_L(GridFunction(spec.mesh,
                                   np.zeros(spec.mesh.n_nodes)), spec)
    assert duality_pairing(zero, v) == 0.0


def test_coercivity_trend_in_scale():
    spec = _spec(24, 2.0, 3.0)
    u = _random_u(spec.mesh, 23)
    ratios = []
    for t in (1.0, 10.0, 100.0):
        tu = t * u
        num = duality_pairing(residual_L(tu, spec), tu)
        ratios.append(num / tu.nodal_norm())
    assert ratios[0] < ratios[1] < ratios[2]


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=1.05, max_value=6.0),
       st.integers(min_value=0, max_value=2 ** 31 - 1))
def test_vector_gap_bound_random(p, seed):
    rng = np.random.default_rng(seed)
    dim = int(rng.integers(1, 3))
    xi = rng.normal(size=dim) * 10.0 ** rng.uniform(-2, 2)
    eta = rng.normal(size=dim) * 10.0 ** rng.uniform(-2, 2)
    lhs, rhs = vector_inequality_gap(xi, eta, p)
    assert lhs >= rhs - 1e-12 * (1.0 + abs(rhs))
