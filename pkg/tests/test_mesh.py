import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pxlaplace import (GridFunction, MeshMismatchError, build_mesh,
                       element_gradient, integrate, interpolate,
                       interval_mesh, project_dirichlet, rectangle_mesh,
                       write_solution_csv)


def test_interval_counts_and_measures():
    mesh = interval_mesh(4)
    assert mesh.n_nodes == 5
    assert mesh.n_elements == 4
    assert np.allclose(mesh.element_measures, 0.25)
    assert mesh.boundary_mask[0] and mesh.boundary_mask[-1]
    assert not mesh.boundary_mask[1:-1].any()


def test_rectangle_counts_and_area():
    mesh = rectangle_mesh(2, 2)
    assert mesh.n_nodes == 9
    assert mesh.n_elements == 8
    assert math.isclose(mesh.domain_measure, 1.0, rel_tol=1e-14)
    assert int(mesh.boundary_mask.sum()) == 8


def test_degenerate_resolution_rejected():
    with pytest.raises(ValueError):
        interval_mesh(1)
    with pytest.raises(ValueError):
        build_mesh(1, 1)
    with pytest.raises(ValueError):
        rectangle_mesh(1, 4)


def test_build_mesh_dispatch():
    assert build_mesh(1, 8).dim == 1
    mesh = build_mesh(2, (2, 3))
    assert mesh.dim == 2
    assert mesh.n_elements == 2 * 2 * 3
    with pytest.raises(ValueError):
        build_mesh(3, 4)


def test_gradient_exact_on_affine_1d():
    mesh = interval_mesh(16)
    u = interpolate(lambda x: x, mesh, zero_boundary=False)
    grads = mesh.element_gradients(u.values)
    assert np.max(np.abs(grads - 1.0)) <= 1e-13
    c = GridFunction(mesh, np.full(mesh.n_nodes, 3.7))
    assert np.max(np.abs(mesh.element_gradients(c.values))) == 0.0


def test_gradient_exact_on_affine_2d():
    mesh = rectangle_mesh(3, 3)
    u = interpolate(lambda x, y: x + 2.0 * y, mesh, zero_boundary=False)
    grads = mesh.element_gradients(u.values)
    assert np.max(np.abs(grads - np.array([1.0, 2.0]))) <= 1e-13
    for e in range(mesh.n_elements):
        g = element_gradient(u, e)
        assert np.max(np.abs(g - np.array([1.0, 2.0]))) <= 1e-13


def test_integrate_basics():
    mesh = interval_mesh(128)
    assert math.isclose(integrate(np.ones(128), mesh), 1.0, rel_tol=1e-14)
    mids = mesh.element_midpoints[:, 0]
    assert abs(integrate(mids, mesh) - 0.5) <= 1e-6
    with pytest.raises(ValueError):
        integrate(np.ones(5), mesh)


def test_integrate_nonneg_and_additive():
    mesh = interval_mesh(32)
    rng = np.random.default_rng(0)
    a = rng.random(32)
    b = rng.random(32)
    assert integrate(a, mesh) >= 0.0
    assert math.isclose(integrate(a + b, mesh),
                        integrate(a, mesh) + integrate(b, mesh),
                        rel_tol=1e-13)
    # split over an element partition
    half = a.copy()
    half[16:] = 0.0
    other = a - half
    assert math.isclose(integrate(a, mesh),
                        integrate(half, mesh) + integrate(other, mesh),
                        rel_tol=1e-13)


def test_project_dirichlet_idempotent_linear():
    mesh = rectangle_mesh(3, 3)
    rng = np.random.default_rng(1)
    u = GridFunction(mesh, rng.normal(size=mesh.n_nodes))
    v = GridFunction(mesh, rng.normal(size=mesh.n_nodes))
    pu = project_dirichlet(u)
    assert pu.is_dirichlet_compliant()
    assert np.array_equal(project_dirichlet(pu).values, pu.values)
    comb = project_dirichlet(2.0 * u + (-3.0) * v)
    manual = 2.0 * project_dirichlet(u) + (-3.0) * project_dirichlet(v)
    assert np.max(np.abs(comb.values - manual.values)) <= 1e-14
    ones = GridFunction(mesh, np.ones(mesh.n_nodes))
    pones = project_dirichlet(ones)
    assert np.all(pones.values[mesh.boundary_mask] == 0.0)
    assert np.all(pones.values[mesh.interior_mask] == 1.0)


def test_interpolate_signature_matches_dim():
    m1 = interval_mesh(8)
    u = interpolate(lambda x: np.sin(np.pi * x), m1)
    assert u.is_dirichlet_compliant()
    assert u.values[4] == pytest.approx(1.0, abs=1e-12)
    m2 = rectangle_mesh(4, 4)
    w = interpolate(lambda x, y: x * y, m2, zero_boundary=False)
    assert w.values[-1] == pytest.approx(1.0)


def test_gridfunction_arithmetic_and_mismatch():
    mesh = interval_mesh(4)
    other = interval_mesh(4)
    u = GridFunction(mesh, np.arange(5.0))
    v = GridFunction(mesh, np.ones(5))
    assert np.array_equal((u + v).values, u.values + 1.0)
    assert np.array_equal((u - v).values, u.values - 1.0)
    assert np.array_equal((2.0 * u).values, 2.0 * u.values)
    assert np.array_equal((-u).values, -u.values)
    w = GridFunction(other, np.ones(5))
    with pytest.raises(MeshMismatchError):
        u + w
    with pytest.raises(ValueError):
        GridFunction(mesh, np.ones(7))


def test_mesh_arrays_immutable():
    mesh = interval_mesh(4)
    with pytest.raises(ValueError):
        mesh.nodes[0, 0] = 1.0
    with pytest.raises(ValueError):
        mesh.element_measures[0] = 2.0


def test_solution_csv_roundtrip(tmp_path):
    mesh = interval_mesh(6)
    rng = np.random.default_rng(2)
    u = GridFunction(mesh, rng.normal(size=7) * 1e3)
    path = tmp_path / 'solution.csv'
    write_solution_csv(u, str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == 'node_index,x,u'
    parsed = np.array([float(line.split(',')[2]) for line in lines[1:]])
    # 17 significant digits reproduce doubles exactly
    assert np.array_equal(parsed, u.values)
    assert not list(tmp_path.glob('*.tmp'))


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=2, max_value=200))
def test_measures_partition_unit_interval(n):
    mesh = interval_mesh(n)
    assert math.isclose(mesh.domain_measure, 1.0, rel_tol=1e-12)
    assert np.all(mesh.element_measures > 0.0)
    assert int(mesh.boundary_mask.sum()) == 2


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=2, max_value=12), st.integers(min_value=2, max_value=12))
def test_rectangle_conforming(nx, ny):
    mesh = rectangle_mesh(nx, ny)
    assert mesh.n_elements == 2 * nx * ny
    assert math.isclose(mesh.domain_measure, 1.0, rel_tol=1e-12)
    # every interior edge shared by exactly two triangles
    edges = {}
    for tri in mesh.elements:
        for a, b in ((0, 1), (1, 2), (2, 0)):
            key = tuple(sorted((tri[a], tri[b])))
            edges[key] = edges.get(key, 0) + 1
    assert set(edges.values()) <= {1, 2}
    boundary_edges = [k for k, cnt in edges.items() if cnt == 1]
    for a, b in boundary_edges:
        assert mesh.boundary_mask[a] and mesh.boundary_mask[b]
