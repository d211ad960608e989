import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pxlaplace import (ExponentField, ExponentRangeError, MeshMismatchError,
                       build_exponent_field, conjugate, constant_exponent,
                       exponent_preset, field_pow, interval_mesh,
                       pointwise_max_min, rectangle_mesh, sobolev_conjugate)


def test_constant_field_exact_extremes():
    mesh = interval_mesh(10)
    p = constant_exponent(2.0, mesh)
    assert p.p_minus == 2.0 and p.p_plus == 2.0
    assert p.uniform_value == 2.0
    assert p.is_constant()


def test_affine_midpoint_sampling():
    n = 64
    mesh = interval_mesh(n)
    p = build_exponent_field(lambda x: 2.0 + x, mesh)
    h = 1.0 / n
    # dense-sample oracle over midpoints
    mids = (np.arange(n) + 0.5) * h
    dense = 2.0 + mids
    assert p.p_minus == pytest.approx(dense.min(), abs=1e-15)
    assert p.p_plus == pytest.approx(dense.max(), abs=1e-15)
    assert p.p_minus == pytest.approx(2.0 + h / 2.0, abs=1e-15)
    assert p.p_plus == pytest.approx(3.0 - h / 2.0, abs=1e-15)


def test_c_plus_violations_raise():
    mesh = interval_mesh(8)
    with pytest.raises(ExponentRangeError, match='C\\+'):
        constant_exponent(1.0, mesh)
    with pytest.raises(ExponentRangeError, match='element'):
        build_exponent_field(lambda x: 2.0 - 2.0 * x, mesh)
    with pytest.raises(ExponentRangeError):
        ExponentField(mesh, np.full(8, np.nan))
    with pytest.raises(ExponentRangeError):
        ExponentField(mesh, np.full(8, np.inf))


def test_pointwise_max_min_constants_and_crossover():
    mesh = interval_mesh(10)
    p1 = constant_exponent(2.0, mesh)
    p2 = constant_exponent(3.0, mesh)
    p_max, p_min = pointwise_max_min(p1, p2)
    assert p_max.uniform_value == 3.0
    assert p_min.uniform_value == 2.0
    same_max, same_min = pointwise_max_min(p1, p1)
    assert np.array_equal(same_max.values, p1.values)
    assert np.array_equal(same_min.values, p1.values)

    q1 = build_exponent_field(lambda x: 2.0 + x, mesh)
    q2 = build_exponent_field(lambda x: 3.0 - x, mesh)
    q_max, q_min = pointwise_max_min(q1, q2)
    mids = mesh.element_midpoints[:, 0]
    nearest = mids[np.argmin(np.abs(mids - 0.5))]
    assert q_max.p_minus == pytest.approx(max(2.0 + nearest, 3.0 - nearest),
                                          abs=1e-14)
    assert np.all(q_max.values >= q_min.values)
    assert q_max.p_minus >= q_min.p_minus
    assert q_max.p_plus >= q_min.p_plus

    other = interval_mesh(10)
    with pytest.raises(MeshMismatchError):
        pointwise_max_min(p1, constant_exponent(2.0, other))


def test_conjugate_values_and_involution():
    mesh = interval_mesh(16)
    assert conjugate(constant_exponent(2.0, mesh)).uniform_value == 2.0
    assert conjugate(constant_exponent(3.0, mesh)).uniform_value == 1.5
    p = build_exponent_field(lambda x: 2.0 + x, mesh)
    q = conjugate(p)
    assert np.max(np.abs(1.0 / p.values + 1.0 / q.values - 1.0)) <= 1e-14
    back = conjugate(q)
    assert np.max(np.abs(back.values - p.values)) <= 1e-12
    star = sobolev_conjugate(constant_exponent(2.0, mesh))
    with pytest.raises(ExponentRangeError):
        conjugate(star)


def test_sobolev_conjugate_branches():
    m1 = interval_mesh(8)
    star1 = sobolev_conjugate(constant_exponent(4.0, m1))
    assert np.all(np.isinf(star1.values))

    m2 = rectangle_mesh(2, 2)
    star_sub = sobolev_conjugate(constant_exponent(1.5, m2))
    assert np.allclose(star_sub.values, 6.0)
    star_crit = sobolev_conjugate(constant_exponent(2.0, m2))
    assert np.all(np.isinf(star_crit.values))


def test_field_pow_fast_path_matches_general():
    mesh = interval_mesh(12)
    base = np.linspace(0.1, 3.0, 12)
    p_const = constant_exponent(2.5, mesh)
    assert np.array_equal(field_pow(base, p_const), base ** 2.5)
    p_var = build_exponent_field(lambda x: 2.0 + x, mesh)
    assert p_var.uniform_value is None
    assert np.array_equal(field_pow(base, p_var), base ** p_var.values)
    assert np.array_equal(field_pow(base, p_var, shift=-1.0),
                          base ** (p_var.values - 1.0))


def test_exponent_presets():
    mesh = interval_mesh(20)
    c = exponent_preset('constant', mesh, value=2.5)
    assert c.uniform_value == 2.5
    a = exponent_preset('affine', mesh, base=2.0, slope=0.5)
    mids = mesh.element_midpoints[:, 0]
    assert np.allclose(a.values, 2.0 + 0.5 * mids)
    s = exponent_preset('sin-bump', mesh, base=2.0, amplitude=0.5)
    assert np.allclose(s.values, 2.0 + 0.5 * np.sin(np.pi * mids))
    with pytest.raises(ValueError, match='unknown exponent preset'):
        exponent_preset('cubic', mesh)


def test_wrong_length_rejected():
    mesh = interval_mesh(8)
    with pytest.raises(ValueError):
        ExponentField(mesh, np.full(9, 2.0))


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=1.001, max_value=50.0),
       st.floats(min_value=0.0, max_value=5.0))
def test_sampled_extremes_bracket_samples(base, slope):
    mesh = interval_mesh(16)
    p = build_exponent_field(lambda x: base + slope * x, mesh)
    assert p.p_minus > 1.0
    assert np.all(p.values >= p.p_minus)
    assert np.all(p.values <= p.p_plus)
