"""Energy, operator residual and functional derivative for sums of
variable-exponent Laplacians.

For an ordered list of exponent fields p_1..p_n on one mesh,

    J(u)    = sum_i integral (1/p_i(x)) |grad u|^{p_i(x)}
    <L(u),v> = sum_i integral |grad u|^{p_i(x)-2} grad u . grad v
    phi(u)  = J(u) - integral F(x, u)

discretized with P1 elements and one-point quadrature, so the duality
identity <L(u),u> = sum_i integral |grad u|^{p_i(x)} holds exactly at the
discrete level.  Also provides the two elementary vector inequalities that
make L strictly monotone.
"""

import numpy as np

from .exponents import ExponentField, field_pow
from .mesh import GridFunction, require_same_mesh

__all__ = [
    'EnergySpec', 'DualVector', 'energy_J', 'residual_L', 'phi',
    'phi_grad', 'vector_inequality_gap', 'monotonicity_gap',
    'duality_pairing',
]


class EnergySpec:
    """Ordered exponent fields plus an optional right-hand nonlinearity.

    Accepts any n >= 1 fields; the two-operator problem is n = 2.
    """

    def __init__(self, exponents, nonlinearity=None):
        exponents = tuple(exponents)
        if not exponents:
            raise ValueError('energy spec needs at least one exponent field')
        for p in exponents:
            if not isinstance(p, ExponentField):
                raise TypeError('exponents must be ExponentField instances')
        require_same_mesh(*exponents)
        self.exponents = exponents
        self.nonlinearity = nonlinearity
        self.mesh = exponents[0].mesh

    @property
    def mesh_id(self):
        return self.mesh.mesh_id

    def max_field(self):
        """Elementwise max over all exponent fields (the top exponent)."""
        vals = np.maximum.reduce([p.values for p in self.exponents])
        return ExponentField(self.mesh, vals)

    def min_field(self):
        """Elementwise min over all exponent fields (the bottom exponent)."""
        vals = np.minimum.reduce([p.values for p in self.exponents])
        return ExponentField(self.mesh, vals)

    def with_nonlinearity(self, nl):
        return EnergySpec(self.exponents, nl)

    def __repr__(self):
        ranges = ', '.join('[%.4g, %.4g]' % (p.p_minus, p.p_plus)
                           for p in self.exponents)
        return 'EnergySpec(n=%d, ranges=%s)' % (len(self.exponents), ranges)


class DualVector:
    """Functional on the zero-trace P1 space, one component per node.

    Boundary components are structurally zero (the functional only acts on
    interior degrees of freedom); norm() is the Euclidean norm of the
    components, a mesh-dependent surrogate for the dual norm.
    """

    def __init__(self, mesh, components):
        self.mesh = mesh
        self.components = np.asarray(components, dtype=float)
        if self.components.shape != (mesh.n_nodes,):
            raise ValueError('expected %d components, got %s'
                             % (mesh.n_nodes, self.components.shape))
        if np.any(self.components[mesh.boundary_mask] != 0.0):
            raise ValueError('dual vector has nonzero boundary components')

    @property
    def mesh_id(self):
        return self.mesh.mesh_id

    def norm(self):
        return float(np.linalg.norm(self.components))

    def __add__(self, other):
        require_same_mesh(self, other)
        return DualVector(self.mesh, self.components + other.components)

    def __sub__(self, other):
        require_same_mesh(self, other)
        return DualVector(self.mesh, self.components - other.components)

    def __mul__(self, scalar):
        return DualVector(self.mesh, self.components * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return DualVector(self.mesh, -self.components)

    def __repr__(self):
        return 'DualVector(mesh_id=%d, norm=%.3g)' % (self.mesh_id, self.norm())


def _gradient_magnitudes(u):
    grads = u.mesh.element_gradients(u.values)
    return grads, np.linalg.norm(grads, axis=1)


def energy_J(u, spec):
    """J(u) = sum_i integral (1/p_i(x)) |grad u|^{p_i(x)}."""
    require_same_mesh(u, spec)
    _, mags = _gradient_magnitudes(u)
    measures = u.mesh.element_measures
    total = 0.0
    for p in spec.exponents:
        total += float(np.sum(measures / p.values * field_pow(mags, p)))
    return total


def _flux_coefficients(mags, spec):
    """sum_i |grad u|^{p_i - 2} per element, with the degenerate value 0
    where grad u vanishes (the limit for every p > 1)."""
    coeff = np.zeros_like(mags)
    pos = mags > 0.0
    mpos = mags[pos]
    for p in spec.exponents:
        if p.uniform_value is not None:
            coeff[pos] += mpos ** (p.uniform_value - 2.0)
        else:
            coeff[pos] += mpos ** (p.values[pos] - 2.0)
    return coeff


def residual_L(u, spec):
    """Assembled dual vector of <L(u), .> on the interior hat basis."""
    require_same_mesh(u, spec)
    mesh = u.mesh
    grads, mags = _gradient_magnitudes(u)
    coeff = _flux_coefficients(mags, spec) * mesh.element_measures
    # r_j = sum_e coeff_e * grad u|_e . grad phi_j|_e
    flux = coeff[:, None] * grads
    contrib = np.einsum('evd,ed->ev', mesh.basis_gradients, flux)
    r = np.zeros(mesh.n_nodes)
    np.add.at(r, mesh.elements, contrib)
    if not np.all(np.isfinite(r)):
        raise ArithmeticError('operator assembly overflowed')
    r[mesh.boundary_mask] = 0.0
    return DualVector(mesh, r)


def _load_vector(nl, u):
    """Dual vector of v -> integral f(x, u) v under one-point quadrature.

    The centroid value of a P1 function is the vertex mean, so each vertex
    of an element receives measure * f(mid, u_mid) / verts_per_element.
    """
    mesh = u.mesh
    mids = mesh.element_midpoints
    coords = tuple(mids[:, d] for d in range(mesh.dim))
    u_mid = mesh.element_values(u.values)
    fvals = np.asarray(nl(coords, u_mid), dtype=float)
    fvals = np.broadcast_to(fvals, (mesh.n_elements,))
    if not np.all(np.isfinite(fvals)):
        bad = int(np.flatnonzero(~np.isfinite(fvals))[0])
        raise ArithmeticError(
            'nonlinearity overflow at element %d (u=%.6g)' % (bad, u_mid[bad]))
    weights = mesh.element_measures * fvals / mesh.verts_per_element
    b = np.zeros(mesh.n_nodes)
    np.add.at(b, mesh.elements, np.repeat(weights[:, None],
                                          mesh.verts_per_element, axis=1))
    b[mesh.boundary_mask] = 0.0
    return DualVector(mesh, b)


def phi(u, spec):
    """phi(u) = J(u) - integral F(x, u) with F the primitive of f."""
    if spec.nonlinearity is None:
        raise ValueError('energy spec has no nonlinearity attached')
    require_same_mesh(u, spec)
    mesh = u.mesh
    mids = mesh.element_midpoints
    coords = tuple(mids[:, d] for d in range(mesh.dim))
    u_mid = mesh.element_values(u.values)
    Fvals = np.asarray(spec.nonlinearity.primitive_at(coords, u_mid), dtype=float)
    Fvals = np.broadcast_to(Fvals, (mesh.n_elements,))
    if not np.all(np.isfinite(Fvals)):
        raise ArithmeticError('primitive overflowed during phi evaluation')
    return energy_J(u, spec) - float(np.sum(mesh.element_measures * Fvals))


def phi_grad(u, spec):
    """Derivative of phi as a dual vector: residual_L(u) minus the load
    vector of f(x, u).  A discrete weak solution has norm <= tol."""
    if spec.nonlinearity is None:
        raise ValueError('energy spec has no nonlinearity attached')
    return residual_L(u, spec) - _load_vector(spec.nonlinearity, u)


def vector_inequality_gap(xi, eta, p):
    """Both sides of the elementary monotonicity inequality.

    With D = (|xi|^{p-2}xi - |eta|^{p-2}eta) . (xi - eta):
      p >= 2:    lhs = D,                                rhs = |xi-eta|^p / 2^p
      1 < p < 2: lhs = D * (|xi|^p + |eta|^p)^{(2-p)/p}, rhs = (p-1)|xi-eta|^2
    Contract: lhs >= rhs, with equality exactly at xi = eta.

    Accepts a single vector pair (1D arrays, returns two floats) or a
    batch with one vector per row (2D arrays, returns two 1D arrays).
    """
    p = float(p)
    if p <= 1.0:
        raise ValueError('inequality needs p > 1, got %.17g' % p)
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if xi.shape != eta.shape:
        raise ValueError('xi and eta must have the same shape')
    single = xi.ndim == 1
    xi = xi[None, :] if single else xi
    eta = eta[None, :] if single else eta
    nxi = np.linalg.norm(xi, axis=1)
    neta = np.linalg.norm(eta, axis=1)
    # 0^(p-2) is infinite for p < 2; the flux itself has limit 0
    safe_xi = np.where(nxi > 0.0, nxi, 1.0)
    safe_eta = np.where(neta > 0.0, neta, 1.0)
    cxi = np.where(nxi > 0.0, safe_xi ** (p - 2.0), 0.0)
    ceta = np.where(neta > 0.0, safe_eta ** (p - 2.0), 0.0)
    diff = xi - eta
    dot = np.sum((cxi[:, None] * xi - ceta[:, None] * eta) * diff, axis=1)
    ndiff = np.linalg.norm(diff, axis=1)
    if p >= 2.0:
        lhs, rhs = dot, ndiff ** p / 2.0 ** p
    else:
        lhs = dot * (nxi ** p + neta ** p) ** ((2.0 - p) / p)
        rhs = (p - 1.0) * ndiff ** 2
    if single:
        return float(lhs[0]), float(rhs[0])
    return lhs, rhs


def duality_pairing(r, v):
    """<r, v> = sum of components times nodal values."""
    require_same_mesh(r, v)
    return float(np.sum(r.components * v.values))


def monotonicity_gap(u, v, spec):
    """<L(u) - L(v), u - v>; nonnegative, zero only for equal gradients."""
    require_same_mesh(u, v, spec)
    return duality_pairing(residual_L(u, spec) - residual_L(v, spec), u - v)
