"""Modulars, Luxemburg norms and related pairings over grid functions.

The modular of u against an exponent field p is the one-point quadrature
of |u|^{p(x)}.  The Luxemburg norm is the unique lambda > 0 with
rho(u/lambda) = 1, located by bisection on the strictly decreasing map
lambda -> rho(u/lambda); the zero function short-circuits to 0.
"""

from dataclasses import dataclass

import numpy as np

from .exponents import conjugate, field_pow
from .mesh import GridFunction, require_same_mesh

__all__ = [
    'NormResult', 'NormBracketError', 'modular', 'luxemburg_norm',
    'holder_pairing', 'nemytskii', 'poincare_ratio', 'gradient_norm',
    'sum_space_norm',
]

DEFAULT_NORM_TOL = 1e-10
MAX_BISECTIONS = 200
BRACKET_CAP = 2.0 ** 500


class NormBracketError(ArithmeticError):
    """Bracket expansion for the Luxemburg norm exceeded its cap."""


@dataclass(frozen=True)
class NormResult:
    """Luxemburg norm value with root-finder diagnostics."""
    value: float
    iterations: int
    residual: float

    def __float__(self):
        return self.value


def _element_field(u, p):
    """Per-element samples of u: midpoint values of a GridFunction, or a
    per-element array used as-is (e.g. gradient magnitudes)."""
    if isinstance(u, GridFunction):
        require_same_mesh(u, p)
        return u.mesh.element_values(u.values)
    vals = np.asarray(u, dtype=float)
    if vals.shape != (p.mesh.n_elements,):
        raise ValueError('expected per-element field of length %d, got %s'
                         % (p.mesh.n_elements, vals.shape))
    return vals


def modular(u, p):
    """rho(u) = integral of |u|^{p(x)} by one-point quadrature."""
    vals = np.abs(_element_field(u, p))
    return float(np.sum(p.mesh.element_measures * field_pow(vals, p)))


def luxemburg_norm(u, p, tol=DEFAULT_NORM_TOL):
    """Luxemburg norm inf{lambda > 0 : rho(u/lambda) <= 1}.

    Bisection on lambda -> rho(u/lambda), which is continuous and strictly
    decreasing for u != 0, so the root of rho(u/lambda) = 1 is unique.
    The bracket grows geometrically from lambda = 1 in whichever direction
    is needed; growth past BRACKET_CAP signals overflow-scale input.
    """
    if tol <= 0:
        raise ValueError('tol must be positive')
    vals = np.abs(_element_field(u, p))
    if not np.all(np.isfinite(vals)):
        raise NormBracketError('input has non-finite samples')
    if not np.any(vals > 0.0):
        return NormResult(0.0, 0, 0.0)
    measures = p.mesh.element_measures

    def rho_scaled(lam):
        # an infinite modular mid-expansion just means "keep growing lam"
        with np.errstate(over='ignore'):
            return float(np.sum(measures * field_pow(vals / lam, p)))

    lo = hi = 1.0
    r = rho_scaled(1.0)
    iterations = 0
    if r > 1.0:
        while rho_scaled(hi) > 1.0:
            hi *= 2.0
            iterations += 1
            if hi > BRACKET_CAP:
                raise NormBracketError(
                    'norm bracket exceeded cap %.3g (overflow-scale input)'
                    % BRACKET_CAP)
        lo = hi / 2.0
    elif r < 1.0:
        while rho_scaled(lo) < 1.0:
            lo /= 2.0
            iterations += 1
            if lo < 1.0 / BRACKET_CAP:
                # rho(u/lam) -> infinity as lam -> 0 for u != 0, so this
                # only triggers on denormal-scale inputs
                raise NormBracketError(
                    'norm bracket fell below cap (degenerate input scale)')
        hi = lo * 2.0
    else:
        return NormResult(1.0, iterations, 0.0)

    lam = 0.5 * (lo + hi)
    resid = abs(rho_scaled(lam) - 1.0)
    while resid > tol and iterations < MAX_BISECTIONS:
        if rho_scaled(lam) > 1.0:
            lo = lam
        else:
            hi = lam
        lam = 0.5 * (lo + hi)
        resid = abs(rho_scaled(lam) - 1.0)
        iterations += 1
    return NormResult(lam, iterations, resid)


def holder_pairing(u, v, p, tol=DEFAULT_NORM_TOL):
    """Two sides of the generalized Hölder bound.

    lhs = |integral of u*v|, rhs = (1/p_minus + 1/q_minus) |u|_p |v|_q
    with q the conjugate exponent field.  Contract: lhs <= rhs (+ slack).
    """
    q = conjugate(p)
    uf = _element_field(u, p)
    vf = _element_field(v, q)
    lhs = abs(float(np.sum(p.mesh.element_measures * uf * vf)))
    coeff = 1.0 / p.p_minus + 1.0 / q.p_minus
    rhs = coeff * luxemburg_norm(u, p, tol).value * luxemburg_norm(v, q, tol).value
    return lhs, rhs


def nemytskii(f, u):
    """Pointwise composition x -> f(x, u(x)) at the nodes of u."""
    mesh = u.mesh
    coords = tuple(mesh.nodes[:, d] for d in range(mesh.dim))
    values = np.asarray(f(coords, u.values), dtype=float)
    values = np.broadcast_to(values, (mesh.n_nodes,)).copy()
    if not np.all(np.isfinite(values)):
        bad = int(np.flatnonzero(~np.isfinite(values))[0])
        raise ArithmeticError(
            'nonlinearity overflow at node %d (position %s, u=%.6g)'
            % (bad, mesh.nodes[bad], u.values[bad]))
    return GridFunction(mesh, values)


def gradient_norm(u, p, tol=DEFAULT_NORM_TOL):
    """Luxemburg norm of |grad u| (per-element gradient magnitudes)."""
    require_same_mesh(u, p)
    mags = np.linalg.norm(u.mesh.element_gradients(u.values), axis=1)
    return luxemburg_norm(mags, p, tol)


def sum_space_norm(u, exponents, tol=DEFAULT_NORM_TOL):
    """Norm of the intersection space: sum of |grad u|_{p_i} over fields."""
    return float(sum(gradient_norm(u, p, tol).value for p in exponents))


def poincare_ratio(u, p, tol=DEFAULT_NORM_TOL):
    """|u|_{p(x)} / |grad u|_{p(x)} for boundary-compliant nonzero u.

    Diagnostic for the discrete Poincaré constant: the sup of this ratio
    over the zero-trace P1 space bounds |u|_p <= C |grad u|_p.
    """
    if not u.is_dirichlet_compliant(tol=0.0):
        raise ValueError('poincare_ratio needs zero boundary values')
    if not np.any(u.values != 0.0):
        raise ValueError('poincare_ratio undefined for the zero function')
    num = luxemburg_norm(u, p, tol).value
    den = gradient_norm(u, p, tol).value
    return num / den
