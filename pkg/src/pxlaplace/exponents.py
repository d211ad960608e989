"""Variable exponents sampled per mesh element.

An ExponentField carries one exponent value per element (a continuous
exponent evaluated at segment midpoints / triangle centroids), with cached
extremes p_minus and p_plus.  Derived fields: elementwise max/min of two
exponents, the conjugate p/(p-1), and the Sobolev conjugate N*p/(N-p)
with an explicit infinity flag where p >= N.
"""

import numpy as np

from .mesh import Mesh, require_same_mesh

__all__ = [
    'ExponentField', 'ExponentRangeError', 'build_exponent_field',
    'constant_exponent', 'exponent_preset', 'EXPONENT_PRESETS',
    'pointwise_max_min', 'conjugate', 'sobolev_conjugate', 'field_pow',
]


def field_pow(base, p, shift=0.0):
    """base ** (p + shift) elementwise, using the scalar exponent fast
    path when the field is constant."""
    if p.uniform_value is not None:
        return base ** (p.uniform_value + shift)
    return base ** (p.values + shift)


class ExponentRangeError(ValueError):
    """An exponent sample escaped the admissible range (1, infinity)."""


class ExponentField:
    """Per-element samples of a continuous exponent with inf p > 1.

    Samples live at element midpoints (1D) or centroids (2D), one per
    element, matching the one-point quadrature used everywhere else: the
    discrete modular of a P1 gradient is then exactly
    sum_e measure(e) * |grad u|_e ^ p_e.

    p_minus/p_plus are sample extrema, a discretization of the min/max
    over the closed domain.  Infinite samples are only legal in fields
    produced by sobolev_conjugate (allow_infinite), where they flag
    "every finite exponent is subcritical here".
    """

    def __init__(self, mesh, values, allow_infinite=False):
        if not isinstance(mesh, Mesh):
            raise TypeError('mesh must be a Mesh')
        self.mesh = mesh
        self.values = np.asarray(values, dtype=float)
        if self.values.shape != (mesh.n_elements,):
            raise ValueError('expected one exponent per element (%d), got %s'
                             % (mesh.n_elements, self.values.shape))
        if np.any(np.isnan(self.values)):
            bad = int(np.flatnonzero(np.isnan(self.values))[0])
            raise ExponentRangeError('exponent sample is NaN at element %d' % bad)
        if not allow_infinite and not np.all(np.isfinite(self.values)):
            bad = int(np.flatnonzero(~np.isfinite(self.values))[0])
            raise ExponentRangeError(
                'exponent sample is infinite at element %d' % bad)
        if np.min(self.values) <= 1.0:
            bad = int(np.argmin(self.values))
            raise ExponentRangeError(
                'exponent not in C+ (needs p > 1 everywhere): sample %.17g '
                'at element %d' % (float(self.values[bad]), bad))
        self.values.setflags(write=False)
        # scalar fast path: array ** python-float hits numpy's optimized
        # powers (2.0 in particular), array ** array never does
        vmin, vmax = float(np.min(self.values)), float(np.max(self.values))
        self.uniform_value = vmin if vmin == vmax else None

    @property
    def mesh_id(self):
        return self.mesh.mesh_id

    @property
    def p_minus(self):
        return float(np.min(self.values))

    @property
    def p_plus(self):
        return float(np.max(self.values))

    def is_constant(self, tol=0.0):
        return self.p_plus - self.p_minus <= tol

    def __repr__(self):
        return ('ExponentField(mesh_id=%d, p_minus=%.6g, p_plus=%.6g)'
                % (self.mesh_id, self.p_minus, self.p_plus))


def build_exponent_field(sampler, mesh):
    """Sample a continuous exponent at element midpoints/centroids.

    sampler takes per-dimension coordinate arrays (x in 1D, x, y in 2D)
    and may return a scalar (constant exponent) or a per-element array.
    """
    mids = mesh.element_midpoints
    coords = [mids[:, d] for d in range(mesh.dim)]
    values = np.asarray(sampler(*coords), dtype=float)
    values = np.broadcast_to(values, (mesh.n_elements,)).copy()
    return ExponentField(mesh, values)


def constant_exponent(p, mesh):
    """Constant exponent field p(x) = p."""
    p = float(p)
    return ExponentField(mesh, np.full(mesh.n_elements, p))


def _preset_constant(value=2.0):
    value = float(value)
    return lambda *coords: np.full_like(coords[0], value)


def _preset_affine(base=2.0, slope=1.0, slope_y=0.0):
    base, slope, slope_y = float(base), float(slope), float(slope_y)

    def sampler(*coords):
        out = base + slope * coords[0]
        if len(coords) > 1:
            out = out + slope_y * coords[1]
        return out
    return sampler


def _preset_sin_bump(base=2.0, amplitude=0.5):
    base, amplitude = float(base), float(amplitude)

    def sampler(*coords):
        bump = np.ones_like(coords[0])
        for c in coords:
            bump = bump * np.sin(np.pi * c)
        return base + amplitude * bump
    return sampler


EXPONENT_PRESETS = {
    'constant': _preset_constant,
    'affine': _preset_affine,
    'sin-bump': _preset_sin_bump,
}


def exponent_preset(name, mesh, **params):
    """Named exponent samplers, shared by configs and property suites.

    constant: value
    affine:   base + slope*x (+ slope_y*y in 2D)
    sin-bump: base + amplitude * prod_d sin(pi x_d)
    """
    try:
        factory = EXPONENT_PRESETS[name]
    except KeyError:
        raise ValueError('unknown exponent preset %r; choices: %s'
                         % (name, ', '.join(sorted(EXPONENT_PRESETS)))) from None
    return build_exponent_field(factory(**params), mesh)


def pointwise_max_min(p1, p2):
    """Elementwise (max, min) of two exponent fields on the same mesh."""
    require_same_mesh(p1, p2)
    p_max = ExponentField(p1.mesh, np.maximum(p1.values, p2.values))
    p_min = ExponentField(p1.mesh, np.minimum(p1.values, p2.values))
    return p_max, p_min


def conjugate(p):
    """Pointwise Hölder conjugate q with 1/p + 1/q = 1, i.e. q = p/(p-1)."""
    if not np.all(np.isfinite(p.values)):
        raise ExponentRangeError('conjugate needs a finite exponent field')
    return ExponentField(p.mesh, p.values / (p.values - 1.0))


def sobolev_conjugate(p, dim=None):
    """Sobolev conjugate N*p/(N-p) where p < N, +inf elsewhere.

    The infinite branch is the actual IEEE infinity, never a large finite
    sentinel, so subcriticality comparisons alpha < p_star treat it as
    "always satisfied".
    """
    if dim is None:
        dim = p.mesh.dim
    star = np.full(p.mesh.n_elements, np.inf)
    finite = p.values < dim
    star[finite] = dim * p.values[finite] / (dim - p.values[finite])
    return ExponentField(p.mesh, star, allow_infinite=True)
