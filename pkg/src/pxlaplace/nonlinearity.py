"""Right-hand-side nonlinearities f(x,t), their primitives, and executable
checkers for the growth, coercivity, superlinearity and symmetry conditions
the solvers rely on.

The analytic hypotheses are semi-decidable; every checker samples a
deterministic grid (x at element midpoints, t log-spaced over both signs)
and returns a report with pass/fail plus explicit witnesses.  A passing
report is evidence, never a proof.

Built-in kinds:
    power  f(x,t) = kappa |t|^{q-2} t
    load   f(x,t) = g(x), t-independent
    sum    load + power
    expr   arbitrary expression strings in x[, y], t
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .exponents import ExponentField

__all__ = [
    'Nonlinearity', 'CheckReport', 'SampleGrid', 'default_sample_grid',
    'default_origin_sequence', 'primitive_F', 'check_growth_f0',
    'check_subcritical_coercive', 'check_ar_condition',
    'check_small_o_origin', 'check_odd', 'power_nonlinearity',
    'load_nonlinearity', 'sum_nonlinearity', 'expr_nonlinearity',
    'constant_load', 'affine_load', 'sin_bump_load',
]

ODD_TOL = 1e-12
ORIGIN_RATIO_THRESHOLD = 1e-3
SIMPSON_TOL = 1e-10

_EXPR_NAMES = {name: getattr(np, name) for name in
               ('sin', 'cos', 'tan', 'exp', 'log', 'sqrt', 'abs', 'sign',
                'arctan', 'sinh', 'cosh', 'tanh', 'minimum', 'maximum')}
_EXPR_NAMES['pi'] = math.pi


def _compile_expr(expr, variables):
    code = compile(expr, '<nonlinearity>', 'eval')
    for name in code.co_names:
        if name not in _EXPR_NAMES and name not in variables:
            raise ValueError('expression uses unknown name %r '
                             '(allowed: %s and %s)'
                             % (name, sorted(_EXPR_NAMES), variables))

    def evaluate(**bindings):
        ns = dict(_EXPR_NAMES)
        ns.update(bindings)
        return eval(code, {'__builtins__': {}}, ns)

    return evaluate


def _adaptive_simpson(fn, a, b, tol=SIMPSON_TOL, max_depth=48):
    """Adaptive Simpson quadrature of fn over [a, b].

    Classic interval-halving with the |S2 - S1|/15 error estimate;
    exceeding max_depth on any subinterval raises (non-convergence).
    """
    if a == b:
        return 0.0

    def simpson(lo, hi, flo, fmid, fhi):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, hi, flo, fmid, fhi, whole, eps, depth):
        mid = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        flmid = fn(lmid)
        frmid = fn(rmid)
        left = simpson(lo, mid, flo, flmid, fmid)
        right = simpson(mid, hi, fmid, frmid, fhi)
        if abs(left + right - whole) <= 15.0 * eps:
            return left + right + (left + right - whole) / 15.0
        if depth >= max_depth:
            raise ArithmeticError(
                'adaptive quadrature failed to converge on [%g, %g]' % (lo, hi))
        return (recurse(lo, mid, flo, flmid, fmid, left, 0.5 * eps, depth + 1)
                + recurse(mid, hi, fmid, frmid, fhi, right, 0.5 * eps, depth + 1))

    fa, fm, fb = fn(a), fn(0.5 * (a + b)), fn(b)
    whole = simpson(a, b, fa, fm, fb)
    return recurse(a, b, fa, fm, fb, whole, tol, 0)


class Nonlinearity:
    """A Caratheodory right-hand side f(x,t) with declared growth data.

    eval_fn(coords, t) must broadcast over a tuple of coordinate arrays
    and a t array.  primitive_fn, when given, is the closed-form
    F(x,t) = integral of f(x,s) ds from 0 to t and is cross-checked
    against eval_fn by central differences at construction; without it,
    primitives fall back to adaptive Simpson quadrature per point.

    Declared parameters (all optional, checkers demand what they need):
    C1, C2 >= 0 and alpha for the polynomial growth bound
    |f| <= C1 + C2 |t|^{alpha-1}; beta for the sublinear variant; theta > 1
    and M > 0 for superlinear descent; odd for the symmetry flag.
    """

    def __init__(self, kind, eval_fn, primitive_fn=None, C1=None, C2=None,
                 alpha=None, beta=None, theta=None, M=None, odd=None,
                 params=None, check_primitive=True):
        self.kind = kind
        self.eval_fn = eval_fn
        self.primitive_fn = primitive_fn
        for name, value, low in (('C1', C1, 0.0), ('C2', C2, 0.0),
                                 ('theta', theta, 1.0), ('M', M, 0.0)):
            if value is not None and not value >= low:
                raise ValueError('%s must be >= %g when declared, got %r'
                                 % (name, low, value))
        if theta is not None and theta <= 1.0:
            raise ValueError('theta must exceed 1 when declared')
        if M is not None and M <= 0.0:
            raise ValueError('M must be positive when declared')
        self.C1 = C1
        self.C2 = C2
        self.alpha = alpha
        self.beta = beta
        self.theta = theta
        self.M = M
        self.odd = odd
        self.params = dict(params or {})
        if primitive_fn is not None and check_primitive:
            self._verify_primitive()

    def __call__(self, coords, t):
        return self.eval_fn(coords, np.asarray(t, dtype=float))

    def primitive_at(self, coords, t):
        """F(x,t): closed form when available, else adaptive Simpson."""
        t = np.asarray(t, dtype=float)
        if self.primitive_fn is not None:
            return self.primitive_fn(coords, t)
        coords = tuple(np.broadcast_to(c, t.shape) for c in coords)
        flat_t = t.ravel()
        flat_coords = [c.ravel() for c in coords]
        out = np.empty(flat_t.shape)
        for i, ti in enumerate(flat_t):
            point = tuple(c[i] for c in flat_coords)
            out[i] = _adaptive_simpson(lambda s: self.eval_fn(point, s), 0.0, ti)
        return out.reshape(t.shape)

    def _verify_primitive(self):
        # central difference of F against f; retry with a y coordinate for
        # expressions that need two dimensions
        tvals = np.array([-1.7, -0.6, 0.8, 1.3, 2.4])
        for coords in ((np.array([0.3, 0.55, 0.7]),),
                       (np.array([0.3, 0.55, 0.7]), np.array([0.2, 0.5, 0.8]))):
            try:
                xo = tuple(c[:, None] for c in coords)
                f_here = np.broadcast_to(self(xo, tvals[None, :]),
                                         (3, tvals.size))
                h = 1e-6
                fd = (np.asarray(self.primitive_fn(xo, tvals[None, :] + h))
                      - np.asarray(self.primitive_fn(xo, tvals[None, :] - h))) / (2 * h)
                fd = np.broadcast_to(fd, (3, tvals.size))
            except NameError:
                continue
            err = np.abs(fd - f_here) / (1.0 + np.abs(f_here))
            if np.max(err) > 1e-6:
                raise ValueError(
                    'declared primitive disagrees with f: relative error '
                    '%.3g at t=%.3g' % (float(np.max(err)),
                                        float(tvals[np.argmax(np.max(err, axis=0))])))
            return
        raise ValueError('could not evaluate nonlinearity on 1D or 2D samples')

    def alpha_values(self, mesh):
        """Per-element alpha samples (constant broadcast or field values)."""
        return _exponent_values(self.alpha, 'alpha', mesh)

    def beta_values(self, mesh):
        return _exponent_values(self.beta, 'beta', mesh)

    def __repr__(self):
        return 'Nonlinearity(kind=%r)' % self.kind


def _exponent_values(spec_value, name, mesh):
    if spec_value is None:
        raise ValueError('%s undeclared on this nonlinearity' % name)
    if isinstance(spec_value, ExponentField):
        if spec_value.mesh_id != mesh.mesh_id:
            raise ValueError('%s field lives on a different mesh' % name)
        return spec_value.values
    return np.full(mesh.n_elements, float(spec_value))


@dataclass(frozen=True)
class SampleGrid:
    """Deterministic sampling plan: positions plus signed t magnitudes."""
    coords: tuple
    t_values: np.ndarray
    seed: int = 0

    @property
    def n_points(self):
        return self.coords[0].size


def default_sample_grid(mesh, t_min=1e-6, t_max=1e3, n_magnitudes=37, seed=0):
    """x at element midpoints; t log-spaced in [t_min, t_max], both signs,
    plus t = 0."""
    mids = mesh.element_midpoints
    coords = tuple(mids[:, d] for d in range(mesh.dim))
    mags = np.logspace(math.log10(t_min), math.log10(t_max), n_magnitudes)
    t = np.concatenate([-mags[::-1], [0.0], mags])
    return SampleGrid(coords, t, seed)


def default_origin_sequence(t_start=1e-1, t_stop=1e-6, n=11):
    """Decreasing positive sequence tending to zero."""
    return np.logspace(math.log10(t_start), math.log10(t_stop), n)


@dataclass
class CheckReport:
    """Outcome of one condition checker on a sampling plan."""
    name: str
    passed: bool
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    seed: int = 0

    def as_dict(self):
        return {'name': self.name, 'passed': self.passed,
                'witnesses': self.witnesses, 'details': self.details,
                'seed': self.seed}


def _eval_on_grid(nl, grid):
    """f on the outer product grid, shape (n_points, n_t).

    Overflow while probing large t is informative (an infinite sample
    fails any finite bound), so it is not a warning condition.
    """
    xo = tuple(c[:, None] for c in grid.coords)
    t = grid.t_values[None, :]
    with np.errstate(over='ignore'):
        f = np.asarray(nl(xo, t), dtype=float)
    return np.broadcast_to(f, (grid.n_points, grid.t_values.size))


def primitive_F(nl, x, t):
    """F(x, t) at a single position x (scalar or coordinate tuple)."""
    coords = x if isinstance(x, tuple) else (x,)
    coords = tuple(np.asarray(c, dtype=float) for c in coords)
    return float(np.asarray(nl.primitive_at(coords, np.asarray(float(t)))))


def check_growth_f0(nl, pM_star, sample_grid):
    """Polynomial growth bound |f| <= C1 + C2 |t|^{alpha-1} on the grid,
    plus subcriticality alpha(x) < pM_star(x) at every element (an
    infinite critical exponent always passes)."""
    mesh = pM_star.mesh
    alpha = nl.alpha_values(mesh)
    if nl.C1 is None or nl.C2 is None:
        raise ValueError('C1/C2 undeclared on this nonlinearity')
    witnesses = []
    sub = alpha < pM_star.values
    if not np.all(sub):
        for e in np.flatnonzero(~sub)[:5]:
            witnesses.append({'element': int(e), 'alpha': float(alpha[e]),
                              'critical': float(pM_star.values[e]),
                              'reason': 'alpha not subcritical'})
    f = np.abs(_eval_on_grid(nl, sample_grid))
    absT = np.abs(sample_grid.t_values)[None, :]
    bound = nl.C1 + nl.C2 * absT ** (alpha[:, None] - 1.0)
    bad = f > bound * (1.0 + 1e-12)
    for i, j in zip(*np.nonzero(bad)):
        if len(witnesses) >= 10:
            break
        witnesses.append({'x': [float(c[i]) for c in sample_grid.coords],
                          't': float(sample_grid.t_values[j]),
                          'abs_f': float(f[i, j]), 'bound': float(bound[i, j]),
                          'reason': 'growth bound violated'})
    return CheckReport('growth_f0', not witnesses, witnesses,
                       {'alpha_minus': float(np.min(alpha)),
                        'alpha_plus': float(np.max(alpha)),
                        'samples': int(f.size)}, sample_grid.seed)


def check_subcritical_coercive(nl, pm, sample_grid=None):
    """Sublinear growth |f| <= C1 + C2 |t|^{beta-1} with beta_plus
    strictly below pm_minus (the coercivity regime)."""
    mesh = pm.mesh
    beta = nl.beta_values(mesh)
    if nl.C1 is None or nl.C2 is None:
        raise ValueError('C1/C2 undeclared on this nonlinearity')
    if sample_grid is None:
        sample_grid = default_sample_grid(mesh)
    beta_plus = float(np.max(beta))
    witnesses = []
    if np.min(beta) < 1.0:
        witnesses.append({'beta_minus': float(np.min(beta)),
                          'reason': 'beta must be >= 1'})
    if not beta_plus < pm.p_minus:
        witnesses.append({'beta_plus': beta_plus, 'pm_minus': pm.p_minus,
                          'reason': 'needs beta_plus < pm_minus strictly'})
    f = np.abs(_eval_on_grid(nl, sample_grid))
    absT = np.abs(sample_grid.t_values)[None, :]
    bound = nl.C1 + nl.C2 * absT ** (beta[:, None] - 1.0)
    bad = f > bound * (1.0 + 1e-12)
    for i, j in zip(*np.nonzero(bad)):
        if len(witnesses) >= 10:
            break
        witnesses.append({'x': [float(c[i]) for c in sample_grid.coords],
                          't': float(sample_grid.t_values[j]),
                          'abs_f': float(f[i, j]), 'bound': float(bound[i, j]),
                          'reason': 'growth bound violated'})
    return CheckReport('subcritical_coercive', not witnesses, witnesses,
                       {'beta_plus': beta_plus, 'pm_minus': pm.p_minus},
                       sample_grid.seed)


def check_ar_condition(nl, pM_plus, sample_grid):
    """Superlinear descent condition: theta > pM_plus and
    0 < theta F(x,t) <= t f(x,t) for every sample with |t| >= M."""
    if nl.theta is None:
        raise ValueError('theta undeclared on this nonlinearity')
    if nl.M is None:
        raise ValueError('M undeclared on this nonlinearity')
    witnesses = []
    if not nl.theta > pM_plus:
        witnesses.append({'theta': nl.theta, 'pM_plus': float(pM_plus),
                          'reason': 'needs theta > pM_plus strictly'})
    keep = np.abs(sample_grid.t_values) >= nl.M
    t = sample_grid.t_values[keep]
    xo = tuple(c[:, None] for c in sample_grid.coords)
    shape = (sample_grid.n_points, t.size)
    f = np.broadcast_to(np.asarray(nl(xo, t[None, :]), dtype=float), shape)
    F = np.broadcast_to(np.asarray(nl.primitive_at(xo, np.broadcast_to(
        t[None, :], shape)), dtype=float), shape)
    thetaF = nl.theta * F
    tf = t[None, :] * f
    slack = 1e-12 * (1.0 + np.abs(tf))
    bad = (thetaF <= 0.0) | (thetaF > tf + slack)
    for i, j in zip(*np.nonzero(bad)):
        if len(witnesses) >= 10:
            break
        witnesses.append({'x': [float(c[i]) for c in sample_grid.coords],
                          't': float(t[j]), 'theta_F': float(thetaF[i, j]),
                          't_f': float(tf[i, j]),
                          'reason': 'descent inequality violated'})
    return CheckReport('ar_condition', not witnesses, witnesses,
                       {'theta': nl.theta, 'M': nl.M,
                        'pM_plus': float(pM_plus), 'samples': int(f.size)},
                       sample_grid.seed)


def check_small_o_origin(nl, pM_plus, t_sequence, x_coords=None,
                         threshold=ORIGIN_RATIO_THRESHOLD):
    """f vanishing faster than |t|^{pM_plus - 1} at the origin: the worst
    ratio max_x |f(x,t)| / |t|^{pM_plus-1} must decrease along the given
    sequence and end below the threshold."""
    t_sequence = np.asarray(t_sequence, dtype=float)
    if t_sequence.ndim != 1 or t_sequence.size < 2:
        raise ValueError('t_sequence must hold at least two values')
    if np.any(t_sequence <= 0) or np.any(np.diff(t_sequence) >= 0):
        raise ValueError('t_sequence must be positive and strictly decreasing')
    if x_coords is None:
        x_coords = (np.linspace(0.05, 0.95, 19),)
    xo = tuple(np.asarray(c)[:, None] for c in x_coords)
    shape = (xo[0].size, t_sequence.size)
    ratios = np.empty(t_sequence.size)
    for sgn in (1.0, -1.0):
        f = np.broadcast_to(np.abs(np.asarray(
            nl(xo, sgn * t_sequence[None, :]), dtype=float)), shape)
        r = np.max(f, axis=0) / t_sequence ** (pM_plus - 1.0)
        ratios = r if sgn > 0 else np.maximum(ratios, r)
    witnesses = []
    rising = np.flatnonzero(np.diff(ratios) > 1e-9 * (1.0 + ratios[:-1]))
    for k in rising[:5]:
        witnesses.append({'t': float(t_sequence[k + 1]),
                          'ratio': float(ratios[k + 1]),
                          'previous_ratio': float(ratios[k]),
                          'reason': 'ratio not decreasing toward origin'})
    if ratios[-1] >= threshold:
        witnesses.append({'t': float(t_sequence[-1]),
                          'ratio': float(ratios[-1]), 'threshold': threshold,
                          'reason': 'final ratio above threshold'})
    return CheckReport('small_o_origin', not witnesses, witnesses,
                       {'pM_plus': float(pM_plus),
                        'final_ratio': float(ratios[-1]),
                        'threshold': threshold})


def check_odd(nl, sample_grid, tol=ODD_TOL):
    """Odd symmetry f(x,-t) = -f(x,t) on the grid, within tol scaled by
    the magnitude of f."""
    xo = tuple(c[:, None] for c in sample_grid.coords)
    t = sample_grid.t_values[None, :]
    shape = (sample_grid.n_points, sample_grid.t_values.size)
    f_pos = np.broadcast_to(np.asarray(nl(xo, t), dtype=float), shape)
    f_neg = np.broadcast_to(np.asarray(nl(xo, -t), dtype=float), shape)
    err = np.abs(f_pos + f_neg)
    bad = err > tol * (1.0 + np.abs(f_pos))
    witnesses = []
    for i, j in zip(*np.nonzero(bad)):
        if len(witnesses) >= 10:
            break
        witnesses.append({'x': [float(c[i]) for c in sample_grid.coords],
                          't': float(sample_grid.t_values[j]),
                          'f_plus_reflection': float(f_pos[i, j] + f_neg[i, j]),
                          'reason': 'odd symmetry violated'})
    return CheckReport('odd_symmetry', not witnesses, witnesses,
                       {'max_defect': float(np.max(err)),
                        'samples': int(err.size)}, sample_grid.seed)


# ---------------------------------------------------------------------------
# built-in kinds

def power_nonlinearity(q, kappa=1.0):
    """f(x,t) = kappa |t|^{q-2} t with primitive kappa |t|^q / q."""
    q = float(q)
    kappa = float(kappa)
    if q <= 1.0:
        raise ValueError('power kind needs q > 1')
    if kappa <= 0.0:
        raise ValueError('power kind needs kappa > 0')

    def f(coords, t):
        at = np.abs(t)
        # 0^(q-2) at t=0 would be inf for q < 2; the product limit is 0
        safe = np.where(at > 0.0, at, 1.0)
        with np.errstate(over='ignore'):
            return kappa * np.where(at > 0.0, safe ** (q - 2.0) * t, 0.0)

    def F(coords, t):
        with np.errstate(over='ignore'):
            return kappa / q * np.abs(t) ** q

    return Nonlinearity('power', f, F, C1=0.0, C2=kappa, alpha=q, beta=q,
                        theta=q, M=1.0, odd=True,
                        params={'q': q, 'kappa': kappa})


def _profile_constant(value):
    value = float(value)
    return (lambda coords: np.full_like(np.asarray(coords[0], dtype=float),
                                        value)), abs(value)


def _profile_affine(base, slope):
    base, slope = float(base), float(slope)
    sup = max(abs(base), abs(base + slope))  # extremes of an affine map on [0,1]
    return (lambda coords: base + slope * np.asarray(coords[0], dtype=float)), sup


def _profile_sin_bump(amplitude, base=0.0):
    amplitude, base = float(amplitude), float(base)

    def g(coords):
        out = np.full_like(np.asarray(coords[0], dtype=float), amplitude)
        for c in coords:
            out = out * np.sin(math.pi * np.asarray(c, dtype=float))
        return base + out

    return g, abs(base) + abs(amplitude)


_PROFILES = {'constant': _profile_constant, 'affine': _profile_affine,
             'sin-bump': _profile_sin_bump}


def _build_profile(preset, params):
    if preset not in _PROFILES:
        raise ValueError('unknown load profile %r (choose from %s)'
                         % (preset, sorted(_PROFILES)))
    return _PROFILES[preset](**params)


def load_nonlinearity(preset='constant', **params):
    """t-independent right-hand side f(x,t) = g(x); F = g(x) t."""
    g, sup = _build_profile(preset, params)

    def f(coords, t):
        return np.broadcast_to(g(coords), np.broadcast_shapes(
            np.shape(coords[0]), np.shape(t))).copy()

    def F(coords, t):
        return g(coords) * t

    return Nonlinearity('load', f, F, C1=sup, C2=0.0, alpha=2.0, beta=1.0,
                        odd=False, params={'profile': preset, **params})


def constant_load(value):
    return load_nonlinearity('constant', value=value)


def affine_load(base, slope):
    return load_nonlinearity('affine', base=base, slope=slope)


def sin_bump_load(amplitude, base=0.0):
    return load_nonlinearity('sin-bump', amplitude=amplitude, base=base)


def sum_nonlinearity(q, kappa=1.0, preset='constant', **params):
    """f(x,t) = g(x) + kappa |t|^{q-2} t (load plus power)."""
    power = power_nonlinearity(q, kappa)
    g, sup = _build_profile(preset, params)

    def f(coords, t):
        return g(coords) + power(coords, t)

    def F(coords, t):
        return g(coords) * t + power.primitive_fn(coords, t)

    return Nonlinearity('sum', f, F, C1=sup, C2=kappa, alpha=max(2.0, q),
                        beta=q, odd=False,
                        params={'q': q, 'kappa': kappa, 'profile': preset,
                                **params})


def expr_nonlinearity(expr, primitive_expr=None, **declared):
    """f from an expression string in x[, y], t (numpy semantics).

    primitive_expr, when given, must be the exact t-antiderivative with
    F(x,0) = 0; it is cross-checked numerically.  Growth parameters are
    whatever the caller declares.
    """
    fe = _compile_expr(expr, ('x', 'y', 't'))

    def f(coords, t):
        bindings = {'x': coords[0], 't': t}
        if len(coords) > 1:
            bindings['y'] = coords[1]
        return fe(**bindings)

    F = None
    if primitive_expr is not None:
        Fe = _compile_expr(primitive_expr, ('x', 'y', 't'))

        def F(coords, t):
            bindings = {'x': coords[0], 't': t}
            if len(coords) > 1:
                bindings['y'] = coords[1]
            return Fe(**bindings)

    return Nonlinearity('expr', f, F,
                        params={'expr': expr, 'primitive': primitive_expr},
                        **declared)
