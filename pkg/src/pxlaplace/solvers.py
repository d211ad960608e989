"""Discrete weak solutions by first-order descent.

Three entry points:
    solve_load         unique solution for t-independent right-hand sides
                       (strictly convex energy, descent from zero)
    minimize_coercive  global minimization in the coercive regime
                       (multistart descent, lowest value wins)
    mountain_pass      path-deformation search for a nontrivial saddle in
                       the superlinear regime

All of them use monotone Armijo backtracking along the negative gradient
with a Barzilai-Borwein initial step.  No Newton steps anywhere: the
energy's second derivative degenerates where the gradient vanishes for
exponents below 2, so curvature information is unreliable exactly where
the interesting solutions live.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .energy import phi as phi_functional
from .energy import phi_grad
from .exponents import sobolev_conjugate
from .lebesgue import sum_space_norm
from .mesh import GridFunction, project_dirichlet
from .nonlinearity import (CheckReport, check_ar_condition, check_growth_f0,
                           check_odd, check_small_o_origin,
                           check_subcritical_coercive, default_origin_sequence,
                           default_sample_grid)

__all__ = [
    'SolverOptions', 'SolveResult', 'TraceRow', 'MountainPassState',
    'ConditionCheckError', 'CollapseError', 'DescentRayError',
    'solve_load', 'minimize_coercive', 'find_descent_point', 'mountain_pass',
    'mountain_gates',
    'palais_smale_diagnostic', 'odd_pair', 'random_start', 'sphere_level',
]

LOAD_TOL = 1e-8
COERCIVE_TOL = 1e-8
MOUNTAIN_TOL = 1e-6


class ConditionCheckError(RuntimeError):
    """A precondition checker rejected the nonlinearity."""

    def __init__(self, report):
        self.report = report
        witness = report.witnesses[0] if report.witnesses else {}
        super().__init__('condition check %r failed: %s' % (report.name, witness))


class CollapseError(RuntimeError):
    """Mountain-pass iterate fell below the nontriviality floor."""


class DescentRayError(RuntimeError):
    """No point with phi below the target was found along the ray."""


@dataclass(frozen=True)
class SolverOptions:
    tol: float = None                 # per-solver default when None
    max_iters: int = 200000
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    max_backtracks: int = 60
    step_clip: tuple = (1e-8, 1e2)
    multistart: int = 4
    seed: int = 0
    u0: GridFunction = None
    path_points: int = 21
    retension_every: int = 10
    nontrivial_floor: float = 1e-2
    sphere_samples: int = 16
    blowup_ratio: float = 100.0
    force: bool = False
    phi_target: float = -1.0
    t_cap: float = 2.0 ** 60

    def resolved_tol(self, default):
        return default if self.tol is None else self.tol


@dataclass(frozen=True)
class TraceRow:
    phi: float
    residual_norm: float
    step: float
    u_norm: float

    def as_dict(self):
        return {'phi': self.phi, 'residual_norm': self.residual_norm,
                'step': self.step, 'u_norm': self.u_norm}


@dataclass
class SolveResult:
    u: GridFunction
    phi_value: float
    residual_norm: float
    iterations: int
    trace: list
    status: str                       # converged | max_iters | diverged
    condition_reports: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.status == 'converged'


@dataclass
class MountainPassState:
    """Piecewise-linear path in state space from 0 to the valley point e."""
    path: list
    max_index: int
    level: float


def random_start(mesh, seed, amplitude=1.0):
    """Reproducible random initializer: nodal values uniform in
    [-amplitude, amplitude], boundary projected to zero."""
    rng = np.random.default_rng(seed)
    values = rng.uniform(-amplitude, amplitude, size=mesh.n_nodes)
    return project_dirichlet(GridFunction(mesh, values))


_ARMIJO_NOISE = 16.0 * np.finfo(float).eps


def _sufficient_decrease(phi_try, phi_val, required):
    # near the energy floor the true decrease c*t*|g|^2 sinks below the
    # rounding resolution of phi; without the noise allowance the line
    # search rejects every step and the iteration stalls around
    # residual ~ sqrt(ulp(phi) * curvature)
    return phi_try <= phi_val - required + _ARMIJO_NOISE * (1.0 + abs(phi_val))


def _descend(spec, u0, tol, opts):
    """Monotone Armijo descent on phi from u0.

    The initial trial step is the Barzilai-Borwein estimate
    (s.s)/(s.y) from the last accepted move, clipped to opts.step_clip;
    backtracking halves it until the sufficient-decrease test
    phi(u - t g) <= phi(u) - c t |g|^2 passes (up to rounding noise
    in phi).
    """
    mesh = u0.mesh
    u = u0.values.copy()
    phi_val = phi_functional(GridFunction(mesh, u), spec)
    g = phi_grad(GridFunction(mesh, u), spec).components
    lo, hi = opts.step_clip
    step = 1.0
    prev_u = prev_g = None
    trace = []
    status = 'max_iters'
    iterations = 0
    for iterations in range(opts.max_iters + 1):
        res = float(np.linalg.norm(g))
        trace.append(TraceRow(phi_val, res, step, float(np.linalg.norm(u))))
        if not np.isfinite(phi_val) or not np.isfinite(res):
            status = 'diverged'
            break
        if res <= tol:
            status = 'converged'
            break
        if iterations == opts.max_iters:
            break
        if prev_u is not None:
            s = u - prev_u
            y = g - prev_g
            sy = float(np.dot(s, y))
            step = float(np.dot(s, s)) / sy if sy > 0.0 else 1.0
        step = min(max(step, lo), hi)
        gg = res * res
        t = step
        accepted = False
        for _ in range(opts.max_backtracks):
            u_try = u - t * g
            try:
                phi_try = phi_functional(GridFunction(mesh, u_try), spec)
            except ArithmeticError:
                # overflow at a too-bold trial is a rejection, not a crash
                phi_try = math.inf
            if _sufficient_decrease(phi_try, phi_val, opts.armijo_c * t * gg):
                accepted = True
                break
            t *= opts.backtrack
        if not accepted:
            break
        prev_u, prev_g = u, g
        u = u_try
        phi_val = phi_try
        step = t
        g = phi_grad(GridFunction(mesh, u), spec).components
    result_u = GridFunction(mesh, u)
    return SolveResult(result_u, phi_val, trace[-1].residual_norm,
                       iterations, trace, status)


def solve_load(fload, spec, opts=SolverOptions()):
    """Unique discrete solution for a t-independent right-hand side.

    phi is strictly convex here (J strictly convex, the load term linear),
    so descent from zero, or from opts.u0 when given, finds the one
    critical point.
    """
    if fload.kind != 'load':
        raise ValueError("solve_load needs a nonlinearity of kind 'load', "
                         'got %r' % fload.kind)
    work = spec.with_nonlinearity(fload)
    tol = opts.resolved_tol(LOAD_TOL)
    u0 = opts.u0 if opts.u0 is not None else GridFunction(
        spec.mesh, np.zeros(spec.mesh.n_nodes))
    if not u0.is_dirichlet_compliant():
        u0 = project_dirichlet(u0)
    result = _descend(work, u0, tol, opts)
    result.meta.update({'solver': 'load', 'tol': tol})
    return result


def minimize_coercive(nl, spec, opts=SolverOptions()):
    """Global minimization in the coercive regime.

    Requires the sublinear-growth check to pass (opts.force overrides).
    Runs descent from zero plus opts.multistart seeded random starts and
    returns the lowest-phi converged result; the zero start guarantees
    the value never exceeds phi(0) = 0.
    """
    if nl.kind == 'load':
        return solve_load(nl, spec, opts)
    report = check_subcritical_coercive(nl, spec.min_field())
    if not report.passed and not opts.force:
        raise ConditionCheckError(report)
    work = spec.with_nonlinearity(nl)
    tol = opts.resolved_tol(COERCIVE_TOL)
    starts = [GridFunction(spec.mesh, np.zeros(spec.mesh.n_nodes))]
    starts += [random_start(spec.mesh, [opts.seed, k])
               for k in range(opts.multistart)]
    best = None
    for u0 in starts:
        res = _descend(work, u0, tol, opts)
        if best is None:
            best = res
        elif res.converged and (not best.converged or res.phi_value < best.phi_value):
            best = res
    best.condition_reports.append(report)
    best.meta.update({'solver': 'coercive', 'tol': tol,
                      'starts': len(starts)})
    return best


def find_descent_point(nl, spec, w, opts=SolverOptions()):
    """Double t until phi(t w) drops below opts.phi_target.

    Superlinear growth of F (the declared theta, M) makes phi go to
    minus infinity along every nonzero ray; hitting the cap means the
    declaration is not effective on this w.
    """
    if nl.theta is None or nl.M is None:
        raise ValueError('find_descent_point needs declared theta and M')
    if not np.any(w.values != 0.0):
        raise ValueError('descent ray needs a nonzero direction')
    work = spec.with_nonlinearity(nl)
    t = 1.0
    while t <= opts.t_cap:
        e = t * w
        if phi_functional(e, work) < opts.phi_target:
            return t, e
        t *= 2.0
    raise DescentRayError(
        'phi stayed above %g along the ray up to t=%g; superlinear descent '
        'not effective on this direction' % (opts.phi_target, opts.t_cap))


def mountain_gates(nl, spec, opts=SolverOptions()):
    """Checker gates for the saddle search; raises on the first failure."""
    mesh = spec.mesh
    grid = default_sample_grid(mesh, seed=opts.seed)
    p_max = spec.max_field()
    reports = []
    growth = check_growth_f0(nl, sobolev_conjugate(p_max), grid)
    reports.append(growth)
    if not growth.passed and not opts.force:
        raise ConditionCheckError(growth)
    alpha = nl.alpha_values(mesh)
    if float(np.min(alpha)) <= p_max.p_plus:
        superlinear = CheckReport(
            'superlinear_alpha', False,
            [{'alpha_minus': float(np.min(alpha)), 'pM_plus': p_max.p_plus,
              'reason': 'needs alpha_minus > pM_plus strictly'}])
        reports.append(superlinear)
        if not opts.force:
            raise ConditionCheckError(superlinear)
    ar = check_ar_condition(nl, p_max.p_plus, grid)
    reports.append(ar)
    if not ar.passed and not opts.force:
        raise ConditionCheckError(ar)
    origin = check_small_o_origin(nl, p_max.p_plus, default_origin_sequence())
    reports.append(origin)
    if not origin.passed and not opts.force:
        raise ConditionCheckError(origin)
    return reports


def _retension(path):
    """Redistribute path states equally by arc length in nodal max-norm.

    Endpoints stay fixed; interior states are linear interpolants of the
    old polyline, which prevents the discrete path from bunching around
    the maximizer.
    """
    m = len(path)
    seg = np.array([float(np.max(np.abs(path[k + 1] - path[k])))
                    for k in range(m - 1)])
    total = float(np.sum(seg))
    if total <= 0.0:
        return path
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, total, m)
    out = [path[0]]
    for target in targets[1:-1]:
        k = int(np.searchsorted(cum, target, side='right') - 1)
        k = min(k, m - 2)
        local = (target - cum[k]) / seg[k] if seg[k] > 0.0 else 0.0
        out.append((1.0 - local) * path[k] + local * path[k + 1])
    out.append(path[-1])
    return out


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
_LEVEL_WINDOW = 30       # sweeps of level history inspected for stagnation
_LEVEL_RTOL = 1e-7
_PSI_STEP_CLIP = (1e-12, 1e3)
_PSI_NOISE = 1e-14


def _golden_max(fun, a, b, iters=40):
    """Golden-section maximizer of fun on the segment a + s (b - a)."""
    lo, hi = 0.0, 1.0
    s1 = hi - _GOLDEN * (hi - lo)
    s2 = lo + _GOLDEN * (hi - lo)
    f1 = fun(a + s1 * (b - a))
    f2 = fun(a + s2 * (b - a))
    for _ in range(iters):
        if f1 < f2:
            lo, s1, f1 = s1, s2, f2
            s2 = lo + _GOLDEN * (hi - lo)
            f2 = fun(a + s2 * (b - a))
        else:
            hi, s2, f2 = s2, s1, f1
            s1 = hi - _GOLDEN * (hi - lo)
            f1 = fun(a + s1 * (b - a))
    if f1 >= f2:
        return a + s1 * (b - a), f1
    return a + s2 * (b - a), f2


def _ridge_max(fun, path, phis, j):
    """Continuous path maximizer over the two segments meeting at node j."""
    best_v, best_f = path[j], phis[j]
    for a, b in ((path[j - 1], path[j]), (path[j], path[j + 1])):
        v, f = _golden_max(fun, a, b)
        if f > best_f:
            best_v, best_f = v, f
    return best_v, best_f


def _polish_saddle(work, mesh, u0, tol, opts, max_iters):
    """Second phase of the saddle search: minimize psi(u) = |phi_grad(u)|^2/2.

    The descent direction is the forward-difference curvature product
    (g(u + h g) - g(u)) / h, the gradient of psi up to O(h), so the scheme
    stays first order: nothing beyond phi_grad is ever evaluated.  This
    phase exists because the level is quadratically insensitive near the
    saddle; the path flow settles the level to 7+ digits while the
    residual still wanders around 1e-1.
    """
    def grad_of(vec):
        return phi_grad(GridFunction(mesh, vec), work).components

    u = u0.copy()
    g = grad_of(u)
    psi = 0.5 * float(np.dot(g, g))
    lo, hi = _PSI_STEP_CLIP
    step = 1e-3
    prev_u = prev_d = None
    rows = []
    status = 'max_iters'
    iters = 0
    for iters in range(max_iters + 1):
        res = math.sqrt(2.0 * psi)
        rows.append(TraceRow(phi_functional(GridFunction(mesh, u), work), res,
                             step, float(np.linalg.norm(u))))
        peak = float(np.max(np.abs(u)))
        if peak < opts.nontrivial_floor:
            raise CollapseError(
                'saddle candidate collapsed toward zero (max-norm %.3g below '
                'floor %.3g)' % (peak, opts.nontrivial_floor))
        if res <= tol:
            status = 'converged'
            break
        if iters == max_iters:
            break
        h = 1e-7 * (1.0 + float(np.linalg.norm(u))) / max(res, 1e-30)
        d = (grad_of(u + h * g) - g) / h
        if prev_u is not None:
            s = u - prev_u
            y = d - prev_d
            sy = float(np.dot(s, y))
            step = float(np.dot(s, s)) / sy if sy > 0.0 else 1e-3
        step = min(max(step, lo), hi)
        dd = float(np.dot(d, d))
        t = step
        accepted = False
        for _ in range(opts.max_backtracks):
            u_try = u - t * d
            try:
                g_try = grad_of(u_try)
                psi_try = 0.5 * float(np.dot(g_try, g_try))
            except ArithmeticError:
                psi_try = math.inf
            if psi_try <= psi - opts.armijo_c * t * dd + _PSI_NOISE * (1.0 + abs(psi)):
                accepted = True
                break
            t *= opts.backtrack
        if not accepted:
            break
        prev_u, prev_d = u, d
        u, g, psi, step = u_try, g_try, psi_try, t
    return u, rows, iters, status


def mountain_pass(nl, spec, e, opts=SolverOptions()):
    """Path-deformation search for a nontrivial critical point.

    Discretizes the segment from 0 to the valley point e into
    opts.path_points states and deforms it in two phases:

    1. Path flow.  Each sweep, every interior state with phi > 0 takes
       one Armijo step along -phi_grad, its displacement capped at half
       the mean segment length so the polyline deforms without tearing;
       states at or below the zero level are frozen, because past the
       ridge the energy is unbounded below and letting them run would
       stretch the path until overflow.  The continuous path maximizer
       (golden section over the two segments at the discrete argmax) is
       tracked every sweep and the phase ends when its level stagnates.
    2. Residual polish from the flow's maximizer, see _polish_saddle.

    Terminates when the maximizer's residual drops below tol; the
    maximizer must stay above the nontriviality floor in max-norm,
    otherwise the geometry has collapsed and the run aborts.
    """
    reports = mountain_gates(nl, spec, opts)
    work = spec.with_nonlinearity(nl)
    mesh = spec.mesh
    if not e.is_dirichlet_compliant():
        raise ValueError('valley point must satisfy the boundary condition')
    phi_e = phi_functional(e, work)
    if not phi_e < 0.0:
        raise ValueError('valley point must have negative phi, got %.6g' % phi_e)
    tol = opts.resolved_tol(MOUNTAIN_TOL)
    m = max(opts.path_points, 3)
    path = [k / (m - 1.0) * e.values for k in range(m)]

    def phi_of(vec):
        return phi_functional(GridFunction(mesh, vec), work)

    def grad_of(vec):
        return phi_grad(GridFunction(mesh, vec), work).components

    trace = []
    levels = []
    node_steps = np.ones(m)
    hi_step = opts.step_clip[1]
    sweep_step = 0.0
    u_star = None
    status = 'max_iters'
    sweeps = 0
    for sweeps in range(opts.max_iters + 1):
        phis = [phi_of(v) for v in path]
        j = int(np.argmax(phis))
        if j in (0, m - 1):
            raise CollapseError(
                'path maximum sits at an endpoint (phi has no interior '
                'mountain on this path)')
        u_star, level = _ridge_max(phi_of, path, phis, j)
        res = float(np.linalg.norm(grad_of(u_star)))
        trace.append(TraceRow(level, res, sweep_step,
                              float(np.linalg.norm(u_star))))
        peak = float(np.max(np.abs(u_star)))
        if peak < opts.nontrivial_floor:
            raise CollapseError(
                'maximizer collapsed toward zero (max-norm %.3g below floor '
                '%.3g)' % (peak, opts.nontrivial_floor))
        if res <= tol:
            status = 'converged'
            break
        if sweeps == opts.max_iters:
            break
        levels.append(level)
        if (len(levels) > _LEVEL_WINDOW and
                abs(levels[-_LEVEL_WINDOW - 1] - level)
                < _LEVEL_RTOL * (1.0 + abs(level))):
            break    # level settled; hand the maximizer to the polish phase
        cap = 0.5 * float(np.mean([np.max(np.abs(path[k + 1] - path[k]))
                                   for k in range(m - 1)]))
        sweep_step = 0.0
        for k in range(1, m - 1):
            if phis[k] <= 0.0:
                continue     # below the pass; freezing stops downhill escape
            g = grad_of(path[k])
            gmax = float(np.max(np.abs(g)))
            if gmax <= 0.0:
                continue
            gg = float(np.dot(g, g))
            t = min(node_steps[k] * 2.0, hi_step, cap / gmax)
            for _ in range(opts.max_backtracks):
                u_try = path[k] - t * g
                try:
                    phi_try = phi_of(u_try)
                except ArithmeticError:
                    phi_try = math.inf
                if _sufficient_decrease(phi_try, phis[k], opts.armijo_c * t * gg):
                    path[k] = u_try
                    node_steps[k] = t
                    sweep_step = max(sweep_step, t)
                    break
                t *= opts.backtrack
        if (sweeps + 1) % opts.retension_every == 0:
            path = _retension(path)
    iterations = sweeps
    u_vec = u_star
    if status != 'converged':
        budget = max(opts.max_iters - sweeps, 0)
        u_vec, rows, polish_iters, status = _polish_saddle(
            work, mesh, u_star, tol, opts, budget)
        trace.extend(rows)
        iterations += polish_iters
    phi_val = trace[-1].phi
    res = trace[-1].residual_norm
    phis = [phi_of(v) for v in path]
    path[1 + int(np.argmax(phis[1:-1]))] = u_vec.copy()
    phis = [phi_of(v) for v in path]
    max_index = int(np.argmax(phis))
    result = SolveResult(GridFunction(mesh, u_vec), phi_val, res, iterations,
                         trace, status, reports,
                         {'solver': 'mountain_pass', 'tol': tol,
                          'level': phi_val, 'path_points': m,
                          'phi_valley': phi_e, 'path_sweeps': sweeps})
    result.meta['state'] = MountainPassState(
        [GridFunction(mesh, v) for v in path], max_index, phis[max_index])
    return result


def palais_smale_diagnostic(trace, blowup_ratio=100.0, tail=8):
    """Compactness shadow for an iteration trace.

    Passes when (a) iterate norms stayed bounded relative to the final
    one, (b) residual norms decreased overall, and (c) the norm sequence
    does not end in sustained geometric growth (a diverging tail would
    keep max/final near 1 while escaping to infinity, so (a) alone cannot
    see it).
    """
    trace = list(trace)
    if not trace:
        raise ValueError('empty iteration trace')
    norms = np.array([row.u_norm for row in trace])
    residuals = np.array([row.residual_norm for row in trace])
    witnesses = []
    tiny = 1e-30
    ratio = float(np.max(norms)) / max(float(norms[-1]), tiny)
    if ratio > blowup_ratio:
        witnesses.append({'max_over_final': ratio,
                          'blowup_ratio': blowup_ratio,
                          'reason': 'iterate norms not bounded relative to limit'})
    if residuals[-1] > residuals[0] * (1.0 + 1e-12) and residuals[-1] > 1e-14:
        witnesses.append({'first_residual': float(residuals[0]),
                          'last_residual': float(residuals[-1]),
                          'reason': 'residual norms did not decrease'})
    k = min(tail, len(norms) - 1)
    if k >= 2:
        tail_ratios = norms[-k:] / np.maximum(norms[-k - 1:-1], tiny)
        if np.all(tail_ratios >= 1.5):
            witnesses.append({'tail_growth_factors': [float(r) for r in tail_ratios],
                              'reason': 'iterate norms growing geometrically'})
    return CheckReport('palais_smale', not witnesses, witnesses,
                       {'iterations': len(trace),
                        'max_norm': float(np.max(norms)),
                        'final_norm': float(norms[-1]),
                        'final_residual': float(residuals[-1])})


def odd_pair(result, nl, spec, opts=SolverOptions()):
    """Mirror a solution through the origin when f is odd.

    phi is even then, so the negated state is a solution of the same
    level; phi and residual are recomputed fresh rather than copied.
    """
    grid = default_sample_grid(spec.mesh, seed=opts.seed)
    report = check_odd(nl, grid)
    if not report.passed:
        raise ConditionCheckError(report)
    work = spec.with_nonlinearity(nl)
    u_neg = -result.u
    phi_val = phi_functional(u_neg, work)
    res = phi_grad(u_neg, work).norm()
    tol = result.meta.get('tol', opts.resolved_tol(MOUNTAIN_TOL))
    status = 'converged' if res <= tol else result.status
    return SolveResult(u_neg, phi_val, res, 0,
                       [TraceRow(phi_val, res, 0.0,
                                 float(np.linalg.norm(u_neg.values)))],
                       status, [report], {'solver': 'odd_pair'})


def sphere_level(nl, spec, radius, n_samples=16, seed=0):
    """Smallest phi over random directions scaled to the given norm.

    Samples the sphere in the sum-of-gradient-norms metric; the returned
    minimum is the discrete stand-in for the positive wall between zero
    and the valley.
    """
    work = spec.with_nonlinearity(nl)
    level = math.inf
    for k in range(n_samples):
        d = random_start(spec.mesh, [seed, k])
        norm_d = sum_space_norm(d, spec.exponents)
        if norm_d <= 0.0:
            continue
        u = (radius / norm_d) * d
        level = min(level, phi_functional(u, work))
    return level
