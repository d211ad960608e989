"""Randomized property suites over the function-space and energy layers.

Shared by the command-line verify pipeline and the test suite.  Each suite
draws seeded random samples, asserts the advertised inequality or identity,
and returns a SuiteReport with case counts and capped failure witnesses.
Wall-clock time is kept out of as_dict() so emitted diagnostics stay
byte-stable across runs with the same seed.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .energy import (EnergySpec, duality_pairing, monotonicity_gap,
                     phi_grad, vector_inequality_gap)
from .energy import phi as phi_functional
from .exponents import constant_exponent, exponent_preset
from .lebesgue import holder_pairing, luxemburg_norm, modular
from .mesh import (GridFunction, interval_mesh, project_dirichlet,
                   rectangle_mesh)
from .nonlinearity import (affine_load, constant_load, expr_nonlinearity,
                           power_nonlinearity, sin_bump_load,
                           sum_nonlinearity)

__all__ = ['SuiteReport', 'SUITES', 'run_suites', 'norm_modular_suite',
           'holder_suite', 'inequality_gap_suite', 'monotonicity_suite',
           'gradient_check_suite']

MAX_WITNESSES = 10


@dataclass
class SuiteReport:
    name: str
    passed: bool
    cases: int
    failures: list
    details: dict = field(default_factory=dict)
    seed: int = 0
    elapsed: float = 0.0    # not serialized: keeps diagnostics byte-stable

    def as_dict(self):
        return {'name': self.name, 'passed': self.passed, 'cases': self.cases,
                'failures': self.failures, 'details': self.details,
                'seed': self.seed}


def _record(failures, witness):
    if len(failures) < MAX_WITNESSES:
        failures.append(witness)


def _random_function(mesh, rng, amplitude_range=(1e-2, 1e2)):
    # log-uniform amplitude so both sides of the unit ball get exercised
    lo, hi = np.log(amplitude_range[0]), np.log(amplitude_range[1])
    amp = float(np.exp(rng.uniform(lo, hi)))
    return GridFunction(mesh, rng.uniform(-amp, amp, size=mesh.n_nodes))


def _norm_presets(mesh):
    return [
        ('constant', exponent_preset('constant', mesh, value=2.0)),
        ('affine', exponent_preset('affine', mesh, base=2.0, slope=1.0)),
        ('sin-bump', exponent_preset('sin-bump', mesh, base=2.0,
                                     amplitude=0.5)),
    ]


def _unit_modular_scale(u, p, tol=1e-12, max_iter=200):
    """Scale s with modular(s*u) = 1, found by bisection on s.

    Root-finds on the scale map s -> rho(s*u) (increasing), which is a
    different map than the norm's lambda -> rho(u/lambda); used to
    cross-check that the norm of the rescaled function is exactly 1.
    """
    hi = 1.0
    for _ in range(300):
        if modular(hi * u, p) >= 1.0:
            break
        hi *= 2.0
    else:
        return None
    lo = hi
    for _ in range(300):
        if modular(lo * u, p) <= 1.0:
            break
        lo *= 0.5
    else:
        return None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        rho = modular(mid * u, p)
        if abs(rho - 1.0) <= tol:
            return mid
        if rho < 1.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def norm_modular_suite(seed=0, n_functions=1000, resolution=128):
    """Unit-ball trichotomy, the exponent sandwich, rescale-to-unit-modular
    cross-check, and joint norm/modular decay of perturbation sequences,
    per exponent preset."""
    t0 = time.perf_counter()
    mesh = interval_mesh(resolution)
    rng = np.random.default_rng([seed, 11])
    failures = []
    cases = 0
    for label, p in _norm_presets(mesh):
        for k in range(n_functions):
            cases += 1
            u = _random_function(mesh, rng)
            rho = modular(u, p)
            norm = luxemburg_norm(u, p).value
            if rho < 1.0 - 1e-9 and not norm < 1.0 + 1e-8:
                _record(failures, {'check': 'trichotomy', 'preset': label,
                                   'rho': rho, 'norm': norm})
            if rho > 1.0 + 1e-9 and not norm > 1.0 - 1e-8:
                _record(failures, {'check': 'trichotomy', 'preset': label,
                                   'rho': rho, 'norm': norm})
            slack = 1.0 + 1e-10
            if norm > 1.0 + 1e-9:
                ok = (norm ** p.p_minus <= rho * slack
                      and rho <= norm ** p.p_plus * slack)
            elif norm < 1.0 - 1e-9:
                ok = (norm ** p.p_plus <= rho * slack
                      and rho <= norm ** p.p_minus * slack)
            else:
                ok = True    # on the unit sphere up to bisection tolerance
            if not ok:
                _record(failures, {'check': 'sandwich', 'preset': label,
                                   'rho': rho, 'norm': norm,
                                   'p_minus': p.p_minus, 'p_plus': p.p_plus})
            if k % 20 == 0:
                cases += 1
                s = _unit_modular_scale(u, p)
                unit = luxemburg_norm(s * u, p).value if s else None
                if unit is None or abs(unit - 1.0) > 1e-8:
                    _record(failures, {'check': 'unit-scale', 'preset': label,
                                       'scale': s, 'norm': unit})
        for _ in range(5):
            cases += 1
            base = _random_function(mesh, rng)
            w = _random_function(mesh, rng, (1e-1, 1e1))
            norms, rhos = [], []
            for j in range(31):
                d = (base + 2.0 ** -j * w) - base
                norms.append(luxemburg_norm(d, p).value)
                rhos.append(modular(d, p))
            if not (np.all(np.diff(norms) < 0.0) and norms[-1] < 1e-6
                    and np.all(np.diff(rhos) < 0.0) and rhos[-1] < 1e-6):
                _record(failures, {'check': 'decay', 'preset': label,
                                   'final_norm': norms[-1],
                                   'final_rho': rhos[-1]})
    return SuiteReport('norm-modular', not failures, cases, failures,
                       {'resolution': resolution,
                        'per_preset': n_functions}, seed,
                       time.perf_counter() - t0)


def holder_suite(seed=0, n_pairs=1000, resolution=128):
    """Pairing bound |int u v| <= (1/p- + 1/q-) |u|_p |v|_q on random
    pairs for constant and affine exponents."""
    t0 = time.perf_counter()
    mesh = interval_mesh(resolution)
    rng = np.random.default_rng([seed, 13])
    presets = [('constant', exponent_preset('constant', mesh, value=2.0)),
               ('affine', exponent_preset('affine', mesh, base=2.0,
                                          slope=1.0))]
    failures = []
    cases = 0
    for label, p in presets:
        for _ in range(n_pairs):
            cases += 1
            u = _random_function(mesh, rng)
            v = _random_function(mesh, rng)
            lhs, rhs = holder_pairing(u, v, p)
            if lhs > rhs + 1e-12 * (1.0 + abs(rhs)):
                _record(failures, {'preset': label, 'lhs': lhs, 'rhs': rhs})
    return SuiteReport('holder', not failures, cases, failures,
                       {'resolution': resolution, 'per_preset': n_pairs},
                       seed, time.perf_counter() - t0)


def inequality_gap_suite(seed=0, n_samples=100000,
                         p_values=(1.3, 1.7, 2.0, 3.0, 4.5)):
    """lhs >= rhs for the elementary vector inequality on random pairs in
    1D and 2D, with |lhs - rhs| <= 1e-12 exactly on the duplicated rows."""
    t0 = time.perf_counter()
    failures = []
    cases = 0
    for dim in (1, 2):
        for p in p_values:
            rng = np.random.default_rng([seed, 17, dim, int(10 * p)])
            xi = rng.normal(size=(n_samples, dim))
            eta = rng.normal(size=(n_samples, dim))
            eta[:n_samples // 10] = xi[:n_samples // 10]
            lhs, rhs = vector_inequality_gap(xi, eta, p)
            cases += n_samples
            bad = np.flatnonzero(lhs < rhs - 1e-12 * (1.0 + np.abs(rhs)))
            for i in bad[:MAX_WITNESSES]:
                _record(failures, {'check': 'bound', 'dim': dim, 'p': p,
                                   'xi': xi[i].tolist(),
                                   'eta': eta[i].tolist(),
                                   'lhs': float(lhs[i]), 'rhs': float(rhs[i])})
            near = np.abs(lhs - rhs) <= 1e-12
            equal = np.all(xi == eta, axis=1)
            for i in np.flatnonzero(near != equal)[:MAX_WITNESSES]:
                _record(failures, {'check': 'equality-iff', 'dim': dim,
                                   'p': p, 'xi': xi[i].tolist(),
                                   'eta': eta[i].tolist(),
                                   'gap': float(lhs[i] - rhs[i])})
    return SuiteReport('inequality-gap', not failures, cases, failures,
                       {'p_values': list(p_values),
                        'per_combination': n_samples}, seed,
                       time.perf_counter() - t0)


def monotonicity_suite(seed=0, n_pairs=1000, resolution=32):
    """<L(u) - L(v), u - v> > 0 on random distinct Dirichlet-compliant
    pairs for three exponent combinations."""
    t0 = time.perf_counter()
    mesh = interval_mesh(resolution)
    combos = [
        ('p(2,3)', (constant_exponent(2.0, mesh),
                    constant_exponent(3.0, mesh))),
        ('p(1.5,2.5)', (constant_exponent(1.5, mesh),
                        constant_exponent(2.5, mesh))),
        ('affine pair', (exponent_preset('affine', mesh, base=2.0, slope=1.0),
                         exponent_preset('affine', mesh, base=1.5,
                                         slope=1.0))),
    ]
    rng = np.random.default_rng([seed, 19])
    failures = []
    cases = 0
    for label, exps in combos:
        spec = EnergySpec(exps)
        for _ in range(n_pairs):
            cases += 1
            u = project_dirichlet(_random_function(mesh, rng, (1e-1, 1e1)))
            v = project_dirichlet(_random_function(mesh, rng, (1e-1, 1e1)))
            if not np.any(u.values != v.values):
                continue
            gap = monotonicity_gap(u, v, spec)
            if not gap > 0.0:
                _record(failures, {'combo': label, 'gap': gap})
    return SuiteReport('monotonicity', not failures, cases, failures,
                       {'resolution': resolution, 'per_combo': n_pairs},
                       seed, time.perf_counter() - t0)


def _gradient_check_cases(resolution):
    mesh1 = interval_mesh(resolution)
    spec1 = EnergySpec((constant_exponent(2.0, mesh1),
                        constant_exponent(3.0, mesh1)))
    mesh2 = rectangle_mesh(8, 8)
    spec2 = EnergySpec((constant_exponent(2.0, mesh2),))
    return [
        ('power q=4', power_nonlinearity(4.0), spec1),
        ('power q=3', power_nonlinearity(3.0, 0.5), spec1),
        ('load constant', constant_load(2.0), spec1),
        ('load affine', affine_load(1.0, 0.5), spec1),
        ('load sin-bump', sin_bump_load(1.0), spec1),
        ('sum q=3 sin-bump', sum_nonlinearity(3.0, 1.0, 'sin-bump',
                                              amplitude=1.0), spec1),
        ('expr t+sin(t)', expr_nonlinearity('t + sin(t)',
                                            't**2/2 + 1 - cos(t)',
                                            C1=1.0, C2=1.0, alpha=2.0,
                                            beta=2.0, odd=True), spec1),
        ('power q=4 2d', power_nonlinearity(4.0), spec2),
    ]


def gradient_check_suite(seed=0, n_samples=100, resolution=24, rel_tol=1e-5):
    """<phi_grad(u), v> against central differences of phi for every
    built-in nonlinearity preset, including one 2D assembly case."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, 23])
    failures = []
    cases = 0
    for label, nl, spec in _gradient_check_cases(resolution):
        work = spec.with_nonlinearity(nl)
        mesh = spec.mesh
        for _ in range(n_samples):
            cases += 1
            u = project_dirichlet(GridFunction(
                mesh, rng.uniform(-1.0, 1.0, size=mesh.n_nodes)))
            v = project_dirichlet(GridFunction(
                mesh, rng.uniform(-1.0, 1.0, size=mesh.n_nodes)))
            h = 1e-5 * (1.0 + u.max_abs()) / (1.0 + v.max_abs())
            fd = (phi_functional(u + h * v, work)
                  - phi_functional(u - h * v, work)) / (2.0 * h)
            dot = duality_pairing(phi_grad(u, work), v)
            rel = abs(fd - dot) / max(abs(fd), abs(dot), 1e-10)
            if rel > rel_tol:
                _record(failures, {'preset': label, 'fd': fd,
                                   'pairing': dot, 'rel_error': rel})
    return SuiteReport('gradient-check', not failures, cases, failures,
                       {'resolution': resolution, 'per_preset': n_samples,
                        'rel_tol': rel_tol}, seed, time.perf_counter() - t0)


SUITES = {
    'norm-modular': norm_modular_suite,
    'holder': holder_suite,
    'inequality-gap': inequality_gap_suite,
    'monotonicity': monotonicity_suite,
    'gradient-check': gradient_check_suite,
}


def run_suites(names=None, seed=0):
    """Run the named property suites (all of them by default)."""
    chosen = list(SUITES) if names is None else list(names)
    reports = []
    for name in chosen:
        if name not in SUITES:
            raise ValueError('unknown suite %r; choices: %s'
                             % (name, ', '.join(SUITES)))
        reports.append(SUITES[name](seed=seed))
    return reports
