"""Command-line entry point.

Subcommands:
  verify         run the property suites (exit 0 iff all pass)
  solve          run the configured load or coercive solve
  mountain-pass  run the saddle search
  report         run the configured pipeline, then render figures

Common flags: --config PATH, --seed N, --out DIR, --tol X.  Environment
overrides use the PXLAPLACE_ prefix (PXLAPLACE_CONFIG, PXLAPLACE_SEED,
PXLAPLACE_OUT, PXLAPLACE_TOL); precedence is flag > environment > config
file > built-in default.
"""

import argparse
import os
import sys

from .config import ConfigError, load_config, parse_config
from .runner import EXIT_OK, EXIT_REJECTED, run


def _env_override(flag_value, suffix, cast, label):
    if flag_value is not None:
        return flag_value
    raw = os.environ.get('PXLAPLACE_' + suffix)
    if raw is None:
        return None
    try:
        return cast(raw)
    except ValueError:
        raise ConfigError('PXLAPLACE_' + suffix,
                          'expected %s, got %r' % (label, raw)) from None


def _build_parser():
    parser = argparse.ArgumentParser(
        prog='pxlaplace',
        description='Variational solves and property verification for '
                    'Dirichlet problems driven by sums of variable-exponent '
                    'Laplace operators.')
    sub = parser.add_subparsers(dest='command', required=True)
    for name, text in (('verify', 'run the property suites'),
                       ('solve', 'run the configured solve'),
                       ('mountain-pass', 'run the saddle search'),
                       ('report', 'run the pipeline and render figures')):
        p = sub.add_parser(name, help=text)
        p.add_argument('--config', help='YAML config path')
        p.add_argument('--seed', type=int, help='override solver seed')
        p.add_argument('--out', help='override output directory')
        p.add_argument('--tol', type=float, help='override stopping '
                       'tolerance')
    return parser


def _load(args):
    config_path = _env_override(args.config, 'CONFIG', str, 'a path')
    if config_path is not None:
        cfg = load_config(config_path)
    else:
        cfg = parse_config('')
    seed = _env_override(args.seed, 'SEED', int, 'an integer')
    if seed is not None:
        cfg.solver['seed'] = seed
    tol = _env_override(args.tol, 'TOL', float, 'a number')
    if tol is not None:
        if not tol > 0.0:
            raise ConfigError('tol', 'must be > 0, got %g' % tol)
        cfg.solver['tol'] = tol
    out_dir = _env_override(args.out, 'OUT', str, 'a path')
    return cfg, out_dir


def _force_kind(cfg, kind):
    cfg.solver['kind'] = kind
    if kind != 'verify' and cfg.nonlinearity is None:
        raise ConfigError('nonlinearity', 'required for solver kind %r'
                          % kind)
    if kind == 'load' and cfg.nonlinearity.get('kind') != 'load':
        raise ConfigError('solver.kind', "load solver requires a "
                          "nonlinearity of kind 'load'")


def _print_verify(outcome):
    for report in outcome.suite_reports:
        line = 'pass' if report.passed else 'FAIL'
        print('%-16s %s  (%d cases, %.2fs)'
              % (report.name, line, report.cases, report.elapsed))
        for witness in report.failures:
            print('    witness: %s' % witness)
    print('verify: %s' % ('all suites passed'
                          if outcome.exit_code == EXIT_OK
                          else 'suite failures'))


def _print_solver(outcome):
    doc = outcome.diagnostics
    if doc.get('status') == 'rejected':
        print('rejected by condition check: %s' % doc['message'])
        return
    if 'error' in doc:
        print('failed: %s' % doc['message'])
        return
    print('status=%s  phi=%.9g  residual=%.3g  iterations=%d'
          % (doc['status'], doc['phi'], doc['residual_norm'],
             doc['iterations']))
    for label, path in sorted(outcome.files.items()):
        print('  %s: %s' % (label, path))


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        cfg, out_dir = _load(args)
        if args.command == 'verify':
            _force_kind(cfg, 'verify')
        elif args.command == 'mountain-pass':
            _force_kind(cfg, 'mountain_pass')
        elif args.command == 'solve' and cfg.solver['kind'] in ('verify',
                                                                'mountain_pass'):
            _force_kind(cfg, 'coercive')
        outcome = run(cfg, out_dir)
    except ConfigError as err:
        print('config error: %s' % err, file=sys.stderr)
        return EXIT_REJECTED
    if args.command == 'report' and outcome.result is not None:
        from .report import render_figures
        figures = render_figures(outcome, outcome.out_dir)
        for label, path in sorted(figures.items()):
            print('  figure %s: %s' % (label, path))
    if outcome.suite_reports is not None:
        _print_verify(outcome)
    else:
        _print_solver(outcome)
    return outcome.exit_code


if __name__ == '__main__':
    sys.exit(main())
