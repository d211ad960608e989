"""Figure rendering for completed runs.

Draws the solution profile, the convergence trace, the exponent fields,
and (for saddle searches) the energy levels along the final path, as PNG
files next to the CSV/JSON artifacts.  Uses the non-interactive backend
so it works headless.
"""

import os

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np

__all__ = ['render_figures']


def _solution_figure(u, path):
    mesh = u.mesh
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    if mesh.dim == 1:
        ax.plot(mesh.nodes[:, 0], u.values, marker='.', lw=1.2)
        ax.set_xlabel('x')
        ax.set_ylabel('u')
    else:
        img = ax.tripcolor(mesh.nodes[:, 0], mesh.nodes[:, 1], mesh.elements,
                           u.values, shading='gouraud')
        fig.colorbar(img, ax=ax, label='u')
        ax.set_xlabel('x')
        ax.set_ylabel('y')
        ax.set_aspect('equal')
    ax.set_title('nodal solution')
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def _trace_figure(trace, path):
    iters = np.arange(len(trace))
    residuals = [row.residual_norm for row in trace]
    phis = [row.phi for row in trace]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6.4, 5.6), sharex=True)
    ax1.semilogy(iters, residuals, lw=1.0)
    ax1.set_ylabel('residual norm')
    ax2.plot(iters, phis, lw=1.0)
    ax2.set_ylabel('phi')
    ax2.set_xlabel('iteration')
    ax1.set_title('iteration trace')
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def _exponent_figure(exponents, path):
    mesh = exponents[0].mesh
    n = len(exponents)
    fig, axes = plt.subplots(1, n, figsize=(4.8 * n, 3.6), squeeze=False)
    for i, (p, ax) in enumerate(zip(exponents, axes[0])):
        if mesh.dim == 1:
            ax.step(mesh.element_midpoints[:, 0], p.values, where='mid')
            ax.set_xlabel('x')
            ax.set_ylabel('p_%d(x)' % (i + 1))
        else:
            img = ax.tripcolor(mesh.nodes[:, 0], mesh.nodes[:, 1],
                               mesh.elements, facecolors=p.values)
            fig.colorbar(img, ax=ax)
            ax.set_aspect('equal')
        ax.set_title('exponent %d in [%.3g, %.3g]'
                     % (i + 1, p.p_minus, p.p_plus))
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def _path_levels_figure(levels, max_index, path):
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.plot(range(len(levels)), levels, marker='o', lw=1.0)
    ax.axvline(max_index, color='0.4', ls='--', lw=0.8)
    ax.set_xlabel('path state index (0 to valley)')
    ax.set_ylabel('phi')
    ax.set_title('energy along the deformed path')
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_figures(outcome, out_dir):
    """Render PNGs for a RunOutcome; returns {figure name: file path}."""
    written = {}
    result = outcome.result
    if result is None:
        return written
    solution = os.path.join(out_dir, 'solution.png')
    _solution_figure(result.u, solution)
    written['solution'] = solution
    if result.trace:
        trace = os.path.join(out_dir, 'trace.png')
        _trace_figure(result.trace, trace)
        written['trace'] = trace
    if outcome.exponents:
        exponents = os.path.join(out_dir, 'exponents.png')
        _exponent_figure(outcome.exponents, exponents)
        written['exponents'] = exponents
    mp = outcome.diagnostics.get('mountain_pass')
    if mp is not None:
        levels = os.path.join(out_dir, 'path_levels.png')
        _path_levels_figure(mp['path_levels'], mp['max_index'], levels)
        written['path_levels'] = levels
    return written
