"""Variational solver and property-check toolkit for Dirichlet problems
driven by sums of variable-exponent Laplace operators on (0,1) and
axis-aligned rectangles."""

from .mesh import (Mesh, GridFunction, MeshMismatchError, build_mesh,
                   interval_mesh, rectangle_mesh, interpolate, integrate,
                   element_gradient, project_dirichlet, require_same_mesh,
                   write_solution_csv, write_mesh_csv)
from .exponents import (ExponentField, ExponentRangeError,
                        build_exponent_field, constant_exponent,
                        exponent_preset, field_pow, pointwise_max_min,
                        conjugate, sobolev_conjugate)
from .lebesgue import (NormResult, NormBracketError, modular, luxemburg_norm,
                       holder_pairing, nemytskii, poincare_ratio,
                       gradient_norm, sum_space_norm)
from .energy import (EnergySpec, DualVector, energy_J, residual_L, phi,
                     phi_grad, vector_inequality_gap, monotonicity_gap,
                     duality_pairing)
from .nonlinearity import (Nonlinearity, CheckReport, SampleGrid,
                           default_sample_grid, default_origin_sequence,
                           primitive_F, check_growth_f0,
                           check_subcritical_coercive, check_ar_condition,
                           check_small_o_origin, check_odd,
                           power_nonlinearity, load_nonlinearity,
                           sum_nonlinearity, expr_nonlinearity,
                           constant_load, affine_load, sin_bump_load)
from .solvers import (SolverOptions, SolveResult, TraceRow,
                      MountainPassState, ConditionCheckError, CollapseError,
                      DescentRayError, solve_load, minimize_coercive,
                      find_descent_point, mountain_pass,
                      palais_smale_diagnostic, odd_pair, random_start,
                      sphere_level)
from .verification import SuiteReport, SUITES, run_suites
from .config import (ConfigError, RunConfig, parse_config, load_config)
from .runner import (RunOutcome, run, EXIT_OK, EXIT_REJECTED,
                     EXIT_NOT_CONVERGED)

__version__ = '0.1.0'
