"""Generic boundary-value problems for first-order linear ODE systems.

Solves y' + A(t) y = f(t) with the most general continuous boundary condition
B y = q on the Holder space C^{n+1,alpha}, decides unique solvability through
the matrix [BY], and runs parameter-continuity studies: limit-condition
checks, measure-level boundary convergence, and error-vs-discrepancy windows.
"""

from .boundary import (BoundaryOperator, StieltjesMeasure, apply_boundary,
                       boundary_matrix, measure_difference, measure_end_value,
                       measure_primitive, total_variation)
from .errors import (ConvergenceError, DimensionError, DomainError,
                     HolderBvpError, IntegrationError, NotWellPosedError,
                     OrderError, ParseError, SingularMatriciantError,
                     UsageError)
from .expressions import (EPS, T, Const, Expr, Var, cos, differentiate, exp,
                          free_variables, parse_expr, sin)
from .families import (ConvergenceReport, LimitConditionsReport,
                       MeasureConditionsReport, ProblemFamily,
                       check_condition_zero, check_limit_conditions,
                       check_measure_conditions, convergence_study,
                       default_eps_list, probe_corpus)
from .grid import GridFunction, Interval, sample
from .matriciant import (Matriciant, lift_derivatives, liouville_defect,
                         matriciant, picard_matriciant, recover_coefficient,
                         volterra_apply)
from .norms import HolderParams, holder_norm, holder_seminorm, sup_norm
from .problemfile import parse_problem, parse_problem_text, write_problem
from .solver import (ProblemInstance, ResidualReport, Solution,
                     WellposednessReport, is_wellposed, residual, solve)

__version__ = "0.1.0"
