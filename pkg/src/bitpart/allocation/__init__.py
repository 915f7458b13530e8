from bitpart.allocation.afp import (
    AfpPlan,
    AfpProblem,
    afp_gradient,
    afp_hessian,
    afp_objective,
    afp_optimize,
    afp_rate_loss_bound,
    project_simplex,
)
from bitpart.allocation.integerize import integer_split, integerize
from bitpart.allocation.mfp import (
    MAX_BITS_PER_LINK,
    BitAllocation,
    LinkStats,
    equal_allocate,
    mfp_allocate_real,
    mfp_link_costs,
    mfp_objective,
    mfp_rate_loss_bound,
)
from bitpart.allocation.newton import ConvergenceError, NewtonConfig, NewtonResult, minimize_projected_newton
