"""Optimal and low-regret control of a 1-D nonlocal heat equation.

The equation ``y_t - nu y_xx + int_0^1 K1(x) K2(theta) y(theta, t) dtheta = v 1_O``
on (0, 1) with Dirichlet conditions is discretized by finite differences in
space and implicit Euler in time.
"""

from .evolution import (
    Dynamics,
    apply_R,
    apply_R_star,
    apply_S,
    apply_S_star,
    inner,
    make_dynamics,
    norm,
    solve_backward,
    solve_forward,
    solve_xi,
)
from .grid import assemble_control, assemble_operator, build_grid, named_kernel, sample_kernel
from .iterative import SolverConfig
from .linalg import StepSolver, build_step_solver, solve_step
from .lowregret import (
    LowRegretSetup,
    cost_J_gamma,
    evaluate_control,
    grad_J_gamma,
    solve_low_regret,
)
from .optimal import ControlSetup, SolveReport, cost_J, grad_J, solve_optimal_control

__version__ = "0.1.0"
