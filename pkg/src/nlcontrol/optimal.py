"""Discrete tracking functional, its gradient, and the optimal-control solve.

    J(v) = beta ||y(v, y0) - zbar||^2 + mu ||B v||^2

The minimizer solves ``(beta S*S + mu B*B) v = beta S* wbar`` with
``wbar = zbar - y(0, y0)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidArgumentError
from .evolution import Dynamics, _check_tgf, _check_vec, apply_S, apply_S_star, norm, solve_forward
from .iterative import SolverConfig, solve_spd


@dataclass(frozen=True, eq=False)
class ControlSetup:
    dynamics: Dynamics
    beta: float
    target: np.ndarray
    y0: Optional[np.ndarray] = None
    mu: float = 1.0

    def __post_init__(self):
        grid = self.dynamics.grid
        if not self.beta > 0:
            raise InvalidArgumentError(f"beta must be positive, got {self.beta!r}")
        if not self.mu > 0:
            raise InvalidArgumentError(f"mu must be positive, got {self.mu!r}")
        object.__setattr__(self, "target", _check_tgf(grid, self.target, "target"))
        y0 = np.zeros(grid.n_interior) if self.y0 is None else _check_vec(grid, self.y0, "y0")
        object.__setattr__(self, "y0", y0)

    @property
    def grid(self):
        return self.dynamics.grid


@dataclass
class SolveReport:
    """Cost decomposition and iteration record.

    ``cost_total == cost_tracking + cost_control + offset + (regret_term or 0)``.
    """

    iterations: int = 0
    residual_history: list = field(default_factory=list)
    cost_total: float = 0.0
    cost_tracking: float = 0.0
    cost_control: float = 0.0
    regret_term: Optional[float] = None
    offset: float = 0.0
    control_norm: float = 0.0
    distance: float = 0.0

    @property
    def residual(self) -> float:
        return self.residual_history[-1] if self.residual_history else 0.0


def tracking_parts(setup, v, y) -> SolveReport:
    grid = setup.grid
    bv = setup.dynamics.control.apply(v)
    dist = norm(grid, y - setup.target)
    cnorm = norm(grid, bv)
    tracking = setup.beta * dist**2
    control = setup.mu * cnorm**2
    return SolveReport(cost_total=tracking + control, cost_tracking=tracking,
                       cost_control=control, control_norm=cnorm, distance=dist)


def cost_J(setup: ControlSetup, v):
    """Return ``(J(v), parts)``."""
    v = _check_tgf(setup.grid, v, "v")
    y = solve_forward(setup.dynamics, v, setup.y0)[1:]
    parts = tracking_parts(setup, v, y)
    return parts.cost_total, parts


def free_state(setup: ControlSetup) -> np.ndarray:
    """Uncontrolled state ``(y^1..y^M)`` from ``setup.y0``."""
    return solve_forward(setup.dynamics, None, setup.y0)[1:]


def grad_J(setup: ControlSetup, v) -> np.ndarray:
    """L2_dt gradient ``2 beta S*(S v - wbar) + 2 mu B*B v``."""
    dyn = setup.dynamics
    v = _check_tgf(setup.grid, v, "v")
    wbar = setup.target - free_state(setup)
    return 2 * setup.beta * apply_S_star(dyn, apply_S(dyn, v) - wbar) + 2 * setup.mu * dyn.control.apply(v)


def normal_operator(setup: ControlSetup):
    dyn = setup.dynamics
    beta, mu = setup.beta, setup.mu

    def apply_h(v):
        return beta * apply_S_star(dyn, apply_S(dyn, v)) + mu * dyn.control.apply(v)

    return apply_h


def normal_rhs(setup: ControlSetup) -> np.ndarray:
    return setup.beta * apply_S_star(setup.dynamics, setup.target - free_state(setup))


def solve_optimal_control(setup: ControlSetup, cfg: SolverConfig = SolverConfig()):
    """Solve the normal equation; returns ``(v, report)``.

    Raises :class:`~nlcontrol.errors.NonConvergenceError` carrying the last
    iterate if ``cfg.max_iter`` is exhausted.
    """
    result = solve_spd(normal_operator(setup), normal_rhs(setup), cfg)
    v = result.x
    if cfg.mask_control:
        v = setup.dynamics.control.apply(v)
    _, report = cost_J(setup, v)
    report.iterations = result.iterations
    report.residual_history = list(result.residual_history)
    return v, report
