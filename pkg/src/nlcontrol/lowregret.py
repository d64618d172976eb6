"""Low-regret control for unknown initial data.

The functional is

    J^g(v) = beta ||y(v,0) - zbar||^2 + mu ||B v||^2 - beta ||zbar||^2 + (beta^2/gamma) |xi^1|^2

where ``xi`` solves the backward system driven by ``y(v,0)`` and ``|.|`` is the
h-weighted norm on R^N. Its minimizer solves

    (beta R*R + mu B*B) v = beta S* zbar.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .evolution import (
    Dynamics,
    _check_tgf,
    _check_vec,
    apply_R,
    apply_R_star,
    apply_S,
    apply_S_star,
    norm,
    solve_forward,
    solve_xi,
    vec_inner,
)
from .iterative import SolverConfig, solve_spd
from .optimal import ControlSetup, tracking_parts


@dataclass(frozen=True, eq=False)
class LowRegretSetup:
    base: ControlSetup
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise InvalidArgumentError(f"gamma must be positive, got {self.gamma!r}")
        if np.any(self.base.y0 != 0):
            raise InvalidArgumentError("low-regret setup requires a zero initial datum")

    @classmethod
    def create(cls, dynamics: Dynamics, beta: float, gamma: float, target, mu: float = 1.0):
        return cls(ControlSetup(dynamics, beta, target, None, mu), gamma)

    @property
    def dynamics(self) -> Dynamics:
        return self.base.dynamics

    @property
    def beta(self) -> float:
        return self.base.beta

    @property
    def grid(self):
        return self.base.grid


def cost_J_gamma(setup: LowRegretSetup, v):
    """Return ``(J^gamma(v), parts)``; ``parts.regret_term`` is ``(beta^2/gamma)|xi^1|^2``."""
    grid = setup.grid
    v = _check_tgf(grid, v, "v")
    beta = setup.beta
    y = apply_S(setup.dynamics, v)
    xi1, _ = solve_xi(setup.dynamics, y)
    parts = tracking_parts(setup.base, v, y)
    parts.offset = -beta * norm(grid, setup.base.target) ** 2
    parts.regret_term = beta**2 / setup.gamma * vec_inner(grid, xi1, xi1)
    parts.cost_total = parts.cost_tracking + parts.cost_control + parts.offset + parts.regret_term
    return parts.cost_total, parts


def grad_J_gamma(setup: LowRegretSetup, v) -> np.ndarray:
    """L2_dt gradient ``2 beta R*R v + 2 mu B*B v - 2 beta S* zbar``."""
    dyn = setup.dynamics
    beta, gamma = setup.beta, setup.gamma
    v = _check_tgf(setup.grid, v, "v")
    rr = apply_R_star(dyn, *apply_R(dyn, v, beta, gamma), beta, gamma)
    return (2 * beta * rr + 2 * setup.base.mu * dyn.control.apply(v)
            - 2 * beta * apply_S_star(dyn, setup.base.target))


def normal_operator(setup: LowRegretSetup):
    dyn = setup.dynamics
    beta, gamma, mu = setup.beta, setup.gamma, setup.base.mu

    def apply_h(v):
        return beta * apply_R_star(dyn, *apply_R(dyn, v, beta, gamma), beta, gamma) + mu * dyn.control.apply(v)

    return apply_h


def normal_rhs(setup: LowRegretSetup) -> np.ndarray:
    return setup.beta * apply_S_star(setup.dynamics, setup.base.target)


def solve_low_regret(setup: LowRegretSetup, cfg: SolverConfig = SolverConfig()):
    """Solve the low-regret normal equation; returns ``(v, report)``."""
    result = solve_spd(normal_operator(setup), normal_rhs(setup), cfg)
    v = result.x
    if cfg.mask_control:
        v = setup.dynamics.control.apply(v)
    _, report = cost_J_gamma(setup, v)
    report.iterations = result.iterations
    report.residual_history = list(result.residual_history)
    return v, report


def evaluate_control(dyn: Dynamics, v, y0, beta: float, target):
    """Run a fixed control from initial datum ``y0``.

    Returns ``(energy, distance)`` with ``energy = (beta ||y - zbar||^2 + ||B v||^2) / 2``,
    the normalization used when comparing controls across initial data, and
    ``distance = ||y - zbar||``.
    """
    grid = dyn.grid
    v = _check_tgf(grid, v, "v")
    y0 = _check_vec(grid, y0, "y0")
    target = _check_tgf(grid, target, "target")
    y = solve_forward(dyn, v, y0)[1:]
    dist = norm(grid, y - target)
    energy = 0.5 * (beta * dist**2 + norm(grid, dyn.control.apply(v)) ** 2)
    return energy, dist
