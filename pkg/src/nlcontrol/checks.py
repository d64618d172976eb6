"""Self-tests run by ``nlcontrol check``: adjoint identities, dense oracles, gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dense import (
    dense_low_regret,
    dense_operator,
    dense_optimal_control,
    dense_R,
    dense_R_star,
    space_time_matrices,
)
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
    vec_inner,
    x_inner,
)
from .grid import build_grid, named_kernel
from .iterative import SolverConfig
from .lowregret import LowRegretSetup, cost_J_gamma, grad_J_gamma, solve_low_regret
from .optimal import ControlSetup, cost_J, grad_J, solve_optimal_control


@dataclass
class CheckResult:
    name: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.value:.3e} (tol {self.tolerance:.0e})"


def _rel(a, b) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


def adjoint_errors(dyn: Dynamics, probes: int, rng, beta=10.0, gamma=0.1):
    grid = dyn.grid
    s_err = r_err = 0.0
    for _ in range(probes):
        v = rng.standard_normal(grid.shape)
        z = rng.standard_normal(grid.shape)
        s0 = rng.standard_normal(grid.n_interior)
        lhs = inner(grid, apply_S(dyn, v), z)
        rhs = inner(grid, v, apply_S_star(dyn, z))
        s_err = max(s_err, abs(lhs - rhs) / (norm(grid, v) * norm(grid, z)))
        lhs = x_inner(grid, apply_R(dyn, v, beta, gamma), (s0, z))
        rhs = inner(grid, v, apply_R_star(dyn, s0, z, beta, gamma))
        scale = norm(grid, v) * np.sqrt(vec_inner(grid, s0, s0) + inner(grid, z, z))
        r_err = max(r_err, abs(lhs - rhs) / scale)
    return s_err, r_err


def fd_gradient_error(cost, grad, grid, v, w, eps=1e-5) -> float:
    fd = (cost(v + eps * w) - cost(v - eps * w)) / (2 * eps)
    an = inner(grid, grad(v), w)
    return abs(fd - an) / max(abs(an), 1e-300)


def run_checks(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    out = []

    grid = build_grid(60, 100, 1.0, 0.1)
    dyn = make_dynamics(grid, named_kernel("paper", grid))
    s_err, r_err = adjoint_errors(dyn, 20, rng)
    out.append(CheckResult("adjoint (S, S*) at N=60 M=100", s_err, 1e-10))
    out.append(CheckResult("adjoint (R, R*) at N=60 M=100", r_err, 1e-10))

    target = np.tile(np.sin(2 * np.pi * grid.x), (grid.n_steps, 1))
    setup = ControlSetup(dyn, 10.0, target, 2 * np.sin(np.pi * grid.x))
    lr = LowRegretSetup.create(dyn, 10.0, 0.1, target)
    g_err = lr_err = 0.0
    for _ in range(3):
        v, w = rng.standard_normal(grid.shape), rng.standard_normal(grid.shape)
        g_err = max(g_err, fd_gradient_error(lambda u: cost_J(setup, u)[0],
                                             lambda u: grad_J(setup, u), grid, v, w))
        lr_err = max(lr_err, fd_gradient_error(lambda u: cost_J_gamma(lr, u)[0],
                                               lambda u: grad_J_gamma(lr, u), grid, v, w))
    out.append(CheckResult("finite-difference gradient of J", g_err, 1e-5))
    out.append(CheckResult("finite-difference gradient of J^gamma", lr_err, 1e-5))

    small = build_grid(5, 4, 1.0, 0.1)
    kern = named_kernel("paper", small)
    sdyn = make_dynamics(small, kern, (0.2, 0.8))
    mats = space_time_matrices(small, dense_operator(small, kern.k1, kern.k2), sdyn.control.mask)
    v = rng.standard_normal(small.shape)
    z = rng.standard_normal(small.shape)
    s0 = rng.standard_normal(small.n_interior)
    beta, gamma = 10.0, 0.1
    out.append(CheckResult("dense oracle: forward", _rel(apply_S(sdyn, v), mats.unflat(mats.S @ v.ravel())), 1e-8))
    out.append(CheckResult("dense oracle: backward",
                           _rel(solve_backward(sdyn, z), mats.unflat(mats.P @ z.ravel())), 1e-8))
    r0, r1 = dense_R(mats, beta, gamma)
    a0, a1 = apply_R(sdyn, v, beta, gamma)
    out.append(CheckResult("dense oracle: R", max(_rel(a0, r0 @ v.ravel()), _rel(a1, mats.unflat(r1 @ v.ravel()))), 1e-8))
    q0, q1 = dense_R_star(mats, beta, gamma)
    out.append(CheckResult("dense oracle: R*", _rel(apply_R_star(sdyn, s0, z, beta, gamma),
                                                    mats.unflat(q0 @ s0 + q1 @ z.ravel())), 1e-8))
    tgt = np.tile(np.sin(2 * np.pi * small.x), (small.n_steps, 1))
    y0 = 2 * np.sin(np.pi * small.x)
    cfg = SolverConfig(tol=1e-13, max_iter=200)
    v_opt, _ = solve_optimal_control(ControlSetup(sdyn, beta, tgt, y0), cfg)
    out.append(CheckResult("dense oracle: optimal control",
                           _rel(v_opt, dense_optimal_control(mats, beta, tgt, y0)), 1e-8))
    v_lr, _ = solve_low_regret(LowRegretSetup.create(sdyn, beta, gamma, tgt), cfg)
    out.append(CheckResult("dense oracle: low-regret control",
                           _rel(v_lr, dense_low_regret(mats, beta, gamma, tgt)), 1e-8))
    return out
