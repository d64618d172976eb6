"""Implicit Euler time marching and the space-time maps S, S*, R, R*.

Grid functions on ``(0, T)`` are plain arrays of shape ``(M, N)`` whose row
``n-1`` holds the values at ``t_n`` (``n = 1..M``). Trajectories include the
initial state and have shape ``(M+1, N)``.

Inner products are the discrete L2 ones on the mesh,

    (f, g) = sum_n dt * h * (f^n . g^n)

and the first slot of the low-regret pairing uses ``h * (a . b)``. Because
the weights are uniform, the adjoints below coincide with plain transposes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .grid import (
    ControlOperator,
    Grid,
    NonlocalOperator,
    SeparatedKernel,
    assemble_control,
    assemble_operator,
)
from .linalg import StepSolver


@dataclass(frozen=True, eq=False)
class Dynamics:
    """Everything needed to march the controlled state equation."""

    grid: Grid
    operator: NonlocalOperator
    control: ControlOperator
    solver: StepSolver


def make_dynamics(grid: Grid, kernel: SeparatedKernel, region=(0.2, 0.8),
                  dense: bool = False) -> Dynamics:
    op = assemble_operator(grid, kernel)
    return Dynamics(grid, op, assemble_control(grid, region), StepSolver(op, grid.dt, dense=dense))


def inner(grid: Grid, f, g) -> float:
    return grid.dt * grid.h * float(np.vdot(f, g))


def norm(grid: Grid, f) -> float:
    return float(np.sqrt(inner(grid, f, f)))


def vec_inner(grid: Grid, a, b) -> float:
    return grid.h * float(np.dot(a, b))


def x_inner(grid: Grid, first, second) -> float:
    """Pairing on ``R^N x L2_dt``: ``h (a0 . b0) + (f, g)``."""
    (a0, f), (b0, g) = first, second
    return vec_inner(grid, a0, b0) + inner(grid, f, g)


def zeros(grid: Grid) -> np.ndarray:
    return np.zeros(grid.shape)


def _check_tgf(grid: Grid, f, name: str) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != grid.shape:
        raise InvalidArgumentError(f"{name} must have shape {grid.shape}, got {f.shape}")
    return f


def _check_vec(grid: Grid, a, name: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (grid.n_interior,):
        raise InvalidArgumentError(f"{name} must have shape ({grid.n_interior},), got {a.shape}")
    return a


def _march_forward(dyn: Dynamics, source, y0) -> np.ndarray:
    # y^{n+1} = (I/dt + A)^{-1} (y^n/dt + source^{n+1})
    grid = dyn.grid
    inv_dt = 1.0 / grid.dt
    out = np.empty((grid.n_steps + 1, grid.n_interior))
    out[0] = y0
    y = out[0]
    for n in range(grid.n_steps):
        rhs = y * inv_dt if source is None else y * inv_dt + source[n]
        y = dyn.solver._solve_unchecked(rhs, False)
        out[n + 1] = y
    return out


def _march_backward(dyn: Dynamics, source) -> np.ndarray:
    # p^n = (I/dt + A^T)^{-1} (p^{n+1}/dt + source^n), p^{M+1} = 0
    grid = dyn.grid
    inv_dt = 1.0 / grid.dt
    out = np.empty(grid.shape)
    p = np.zeros(grid.n_interior)
    for n in range(grid.n_steps - 1, -1, -1):
        p = dyn.solver._solve_unchecked(p * inv_dt + source[n], True)
        out[n] = p
    return out


def solve_forward(dyn: Dynamics, v=None, y0=None) -> np.ndarray:
    """State trajectory ``(y^0, ..., y^M)`` for control ``v`` and initial datum ``y0``.

    ``None`` stands for a zero control or a zero initial datum.
    """
    grid = dyn.grid
    y0 = np.zeros(grid.n_interior) if y0 is None else _check_vec(grid, y0, "y0")
    source = None if v is None else dyn.control.apply(_check_tgf(grid, v, "v"))
    return _march_forward(dyn, source, y0)


def solve_backward(dyn: Dynamics, z) -> np.ndarray:
    """Backward adjoint march with source ``z``, returns ``(p^1, ..., p^M)``."""
    return _march_backward(dyn, _check_tgf(dyn.grid, z, "z"))


def apply_S(dyn: Dynamics, v) -> np.ndarray:
    """Control-to-state map with zero initial datum."""
    return solve_forward(dyn, v)[1:]


def apply_S_star(dyn: Dynamics, z) -> np.ndarray:
    # the control enters the state through B, so the adjoint ends with B^T = B
    return dyn.control.apply(solve_backward(dyn, z))


def solve_xi(dyn: Dynamics, y):
    """Backward system driven by the state; returns ``(xi^1, xi)``."""
    xi = solve_backward(dyn, y)
    return xi[0].copy(), xi


def _check_weights(beta: float, gamma: float) -> None:
    if not beta > 0:
        raise InvalidArgumentError(f"beta must be positive, got {beta!r}")
    if not gamma > 0:
        raise InvalidArgumentError(f"gamma must be positive, got {gamma!r}")


def apply_R(dyn: Dynamics, v, beta: float, gamma: float):
    """``R v = (sqrt(beta/gamma) xi^1, y)`` via one forward and one backward march."""
    _check_weights(beta, gamma)
    y = apply_S(dyn, v)
    xi1, _ = solve_xi(dyn, y)
    return np.sqrt(beta / gamma) * xi1, y


def apply_R_star(dyn: Dynamics, scaled_sigma0, f, beta: float, gamma: float) -> np.ndarray:
    """Adjoint of :func:`apply_R`.

    ``scaled_sigma0`` is the first slot of the pairing, i.e. ``sqrt(beta/gamma) sigma_0``.
    The auxiliary state starts from ``-(beta/gamma) sigma_0`` with no source and
    feeds the backward march as ``f - sigma``.
    """
    _check_weights(beta, gamma)
    grid = dyn.grid
    s0 = _check_vec(grid, scaled_sigma0, "scaled_sigma0")
    f = _check_tgf(grid, f, "f")
    sigma0 = s0 / np.sqrt(beta / gamma)
    sigma = _march_forward(dyn, None, -(beta / gamma) * sigma0)[1:]
    return dyn.control.apply(_march_backward(dyn, f - sigma))
