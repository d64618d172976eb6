"""Brute-force dense reference for small grids.

Builds the full space-time matrices of the discrete maps directly from the
definitions (double-loop operator assembly, explicit matrix powers). Nothing
here calls the structured solvers; it exists to check them.
Memory is O((N M)^2), so keep N*M to a few thousand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid


def dense_operator(grid: Grid, k1, k2) -> np.ndarray:
    """Entry-by-entry assembly of ``A_h`` from kernel samples."""
    n, h, nu = grid.n_interior, grid.h, grid.nu
    a = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            a[i, j] = h * k1[i] * k2[j]
            if i == j:
                a[i, j] += 2.0 * nu / h**2
            elif abs(i - j) == 1:
                a[i, j] -= nu / h**2
    return a


@dataclass
class SpaceTimeMatrices:
    grid: Grid
    A: np.ndarray
    B: np.ndarray
    S: np.ndarray  # v -> (y^1..y^M), zero initial datum
    F: np.ndarray  # y0 -> (y^1..y^M), zero control
    P: np.ndarray  # z -> (p^1..p^M), backward march without B
    E: np.ndarray  # one free step y^n -> y^{n+1}

    @property
    def Xi1(self) -> np.ndarray:
        """``y -> xi^1``."""
        return self.P[: self.grid.n_interior]

    def flat(self, f) -> np.ndarray:
        return np.asarray(f, dtype=float).reshape(-1)

    def unflat(self, f) -> np.ndarray:
        return np.asarray(f).reshape(self.grid.shape)


def space_time_matrices(grid: Grid, A: np.ndarray, mask) -> SpaceTimeMatrices:
    n, m, dt = grid.n_interior, grid.n_steps, grid.dt
    B = np.diag(np.asarray(mask, dtype=float))
    G = np.linalg.inv(np.eye(n) / dt + A)
    E = G / dt
    powers = [np.eye(n)]
    for _ in range(m):
        powers.append(E @ powers[-1])
    S = np.zeros((n * m, n * m))
    P = np.zeros((n * m, n * m))
    F = np.zeros((n * m, n))
    GB = G @ B
    GT = G.T
    for row in range(m):  # time level row+1
        F[row * n:(row + 1) * n] = powers[row + 1]
        for col in range(row + 1):
            S[row * n:(row + 1) * n, col * n:(col + 1) * n] = powers[row - col] @ GB
        for col in range(row, m):
            P[row * n:(row + 1) * n, col * n:(col + 1) * n] = powers[col - row].T @ GT
    return SpaceTimeMatrices(grid, A, B, S, F, P, E)


def block_mask(mats: SpaceTimeMatrices) -> np.ndarray:
    return np.tile(np.diag(mats.B) > 0, mats.grid.n_steps)


def dense_S_star(mats: SpaceTimeMatrices) -> np.ndarray:
    # uniform weights cancel: the L2_dt adjoint is the Euclidean transpose
    return mats.S.T


def dense_R(mats: SpaceTimeMatrices, beta: float, gamma: float):
    """Return the two blocks of ``R``: ``v -> scaled xi^1`` and ``v -> y``."""
    return np.sqrt(beta / gamma) * mats.Xi1 @ mats.S, mats.S


def dense_R_star(mats: SpaceTimeMatrices, beta: float, gamma: float):
    """Blocks of the adjoint of ``R`` under ``h a.b + dt h f.g``."""
    r0, r1 = dense_R(mats, beta, gamma)
    return r0.T / mats.grid.dt, r1.T


def _solve_on_support(mats, H, rhs) -> np.ndarray:
    # H vanishes off the control region; the solution is supported on it
    idx = block_mask(mats)
    v = np.zeros(H.shape[0])
    v[idx] = np.linalg.solve(H[np.ix_(idx, idx)], rhs[idx])
    return v


def dense_optimal_control(mats, beta, target, y0, mu=1.0) -> np.ndarray:
    S = mats.S
    wbar = mats.flat(target) - mats.F @ y0
    H = beta * S.T @ S + mu * np.kron(np.eye(mats.grid.n_steps), mats.B)
    return mats.unflat(_solve_on_support(mats, H, beta * S.T @ wbar))


def dense_low_regret(mats, beta, gamma, target, mu=1.0) -> np.ndarray:
    S, X = mats.S, mats.Xi1
    H = (beta * S.T @ S + mu * np.kron(np.eye(mats.grid.n_steps), mats.B)
         + beta**2 / (gamma * mats.grid.dt) * (X @ S).T @ (X @ S))
    return mats.unflat(_solve_on_support(mats, H, beta * S.T @ mats.flat(target)))
