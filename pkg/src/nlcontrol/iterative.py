"""Matrix-free iterative solvers for the SPD normal equations ``H v = b``."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidArgumentError, NonConvergenceError

METHODS = ("cg", "gd")


@dataclass(frozen=True)
class SolverConfig:
    method: str = "cg"
    tol: float = 1e-8
    max_iter: int = 500
    step: Optional[float] = None  # gradient descent only; None picks 1/||H||
    dense: bool = False  # dense LU per time step instead of Thomas + Sherman-Morrison
    mask_control: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidArgumentError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.tol > 0:
            raise InvalidArgumentError(f"tol must be positive, got {self.tol!r}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise InvalidArgumentError(f"max_iter must be a positive integer, got {self.max_iter!r}")
        if self.step is not None and not self.step > 0:
            raise InvalidArgumentError(f"step must be positive, got {self.step!r}")


@dataclass
class IterationResult:
    x: np.ndarray
    iterations: int
    residual_history: list = field(default_factory=list)


def conjugate_gradient(apply_h: Callable, b: np.ndarray, tol: float = 1e-8,
                       max_iter: int = 500, x0=None) -> IterationResult:
    """Plain CG. Stops when ``||H x - b|| <= tol * ||b||`` (Euclidean norms).

    The history records the relative residual before each iteration and at exit.
    """
    b = np.asarray(b, dtype=float)
    b_norm = np.linalg.norm(b)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    if b_norm == 0.0 and x0 is None:
        return IterationResult(x, 0, [0.0])
    scale = b_norm if b_norm > 0 else 1.0
    r = b - apply_h(x) if x0 is not None else b.copy()
    p = r.copy()
    rr = float(np.vdot(r, r))
    history = [np.sqrt(rr) / scale]
    it = 0
    while history[-1] > tol:
        if it >= max_iter:
            raise NonConvergenceError(
                f"CG did not reach tol={tol:g} in {max_iter} iterations "
                f"(relative residual {history[-1]:.3e})",
                iterate=x, residual=history[-1], history=history)
        hp = apply_h(p)
        curv = float(np.vdot(p, hp))
        if curv <= 0.0:
            raise NonConvergenceError(
                "CG met non-positive curvature; operator is not SPD on this subspace",
                iterate=x, residual=history[-1], history=history)
        alpha = rr / curv
        x = x + alpha * p
        r = r - alpha * hp
        rr_new = float(np.vdot(r, r))
        p = r + (rr_new / rr) * p
        rr = rr_new
        it += 1
        history.append(np.sqrt(rr) / scale)
    return IterationResult(x, it, history)


def estimate_norm(apply_h: Callable, shape, n_iter: int = 30, seed: int = 0) -> float:
    """Power-iteration estimate of the largest eigenvalue of an SPD operator."""
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(shape)
    q /= np.linalg.norm(q)
    lam = 0.0
    for _ in range(n_iter):
        hq = apply_h(q)
        lam = float(np.vdot(q, hq))
        nrm = np.linalg.norm(hq)
        if nrm == 0.0:
            return 0.0
        q = hq / nrm
    return max(lam, float(nrm))


def gradient_descent(apply_h: Callable, b: np.ndarray, tol: float = 1e-8,
                     max_iter: int = 500, step: Optional[float] = None) -> IterationResult:
    """Fixed-step steepest descent on ``1/2 <Hx, x> - <b, x>``."""
    b = np.asarray(b, dtype=float)
    b_norm = np.linalg.norm(b)
    x = np.zeros_like(b)
    if b_norm == 0.0:
        return IterationResult(x, 0, [0.0])
    if step is None:
        # deterministic seed keeps repeated runs byte-identical
        step = 1.0 / (1.05 * estimate_norm(apply_h, b.shape))
    r = b.copy()
    history = [np.linalg.norm(r) / b_norm]
    it = 0
    while history[-1] > tol:
        if it >= max_iter:
            raise NonConvergenceError(
                f"gradient descent did not reach tol={tol:g} in {max_iter} iterations "
                f"(relative residual {history[-1]:.3e})",
                iterate=x, residual=history[-1], history=history)
        x = x + step * r
        r = b - apply_h(x)
        it += 1
        history.append(np.linalg.norm(r) / b_norm)
    return IterationResult(x, it, history)


def solve_spd(apply_h: Callable, b: np.ndarray, cfg: SolverConfig) -> IterationResult:
    if cfg.method == "cg":
        return conjugate_gradient(apply_h, b, tol=cfg.tol, max_iter=cfg.max_iter)
    return gradient_descent(apply_h, b, tol=cfg.tol, max_iter=cfg.max_iter, step=cfg.step)
