"""Space-time grid and the discrete operators of the 1-D nonlocal heat equation.

The state lives on the interior nodes ``x_i = i*h`` (``i = 1..N``) of the unit
interval with homogeneous Dirichlet conditions. The spatial operator is

    A_h = A_D + u w^T

where ``A_D`` is the ``nu``-scaled second-difference matrix and the rank-one
term is the node-based Riemann sum of a separated kernel
``K(x, theta) = K1(x) K2(theta)``: ``u = K1(x_i)`` and ``w = h*K2(x_i)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EmptyControlRegionError, InvalidArgumentError, InvalidKernelError


@dataclass(frozen=True)
class Grid:
    n_interior: int
    n_steps: int
    horizon: float
    nu: float

    @property
    def h(self) -> float:
        return 1.0 / (self.n_interior + 1)

    @property
    def dt(self) -> float:
        return self.horizon / self.n_steps

    @property
    def x(self) -> np.ndarray:
        """Interior node coordinates ``x_1..x_N``."""
        return np.arange(1, self.n_interior + 1) * self.h

    @property
    def t(self) -> np.ndarray:
        """Time nodes ``t_0..t_M``."""
        return np.arange(self.n_steps + 1) * self.dt

    @property
    def shape(self) -> tuple[int, int]:
        """Shape of a space-time grid function ``(M, N)``."""
        return (self.n_steps, self.n_interior)


def build_grid(n_interior: int, n_steps: int, horizon: float = 1.0, nu: float = 0.1) -> Grid:
    if int(n_interior) != n_interior or n_interior < 1:
        raise InvalidArgumentError(f"n_interior must be a positive integer, got {n_interior!r}")
    if int(n_steps) != n_steps or n_steps < 1:
        raise InvalidArgumentError(f"n_steps must be a positive integer, got {n_steps!r}")
    if not horizon > 0 or not math.isfinite(horizon):
        raise InvalidArgumentError(f"horizon must be positive, got {horizon!r}")
    if not nu >= 0 or not math.isfinite(nu):
        raise InvalidArgumentError(f"nu must be nonnegative, got {nu!r}")
    return Grid(int(n_interior), int(n_steps), float(horizon), float(nu))


@dataclass(frozen=True, eq=False)
class SeparatedKernel:
    k1: np.ndarray
    k2: np.ndarray


def sample_kernel(k1: Callable, k2: Callable, grid: Grid) -> SeparatedKernel:
    """Sample ``K1`` and ``K2`` pointwise at the interior nodes.

    Both callables receive the full node array and must return an array of
    the same length (scalars are broadcast).
    """
    x = grid.x
    s1 = np.broadcast_to(np.asarray(k1(x), dtype=float), x.shape).copy()
    s2 = np.broadcast_to(np.asarray(k2(x), dtype=float), x.shape).copy()
    return kernel_from_samples(s1, s2, grid)


def kernel_from_samples(k1, k2, grid: Grid) -> SeparatedKernel:
    k1 = np.array(k1, dtype=float)
    k2 = np.array(k2, dtype=float)
    n = grid.n_interior
    if k1.shape != (n,) or k2.shape != (n,):
        raise InvalidArgumentError(
            f"kernel samples must have shape ({n},), got {k1.shape} and {k2.shape}")
    if not (np.all(np.isfinite(k1)) and np.all(np.isfinite(k2))):
        raise InvalidKernelError("kernel samples contain non-finite values")
    k1.setflags(write=False)
    k2.setflags(write=False)
    return SeparatedKernel(k1, k2)


def paper_kernel_factors() -> tuple[Callable, Callable]:
    """``K1(x) = sin(5 pi x)``, ``K2(theta) = 20 * 1_(0,0.5)(theta) * sin(pi theta)``."""

    def k1(x):
        return np.sin(5 * np.pi * x)

    def k2(theta):
        theta = np.asarray(theta, dtype=float)
        return 20.0 * ((theta > 0) & (theta < 0.5)) * np.sin(np.pi * theta)

    return k1, k2


_CONSTANT = re.compile(r"^constant\(\s*([^)]+?)\s*\)$")


def named_kernel(name: str, grid: Grid) -> SeparatedKernel:
    """Built-in kernels: ``"paper"``, ``"zero"`` and ``"constant(c)"`` (K = c)."""
    if name == "paper":
        return sample_kernel(*paper_kernel_factors(), grid)
    if name == "zero":
        return sample_kernel(lambda x: 0.0, lambda x: 0.0, grid)
    m = _CONSTANT.match(name)
    if m:
        try:
            c = float(m.group(1))
        except ValueError:
            raise InvalidKernelError(f"bad constant in kernel name {name!r}") from None
        return sample_kernel(lambda x: c, lambda x: 1.0, grid)
    raise InvalidKernelError(f"unknown kernel {name!r}")


@dataclass(frozen=True, eq=False)
class NonlocalOperator:
    """Tridiagonal-plus-rank-one matrix ``A_h = tridiag(sub, diag, sup) + u w^T``."""

    diag: np.ndarray
    sub: np.ndarray
    sup: np.ndarray
    u: np.ndarray
    w: np.ndarray

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    def matvec(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        out = self.diag * y
        out[1:] += self.sub * y[:-1]
        out[:-1] += self.sup * y[1:]
        out += self.u * (self.w @ y)
        return out

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        return self.transpose().matvec(y)

    def transpose(self) -> "NonlocalOperator":
        return NonlocalOperator(self.diag, self.sup, self.sub, self.w, self.u)

    def dense(self) -> np.ndarray:
        """Materialize the full matrix. Test and verification use only."""
        a = np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)
        return a + np.outer(self.u, self.w)


def assemble_operator(grid: Grid, kernel: SeparatedKernel) -> NonlocalOperator:
    n = grid.n_interior
    if kernel.k1.shape != (n,) or kernel.k2.shape != (n,):
        raise InvalidArgumentError(
            f"kernel sampled on {kernel.k1.shape[0]} nodes, grid has {n}")
    c = grid.nu / grid.h**2
    arrays = (
        np.full(n, 2.0 * c),
        np.full(n - 1, -c),
        np.full(n - 1, -c),
        np.array(kernel.k1, dtype=float),
        grid.h * np.array(kernel.k2, dtype=float),
    )
    for a in arrays:
        a.setflags(write=False)
    return NonlocalOperator(*arrays)


@dataclass(frozen=True, eq=False)
class ControlOperator:
    """Diagonal 0/1 matrix selecting the nodes inside the control region."""

    mask: np.ndarray

    def apply(self, y: np.ndarray) -> np.ndarray:
        # works on (N,) vectors and (M, N) space-time arrays alike
        return np.where(self.mask, y, 0.0)

    def dense(self) -> np.ndarray:
        return np.diag(self.mask.astype(float))


def assemble_control(grid: Grid, region: tuple[float, float]) -> ControlOperator:
    a, b = (float(r) for r in region)
    if not 0.0 <= a < b <= 1.0:
        raise InvalidArgumentError(f"control region must satisfy 0 <= a < b <= 1, got ({a}, {b})")
    x = grid.x
    mask = (x > a) & (x < b)
    if not mask.any():
        raise EmptyControlRegionError(f"no grid node lies inside ({a}, {b})")
    mask.setflags(write=False)
    return ControlOperator(mask)
