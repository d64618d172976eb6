"""Exact per-step solves with ``(I/dt + A_h)`` and its transpose.

``I/dt + A_h = T + u w^T`` with ``T`` tridiagonal. ``T`` is factored once by
the Thomas recurrences, and the rank-one part is handled by Sherman-Morrison:

    (T + u w^T)^{-1} r = T^{-1} r - s * (w . T^{-1} r) / (1 + w . s),  s = T^{-1} u

The transposed system swaps ``u`` and ``w`` and uses ``T^T``.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import InvalidArgumentError, SingularOperatorError
from .grid import NonlocalOperator


class _Thomas:
    """Precomputed Thomas elimination for a tridiagonal matrix (no pivoting)."""

    def __init__(self, sub, diag, sup):
        n = len(diag)
        sub = [0.0] + [float(a) for a in sub]
        diag = [float(b) for b in diag]
        sup = [float(c) for c in sup] + [0.0]
        inv_piv = [0.0] * n
        cp = [0.0] * n
        prev_c = 0.0
        for i in range(n):
            piv = diag[i] - sub[i] * prev_c
            if piv == 0.0 or not np.isfinite(piv):
                raise SingularOperatorError(f"zero pivot at row {i} of tridiagonal factor")
            inv_piv[i] = 1.0 / piv
            prev_c = sup[i] / piv
            cp[i] = prev_c
        self._sub = sub
        self._inv_piv = inv_piv
        self._cp = cp
        self.n = n

    def solve(self, rhs) -> list[float]:
        sub, inv_piv, cp = self._sub, self._inv_piv, self._cp
        n = self.n
        d = [0.0] * n
        prev = 0.0
        for i, r in enumerate(rhs):
            prev = (r - sub[i] * prev) * inv_piv[i]
            d[i] = prev
        for i in range(n - 2, -1, -1):
            d[i] -= cp[i] * d[i + 1]
        return d


class _RankOneUpdated:
    def __init__(self, thomas: _Thomas, u: np.ndarray, w: np.ndarray):
        self._thomas = thomas
        s = thomas.solve(u.tolist())
        denom = 1.0 + float(np.dot(w, s))
        if denom == 0.0 or not np.isfinite(denom):
            raise SingularOperatorError("Sherman-Morrison denominator 1 + w.T^{-1}u vanishes")
        self._s = np.array(s)
        self._w = w
        self._denom = denom

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        z = np.array(self._thomas.solve(rhs.tolist()))
        return z - self._s * (np.dot(self._w, z) / self._denom)


class _DenseLU:
    def __init__(self, matrix: np.ndarray, trans: int):
        self._lu = lu_factor(matrix, check_finite=True)
        if np.any(np.diag(self._lu[0]) == 0.0):
            raise SingularOperatorError("dense step matrix is singular")
        self._trans = trans

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return lu_solve(self._lu, rhs, trans=self._trans)


class StepSolver:
    """Solves ``(I/dt + A) x = r`` with ``A = A_h`` or ``A_h^T``.

    Immutable after construction; ``solve`` is pure and can be shared.
    """

    def __init__(self, op: NonlocalOperator, dt: float, dense: bool = False):
        if not dt > 0:
            raise InvalidArgumentError(f"dt must be positive, got {dt!r}")
        self.op = op
        self.dt = float(dt)
        self.n = op.n
        self.dense = dense
        if dense:
            mat = np.eye(op.n) / dt + op.dense()
            self._fwd = _DenseLU(mat, trans=0)
            self._adj = _DenseLU(mat, trans=1)
        else:
            # A_D is symmetric, so one factorization serves both directions
            thomas = _Thomas(op.sub, op.diag + 1.0 / dt, op.sup)
            if not np.array_equal(op.sub, op.sup):
                thomas_t = _Thomas(op.sup, op.diag + 1.0 / dt, op.sub)
            else:
                thomas_t = thomas
            self._fwd = _RankOneUpdated(thomas, np.asarray(op.u), np.asarray(op.w))
            self._adj = _RankOneUpdated(thomas_t, np.asarray(op.w), np.asarray(op.u))

    def solve(self, rhs, transposed: bool = False) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape != (self.n,):
            raise InvalidArgumentError(f"rhs must have shape ({self.n},), got {rhs.shape}")
        if not np.all(np.isfinite(rhs)):
            raise InvalidArgumentError("rhs contains non-finite values")
        return (self._adj if transposed else self._fwd).solve(rhs)

    def _solve_unchecked(self, rhs: np.ndarray, transposed: bool) -> np.ndarray:
        # hot path for the time-marching loops, inputs already validated
        return (self._adj if transposed else self._fwd).solve(rhs)


def build_step_solver(op: NonlocalOperator, dt: float, dense: bool = False) -> StepSolver:
    return StepSolver(op, dt, dense=dense)


def solve_step(solver: StepSolver, rhs, transposed: bool = False) -> np.ndarray:
    return solver.solve(rhs, transposed=transposed)
