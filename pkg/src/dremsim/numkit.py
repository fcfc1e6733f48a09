"""Small dense linear algebra and fixed-step ODE integration.

Determinants and adjugates are kept exact-by-construction at the sizes this
package actually uses (up to 8): cofactor expansion for small matrices, LU
with partial pivoting above. The adjugate is computed from cofactors, never
from an inverse, so it stays valid for singular matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

MAX_SIZE = 8


class DimensionError(ValueError):
    """Input matrix has the wrong shape for the requested operation."""


class IntegrationDivergedError(RuntimeError):
    """State became non-finite during integration."""

    def __init__(self, t_bad: float):
        super().__init__(f"integration diverged: non-finite state at t={t_bad:g}")
        self.t_bad = t_bad


def _require_square(a: np.ndarray, op: str) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"{op} requires a square matrix, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[0] > MAX_SIZE:
        raise DimensionError(f"{op} supports sizes 1..{MAX_SIZE}, got {a.shape[0]}")
    if not np.isfinite(a).all():
        raise DimensionError(f"{op} requires finite entries")
    return a


def _det_lu(a: np.ndarray) -> float:
    """Determinant by LU factorization with partial pivoting."""
    m = a.copy()
    n = m.shape[0]
    det = 1.0
    for col in range(n - 1):
        p = col + int(np.argmax(np.abs(m[col:, col])))
        if m[p, col] == 0.0:
            return 0.0
        if p != col:
            m[[col, p]] = m[[p, col]]
            det = -det
        det *= m[col, col]
        m[col + 1:, col:] -= np.outer(m[col + 1:, col] / m[col, col], m[col, col:])
    return det * m[n - 1, n - 1]


def _det_stack(a: np.ndarray) -> np.ndarray:
    """Determinants of a stack (..., m, m) of small matrices.

    Closed-form cofactor expansion for m <= 4; LU (LAPACK) above. Used to
    evaluate all cofactors of one matrix in a single vectorized pass.
    """
    m = a.shape[-1]
    if m == 1:
        return a[..., 0, 0].copy()
    if m == 2:
        return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    if m == 3:
        return (
            a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
            - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
            + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0])
        )
    if m == 4:
        # Laplace expansion over the first two rows against complementary
        # 2x2 minors of the last two: 6 terms instead of 24.
        out = None
        for s, (i, j), (r0, r1) in _LAPLACE4:
            top = a[..., 0, i] * a[..., 1, j] - a[..., 0, j] * a[..., 1, i]
            bot = a[..., 2, r0] * a[..., 3, r1] - a[..., 2, r1] * a[..., 3, r0]
            term = top * bot if s > 0 else -(top * bot)
            out = term if out is None else out + term
        return out
    return np.linalg.det(a)


_LAPLACE4 = (
    (1.0, (0, 1), (2, 3)),
    (-1.0, (0, 2), (1, 3)),
    (1.0, (0, 3), (1, 2)),
    (1.0, (1, 2), (0, 3)),
    (-1.0, (1, 3), (0, 2)),
    (1.0, (2, 3), (0, 1)),
)


_MINOR_INDEX_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _minor_indices(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index arrays mapping A -> stack of all (n-1)x(n-1) minors, plus signs."""
    cached = _MINOR_INDEX_CACHE.get(n)
    if cached is not None:
        return cached
    rows = np.empty((n, n, n - 1, n - 1), dtype=np.intp)
    cols = np.empty((n, n, n - 1, n - 1), dtype=np.intp)
    for i in range(n):
        keep_r = [r for r in range(n) if r != i]
        for j in range(n):
            keep_c = [c for c in range(n) if c != j]
            rows[i, j] = np.array(keep_r, dtype=np.intp)[:, None]
            cols[i, j] = np.array(keep_c, dtype=np.intp)[None, :]
    signs = np.fromfunction(lambda i, j: (-1.0) ** (i + j), (n, n))
    _MINOR_INDEX_CACHE[n] = (rows, cols, signs)
    return rows, cols, signs


def det(a: np.ndarray) -> float:
    """Determinant of a square matrix of size 1..8.

    Cofactor expansion up to size 4, LU with partial pivoting for 5..8.
    """
    a = _require_square(a, "det")
    n = a.shape[0]
    if n <= 4:
        return float(_det_stack(a))
    return float(_det_lu(a))


def adjugate(a: np.ndarray) -> np.ndarray:
    """Adjugate (transposed cofactor matrix) of a square matrix of size 1..8.

    Satisfies adjugate(a) @ a == det(a) * I up to rounding, including for
    singular matrices. Cofactors are explicit for sizes <= 5; larger sizes
    fall back to LU determinants of the minors.
    """
    a = _require_square(a, "adjugate")
    n = a.shape[0]
    if n == 1:
        return np.array([[1.0]])
    if n == 2:
        return np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]])
    if n == 3:
        # Unrolled cofactor transpose; this is the hot path of the mixing step.
        (a00, a01, a02), (a10, a11, a12), (a20, a21, a22) = a
        return np.array(
            [
                [a11 * a22 - a12 * a21, a02 * a21 - a01 * a22, a01 * a12 - a02 * a11],
                [a12 * a20 - a10 * a22, a00 * a22 - a02 * a20, a02 * a10 - a00 * a12],
                [a10 * a21 - a11 * a20, a01 * a20 - a00 * a21, a00 * a11 - a01 * a10],
            ]
        )
    rows, cols, signs = _minor_indices(n)
    cof = signs * _det_stack(a[rows, cols])
    return cof.T.copy()


def adjugate_times(a: np.ndarray, v: np.ndarray) -> tuple[np.ndarray, float]:
    """Fused (adjugate(a) @ v, det(a)) for the mixing hot path.

    Component i of adjugate(a) @ v is the determinant of a with column i
    replaced by v (Cramer), so the product and det(a) come out of one
    batched determinant evaluation instead of n^2 separate cofactors.
    Agrees with adjugate/det up to rounding, singular matrices included.
    """
    a = _require_square(a, "adjugate_times")
    n = a.shape[0]
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise DimensionError(f"vector has shape {v.shape}, expected ({n},)")
    if n == 1:
        return np.array([v[0]]), float(a[0, 0])
    stack = np.empty((n + 1, n, n))
    stack[:] = a
    for i in range(n):
        stack[i, :, i] = v
    dets = _det_stack(stack)
    return dets[:n], float(dets[n])


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled series of vector or matrix values.

    times has shape (N,), strictly increasing with a uniform step; values has
    shape (N, ...) with values[i] the sample at times[i].
    """

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or len(t) != len(v):
            raise DimensionError("times and values must have matching leading length")
        if len(t) > 1:
            dt = np.diff(t)
            if np.any(dt <= 0):
                raise DimensionError("times must be strictly increasing")
            if np.max(dt) - np.min(dt) > 1e-9 * max(1.0, np.max(dt)):
                raise DimensionError("times must be uniformly spaced")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def window(self, t1: float, t2: float) -> "TimeSeries":
        mask = (self.times >= t1 - 1e-12) & (self.times <= t2 + 1e-12)
        if not mask.any():
            raise ValueError(f"window [{t1}, {t2}] contains no samples")
        return TimeSeries(self.times[mask], self.values[mask])


@dataclass(frozen=True)
class OdeProblem:
    """First-order ODE x' = rhs(t, x) with initial state x0 at t0."""

    dimension: int
    rhs: Callable[[float, np.ndarray], np.ndarray]
    t0: float
    x0: np.ndarray

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (self.dimension,):
            raise DimensionError(
                f"x0 has shape {x0.shape}, expected ({self.dimension},)"
            )
        object.__setattr__(self, "x0", x0)


def integrate(
    problem: OdeProblem,
    t_end: float,
    h: float,
    observer: Optional[Callable[[float, np.ndarray], None]] = None,
    post_step: Optional[Callable[[float, np.ndarray], None]] = None,
    keep_states: bool = True,
) -> TimeSeries:
    """Integrate with the classical fixed-step 4th-order Runge-Kutta scheme.

    The observer (if given) is invoked at t0 and after every accepted step.
    post_step may mutate the state array in place after each step (used for
    symmetry enforcement of matrix-valued state blocks). With
    keep_states=False only the final state is retained in the returned
    series, which avoids storing long trajectories the caller samples
    through the observer anyway.

    Raises IntegrationDivergedError at the first step producing a
    non-finite state.
    """
    if h <= 0:
        raise ValueError("step size h must be positive")
    if t_end <= problem.t0:
        raise ValueError("t_end must exceed t0")
    n_steps = int(round((t_end - problem.t0) / h))
    rhs = problem.rhs
    x = problem.x0.copy()
    t0 = problem.t0
    if observer is not None:
        observer(t0, x)
    states = np.empty((n_steps + 1, problem.dimension)) if keep_states else None
    if states is not None:
        states[0] = x
    half = 0.5 * h
    sixth = h / 6.0
    t = t0
    for i in range(n_steps):
        k1 = rhs(t, x)
        k2 = rhs(t + half, x + half * k1)
        k3 = rhs(t + half, x + half * k2)
        k4 = rhs(t + h, x + h * k3)
        x = x + sixth * (k1 + 2.0 * (k2 + k3) + k4)
        t = t0 + (i + 1) * h
        if not np.isfinite(x).all():
            raise IntegrationDivergedError(t)
        if post_step is not None:
            post_step(t, x)
        if observer is not None:
            observer(t, x)
        if states is not None:
            states[i + 1] = x
    if states is None:
        return TimeSeries(np.array([t]), x[None, :])
    times = t0 + h * np.arange(n_steps + 1)
    return TimeSeries(times, states)
