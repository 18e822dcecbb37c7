"""Multi-restart projected gradient ascent on products of unit spheres.

The search space is an n-tuple of vectors, each constrained to the unit
sphere of the target space's own norm.  Gradients are numerical (central
differences, step 1e-5) and projection is renormalization.  Restart order
is deterministic and the first restart achieving the maximum within 1e-12
wins, so results never depend on scheduling.
"""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from .spaces import Space, norm_of, unit_vector

GRAD_STEP = 1e-5
MAX_ITERS = 60


def _project_rows(mat: np.ndarray, space: Space) -> np.ndarray:
    out = np.array(mat, dtype=float)
    for i in range(out.shape[0]):
        n = norm_of(out[i], space)
        if n == 0.0:
            out[i] = 0.0
            out[i, 0] = 1.0
            n = norm_of(out[i], space)
        out[i] /= n
    return out


def canonical_starts(space: Space, n_vectors: int) -> list[np.ndarray]:
    """Coordinate-vector and normalized-uniform starting tuples."""
    d = space.total_dim
    coords = np.zeros((n_vectors, d))
    for j in range(n_vectors):
        coords[j, j % d] = 1.0
    uniform = np.ones((n_vectors, d))
    return [_project_rows(coords, space), _project_rows(uniform, space)]


def ascend(
    objective: Callable[[np.ndarray], float],
    start: np.ndarray,
    space: Space,
    tol: float,
) -> tuple[float, np.ndarray]:
    """Projected ascent from one starting tuple; returns (value, point)."""
    x = _project_rows(start, space)
    fx = objective(x)
    step = 0.5
    for _ in range(MAX_ITERS):
        grad = np.zeros_like(x)
        for idx in np.ndindex(x.shape):
            x[idx] += GRAD_STEP
            up = objective(_project_rows(x, space))
            x[idx] -= 2 * GRAD_STEP
            down = objective(_project_rows(x, space))
            x[idx] += GRAD_STEP
            grad[idx] = (up - down) / (2 * GRAD_STEP)
        gnorm = float(np.sqrt(np.sum(grad * grad)))
        if gnorm == 0.0:
            break
        improved = False
        while step >= 1e-7:
            cand = _project_rows(x + step * grad / gnorm, space)
            fc = objective(cand)
            if fc > fx + tol:
                x, fx = cand, fc
                step *= 1.5
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return fx, x


def maximize_on_spheres(
    objective: Callable[[np.ndarray], float],
    space: Space,
    n_vectors: int,
    restarts: int,
    seed: int,
    tol: float,
    extra_starts: Iterable[np.ndarray] = (),
) -> tuple[float, np.ndarray]:
    """Best objective value over canonical, supplied, and random restarts."""
    starts: list[np.ndarray] = list(canonical_starts(space, n_vectors))
    for s in extra_starts:
        starts.append(np.asarray(s, dtype=float).reshape(n_vectors, space.total_dim))
    for r in range(max(0, restarts - len(starts))):
        rng = np.random.default_rng([seed, n_vectors, r])
        starts.append(
            np.vstack([unit_vector(space, rng).coords for _ in range(n_vectors)])
        )
    best_val = -np.inf
    best_x = starts[0]
    for start in starts:
        val, x = ascend(objective, start, space, tol)
        if val > best_val + 1e-12:
            best_val, best_x = val, x
    return best_val, best_x
