"""Finite-dimensional normed spaces and deterministic vector sampling.

Three families are supported: ell^p sequence spaces, Schatten classes of
real matrices (ell^p norm of the singular values), and spaces of operators
between finite-dimensional Hilbert spaces carrying the operator norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

LP = "lp"
SCHATTEN = "schatten"
HILBERT_OP = "hilbert_op"

_JACOBI_TOL = 1e-12
_JACOBI_MAX_SWEEPS = 60


@dataclass(frozen=True)
class Space:
    """Descriptor of a finite-dimensional normed space.

    ``kind`` is one of ``"lp"`` (p in [1, inf], dimension ``dim``),
    ``"schatten"`` (p in [1, inf), ``rows`` x ``cols`` matrices) or
    ``"hilbert_op"`` (``rows`` x ``cols`` matrices with the operator norm,
    i.e. operators from R^cols to R^rows).
    """

    kind: str
    p: float = 2.0
    dim: int = 0
    rows: int = 0
    cols: int = 0

    def __post_init__(self):
        if self.kind not in (LP, SCHATTEN, HILBERT_OP):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.kind == LP:
            if not self.p >= 1:
                raise ValueError("lp exponent must satisfy p >= 1")
            if self.dim < 1:
                raise ValueError("lp dimension must be >= 1")
        else:
            if self.rows < 1 or self.cols < 1:
                raise ValueError("matrix dimensions must be >= 1")
            if self.kind == SCHATTEN and not (1 <= self.p < math.inf):
                raise ValueError("Schatten exponent must satisfy 1 <= p < inf")

    @property
    def total_dim(self) -> int:
        """Length of the flat coordinate array of a vector in this space."""
        if self.kind == LP:
            return self.dim
        return self.rows * self.cols

    @property
    def is_hilbert(self) -> bool:
        """True when the norm comes from an inner product.

        This holds for lp with p = 2 and for the Schatten 2-class
        (Frobenius norm); it unlocks exact randomized-norm oracles.
        """
        if self.kind == LP:
            return self.p == 2
        if self.kind == SCHATTEN:
            return self.p == 2
        return False


def lp_space(p: float, dim: int) -> Space:
    return Space(LP, p=float(p), dim=dim)


def schatten_space(p: float, rows: int, cols: int) -> Space:
    return Space(SCHATTEN, p=float(p), rows=rows, cols=cols)


def hilbert_op_space(dim_h: int, dim_e: int) -> Space:
    """Operators from an R^dim_h to an R^dim_e Hilbert space (operator norm)."""
    return Space(HILBERT_OP, rows=dim_e, cols=dim_h)


@dataclass(frozen=True)
class Vector:
    """A point of a :class:`Space`, stored as a flat float64 array.

    Matrices are stored row-major.
    """

    coords: np.ndarray = field(repr=False)
    space: Space

    def __post_init__(self):
        arr = np.asarray(self.coords, dtype=float).ravel()
        object.__setattr__(self, "coords", arr)
        if arr.shape != (self.space.total_dim,):
            raise ValueError(
                f"coordinate length {arr.shape} does not match space "
                f"dimension {self.space.total_dim}"
            )

    def as_matrix(self) -> np.ndarray:
        if self.space.kind == LP:
            raise ValueError("sequence-space vectors have no matrix form")
        return self.coords.reshape(self.space.rows, self.space.cols)


def dual_exponent(p: float) -> float:
    """Hoelder conjugate: 1/p + 1/p' = 1, with 1 and inf dual to each other."""
    if p < 1:
        raise ValueError(f"exponent must be >= 1, got {p}")
    if p == 1:
        return math.inf
    if p == math.inf:
        return 1.0
    return p / (p - 1.0)


def singular_values(mat: np.ndarray, return_right_vectors: bool = False):
    """Singular values of a real matrix by one-sided Jacobi iteration.

    Deterministic and dependency-free; rotations are applied to column
    pairs in a fixed sweep order until all columns are orthogonal to
    relative tolerance 1e-12.  Values are returned sorted descending.
    When ``return_right_vectors`` is set, the orthogonal matrix of right
    singular vectors (columns, same order) is returned as well.
    """
    a = np.array(mat, dtype=float)
    if a.ndim != 2:
        raise ValueError("expected a matrix")
    transposed = a.shape[0] < a.shape[1]
    if transposed:
        a = a.T
    n = a.shape[1]
    v = np.eye(n)
    for _ in range(_JACOBI_MAX_SWEEPS):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                ci, cj = a[:, i], a[:, j]
                alpha = ci @ ci
                beta = cj @ cj
                gamma = ci @ cj
                if abs(gamma) <= _JACOBI_TOL * math.sqrt(alpha * beta):
                    continue
                off = max(off, abs(gamma))
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.hypot(1.0, zeta))
                c = 1.0 / math.hypot(1.0, t)
                s = c * t
                a[:, [i, j]] = a[:, [i, j]] @ np.array([[c, s], [-s, c]])
                v[:, [i, j]] = v[:, [i, j]] @ np.array([[c, s], [-s, c]])
        if off == 0.0:
            break
    sv = np.sqrt(np.sum(a * a, axis=0))
    order = np.argsort(-sv)
    sv = sv[order]
    if not return_right_vectors:
        return sv
    v = v[:, order]
    if transposed:
        # right singular vectors of the original matrix are the (normalized)
        # rotated columns of its transpose
        u = np.zeros_like(a)
        nz = sv > 0
        u[:, nz] = a[:, order][:, nz] / sv[nz]
        return sv, u
    return sv, v


def norm(v: Vector) -> float:
    """Norm of ``v`` in its own space."""
    return norm_of(v.coords, v.space)


def norm_of(coords: np.ndarray, space: Space) -> float:
    """Norm of a flat coordinate array interpreted in ``space``."""
    x = np.asarray(coords, dtype=float).ravel()
    if x.shape != (space.total_dim,):
        raise ValueError("coordinate length does not match space dimension")
    if space.kind == LP:
        return _lp(x, space.p)
    sv = singular_values(x.reshape(space.rows, space.cols))
    if space.kind == SCHATTEN:
        return _lp(sv, space.p)
    return float(sv[0])


def norms_of(values: np.ndarray, space: Space) -> np.ndarray:
    """Row-wise norms of a (n, total_dim) array; vectorized for lp spaces."""
    vals = np.asarray(values, dtype=float)
    if vals.ndim == 1:
        vals = vals[None, :]
    if space.kind == LP:
        p = space.p
        if p == math.inf:
            return np.max(np.abs(vals), axis=1)
        if p == 2:
            return np.sqrt(np.sum(vals * vals, axis=1))
        if p == 1:
            return np.sum(np.abs(vals), axis=1)
        return np.sum(np.abs(vals) ** p, axis=1) ** (1.0 / p)
    return np.array([norm_of(row, space) for row in vals])


def _lp(x: np.ndarray, p: float) -> float:
    if p == math.inf:
        return float(np.max(np.abs(x)))
    if p == 2:
        return float(np.sqrt(np.sum(x * x)))
    if p == 1:
        return float(np.sum(np.abs(x)))
    return float(np.sum(np.abs(x) ** p) ** (1.0 / p))


def random_unit_vector(space: Space, seed: int) -> Vector:
    """Deterministic pseudo-random vector of norm 1 (within 1e-12)."""
    rng = np.random.default_rng(seed)
    return unit_vector(space, rng)


def unit_vector(space: Space, rng: np.random.Generator) -> Vector:
    """Draw a Gaussian vector from ``rng`` and normalize it in ``space``."""
    coords = rng.standard_normal(space.total_dim)
    n = norm_of(coords, space)
    if n == 0.0:
        coords = np.zeros(space.total_dim)
        coords[0] = 1.0
        n = norm_of(coords, space)
    return Vector(coords / n, space)


def space_to_json(space: Space) -> dict:
    if space.kind == LP:
        p = "inf" if space.p == math.inf else space.p
        return {"kind": LP, "p": p, "dim": space.dim}
    if space.kind == SCHATTEN:
        return {"kind": SCHATTEN, "p": space.p, "rows": space.rows, "cols": space.cols}
    return {"kind": HILBERT_OP, "rows": space.rows, "cols": space.cols}


def space_from_json(obj: dict) -> Space:
    kind = obj["kind"]
    if kind == LP:
        p = obj["p"]
        p = math.inf if p == "inf" else float(p)
        return lp_space(p, int(obj["dim"]))
    if kind == SCHATTEN:
        return schatten_space(float(obj["p"]), int(obj["rows"]), int(obj["cols"]))
    if kind == HILBERT_OP:
        return Space(HILBERT_OP, rows=int(obj["rows"]), cols=int(obj["cols"]))
    raise ValueError(f"unknown space kind {kind!r}")
