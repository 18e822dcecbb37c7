"""Randomized moments over sign patterns, Khintchine-Kahane ratios, and
type/cotype constant estimation.

The p-th randomized moment of vectors x_1..x_N is
(E || sum_j eps_j x_j ||^p)^(1/p) with independent uniform signs eps_j.
Small N is handled by exact enumeration over sign patterns (halved by the
eps -> -eps symmetry); larger N falls back to counter-based Monte Carlo.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import optim
from .spaces import Space, Vector, lp_space, norms_of

EXACT = "exact"
MONTE_CARLO = "monte_carlo"

_CHUNK = 1 << 14


@dataclass(frozen=True)
class EnumConfig:
    """Knobs for sign enumeration, sampling and ratio optimization."""

    exact_threshold: int = 20
    mc_samples: int = 100_000
    seed: int = 0
    restarts: int = 32
    tol: float = 1e-9

    def __post_init__(self):
        if self.exact_threshold < 1:
            raise ValueError("exact_threshold must be >= 1")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be >= 1")
        if self.restarts < 0:
            raise ValueError("restarts must be >= 0")


@dataclass(frozen=True)
class MomentEstimate:
    """p-th root of a randomized moment, with provenance."""

    value: float
    mode: str
    samples: int
    stderr: float = 0.0


@dataclass(frozen=True)
class RatioEstimate:
    """Best found value of a randomized-norm ratio, with witness tuple."""

    value: float
    witness: list[Vector] = field(repr=False)


@lru_cache(maxsize=32)
def _full_patterns(n: int) -> np.ndarray:
    pats = _pattern_rows(n, 0, 1 << (n - 1))
    pats.setflags(write=False)
    return pats


def _pattern_rows(n: int, lo: int, hi: int) -> np.ndarray:
    idx = np.arange(lo, hi, dtype=np.uint64)[:, None]
    bits = (idx >> np.arange(n - 1, dtype=np.uint64)[None, :]) & 1
    pats = np.empty((idx.shape[0], n))
    pats[:, 0] = 1.0
    pats[:, 1:] = 1.0 - 2.0 * bits
    return pats


def sign_patterns(n: int, lo: int = 0, hi: int | None = None) -> np.ndarray:
    """Sign patterns of length n with the first sign fixed to +1.

    Rows ``lo`` to ``hi`` of the full (2^(n-1), n) table; averaging over
    the table equals averaging over the whole hypercube because the
    summand is symmetric under eps -> -eps.  Full tables for small n are
    cached read-only.
    """
    if n < 1:
        raise ValueError("need at least one sign")
    m = 1 << (n - 1)
    hi = m if hi is None else min(hi, m)
    if lo == 0 and hi == m and n <= 15:
        return _full_patterns(n)
    return _pattern_rows(n, lo, hi)


def _stack(vectors: list[Vector]) -> tuple[np.ndarray, Space]:
    if not vectors:
        raise ValueError("vector list must be nonempty")
    space = vectors[0].space
    for v in vectors[1:]:
        if v.space != space:
            raise ValueError("all vectors must live in the same space")
    return np.vstack([v.coords for v in vectors]), space


def moment_from_matrix(
    vmat: np.ndarray, space: Space, p: float, cfg: EnumConfig
) -> MomentEstimate:
    """Randomized p-th moment of the rows of ``vmat`` (coords in ``space``)."""
    if not (1 <= p < math.inf):
        raise ValueError("moment exponent must satisfy 1 <= p < inf")
    n = vmat.shape[0]
    if n <= cfg.exact_threshold:
        total = 0.0
        count = 1 << (n - 1)
        for lo in range(0, count, _CHUNK):
            pats = sign_patterns(n, lo, lo + _CHUNK)
            combos = pats @ vmat
            total += float(np.sum(norms_of(combos, space) ** p))
        return MomentEstimate((total / count) ** (1.0 / p), EXACT, count, 0.0)

    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    remaining = cfg.mc_samples
    s = 0.0
    ss = 0.0
    while remaining > 0:
        block = min(remaining, _CHUNK)
        signs = rng.integers(0, 2, size=(block, n)) * 2.0 - 1.0
        vals = norms_of(signs @ vmat, space) ** p
        s += float(np.sum(vals))
        ss += float(np.sum(vals * vals))
        remaining -= block
    m = s / cfg.mc_samples
    var = max(ss / cfg.mc_samples - m * m, 0.0)
    se_m = math.sqrt(var / cfg.mc_samples)
    value = m ** (1.0 / p)
    stderr = se_m / p * m ** (1.0 / p - 1.0) if m > 0 else se_m
    return MomentEstimate(value, MONTE_CARLO, cfg.mc_samples, stderr)


def rademacher_moment(vectors: list[Vector], p: float, cfg: EnumConfig) -> MomentEstimate:
    """(E || sum_j eps_j x_j ||^p)^(1/p) for the given vectors."""
    vmat, space = _stack(vectors)
    return moment_from_matrix(vmat, space, p, cfg)


def make_moment_evaluator(n: int, space: Space, p: float, cfg: EnumConfig):
    """Fast repeated-evaluation closure for the p-th randomized moment.

    Exact enumeration with a cached pattern table when n is within the
    exact threshold; otherwise Monte Carlo with a frozen sign table
    (common random numbers) so that optimizers see a smooth objective.
    """
    if n <= cfg.exact_threshold:
        pats = sign_patterns(n)

        def evaluate(vmat: np.ndarray) -> float:
            vals = norms_of(pats @ vmat, space)
            return float(np.mean(vals**p) ** (1.0 / p))

        return evaluate

    rng = np.random.Generator(np.random.Philox(key=cfg.seed))
    signs = rng.integers(0, 2, size=(min(cfg.mc_samples, 1 << 15), n)) * 2.0 - 1.0

    def evaluate_mc(vmat: np.ndarray) -> float:
        vals = norms_of(signs @ vmat, space)
        return float(np.mean(vals**p) ** (1.0 / p))

    return evaluate_mc


def kk_ratio_estimate(
    space: Space, p: float, q: float, n: int, cfg: EnumConfig
) -> RatioEstimate:
    """Best found moment_p / moment_q over n-tuples of unit vectors.

    A lower bound for the comparability constant between the two
    randomized norms on this space; never claimed to attain the supremum.
    """
    if not (1 <= p < math.inf and 1 <= q < math.inf):
        raise ValueError("exponents must lie in [1, inf)")
    if n < 1:
        raise ValueError("need at least one vector")
    moment_p = make_moment_evaluator(n, space, p, cfg)
    moment_q = make_moment_evaluator(n, space, q, cfg)

    def objective(vmat: np.ndarray) -> float:
        den = moment_q(vmat)
        return moment_p(vmat) / den if den > 0 else 0.0

    val, x = optim.maximize_on_spheres(
        objective, space, n, cfg.restarts, cfg.seed, cfg.tol
    )
    return RatioEstimate(val, [Vector(row, space) for row in x])


def type_cotype_estimate(
    kind: str, space: Space, exponent: float, n: int, cfg: EnumConfig
) -> RatioEstimate:
    """Lower estimate of the type-p or cotype-q constant of ``space``.

    Type p compares (E||sum eps x||^2)^(1/2) against (sum ||x_j||^p)^(1/p);
    cotype q inverts the ratio, with a max-norm right side when q = inf.
    The search runs over n-tuples of unit vectors, where the lp sum of
    norms is constant, so this is a true lower bound on the constant in
    the defining inequality.
    """
    if kind not in ("type", "cotype"):
        raise ValueError("kind must be 'type' or 'cotype'")
    if kind == "type" and not (1 <= exponent <= 2):
        raise ValueError("type exponent must lie in [1, 2]")
    if kind == "cotype" and not (2 <= exponent <= math.inf):
        raise ValueError("cotype exponent must lie in [2, inf]")
    if n < 1:
        raise ValueError("need at least one vector")

    moment2 = make_moment_evaluator(n, space, 2.0, cfg)

    def lp_sum(vmat: np.ndarray) -> float:
        ns = norms_of(vmat, space)
        if exponent == math.inf:
            return float(np.max(ns))
        return float(np.sum(ns**exponent) ** (1.0 / exponent))

    def objective(vmat: np.ndarray) -> float:
        m2 = moment2(vmat)
        s = lp_sum(vmat)
        if kind == "type":
            return m2 / s if s > 0 else 0.0
        return s / m2 if m2 > 0 else 0.0

    val, x = optim.maximize_on_spheres(
        objective, space, n, cfg.restarts, cfg.seed, cfg.tol
    )
    return RatioEstimate(val, [Vector(row, space) for row in x])


def scalar_moment(coeffs: np.ndarray, p: float, cfg: EnumConfig) -> MomentEstimate:
    """Randomized moment (E | sum_j eps_j c_j |^p)^(1/p) of real scalars."""
    mat = np.asarray(coeffs, dtype=float).reshape(-1, 1)
    return moment_from_matrix(mat, lp_space(1, 1), p, cfg)
