"""Sampled k-median framework over metric closures of subsamples, and its
curve-level wrapper producing a (factor, 4)-approximation with at most 4k
centers of complexity <= ell.

The two-level scheme samples a subset, clusters its metric closure, rechecks
the worst-served points, and recurses once; the full closure is only ever
built on sampled subsets (or on the whole set when the sample-size formula
already covers it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import Curve, ValidationError, new_rng, spawn_seeds
from .closure import distances_from_set, shortest_path_closure
from .dtw import dtw_aligned, dtw_matrix, dtw_self_matrix
from .kmedian import FiniteMetricInstance, kmedian_local_search
from .simplify import simplify_2approx


@dataclass(frozen=True)
class SamplingParams:
    """Sample and recheck sizes of the two-level scheme.

    a and b are the constants hidden in the source construction's Theta(.);
    log k degenerates at k = 1 so ln(k+1) is used throughout.
    """

    a: int
    b: int
    s: int
    m_size: int

    @classmethod
    def for_instance(cls, n, k, eps, a_override=None):
        if a_override is not None:
            a = int(a_override)
        else:
            a = max(2, math.ceil((1.0 / eps) * math.sqrt(max(1.0, math.log(1.0 / eps)))))
        b = a * a
        lk = math.log(k + 1.0)
        s = min(n, math.ceil(a * math.sqrt(k * n * lk)))
        m_size = min(n, math.ceil(b * k * n * lk / s))
        return cls(a, b, s, m_size)


@dataclass(frozen=True)
class BicriteriaSolution:
    """At most 4k center curves with per-input assignments under p-DTW."""

    centers: tuple[Curve, ...]
    assignment: np.ndarray
    distances: np.ndarray
    cost: float
    k: int
    ell: int
    p: float

    @property
    def k_hat(self):
        return len(self.centers)


class DtwOracle:
    """Pairwise p-DTW over a fixed curve list with memoized values."""

    def __init__(self, curves, p):
        self.curves = list(curves)
        self.p = p
        self._full = None
        self._cache: dict[tuple[int, int], float] = {}

    def __len__(self):
        return len(self.curves)

    def full(self):
        if self._full is None:
            self._full = dtw_self_matrix(self.curves, self.p)
        return self._full

    def submatrix(self, idx):
        idx = np.asarray(idx, dtype=np.intp)
        if idx.size == len(self.curves) or self._full is not None:
            return self.full()[np.ix_(idx, idx)]
        out = np.zeros((idx.size, idx.size))
        missing = []
        for ai in range(idx.size):
            for bi in range(ai + 1, idx.size):
                key = (int(min(idx[ai], idx[bi])), int(max(idx[ai], idx[bi])))
                v = self._cache.get(key)
                if v is None:
                    missing.append((ai, bi, key))
                else:
                    out[ai, bi] = out[bi, ai] = v
        if missing:
            values = dtw_aligned(
                [self.curves[key[0]] for _, _, key in missing],
                [self.curves[key[1]] for _, _, key in missing],
                self.p,
            )
            for (ai, bi, key), v in zip(missing, values):
                self._cache[key] = float(v)
                out[ai, bi] = out[bi, ai] = float(v)
        return out

    def cross(self, rows, cols):
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        if self._full is not None:
            return self._full[np.ix_(rows, cols)]
        return dtw_matrix(
            [self.curves[i] for i in rows], [self.curves[j] for j in cols], self.p
        )


def _solve_on_closure(oracle, idx, k, eps, solver, seed):
    """Run the metric k-median solver on the closure of the index subset;
    returns global indices (at most k)."""
    base = oracle.submatrix(idx)
    closure = shortest_path_closure(base) if idx.size > 1 else np.zeros((1, 1))
    kk = min(k, idx.size)
    inst = FiniteMetricInstance(closure, np.ones(idx.size), kk)
    sol = solver(inst, eps, seed)
    return np.asarray(sorted(idx[list(sol.centers)]), dtype=np.intp)


def k_routine(oracle, idx, k, eps, solver, seed, a_override=None):
    """Inner level: sample, cluster the sample's closure, recluster the
    m_size worst points by closure distance. Returns <= 2k global indices."""
    idx = np.asarray(idx, dtype=np.intp)
    n = idx.size
    params = SamplingParams.for_instance(n, k, eps, a_override)
    rng = new_rng(seed)
    seeds = spawn_seeds(seed, 3)
    if n <= params.s:
        return _solve_on_closure(oracle, idx, k, eps, solver, seeds[0])
    sample = np.sort(rng.choice(n, size=params.s, replace=False))
    c_prime = _solve_on_closure(oracle, idx[sample], k, eps, solver, seeds[0])
    base = oracle.submatrix(idx)
    local_centers = np.searchsorted(idx, c_prime)
    dists = distances_from_set(base, local_centers)
    order = np.lexsort((np.arange(n), -dists))
    m_idx = idx[np.sort(order[: params.m_size])]
    c_second = _solve_on_closure(oracle, m_idx, k, eps, solver, seeds[1])
    return np.unique(np.concatenate([c_prime, c_second]))


def k_median_sampled(oracle, idx, k, eps, solver, seed, a_override=None):
    """Outer level: like k_routine but recursing into it, with the recheck
    set selected by raw distances. Returns <= 4k global indices."""
    idx = np.asarray(idx, dtype=np.intp)
    n = idx.size
    params = SamplingParams.for_instance(n, k, eps, a_override)
    rng = new_rng(seed)
    seeds = spawn_seeds(seed, 3)
    if n <= params.s:
        return k_routine(oracle, idx, k, eps, solver, seeds[0], a_override)
    sample = np.sort(rng.choice(n, size=params.s, replace=False))
    c_prime = k_routine(oracle, idx[sample], k, eps, solver, seeds[0], a_override)
    raw = oracle.cross(idx, c_prime).min(axis=1)
    order = np.lexsort((np.arange(n), -raw))
    m_idx = idx[np.sort(order[: params.m_size])]
    c_second = k_routine(oracle, m_idx, k, eps, solver, seeds[1], a_override)
    return np.unique(np.concatenate([c_prime, c_second]))


def bicriteria_klmedian(
    T,
    k,
    ell,
    p=1.0,
    eps=0.5,
    seed=0,
    repetitions=3,
    solver=kmedian_local_search,
    a_override=None,
) -> BicriteriaSolution:
    """2-approximate ell-simplifications followed by the sampled k-median
    framework on their p-DTW; centers are simplification curves, assignments
    and cost are evaluated on the original inputs.

    The whole sampled run is repeated ``repetitions`` times (fresh derived
    seeds) and the cheapest outcome kept.
    """
    curves = list(T)
    n = len(curves)
    if n < 1:
        raise ValidationError("need at least one curve")
    if k < 1 or ell < 1:
        raise ValidationError("k and ell must be >= 1")
    simplified = [simplify_2approx(c, ell, p) for c in curves]
    oracle = DtwOracle(simplified, p)
    best = None
    for rep_seed in spawn_seeds(seed, repetitions):
        centers_idx = k_median_sampled(
            oracle, np.arange(n), k, eps, solver, rep_seed, a_override
        )
        center_curves = [simplified[i] for i in centers_idx]
        cross = dtw_matrix(curves, center_curves, p)
        assignment = np.argmin(cross, axis=1)
        distances = cross[np.arange(n), assignment]
        cost = float(distances.sum())
        if best is None or cost < best.cost:
            best = BicriteriaSolution(
                tuple(center_curves), assignment, distances, cost, k, ell, p
            )
    return best
