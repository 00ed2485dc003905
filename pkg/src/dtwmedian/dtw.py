"""Exact p-DTW via dynamic programming, a brute-force oracle, and the
quantized approximate distance with its ball-membership predicate.

Conventions: traversal index pairs are 0-based, starting at (0, 0) and ending
at (m-1, l-1) with steps in {(1,0), (0,1), (1,1)}. Costs are accumulated in
p-th power space and rooted once; for p > 32 distances are rescaled by their
maximum first so the powers cannot overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curves import Curve, ValidationError

_OVERFLOW_SAFE_P = 32.0

# tie-break order for equal DP predecessors: diagonal, then advancing the
# second curve, then the first
_STEP_DIAG, _STEP_SECOND, _STEP_FIRST = 0, 1, 2


@dataclass(frozen=True)
class Traversal:
    """A monotone coupling of two index ranges certifying a DTW value."""

    pairs: tuple[tuple[int, int], ...]

    def validate(self, m, l):
        if not self.pairs:
            raise ValidationError("traversal is empty")
        if self.pairs[0] != (0, 0) or self.pairs[-1] != (m - 1, l - 1):
            raise ValidationError("traversal endpoints must be (0,0) and (m-1,l-1)")
        for (a0, b0), (a1, b1) in zip(self.pairs, self.pairs[1:]):
            if (a1 - a0, b1 - b0) not in ((1, 0), (0, 1), (1, 1)):
                raise ValidationError(f"invalid traversal step ({a1 - a0},{b1 - b0})")


@dataclass(frozen=True)
class DtwResult:
    value: float
    traversal: Traversal


@dataclass(frozen=True)
class QuantizedDistance:
    """Value on the geometric radius grid: value = (1+eps)^(exponent+1),
    or exactly 0 (exponent None) when the true distance is 0."""

    value: float
    exponent: int | None
    eps: float

    @property
    def is_zero(self):
        return self.exponent is None


def _check_pair(a: Curve, b: Curve):
    if a.dimension != b.dimension:
        raise ValidationError(
            f"dimension mismatch: {a.id!r} has d={a.dimension}, {b.id!r} has d={b.dimension}"
        )


def _point_distances(a: Curve, b: Curve):
    diff = a.points[:, None, :] - b.points[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def _pth_powers(dist, p):
    if p == 1.0:
        return dist, 1.0
    if p == 2.0:
        return dist * dist, 1.0
    if p <= _OVERFLOW_SAFE_P:
        return dist**p, 1.0
    scale = float(np.max(dist))
    if scale == 0.0:
        return np.zeros_like(dist), 1.0
    return (dist / scale) ** p, scale


def _root(total, p, scale):
    if total == 0.0:
        return 0.0
    return scale * float(total) ** (1.0 / p)


def dtw(a: Curve, b: Curve, p=1.0) -> DtwResult:
    """Exact p-DTW with a cost-attaining traversal.

    Ties between DP predecessors are broken deterministically: diagonal step
    first, then the step advancing the second curve, then the first.
    """
    if not p >= 1.0:
        raise ValidationError("p must be >= 1")
    _check_pair(a, b)
    m, l = a.complexity, b.complexity
    cost, scale = _pth_powers(_point_distances(a, b), p)

    acc = np.full((m + 1, l + 1), np.inf)
    acc[0, 0] = 0.0
    back = np.zeros((m, l), dtype=np.int8)
    for i in range(m):
        row = acc[i + 1]
        prev = acc[i]
        crow = cost[i]
        for j in range(l):
            diag, second, first = prev[j], row[j], prev[j + 1]
            best, step = diag, _STEP_DIAG
            if second < best:
                best, step = second, _STEP_SECOND
            if first < best:
                best, step = first, _STEP_FIRST
            row[j + 1] = crow[j] + best
            back[i, j] = step

    pairs = []
    i, j = m - 1, l - 1
    while True:
        pairs.append((i, j))
        if i == 0 and j == 0:
            break
        step = back[i, j]
        if step == _STEP_DIAG:
            i, j = i - 1, j - 1
        elif step == _STEP_SECOND:
            j -= 1
        else:
            i -= 1
    pairs.reverse()
    return DtwResult(_root(acc[m, l], p, scale), Traversal(tuple(pairs)))


def dtw_value(a: Curve, b: Curve, p=1.0) -> float:
    """p-DTW value only (no traversal recovery)."""
    return float(dtw_matrix([a], [b], p)[0, 0])


def traversal_cost(a: Curve, b: Curve, traversal: Traversal, p=1.0) -> float:
    """Induced cost of a traversal: the lp-aggregate of its pointwise distances."""
    _check_pair(a, b)
    dist = np.array(
        [np.linalg.norm(a.points[i] - b.points[j]) for i, j in traversal.pairs]
    )
    powers, scale = _pth_powers(dist, p)
    return _root(powers.sum(), p, scale)


# ---------------------------------------------------------------------------
# brute-force oracle
# ---------------------------------------------------------------------------

def enumerate_traversals(m, l):
    """All (m, l)-traversals (0-based pairs), in depth-first step order."""
    def extend(i, j, prefix):
        if i == m - 1 and j == l - 1:
            yield Traversal(tuple(prefix))
            return
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            ni, nj = i + di, j + dj
            if ni < m and nj < l:
                prefix.append((ni, nj))
                yield from extend(ni, nj, prefix)
                prefix.pop()

    yield from extend(0, 0, [(0, 0)])


def dtw_brute(a: Curve, b: Curve, p=1.0) -> DtwResult:
    """Exhaustive minimization over all traversals; test oracle for dtw.

    Guarded to m*l <= 36.
    """
    _check_pair(a, b)
    m, l = a.complexity, b.complexity
    if m * l > 36:
        raise ValidationError(f"dtw_brute size guard: m*l = {m * l} > 36")
    best_value = math.inf
    best_traversal = None
    for t in enumerate_traversals(m, l):
        value = traversal_cost(a, b, t, p)
        if value < best_value:
            best_value = value
            best_traversal = t
    return DtwResult(best_value, best_traversal)


# ---------------------------------------------------------------------------
# batched values
# ---------------------------------------------------------------------------

_BLOCK_CELLS = 2**24  # per-chunk budget of DP cells
_num_threads = 1


def set_num_threads(n):
    """Worker threads for batched all-pairs computation (numpy releases the
    GIL on the large array ops, so this gives real parallelism there)."""
    global _num_threads
    _num_threads = max(1, int(n))


def _map_chunks(fn, tasks):
    if _num_threads > 1 and len(tasks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=_num_threads) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _batched_dp(pa, pb, p):
    """DTW values for aligned batches of equal-shape point arrays."""
    n, ma, _ = pa.shape
    mb = pb.shape[1]
    diff = pa[:, :, None, :] - pb[:, None, :, :]
    dist = np.sqrt(np.einsum("bijk,bijk->bij", diff, diff))
    if p == 1.0:
        cost, scale = dist, None
    elif p == 2.0:
        cost, scale = dist * dist, None
    elif p <= _OVERFLOW_SAFE_P:
        cost, scale = dist**p, None
    else:
        scale = np.maximum(dist.max(axis=(1, 2)), 1e-300)
        cost = (dist / scale[:, None, None]) ** p
    acc = np.full((n, ma + 1, mb + 1), np.inf)
    acc[:, 0, 0] = 0.0
    for i in range(ma):
        for j in range(mb):
            best = np.minimum(
                acc[:, i, j], np.minimum(acc[:, i, j + 1], acc[:, i + 1, j])
            )
            acc[:, i + 1, j + 1] = cost[:, i, j] + best
    total = acc[:, ma, mb]
    out = total ** (1.0 / p) if p != 1.0 else total
    if scale is not None:
        out = out * scale
    return out


def dtw_matrix(curves_a, curves_b, p=1.0):
    """All-pairs p-DTW values between two curve lists, as an (na, nb) array.

    Pairs are grouped by their complexity pair and evaluated with a batched
    DP; results match the scalar dtw within float rounding.
    """
    curves_a = list(curves_a)
    curves_b = list(curves_b)
    if not curves_a or not curves_b:
        return np.zeros((len(curves_a), len(curves_b)))
    d = curves_a[0].dimension
    for c in curves_a + curves_b:
        if c.dimension != d:
            raise ValidationError(f"dimension mismatch: curve {c.id!r}")
    out = np.zeros((len(curves_a), len(curves_b)))
    groups: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for ia, ca in enumerate(curves_a):
        for ib, cb in enumerate(curves_b):
            groups.setdefault((ca.complexity, cb.complexity), []).append((ia, ib))
    for (ma, mb), pairs in groups.items():
        block = max(1, _BLOCK_CELLS // (ma * mb * d))
        for start in range(0, len(pairs), block):
            chunk = pairs[start : start + block]
            pa = np.stack([curves_a[ia].points for ia, _ in chunk])
            pb = np.stack([curves_b[ib].points for _, ib in chunk])
            values = _batched_dp(pa, pb, p)
            for (ia, ib), v in zip(chunk, values):
                out[ia, ib] = v
    return out


def dtw_aligned(curves_a, curves_b, p=1.0):
    """Elementwise p-DTW values dtw(curves_a[i], curves_b[i]), batched."""
    curves_a = list(curves_a)
    curves_b = list(curves_b)
    if len(curves_a) != len(curves_b):
        raise ValidationError("aligned lists must have equal length")
    out = np.zeros(len(curves_a))
    groups: dict[tuple[int, int], list[int]] = {}
    for i, (ca, cb) in enumerate(zip(curves_a, curves_b)):
        if ca.dimension != cb.dimension:
            raise ValidationError(f"dimension mismatch: {ca.id!r} vs {cb.id!r}")
        groups.setdefault((ca.complexity, cb.complexity), []).append(i)
    for (ma, mb), members in groups.items():
        d = curves_a[members[0]].dimension
        block = max(1, _BLOCK_CELLS // (ma * mb * d))
        for start in range(0, len(members), block):
            chunk = members[start : start + block]
            pa = np.stack([curves_a[i].points for i in chunk])
            pb = np.stack([curves_b[i].points for i in chunk])
            out[chunk] = _batched_dp(pa, pb, p)
    return out


def dtw_self_matrix(curves, p=1.0):
    """Symmetric all-pairs p-DTW matrix of one curve list (zero diagonal)."""
    curves = list(curves)
    n = len(curves)
    out = np.zeros((n, n))
    if n < 2:
        return out
    d = curves[0].dimension
    for c in curves:
        if c.dimension != d:
            raise ValidationError(f"dimension mismatch: curve {c.id!r}")
    comp = np.array([c.complexity for c in curves])
    mmax = int(comp.max())
    padded = np.zeros((n, mmax, d))
    for i, c in enumerate(curves):
        padded[i, : c.complexity] = c.points
    rows, cols = np.triu_indices(n, k=1)
    keys = comp[rows] * (mmax + 1) + comp[cols]
    tasks = []
    for key in np.unique(keys):
        members = np.flatnonzero(keys == key)
        ma = int(comp[rows[members[0]]])
        mb = int(comp[cols[members[0]]])
        block = max(1, _BLOCK_CELLS // (ma * mb * d))
        for start in range(0, members.size, block):
            tasks.append(members[start : start + block])

    def run(members):
        ma = int(comp[rows[members[0]]])
        mb = int(comp[cols[members[0]]])
        pa = padded[rows[members], :ma]
        pb = padded[cols[members], :mb]
        return _batched_dp(pa, pb, p)

    for members, values in zip(tasks, _map_chunks(run, tasks)):
        out[rows[members], cols[members]] = values
        out[cols[members], rows[members]] = values
    return out


# ---------------------------------------------------------------------------
# quantized approximate distance
# ---------------------------------------------------------------------------

def ball_membership(tau: Curve, sigma: Curve, r, p=1.0, eps=1.0) -> int:
    """Approximate ball-membership predicate for the radius-r ball at tau.

    Each pointwise distance is rounded up to the grid {z*e*r : z in
    [floor(1/e + 1)]} with e = eps/(m+l)^(1/p) (infinity past the grid's
    reach), the traversal DP runs on those costs, and the result is 1 iff
    the quantized value is at most (1 + (m+l)^(1/p) * e) * r.

    Guarantees: returns 1 whenever dtw <= r and 0 whenever dtw > (1+eps)*r;
    in between the output depends on the quantization. Monotone nondecreasing
    in r.
    """
    if not (0.0 < eps <= 1.0):
        raise ValidationError("eps must lie in (0, 1]")
    if not r > 0:
        raise ValidationError("r must be positive")
    if not p >= 1.0:
        raise ValidationError("p must be >= 1")
    _check_pair(tau, sigma)
    l, m = tau.complexity, sigma.complexity
    zeta = float(m + l) ** (1.0 / p)
    e = eps / zeta
    zmax = math.floor(1.0 / e + 1.0)
    pitch = e * r

    dist = _point_distances(tau, sigma)
    z = np.ceil(dist / pitch)
    np.maximum(z, 1.0, out=z)
    phi = np.where(z <= zmax, z * pitch, np.inf)

    acc = np.full((l + 1, m + 1), np.inf)
    acc[0, 0] = 0.0
    if p <= _OVERFLOW_SAFE_P:
        cost, scale = phi**p, 1.0
    else:
        finite = phi[np.isfinite(phi)]
        scale = float(finite.max()) if finite.size else 1.0
        cost = (phi / scale) ** p
    for i in range(l):
        for j in range(m):
            best = min(acc[i, j], acc[i, j + 1], acc[i + 1, j])
            acc[i + 1, j + 1] = cost[i, j] + best
    total = acc[l, m]
    value = math.inf if math.isinf(total) else _root(total, p, scale)
    return 1 if value <= (1.0 + zeta * e) * r else 0


def adtw(sigma: Curve, tau: Curve, p=1.0, eps=1.0) -> QuantizedDistance:
    """Quantized (1+eps)-approximation of p-DTW on the radius grid
    {(1+eps)^z : z integer}.

    Returns (1+eps)^(z+1) for the largest grid exponent z with
    (1+eps)^z <= dtw, which is the unique grid value v satisfying
    dtw < v <= (1+eps)*dtw; returns exact 0 when dtw = 0.
    """
    if not (0.0 < eps <= 1.0):
        raise ValidationError("eps must lie in (0, 1]")
    _check_pair(sigma, tau)
    value = dtw_value(sigma, tau, p)
    if value == 0.0:
        return QuantizedDistance(0.0, None, eps)
    base = 1.0 + eps
    z = math.floor(math.log(value) / math.log(base))
    # fix float boundary drift so that base^z <= value < base^(z+1)
    while base ** (z + 1) <= value:
        z += 1
    while base**z > value:
        z -= 1
    return QuantizedDistance(base ** (z + 1), z, eps)
