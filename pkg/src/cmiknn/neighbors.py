"""Max-norm KD-tree for k-th neighbor distances and radius counts.

The tree is stored as flat arrays (node ranges, children, tight bounding
boxes) so that all queries run as compiled loops that release the GIL.
Results are exact: they match a linear scan under the Chebyshev metric,
including on tied distances, because every comparison is done on the same
floating-point distances a scan would compute.

Counting semantics differ between the two consumers and are kept explicit:
the estimator counts points *strictly* inside a radius, the permutation
scheme collects points *on or inside* a radius.
"""

from __future__ import annotations

import numba as nb
import numpy as np

__all__ = [
    "NeighborIndex",
    "build",
    "scan_count",
    "scan_distances",
    "scan_kth_distance",
    "scan_neighborhood",
]

_jit = nb.njit(cache=True, nogil=True)


@_jit
def _build(points, leaf_size):
    n, d = points.shape
    perm = np.arange(n)
    max_nodes = 2 * n + 1
    start = np.empty(max_nodes, np.int64)
    end = np.empty(max_nodes, np.int64)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    lo = np.empty((max_nodes, d))
    hi = np.empty((max_nodes, d))
    stack = np.empty(max_nodes, np.int64)

    start[0] = 0
    end[0] = n
    count = 1
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        s = start[node]
        e = end[node]
        for j in range(d):
            lo[node, j] = points[perm[s], j]
            hi[node, j] = points[perm[s], j]
        for t in range(s + 1, e):
            for j in range(d):
                v = points[perm[t], j]
                if v < lo[node, j]:
                    lo[node, j] = v
                elif v > hi[node, j]:
                    hi[node, j] = v
        if e - s <= leaf_size:
            continue
        dim = 0
        spread = hi[node, 0] - lo[node, 0]
        for j in range(1, d):
            if hi[node, j] - lo[node, j] > spread:
                spread = hi[node, j] - lo[node, j]
                dim = j
        if spread == 0.0:
            continue
        seg = perm[s:e].copy()
        keys = np.empty(e - s)
        for t in range(e - s):
            keys[t] = points[seg[t], dim]
        order = np.argsort(keys, kind="mergesort")
        for t in range(e - s):
            perm[s + t] = seg[order[t]]
        mid = s + (e - s) // 2
        left[node] = count
        right[node] = count + 1
        start[count] = s
        end[count] = mid
        start[count + 1] = mid
        end[count + 1] = e
        stack[sp] = count
        stack[sp + 1] = count + 1
        sp += 2
        count += 2

    tpts = np.empty((n, d))
    for t in range(n):
        for j in range(d):
            tpts[t, j] = points[perm[t], j]
    return (
        perm,
        tpts,
        start[:count].copy(),
        end[:count].copy(),
        left[:count].copy(),
        right[:count].copy(),
        lo[:count].copy(),
        hi[:count].copy(),
    )


@_jit
def _box_min(lo, hi, node, q):
    m = 0.0
    for j in range(q.shape[0]):
        a = lo[node, j] - q[j]
        if a > m:
            m = a
        b = q[j] - hi[node, j]
        if b > m:
            m = b
    return m


@_jit
def _box_max(lo, hi, node, q):
    m = 0.0
    for j in range(q.shape[0]):
        a = q[j] - lo[node, j]
        if a > m:
            m = a
        b = hi[node, j] - q[j]
        if b > m:
            m = b
    return m


@_jit
def _dist(tpts, t, q):
    m = 0.0
    for j in range(q.shape[0]):
        a = abs(tpts[t, j] - q[j])
        if a > m:
            m = a
    return m


@_jit
def _sift_down(heap):
    # max-heap; restore after heap[0] was decreased
    k = heap.shape[0]
    i = 0
    v = heap[0]
    while True:
        c = 2 * i + 1
        if c >= k:
            break
        if c + 1 < k and heap[c + 1] > heap[c]:
            c += 1
        if heap[c] <= v:
            break
        heap[i] = heap[c]
        i = c
    heap[i] = v


@_jit
def _kth(perm, tpts, start, end, left, right, lo, hi, q, k, skip, heap, stack, stack_d):
    for t in range(k):
        heap[t] = np.inf
    stack[0] = 0
    stack_d[0] = _box_min(lo, hi, 0, q)
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if stack_d[sp] >= heap[0]:
            continue
        if left[node] < 0:
            for t in range(start[node], end[node]):
                if perm[t] == skip:
                    continue
                dd = _dist(tpts, t, q)
                if dd < heap[0]:
                    heap[0] = dd
                    _sift_down(heap)
        else:
            a = left[node]
            b = right[node]
            da = _box_min(lo, hi, a, q)
            db = _box_min(lo, hi, b, q)
            if da < db:
                stack[sp] = b
                stack_d[sp] = db
                stack[sp + 1] = a
                stack_d[sp + 1] = da
            else:
                stack[sp] = a
                stack_d[sp] = da
                stack[sp + 1] = b
                stack_d[sp + 1] = db
            sp += 2
    return heap[0]


@_jit
def _count(perm, tpts, start, end, left, right, lo, hi, q, r, strict, stack, out):
    # out is None-like when out.shape[0] == 0: count only
    collect = out.shape[0] > 0
    cnt = 0
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        mind = _box_min(lo, hi, node, q)
        if mind > r or (strict and mind == r):
            continue
        maxd = _box_max(lo, hi, node, q)
        if maxd < r or (not strict and maxd == r):
            if collect:
                for t in range(start[node], end[node]):
                    out[cnt] = perm[t]
                    cnt += 1
            else:
                cnt += end[node] - start[node]
            continue
        if left[node] < 0:
            for t in range(start[node], end[node]):
                dd = _dist(tpts, t, q)
                if dd < r or (not strict and dd == r):
                    if collect:
                        out[cnt] = perm[t]
                    cnt += 1
        else:
            stack[sp] = left[node]
            stack[sp + 1] = right[node]
            sp += 2
    return cnt


@_jit
def _kth_all(points, perm, tpts, start, end, left, right, lo, hi, k, exclude_self):
    n = points.shape[0]
    out = np.empty(n)
    heap = np.empty(k)
    stack = np.empty(start.shape[0] + 1, np.int64)
    stack_d = np.empty(start.shape[0] + 1)
    for i in range(n):
        skip = i if exclude_self else -1
        out[i] = _kth(perm, tpts, start, end, left, right, lo, hi, points[i], k, skip, heap, stack, stack_d)
    return out


@_jit
def _select(a, m, kk):
    # kk-th smallest (0-based) of a[:m]; reorders a in place
    lo = 0
    hi = m - 1
    while hi > lo:
        mid = (lo + hi) >> 1
        if a[mid] < a[lo]:
            a[mid], a[lo] = a[lo], a[mid]
        if a[hi] < a[lo]:
            a[hi], a[lo] = a[lo], a[hi]
        if a[hi] < a[mid]:
            a[hi], a[mid] = a[mid], a[hi]
        p = a[mid]
        i = lo
        j = hi
        while i <= j:
            while a[i] < p:
                i += 1
            while a[j] > p:
                j -= 1
            if i <= j:
                a[i], a[j] = a[j], a[i]
                i += 1
                j -= 1
        if kk <= j:
            hi = j
        elif kk >= i:
            lo = i
        else:
            return a[kk]
    return a[kk]


@_jit
def _scan_row(cols, i, buf):
    d, n = cols.shape
    for j in range(n):
        buf[j] = abs(cols[0, j] - cols[0, i])
    for t in range(1, d):
        for j in range(n):
            a = abs(cols[t, j] - cols[t, i])
            if a > buf[j]:
                buf[j] = a


@_jit
def _kth_scan(cols, k, exclude_self, span):
    # span >= 0: integer coordinates with that range, select by histogram
    n = cols.shape[1]
    out = np.empty(n)
    buf = np.empty(n)
    if span >= 0:
        hist = np.empty(span + 1, np.int64)
    else:
        hist = np.empty(0, np.int64)
    for i in range(n):
        _scan_row(cols, i, buf)
        if span >= 0:
            hist[:] = 0
            for j in range(n):
                hist[np.int64(buf[j])] += 1
            if exclude_self:
                hist[0] -= 1
            c = 0
            for v in range(span + 1):
                c += hist[v]
                if c >= k:
                    out[i] = v
                    break
        else:
            if exclude_self:
                buf[i] = np.inf
            out[i] = _select(buf, n, k - 1)
    return out


@_jit
def _count_all(centers, radii, perm, tpts, start, end, left, right, lo, hi, strict):
    m = centers.shape[0]
    out = np.empty(m, np.int64)
    stack = np.empty(start.shape[0] + 1, np.int64)
    dummy = np.empty(0, np.int64)
    for i in range(m):
        out[i] = _count(perm, tpts, start, end, left, right, lo, hi, centers[i], radii[i], strict, stack, dummy)
    return out


@_jit
def _collect_all(points, radii, perm, tpts, start, end, left, right, lo, hi, offsets):
    n = points.shape[0]
    ids = np.empty(offsets[n], np.int64)
    stack = np.empty(start.shape[0] + 1, np.int64)
    for i in range(n):
        _count(perm, tpts, start, end, left, right, lo, hi, points[i], radii[i], False, stack,
               ids[offsets[i]:offsets[i + 1]])
    return ids


class NeighborIndex:
    """Read-only Chebyshev-metric KD-tree over ``n`` points.

    Splits are at the median of the widest coordinate; nodes of at most
    ``leaf_size`` points (or of identical points) are leaves. Point ids in
    every query refer to rows of the array the index was built from.
    """

    #: k-NN batches with ``k >= scan_fraction * n`` use a linear scan with
    #: selection; for k proportional to n the tree cannot prune enough to win.
    scan_fraction = 1 / 16

    def __init__(self, points, leaf_size: int = 16):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("cannot index an empty point set")
        if pts.shape[1] < 1:
            raise ValueError("points need at least one coordinate")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        if leaf_size < 1:
            raise ValueError("leaf_size must be >= 1")
        self.leaf_size = int(leaf_size)
        self.points = pts
        self._tree = _build(pts, self.leaf_size)
        self._cols = np.ascontiguousarray(pts.T)
        span = float(np.max(pts.max(axis=0) - pts.min(axis=0)))
        integral = np.all(pts == np.round(pts)) and span <= 16 * pts.shape[0] + 64
        self._span = int(span) if integral else -1
        for a in (self.points, self._cols, *self._tree):
            a.setflags(write=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def _check_id(self, i):
        if not 0 <= i < self.n:
            raise IndexError(f"point id {i} out of range for {self.n} points")

    def _kth_one(self, i, k, exclude_self):
        q = self.points[i]
        heap = np.empty(k)
        stack = np.empty(len(self._tree[2]) + 1, np.int64)
        stack_d = np.empty(len(self._tree[2]) + 1)
        skip = i if exclude_self else -1
        return float(_kth(*self._tree, q, k, skip, heap, stack, stack_d))

    def kth_distance_excluding_self(self, i: int, k: int) -> float:
        """Distance from point ``i`` to its ``k``-th nearest other point."""
        self._check_id(i)
        if not 1 <= k <= self.n - 1:
            raise ValueError(f"k must be in [1, {self.n - 1}], got {k}")
        return self._kth_one(i, k, True)

    def kth_distance_including_self(self, i: int, k: int) -> float:
        """Like :meth:`kth_distance_excluding_self` but ``i`` is its own first neighbor."""
        self._check_id(i)
        if not 1 <= k <= self.n:
            raise ValueError(f"k must be in [1, {self.n}], got {k}")
        return self._kth_one(i, k, False)

    def count_strictly_within(self, center, radius: float) -> int:
        """Number of indexed points at distance ``< radius`` from ``center``."""
        if not radius > 0:
            raise ValueError("radius must be positive")
        c = np.ascontiguousarray(center, dtype=np.float64).reshape(1, -1)
        if c.shape[1] != self.dim:
            raise ValueError("center has wrong dimension")
        return int(_count_all(c, np.array([float(radius)]), *self._tree, True)[0])

    def neighborhood_list(self, i: int, radius: float) -> np.ndarray:
        """Sorted ids of all points at distance ``<= radius`` from point ``i``."""
        self._check_id(i)
        if not radius >= 0:
            raise ValueError("radius must be nonnegative")
        q = self.points[i]
        stack = np.empty(len(self._tree[2]) + 1, np.int64)
        out = np.empty(self.n, np.int64)
        cnt = _count(*self._tree, q, float(radius), False, stack, out)
        return np.sort(out[:cnt])

    # batched forms used by the estimator and the permutation scheme

    def kth_distances(self, k: int, include_self: bool = False) -> np.ndarray:
        """k-th neighbor distance of every indexed point."""
        upper = self.n if include_self else self.n - 1
        if not 1 <= k <= upper:
            raise ValueError(f"k must be in [1, {upper}], got {k}")
        if k >= self.scan_fraction * self.n:
            return _kth_scan(self._cols, int(k), not include_self, self._span)
        return _kth_all(self.points, *self._tree, int(k), not include_self)

    def counts_within(self, radii, centers=None, strict: bool = True) -> np.ndarray:
        """Per-center counts of points within the matching radius.

        ``centers`` defaults to the indexed points themselves.
        """
        c = self.points if centers is None else np.ascontiguousarray(centers, dtype=np.float64)
        r = np.ascontiguousarray(radii, dtype=np.float64)
        if r.shape != (c.shape[0],):
            raise ValueError("need one radius per center")
        return _count_all(c, r, *self._tree, bool(strict))

    def neighborhoods(self, radii) -> tuple[np.ndarray, np.ndarray]:
        """Non-strict neighborhoods of every point in CSR form.

        Returns ``(offsets, ids)``; the neighbors of point ``i`` are
        ``ids[offsets[i]:offsets[i + 1]]`` in tree order (not sorted).
        """
        r = np.ascontiguousarray(radii, dtype=np.float64)
        if r.shape != (self.n,):
            raise ValueError("need one radius per point")
        counts = _count_all(self.points, r, *self._tree, False)
        offsets = np.zeros(self.n + 1, np.int64)
        np.cumsum(counts, out=offsets[1:])
        return offsets, _collect_all(self.points, r, *self._tree, offsets)


def build(points, leaf_size: int = 16) -> NeighborIndex:
    return NeighborIndex(points, leaf_size)


# ---------------------------------------------------------------------------
# linear-scan reference implementations
# ---------------------------------------------------------------------------

def scan_distances(points, center) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    return np.max(np.abs(pts - np.asarray(center, dtype=np.float64)), axis=1)


def scan_kth_distance(points, i: int, k: int, include_self: bool = False) -> float:
    pts = np.asarray(points, dtype=np.float64)
    d = scan_distances(pts, pts[i])
    if not include_self:
        d = np.delete(d, i)
    return float(np.sort(d)[k - 1])


def scan_count(points, center, radius: float) -> int:
    return int(np.sum(scan_distances(points, center) < radius))


def scan_neighborhood(points, i: int, radius: float) -> np.ndarray:
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    return np.flatnonzero(scan_distances(pts, pts[i]) <= radius)
