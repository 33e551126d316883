"""Surrogate index maps: nearest-neighbor local permutation and full shuffle.

Point ids are 0-based row indices. A map ``pi`` turns a block ``x`` into the
surrogate ``x[pi]``; under the local scheme each row is replaced by the row
of a close neighbor in the conditioning space, so the X-Z dependence
survives while any X-Y dependence given Z is destroyed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .core import as_block
from .neighbors import NeighborIndex

__all__ = [
    "LocalPermuter",
    "PermutationMap",
    "apply_permutation",
    "full_permutation",
    "local_permutation",
]


@dataclass(frozen=True)
class PermutationMap:
    pi: np.ndarray
    k_perm: int

    @property
    def duplicate_count(self) -> int:
        """How many entries repeat an id already present (``n - #unique``)."""
        return len(self.pi) - len(np.unique(self.pi))

    def __len__(self):
        return len(self.pi)


@nb.njit(cache=True, nogil=True)
def _shuffled_lists(offsets, ids, keys):
    out = np.empty_like(ids)
    for i in range(offsets.shape[0] - 1):
        s = offsets[i]
        e = offsets[i + 1]
        order = np.argsort(keys[s:e])
        for t in range(e - s):
            out[s + t] = ids[s + order[t]]
    return out


@nb.njit(cache=True, nogil=True)
def _walk(offsets, lists, visit_order, k_perm):
    n = offsets.shape[0] - 1
    used = np.zeros(n, np.bool_)
    pi = np.empty(n, np.int64)
    for i in visit_order:
        s = offsets[i]
        j = lists[s]
        m = 0
        while used[j] and m < k_perm - 1:
            m += 1
            j = lists[s + m]
        pi[i] = j
        used[j] = True
    return pi


class LocalPermuter:
    """Draws nearest-neighbor permutations for a fixed conditioning sample.

    Neighborhoods are computed once at construction: for every point ``i``,
    all points within the distance ``d_i`` of its ``k_perm``-th nearest
    neighbor, counting ``i`` itself as the first neighbor and including
    every point *at* that distance. Each call then

    1. shuffles every neighborhood independently,
    2. visits the points in uniformly random order, and
    3. assigns to point ``i`` the first not-yet-used id of its shuffled
       neighborhood, looking at no more than ``k_perm`` entries; if all of
       those are used, the last one inspected is taken anyway.

    Randomness for one call is drawn as ``rng.permutation(n)`` for the visit
    order followed by one uniform key per neighborhood entry.
    """

    def __init__(self, z, k_perm: int, index: NeighborIndex | None = None):
        z = as_block(z, "z")
        n = z.shape[0]
        if not 1 <= k_perm <= n:
            raise ValueError(f"k_perm must be in [1, {n}], got {k_perm}")
        self.n = n
        self.k_perm = int(k_perm)
        index = NeighborIndex(z) if index is None else index
        self.radii = index.kth_distances(self.k_perm, include_self=True)
        self.offsets, self.ids = index.neighborhoods(self.radii)

    def neighborhood(self, i: int) -> np.ndarray:
        return np.sort(self.ids[self.offsets[i] : self.offsets[i + 1]])

    def draw_inputs(self, rng):
        """Random visit order and shuffled neighborhoods for one map."""
        rng = np.random.default_rng(rng)
        visit_order = rng.permutation(self.n)
        keys = rng.random(len(self.ids))
        return visit_order, _shuffled_lists(self.offsets, self.ids, keys)

    def __call__(self, rng) -> PermutationMap:
        visit_order, lists = self.draw_inputs(rng)
        return PermutationMap(_walk(self.offsets, lists, visit_order, self.k_perm), self.k_perm)


def local_permutation(z, k_perm: int, rng) -> PermutationMap:
    """One nearest-neighbor permutation of the rows of ``z``; see :class:`LocalPermuter`."""
    return LocalPermuter(z, k_perm)(rng)


def full_permutation(n: int, rng) -> PermutationMap:
    """Uniform random permutation of ``0..n-1``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return PermutationMap(np.random.default_rng(rng).permutation(n), n)


def apply_permutation(x, pmap: PermutationMap) -> np.ndarray:
    """Rows of ``x`` reordered by ``pmap``; all columns move together."""
    x = as_block(x, "x")
    if x.shape[0] != len(pmap):
        raise ValueError(f"block has {x.shape[0]} rows, map has {len(pmap)} entries")
    return x[pmap.pi]
