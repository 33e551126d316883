"""Nearest-neighbor entropy and conditional mutual information estimators.

All quantities are in nats. Neighbor geometry uses the maximum norm, so the
unit ball in ``D`` dimensions has volume ``2**D``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigError, DegenerateGeometryError, as_block, digamma_table
from .neighbors import NeighborIndex

__all__ = ["CmiEstimate", "ConditionalMI", "cmi_knn", "entropy_knn", "rule_of_thumb_k"]


@dataclass(frozen=True)
class CmiEstimate:
    value: float
    k_cmi: int
    # columns: k_xz, k_yz, k_z per sample; only kept on request
    per_point_counts: np.ndarray | None = None


def rule_of_thumb_k(n: int) -> int:
    """Default ``k`` for the CMI estimator: ``0.2 n`` clamped to ``[1, n - 1]``."""
    return int(min(max(round(n / 5), 1), max(n - 1, 1)))


def _check_eps(eps):
    if np.any(eps <= 0):
        raise DegenerateGeometryError(
            "duplicate points give a zero neighbor distance; "
            "rank-transform the data with tie-breaking noise first"
        )


def entropy_knn(block, k: int) -> float:
    """Kozachenko-Leonenko differential entropy estimate in nats.

    ``eps_i`` is the distance from sample ``i`` to its ``k``-th nearest other
    sample; ``k_i`` counts the samples strictly closer than ``eps_i``,
    including ``i`` itself (``k_i == k`` unless distances tie).
    """
    x = as_block(block, "block")
    n, d = x.shape
    if not 1 <= k <= n - 1:
        raise ConfigError(f"k must be in [1, {n - 1}], got {k}")
    index = NeighborIndex(x)
    eps = index.kth_distances(k)
    _check_eps(eps)
    counts = index.counts_within(eps)
    psi = digamma_table(n)
    terms = -psi[counts] + d * np.log(eps)
    return float(psi[n] + math.fsum(terms) / n + d * math.log(2.0))


class ConditionalMI:
    """CMI estimator with ``y`` and ``z`` fixed and ``x`` varying.

    Indices over the ``(y, z)`` and ``z`` subspaces are built once, which is
    what the permutation test needs: only ``x`` changes between surrogates.
    Instances are read-only after construction and safe to share between
    threads.
    """

    def __init__(self, y, z, k_cmi: int):
        y = as_block(y, "y")
        n = y.shape[0]
        z = np.empty((n, 0)) if z is None else as_block(z, "z", allow_empty=True)
        if z.shape[0] != n:
            raise ValueError(f"y has {n} samples but z has {z.shape[0]}")
        if not 1 <= k_cmi <= n - 1:
            raise ConfigError(f"k_cmi must be in [1, {n - 1}], got {k_cmi}")
        self.n = n
        self.k_cmi = int(k_cmi)
        self.y = y
        self.z = z
        self.yz = np.ascontiguousarray(np.hstack([y, z]))
        self._yz_index = NeighborIndex(self.yz)
        self._z_index = NeighborIndex(z) if z.shape[1] > 0 else None
        self._psi = digamma_table(n)

    def __call__(self, x, return_counts: bool = False) -> CmiEstimate:
        x = as_block(x, "x")
        if x.shape[0] != self.n:
            raise ValueError(f"x has {x.shape[0]} samples, expected {self.n}")
        xz = np.ascontiguousarray(np.hstack([x, self.z]))
        joint = np.hstack([x, self.yz])
        eps = NeighborIndex(joint).kth_distances(self.k_cmi)
        _check_eps(eps)
        k_xz = NeighborIndex(xz).counts_within(eps)
        k_yz = self._yz_index.counts_within(eps)
        if self._z_index is None:
            k_z = np.full(self.n, self.n, dtype=np.int64)
        else:
            k_z = self._z_index.counts_within(eps)
        psi = self._psi
        # the inner sum is commutative, so swapping x and y is bit-identical
        terms = psi[k_z] - (psi[k_xz] + psi[k_yz])
        value = psi[self.k_cmi] + math.fsum(terms) / self.n
        counts = np.column_stack([k_xz, k_yz, k_z]) if return_counts else None
        return CmiEstimate(float(value), self.k_cmi, counts)


def cmi_knn(x, y, z, k_cmi: int, return_counts: bool = False) -> CmiEstimate:
    """Estimate ``I(X; Y | Z)`` from samples.

    Parameters
    ----------
    x, y : array_like, shape (n, D_X) and (n, D_Y)
    z : array_like, shape (n, D_Z), or None
        ``None`` or zero columns gives the unconditional mutual information.
    k_cmi : int
        Neighbor rank in the joint space, ``1 <= k_cmi <= n - 1``.
    return_counts : bool
        Keep the per-sample subspace counts on the result.

    Inputs are expected to be rank-transformed (or otherwise free of
    duplicate points); a zero neighbor distance raises
    :class:`~cmiknn.core.DegenerateGeometryError`.
    """
    x = as_block(x, "x")
    if x.shape[0] != as_block(y, "y").shape[0]:
        raise ValueError("x and y have different sample counts")
    return ConditionalMI(y, z, k_cmi)(x, return_counts=return_counts)
