"""Conditional independence test: CMI statistic against a permutation null."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import CITestConfig, CITestResult, as_block, rank_transform
from .estimator import ConditionalMI
from .permutation import LocalPermuter, full_permutation

__all__ = ["NullDistribution", "ci_test", "null_distribution", "p_value", "prepare", "surrogate_rng"]

# spawn-key prefixes of the per-test seed tree
_NOISE_STREAM = 0
_SURROGATE_STREAM = 1


@dataclass(frozen=True)
class NullDistribution:
    values: np.ndarray
    k_perm: int
    k_cmi: int
    seed: int

    def __len__(self):
        return len(self.values)


def surrogate_rng(seed: int, b: int) -> np.random.Generator:
    """Random stream of surrogate ``b``; independent of how work is scheduled."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_SURROGATE_STREAM, b)))


def p_value(statistic: float, null_values) -> float:
    """Fraction of null values at or above the observed statistic."""
    null_values = np.asarray(null_values)
    return np.count_nonzero(null_values >= statistic) / len(null_values)


def prepare(x, y, z, cfg: CITestConfig):
    """Validate inputs, resolve ``k_cmi`` and rank-transform all blocks.

    Returns ``(x, y, z, cfg)`` with rank arrays (``z`` may have zero
    columns) and the resolved configuration.
    """
    x = as_block(x, "x")
    y = as_block(y, "y")
    n = x.shape[0]
    z = np.empty((n, 0)) if z is None else as_block(z, "z", allow_empty=True)
    if z.shape[1] == 0:
        z = np.empty((n, 0))
    if y.shape[0] != n or z.shape[0] != n:
        raise ValueError(f"sample counts differ: x {n}, y {y.shape[0]}, z {z.shape[0]}")
    cfg = cfg.resolve(n)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(_NOISE_STREAM,)))
    ranked = [rank_transform(b, cfg.noise_amp, rng) for b in (x, y, z)]
    return (*ranked, cfg)


def _null_values(x, y, z, cfg: CITestConfig, estimator: ConditionalMI) -> np.ndarray:
    n = x.shape[0]
    if z.shape[1] == 0 or cfg.k_perm >= n:
        draw = lambda rng: full_permutation(n, rng)  # noqa: E731
    else:
        draw = LocalPermuter(z, cfg.k_perm)

    def one(b):
        return estimator(x[draw(surrogate_rng(cfg.seed, b)).pi]).value

    if cfg.workers == 1:
        return np.array([one(b) for b in range(cfg.B)])
    with ThreadPoolExecutor(cfg.workers) as pool:
        return np.array(list(pool.map(one, range(cfg.B))))


def null_distribution(x, y, z, cfg: CITestConfig) -> NullDistribution:
    """The ``B`` surrogate CMI values of a test, without the observed statistic."""
    x, y, z, cfg = prepare(x, y, z, cfg)
    values = _null_values(x, y, z, cfg, ConditionalMI(y, z, cfg.k_cmi))
    return NullDistribution(values, cfg.k_perm, cfg.k_cmi, cfg.seed)


def ci_test(x, y, z, cfg: CITestConfig | None = None) -> CITestResult:
    """Test ``X`` independent of ``Y`` given ``Z``.

    All blocks are rank-transformed, the CMI of the data is compared with
    ``cfg.B`` values computed after permuting ``x`` only. The conditioning
    set may be empty (``z=None``), in which case surrogates are full
    shuffles; the same holds for ``k_perm >= n``.

    The p-value is the plain fraction of surrogates at or above the
    statistic, with no +1 correction, so it can be exactly 0. Results depend
    only on the data and ``cfg`` and not on ``cfg.workers``.
    """
    cfg = CITestConfig() if cfg is None else cfg
    x, y, z, cfg = prepare(x, y, z, cfg)
    estimator = ConditionalMI(y, z, cfg.k_cmi)
    statistic = estimator(x).value
    null = _null_values(x, y, z, cfg, estimator)
    return CITestResult(statistic, null, p_value(statistic, null), cfg, x.shape[0])
