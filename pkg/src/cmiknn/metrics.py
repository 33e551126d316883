"""Calibration and power summaries over repeated tests."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["ExperimentSummary", "aupc", "bootstrap_se", "ks_uniform", "rejection_rate", "summarize"]


def _pvals(pvalues) -> np.ndarray:
    p = np.asarray(pvalues, dtype=np.float64).ravel()
    if p.size == 0:
        raise ValueError("no p-values given")
    if np.any((p < 0) | (p > 1)) or np.any(np.isnan(p)):
        raise ValueError("p-values must lie in [0, 1]")
    return p


def ks_uniform(pvalues) -> float:
    """Kolmogorov-Smirnov distance between the p-value ECDF and Uniform(0, 1)."""
    p = np.sort(_pvals(pvalues))
    m = p.size
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - p), np.max(p - (i - 1) / m)))


def aupc(pvalues) -> float:
    """Area under the power curve ``alpha -> P(p <= alpha)`` on ``[0, 1]``.

    For the empirical distribution this integral is ``1 - mean(p)``.
    """
    return float(1.0 - np.mean(_pvals(pvalues)))


def rejection_rate(pvalues, alpha: float = 0.05) -> float:
    """Fraction of tests rejecting at level ``alpha`` (``p <= alpha``)."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    return float(np.mean(_pvals(pvalues) <= alpha))


def bootstrap_se(pvalues, metric, n_boot: int = 1000, seed: int = 0, ci: float = 0.68):
    """Bootstrap standard error and percentile interval of ``metric(pvalues)``.

    Returns ``(se, (lower, upper))`` from ``n_boot`` resamples with
    replacement.
    """
    p = _pvals(pvalues)
    rng = np.random.default_rng(seed)
    idx = rng.integers(p.size, size=(n_boot, p.size))
    stats = np.array([metric(p[row]) for row in idx])
    tail = (1 - ci) / 2
    lo, hi = np.quantile(stats, [tail, 1 - tail])
    return float(stats.std(ddof=1)), (float(lo), float(hi))


@dataclass
class ExperimentSummary:
    pvalues_h0: np.ndarray = field(repr=False)
    pvalues_h1: np.ndarray = field(repr=False)
    ks: float | None
    aupc: float | None
    fpr_at: dict
    tpr_at: dict
    runtime_stats: dict

    def to_dict(self) -> dict:
        return {
            "n_h0": int(self.pvalues_h0.size),
            "n_h1": int(self.pvalues_h1.size),
            "ks": self.ks,
            "aupc": self.aupc,
            "fpr_at": {str(a): r for a, r in self.fpr_at.items()},
            "tpr_at": {str(a): r for a, r in self.tpr_at.items()},
            "runtime_stats": self.runtime_stats,
        }


def summarize(pvalues_h0=(), pvalues_h1=(), runtimes=(), alphas=(0.01, 0.05, 0.1)) -> ExperimentSummary:
    """KS and false-positive rates from null runs, AUPC and true-positive
    rates from alternative runs. Either side may be empty; its metrics are
    then ``None`` / empty."""
    h0 = np.asarray(pvalues_h0, dtype=np.float64).ravel()
    h1 = np.asarray(pvalues_h1, dtype=np.float64).ravel()
    t = np.asarray(runtimes, dtype=np.float64).ravel()
    runtime_stats = (
        {"mean_s": float(t.mean()), "median_s": float(np.median(t)), "max_s": float(t.max())}
        if t.size
        else {}
    )
    return ExperimentSummary(
        pvalues_h0=h0,
        pvalues_h1=h1,
        ks=ks_uniform(h0) if h0.size else None,
        aupc=aupc(h1) if h1.size else None,
        fpr_at={a: rejection_rate(h0, a) for a in alphas} if h0.size else {},
        tpr_at={a: rejection_rate(h1, a) for a in alphas} if h1.size else {},
        runtime_stats=runtime_stats,
    )
