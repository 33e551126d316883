"""Shared domain types, the digamma function and rank preprocessing."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

EULER_GAMMA = 0.57721566490153286060651209008240243

__all__ = [
    "EULER_GAMMA",
    "CITestConfig",
    "CITestResult",
    "ConfigError",
    "DegenerateGeometryError",
    "DomainError",
    "TieError",
    "as_block",
    "digamma",
    "digamma_table",
    "rank_transform",
]


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class TieError(ValueError):
    """Ranking is undefined because equal values remain in a column."""


class DegenerateGeometryError(ValueError):
    """Duplicate points give a zero neighbor distance."""


class ConfigError(ValueError):
    """Test parameters incompatible with each other or with the data."""


def as_block(data, name: str = "block", allow_empty: bool = False) -> np.ndarray:
    """Coerce samples of one variable to a finite ``(n, D)`` float array.

    One-dimensional input is treated as a single column. ``D == 0`` is only
    accepted with ``allow_empty`` (the conditioning set of an unconditional
    test); ``None`` is then read as an empty block, which requires ``n`` to be
    known from elsewhere, so it is returned as shape ``(0, 0)``.
    """
    if data is None:
        if not allow_empty:
            raise ValueError(f"{name}: no data given")
        return np.empty((0, 0))
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"{name}: expected a 1-D or 2-D array, got {arr.ndim}-D")
    if arr.shape[1] == 0 and not allow_empty:
        raise ValueError(f"{name}: zero columns")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains NaN or infinite values")
    return np.ascontiguousarray(arr)


# ---------------------------------------------------------------------------
# digamma
# ---------------------------------------------------------------------------

# Bernoulli-number coefficients B_2k / (2k) of the asymptotic expansion.
_ASYMP = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
)
_SHIFT_TO = 10.0

_table = np.array([np.nan, -EULER_GAMMA])


def digamma_table(n: int) -> np.ndarray:
    """Return ``t`` with ``t[k] == digamma(k)`` for integer ``k`` in ``1..n``.

    ``t[0]`` is NaN. Built from cumulative harmonic sums and cached, so
    repeated calls with ``n`` below the largest seen so far are free.
    """
    global _table
    n = int(n)
    if n < 1:
        raise DomainError("digamma table needs n >= 1")
    if n >= len(_table):
        size = max(n + 1, 2 * len(_table))
        recip = 1.0 / np.arange(1, size - 1, dtype=np.float64)
        t = np.empty(size)
        t[0] = np.nan
        t[1] = -EULER_GAMMA
        t[2:] = -EULER_GAMMA + np.cumsum(recip)
        _table = t
    return _table[: n + 1]


def _digamma_real(x: np.ndarray) -> np.ndarray:
    shift = np.zeros_like(x)
    x = x.copy()
    low = x < _SHIFT_TO
    while np.any(low):
        shift[low] += 1.0 / x[low]
        x[low] += 1.0
        low = x < _SHIFT_TO
    inv2 = 1.0 / (x * x)
    series = np.zeros_like(x)
    for c in reversed(_ASYMP):
        series = (series + c) * inv2
    return np.log(x) - 0.5 / x - series - shift


def digamma(x):
    """Logarithmic derivative of the Gamma function.

    Accepts a positive scalar or array. Integer arguments come from a cached
    harmonic-sum table, everything else from upward recurrence followed by
    the asymptotic series.

    Raises
    ------
    DomainError
        If any argument is not strictly positive (or is NaN).
    """
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(arr > 0):
        raise DomainError("digamma is only defined here for x > 0")
    out = np.empty_like(arr)
    is_int = (arr == np.floor(arr)) & (arr <= 1e6)
    if np.any(is_int):
        ints = arr[is_int].astype(np.int64)
        out[is_int] = digamma_table(int(ints.max()))[ints]
    if not np.all(is_int):
        out[~is_int] = _digamma_real(arr[~is_int])
    if out.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# rank transform
# ---------------------------------------------------------------------------

def rank_transform(block, noise_amp: float = 1e-6, rng=None) -> np.ndarray:
    """Replace every column by descending ranks ``1..n``.

    The largest value in a column gets rank 1. Before ranking, Gaussian noise
    with standard deviation ``noise_amp`` times the column's standard
    deviation is added to break ties; a constant column uses ``noise_amp``
    as an absolute scale instead. The result is a float array whose columns
    are permutations of ``1..n``.

    Parameters
    ----------
    block : array_like, shape (n, D) or (n,)
    noise_amp : float
        Relative tie-break noise scale. ``0`` disables noise.
    rng : numpy.random.Generator, int or None
        Noise source; ignored when ``noise_amp == 0``.

    Raises
    ------
    TieError
        If equal values remain in a column after the noise step.
    """
    arr = as_block(block, allow_empty=True)
    n, d = arr.shape
    if n < 1 and d > 0:
        raise ValueError("rank_transform needs at least one row")
    if noise_amp < 0:
        raise ValueError("noise_amp must be nonnegative")
    if noise_amp > 0 and d > 0:
        rng = np.random.default_rng(rng)
        scale = arr.std(axis=0)
        scale[scale == 0] = 1.0
        arr = arr + noise_amp * scale * rng.standard_normal((n, d))
    ranks = np.empty((n, d))
    for j in range(d):
        col = arr[:, j]
        order = np.argsort(-col, kind="stable")
        s = col[order]
        if n > 1 and np.any(s[1:] == s[:-1]):
            raise TieError(
                f"column {j} has tied values; use a positive noise_amp"
                if noise_amp == 0
                else f"column {j} still has ties after noise; increase noise_amp"
            )
        ranks[order, j] = np.arange(1, n + 1)
    return ranks


# ---------------------------------------------------------------------------
# test configuration and result
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CITestConfig:
    """Parameters of one conditional-independence test.

    ``k_cmi=None`` selects the sample-size rule of thumb at run time.
    """

    k_cmi: int | None = None
    k_perm: int = 5
    B: int = 1000
    seed: int = 0
    noise_amp: float = 1e-6
    workers: int = 1

    def __post_init__(self):
        if self.k_cmi is not None and self.k_cmi < 1:
            raise ConfigError("k_cmi must be >= 1")
        if self.k_perm < 1:
            raise ConfigError("k_perm must be >= 1")
        if self.B < 1:
            raise ConfigError("B must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.noise_amp < 0:
            raise ConfigError("noise_amp must be nonnegative")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def resolve(self, n: int) -> "CITestConfig":
        """Fill in ``k_cmi`` for sample size ``n`` and check all bounds."""
        from .estimator import rule_of_thumb_k

        k_cmi = self.k_cmi if self.k_cmi is not None else rule_of_thumb_k(n)
        if n < k_cmi + 1:
            raise ConfigError(f"need at least k_cmi + 1 = {k_cmi + 1} samples, got {n}")
        if self.k_perm > n:
            raise ConfigError(f"k_perm = {self.k_perm} exceeds sample size {n}")
        return CITestConfig(k_cmi, self.k_perm, self.B, self.seed, self.noise_amp, self.workers)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class CITestResult:
    statistic: float
    null_values: np.ndarray = field(repr=False)
    p_value: float
    config: CITestConfig
    n: int

    def to_dict(self) -> dict:
        q05, q50, q95 = np.quantile(self.null_values, [0.05, 0.5, 0.95])
        return {
            "statistic_nats": self.statistic,
            "p_value": self.p_value,
            "n": self.n,
            "null_quantiles": {"q05": float(q05), "q50": float(q50), "q95": float(q95)},
            **self.config.to_dict(),
        }
