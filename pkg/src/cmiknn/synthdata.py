"""Seeded generators for benchmark data with known conditional independence.

Every generator returns ``(x, y, z)`` as 2-D arrays of shapes ``(n, 1)``,
``(n, 1)`` and ``(n, d_z)`` and is a pure function of its :class:`ModelSpec`.
With ``dependent=False`` the data satisfy ``X _||_ Y | Z`` by construction.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

__all__ = [
    "FAMILIES",
    "ModelSpec",
    "generate",
    "gen_gaussian",
    "gen_multiplicative",
    "gen_postnonlinear",
    "gen_sinusoidal",
    "post_nonlinearities",
]

_EXP_CLIP = 20.0


def _exp_sq(a):
    # exp of the squared argument; clipped so large arguments cannot overflow
    return np.exp(np.minimum(a * a, _EXP_CLIP))


post_nonlinearities = {
    "identity": lambda a: a,
    "square": np.square,
    "cube": lambda a: a**3,
    "tanh": np.tanh,
    "exp_sq": _exp_sq,
}


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of one synthetic data set.

    ``c`` is the dependence strength of the alternative. For the Gaussian
    family it is the partial correlation of X and Y given Z, and ``rho_xz``
    / ``rho_yz`` set how strongly X and Y follow Z.
    """

    family: str
    n: int
    d_z: int = 1
    c: float = 0.5
    lam: float = 30.0
    dependent: bool = False
    seed: int = 0
    rho_xz: float = 0.7
    rho_yz: float = 0.7

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}; choose from {sorted(FAMILIES)}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.c < 0:
            raise ValueError("c must be nonnegative")
        if self.lam <= 0:
            raise ValueError("lam must be positive")

    def with_(self, **changes) -> "ModelSpec":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


def _need_dz(spec: ModelSpec):
    if spec.d_z < 1:
        raise ValueError(f"{spec.family} model needs d_z >= 1, got {spec.d_z}")


def _pick_g(rng):
    names = list(post_nonlinearities)
    gx, gy = rng.integers(len(names), size=2)
    return post_nonlinearities[names[gx]], post_nonlinearities[names[gy]]


def gen_postnonlinear(spec: ModelSpec):
    """Post-nonlinear noise model.

    Null: ``X = g_X(e_X + mean(Z))``, ``Y = g_Y(e_Y + mean(Z))``.
    Alternative: ``X = g_X(c e_b + e_X)``, ``Y = g_Y(c e_b + e_Y)`` with Z
    independent of both. ``g_X`` and ``g_Y`` are drawn uniformly from
    :data:`post_nonlinearities`; all noises are standard normal.
    """
    _need_dz(spec)
    rng = np.random.default_rng(spec.seed)
    g_x, g_y = _pick_g(rng)
    n = spec.n
    z = rng.standard_normal((n, spec.d_z))
    e_x, e_y, e_b = rng.standard_normal((3, n))
    if spec.dependent:
        x = g_x(spec.c * e_b + e_x)
        y = g_y(spec.c * e_b + e_y)
    else:
        zm = z.mean(axis=1)
        x = g_x(e_x + zm)
        y = g_y(e_y + zm)
    return x[:, None], y[:, None], z


def gen_multiplicative(spec: ModelSpec):
    """Multiplicative noise model.

    Null: ``X = g_X(0.1 e'_X + e_X mean(Z))`` and likewise for Y.
    Alternative: ``X = g_X(c e_b e_X)``, ``Y = g_Y(c e_b e_Y)`` with Z
    independent. ``c = 0`` is rejected for the alternative since X and Y
    would be constant.
    """
    _need_dz(spec)
    if spec.dependent and spec.c == 0:
        raise ValueError("multiplicative alternative with c = 0 is degenerate")
    rng = np.random.default_rng(spec.seed)
    g_x, g_y = _pick_g(rng)
    n = spec.n
    z = rng.standard_normal((n, spec.d_z))
    e_x, e_y, e_b, e2_x, e2_y = rng.standard_normal((5, n))
    if spec.dependent:
        x = g_x(spec.c * e_b * e_x)
        y = g_y(spec.c * e_b * e_y)
    else:
        zm = z.mean(axis=1)
        x = g_x(0.1 * e2_x + e_x * zm)
        y = g_y(0.1 * e2_y + e_y * zm)
    return x[:, None], y[:, None], z


def gen_sinusoidal(spec: ModelSpec):
    """``X = sin(lam Z) + e_X``, ``Y = sin(lam Z) + e_Y``, plus ``c e_b`` on both
    under the alternative. Z is one-dimensional."""
    if spec.d_z != 1:
        raise ValueError(f"sinusoidal model needs d_z == 1, got {spec.d_z}")
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    z = rng.standard_normal((n, 1))
    e_x, e_y, e_b = rng.standard_normal((3, n))
    s = np.sin(spec.lam * z[:, 0])
    x = s + e_x
    y = s + e_y
    if spec.dependent:
        x = x + spec.c * e_b
        y = y + spec.c * e_b
    return x[:, None], y[:, None], z


def gen_gaussian(spec: ModelSpec):
    """Jointly Gaussian ``(X, Y, Z)`` with unit variances.

    ``Z`` is standard normal in ``d_z`` dimensions (``d_z = 0`` allowed) and
    ``s = sum(Z) / sqrt(d_z)``. Then ``X = rho_xz s + sqrt(1 - rho_xz^2) u``
    and ``Y = rho_yz s + sqrt(1 - rho_yz^2) v`` where ``(u, v)`` are standard
    normal with correlation ``c`` under the alternative and 0 under the null,
    so ``c`` is exactly the partial correlation of X and Y given Z.
    """
    rho = spec.c if spec.dependent else 0.0
    rxz = spec.rho_xz if spec.d_z > 0 else 0.0
    ryz = spec.rho_yz if spec.d_z > 0 else 0.0
    if not (abs(rho) < 1 and abs(rxz) < 1 and abs(ryz) < 1):
        raise ValueError("covariance is not positive definite: correlations must lie in (-1, 1)")
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    z = rng.standard_normal((n, max(spec.d_z, 0)))
    u, w = rng.standard_normal((2, n))
    v = rho * u + np.sqrt(1 - rho * rho) * w
    s = z.sum(axis=1) / np.sqrt(spec.d_z) if spec.d_z > 0 else np.zeros(n)
    x = rxz * s + np.sqrt(1 - rxz * rxz) * u
    y = ryz * s + np.sqrt(1 - ryz * ryz) * v
    return x[:, None], y[:, None], z


FAMILIES = {
    "postnonlinear": gen_postnonlinear,
    "postnonlinear_mult": gen_multiplicative,
    "sinusoidal": gen_sinusoidal,
    "gaussian": gen_gaussian,
}


def generate(spec: ModelSpec):
    """Dispatch on ``spec.family``."""
    return FAMILIES[spec.family](spec)
