"""Normalizations and limiting distributions of the delay.

Four asymptotic regimes are supported, distinguished by how the per-user
packet count m scales with the user count n:

* fixed m                 -> Gumbel (extreme value of near-exponential tails)
* m >> ln^3(n)            -> Gumbel ("supercritical")
* m ~ beta ln(n)          -> Gumbel with constants built from alpha(beta)
* fixed n, m -> infinity  -> max of n independent standard normals

Each regime comes with an affine map d -> (d - center)/scale.  The centers
here absorb the regime constant, so the normalized statistic targets the
*standard* Gumbel; ``limit_cdf`` exposes the equivalent unabsorbed
presentation exp(-c e^{-y}) for use with bare centerings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .alpha import solve_alpha
from .special import normal_cdf

__all__ = [
    "FixedM",
    "Supercritical",
    "Critical",
    "FixedN",
    "Regime",
    "StandardGumbel",
    "GumbelWithLogShift",
    "MaxOfNormals",
    "Target",
    "Normalization",
    "normalization",
    "critical_constant",
    "limit_cdf",
    "target_cdf",
    "derive_b",
]

_LOG_2SQRTPI = math.log(2.0 * math.sqrt(math.pi))


@dataclass(frozen=True)
class FixedM:
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("FixedM requires m >= 1")


@dataclass(frozen=True)
class Supercritical:
    pass


@dataclass(frozen=True)
class Critical:
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("Critical requires beta > 0")


@dataclass(frozen=True)
class FixedN:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("FixedN requires n >= 1")


Regime = Union[FixedM, Supercritical, Critical, FixedN]


@dataclass(frozen=True)
class StandardGumbel:
    pass


@dataclass(frozen=True)
class GumbelWithLogShift:
    """Gumbel CDF evaluated at y - shift, i.e. exp(-e^{shift} e^{-y})."""

    shift: float


@dataclass(frozen=True)
class MaxOfNormals:
    n: int


Target = Union[StandardGumbel, GumbelWithLogShift, MaxOfNormals]


@dataclass(frozen=True)
class Normalization:
    """Affine map d -> (d - center)/scale onto the target law's scale."""

    center: float
    scale: float
    target: Target

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    def apply(self, values):
        return (np.asarray(values, dtype=np.float64) - self.center) / self.scale


def derive_b(m: int, n: int, beta: float) -> float:
    """Critical-sequence offset b with m = (beta + b) ln(n), i.e. m/ln(n) - beta."""
    if n < 2:
        raise ValueError("derive_b requires n >= 2")
    return m / math.log(n) - beta


def critical_constant(alpha: float, beta: float) -> float:
    """The additive constant 0.5 * ln(2 pi (alpha - beta)^2 / beta).

    This is exactly the log-shift that turns the unabsorbed critical limit
    exp(-(sqrt(beta)/(sqrt(2 pi)(alpha-beta))) e^{-y}) into the standard
    Gumbel; it tends to ln(2 sqrt(pi)) as beta -> infinity.
    """
    if not beta > 0 or not alpha > beta:
        raise ValueError("critical_constant requires alpha > beta > 0")
    return 0.5 * math.log(2.0 * math.pi * (alpha - beta) ** 2 / beta)


def normalization(regime: Regime, m: int, n: int) -> Normalization:
    """Centering and scaling that sends the delay to its limit law.

    Applicability of a regime to the actual (m, n) is a modeling choice of
    the caller and is deliberately not enforced; goodness of fit is what
    the KS harness reports.
    """
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    if isinstance(regime, FixedN):
        return Normalization(
            center=float(n) * m,
            scale=float(n) * math.sqrt(m),
            target=MaxOfNormals(n),
        )
    if n < 3:
        raise ValueError("regimes using ln(ln(n)) require n >= 3")
    log_n = math.log(n)
    loglog_n = math.log(log_n)

    if isinstance(regime, FixedM):
        center = n * (log_n + (m - 1) * loglog_n - math.lgamma(m))
        return Normalization(center=center, scale=float(n), target=StandardGumbel())

    if isinstance(regime, Supercritical):
        root = math.sqrt(2.0 * m * log_n)
        scale = n * m / root
        center = n * m * (1.0 + (2.0 * log_n - 0.5 * loglog_n - _LOG_2SQRTPI) / root)
        return Normalization(center=center, scale=scale, target=StandardGumbel())

    if isinstance(regime, Critical):
        beta = regime.beta
        alpha = solve_alpha(beta).alpha
        b = derive_b(m, n, beta)
        const = critical_constant(alpha, beta)
        gap = alpha - beta
        scale = alpha * n / gap
        # Bare centering of the critical limit, then absorb the constant so
        # the target is the standard Gumbel.
        center = (
            alpha * n * log_n
            + (alpha * (gap - 1.0) / (beta * gap)) * b * n * log_n
            - (alpha / (2.0 * gap)) * n * loglog_n
            - const * scale
        )
        return Normalization(center=center, scale=scale, target=StandardGumbel())

    raise TypeError(f"unknown regime {regime!r}")


def target_cdf(target: Target, y):
    """CDF of a normalization target, vectorized over y."""
    y_arr = np.asarray(y, dtype=np.float64)
    if isinstance(target, StandardGumbel):
        out = _gumbel_arr(y_arr)
    elif isinstance(target, GumbelWithLogShift):
        out = _gumbel_arr(y_arr - target.shift)
    elif isinstance(target, MaxOfNormals):
        phi = np.array([normal_cdf(v) for v in np.atleast_1d(y_arr)])
        out = (phi**target.n).reshape(y_arr.shape)
    else:
        raise TypeError(f"unknown target {target!r}")
    return float(out) if np.isscalar(y) or y_arr.ndim == 0 else out


def _gumbel_arr(y: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return np.exp(-np.exp(-y))


def limit_cdf(regime: Regime, y) -> float:
    """Predicted limiting CDF in its unabsorbed presentation.

    Fixed m:        exp(-e^{-y}/(m-1)!)
    supercritical:  exp(-e^{-y}/(2 sqrt(pi)))
    critical:       exp(-(sqrt(beta)/(sqrt(2 pi)(alpha-beta))) e^{-y})
    fixed n:        Phi(y)^n

    The Gumbel cases equal the standard Gumbel under the constant-absorbing
    normalizations returned by ``normalization``.
    """
    if isinstance(regime, FixedM):
        return target_cdf(GumbelWithLogShift(-math.lgamma(regime.m)), y)
    if isinstance(regime, Supercritical):
        return target_cdf(GumbelWithLogShift(-_LOG_2SQRTPI), y)
    if isinstance(regime, Critical):
        alpha = solve_alpha(regime.beta).alpha
        return target_cdf(
            GumbelWithLogShift(-critical_constant(alpha, regime.beta)), y
        )
    if isinstance(regime, FixedN):
        return target_cdf(MaxOfNormals(regime.n), y)
    raise TypeError(f"unknown regime {regime!r}")
