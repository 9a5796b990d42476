"""Critical-regime delay constant.

When the per-user packet count grows like beta * ln(n), the mean delay per
coupon inflates by alpha/beta, where alpha is the unique root of

    alpha - beta ln(alpha) = beta - beta ln(beta) + 1

on (beta, inf).  Substituting u = alpha/beta - 1 turns this into

    u - ln(1 + u) = 1/beta,   u > 0,

which is monotone with derivative u/(1+u) and superbly conditioned, so the
solver works in u and converts back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import NumericError

__all__ = ["AlphaSolution", "solve_alpha", "bridging_gap"]

_MAX_ITER = 200


@dataclass(frozen=True)
class AlphaSolution:
    beta: float
    alpha: float
    residual: float  # alpha - beta ln(alpha) - (beta - beta ln(beta) + 1)
    iterations: int


def _excess_log_gap(u: float) -> float:
    """u - log1p(u) without cancellation (series below u = 0.5)."""
    if u > 0.5:
        return u - math.log1p(u)
    total = 0.0
    power = u * u
    k = 2
    sign = 1.0
    while True:
        term = sign * power / k
        total += term
        if abs(term) <= 1e-18 * abs(total):
            return total
        power *= u
        k += 1
        sign = -sign


def _solve_excess(beta: float) -> tuple[float, float, int]:
    """Root u of u - log1p(u) = 1/beta; returns (u, residual, iterations)."""
    inv_b = 1.0 / beta

    def g(u: float) -> float:
        return _excess_log_gap(u) - inv_b

    # g(1/beta) = -log1p(1/beta) < 0; the upper end mirrors the alpha-space
    # bracket beta + 1 + sqrt(2 beta) + 2 + 1/beta.
    lo = inv_b
    hi = 3.0 * inv_b + math.sqrt(2.0 * inv_b) + inv_b * inv_b
    doublings = 0
    while g(hi) <= 0.0:
        hi *= 2.0
        doublings += 1
        if doublings > 200:  # pragma: no cover
            raise NumericError(f"failed to bracket the root for beta={beta}")

    u = max(inv_b + math.log1p(inv_b), math.sqrt(2.0 * inv_b))
    if not lo < u < hi:
        u = 0.5 * (lo + hi)
    iterations = 0
    for _ in range(_MAX_ITER):
        iterations += 1
        gu = g(u)
        if gu > 0.0:
            hi = u
        else:
            lo = u
        if gu == 0.0:
            break
        step = gu * (1.0 + u) / u  # Newton with g'(u) = u/(1+u)
        nxt = u - step
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - u) <= 2e-16 * abs(u):
            u = nxt
            break
        u = nxt
    residual = beta * g(u)
    if abs(residual) > 1e-12 and iterations >= _MAX_ITER:
        raise NumericError(
            f"alpha solve did not converge for beta={beta}: residual={residual}"
        )
    return u, residual, iterations


def solve_alpha(beta: float) -> AlphaSolution:
    """Solve alpha - beta ln(alpha) = beta - beta ln(beta) + 1 on (beta, inf).

    Deterministic, |residual| <= 1e-12 throughout beta in [1e-6, 1e6]
    (and in practice far beyond).
    """
    if not (isinstance(beta, (int, float)) and math.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be a positive finite real, got {beta!r}")
    beta = float(beta)
    u, residual, iterations = _solve_excess(beta)
    return AlphaSolution(
        beta=beta, alpha=beta * (1.0 + u), residual=residual, iterations=iterations
    )


def bridging_gap(beta: float) -> float:
    """Deviation (alpha - beta)/sqrt(beta) - sqrt(2).

    Tends to 0 as beta grows, quantifying how the critical-regime
    normalization constants merge into the supercritical ones.
    """
    if not (isinstance(beta, (int, float)) and math.isfinite(beta) and beta > 0):
        raise ValueError(f"beta must be a positive finite real, got {beta!r}")
    u, _, _ = _solve_excess(float(beta))
    return u * math.sqrt(beta) - math.sqrt(2.0)
