"""Moments of the delay and of its continuous-time companion.

The delay D (trials until every one of n labels has come up m times) and
its companion Delta (time until n independent unit-mean streams have each
produced m events, with time scaled by n) share all rising moments:

    E[D (D+1) ... (D+r-1)] = E[Delta^r]
                           = r n^r Int_0^inf [1 - F_m(t)^n] t^{r-1} dt,

where F_m is the Erlang(m, 1) distribution function.  This module computes
that integral to a requested relative tolerance with adaptive Gauss
panels, provides exact small-instance oracles via the absorbing chain on
capped label counts, and exposes the leading-order asymptotic predictors.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .alpha import solve_alpha
from .errors import NumericError, QuadratureError
from .limit_laws import Critical, FixedM, FixedN, Regime, Supercritical
from .special import erlang_log_sf

__all__ = [
    "ProblemSize",
    "QuadratureConfig",
    "MomentResult",
    "ExactDistribution",
    "delta_power_moment",
    "rising_moment",
    "mean_delay",
    "variance_delay",
    "mgf_delta",
    "exact_mean_small",
    "exact_dist_small",
    "asymptotic_moment",
    "asymptotic_mean_fixed_m",
]

METHOD_QUADRATURE = "quadrature"
METHOD_ORACLE = "oracle"
METHOD_ASYMPTOTIC = "asymptotic"

_STATE_SPACE_LIMIT = 1_000_000
_FRONT_LOG_LEVEL = math.log(45.0)  # n*sf >= 45 keeps F^n below 3e-20

_NODES_LO, _WEIGHTS_LO = leggauss(15)
_NODES_HI, _WEIGHTS_HI = leggauss(31)


@dataclass(frozen=True)
class ProblemSize:
    """Instance (m, n): every one of n users must receive m packets."""

    m: int
    n: int

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise ValueError(f"m must be an integer >= 1, got {self.m!r}")
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n!r}")


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-9
    max_subdivisions: int = 1024
    tail_log_threshold: Optional[float] = None  # default: ln(1e-16 / n)

    def __post_init__(self):
        if not 0.0 < self.rel_tol <= 1e-2:
            raise ValueError("rel_tol must lie in (0, 1e-2]")
        if self.max_subdivisions < 8:
            raise ValueError("max_subdivisions must be >= 8")
        if self.tail_log_threshold is not None and not self.tail_log_threshold < 0:
            raise ValueError("tail_log_threshold must be negative")


@dataclass(frozen=True)
class MomentResult:
    value: float
    abs_err: float
    method: str


# ---------------------------------------------------------------------------
# quadrature core


def _one_minus_power_cdf(m: int, n: int, taus: np.ndarray) -> np.ndarray:
    """1 - F_m(tau)^n, evaluated as -expm1(n log1p(-exp(log_sf)))."""
    log_sf = np.array([erlang_log_sf(m, float(t)) for t in taus])
    with np.errstate(divide="ignore"):
        return -np.expm1(n * np.log1p(-np.exp(log_sf)))


def _sf_crossing(m: int, level: float, keep_above: bool) -> float:
    """Locate the decreasing crossing erlang_log_sf(m, x) = level.

    Doubles x to bracket, then bisects.  With ``keep_above`` the returned
    point still satisfies log_sf >= level (bracket's low end); otherwise it
    satisfies log_sf <= level (high end).
    """
    if level >= 0.0:
        return 0.0
    x = float(max(m, 1))
    while erlang_log_sf(m, x) > level:
        x *= 2.0
        if x > 1e18:  # pragma: no cover
            raise NumericError("tail cutoff search diverged")
    lo, hi = x / 2.0, x
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if erlang_log_sf(m, mid) > level:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-9 * hi:
            break
    return lo if keep_above else hi


def _adaptive_gauss(f, lo: float, hi: float, rel_tol: float, max_panels: int):
    """Adaptive panel integration of f over [lo, hi].

    Each panel is scored with a 15/31-point Gauss pair; the worst panel is
    bisected until the summed pair differences fall below rel_tol times the
    running total.  The final value is accumulated in panel-position order
    so it does not depend on the refinement history.
    """

    def measure(a: float, b: float):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        coarse = half * float(np.dot(_WEIGHTS_LO, f(mid + half * _NODES_LO)))
        fine = half * float(np.dot(_WEIGHTS_HI, f(mid + half * _NODES_HI)))
        return (a, b, fine, abs(fine - coarse))

    edges = np.linspace(lo, hi, 9)
    panels = [measure(a, b) for a, b in zip(edges[:-1], edges[1:])]
    while True:
        total = math.fsum(p[2] for p in sorted(panels))
        err = math.fsum(p[3] for p in panels)
        if err <= rel_tol * abs(total) or err <= 1e-300:
            return total, err
        if len(panels) >= max_panels:
            raise QuadratureError(
                f"needed more than {max_panels} panels on [{lo}, {hi}]",
                value=total,
                abs_err=err,
            )
        worst = max(range(len(panels)), key=lambda i: panels[i][3])
        a, b, _, _ = panels.pop(worst)
        mid = 0.5 * (a + b)
        panels.append(measure(a, mid))
        panels.append(measure(mid, b))


def _tail_window(ps: ProblemSize, cfg: QuadratureConfig) -> tuple[float, float]:
    """[x_front, x_tail] in Erlang abscissa units bracketing the transition
    of F_m(x)^n from ~0 to ~1 - 1e-16-per-unit tails."""
    log_n = math.log(ps.n)
    threshold = cfg.tail_log_threshold
    if threshold is None:
        threshold = math.log(1e-16) - log_n
    x_tail = _sf_crossing(ps.m, threshold, keep_above=False)
    x_front = _sf_crossing(ps.m, _FRONT_LOG_LEVEL - log_n, keep_above=True)
    return x_front, x_tail


def delta_power_moment(
    ps: ProblemSize, s: float, cfg: Optional[QuadratureConfig] = None
) -> MomentResult:
    """E[Delta^s] = s n^s Int_0^inf [1 - F_m(t)^n] t^{s-1} dt, s > 0.

    The abscissa is rescaled by m so the transition window of F^n sits
    near O(1); left of the window the integrand is 1 up to < 3e-20 and is
    integrated in closed form, right of it the discarded tail is below the
    configured threshold.  For s < 1 the substitution v = xi^s removes the
    endpoint singularity before the panels see it.
    """
    if not (isinstance(s, (int, float)) and math.isfinite(s) and s > 0):
        raise ValueError(f"moment exponent must be positive, got {s!r}")
    cfg = cfg or QuadratureConfig()
    s = float(s)
    m, n = ps.m, ps.n
    x_front, x_tail = _tail_window(ps, cfg)
    u_front, u_tail = x_front / m, x_tail / m

    front = u_front**s / s
    front_err = front * 3e-20
    if s >= 1.0:
        f = lambda xi: _one_minus_power_cdf(m, n, m * xi) * xi ** (s - 1.0)
        quad, quad_err = _adaptive_gauss(
            f, u_front, u_tail, cfg.rel_tol, cfg.max_subdivisions
        )
    else:
        inv_s = 1.0 / s
        f = lambda v: _one_minus_power_cdf(m, n, m * v**inv_s) * inv_s
        quad, quad_err = _adaptive_gauss(
            f, u_front**s, u_tail**s, cfg.rel_tol, cfg.max_subdivisions
        )
    # Beyond x_tail, 1 - F^n <= n*sf decays superexponentially; one unit of
    # xi at the cutoff level bounds the discarded mass generously.
    tail_err = math.exp(math.log(n) + erlang_log_sf(m, x_tail)) * max(
        1.0, u_tail ** (s - 1.0)
    )
    prefactor = s * float(n * m) ** s
    return MomentResult(
        value=prefactor * (front + quad),
        abs_err=prefactor * (front_err + quad_err + tail_err),
        method=METHOD_QUADRATURE,
    )


def rising_moment(
    ps: ProblemSize, r: int, cfg: Optional[QuadratureConfig] = None
) -> MomentResult:
    """E[D (D+1) ... (D+r-1)], equal to E[Delta^r]."""
    if not isinstance(r, (int, np.integer)) or r < 1:
        raise ValueError(f"rising-moment order must be an integer >= 1, got {r!r}")
    return delta_power_moment(ps, float(r), cfg)


def mean_delay(ps: ProblemSize, cfg: Optional[QuadratureConfig] = None) -> MomentResult:
    """E[D] = E[Delta] = n Int_0^inf [1 - F_m(t)^n] dt."""
    return delta_power_moment(ps, 1.0, cfg)


def variance_delay(
    ps: ProblemSize, cfg: Optional[QuadratureConfig] = None
) -> MomentResult:
    """Var[D] = E[Delta^2] - E[Delta]^2 - E[Delta].

    The subtraction of the mean converts the companion's variance into the
    delay's.  Cancellation is reflected in abs_err; a result negative
    beyond the error budget raises NumericError.
    """
    second = delta_power_moment(ps, 2.0, cfg)
    first = delta_power_moment(ps, 1.0, cfg)
    value = second.value - first.value**2 - first.value
    abs_err = second.abs_err + (2.0 * first.value + 1.0) * first.abs_err
    if value < -(4.0 * abs_err + 1e-12 * second.value):
        raise NumericError(
            f"variance estimate {value} negative beyond error budget {abs_err}"
        )
    return MomentResult(value=value, abs_err=abs_err, method=METHOD_QUADRATURE)


def mgf_delta(
    ps: ProblemSize, z: float, cfg: Optional[QuadratureConfig] = None
) -> float:
    """E[e^{z Delta}] = E[(1-z)^{-D}] for z < 1/n.

    Returns the integral form 1 + z n Int_0^inf [1 - F_m(t)^n] e^{n z t} dt.
    """
    cfg = cfg or QuadratureConfig()
    m, n = ps.m, ps.n
    if not z < 1.0 / n:
        raise ValueError(f"mgf argument must satisfy z < 1/n = {1.0 / n}, got {z}")
    z = float(z)
    rate = n * z
    x_front, x_base = _tail_window(ps, cfg)

    # Tail cutoff where ln(n) + log_sf + n z t drops below the threshold;
    # the combined exponent is unimodal, so doubling plus bisection finds
    # the descending crossing.
    target = (
        cfg.tail_log_threshold
        if cfg.tail_log_threshold is not None
        else math.log(1e-16) - math.log(n)
    ) + math.log(n)

    def combined(x: float) -> float:
        return math.log(n) + erlang_log_sf(m, x) + rate * x

    x_tail = max(x_base, float(m))
    doublings = 0
    while combined(x_tail) > target:
        x_tail *= 2.0
        doublings += 1
        if doublings > 200 or rate * x_tail > 680.0:
            raise NumericError(
                f"mgf tail cutoff unreachable for z={z} (z too close to 1/n)"
            )
    lo, hi = x_tail / 2.0, x_tail
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if combined(mid) > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-9 * hi:
            break
    x_tail = hi

    if x_front > 0.0:
        front = x_front if z == 0.0 else math.expm1(rate * x_front) / rate
    else:
        front = 0.0

    def f(xi: np.ndarray) -> np.ndarray:
        taus = m * xi
        g = _one_minus_power_cdf(m, n, taus)
        with np.errstate(divide="ignore"):
            return np.exp(rate * taus + np.log(g))

    quad, quad_err = _adaptive_gauss(
        f, x_front / m, x_tail / m, cfg.rel_tol, cfg.max_subdivisions
    )
    return 1.0 + z * n * (front + m * quad)


# ---------------------------------------------------------------------------
# exact small-instance oracles (absorbing chain on sorted capped counts)


@dataclass(frozen=True)
class ExactDistribution:
    """Exact law of D on small instances, P{D = k} for k = m*n .. cutoff."""

    support: np.ndarray
    pmf: np.ndarray
    tail_mass: float

    def moment(self, r: int = 1) -> float:
        return float(np.dot(self.pmf, self.support.astype(np.float64) ** r))

    def mean(self) -> float:
        return self.moment(1)

    def variance(self) -> float:
        mu = self.mean()
        return self.moment(2) - mu * mu

    def rising_moment(self, r: int) -> float:
        ks = self.support.astype(np.float64)
        prod = np.ones_like(ks)
        for j in range(r):
            prod *= ks + j
        return float(np.dot(self.pmf, prod))


def _check_state_space(ps: ProblemSize) -> None:
    states = math.comb(ps.m + ps.n, ps.n)
    if states > _STATE_SPACE_LIMIT:
        raise ValueError(
            f"state space {states} exceeds the exact-oracle bound {_STATE_SPACE_LIMIT}"
        )


def _transitions(state: tuple, m: int, n: int):
    """Yield (probability, successor) over distinct count values below m.

    States are ascending sorted tuples of per-label counts capped at m;
    drawing a label already at m leaves the state unchanged (the trial
    still counts) and is reported by the caller via the residual mass.
    """
    i = 0
    length = len(state)
    while i < length:
        value = state[i]
        j = i
        while j < length and state[j] == value:
            j += 1
        if value < m:
            bumped = list(state)
            bumped[j - 1] = value + 1  # bump the last copy: keeps tuple sorted
            yield (j - i) / n, tuple(bumped)
        i = j


def exact_mean_small(ps: ProblemSize) -> MomentResult:
    """Exact E[D] by expected absorption time over sorted capped counts."""
    _check_state_space(ps)
    m, n = ps.m, ps.n
    done = tuple([m] * n)
    expect = {done: 0.0}
    states = sorted(
        itertools.combinations_with_replacement(range(m + 1), n),
        key=sum,
        reverse=True,
    )
    for state in states:
        if state == done:
            continue
        stay = state.count(m) / n
        acc = 1.0
        for prob, nxt in _transitions(state, m, n):
            acc += prob * expect[nxt]
        expect[state] = acc / (1.0 - stay)
    value = expect[tuple([0] * n)]
    return MomentResult(value=value, abs_err=1e-12 * value, method=METHOD_ORACLE)


def exact_dist_small(ps: ProblemSize, tail_mass: float = 1e-12) -> ExactDistribution:
    """Exact pmf of D to a truncated tail, by forward propagation."""
    _check_state_space(ps)
    m, n = ps.m, ps.n
    done = tuple([m] * n)
    start = tuple([0] * n)
    current = {start: 1.0}
    absorbed: list[float] = []
    step = 0
    remaining = 1.0
    while remaining > tail_mass:
        step += 1
        if step > 10_000_000:  # pragma: no cover
            raise NumericError("distribution propagation failed to drain")
        nxt: dict[tuple, float] = {}
        hit = 0.0
        for state, prob in current.items():
            stay = state.count(m) / n
            if stay:
                nxt[state] = nxt.get(state, 0.0) + prob * stay
            for tprob, tstate in _transitions(state, m, n):
                if tstate == done:
                    hit += prob * tprob
                else:
                    nxt[tstate] = nxt.get(tstate, 0.0) + prob * tprob
        absorbed.append(hit)
        remaining -= hit
        current = nxt
    first = m * n
    pmf = np.array(absorbed[first - 1 :], dtype=np.float64)
    support = np.arange(first, first + len(pmf), dtype=np.int64)
    return ExactDistribution(support=support, pmf=pmf, tail_mass=max(remaining, 0.0))


# ---------------------------------------------------------------------------
# asymptotic predictors


def asymptotic_moment(ps: ProblemSize, regime: Regime, r: int) -> float:
    """Leading-order prediction of the r-th rising moment.

    Supercritical and fixed-n regimes predict (n m)^r; the critical regime
    inflates per-coupon cost by alpha/beta, giving (alpha/beta * n m)^r.
    """
    if not isinstance(r, (int, np.integer)) or r < 1:
        raise ValueError(f"order must be an integer >= 1, got {r!r}")
    if isinstance(regime, (Supercritical, FixedN)):
        return float(ps.n * ps.m) ** r
    if isinstance(regime, Critical):
        ratio = solve_alpha(regime.beta).alpha / regime.beta
        return (ratio * ps.n * ps.m) ** r
    if isinstance(regime, FixedM):
        raise ValueError(
            "fixed-m growth is n ln n, not (nm)^r; use asymptotic_mean_fixed_m"
        )
    raise TypeError(f"unknown regime {regime!r}")


def asymptotic_mean_fixed_m(m: int, n: int) -> float:
    """n ln n + (m-1) n ln ln n + n (gamma - ln((m-1)!)), fixed-m mean growth."""
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError(f"m must be an integer >= 1, got {m!r}")
    if n <= math.e:
        raise ValueError("fixed-m expansion needs n > e so ln(ln(n)) is defined")
    log_n = math.log(n)
    return n * (log_n + (m - 1) * math.log(log_n)) + n * (
        float(np.euler_gamma) - math.lgamma(m)
    )
