"""Decay-rate engine for light-tailed job sizes.

Works entirely through the transform functions of the queue:
sigma_inv(s) = s - lam (1 - X~(s)), its origin-branch inverse sigma, and
the stationary-work transform W~(s) = s (1 - rho) / sigma_inv(s).  Decay
rates are the (negated) singularity locations of W~ and of compositions
W~ o sigma_Y; each is certified by a bisection bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from scipy import optimize

from .distributions import JobSizeDistribution, NbueClass, classify_nbue
from .errors import (
    BracketFailureError,
    ClassMismatchError,
    InvalidParameterError,
    NumericError,
)
from .gittins import build_gittins

INF = math.inf


@dataclass(frozen=True)
class SystemParams:
    lam: float
    rho: float

    def __post_init__(self):
        if not (0.0 < self.rho < 1.0):
            raise InvalidParameterError("rho", "load must lie in (0, 1)")
        if not (self.lam > 0.0):
            raise InvalidParameterError("lambda", "arrival rate must be > 0")


def params(d: JobSizeDistribution, lam: float | None = None,
           rho: float | None = None) -> SystemParams:
    """System parameters from either an arrival rate or a target load."""
    if (lam is None) == (rho is None):
        raise InvalidParameterError("lambda", "give exactly one of lam/rho")
    if lam is None:
        lam = rho / d.mean
    return SystemParams(lam=lam, rho=lam * d.mean)


class Verdict(Enum):
    OPTIMAL = "log-tail-optimal"
    INTERMEDIATE = "log-tail-intermediate"
    PESSIMAL = "log-tail-pessimal"


@dataclass(frozen=True)
class RootResult:
    value: float
    bracket_width: float


@dataclass(frozen=True)
class MinResult:
    """Minimum of sigma_inv: location (= sigma evaluated at its domain
    edge) and value (= the domain edge of sigma itself)."""

    argmin: float
    value: float
    bracket_width: float


@dataclass(frozen=True)
class LightTailReport:
    gamma_X: float
    gamma_W: float
    sigma_at_gamma: float      # argmin of sigma_inv
    gamma_sigma: float         # min value of sigma_inv
    d_fcfs: float
    d_fb: float
    d_policy: float | None
    a_star: float | None
    policy_case: str | None    # "pole" | "edge" | "branch-point"
    pole_diag: tuple[float, ...]
    pole_drift: float
    brackets: dict

    def verdict_for(self, a_star: float, x_max: float) -> Verdict:
        return classify_soap(a_star, x_max)


def _require_light(d: JobSizeDistribution):
    if not d.tail_class.is_light:
        raise ClassMismatchError(
            f"{d.name} is not nicely light-tailed ({d.tail_class})")


def sigma_inv(d: JobSizeDistribution, p: SystemParams, s: float) -> float:
    """s - lam (1 - X~(s)); +inf exactly where the transform diverges."""
    x = d.lst(s)
    if x == INF:
        return INF
    return s - p.lam * (1.0 - x)


def work_lst(d: JobSizeDistribution, p: SystemParams, s: float) -> float:
    """Stationary-work transform W~(s) = s (1 - rho) / sigma_inv(s)."""
    if s == 0.0:
        return 1.0
    si = sigma_inv(d, p, s)
    if si == INF:
        return INF
    return s * (1.0 - p.rho) / si


def _left_edge(d: JobSizeDistribution, p: SystemParams) -> float:
    """A point s < 0 with sigma_inv(s) finite and > 0, as close to the
    divergence abscissa as needed."""
    g = d.lst_abscissa
    if math.isfinite(g):
        for k in range(4, 360):
            s = g + abs(g) * 2.0 ** (-k) if g != 0.0 else -2.0 ** (-k)
            v = sigma_inv(d, p, s)
            if v != INF and v > 0.0:
                return s
        raise BracketFailureError(
            f"{d.name}: sigma_inv never positive above its abscissa; "
            "distribution violates the light-tail (Class I) assumptions")
    s = -1.0
    for _ in range(80):
        v = sigma_inv(d, p, s)
        if v != INF and v > 0.0:
            return s
        s *= 2.0
    raise BracketFailureError(f"{d.name}: no positive sigma_inv found on s < 0")


def gamma_sigma(d: JobSizeDistribution, p: SystemParams,
                xatol: float = 1e-12) -> MinResult:
    """Minimize sigma_inv over (gamma_X, 0).

    Returns the argmin (the value sigma takes at the edge of its domain)
    and the minimum value (the domain edge gamma(sigma)).
    """
    _require_light(d)
    lo = _left_edge(d, p)
    res = optimize.minimize_scalar(lambda s: sigma_inv(d, p, s),
                                   bounds=(lo, 0.0), method="bounded",
                                   options={"xatol": xatol})
    argmin = float(res.x)
    value = float(res.fun)
    if not (value < 0.0):
        raise BracketFailureError(
            f"{d.name}: sigma_inv has no negative minimum (rho >= 1?)")
    return MinResult(argmin=argmin, value=value, bracket_width=xatol)


def gamma_W(d: JobSizeDistribution, p: SystemParams,
            tol: float = 1e-10) -> RootResult:
    """Rightmost negative root of sigma_inv, by bisection between the
    divergence edge and the minimizer."""
    _require_light(d)
    ms = gamma_sigma(d, p)
    lo = _left_edge(d, p)
    hi = ms.argmin
    f_lo = sigma_inv(d, p, lo)
    f_hi = ms.value
    if not (f_lo > 0.0 > f_hi):
        raise BracketFailureError(f"{d.name}: no sign change for gamma_W")
    for _ in range(200):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if sigma_inv(d, p, mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return RootResult(value=0.5 * (lo + hi), bracket_width=hi - lo)


def pole_diagnostic(d: JobSizeDistribution, p: SystemParams, gamma: float,
                    offsets=(1e-3, 1e-4, 1e-5)):
    """s * W~(gamma + s) at small s; a first-order pole makes the products
    converge to a nonzero constant.  Returns (products, relative drift)."""
    prods = tuple(s * work_lst(d, p, gamma + s) for s in offsets)
    lo, hi = min(prods), max(prods)
    drift = abs(hi - lo) / max(abs(lo), 1e-300)
    return prods, drift


def sigma(d: JobSizeDistribution, p: SystemParams, s: float,
          tol: float = 1e-12) -> float:
    """Origin-branch inverse of sigma_inv: the greatest real solution of
    sigma(s) - lam (1 - X~(sigma(s))) = s; -inf below the domain edge."""
    _require_light(d)
    ms = gamma_sigma(d, p)
    if s < ms.value:
        return -INF
    lo = ms.argmin
    if s <= 0.0:
        hi = 0.0
    else:
        hi = s + p.lam + 1.0
    f = lambda x: sigma_inv(d, p, x) - s
    f_lo, f_hi = f(lo), f(hi)
    if f_lo > 0.0:
        # s is (numerically) exactly the minimum
        return lo
    for _ in range(200):
        if hi - lo <= tol * max(1.0, abs(lo)):
            break
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _compose_gamma(dY: JobSizeDistribution, p: SystemParams,
                   g_W: float, branch_tol: float = 1e-10):
    """gamma of W~_X o sigma_Y: either sigma_Y reaches gamma(W~_X) first
    (a pole of the outer transform) or the composition dies at sigma_Y's
    own domain edge."""
    ms = gamma_sigma(dY, p)
    if abs(ms.argmin - g_W) <= branch_tol * max(1.0, abs(g_W)):
        # square-root branch point: both singularities coincide
        return sigma_inv(dY, p, g_W), "branch-point", ms
    if ms.argmin < g_W:
        return sigma_inv(dY, p, g_W), "pole", ms
    return ms.value, "edge", ms


def decay_rates(d: JobSizeDistribution, p: SystemParams,
                a_star: float | None = None) -> LightTailReport:
    """Decay rates of the response time under FCFS, FB, and (optionally)
    the step/spike policy with knee a_star; the step and spike policies
    share one rate."""
    _require_light(d)
    if a_star is not None and not (0.0 < a_star < d.x_max):
        raise InvalidParameterError("a_star", "must lie in (0, x_max)")
    ms = gamma_sigma(d, p)
    gw = gamma_W(d, p)
    prods, drift = pole_diagnostic(d, p, gw.value)
    # FB: the truncation-free composition always dies at sigma's edge
    # (gamma_W < argmin by the ordering chain)
    g_fb, case_fb, _ = _compose_gamma(d, p, gw.value)
    if case_fb != "edge":
        raise NumericError(f"{d.name}: FB composition took case {case_fb}; "
                           "ordering chain violated")
    d_policy = None
    case = None
    brackets = {"gamma_W": gw.bracket_width, "gamma_sigma": ms.bracket_width}
    if a_star is not None:
        dY = d.truncate(a_star)
        g_pol, case, msY = _compose_gamma(dY, p, gw.value)
        d_policy = -g_pol
        brackets["gamma_sigma_truncated"] = msY.bracket_width
    return LightTailReport(
        gamma_X=d.lst_abscissa,
        gamma_W=gw.value,
        sigma_at_gamma=ms.argmin,
        gamma_sigma=ms.value,
        d_fcfs=-gw.value,
        d_fb=-g_fb,
        d_policy=d_policy,
        a_star=a_star,
        policy_case=case,
        pole_diag=prods,
        pole_drift=drift,
        brackets=brackets,
    )


def classify_soap(a_star: float, x_max: float) -> Verdict:
    """Tail verdict of a SOAP policy from its worst age alone."""
    if a_star < 0.0 or a_star > x_max:
        raise InvalidParameterError("a_star", "must lie in [0, x_max]")
    if a_star == 0.0:
        return Verdict.OPTIMAL
    if a_star == x_max:
        return Verdict.PESSIMAL
    return Verdict.INTERMEDIATE


_NBUE_TO_VERDICT = {
    NbueClass.NBUE: Verdict.OPTIMAL,
    NbueClass.ENBUE_NOT_NBUE: Verdict.INTERMEDIATE,
    NbueClass.NOT_ENBUE: Verdict.PESSIMAL,
}


def classify_gittins(d: JobSizeDistribution, cross_check: bool = True,
                     n_knots: int = 512) -> Verdict:
    """Tail verdict of the Gittins policy via the mean-residual-life
    classes, cross-checked against the worst age of the computed rank."""
    _require_light(d)
    verdict = _NBUE_TO_VERDICT[classify_nbue(d)]
    if cross_check:
        rank = build_gittins(d, n_knots=n_knots)
        via_rank = classify_soap(rank.worst_age(), rank.x_max)
        if via_rank is not verdict:
            raise NumericError(
                f"{d.name}: classification mismatch: residual-life route "
                f"{verdict.value}, worst-age route {via_rank.value}")
    return verdict
