"""Gittins rank machinery: time-per-completion, rank computation, the
piecewise-linear rank builder, relevant-segment moments, the stopping
game used as an independent cross-check, and the tail-improved
approximate policy."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, optimize

from .distributions import JobSizeDistribution
from .errors import (
    DomainError,
    NoValidAgeError,
    PastSupportError,
    UnboundedResidualError,
)
from .rank import RankFunction, Tail

INF = math.inf


def phi(d: JobSizeDistribution, b: float, c: float) -> float:
    """Expected service spent in (b, c] per unit completion probability.

    Returns inf when no completion mass lies in (b, c].
    """
    if not (0.0 <= b < c):
        raise DomainError(f"need 0 <= b < c, got ({b}, {c})")
    c = min(c, d.x_max)
    if c <= b:
        raise DomainError(f"need b < c within support, got ({b}, {c})")
    done = d.tail(b) - d.tail(c)
    if done <= 0.0:
        return INF
    return d.itail(b, c) / done


def _horizon(d: JobSizeDistribution, floor: float = 1e-12,
             cap: float = 1e6) -> float:
    if math.isfinite(d.x_max):
        return d.x_max
    h = float(np.asarray(d.quantile(1.0 - floor)))
    return min(max(h, 1.0), cap)


def _hazard_limit(d: JobSizeDistribution, a: float) -> float:
    """lim_{c -> a+} phi(a, c) = 1/hazard(a) where a density exists."""
    f = d.density(a)
    if f <= 0.0:
        return INF
    return d.tail(a) / f


def gittins_rank(d: JobSizeDistribution, a: float, tol: float = 1e-8) -> float:
    """inf over c in (a, x_max] of phi(a, c), including the c = inf
    candidate (the mean residual life) and the c -> a+ hazard limit."""
    if a < 0.0 or a >= d.x_max:
        raise PastSupportError(f"age {a} outside [0, x_max)")
    sa = d.tail(a)
    if sa <= 0.0:
        raise PastSupportError(f"tail({a}) = 0 for {d.name}")
    hi = _horizon(d)
    if not math.isfinite(d.x_max):
        hi = max(hi, a * 1.5 + 4.0 * d.mean)
    best = INF
    if not math.isfinite(d.x_max):
        best = d.mean_residual(a)  # c = inf
    # candidate ladder: geometric past a, plus atoms and the support edge
    scale = max(d.mean, a * 1e-3)
    cands = set()
    step = scale * 1e-4
    c = a + step
    while c < hi:
        cands.add(c)
        step *= 1.7
        c = a + step
    if hi > a:
        cands.add(hi)
    cands = {c for c in cands if c > a}
    for loc, _ in d.atoms:
        if a < loc <= hi:
            cands.add(loc)
    cands = sorted(cands)
    if not cands:
        raise PastSupportError(f"no stop candidates beyond age {a}")
    vals = [phi(d, a, c) for c in cands]
    best = min(best, min(vals))
    atom_locs = {loc for loc, _ in d.atoms}
    floor = a + 1e-14 * max(1.0, a)
    best = min(best, _refine_local_minima(
        lambda c_: phi(d, a, c_), cands, vals, floor, hi, atom_locs,
        xatol=max(tol * scale * 1e-3, 1e-15)))
    hz = _hazard_limit(d, a)
    if hz < best:
        best = hz
    return best


def _refine_local_minima(f, cands, vals, floor, ceil, atom_locs, xatol):
    """Golden-refine around every ladder-local minimum; the coarse ladder
    alone can rank basins in the wrong order."""
    best = INF
    n = len(cands)
    for k in range(n):
        left = vals[k - 1] if k > 0 else INF
        right = vals[k + 1] if k + 1 < n else INF
        if not (vals[k] <= left and vals[k] <= right):
            continue
        if cands[k] in atom_locs:
            continue  # the atom itself is the exact candidate
        lo_b = cands[k - 1] if k > 0 else floor
        hi_b = cands[k + 1] if k + 1 < n else ceil
        if hi_b <= lo_b:
            continue
        res = optimize.minimize_scalar(f, bounds=(lo_b, hi_b),
                                       method="bounded",
                                       options={"xatol": xatol})
        best = min(best, float(res.fun))
    return best


def default_age_grid(d: JobSizeDistribution, n: int = 2048,
                     horizon: float | None = None) -> np.ndarray:
    """Knot ages: linear below 1, log-spaced above, out to the age where
    the tail drops below 1e-12 (capped at 1e6) or to x_max."""
    if horizon is None:
        horizon = _horizon(d)
    bounded = math.isfinite(d.x_max)
    top = horizon if not bounded else d.x_max * (1.0 - 1e-9)
    if top <= 1.0:
        ages = np.linspace(0.0, top, n)
    else:
        n_lin = max(n // 4, 16)
        lin = np.linspace(0.0, 1.0, n_lin, endpoint=False)
        geo = np.geomspace(1.0, top, n - n_lin)
        ages = np.concatenate([lin, geo])
    extra = [loc for loc, _ in d.atoms if 0.0 < loc < top]
    extra += [k for k in d.knots if 0.0 < k < top]
    if extra:
        ages = np.append(ages, extra)
    return np.unique(ages)


def build_gittins(d: JobSizeDistribution, n_knots: int = 2048,
                  horizon: float | None = None, tol: float = 1e-8,
                  refine_passes: int = 2,
                  curvature_tol: float = 1e-4) -> RankFunction:
    """Piecewise-linear interpolation of the Gittins rank over an age
    grid, with midpoint refinement where the interpolant is poor and an
    analytic continuation past the last knot."""
    ages = list(default_age_grid(d, n_knots, horizon))
    vals = [gittins_rank(d, a, tol) for a in ages]
    for _ in range(refine_passes):
        inserts = []
        for i in range(len(ages) - 1):
            mid = 0.5 * (ages[i] + ages[i + 1])
            if mid <= ages[i] or mid >= ages[i + 1]:
                continue
            v_mid = gittins_rank(d, mid, tol)
            interp = 0.5 * (vals[i] + vals[i + 1])
            if abs(v_mid - interp) > curvature_tol * max(1.0, abs(v_mid)):
                inserts.append((mid, v_mid))
        if not inserts:
            break
        for a, v in inserts:
            ages.append(a)
            vals.append(v)
        order = np.argsort(ages)
        ages = [ages[i] for i in order]
        vals = [vals[i] for i in order]

    if math.isfinite(d.x_max):
        # final piece extrapolates to the support edge
        slope = (vals[-1] - vals[-2]) / (ages[-1] - ages[-2])
        edge_val = vals[-1] + slope * (d.x_max - ages[-1])
        ages.append(d.x_max)
        vals.append(edge_val)
        return RankFunction(ages, vals, label="gittins")

    ages, vals, tail = _gittins_tail(d, ages, vals)
    return RankFunction(ages, vals, tail=tail, label="gittins")


def _gittins_tail(d, ages, vals):
    """Continuation past the last knot, using the analytic limit of the
    mean residual life when the family has one.

    When the rank approaches a finite limit, knots past the point where
    the gap to the limit falls under float resolution are dropped and the
    approach is carried by an exponential asymptote; otherwise an attained
    maximum would be fabricated out of rounding.
    """
    limit = d.mrl_limit
    slope = (vals[-1] - vals[-2]) / (ages[-1] - ages[-2])
    if not math.isfinite(limit):
        return ages, vals, Tail("linear", slope=max(slope, 0.0))
    tol_amp = 1e-9 * max(1.0, abs(limit))
    gaps = [limit - v for v in vals]
    if max(abs(g) for g in gaps) <= tol_amp:
        # rank is flat at the limit everywhere (memoryless case)
        return ages, vals, Tail("linear", slope=0.0)
    j = max(i for i, g in enumerate(gaps) if abs(g) > tol_amp)
    if j < 1:
        return ages, vals, Tail("linear", slope=0.0)
    ages, vals = ages[:j + 1], vals[:j + 1]
    amp, prev_amp = gaps[j], gaps[j - 1]
    if prev_amp * amp <= 0.0 or abs(prev_amp) <= abs(amp):
        return ages, vals, Tail("linear", slope=0.0)
    tau = (ages[-1] - ages[-2]) / math.log(prev_amp / amp)
    if not (tau > 0.0 and math.isfinite(tau)):
        return ages, vals, Tail("linear", slope=0.0)
    return ages, vals, Tail("asymptote", limit=limit, amp=amp, tau=tau)


# ---------------------------------------------------------------------------
# relevant job segments
# ---------------------------------------------------------------------------


def segment_moment(d: JobSizeDistribution, b: float, c: float,
                   p: float) -> float:
    """E[max{0, min(X, c) - b}^{p+1}] = int_b^c (p+1)(t-b)^p tail(t) dt."""
    if not (0.0 <= b < c):
        raise DomainError(f"need 0 <= b < c, got ({b}, {c})")
    if p < 0.0:
        raise DomainError("p must be >= 0")
    c = min(c, d.x_max)
    if c <= b:
        return 0.0
    if p == 0.0:
        return d.itail(b, c)

    def f(t):
        return (p + 1.0) * (t - b) ** p * d.tail(t)

    cuts = sorted({k for k in d.knots if b < k < c}
                  | {a for a, _ in d.atoms if b < a < c})
    edges = [b, *cuts, c]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(f, lo, hi, epsabs=1e-10, epsrel=1e-8,
                                limit=200)
        total += val
    return total


# ---------------------------------------------------------------------------
# the stopping game (independent route to the rank)
# ---------------------------------------------------------------------------


def game_service(d: JobSizeDistribution, b: float, c: float) -> float:
    """Expected service given to a job at age b before stopping at c."""
    if c <= b:
        return 0.0
    sb = d.tail(b)
    if sb <= 0.0:
        raise PastSupportError(f"tail({b}) = 0")
    return d.itail(b, min(c, d.x_max)) / sb


def game_done(d: JobSizeDistribution, b: float, c: float) -> float:
    """Probability the job completes before age c, given it is at b."""
    if c <= b:
        return 0.0
    sb = d.tail(b)
    if sb <= 0.0:
        raise PastSupportError(f"tail({b}) = 0")
    return 1.0 - d.tail(min(c, d.x_max)) / sb


def game_cost(d: JobSizeDistribution, w: float, b: float, c: float) -> float:
    """Expected cost of serving from age b, giving up at age c, with
    give-up penalty w."""
    if w < 0.0 or b < 0.0 or c < b:
        raise DomainError(f"need w >= 0 and 0 <= b <= c, got w={w}, ({b}, {c})")
    return game_service(d, b, c) + w * (1.0 - game_done(d, b, c))


def game_opt(d: JobSizeDistribution, w: float, b: float,
             n_grid: int = 64) -> float:
    """Optimal expected game cost: inf over stop ages c >= b (c = b and
    c = inf included)."""
    if w < 0.0:
        raise DomainError("w must be >= 0")
    best = w  # c = b: give up immediately
    hi = _horizon(d)
    if b >= d.x_max or d.tail(b) <= 0.0:
        return best
    if not math.isfinite(d.x_max):
        best = min(best, game_cost(d, w, b, INF))
    scale = max(d.mean, b * 1e-3)
    cands = set()
    step = scale * 1e-4
    c = b + step
    while c < hi:
        cands.add(c)
        step *= 1.6
        c = b + step
    if hi > b:
        cands.add(hi)
    cands = {c for c in cands if c > b}
    for loc, _ in d.atoms:
        if b < loc <= hi:
            cands.add(loc)
    cands = sorted(cands)
    if not cands:
        return best
    vals = [game_cost(d, w, b, c) for c in cands]
    best = min(best, min(vals))
    atom_locs = {loc for loc, _ in d.atoms}
    floor = b + 1e-14 * max(1.0, b)
    best = min(best, _refine_local_minima(
        lambda c_: game_cost(d, w, b, c_), cands, vals, floor, hi, atom_locs,
        xatol=1e-12 * max(1.0, scale)))
    return best


def rank_via_game(d: JobSizeDistribution, a: float, tol: float = 1e-7) -> float:
    """Rank recovered as the largest penalty at which giving up immediately
    is still optimal: max{w >= 0 : game_opt(w; a) = w}.  Independent
    cross-check for gittins_rank."""
    if a < 0.0 or a >= d.x_max or d.tail(a) <= 0.0:
        raise PastSupportError(f"age {a} outside support")
    hi = d.mean_residual(a) * (1.0 + 1e-6) + 1e-12

    def gives_up(w):
        # game_opt < w means serving beats quitting, so the rank is below w
        return game_opt(d, w, a) >= w * (1.0 - 1e-12) - 1e-300

    lo = 0.0
    # hi has game_opt < hi by construction (stop at inf costs m(a) < hi)
    for _ in range(200):
        if hi - lo <= tol * max(1.0, lo):
            break
        mid = 0.5 * (lo + hi)
        if gives_up(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# tail-improved approximate policy
# ---------------------------------------------------------------------------


def approx_gittins(d: JobSizeDistribution, eps: float,
                   n_knots: int = 2048,
                   base: RankFunction | None = None) -> RankFunction:
    """Gittins rank bumped by a factor (1 + eps) at a single age chosen so
    the bumped value is the attained global maximum.  The result's rank
    over the Gittins rank lies in [1, 1 + eps] at every age, and its
    worst age is finite.

    Requires a uniformly bounded mean residual life (checked against the
    grid and the family's analytic tail limit).
    """
    if eps < 0.0:
        raise DomainError("eps must be >= 0")
    if not math.isfinite(d.mrl_limit):
        raise UnboundedResidualError(
            f"{d.name}: sup of mean residual life is infinite")
    if base is None:
        base = build_gittins(d, n_knots)
    _, sup, attained = base.global_max()
    if not math.isfinite(sup):
        raise UnboundedResidualError(
            f"{d.name}: computed rank function is unbounded")
    # smallest grid age whose bumped rank clears the global supremum; when
    # the supremum is only approached, tiny headroom keeps the bumped age
    # the attained argmax in floats
    target = sup if attained else sup * (1.0 + 1e-12)
    chosen = None
    for a, v in zip(base.ages, base.right):
        if (1.0 + eps) * v >= target:
            chosen = (a, v)
            break
    if chosen is None:
        raise NoValidAgeError(
            f"{d.name}: no grid age reaches the rank supremum within "
            f"factor 1+eps (eps={eps})")
    a_eps, v = chosen
    return base.with_spike(a_eps, (1.0 + eps) * v,
                           label=f"approx-gittins({eps:g})")
