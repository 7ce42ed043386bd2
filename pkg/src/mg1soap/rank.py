"""Piecewise-linear rank functions with point spikes.

A rank function maps age to scheduling priority (lower rank is served
first).  The representation keeps exact knot values, allows jump
discontinuities, and carries an explicit description of the behavior on
the final unbounded piece: a linear continuation or an exponential
approach to a finite asymptote.  Crossing ages and sub-level sets are
computed in closed form from the pieces, never by grid scanning.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field

from .errors import DomainError, InvalidParameterError

INF = math.inf

# left-limit levels are taken just below w (Def of hill ages)
LEVEL_NUDGE = 1e-9


@dataclass(frozen=True)
class Tail:
    """Behavior on the final piece [last_knot, inf).

    mode "linear": value = v0 + slope * (a - a0).
    mode "asymptote": value = limit - amp * exp(-(a - a0) / tau); amp > 0
    approaches the limit from below (supremum never attained), amp < 0
    from above.
    """

    mode: str  # "linear" | "asymptote"
    slope: float = 0.0
    limit: float = 0.0
    amp: float = 0.0
    tau: float = 1.0


@dataclass(frozen=True)
class WInterval:
    b: float
    c: float

    @property
    def length(self) -> float:
        return self.c - self.b


@dataclass(frozen=True)
class WIntervalSet:
    """Maximal w-intervals (b_k, c_k) of a rank function below level w."""

    w: float
    intervals: tuple[WInterval, ...]
    c0: float               # first age with rank above w (may be 0)
    truncated: bool         # more intervals exist beyond the scan horizon


@dataclass(frozen=True)
class JobProfile:
    """Worst-rank geometry seen by a job of a given size."""

    x: float
    w_x: float              # sup of rank over [0, x)
    y_x: float              # c0 at level just below w_x
    z_x: float              # c0 at level w_x

    def worst_future_rank(self, rank: "RankFunction", a: float) -> float:
        return rank.sup_on(a, self.x)


class RankFunction:
    """Age -> rank, piecewise linear plus optional point spikes.

    Parameters
    ----------
    ages : knot ages, ages[0] == 0, strictly increasing
    right : value at each knot (functions are right-continuous)
    left : value approached from the left at each knot; left[0] is ignored.
        Defaults to continuous (left == right).
    tail : behavior on [ages[-1], inf); omit for bounded support, in which
        case ages[-1] is x_max and the function lives on [0, x_max).
    spikes : ((age, rank), ...) point overrides
    """

    def __init__(self, ages, right, left=None, tail: Tail | None = None,
                 spikes=(), label: str = "custom"):
        ages = [float(a) for a in ages]
        right = [float(v) for v in right]
        if left is None:
            left = list(right)
        else:
            left = [float(v) for v in left]
        if len(ages) < 1 or ages[0] != 0.0:
            raise InvalidParameterError("ages", "first knot must be 0")
        if any(b <= a for a, b in zip(ages, ages[1:])):
            raise InvalidParameterError("ages", "knots must strictly increase")
        if not (len(ages) == len(right) == len(left)):
            raise InvalidParameterError("ages", "ages/left/right length mismatch")
        if tail is None and len(ages) < 2:
            raise InvalidParameterError("ages", "bounded support needs >= 2 knots")
        self.ages = ages
        self.right = right
        self.left = left
        self.tail = tail
        self.spikes = tuple(sorted((float(a), float(v)) for a, v in spikes))
        self.label = label
        self.x_max = INF if tail is not None else ages[-1]
        # per-piece slopes between interior knots
        self._slopes = [
            (left[i + 1] - right[i]) / (ages[i + 1] - ages[i])
            for i in range(len(ages) - 1)
        ]

    # -- basic queries --------------------------------------------------

    def _piece_value(self, i: int, a: float) -> float:
        """Value at age a on piece i (no spike override)."""
        if i == len(self.ages) - 1:
            t = self.tail
            a0, v0 = self.ages[-1], self.right[-1]
            if t.mode == "linear":
                return v0 + t.slope * (a - a0)
            return t.limit - t.amp * math.exp(-(a - a0) / t.tau)
        return self.right[i] + self._slopes[i] * (a - self.ages[i])

    def _piece_index(self, a: float) -> int:
        return bisect_right(self.ages, a) - 1

    def value(self, a: float) -> float:
        """Rank at age a (spike-aware, right-continuous)."""
        if a < 0.0 or a >= self.x_max:
            raise DomainError(f"age {a} outside [0, {self.x_max})")
        for sa, sv in self.spikes:
            if sa == a:
                return sv
        return self._piece_value(self._piece_index(a), a)

    def base_value(self, a: float) -> float:
        """Rank ignoring spikes."""
        return self._piece_value(self._piece_index(a), a)

    def __call__(self, a: float) -> float:
        return self.value(a)

    # -- sup / crossing machinery ---------------------------------------

    def _piece_bounds(self, i: int, lo: float, hi: float):
        """Clip piece i to [lo, hi); None if empty."""
        s = max(self.ages[i], lo)
        e = self.ages[i + 1] if i < len(self.ages) - 1 else self.x_max
        e = min(e, hi)
        if e <= s:
            return None
        return s, e

    def sup_on(self, lo: float, hi: float) -> float:
        """Supremum of the rank over [lo, hi) (spike-aware)."""
        if hi <= lo:
            raise DomainError(f"empty interval [{lo}, {hi})")
        hi = min(hi, self.x_max)
        best = -INF
        i0 = self._piece_index(lo)
        n = len(self.ages)
        for i in range(i0, n):
            bounds = self._piece_bounds(i, lo, hi)
            if bounds is None:
                if self.ages[i] >= hi:
                    break
                continue
            s, e = bounds
            v_s = self._piece_value(i, s)
            best = max(best, v_s)
            if i == n - 1 and self.tail is not None:
                t = self.tail
                if t.mode == "linear":
                    if t.slope > 0.0:
                        best = max(best,
                                   INF if e == INF else self._piece_value(i, e))
                else:
                    if t.amp > 0.0:
                        best = max(best,
                                   t.limit if e == INF else self._piece_value(i, e))
            else:
                # interior linear piece: check the right-open endpoint
                if e == self.ages[i + 1]:
                    best = max(best, self.left[i + 1])
                else:
                    best = max(best, self._piece_value(i, e))
        for sa, sv in self.spikes:
            if lo <= sa < hi:
                best = max(best, sv)
        return best

    def first_above(self, level: float, start: float = 0.0) -> float:
        """inf{a >= start : rank(a) > level}; x_max if the set is empty."""
        start = max(start, 0.0)
        if start >= self.x_max:
            return self.x_max
        spikes = [(sa, sv) for sa, sv in self.spikes
                  if sa >= start and sv > level]
        i0 = self._piece_index(start)
        n = len(self.ages)
        for i in range(i0, n):
            bounds = self._piece_bounds(i, start, self.x_max)
            if bounds is None:
                continue
            s, e = bounds
            cross = self._cross_above(i, s, e, level)
            if spikes and (cross is None or spikes[0][0] < cross):
                if spikes[0][0] < e:
                    return spikes[0][0]
            if cross is not None:
                return cross
            spikes = [(sa, sv) for sa, sv in spikes if sa >= e]
        return self.x_max

    def _cross_above(self, i, s, e, level):
        """First age in [s, e) where piece i exceeds level, else None."""
        v_s = self._piece_value(i, s)
        if v_s > level:
            return s
        if i == len(self.ages) - 1 and self.tail is not None:
            t = self.tail
            a0, v0 = self.ages[-1], self.right[-1]
            if t.mode == "linear":
                if t.slope <= 0.0:
                    return None
                a = a0 + (level - v0) / t.slope
                a = max(a, s)
                return a if a < e else None
            if t.amp <= 0.0 or level >= t.limit:
                return None
            # limit - amp * exp(-(a-a0)/tau) > level
            a = a0 + t.tau * math.log(t.amp / (t.limit - level))
            a = max(a, s)
            return a if a < e else None
        m = self._slopes[i]
        if m <= 0.0:
            return None
        a = self.ages[i] + (level - self.right[i]) / m
        a = max(a, s)
        return a if a < e else None

    def _deriv_sign(self, i: int) -> float:
        """Sign of the slope on piece i (tail pieces included)."""
        if i == len(self.ages) - 1 and self.tail is not None:
            t = self.tail
            if t.mode == "linear":
                return t.slope
            return t.amp  # increasing toward the limit iff amp > 0
        return self._slopes[i]

    def first_at_or_below(self, level: float, start: float) -> float:
        """inf{a > start : rank(a) <= level}; x_max if empty.

        Isolated single-age dips (downward spikes) are ignored; they have
        zero length and open no interval.
        """
        if start >= self.x_max:
            return self.x_max
        i0 = self._piece_index(start)
        n = len(self.ages)
        for i in range(i0, n):
            bounds = self._piece_bounds(i, start, self.x_max)
            if bounds is None:
                continue
            s, e = bounds
            v_s = self._piece_value(i, s)
            if v_s <= level:
                if s > start:
                    return s
                # open left endpoint: the set begins at start only if the
                # rank stays at or below the level just after it
                if v_s < level or self._deriv_sign(i) <= 0.0:
                    return start
                # touches the level and moves strictly above: keep scanning;
                # an upward piece has no down-crossing, so the loop advances
            if i == n - 1 and self.tail is not None:
                t = self.tail
                a0, v0 = self.ages[-1], self.right[-1]
                if t.mode == "linear":
                    if t.slope >= 0.0:
                        return self.x_max
                    a = a0 + (level - v0) / t.slope
                    return max(a, s)
                if t.amp < 0.0 and level > t.limit:
                    # decreasing toward limit: crosses when the excess decays
                    a = a0 + t.tau * math.log(-t.amp / (level - t.limit))
                    return max(a, s)
                return self.x_max
            m = self._slopes[i]
            if m < 0.0:
                a = self.ages[i] + (level - self.right[i]) / m
                a = max(a, s)
                if a < e:
                    return a
        return self.x_max

    # -- derived analysis ------------------------------------------------

    def worst_age(self) -> float:
        """First age attaining the global maximum rank; x_max when the
        supremum is never attained."""
        a_star, _, attained = self._global_max()
        return a_star if attained else self.x_max

    def global_sup(self) -> float:
        _, sup, _ = self._global_max()
        return sup

    def global_max(self) -> tuple[float, float, bool]:
        """(age, sup, attained); age is x_max when unattained."""
        a, sup, attained = self._global_max()
        return (a if attained else self.x_max), sup, attained

    def _global_max(self):
        best_v, best_a = -INF, None
        # attained candidates: knot values and spikes
        for a, v in zip(self.ages, self.right):
            if v > best_v:
                best_v, best_a = v, a
        for sa, sv in self.spikes:
            if sv > best_v or (sv == best_v and sa < best_a):
                best_v, best_a = sv, sa
        # unattained suprema: jump-down left limits and tail behavior
        open_sup = -INF
        for i in range(1, len(self.ages)):
            if self.left[i] > self.right[i]:
                open_sup = max(open_sup, self.left[i])
        if self.tail is not None:
            if self.tail.mode == "linear" and self.tail.slope > 0.0:
                open_sup = INF
            elif self.tail.mode == "asymptote" and self.tail.amp > 0.0:
                open_sup = max(open_sup, self.tail.limit)
        else:
            # bounded support: approach to x_max on the last piece
            if self._slopes and self._slopes[-1] > 0.0:
                open_sup = max(open_sup, self.left[-1])
        if open_sup > best_v:
            return self.x_max, open_sup, False
        return best_a, best_v, True

    def w_intervals(self, w: float, horizon: float = INF) -> WIntervalSet:
        """Maximal w-intervals with exact endpoints, enumerated while
        b_k < horizon."""
        intervals = []
        c0 = self.first_above(w, 0.0)
        if c0 > 0.0:
            intervals.append(WInterval(0.0, c0))
        pos = c0
        truncated = False
        while pos < self.x_max:
            b = self.first_at_or_below(w, pos)
            if b >= self.x_max:
                break
            if b >= horizon:
                truncated = True
                break
            c = self._next_above(w, b)
            if c <= b:
                # degenerate isolated point; skip past it
                pos = math.nextafter(b, INF)
                continue
            intervals.append(WInterval(b, c))
            pos = c
        return WIntervalSet(w, tuple(intervals), c0, truncated)

    def _next_above(self, w: float, b: float) -> float:
        """inf{a > b : rank(a) > w} treating spikes strictly beyond b."""
        # first_above with start just past b would lose exactness; instead
        # call first_above at b and, if it returns b because of a spike at
        # exactly b, rescan past it.
        c = self.first_above(w, b)
        if c == b:
            c = self.first_above(w, math.nextafter(b, INF))
        return c

    def job_profile(self, x: float) -> JobProfile:
        """Worst ever rank and hill ages for a job of size x."""
        if not (0.0 < x <= self.x_max):
            raise DomainError(f"size {x} outside (0, x_max]")
        w_x = self.sup_on(0.0, x)
        nudge = LEVEL_NUDGE * max(1.0, abs(w_x))
        y_x = self.first_above(w_x - nudge, 0.0)
        z_x = self.first_above(w_x, 0.0)
        return JobProfile(x=x, w_x=w_x, y_x=y_x, z_x=z_x)

    def with_spike(self, age: float, rank: float,
                   label: str | None = None) -> "RankFunction":
        return RankFunction(self.ages, self.right, self.left, self.tail,
                            self.spikes + ((age, rank),),
                            label or self.label)

    # -- serialization ----------------------------------------------------

    def to_spec_text(self) -> str:
        """Compact structured-text policy spec (knots + tail + spikes)."""
        lines = [f"label {self.label}"]
        for a, r, l in zip(self.ages, self.right, self.left):
            lines.append(f"knot {a!r} {r!r} {l!r}")
        if self.tail is not None:
            t = self.tail
            if t.mode == "linear":
                lines.append(f"tail linear {t.slope!r}")
            else:
                lines.append(f"tail asymptote {t.limit!r} {t.amp!r} {t.tau!r}")
        for sa, sv in self.spikes:
            lines.append(f"spike {sa!r} {sv!r}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def from_spec_text(text: str) -> "RankFunction":
        label = "custom"
        ages, right, left, spikes, tail = [], [], [], [], None
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if parts[0] == "label":
                label = " ".join(parts[1:])
            elif parts[0] == "knot":
                a, r, l = (float(x) for x in parts[1:4])
                ages.append(a)
                right.append(r)
                left.append(l)
            elif parts[0] == "tail":
                if parts[1] == "linear":
                    tail = Tail("linear", slope=float(parts[2]))
                else:
                    tail = Tail("asymptote", limit=float(parts[2]),
                                amp=float(parts[3]), tau=float(parts[4]))
            elif parts[0] == "spike":
                spikes.append((float(parts[1]), float(parts[2])))
            else:
                raise InvalidParameterError("policy", f"bad spec line {raw!r}")
        return RankFunction(ages, right, left, tail, spikes, label)

    def __repr__(self):
        return (f"RankFunction({self.label}, {len(self.ages)} knots, "
                f"{len(self.spikes)} spikes)")


# ---------------------------------------------------------------------------
# named policies
# ---------------------------------------------------------------------------


def fcfs() -> RankFunction:
    return RankFunction([0.0], [0.0], tail=Tail("linear", slope=0.0),
                        label="fcfs")


def fb() -> RankFunction:
    return RankFunction([0.0], [0.0], tail=Tail("linear", slope=1.0),
                        label="fb")


def step(a_star: float) -> RankFunction:
    if not (a_star > 0.0):
        raise InvalidParameterError("a_star", "must be > 0")
    return RankFunction([0.0, a_star], [0.0, a_star],
                        tail=Tail("linear", slope=0.0),
                        label=f"step({a_star:g})")


def spike(a_star: float, height: float = 1.0) -> RankFunction:
    if not (a_star > 0.0):
        raise InvalidParameterError("a_star", "must be > 0")
    return RankFunction([0.0], [0.0], tail=Tail("linear", slope=0.0),
                        spikes=((a_star, height),),
                        label=f"spike({a_star:g})")


def sawtooth(period: float, horizon: float) -> RankFunction:
    """r(a) = a mod period up to the horizon, rising linearly after."""
    if not (period > 0.0 and horizon > period):
        raise InvalidParameterError("period", "need 0 < period < horizon")
    ages, right, left = [0.0], [0.0], [0.0]
    k = 1
    while k * period < horizon:
        ages.append(k * period)
        right.append(0.0)
        left.append(period)
        k += 1
    return RankFunction(ages, right, left, tail=Tail("linear", slope=1.0),
                        label=f"sawtooth({period:g})")


def make_policy(name: str) -> RankFunction:
    """Parse a policy name: fcfs | fb | step:A | spike:A."""
    text = name.strip().lower()
    if text == "fcfs":
        return fcfs()
    if text == "fb":
        return fb()
    for prefix, builder in (("step", step), ("spike", spike)):
        for sep in (":", "("):
            if text.startswith(prefix + sep):
                arg = text[len(prefix) + 1:].rstrip(")")
                return builder(float(arg))
    raise InvalidParameterError("policy", f"unknown policy {name!r}")
