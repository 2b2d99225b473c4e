"""Weighted intervals: exact 1-D cores, the log-concave core inequality and
the numerical observations behind it.

Weights are ``exp(c)`` with ``c`` concave and piecewise linear, which keeps
every integral in closed form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import exprel


class HypothesisViolation(ValueError):
    """The premise of an inequality check does not hold for the given input."""


# --------------------------------------------------------------------------
# Types
# --------------------------------------------------------------------------


class IntervalSet:
    """Finite union of disjoint closed intervals, sorted.

    Zero-length intervals are allowed; they carry no measure but keep
    measure-zero cores visible.
    """

    __slots__ = ("intervals", "host")

    def __init__(self, intervals: Sequence[tuple[float, float]] = (), host: tuple[float, float] | None = None):
        iv = []
        for a, b in intervals:
            a, b = float(a), float(b)
            if b < a:
                raise ValueError(f"interval ({a}, {b}) has negative length")
            if host is not None:
                a, b = max(a, host[0]), min(b, host[1])
                if b < a:
                    continue
            iv.append((a, b))
        iv.sort()
        merged: list[list[float]] = []
        for a, b in iv:
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        self.intervals = tuple((a, b) for a, b in merged)
        self.host = None if host is None else (float(host[0]), float(host[1]))

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __repr__(self):
        return f"IntervalSet({list(self.intervals)})"

    def __eq__(self, other):
        return isinstance(other, IntervalSet) and self.intervals == other.intervals

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            out |= (x >= a) & (x <= b)
        return out

    def measure_in(self, lo: float, hi: float) -> float:
        """Length of the intersection with ``[lo, hi]``."""
        return float(sum(max(0.0, min(b, hi) - max(a, lo)) for a, b in self.intervals))

    def cumulative(self, t) -> np.ndarray:
        """Vectorised ``|E ∩ (-inf, t]|``."""
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape)
        for a, b in self.intervals:
            out += np.clip(t - a, 0.0, b - a)
        return out

    def is_subset(self, other: "IntervalSet", tol: float = 1e-12) -> bool:
        for a, b in self.intervals:
            if not any(c - tol <= a and b <= d + tol for c, d in other.intervals):
                return False
        return True

    def to_json(self) -> str:
        return json.dumps({"intervals": [list(p) for p in self.intervals], "host": self.host})

    @classmethod
    def from_json(cls, text: str) -> "IntervalSet":
        d = json.loads(text)
        host = d.get("host")
        return cls([tuple(p) for p in d["intervals"]], None if host is None else tuple(host))


class LogLinearWeight:
    """``f = exp(c)`` with ``c`` concave and linear between breakpoints."""

    __slots__ = ("breakpoints", "values", "slopes")

    def __init__(self, breakpoints, values, tol: float = 1e-9):
        t = np.asarray(breakpoints, dtype=float)
        c = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != c.shape or len(t) < 2:
            raise ValueError("need matching breakpoints and values, at least two")
        if np.any(np.diff(t) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        s = np.diff(c) / np.diff(t)
        if np.any(np.diff(s) > tol * (1.0 + np.abs(s[1:]))):
            raise ValueError("log-weight is not concave (slopes must be non-increasing)")
        self.breakpoints = t
        self.values = c
        self.slopes = s

    def __repr__(self):
        return f"LogLinearWeight({len(self.breakpoints)} breakpoints on {self.interval})"

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    def log(self, t) -> np.ndarray:
        return np.interp(t, self.breakpoints, self.values)

    def __call__(self, t) -> np.ndarray:
        return np.exp(self.log(t))

    def slope_right(self, x: float) -> float:
        i = int(np.searchsorted(self.breakpoints, x, side="right")) - 1
        return float(self.slopes[min(max(i, 0), len(self.slopes) - 1)])

    def slope_left(self, x: float) -> float:
        i = int(np.searchsorted(self.breakpoints, x, side="left")) - 1
        return float(self.slopes[min(max(i, 0), len(self.slopes) - 1)])

    def integral(self, a: float, b: float) -> float:
        """Closed-form integral over ``[a, b]`` clipped to the support."""
        t = self.breakpoints
        u = np.maximum(t[:-1], a)
        v = np.minimum(t[1:], b)
        w = v - u
        ok = w > 0
        if not ok.any():
            return 0.0
        u, w, s = u[ok], w[ok], self.slopes[ok]
        return float(np.sum(np.exp(self.log(u)) * w * exprel(s * w)))

    @property
    def total(self) -> float:
        return self.integral(*self.interval)

    def to_json(self) -> str:
        return json.dumps({"breakpoints": self.breakpoints.tolist(), "log_values": self.values.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "LogLinearWeight":
        d = json.loads(text)
        return cls(d["breakpoints"], d["log_values"])


def check_lambda(lam: float) -> float:
    lam = float(lam)
    if not lam > 1.0:
        raise ValueError(f"lambda must satisfy lambda > 1, got {lam}")
    return lam


# --------------------------------------------------------------------------
# Operations
# --------------------------------------------------------------------------


def integrate(f: LogLinearWeight, S: IntervalSet) -> float:
    return float(sum(f.integral(a, b) for a, b in S))


def core_set_1d(E: IntervalSet, I: tuple[float, float], lam: float) -> IntervalSet:
    """Points of ``E`` around which every subinterval of ``I`` is at least a
    ``(lam - 1) / lam`` fraction ``E``.

    With ``h(t) = |E ∩ [lo, t]| - theta (t - lo)``, a point ``x`` of ``E``
    survives iff ``h(x)`` is a running maximum from the left and a running
    minimum from the right.  ``h`` rises with slope ``1 / lam`` on ``E`` and
    falls on gaps, so the extremes sit at component endpoints and the
    surviving part of each component is cut out by two linear equations.
    """
    lam = check_lambda(lam)
    lo, hi = float(I[0]), float(I[1])
    theta = (lam - 1.0) / lam
    comps = [(max(a, lo), min(b, hi)) for a, b in E if min(b, hi) >= max(a, lo)]
    if not comps:
        return IntervalSet((), host=(lo, hi))
    E = IntervalSet(comps)
    comps = list(E.intervals)

    def h(x):
        return float(E.cumulative(x)) - theta * (x - lo)

    ha = [h(a) for a, _ in comps]
    hb = [h(b) for _, b in comps]
    n = len(comps)
    prefix = [0.0] * n
    run = h(lo)
    for j in range(n):
        prefix[j] = run if comps[j][0] > lo else h(lo)
        run = max(run, hb[j])
    suffix = [0.0] * n
    run = h(hi)
    for j in range(n - 1, -1, -1):
        suffix[j] = min(run, hb[j])
        run = min(run, ha[j])
    out = []
    scale = max(1.0, abs(lo), abs(hi))
    for j, (a, b) in enumerate(comps):
        x_left = a + lam * max(0.0, prefix[j] - ha[j])
        x_right = min(b, a + lam * (suffix[j] - ha[j]))
        if x_left <= x_right + 1e-13 * scale and x_left <= b:
            out.append((x_left, max(x_left, x_right)))
    return IntervalSet(out, host=(lo, hi))


@dataclass(frozen=True)
class LemmaCheck:
    lhs: float
    rhs: float
    holds: bool

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def verify_lemma(f: LogLinearWeight, E: IntervalSet, lam: float, tol: float = 1e-9) -> LemmaCheck:
    I = f.interval
    core = core_set_1d(E, I, lam)
    total = f.total
    lhs = integrate(f, core) / total
    e_frac = integrate(f, IntervalSet(E.intervals, host=I)) / total
    rhs = e_frac ** lam
    return LemmaCheck(lhs, rhs, lhs <= rhs + tol)


@dataclass(frozen=True)
class ComplementPiece:
    interval: tuple[float, float]
    kind: str  # "regular" | "exceptional"
    e_weight: float | None = None
    i_weight: float | None = None
    bound_ok: bool | None = None


def classify_complement(core: IntervalSet, f: LogLinearWeight, I: tuple[float, float] | None = None,
                        E: IntervalSet | None = None, lam: float | None = None) -> list[ComplementPiece]:
    """Label the open components of ``I`` minus the core.

    A component ``(a, b)`` is regular when ``a`` is interior and ``f`` does
    not increase on it, or ``b`` is interior and ``f`` does not decrease;
    otherwise it is exceptional.  The literal definition is used at the ends
    of ``I``.  Given ``E`` and ``lam``, regular pieces also report whether
    ``E`` carries at least the ``(lam - 1) / lam`` share of their weight.
    """
    lo, hi = f.interval if I is None else (float(I[0]), float(I[1]))
    if core.is_empty:
        raise ValueError("classification needs a nonempty core")
    gaps = []
    prev = lo
    first = True
    for c, d in core:
        if c > prev or (first and c > lo):
            gaps.append((prev, c))
        prev = d
        first = False
    if prev < hi:
        gaps.append((prev, hi))
    theta = None if lam is None else (check_lambda(lam) - 1.0) / lam
    out = []
    for a, b in gaps:
        dec = f.slope_right(a) <= 0.0
        inc = f.slope_left(b) >= 0.0
        regular = (a > lo and dec) or (b < hi and inc)
        kind = "regular" if regular else "exceptional"
        if E is not None and theta is not None:
            ew = integrate(f, IntervalSet(E.intervals, host=(a, b)))
            iw = f.integral(a, b)
            ok = ew >= theta * iw - 1e-12 * max(1.0, iw) if regular else None
            out.append(ComplementPiece((a, b), kind, ew, iw, ok))
        else:
            out.append(ComplementPiece((a, b), kind))
    return out


def superlevel_length(f: LogLinearWeight, y: float) -> float:
    """``|{t : log f(t) >= y}|``."""
    t, c = f.breakpoints, f.values
    total = 0.0
    for j in range(len(t) - 1):
        c0, c1 = c[j], c[j + 1]
        w = t[j + 1] - t[j]
        if c0 >= y and c1 >= y:
            total += w
        elif c0 >= y or c1 >= y:
            total += w * (max(c0, c1) - y) / abs(c1 - c0)
    return total


def decreasing_rearrangement(f: LogLinearWeight) -> LogLinearWeight:
    """The non-increasing weight on ``[0, |I|]`` equimeasurable with ``f``.

    Superlevel sets of a concave log-weight are intervals whose length is
    linear in the level between consecutive breakpoint values, so the
    rearranged log-weight is again piecewise linear.
    """
    levels = np.unique(f.values)[::-1]
    ymax = float(levels[0])
    length = f.interval[1] - f.interval[0]
    s = [0.0]
    y = [ymax]
    top = superlevel_length(f, ymax)
    if top > 0:
        s.append(top)
        y.append(ymax)
    for lev in levels[1:]:
        L = length if lev == levels[-1] else superlevel_length(f, float(lev))
        if L > s[-1] + 1e-15 * max(1.0, length):
            s.append(L)
            y.append(float(lev))
    if len(s) == 1:
        s.append(length)
        y.append(ymax)
    s[-1] = length
    return LogLinearWeight(s, y, tol=1e-7)


def _obs_holds(log_lhs: float, log_rhs: float, tol: float) -> bool:
    if log_rhs == -math.inf:
        return True
    return log_lhs >= log_rhs - tol


def _log(x: float) -> float:
    return math.log(x) if x > 0 else -math.inf


def check_observation(k: int, *, X: float, lam: float, Y: float = 0.0, Z: float = 0.0, T: float = 0.0,
                      x: float | None = None, y: float | None = None, z: float | None = None,
                      tol: float = 1e-10) -> bool:
    """Evaluate the conclusion of numerical observation ``k`` (1 to 4).

    Raises ``HypothesisViolation`` when the premise fails.  Comparisons are
    made in log space with relative tolerance ``tol``.
    """
    lam = check_lambda(lam)
    r = lam / (lam - 1.0)
    if k == 1:
        if not (X > 0 and Y >= 0):
            raise HypothesisViolation("observation 1 needs X > 0, Y >= 0")
        return _obs_holds(lam * _log(X + Y), _log(X) + (lam - 1) * _log(X + r * Y), tol)
    if k == 2:
        if not (X > 0 and Y >= 0 and Z >= 0 and T >= 0):
            raise HypothesisViolation("observation 2 needs X > 0 and Y, Z, T >= 0")
        if lam * _log(X + Y) < _log(X) + (lam - 1) * _log(X + Z):
            raise HypothesisViolation("observation 2 premise (X+Y)^lam >= X (X+Z)^(lam-1) fails")
        return _obs_holds(lam * _log(X + Y + T), _log(X) + (lam - 1) * _log(X + Z + r * T), tol)
    if k == 3:
        if not (X > 0 and Y > 0 and Z > 0):
            raise HypothesisViolation("observation 3 needs X, Y, Z > 0")
        if lam * _log(X + Y) < _log(X) + (lam - 1) * _log(X + Z):
            raise HypothesisViolation("observation 3 premise (X+Y)^lam >= X (X+Z)^(lam-1) fails")
        x = X if x is None else float(x)
        if not 0.0 <= x <= X:
            raise HypothesisViolation("observation 3 needs 0 <= x <= X")
        return _obs_holds(lam * _log(x + Y), _log(x) + (lam - 1) * _log(x + Z), tol)
    if k == 4:
        if not (X > 0 and Y > 0 and Z > 0):
            raise HypothesisViolation("observation 4 needs X, Y, Z > 0")
        if lam * _log(X + Y) < _log(X) + (lam - 1) * _log(X + Y + Z):
            raise HypothesisViolation("observation 4 premise (X+Y)^lam >= X (X+Y+Z)^(lam-1) fails")
        x = X if x is None else float(x)
        y = Y if y is None else float(y)
        z = Z if z is None else float(z)
        if not (0.0 <= x <= X and y >= Y and 0.0 <= z <= Z):
            raise HypothesisViolation("observation 4 needs 0 <= x <= X, y >= Y, 0 <= z <= Z")
        return _obs_holds(lam * _log(x + y), _log(x) + (lam - 1) * _log(x + y + z), tol)
    raise ValueError(f"no observation {k}")


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float

    @property
    def rel_gap(self) -> float:
        return abs(self.lhs - self.rhs) / abs(self.lhs)


def exp_tail(rate: float, start: float) -> float:
    """``∫_start^∞ exp(-rate t) dt``."""
    return math.exp(-rate * start) / rate


def exponential_identity(a: float, m: float, lam: float) -> IdentityCheck:
    """Both sides of the identity closing the 1-D argument for ``exp(-a t)``."""
    lam = check_lambda(lam)
    if not (a > 0 and m > 0):
        raise ValueError("need a > 0 and m > 0")
    lhs = exp_tail(a, m) ** lam
    rhs = exp_tail(a, lam * m) * exp_tail(a, 0.0) ** (lam - 1.0)
    return IdentityCheck(lhs, rhs)


# --------------------------------------------------------------------------
# Random instances
# --------------------------------------------------------------------------


def random_weight(rng: np.random.Generator, interval=(0.0, 1.0), max_breaks: int = 8,
                  slope_scale: float = 4.0) -> LogLinearWeight:
    """Random concave log-weight with at most ``max_breaks`` interior breakpoints."""
    lo, hi = interval
    k = int(rng.integers(0, max_breaks + 1))
    inner = np.sort(rng.uniform(lo, hi, size=k))
    t = np.unique(np.concatenate([[lo], inner, [hi]]))
    slopes = np.sort(rng.normal(0.0, slope_scale, size=len(t) - 1))[::-1]
    c = np.concatenate([[0.0], np.cumsum(slopes * np.diff(t))])
    return LogLinearWeight(t, c - c.max())


def random_interval_set(rng: np.random.Generator, interval=(0.0, 1.0), max_intervals: int = 10) -> IntervalSet:
    """Random union of at most ``max_intervals`` closed intervals.

    Half of the draws remove a few short gaps from the whole interval, so
    that large cores are common; the rest are unions of random intervals.
    """
    lo, hi = interval
    n = int(rng.integers(1, max_intervals + 1))
    if rng.random() < 0.5:
        cuts = np.sort(rng.uniform(lo, hi, size=n - 1))
        widths = rng.exponential(0.03 * (hi - lo), size=n - 1)
        edges = [lo]
        for c, w in zip(cuts, widths):
            edges += [c - w / 2, c + w / 2]
        edges.append(hi)
        pairs = [(max(a, lo), min(b, hi)) for a, b in zip(edges[::2], edges[1::2])]
    else:
        pts = np.sort(rng.uniform(lo, hi, size=2 * n))
        pairs = list(zip(pts[::2], pts[1::2]))
    return IntervalSet([(a, b) for a, b in pairs if b > a], host=(lo, hi))


def _log_uniform(rng: np.random.Generator, lo: float = 1e-3, hi: float = 1e3) -> float:
    return float(math.exp(rng.uniform(math.log(lo), math.log(hi))))


def random_observation(k: int, rng: np.random.Generator) -> dict:
    """Keyword arguments for :func:`check_observation` whose premise holds.

    The free quantity in each premise is pushed to its boundary value half
    of the time, where the conclusions are tightest.
    """
    lam = float(rng.uniform(1.01, 10.0))
    X, Z, T = _log_uniform(rng), _log_uniform(rng), _log_uniform(rng)
    slack = 1.0 + (1e-9 if rng.random() < 0.5 else float(rng.uniform(0.0, 2.0)))
    if k == 1:
        Y = 0.0 if rng.random() < 0.1 else _log_uniform(rng)
        return {"X": X, "Y": Y, "lam": lam}
    if k in (2, 3):
        y_min = math.exp((math.log(X) + (lam - 1) * math.log(X + Z)) / lam) - X
        Y = y_min * slack if y_min > 0 else _log_uniform(rng)
        if k == 2:
            return {"X": X, "Y": Y, "Z": Z, "T": T, "lam": lam}
        return {"X": X, "Y": Y, "Z": Z, "lam": lam, "x": float(rng.uniform(0.0, X))}
    if k == 4:
        def g(Y):
            return lam * math.log(X + Y) - math.log(X) - (lam - 1) * math.log(X + Y + Z)
        hi = X + Z
        while g(hi) < 0:
            hi *= 2
        y_min = brentq(g, 0.0, hi, xtol=1e-14 * hi, rtol=1e-15)
        Y = y_min * slack
        return {"X": X, "Y": Y, "Z": Z, "lam": lam, "x": float(rng.uniform(0.0, X)),
                "y": Y * (1.0 + float(rng.exponential(0.5))), "z": float(rng.uniform(0.0, Z))}
    raise ValueError(f"no observation {k}")
