"""Planar convex geometry and membership-oracle volumes.

Polygons are counterclockwise vertex arrays in double precision.  Regions
(half-planes, disks, slab unions, ...) are membership oracles that may
also know how to compute exact areas of their intersection with a polygon,
which is what the needle decomposition and the 2-D core computation use.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

AREA_TOL = 1e-10
NORM_TOL = 1e-12
MERGE_TOL = 1e-12
Z99 = 2.5758293035489004  # two-sided 99% normal quantile


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


# --------------------------------------------------------------------------
# Basic value types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Line:
    """The line ``point + t * direction``; direction is a unit vector."""

    point: np.ndarray
    direction: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.point, dtype=float).reshape(2)
        d = np.asarray(self.direction, dtype=float).reshape(2)
        norm = math.hypot(d[0], d[1])
        if norm == 0.0:
            raise ValueError("line direction must be nonzero")
        object.__setattr__(self, "point", p)
        object.__setattr__(self, "direction", d / norm)

    @property
    def normal(self) -> np.ndarray:
        return np.array([-self.direction[1], self.direction[0]])

    @property
    def angle(self) -> float:
        """Direction angle folded into [0, pi)."""
        a = math.atan2(self.direction[1], self.direction[0])
        return a % math.pi

    def distance(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.abs((pts - self.point) @ self.normal)


@dataclass(frozen=True)
class HalfPlane:
    """The closed set ``{x : <x, normal> <= offset}``."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).reshape(2)
        norm = math.hypot(n[0], n[1])
        if norm == 0.0:
            raise ValueError("half-plane normal must be nonzero")
        object.__setattr__(self, "normal", n / norm)
        object.__setattr__(self, "offset", float(self.offset) / norm)

    def complement(self) -> "HalfPlane":
        return HalfPlane(-self.normal, -self.offset)

    def signed(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return pts @ self.normal - self.offset


@dataclass(frozen=True)
class Segment:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", np.asarray(self.a, dtype=float).reshape(2))
        object.__setattr__(self, "b", np.asarray(self.b, dtype=float).reshape(2))

    @property
    def length(self) -> float:
        return float(np.hypot(*(self.b - self.a)))

    def contains(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        d = self.b - self.a
        L2 = float(d @ d)
        if L2 == 0.0:
            return bool(np.hypot(*(x - self.a)) <= tol)
        t = float((x - self.a) @ d) / L2
        foot = self.a + min(max(t, 0.0), 1.0) * d
        return bool(np.hypot(*(x - foot)) <= tol)


# --------------------------------------------------------------------------
# Convex polygons
# --------------------------------------------------------------------------


def _normalize_vertices(v: np.ndarray) -> np.ndarray:
    """Merge near-duplicates, drop collinear vertices, orient counterclockwise."""
    if len(v) == 0:
        return v.reshape(0, 2)
    keep = [v[0]]
    for p in v[1:]:
        if np.hypot(*(p - keep[-1])) >= MERGE_TOL:
            keep.append(p)
    if len(keep) > 1 and np.hypot(*(keep[0] - keep[-1])) < MERGE_TOL:
        keep.pop()
    pts = np.array(keep, dtype=float).reshape(-1, 2)
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        prev = np.roll(pts, 1, axis=0)
        nxt = np.roll(pts, -1, axis=0)
        e1 = pts - prev
        e2 = nxt - pts
        cr = _cross(e1, e2)
        scale = np.hypot(e1[:, 0], e1[:, 1]) * np.hypot(e2[:, 0], e2[:, 1])
        flat = np.abs(cr) <= NORM_TOL * np.maximum(scale, 1e-300)
        if flat.any():
            # drop one at a time so neighbours are re-evaluated
            idx = int(np.argmax(flat))
            pts = np.delete(pts, idx, axis=0)
            changed = True
    if len(pts) < 3:
        return np.zeros((0, 2))
    signed = 0.5 * float(np.sum(_cross(pts, np.roll(pts, -1, axis=0))))
    if signed < 0:
        pts = pts[::-1].copy()
        signed = -signed
    if signed <= 0.0:
        return np.zeros((0, 2))
    return pts


def convex_hull(points) -> np.ndarray:
    """Andrew's monotone chain; returns counterclockwise hull vertices."""
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-1] - lower[-2], p - lower[-2]) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in pts[::-1]:
        while len(upper) >= 2 and _cross(upper[-1] - upper[-2], p - upper[-2]) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


class ConvexPolygon:
    """Compact convex polygon, possibly empty.

    Vertices are stored counterclockwise with near-duplicates merged and
    collinear vertices removed.  Construction raises ``ValueError`` on a
    non-convex vertex list.
    """

    __slots__ = ("vertices", "_area", "_bbox", "_cons")

    def __init__(self, vertices: Iterable = ()):
        v = np.asarray(list(vertices) if not isinstance(vertices, np.ndarray) else vertices,
                       dtype=float).reshape(-1, 2)
        v = _normalize_vertices(v)
        if len(v):
            e = np.roll(v, -1, axis=0) - v
            cr = _cross(e, np.roll(e, -1, axis=0))
            scale = np.hypot(e[:, 0], e[:, 1]) * np.roll(np.hypot(e[:, 0], e[:, 1]), -1)
            if np.any(cr < -1e-9 * scale):
                raise ValueError("vertices do not form a convex polygon")
        v.setflags(write=False)
        self.vertices = v
        self._area = None
        self._bbox = None
        self._cons = None

    @classmethod
    def hull(cls, points) -> "ConvexPolygon":
        return cls(convex_hull(points))

    @classmethod
    def empty(cls) -> "ConvexPolygon":
        return cls(())

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) == 0

    def __len__(self):
        return len(self.vertices)

    def __repr__(self):
        if self.is_empty:
            return "ConvexPolygon(<empty>)"
        return f"ConvexPolygon({len(self.vertices)} vertices, area={self.area:.6g})"

    @property
    def area(self) -> float:
        if self._area is None:
            self._area = polygon_area(self)
        return self._area

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        if self._bbox is None:
            if self.is_empty:
                raise ValueError("empty polygon has no bounding box")
            self._bbox = (self.vertices.min(axis=0), self.vertices.max(axis=0))
        return self._bbox

    @property
    def centroid(self) -> np.ndarray:
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cr = _cross(v, w)
        a = cr.sum() / 2.0
        return ((v + w) * cr[:, None]).sum(axis=0) / (6.0 * a)

    @property
    def diameter(self) -> float:
        v = self.vertices
        if len(v) == 0:
            return 0.0
        d = v[:, None, :] - v[None, :, :]
        return float(np.sqrt((d ** 2).sum(-1)).max())

    def halfplanes(self) -> list[HalfPlane]:
        v = self.vertices
        e = np.roll(v, -1, axis=0) - v
        out = []
        for p, d in zip(v, e):
            n = np.array([d[1], -d[0]])  # outward for ccw orientation
            out.append(HalfPlane(n, float(n @ p)))
        return out

    def _constraints(self):
        if self._cons is None:
            v = self.vertices
            e = np.roll(v, -1, axis=0) - v
            n = np.stack([e[:, 1], -e[:, 0]], axis=1)
            n /= np.hypot(n[:, 0], n[:, 1])[:, None]
            self._cons = (n, np.einsum("ij,ij->i", n, v))
        return self._cons

    def contains(self, pts, tol: float = 1e-12) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.is_empty:
            return np.zeros(len(pts), dtype=bool)
        n, c = self._constraints()
        return np.all(pts @ n.T <= c + tol, axis=1)

    def translate(self, shift) -> "ConvexPolygon":
        return ConvexPolygon(self.vertices + np.asarray(shift, dtype=float))

    def scale(self, factor: float, about=None) -> "ConvexPolygon":
        about = self.centroid if about is None else np.asarray(about, dtype=float)
        return ConvexPolygon(about + factor * (self.vertices - about))

    def to_json(self) -> str:
        return json.dumps(self.vertices.tolist())

    @classmethod
    def from_json(cls, text: str) -> "ConvexPolygon":
        return cls(json.loads(text))


def polygon_area(P: ConvexPolygon) -> float:
    v = P.vertices
    if len(v) < 3:
        return 0.0
    return 0.5 * abs(float(np.sum(_cross(v, np.roll(v, -1, axis=0)))))


def unit_square() -> ConvexPolygon:
    return ConvexPolygon([(0, 0), (1, 0), (1, 1), (0, 1)])


def rectangle(x0, y0, x1, y1) -> ConvexPolygon:
    return ConvexPolygon([(x0, y0), (x1, y0), (x1, y1), (x0, y1)])


def regular_polygon(k: int, radius: float = 1.0, center=(0.0, 0.0), phase: float = 0.0) -> ConvexPolygon:
    t = phase + 2.0 * np.pi * np.arange(k) / k
    c = np.asarray(center, dtype=float)
    return ConvexPolygon(c + radius * np.stack([np.cos(t), np.sin(t)], axis=1))


def clip_halfplane(P: ConvexPolygon, H: HalfPlane) -> ConvexPolygon:
    """Return ``P`` intersected with the closed half-plane ``H``."""
    if P.is_empty:
        return P
    v = P.vertices
    s = v @ H.normal - H.offset
    scale = max(1.0, float(np.abs(v).max()))
    s = np.where(np.abs(s) <= 1e-14 * scale, 0.0, s)
    if np.all(s <= 0):
        return P
    if np.all(s >= 0):
        return ConvexPolygon.empty()
    out = []
    m = len(v)
    for i in range(m):
        j = (i + 1) % m
        si, sj = s[i], s[j]
        if si <= 0:
            out.append(v[i])
        if (si < 0 < sj) or (sj < 0 < si):
            t = si / (si - sj)
            out.append(v[i] + t * (v[j] - v[i]))
    return ConvexPolygon(np.array(out))


def clip_polygon(P: ConvexPolygon, Q: ConvexPolygon) -> ConvexPolygon:
    """Intersection of two convex polygons."""
    out = P
    for h in Q.halfplanes():
        out = clip_halfplane(out, h)
        if out.is_empty:
            break
    return out


def split_by_line(P: ConvexPolygon, point, direction) -> tuple[ConvexPolygon, ConvexPolygon]:
    """Split ``P`` by the line through ``point``; the first piece lies on the
    side the left normal of ``direction`` points to."""
    line = Line(point, direction)
    n = line.normal
    off = float(n @ line.point)
    plus = clip_halfplane(P, HalfPlane(-n, -off))
    minus = clip_halfplane(P, HalfPlane(n, off))
    return plus, minus


def chord(P: ConvexPolygon, x, direction) -> Segment:
    """Maximal segment through ``x`` with the given direction inside ``P``."""
    x = np.asarray(x, dtype=float).reshape(2)
    d = np.asarray(direction, dtype=float).reshape(2)
    d = d / math.hypot(d[0], d[1])
    if P.is_empty:
        raise ValueError("chord of an empty polygon")
    n, c = P._constraints()
    slack = c - n @ x
    scale = max(1.0, float(np.abs(P.vertices).max()))
    if np.any(slack < -1e-9 * scale):
        raise ValueError("point lies outside the polygon")
    nd = n @ d
    tmax, tmin = np.inf, -np.inf
    pos = nd > 1e-15
    neg = nd < -1e-15
    if pos.any():
        tmax = float(np.min(np.maximum(slack[pos], 0.0) / nd[pos]))
    if neg.any():
        tmin = float(np.max(np.maximum(slack[neg], 0.0) / nd[neg]))
    return Segment(x + tmin * d, x + tmax * d)


def _line_extent(n, c, q, w, scale):
    """Parameter range of ``q + t w`` inside ``{<y,n_i> <= c_i}`` or None."""
    slack = c - n @ q
    nw = n @ w
    par = np.abs(nw) <= 1e-14
    if np.any(slack[par] < -1e-12 * scale):
        return None
    tmax, tmin = np.inf, -np.inf
    pos = nw > 1e-14
    neg = nw < -1e-14
    if pos.any():
        tmax = float(np.min(slack[pos] / nw[pos]))
    if neg.any():
        tmin = float(np.max(slack[neg] / nw[neg]))
    if tmax < tmin:
        if tmin - tmax <= 1e-12 * scale:
            return (tmin, tmin)
        return None
    return (tmin, tmax)


@dataclass(frozen=True)
class Profile:
    """Piecewise-linear cross-section length as a function of the position
    along a line; ``knots`` are the projected vertices."""

    knots: np.ndarray
    values: np.ndarray

    def __call__(self, s):
        return np.interp(s, self.knots, self.values, left=0.0, right=0.0)

    @property
    def interval(self) -> tuple[float, float]:
        return float(self.knots[0]), float(self.knots[-1])

    def integral(self) -> float:
        k, v = self.knots, self.values
        return float(np.sum(0.5 * (v[1:] + v[:-1]) * np.diff(k)))


def cross_section_profile(P: ConvexPolygon, L: Line) -> Profile:
    """Length of ``P`` cut by the line orthogonal to ``L`` at each position."""
    if P.is_empty:
        raise ValueError("profile of an empty polygon")
    u = L.direction
    w = L.normal
    s = (P.vertices - L.point) @ u
    knots = np.unique(s)
    n, c = P._constraints()
    scale = max(1.0, float(np.abs(P.vertices).max()))
    vals = np.empty(len(knots))
    for k, sk in enumerate(knots):
        ext = _line_extent(n, c, L.point + sk * u, w, scale)
        vals[k] = 0.0 if ext is None else ext[1] - ext[0]
    return Profile(knots, vals)


def delta_net(P: ConvexPolygon, delta: float) -> np.ndarray:
    """Points of ``P`` such that every point of ``P`` is within ``delta`` of one.

    Grid of spacing ``delta / sqrt 2`` clipped to ``P`` plus boundary points
    spaced at most ``delta`` apart.  Points come back in lexicographic order.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if P.is_empty:
        return np.zeros((0, 2))
    if delta >= P.diameter:
        return P.centroid.reshape(1, 2)
    h = delta / math.sqrt(2.0)
    lo, hi = P.bbox
    nx = int(math.ceil((hi[0] - lo[0]) / h)) + 1
    ny = int(math.ceil((hi[1] - lo[1]) / h)) + 1
    gx = lo[0] + h * np.arange(nx)
    gy = lo[1] + h * np.arange(ny)
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    grid = np.stack([X.ravel(), Y.ravel()], axis=1)
    grid = grid[P.contains(grid, tol=0.0)]
    v = P.vertices
    bnd = []
    for a, b in zip(v, np.roll(v, -1, axis=0)):
        k = max(1, int(math.ceil(math.hypot(*(b - a)) / delta)))
        t = np.arange(k) / k
        bnd.append(a + t[:, None] * (b - a))
    pts = np.concatenate([grid] + bnd, axis=0)
    pts = np.unique(np.round(pts, 14), axis=0)
    return pts


def needle_width(P) -> tuple[Line, float]:
    """Smallest ``w`` such that ``P`` lies within distance ``w`` of some line.

    ``P`` may be a polygon or any planar point set.  The search space is the
    set of hull edge directions: the minimal-width strip of a convex polygon
    has one side flush with an edge, so half its width is the answer and the
    strip's midline is the certificate axis.
    """
    pts = P.vertices if isinstance(P, ConvexPolygon) else np.asarray(P, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise ValueError("needle width of an empty set")
    hull = convex_hull(pts)
    if len(hull) == 1:
        return Line(hull[0], (1.0, 0.0)), 0.0
    if len(hull) == 2:
        return Line(hull[0], hull[1] - hull[0]), 0.0
    best = (math.inf, None)
    for a, b in zip(hull, np.roll(hull, -1, axis=0)):
        d = b - a
        d = d / math.hypot(d[0], d[1])
        nrm = np.array([-d[1], d[0]])
        proj = (hull - a) @ nrm
        lo, hi = float(proj.min()), float(proj.max())
        if hi - lo < best[0]:
            best = (hi - lo, Line(a + nrm * (lo + hi) / 2.0, d))
    return best[1], best[0] / 2.0


def sample_uniform(P: ConvexPolygon, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` independent uniform points in ``P`` (triangle-fan sampling)."""
    v = P.vertices
    a = v[0]
    b = v[1:-1]
    c = v[2:]
    w = 0.5 * np.abs(_cross(b - a, c - a))
    idx = rng.choice(len(w), size=n, p=w / w.sum())
    r = rng.random((n, 2))
    flip = r.sum(axis=1) > 1.0
    r[flip] = 1.0 - r[flip]
    return a + r[:, :1] * (b[idx] - a) + r[:, 1:] * (c[idx] - a)


# --------------------------------------------------------------------------
# Vectorised cut areas
# --------------------------------------------------------------------------


def line_normals(thetas) -> np.ndarray:
    """Left normals of lines with direction angles ``thetas``."""
    th = np.asarray(thetas, dtype=float)
    return np.stack([-np.sin(th), np.cos(th)], axis=-1)


def _clipped_edges(V: np.ndarray, M: np.ndarray, thetas):
    """Per angle, the parts of the polygon edges on the positive side of the
    line through ``M`` plus the closing chord (exit point, entry point)."""
    P = V - M
    Q = np.roll(P, -1, axis=0)
    nrm = line_normals(thetas)  # (T, 2)
    s = nrm @ P.T  # (T, m)
    sn = np.roll(s, -1, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ts = np.where(s != sn, s / (s - sn), 0.0)
    inn = s >= 0
    inn_n = sn >= 0
    t0 = np.where(inn, 0.0, ts)
    t1 = np.where(inn_n, 1.0, ts)
    out = ~inn & ~inn_n
    t0 = np.where(out, 0.0, t0)
    t1 = np.where(out, 0.0, t1)
    return P, Q, t0, t1, inn & ~inn_n, ~inn & inn_n, ts


def polygon_cut_areas(P: ConvexPolygon, M, thetas) -> np.ndarray:
    """Areas of ``P`` on the positive side of the lines through ``M``.

    With the origin at ``M`` the closing chord contributes nothing to the
    shoelace sum, so each angle costs one pass over the edges.
    """
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if P.is_empty:
        return np.zeros(len(thetas))
    M = np.asarray(M, dtype=float)
    Pv, Qv, t0, t1, *_ = _clipped_edges(P.vertices, M, thetas)
    cr = _cross(Pv, Qv)
    return 0.5 * ((t1 - t0) * cr).sum(axis=1)


def _disk_segment_area(a: np.ndarray, b: np.ndarray, rho: float) -> np.ndarray:
    """Signed area of the disk of radius ``rho`` at the origin intersected
    with the triangle (0, a, b); vectorised over leading axes."""
    d = b - a
    A = (d * d).sum(-1)
    B = 2.0 * (a * d).sum(-1)
    C = (a * a).sum(-1) - rho * rho
    disc = B * B - 4.0 * A * C
    good = (A > 0) & (disc > 0)
    sq = np.sqrt(np.where(good, disc, 0.0))
    Asafe = np.where(A > 0, A, 1.0)
    u1 = np.clip((-B - sq) / (2.0 * Asafe), 0.0, 1.0)
    u2 = np.clip((-B + sq) / (2.0 * Asafe), 0.0, 1.0)
    u1 = np.where(good, u1, 0.0)
    u2 = np.where(good, u2, 0.0)
    p1 = a + u1[..., None] * d
    p2 = a + u2[..., None] * d

    def sector(x, y):
        return 0.5 * rho * rho * np.arctan2(_cross(x, y), (x * y).sum(-1))

    res = sector(a, p1) + 0.5 * _cross(p1, p2) + sector(p2, b)
    return np.where(A > 0, res, 0.0)


def polygon_disk_area(P: ConvexPolygon, center, radius: float) -> float:
    if P.is_empty or radius <= 0:
        return 0.0
    c = np.asarray(center, dtype=float)
    a = P.vertices - c
    return float(_disk_segment_area(a, np.roll(a, -1, axis=0), radius).sum())


def disk_cut_areas(P: ConvexPolygon, M, thetas, center, radius: float) -> np.ndarray:
    """Areas of ``P`` on the positive side of lines through ``M`` inside a disk."""
    thetas = np.atleast_1d(np.asarray(thetas, dtype=float))
    if P.is_empty or radius <= 0:
        return np.zeros(len(thetas))
    M = np.asarray(M, dtype=float)
    c = np.asarray(center, dtype=float) - M
    Pv, Qv, t0, t1, exit_, entry, ts = _clipped_edges(P.vertices, M, thetas)
    d = Qv - Pv
    A = Pv[None] + t0[..., None] * d[None] - c
    B = Pv[None] + t1[..., None] * d[None] - c
    total = _disk_segment_area(A, B, radius).sum(axis=1)
    cross_pt = Pv[None] + ts[..., None] * d[None]
    X = (cross_pt * exit_[..., None]).sum(axis=1) - c
    Y = (cross_pt * entry[..., None]).sum(axis=1) - c
    has = exit_.any(axis=1) & entry.any(axis=1)
    chord_part = _disk_segment_area(X, Y, radius)
    return total + np.where(has, chord_part, 0.0)


# --------------------------------------------------------------------------
# Membership oracles
# --------------------------------------------------------------------------


class MembershipOracle:
    """Deterministic vectorised indicator of a closed set.

    ``box`` is a ``(lo, hi)`` pair of arrays, required for Monte Carlo.
    """

    dim: int = 2
    box: tuple | None = None

    def contains(self, pts) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> bool:
        return bool(self.contains(np.asarray(x, dtype=float).reshape(1, -1))[0])


class FunctionOracle(MembershipOracle):
    def __init__(self, indicator: Callable, box, dim: int | None = None, vectorized: bool = True):
        lo, hi = (np.asarray(b, dtype=float) for b in box)
        self.box = (lo, hi)
        self.dim = len(lo) if dim is None else dim
        self._fn = indicator
        self._vec = vectorized

    def contains(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self._vec:
            return np.asarray(self._fn(pts), dtype=bool).reshape(len(pts))
        return np.fromiter((bool(self._fn(p)) for p in pts), dtype=bool, count=len(pts))


class Region(MembershipOracle):
    """Planar set with optional exact area and chord machinery.

    Subclasses that can, override ``dilate`` (closed metric neighbourhood),
    ``cut_areas`` (area inside a polygon on the positive side of lines
    through a point) and ``segment_intervals`` (parameter sub-intervals of
    a segment lying in the set).
    """

    exact = False

    def dilate(self, radius: float) -> "Region | None":
        return None

    def cut_areas(self, P: ConvexPolygon, M, thetas) -> np.ndarray:
        raise NotImplementedError

    def cut_function(self, P: ConvexPolygon, M) -> Callable:
        """``cut_areas`` with ``P`` and ``M`` fixed; subclasses may precompute."""
        return lambda thetas: self.cut_areas(P, M, thetas)

    def area_in(self, P: ConvexPolygon) -> float:
        if P.is_empty:
            return 0.0
        # a line through a far point leaves P entirely on its positive side
        lo, hi = P.bbox
        far = np.array([lo[0], lo[1] - 1.0 - (hi[1] - lo[1])])
        return float(self.cut_areas(P, far, [0.0])[0])

    def segment_intervals(self, a, b) -> list[tuple[float, float]]:
        raise NotImplementedError

    def chord_measure(self, X, u, S) -> np.ndarray:
        """``|E ∩ [x, x + s u]|`` for rows ``x`` of ``X`` and signed lengths
        ``S[i, k]``; vectorised counterpart of ``segment_intervals``."""
        raise NotImplementedError

    def restrict(self, P: ConvexPolygon) -> "Restricted":
        return Restricted(self, P)


class Plane(Region):
    exact = True

    def contains(self, pts):
        return np.ones(len(np.atleast_2d(pts)), dtype=bool)

    def dilate(self, radius):
        return self

    def cut_areas(self, P, M, thetas):
        return polygon_cut_areas(P, M, thetas)

    def segment_intervals(self, a, b):
        return [(0.0, 1.0)]

    def chord_measure(self, X, u, S):
        return np.abs(S)


class Nowhere(Region):
    exact = True

    def contains(self, pts):
        return np.zeros(len(np.atleast_2d(pts)), dtype=bool)

    def dilate(self, radius):
        return self

    def cut_areas(self, P, M, thetas):
        return np.zeros(len(np.atleast_1d(thetas)))

    def segment_intervals(self, a, b):
        return []

    def chord_measure(self, X, u, S):
        return np.zeros(np.shape(S))


class HalfPlaneRegion(Region):
    exact = True

    def __init__(self, normal, offset):
        self.hp = HalfPlane(normal, offset)

    def contains(self, pts):
        return self.hp.signed(pts) <= 1e-12

    def dilate(self, radius):
        return HalfPlaneRegion(self.hp.normal, self.hp.offset + radius)

    def cut_areas(self, P, M, thetas):
        return polygon_cut_areas(clip_halfplane(P, self.hp), M, thetas)

    def cut_function(self, P, M):
        Q = clip_halfplane(P, self.hp)
        return lambda thetas: polygon_cut_areas(Q, M, thetas)

    def segment_intervals(self, a, b):
        sa = float(self.hp.signed(a)[0])
        sb = float(self.hp.signed(b)[0])
        if sa <= 0 and sb <= 0:
            return [(0.0, 1.0)]
        if sa > 0 and sb > 0:
            return []
        t = sa / (sa - sb)
        return [(0.0, t)] if sa <= 0 else [(t, 1.0)]

    def chord_measure(self, X, u, S):
        lo, hi = _halfplane_span(self.hp.normal, self.hp.offset, X, u)
        return _overlap(lo, hi, S)


class DiskRegion(Region):
    """Closed disk, or the closed complement of the open disk if ``outside``."""

    exact = True

    def __init__(self, center, radius: float, outside: bool = False):
        self.center = np.asarray(center, dtype=float).reshape(2)
        self.radius = float(radius)
        self.outside = outside

    def contains(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        r = np.hypot(*(pts - self.center).T)
        if self.outside:
            return r >= self.radius - 1e-12
        return r <= self.radius + 1e-12

    def dilate(self, radius):
        if self.outside:
            if self.radius - radius <= 0:
                return Plane()
            return DiskRegion(self.center, self.radius - radius, outside=True)
        return DiskRegion(self.center, self.radius + radius)

    def cut_areas(self, P, M, thetas):
        inside = disk_cut_areas(P, M, thetas, self.center, self.radius)
        if self.outside:
            return polygon_cut_areas(P, M, thetas) - inside
        return inside

    def segment_intervals(self, a, b):
        a = np.asarray(a, dtype=float) - self.center
        d = np.asarray(b, dtype=float) - self.center - a
        A = float(d @ d)
        B = 2.0 * float(a @ d)
        C = float(a @ a) - self.radius ** 2
        if A == 0.0:
            inside = C <= 0
            return [(0.0, 1.0)] if inside != self.outside else []
        disc = B * B - 4 * A * C
        if disc <= 0:
            return [(0.0, 1.0)] if self.outside else []
        sq = math.sqrt(disc)
        t1, t2 = (-B - sq) / (2 * A), (-B + sq) / (2 * A)
        lo, hi = max(t1, 0.0), min(t2, 1.0)
        if not self.outside:
            return [(lo, hi)] if lo < hi else []
        out = []
        if t1 > 0:
            out.append((0.0, min(t1, 1.0)))
        if t2 < 1:
            out.append((max(t2, 0.0), 1.0))
        return [(u, v) for u, v in out if v > u]

    def chord_measure(self, X, u, S):
        a = np.asarray(X, dtype=float) - self.center
        b = a @ u
        disc = b * b - ((a * a).sum(1) - self.radius ** 2)
        sq = np.sqrt(np.maximum(disc, 0.0))
        lo = np.where(disc > 0, -b - sq, np.inf)
        hi = np.where(disc > 0, -b + sq, -np.inf)
        inside = _overlap(lo, hi, S)
        return np.abs(S) - inside if self.outside else inside


class SlabRegion(Region):
    """Union of slabs ``{x : <x - origin, u> in [a_i, b_i]}``; the planar
    lift of a 1-D interval set along direction ``u``."""

    exact = True

    def __init__(self, direction, intervals: Sequence[tuple[float, float]], origin=(0.0, 0.0)):
        u = np.asarray(direction, dtype=float).reshape(2)
        self.u = u / math.hypot(u[0], u[1])
        self.origin = np.asarray(origin, dtype=float).reshape(2)
        self.intervals = _merge_intervals(intervals)

    def _coord(self, pts):
        return (np.atleast_2d(np.asarray(pts, dtype=float)) - self.origin) @ self.u

    def contains(self, pts):
        s = self._coord(pts)
        out = np.zeros(len(s), dtype=bool)
        for a, b in self.intervals:
            out |= (s >= a - 1e-12) & (s <= b + 1e-12)
        return out

    def dilate(self, radius):
        return SlabRegion(self.u, [(a - radius, b + radius) for a, b in self.intervals], self.origin)

    def cut_areas(self, P, M, thetas):
        total = np.zeros(len(np.atleast_1d(thetas)))
        o = float(self.origin @ self.u)
        for a, b in self.intervals:
            Q = clip_halfplane(P, HalfPlane(self.u, b + o))
            Q = clip_halfplane(Q, HalfPlane(-self.u, -(a + o)))
            total += polygon_cut_areas(Q, M, thetas)
        return total

    def segment_intervals(self, a, b):
        sa, sb = (float(v) for v in self._coord(np.stack([a, b])))
        if sa == sb:
            hit = any(lo <= sa <= hi for lo, hi in self.intervals)
            return [(0.0, 1.0)] if hit else []
        out = []
        for lo, hi in self.intervals:
            t_lo = (lo - sa) / (sb - sa)
            t_hi = (hi - sa) / (sb - sa)
            u, v = max(min(t_lo, t_hi), 0.0), min(max(t_lo, t_hi), 1.0)
            if v > u:
                out.append((u, v))
        return sorted(out)

    def chord_measure(self, X, u, S):
        s0 = self._coord(X)
        du = float(u @ self.u)
        total = np.zeros(np.shape(S))
        for a, b in self.intervals:
            if abs(du) < 1e-15:
                inside = (s0 >= a) & (s0 <= b)
                lo, hi = np.where(inside, -np.inf, np.inf), np.where(inside, np.inf, -np.inf)
            else:
                t1, t2 = (a - s0) / du, (b - s0) / du
                lo, hi = np.minimum(t1, t2), np.maximum(t1, t2)
            total += _overlap(lo, hi, S)
        return total


class PolygonRegion(Region):
    exact = True

    def __init__(self, polygon: ConvexPolygon):
        self.polygon = polygon

    def contains(self, pts):
        return self.polygon.contains(pts)

    def dilate(self, radius):
        if radius == 0:
            return self
        poly = self.polygon
        return DistanceRegion(lambda p: _polygon_distance(poly, p), radius)

    def cut_areas(self, P, M, thetas):
        return polygon_cut_areas(clip_polygon(P, self.polygon), M, thetas)

    def cut_function(self, P, M):
        Q = clip_polygon(P, self.polygon)
        return lambda thetas: polygon_cut_areas(Q, M, thetas)

    def segment_intervals(self, a, b):
        a = np.asarray(a, dtype=float)
        d = np.asarray(b, dtype=float) - a
        n, c = self.polygon._constraints()
        ext = _line_extent(n, c, a, d, 1.0)
        if ext is None:
            return []
        u, v = max(ext[0], 0.0), min(ext[1], 1.0)
        return [(u, v)] if v > u else []

    def chord_measure(self, X, u, S):
        lo = np.full(len(X), -np.inf)
        hi = np.full(len(X), np.inf)
        n, c = self.polygon._constraints()
        for ni, ci in zip(n, c):
            a, b = _halfplane_span(ni, ci, X, u)
            lo, hi = np.maximum(lo, a), np.minimum(hi, b)
        return _overlap(lo, hi, S)


def _halfplane_span(normal, offset, X, u):
    """Parameter range ``[lo, hi]`` of ``x + t u`` inside ``<p, normal> <= offset``."""
    a = float(normal @ u)
    b = offset - np.asarray(X, dtype=float) @ normal
    with np.errstate(divide="ignore", invalid="ignore"):
        t = b / a if a != 0 else np.zeros_like(b)
    if a > 0:
        return np.full_like(b, -np.inf), t
    if a < 0:
        return t, np.full_like(b, np.inf)
    inside = b >= 0
    return np.where(inside, -np.inf, np.inf), np.where(inside, np.inf, -np.inf)


def _overlap(lo, hi, S):
    """Length of ``[lo, hi]`` (per row) meeting the segment between 0 and ``S``."""
    S = np.asarray(S, dtype=float)
    lo = np.asarray(lo, dtype=float).reshape(-1, *([1] * (S.ndim - 1)))
    hi = np.asarray(hi, dtype=float).reshape(-1, *([1] * (S.ndim - 1)))
    a, b = np.minimum(S, 0.0), np.maximum(S, 0.0)
    return np.maximum(np.minimum(b, hi) - np.maximum(a, lo), 0.0)


class PointSetRegion(Region):
    """Finite point set; measure zero, but its neighbourhoods are not."""

    def __init__(self, points):
        self.points = np.atleast_2d(np.asarray(points, dtype=float))

    def distance(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = pts[:, None, :] - self.points[None, :, :]
        return np.sqrt((d ** 2).sum(-1)).min(axis=1)

    def contains(self, pts):
        return self.distance(pts) <= 1e-12

    def dilate(self, radius):
        if len(self.points) == 1:
            return DiskRegion(self.points[0], radius)
        return DistanceRegion(self.distance, radius)


class DistanceRegion(Region):
    """``{x : dist(x, S) <= radius}`` given a vectorised distance to ``S``."""

    def __init__(self, distance: Callable, radius: float):
        self._dist = distance
        self.radius = float(radius)

    def contains(self, pts):
        return self._dist(np.atleast_2d(pts)) <= self.radius + 1e-12


def _polygon_distance(P: ConvexPolygon, pts) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    v = P.vertices
    w = np.roll(v, -1, axis=0)
    d = w - v
    L2 = (d * d).sum(-1)
    rel = pts[:, None, :] - v[None]
    t = np.clip((rel * d[None]).sum(-1) / L2[None], 0.0, 1.0)
    foot = v[None] + t[..., None] * d[None]
    dist = np.sqrt(((pts[:, None, :] - foot) ** 2).sum(-1)).min(axis=1)
    return np.where(P.contains(pts), 0.0, dist)


def _merge_intervals(intervals) -> list[tuple[float, float]]:
    iv = sorted((float(a), float(b)) for a, b in intervals if b >= a)
    out: list[list[float]] = []
    for a, b in iv:
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [(a, b) for a, b in out]


class Restricted(MembershipOracle):
    """A region intersected with a polygon; bounded, so Monte Carlo works."""

    def __init__(self, region: Region, polygon: ConvexPolygon):
        self.region = region
        self.polygon = polygon
        self.box = polygon.bbox
        self.dim = 2

    def contains(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return self.polygon.contains(pts) & self.region.contains(pts)

    @property
    def exact(self) -> bool:
        return self.region.exact

    def area(self) -> float:
        return self.region.area_in(self.polygon)


class ProbedRegion(Region):
    """Neighbourhood of an arbitrary oracle found by probing a disk grid."""

    def __init__(self, base: MembershipOracle, radius: float, spacing: float, chunk: int = 256):
        self.base = base
        self.radius = float(radius)
        self.spacing = float(spacing)
        k = int(math.ceil(radius / spacing))
        g = spacing * np.arange(-k, k + 1)
        X, Y = np.meshgrid(g, g, indexing="ij")
        off = np.stack([X.ravel(), Y.ravel()], axis=1)
        self.offsets = off[np.hypot(off[:, 0], off[:, 1]) <= radius + 1e-15]
        self._chunk = chunk

    def contains(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.zeros(len(pts), dtype=bool)
        for s in range(0, len(pts), self._chunk):
            q = pts[s:s + self._chunk]
            probes = (q[:, None, :] + self.offsets[None]).reshape(-1, 2)
            hit = self.base.contains(probes).reshape(len(q), -1)
            out[s:s + self._chunk] = hit.any(axis=1)
        return out


# --------------------------------------------------------------------------
# Monte Carlo volume
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class VolumeEstimate:
    mean: float
    ci99: float
    count: int
    seed: int

    def to_json(self) -> str:
        return json.dumps({"mean": self.mean, "ci99": self.ci99, "count": self.count, "seed": self.seed})

    @classmethod
    def from_json(cls, text: str) -> "VolumeEstimate":
        d = json.loads(text)
        return cls(float(d["mean"]), float(d["ci99"]), int(d["count"]), int(d["seed"]))


MC_CHUNK = 1 << 16


def _chunk_hits(oracle, lo, hi, seed, index, n):
    rng = np.random.default_rng(np.random.SeedSequence([seed, index]))
    pts = lo + (hi - lo) * rng.random((n, len(lo)))
    return int(np.count_nonzero(oracle.contains(pts)))


def montecarlo_volume(oracle: MembershipOracle, count: int, seed: int, threads: int = 1,
                      box=None) -> VolumeEstimate:
    """Hit-or-miss volume of ``oracle`` inside its bounding box.

    Samples are drawn in fixed chunks with per-chunk seeds derived from
    ``(seed, chunk index)``, so any thread count gives the same integer hit
    count and hence the same estimate.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    box = oracle.box if box is None else box
    if box is None:
        raise ValueError("oracle has no bounding box")
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    vol = float(np.prod(hi - lo))
    sizes = [min(MC_CHUNK, count - s) for s in range(0, count, MC_CHUNK)]
    args = [(oracle, lo, hi, seed, i, n) for i, n in enumerate(sizes)]
    if threads > 1 and len(args) > 1:
        with ThreadPoolExecutor(threads) as ex:
            hits = sum(ex.map(lambda a: _chunk_hits(*a), args))
    else:
        hits = sum(_chunk_hits(*a) for a in args)
    p = hits / count
    half = Z99 * vol * math.sqrt(p * (1.0 - p) / count)
    return VolumeEstimate(vol * p, half, count, seed)
