"""Balanced needle decomposition of a convex polygon.

Net points are visited in lexicographic order.  Every current piece that
contains the point is cut by a line through it, with the angle chosen so
that the fattened set keeps its global share ``alpha`` on both sides.  A
piece that misses the point is left whole, which is the balanced choice of a
line that does not meet it.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .geometry import ConvexPolygon, Line, MembershipOracle, Region, Restricted

SCAN_ANGLES = 720
DEFAULT_TOL = 1e-3
DEFAULT_QUAD_POINTS = 1_000_000
SLIVER = 1e-12


class BalancingError(RuntimeError):
    """No balancing line was found within tolerance."""


def fatten(E: MembershipOracle, F: ConvexPolygon, delta: float, factor: float = 16.0,
           spacing: float | None = None) -> Restricted:
    """Points of ``F`` within ``factor * delta`` of ``E``.

    Regions that know their own neighbourhoods are dilated exactly; anything
    else is probed on a disk grid of spacing ``delta / 4`` (or ``spacing``).
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    radius = factor * delta
    if isinstance(E, geo.PolygonRegion) and E.polygon.contains(F.vertices, tol=1e-12).all():
        return Restricted(geo.Plane(), F)
    grown = E.dilate(radius) if isinstance(E, Region) else None
    if grown is None:
        grown = geo.ProbedRegion(E, radius, delta / 4.0 if spacing is None else spacing)
    return Restricted(grown, F)


# --------------------------------------------------------------------------
# Balancing a single cut
# --------------------------------------------------------------------------


def _exact_region(tildeE) -> Region | None:
    if isinstance(tildeE, Restricted) and tildeE.exact:
        return tildeE.region
    if isinstance(tildeE, Region) and tildeE.exact:
        return tildeE
    return None


class _Quadrature:
    """Fixed point set in one piece; the balance function is a difference of
    prefix sums over the points' polar angles about ``M``."""

    def __init__(self, P: ConvexPolygon, M, oracle, alpha, count, seed):
        rng = np.random.default_rng(seed)
        pts = geo.sample_uniform(P, count, rng)
        hit = oracle.contains(pts).astype(float)
        w = (hit - alpha) * (P.area / count)
        rel = pts - M
        phi = np.mod(np.arctan2(rel[:, 1], rel[:, 0]), 2 * math.pi)
        order = np.argsort(phi, kind="stable")
        self.phi = phi[order]
        self.cum = np.concatenate([[0.0], np.cumsum(w[order])])

    def __call__(self, thetas):
        # direction theta has left normal at angle theta + pi/2; the positive
        # side is the half-turn of polar angles [theta, theta + pi]
        th = np.asarray(thetas, dtype=float)
        a = np.searchsorted(self.phi, th, side="left")
        b = np.searchsorted(self.phi, th + math.pi, side="right")
        return self.cum[b] - self.cum[a]


def balance_function(F: ConvexPolygon, M, tildeE, alpha: float, seed: int = 0,
                     quad_points: int = DEFAULT_QUAD_POINTS):
    """``theta -> Vol(tildeE ∩ F+) - alpha Vol(F+)`` as a vectorised callable,
    plus a flag telling whether it is exact."""
    M = np.asarray(M, dtype=float)
    region = _exact_region(tildeE)
    if region is not None:
        cut = region.cut_function(F, M)
        return (lambda th: cut(th) - alpha * geo.polygon_cut_areas(F, M, th)), True
    return _Quadrature(F, M, tildeE, alpha, quad_points, seed), False


@dataclass(frozen=True)
class Split:
    plus: ConvexPolygon
    minus: ConvexPolygon
    angle: float
    residual: float
    exact: bool


def split_balanced(F: ConvexPolygon, M, tildeE, alpha: float, tol: float = DEFAULT_TOL, seed: int = 0,
                   quad_points: int = DEFAULT_QUAD_POINTS, angles: int = SCAN_ANGLES) -> Split:
    """Cut ``F`` by a line through ``M`` that leaves ``tildeE`` with share
    ``alpha`` of the positive side.

    ``angles + 1`` directions on ``[0, pi]`` are scanned.  An angle whose
    balance is already zero to rounding is taken as is; otherwise the first
    sign change is refined by repeated 16-way sectioning.
    """
    M = np.asarray(M, dtype=float).reshape(2)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if not F.contains(M, tol=1e-9)[0]:
        raise ValueError("cut point is outside the polygon")
    area = F.area
    g, exact = balance_function(F, M, tildeE, alpha, seed, quad_points)
    thetas = np.linspace(0.0, math.pi, angles + 1)
    vals = g(thetas)
    zero = 1e-15 * area
    hits = np.flatnonzero(np.abs(vals) <= zero)
    if len(hits):
        theta, res = float(thetas[hits[0]]), float(vals[hits[0]])
    else:
        change = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
        if not len(change):
            raise BalancingError("balance function has no sign change on the scan grid")
        i = int(change[0])
        lo, hi, glo = thetas[i], thetas[i + 1], vals[i]
        theta, res = lo, glo
        while hi > lo:
            sub = np.linspace(lo, hi, 17)
            sv = g(sub)
            j = int(np.argmin(np.abs(sv)))
            theta, res = float(sub[j]), float(sv[j])
            k = np.flatnonzero(np.sign(sv[:-1]) != np.sign(sv[1:]))
            if abs(res) <= zero or not len(k) or sub[k[0] + 1] - sub[k[0]] >= hi - lo:
                break
            lo, hi = sub[k[0]], sub[k[0] + 1]
    if abs(res) > tol * area:
        raise BalancingError(f"balance residual {abs(res):.3g} exceeds {tol} * area {area:.3g}")
    plus, minus = geo.split_by_line(F, M, (math.cos(theta), math.sin(theta)))
    return Split(plus, minus, theta, abs(res), exact)


# --------------------------------------------------------------------------
# Full recursion
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Piece:
    polygon: ConvexPolygon
    fraction: float
    width: float
    axis: Line

    @property
    def area(self) -> float:
        return self.polygon.area


@dataclass
class NeedleDecomposition:
    pieces: list[Piece]
    delta: float
    alpha: float
    tol: float
    exact: bool
    area: float
    net_size: int
    max_residual: float = 0.0
    splits: int = 0
    info: dict = field(default_factory=dict)

    @property
    def total_area(self) -> float:
        return float(sum(p.area for p in self.pieces))

    @property
    def max_width(self) -> float:
        return max(p.width for p in self.pieces)

    @property
    def max_fraction_error(self) -> float:
        return max(abs(p.fraction - self.alpha) for p in self.pieces)

    def invariants(self) -> dict:
        return {
            "partition": abs(self.total_area - self.area) <= 1e-8 * self.area,
            "needle": self.max_width <= 8 * self.delta,
            "balance": self.max_fraction_error <= self.tol,
        }

    def to_json(self) -> str:
        return json.dumps({
            "delta": self.delta, "alpha": self.alpha, "tol": self.tol, "exact": self.exact,
            "area": self.area, "net_size": self.net_size, "max_residual": self.max_residual,
            "pieces": [{
                "polygon": p.polygon.vertices.tolist(), "tildeE_fraction": p.fraction,
                "width": p.width, "axis": {"point": p.axis.point.tolist(), "direction": p.axis.direction.tolist()},
            } for p in self.pieces],
        })

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["piece_id", "area", "width", "fraction", "axis_angle"])
        for i, p in enumerate(self.pieces):
            w.writerow([i, repr(p.area), repr(p.width), repr(p.fraction), repr(p.axis.angle)])
        return buf.getvalue()


def piece_fraction(P: ConvexPolygon, tildeE, seed: int = 0, quad_points: int = DEFAULT_QUAD_POINTS) -> float:
    region = _exact_region(tildeE)
    if region is not None:
        return region.area_in(P) / P.area
    pts = geo.sample_uniform(P, quad_points, np.random.default_rng(seed))
    return float(np.count_nonzero(tildeE.contains(pts))) / quad_points


def needle_decompose(F: ConvexPolygon, E: MembershipOracle, delta: float, tol: float = DEFAULT_TOL,
                     seed: int = 0, factor: float = 16.0, quad_points: int = DEFAULT_QUAD_POINTS,
                     alpha_points: int = DEFAULT_QUAD_POINTS) -> NeedleDecomposition:
    """Decompose ``F`` into needles of width at most ``8 delta`` on each of
    which the ``factor * delta`` neighbourhood of ``E`` has share ``alpha``."""
    if F.is_empty:
        raise ValueError("cannot decompose an empty polygon")
    tildeE = fatten(E, F, delta, factor)
    area = F.area
    if tildeE.exact:
        alpha = tildeE.area() / area
    else:
        est = geo.montecarlo_volume(tildeE, alpha_points, seed)
        alpha = est.mean / area
    alpha = min(max(alpha, 0.0), 1.0)
    net = geo.delta_net(F, delta)
    pieces = [F]
    lo = np.array([F.bbox[0]])
    hi = np.array([F.bbox[1]])
    max_res = 0.0
    splits = 0
    min_area = SLIVER * area
    for k, M in enumerate(net):
        cand = np.flatnonzero(np.all((lo <= M + 1e-12) & (hi >= M - 1e-12), axis=1))
        for idx in cand[::-1]:
            P = pieces[idx]
            if not P.contains(M, tol=1e-12)[0]:
                continue
            s = split_balanced(P, M, tildeE, alpha, tol, int(np.random.SeedSequence([seed, k, idx]).generate_state(1)[0]),
                               quad_points)
            new = [Q for Q in (s.plus, s.minus) if not Q.is_empty and Q.area >= min_area]
            if len(new) == 2:
                splits += 1
                max_res = max(max_res, s.residual)
            pieces[idx:idx + 1] = new
            boxes = [Q.bbox for Q in new]
            lo = np.concatenate([lo[:idx], [b[0] for b in boxes] or np.zeros((0, 2)), lo[idx + 1:]])
            hi = np.concatenate([hi[:idx], [b[1] for b in boxes] or np.zeros((0, 2)), hi[idx + 1:]])
    out = []
    for i, P in enumerate(pieces):
        axis, width = geo.needle_width(P)
        frac = piece_fraction(P, tildeE, int(np.random.SeedSequence([seed, len(net), i]).generate_state(1)[0]),
                              quad_points)
        out.append(Piece(P, frac, width, axis))
    return NeedleDecomposition(out, float(delta), float(alpha), float(tol), bool(tildeE.exact), area,
                               len(net), max_res, splits)
