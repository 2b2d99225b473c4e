"""Core sets of planar convex bodies on a grid, and the volume inequality
they satisfy.

A grid cell centre ``x`` in ``E`` is kept when, along each tested line
through ``x``, every tested segment of the chord having ``x`` as an endpoint
is at least a ``(lam - 1) / lam`` fraction ``E``.  Testing fewer segments
can only keep more points, so the mask over-approximates the true core.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import geometry as geo
from .geometry import ConvexPolygon, MembershipOracle
from .onedim import IntervalSet, check_lambda, core_set_1d

DEFAULT_DIRECTIONS = 64
DEFAULT_RESOLUTION = 256
DEFAULT_PREFIX = 256
DEFAULT_KMIN = 52
CHUNK = 2048


@dataclass
class GridMask:
    """Cells of a square grid over a bounding box, indexed ``[row, col]``
    with rows running up in ``y``."""

    resolution: int
    box: tuple[np.ndarray, np.ndarray]
    mask: np.ndarray
    host: np.ndarray
    slack: float
    conservative: str = "over"
    meta: dict | None = None

    def __post_init__(self):
        if self.resolution < 16:
            raise ValueError("resolution must be at least 16")

    @property
    def cell_area(self) -> float:
        lo, hi = self.box
        return float(np.prod((hi - lo) / self.resolution))

    def centers(self) -> np.ndarray:
        return grid_centers(self.box, self.resolution)

    def fraction(self, weights: np.ndarray | None = None) -> float:
        if weights is None:
            return float(self.mask.sum()) / float(self.host.sum())
        w = weights.reshape(self.mask.shape)
        return float(w[self.mask].sum() / w[self.host].sum())

    def to_pbm(self) -> bytes:
        rows = np.flipud(self.mask).astype(np.uint8)
        head = f"P4\n{self.resolution} {self.resolution}\n".encode()
        return head + np.packbits(rows, axis=1).tobytes()

    def sidecar(self) -> str:
        lo, hi = self.box
        doc = {"resolution": self.resolution, "box": [lo.tolist(), hi.tolist()], "slack": self.slack,
               "conservative": self.conservative}
        doc.update(self.meta or {})
        return json.dumps(doc, sort_keys=True)

    @staticmethod
    def read_pbm(data: bytes) -> np.ndarray:
        parts = data.split(b"\n", 2)
        if parts[0] != b"P4":
            raise ValueError("not a binary PBM")
        w, h = (int(s) for s in parts[1].split())
        bits = np.unpackbits(np.frombuffer(parts[2], dtype=np.uint8).reshape(h, -1), axis=1)[:, :w]
        return np.flipud(bits.astype(bool))


def grid_centers(box, resolution: int) -> np.ndarray:
    lo, hi = (np.asarray(b, dtype=float) for b in box)
    step = (hi - lo) / resolution
    xs = lo[0] + (np.arange(resolution) + 0.5) * step[0]
    ys = lo[1] + (np.arange(resolution) + 0.5) * step[1]
    X, Y = np.meshgrid(xs, ys)
    return np.stack([X.ravel(), Y.ravel()], axis=1)


def direction_order(n: int) -> np.ndarray:
    """Angles ``pi j / n`` in bit-reversed order, so early directions are
    spread out and reject most cells quickly."""
    bits = max(1, (n - 1).bit_length())
    rev = [int(format(j, f"0{bits}b")[::-1], 2) for j in range(n)]
    return np.pi * np.argsort(rev, kind="stable") / n


def _chord_extents(F: ConvexPolygon, X: np.ndarray, u: np.ndarray):
    """Signed parameters ``t- <= 0 <= t+`` of the chord of ``F`` through each
    row of ``X`` in direction ``u``."""
    n, c = F._constraints()
    d = n @ u
    r = c[None, :] - X @ n.T
    r = np.maximum(r, 0.0)
    with np.errstate(divide="ignore"):
        q = r / d[None, :]
    tp = np.where(d[None, :] > 1e-15, q, np.inf).min(axis=1)
    tm = np.where(d[None, :] < -1e-15, q, -np.inf).max(axis=1)
    return tm, tp


def _has_chord_measure(E) -> bool:
    return isinstance(E, geo.Region) and E.exact


def _sampled_survivors(F, E, X, u, theta, K, k_min):
    tm, tp = _chord_extents(F, X, u)
    k = np.arange(1, K + 1)
    test = k >= k_min
    ok = np.ones(len(X), dtype=bool)
    if _has_chord_measure(E):
        # exact E-length of each sampled prefix, compared with theta itself
        for L in (tp, tm):
            S = L[:, None] * (k[None, test] / K)
            m = E.chord_measure(X, u, S)
            ok &= np.all(m >= theta * np.abs(S) - 1e-12, axis=1)
        return ok
    s = (k - 0.5) / K
    need = theta * k - 1.0  # midpoint counts may miss by one cell
    for L in (tp, tm):
        pts = X[:, None, :] + (L[:, None] * s[None, :])[..., None] * u
        hit = E.contains(pts.reshape(-1, 2)).reshape(len(X), K)
        cum = np.cumsum(hit, axis=1)
        ok &= np.all((cum >= need)[:, test], axis=1)
    return ok


def _exact_survivors(F, E, X, u, lam):
    tm, tp = _chord_extents(F, X, u)
    ok = np.ones(len(X), dtype=bool)
    for i, x in enumerate(X):
        a, b = x + tm[i] * u, x + tp[i] * u
        span = tp[i] - tm[i]
        if span <= 0:
            continue
        iv = [(tm[i] + p * span, tm[i] + q * span) for p, q in E.segment_intervals(a, b)]
        core = core_set_1d(IntervalSet(iv), (tm[i], tp[i]), lam)
        ok[i] = bool(core.contains(0.0))
    return ok


def core_set_2d(F: ConvexPolygon, E: MembershipOracle, lam: float, directions: int = DEFAULT_DIRECTIONS,
                resolution: int = DEFAULT_RESOLUTION, prefix_samples: int = DEFAULT_PREFIX,
                k_min: int = DEFAULT_KMIN, mode: str = "sampled") -> GridMask:
    """Grid approximation of the core of ``E`` in ``F``.

    ``mode="sampled"`` splits each half-chord into ``prefix_samples`` equal
    steps and tests the prefixes of at least ``k_min`` steps.  For exact
    regions the E-length of each prefix is exact and compared with
    ``theta``, so no true core point is lost; prefixes ending between
    samples can fall short by at most ``1 / k``, hence the reported slack
    ``1 / k_min``.  Generic oracles are sampled at step midpoints and
    compared with ``theta - 1/k``, which absorbs midpoint error while a
    half-chord crosses the boundary of ``E`` at most twice.
    ``mode="exact"`` runs the 1-D core on every chord, with slack 0.
    """
    lam = check_lambda(lam)
    if directions < 8:
        raise ValueError("directions must be at least 8")
    if resolution < 16:
        raise ValueError("resolution must be at least 16")
    if mode not in ("sampled", "exact"):
        raise ValueError(f"unknown mode {mode!r}")
    theta = (lam - 1.0) / lam
    box = F.bbox
    C = grid_centers(box, resolution)
    host = F.contains(C, tol=0.0)
    alive = host & E.contains(C)
    for phi in direction_order(directions):
        u = np.array([math.cos(phi), math.sin(phi)])
        idx = np.flatnonzero(alive)
        for s in range(0, len(idx), CHUNK):
            part = idx[s:s + CHUNK]
            if mode == "sampled":
                keep = _sampled_survivors(F, E, C[part], u, theta, prefix_samples, k_min)
            else:
                keep = _exact_survivors(F, E, C[part], u, lam)
            alive[part[~keep]] = False
    shape = (resolution, resolution)
    slack = 1.0 / k_min if mode == "sampled" else 0.0
    meta = {"mode": mode, "directions": directions, "prefix_samples": prefix_samples, "k_min": k_min,
            "lambda": lam}
    return GridMask(resolution, box, alive.reshape(shape), host.reshape(shape), slack, "over", meta)


@dataclass(frozen=True)
class KLSRecord:
    core_fraction: float
    e_fraction: float
    lam: float
    slack: float
    e_area_fraction: float | None = None

    @property
    def bound(self) -> float:
        return self.e_fraction ** self.lam

    @property
    def margin(self) -> float:
        return self.bound + self.slack - self.core_fraction

    @property
    def holds(self) -> bool:
        return self.margin >= 0.0

    def row(self) -> list:
        return [repr(self.lam), repr(self.core_fraction), repr(self.e_fraction), repr(self.bound),
                repr(self.slack), repr(self.margin), str(self.holds).lower()]


KLS_HEADER = ["lambda", "core_fraction", "e_fraction", "bound", "slack", "margin", "holds"]


def records_to_csv(records, labels: list[str] | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow((["case"] if labels else []) + KLS_HEADER)
    for i, r in enumerate(records):
        w.writerow(([labels[i]] if labels else []) + r.row())
    return buf.getvalue()


def _exact_fraction(F, E):
    if isinstance(E, geo.Region) and E.exact:
        return E.area_in(F) / F.area
    return None


def verify_kls(F: ConvexPolygon, E: MembershipOracle, lam: float, mask: GridMask | None = None,
               **params) -> KLSRecord:
    """Core fraction against ``(E fraction)^lam``.

    Both fractions are counts of grid cells, so they discretise the same
    way; the exact area fraction of ``E`` is reported alongside when known.
    """
    mask = core_set_2d(F, E, lam, **params) if mask is None else mask
    C = mask.centers()
    e_cells = mask.host.ravel() & E.contains(C)
    e_frac = float(e_cells.sum()) / float(mask.host.sum())
    return KLSRecord(mask.fraction(), e_frac, float(lam), mask.slack, _exact_fraction(F, E))


class LogConcaveDensity:
    """Density ``exp(log_density)`` declared log-concave."""

    def __init__(self, log_density: Callable[[np.ndarray], np.ndarray], name: str = "density"):
        self.log_density = log_density
        self.name = name

    def __call__(self, pts) -> np.ndarray:
        return np.exp(self.log_density(np.atleast_2d(np.asarray(pts, dtype=float))))

    def check(self, F: ConvexPolygon, rng: np.random.Generator, chords: int = 1000, tol: float = 1e-9) -> bool:
        """Midpoint concavity of the log-density along random chords of ``F``."""
        a = geo.sample_uniform(F, chords, rng)
        b = geo.sample_uniform(F, chords, rng)
        la, lb, lm = self.log_density(a), self.log_density(b), self.log_density((a + b) / 2)
        return bool(np.all(lm >= (la + lb) / 2 - tol))


def verify_kls_weighted(F: ConvexPolygon, E: MembershipOracle, lam: float, p: LogConcaveDensity,
                        mask: GridMask | None = None, **params) -> KLSRecord:
    """As :func:`verify_kls` with cells weighted by ``p``; the core itself does
    not depend on the measure."""
    mask = core_set_2d(F, E, lam, **params) if mask is None else mask
    C = mask.centers()
    w = p(C)
    host = mask.host.ravel()
    e_cells = host & E.contains(C)
    e_frac = float(w[e_cells].sum() / w[host].sum())
    return KLSRecord(mask.fraction(w), e_frac, float(lam), mask.slack)


def boundary_band(mask: GridMask) -> float:
    """Share of host cells in the mask with a 4-neighbour outside it; the
    one-cell resolution of the mask's area."""
    m = np.pad(mask.mask, 1)
    inner = m[1:-1, 1:-1]
    edge = inner & ~(m[:-2, 1:-1] & m[2:, 1:-1] & m[1:-1, :-2] & m[1:-1, 2:])
    return float(edge.sum()) / float(mask.host.sum())


@dataclass(frozen=True)
class RefinementCheck:
    coarse: float
    fine: float
    band: float

    @property
    def excess(self) -> float:
        return self.fine - self.coarse

    @property
    def holds(self) -> bool:
        return self.excess <= self.band


def refinement_check(coarse: GridMask, fine: GridMask) -> RefinementCheck:
    """Compare mask fractions across resolutions.

    The set that passes the chord tests does not depend on the grid, so a
    finer grid resamples the same set; its fraction may move by up to the
    coarse mask's boundary band but must not grow beyond it.
    """
    return RefinementCheck(coarse.fraction(), fine.fraction(), boundary_band(coarse))
