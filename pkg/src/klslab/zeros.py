"""Zeros of random analytic families: counting measures, linear statistics
against a radial spline, the Green identity behind them, and the tail and
growth bounds for families that depend polynomially on a parameter.

A family is ``f(x; z) = sum_k P_k(x) z^k`` with each ``P_k`` a polynomial in
the parameter ``x``, sampled uniformly from an axis box.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .polydist import MultiPoly

Z99 = 2.576
DEFAULT_ROOT_TOL = 1e-6
LEAD_TOL = 1e-14


# --------------------------------------------------------------------------
# Radial test function
# --------------------------------------------------------------------------


class RadialSpline:
    """``psi(z) = Psi(|z|)`` with ``Psi = 1`` on ``[0, r]``, ``Psi = 0`` from 1
    on, and ``Psi'' = -a`` then ``+a`` on the two halves of ``[r, 1]``,
    ``a = 4/(1-r)^2``.  ``Psi'`` is continuous, so the Laplacian is the
    bounded function ``Psi'' + Psi'/t`` with no singular part."""

    def __init__(self, r: float):
        if not 0 < r < 1:
            raise ValueError("r must lie in (0, 1)")
        self.r = float(r)
        self.mid = (1 + self.r) / 2
        self.a = 4.0 / (1 - self.r) ** 2

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        h = self.a / 2
        out = np.where(t <= self.r, 1.0, np.where(t <= self.mid, 1 - h * (t - self.r) ** 2, h * (1 - t) ** 2))
        return np.where(t >= 1, 0.0, out)

    def psi(self, z) -> np.ndarray:
        return self(np.abs(np.asarray(z)))

    def d1(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.where(t <= self.mid, -self.a * (t - self.r), -self.a * (1 - t))
        return np.where((t <= self.r) | (t >= 1), 0.0, out)

    def d2(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.where(t <= self.mid, -self.a, self.a)
        return np.where((t <= self.r) | (t >= 1), 0.0, out)

    def laplacian(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(t > 0, self.d2(t) + self.d1(t) / t, 0.0)

    def delta_l1(self) -> float:
        """``||Laplacian psi||_{L^1}``."""
        return 2 * math.pi * spline_delta_l1(self.r)

    def to_json(self) -> str:
        return json.dumps({"r": self.r})


def spline_delta_l1(r: float) -> float:
    """``int_r^1 |t Psi'' + Psi'| dt`` for the spline; equals
    ``2 (1 + r) / (1 - r)``.  On ``[r, mid]`` the integrand is ``-a(2t - r)``
    and on ``[mid, 1]`` it is ``a(2t - 1)``; each half integrates to
    ``(1 + r)/(1 - r)``."""
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    return 2 * (1 + r) / (1 - r)


# --------------------------------------------------------------------------
# Roots
# --------------------------------------------------------------------------


@dataclass
class ZeroMeasure:
    roots: np.ndarray
    mult: np.ndarray
    residual: float
    radius: float
    boundary: int = 0

    @property
    def total(self) -> int:
        return int(self.mult.sum())

    def count_within(self, rho: float) -> int:
        return int(self.mult[np.abs(self.roots) < rho].sum())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["re", "im", "mult"])
        for z, m in zip(self.roots, self.mult):
            w.writerow([repr(float(z.real)), repr(float(z.imag)), int(m)])
        return buf.getvalue()


def _strip(coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=complex).ravel()
    scale = float(np.max(np.abs(c))) if len(c) else 0.0
    if scale == 0.0:
        raise ValueError("identically zero function")
    keep = np.flatnonzero(np.abs(c) > LEAD_TOL * scale)
    return c[:keep[-1] + 1]


def _cluster(roots: np.ndarray, tol: float):
    """Single-linkage groups of roots closer than ``tol``."""
    n = len(roots)
    label = -np.ones(n, dtype=int)
    groups = []
    for i in range(n):
        if label[i] >= 0:
            continue
        stack, members = [i], []
        label[i] = len(groups)
        while stack:
            j = stack.pop()
            members.append(j)
            near = np.flatnonzero((label < 0) & (np.abs(roots - roots[j]) < tol))
            label[near] = len(groups)
            stack.extend(near.tolist())
        groups.append(members)
    return groups


def roots_in_disk(coeffs, R: float = 1.0, root_tol: float = DEFAULT_ROOT_TOL) -> ZeroMeasure:
    """Zeros of ``sum_k c_k z^k`` in ``|z| < R - root_tol`` with multiplicity.

    Vanishing top coefficients are dropped (zeros at infinity).  Roots that
    ``np.roots`` returns within ``root_tol`` of each other are merged into one
    zero of the combined multiplicity.
    """
    c = _strip(coeffs)
    raw = np.roots(c[::-1]) if len(c) > 1 else np.zeros(0, dtype=complex)
    groups = _cluster(raw, root_tol)
    locs = np.array([raw[g].mean() for g in groups], dtype=complex)
    mult = np.array([len(g) for g in groups], dtype=int)
    mod = np.abs(locs)
    inside = mod < R - root_tol
    boundary = int(mult[np.abs(mod - R) <= root_tol].sum())
    locs, mult = locs[inside], mult[inside]
    residual = 0.0
    if len(locs):
        # |f(w)| relative to the coefficient scale at |w|
        scale = float(np.max(np.abs(c))) * np.maximum(1.0, np.abs(locs)) ** (len(c) - 1)
        residual = float(np.max(np.abs(np.polynomial.polynomial.polyval(locs, c)) / scale))
    if root_tol > 0 and residual > root_tol:
        raise ArithmeticError(f"root residual {residual:.3g} exceeds {root_tol:g}")
    return ZeroMeasure(locs, mult, residual, float(R), boundary)


def batch_roots(C: np.ndarray) -> np.ndarray:
    """All roots of each row of coefficients ``C`` (increasing powers) via a
    stack of companion matrices; rows need a non-vanishing top coefficient."""
    C = np.asarray(C, dtype=complex)
    n = C.shape[1] - 1
    if n < 1:
        return np.zeros((len(C), 0), dtype=complex)
    comp = np.zeros((len(C), n, n), dtype=complex)
    comp[:, 1:, :-1] = np.eye(n - 1)
    comp[:, :, -1] = -C[:, :-1] / C[:, -1:]
    return np.linalg.eigvals(comp)


def _roots_per_row(C: np.ndarray, R: float) -> list[np.ndarray]:
    """Roots of each row inside ``|z| < R`` (with repetition)."""
    scale = np.max(np.abs(C), axis=1)
    ok = np.abs(C[:, -1]) > LEAD_TOL * scale
    out: list[np.ndarray] = [np.zeros(0, dtype=complex)] * len(C)
    if ok.any():
        idx = np.flatnonzero(ok)
        for s in range(0, len(idx), 4096):
            part = idx[s:s + 4096]
            rts = batch_roots(C[part])
            for i, row in zip(part, rts):
                out[i] = row[np.abs(row) < R]
    for i in np.flatnonzero(~ok):
        Z = roots_in_disk(C[i], R, root_tol=0.0)
        out[i] = np.repeat(Z.roots, Z.mult)
    return out


def argument_principle_count(coeffs, radius: float = 0.9, nodes: int = 4096) -> tuple[int, float]:
    """Winding number of ``f`` around ``|z| = radius`` by the trapezoid rule
    for ``(1/2 pi i) \\oint f'/f dz``; returns the rounded count and the raw
    value."""
    c = np.asarray(coeffs, dtype=complex)
    z = radius * np.exp(2j * np.pi * np.arange(nodes) / nodes)
    f = np.polynomial.polynomial.polyval(z, c)
    df = np.polynomial.polynomial.polyval(z, np.polynomial.polynomial.polyder(c)) if len(c) > 1 else 0 * z
    raw = complex(np.mean(df * z / f))
    return int(round(raw.real)), raw.real


def linear_statistic(Z: ZeroMeasure, psi: RadialSpline) -> float:
    return float(np.sum(Z.mult * psi.psi(Z.roots)))


# --------------------------------------------------------------------------
# Green identity check
# --------------------------------------------------------------------------


class QuadratureRefusal(RuntimeError):
    """A zero sits too close to a radius where the integrand has a kink."""


@dataclass(frozen=True)
class IdentityRecord:
    sum_side: float
    integral_side: float

    @property
    def gap(self) -> float:
        return abs(self.sum_side - self.integral_side) / max(1.0, abs(self.sum_side))


def _gauss(n: int, a: float, b: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return (a + b) / 2 + (b - a) / 2 * x, (b - a) / 2 * w


def laplacian_identity_check(coeffs, psi: RadialSpline, resolution: int = 1024,
                             root_tol: float = DEFAULT_ROOT_TOL) -> IdentityRecord:
    """``sum psi(w)`` over zeros against
    ``(1/2 pi) int Laplacian(psi) log|f| dm`` by polar quadrature:
    Gauss-Legendre in the radius on each half-band, trapezoid in the angle,
    ``resolution`` nodes each way."""
    Z = roots_in_disk(coeffs, 1.0, root_tol)
    allz = roots_in_disk(coeffs, math.inf, root_tol)
    cell = (1 - psi.r) / resolution
    for rho in (psi.r, psi.mid, 1.0):
        if np.any(np.abs(np.abs(allz.roots) - rho) < 2 * cell):
            raise QuadratureRefusal(f"a zero lies within two cells of radius {rho:g}")
    half = resolution // 2
    t1, w1 = _gauss(half, psi.r, psi.mid)
    t2, w2 = _gauss(resolution - half, psi.mid, 1.0)
    t, wt = np.concatenate([t1, t2]), np.concatenate([w1, w2])
    theta = 2 * np.pi * np.arange(resolution) / resolution
    c = _strip(coeffs)
    z = t[:, None] * np.exp(1j * theta)[None, :]
    vals = np.polynomial.polynomial.polyval(z, c)
    ring = np.mean(np.log(np.abs(vals)), axis=1)  # angular mean of log|f| on each circle
    integral = float(np.sum(wt * t * psi.laplacian(t) * ring))
    return IdentityRecord(linear_statistic(Z, psi), integral)


# --------------------------------------------------------------------------
# Families
# --------------------------------------------------------------------------


class ParametricFamily:
    """``f(x; z) = sum_k P_k(x) z^k`` with ``x`` uniform in a box."""

    def __init__(self, maps: Sequence[MultiPoly], lo, hi, R: float = 1.0, distribution: str = "uniform"):
        self.maps = list(maps)
        self.lo = np.asarray(lo, dtype=float).ravel()
        self.hi = np.asarray(hi, dtype=float).ravel()
        if len(self.lo) != len(self.hi) or np.any(self.hi <= self.lo):
            raise ValueError("invalid parameter box")
        if any(P.dim != len(self.lo) for P in self.maps):
            raise ValueError("coefficient maps must take the box dimension")
        if distribution not in ("uniform", "gaussian"):
            raise ValueError("distribution must be uniform or gaussian")
        self.R = float(R)
        self.distribution = distribution

    @property
    def K(self) -> int:
        return len(self.maps) - 1

    @property
    def d(self) -> int:
        return max(1, max(P.degree for P in self.maps))

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def note(self) -> str:
        if self.distribution == "gaussian":
            return "gaussian coefficients truncated to the box; the parameter body is not compact"
        return ""

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if self.distribution == "uniform":
            return self.lo + (self.hi - self.lo) * rng.random((count, self.dim))
        out = rng.normal(size=(count, self.dim))
        bad = np.any((out < self.lo) | (out > self.hi), axis=1)
        while bad.any():
            out[bad] = rng.normal(size=(int(bad.sum()), self.dim))
            bad = np.any((out < self.lo) | (out > self.hi), axis=1)
        return out

    def coeffs(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.stack([P(X) for P in self.maps], axis=1)

    def check_polynomial_in_x(self, z: complex, rng: np.random.Generator, tol: float = 1e-8) -> bool:
        """Restriction of ``x -> f(x; z)`` to a random line is a polynomial of
        degree at most ``d`` (interpolate through ``d + 1`` points, test
        elsewhere)."""
        a = self.lo + (self.hi - self.lo) * rng.random(self.dim)
        v = rng.normal(size=self.dim)
        d = self.d
        ts = np.linspace(-1, 1, d + 1)
        zp = z ** np.arange(self.K + 1)
        vals = self.coeffs(a + ts[:, None] * v) @ zp
        fit = np.polynomial.polynomial.polyfit(ts, vals.real, d) + 1j * np.polynomial.polynomial.polyfit(
            ts, vals.imag, d)
        test = np.linspace(-2, 2, 17)
        want = self.coeffs(a + test[:, None] * v) @ zp
        got = np.polynomial.polynomial.polyval(test, fit)
        return bool(np.all(np.abs(got - want) <= tol * max(1.0, float(np.max(np.abs(want))))))

    def to_json(self) -> str:
        return json.dumps({
            "maps": [json.loads(P.to_json()) for P in self.maps], "lo": self.lo.tolist(), "hi": self.hi.tolist(),
            "K": self.K, "d": self.d, "R": self.R, "distribution": self.distribution,
        })

    @classmethod
    def from_json(cls, text: str) -> "ParametricFamily":
        doc = json.loads(text)
        maps = [MultiPoly([(e, c) for e, c in m]) for m in doc["maps"]]
        return cls(maps, doc["lo"], doc["hi"], doc.get("R", 1.0), doc.get("distribution", "uniform"))


def power_series_family(K: int = 16, bound: float = 1.0, gaussian: bool = False) -> ParametricFamily:
    """``sum_{k <= K} x_k z^k``; uniform on ``[-bound, bound]^(K+1)``, or
    standard normal truncated at ``6`` when ``gaussian``."""
    n = K + 1
    maps = [MultiPoly([(tuple(int(j == k) for j in range(n)), 1.0)]) for k in range(n)]
    b = 6.0 if gaussian else bound
    return ParametricFamily(maps, -b * np.ones(n), b * np.ones(n), 1.0, "gaussian" if gaussian else "uniform")


def shift_family(lo: float, hi: float) -> ParametricFamily:
    """``x_0 + z`` with ``x_0`` uniform on ``[lo, hi]``."""
    return ParametricFamily([MultiPoly([((1,), 1.0)]), MultiPoly([((0,), 1.0)])], [lo], [hi])


# --------------------------------------------------------------------------
# Averages, tails, growth
# --------------------------------------------------------------------------


def _sub_seed(seed: int, tag: int) -> int:
    return int(np.random.SeedSequence([seed, tag]).generate_state(1)[0])


def sample_statistics(family: ParametricFamily, psi: RadialSpline, count: int, seed: int) -> np.ndarray:
    """Linear statistic of each of ``count`` sampled functions."""
    X = family.sample(count, np.random.default_rng(seed))
    roots = _roots_per_row(family.coeffs(X), family.R)
    return np.array([float(np.sum(psi.psi(r))) for r in roots])


@dataclass(frozen=True)
class StatRecord:
    mean: float
    ci: float
    count: int
    seed: int


def average_statistic(family: ParametricFamily, psi: RadialSpline, count: int, seed: int) -> StatRecord:
    s = sample_statistics(family, psi, count, seed)
    return StatRecord(float(s.mean()), Z99 * float(s.std()) / math.sqrt(count), count, seed)


@dataclass(frozen=True)
class TailRow:
    param: float
    empirical: float
    ci: float
    bound: float
    void: bool = False

    @property
    def margin(self) -> float:
        return self.bound - self.empirical

    @property
    def holds(self) -> bool:
        return self.void or self.margin + 3 * self.ci >= 0


def tail_rows_to_csv(rows: Sequence[TailRow], name: str = "lambda") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([name, "empirical", "ci", "bound", "margin", "holds"])
    for r in rows:
        if r.void:
            w.writerow([repr(r.param), repr(r.empirical), repr(r.ci), "void", "void", "void"])
        else:
            w.writerow([repr(r.param), repr(r.empirical), repr(r.ci), repr(r.bound), repr(r.margin),
                        str(r.holds).lower()])
    return buf.getvalue()


def offord_bound(lam: float, d: int, delta_l1: float, A: float = 4.0) -> float:
    return 2 * A * math.e ** 2 * math.exp(-2 * math.pi * lam / (d * delta_l1))


@dataclass
class OffordResult:
    rows: list[TailRow]
    nu: StatRecord
    seed: int
    info: dict = field(default_factory=dict)


def offord_tail(family: ParametricFamily, psi: RadialSpline, lam_grid: Sequence[float], count: int, seed: int,
                A: float = 4.0) -> OffordResult:
    """Share of parameters whose statistic deviates from the average by at
    least ``lam``, against ``2 A e^2 exp(-2 pi lam / (d ||Laplacian psi||_1))``.
    The average is estimated on an independent sub-seed."""
    nu = average_statistic(family, psi, count, _sub_seed(seed, 0))
    s = sample_statistics(family, psi, count, _sub_seed(seed, 1))
    dev = np.abs(s - nu.mean)
    L1 = psi.delta_l1()
    rows = []
    for lam in lam_grid:
        p = float(np.mean(dev >= lam))
        rows.append(TailRow(float(lam), p, Z99 * math.sqrt(p * (1 - p) / count), offord_bound(lam, family.d, L1, A)))
    return OffordResult(rows, nu, seed, {"delta_l1": L1, "d": family.d})


@dataclass
class CountingResult:
    rows: list[TailRow]
    exceptional: float
    exceptional_ci: float
    count: int
    seed: int


def corollary_bound(r: float, d: int, exceptional: float, A: float = 4.0) -> float:
    return 4 * d / (1 - r) * math.log(A * math.e ** 2 / exceptional)


def exceptional_counting_check(family: ParametricFamily, r_grid: Sequence[float], count: int, seed: int,
                               A: float = 4.0) -> CountingResult:
    """Average zero count in ``|z| < r`` against
    ``(4d/(1-r)) log(A e^2 / p*)``, with ``p*`` the measured share of
    parameters whose function has no zero in ``|z| < R``."""
    X = family.sample(count, np.random.default_rng(seed))
    roots = _roots_per_row(family.coeffs(X), family.R)
    mods = [np.abs(r) for r in roots]
    p = float(np.mean([len(m) == 0 for m in mods]))
    p_ci = Z99 * math.sqrt(p * (1 - p) / count)
    rows = []
    for r in r_grid:
        n = np.array([np.count_nonzero(m < r) for m in mods], dtype=float)
        ci = Z99 * float(n.std()) / math.sqrt(count)
        if p == 0.0:
            rows.append(TailRow(float(r), float(n.mean()), ci, math.inf, void=True))
        else:
            rows.append(TailRow(float(r), float(n.mean()), ci, corollary_bound(r, family.d, p, A)))
    return CountingResult(rows, p, p_ci, count, seed)
