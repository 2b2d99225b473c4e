"""Remez-type inequalities and the distribution of polynomial values on
convex bodies.

Two distribution back-ends share one interface: an exact one for a
univariate polynomial on an interval (level sets from real roots,
expectations by adaptive quadrature) and an empirical one built from
uniform samples of a multivariate polynomial over a convex polygon.
Checks return :class:`Row` objects whose ``holds`` allows three CI
half-widths for sampled values and ``1e-9`` for exact ones.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy import integrate, optimize, special

from . import geometry as geo
from .geometry import ConvexPolygon, MembershipOracle
from .onedim import IntervalSet

REMEZ_A = 4.0
TURAN_A = 316.0
Z99 = 2.576
LOG_FLOOR = -700.0
EXACT_ATOL = 1e-9
INV_E = math.exp(-1.0)


# --------------------------------------------------------------------------
# Chebyshev polynomials and interval maxima
# --------------------------------------------------------------------------


def chebyshev_T(d: int, x):
    """``T_d(x)``: ``cos(d arccos x)`` on ``[-1, 1]`` and the closed form
    ``((x + s)^d + (x - s)^d) / 2`` with ``s = sqrt(x^2 - 1)`` outside."""
    if d < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    inner = np.cos(d * np.arccos(np.clip(x, -1.0, 1.0)))
    s = np.sqrt(np.maximum(ax * ax - 1.0, 0.0))
    outer = 0.5 * ((ax + s) ** d + (ax - s) ** d)
    outer = np.where(x < 0, (-1.0) ** d * outer, outer)
    out = np.where(ax <= 1.0, inner, outer)
    return float(out) if out.ndim == 0 else out


def interval_max(p: Polynomial, a: float, b: float) -> float:
    """``max |p|`` on ``[a, b]``: Chebyshev nodes, then every sign change of
    ``p'`` between nodes is refined to a critical point."""
    if b < a:
        raise ValueError("empty interval")
    if b == a:
        return float(abs(p(a)))
    d = max(p.degree(), 1)
    n = 64 * d
    k = np.arange(n)
    t = np.sort(np.concatenate([[a, b], (a + b) / 2 + (b - a) / 2 * np.cos((2 * k + 1) * np.pi / (2 * n))]))
    best = float(np.max(np.abs(p(t))))
    dp = p.deriv()
    if dp.degree() < 1 and not np.any(dp.coef):
        return best
    s = dp(t)
    for i in np.flatnonzero(np.sign(s[:-1]) * np.sign(s[1:]) < 0):
        x = optimize.brentq(dp, t[i], t[i + 1], xtol=1e-15, rtol=1e-15)
        best = max(best, float(abs(p(x))))
    return best


def _as_poly(p) -> Polynomial:
    return p if isinstance(p, Polynomial) else Polynomial(p)


def _dense_max(fn: Callable, a: float, b: float, n: int) -> float:
    """``max |fn|`` on ``[a, b]`` by dense sampling with bounded refinement
    around each sampled local maximum."""
    if b == a:
        return float(abs(fn(np.array([a]))[0]))
    t = np.linspace(a, b, n)
    v = np.abs(fn(t))
    best = float(v.max())
    peaks = np.flatnonzero((v > np.roll(v, 1)) & (v >= np.roll(v, -1)))
    peaks = peaks[np.argsort(-v[peaks], kind="stable")][:16]
    for i in peaks:
        lo, hi = t[max(i - 1, 0)], t[min(i + 1, n - 1)]
        r = optimize.minimize_scalar(lambda s: -abs(fn(np.array([s]))[0]), bounds=(lo, hi), method="bounded",
                                     options={"xatol": 1e-13 * max(1.0, b - a)})
        best = max(best, -float(r.fun))
    return best


# --------------------------------------------------------------------------
# Remez and Turan
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RemezRecord:
    maxJ: float
    supE: float
    bound: float
    degree: int

    @property
    def holds(self) -> bool:
        return self.maxJ <= self.bound * (1 + 1e-6)

    @property
    def margin(self) -> float:
        return self.bound - self.maxJ


def _check_E(J, E: IntervalSet) -> float:
    a, b = J
    m = E.measure
    if m <= 0:
        raise ValueError("E must have positive length")
    if any(lo < a - 1e-12 or hi > b + 1e-12 for lo, hi in E):
        raise ValueError("E must lie inside J")
    return m


def remez_check(p: Polynomial, J: tuple[float, float], E: IntervalSet, A: float = REMEZ_A) -> RemezRecord:
    """``max_J |p| <= (A |J| / |E|)^d sup_E |p|``."""
    p = _as_poly(p)
    m = _check_E(J, E)
    d = p.degree()
    maxJ = interval_max(p, *J)
    supE = max(interval_max(p, lo, hi) for lo, hi in E)
    return RemezRecord(maxJ, supE, (A * (J[1] - J[0]) / m) ** d * supE, d)


@dataclass(frozen=True)
class SharpnessRecord:
    extremal_ratio: float
    chebyshev_prediction: float

    @property
    def rel_gap(self) -> float:
        return abs(self.extremal_ratio - self.chebyshev_prediction) / self.chebyshev_prediction


def remez_sharpness(d: int, rho: float) -> SharpnessRecord:
    """Ratio ``max_J |T| / sup_E |T|`` for the Chebyshev polynomial carried to
    ``E = [0, 1]`` inside ``J = [0, rho]``, against ``T_d(2 rho - 1)``."""
    if rho < 1:
        raise ValueError("rho = |J|/|E| must be at least 1")
    P = np.polynomial.Chebyshev.basis(d, domain=[0.0, 1.0]).convert(kind=Polynomial)
    ratio = interval_max(P, 0.0, rho) / interval_max(P, 0.0, 1.0)
    return SharpnessRecord(ratio, chebyshev_T(d, 2 * rho - 1))


class ExpSum:
    """``sum_k c_k exp(i <w_k, x>)`` with complex ``c_k`` and real ``w_k``."""

    def __init__(self, coeffs, freqs):
        self.coeffs = np.asarray(coeffs, dtype=complex).ravel()
        f = np.asarray(freqs, dtype=float)
        self.freqs = f.reshape(len(self.coeffs), -1)
        if len(self.coeffs) < 1:
            raise ValueError("an exponential sum needs at least one term")

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def dim(self) -> int:
        return self.freqs.shape[1]

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        pts = x.reshape(-1, 1) if self.dim == 1 and x.ndim <= 1 else np.atleast_2d(x)
        return np.exp(1j * pts @ self.freqs.T) @ self.coeffs

    def to_json(self) -> str:
        return json.dumps({"coeffs": [[c.real, c.imag] for c in self.coeffs], "freqs": self.freqs.tolist()})


def random_expsum(rng: np.random.Generator, max_terms: int = 4, max_freq: float = 20.0) -> ExpSum:
    d = int(rng.integers(1, max_terms + 1))
    c = rng.normal(size=d) + 1j * rng.normal(size=d)
    return ExpSum(c, rng.uniform(-max_freq, max_freq, size=d))


def turan_check(s: ExpSum, J: tuple[float, float], E: IntervalSet, A: float = TURAN_A) -> RemezRecord:
    """The Remez bound for an exponential sum, with ``d`` its order."""
    if s.dim != 1:
        raise ValueError("turan_check needs a one-dimensional sum")
    m = _check_E(J, E)
    band = float(np.ptp(s.freqs)) if s.order > 1 else 0.0

    def samples(a, b):
        return max(2048, int(64 * s.order * (1 + band * (b - a) / math.pi)))

    maxJ = _dense_max(s, J[0], J[1], samples(*J))
    supE = max(_dense_max(s, lo, hi, samples(lo, hi)) for lo, hi in E)
    return RemezRecord(maxJ, supE, (A * (J[1] - J[0]) / m) ** s.order * supE, s.order)


# --------------------------------------------------------------------------
# Multivariate polynomials
# --------------------------------------------------------------------------


class MultiPoly:
    """Real polynomial in ``n`` variables as a list of monomials."""

    def __init__(self, monomials: Sequence[tuple[Sequence[int], float]]):
        terms: dict[tuple[int, ...], float] = {}
        n = None
        for exps, c in monomials:
            e = tuple(int(v) for v in exps)
            if any(v < 0 for v in e):
                raise ValueError("exponents must be non-negative")
            if n is None:
                n = len(e)
            elif len(e) != n:
                raise ValueError("inconsistent monomial dimensions")
            if e in terms:
                raise ValueError(f"duplicate monomial {e}")
            terms[e] = float(c)
        if n is None:
            raise ValueError("a polynomial needs at least one monomial")
        self.terms = terms
        self.exps = np.array(list(terms), dtype=int).reshape(len(terms), n)
        self.coefs = np.array(list(terms.values()))

    @property
    def dim(self) -> int:
        return self.exps.shape[1]

    @property
    def degree(self) -> int:
        nz = self.coefs != 0
        return int(self.exps[nz].sum(axis=1).max()) if nz.any() else 0

    def __call__(self, pts) -> np.ndarray:
        X = np.atleast_2d(np.asarray(pts, dtype=float))
        out = np.zeros(len(X))
        for e, c in zip(self.exps, self.coefs):
            term = np.full(len(X), c)
            for j, k in enumerate(e):
                if k:
                    term *= X[:, j] ** k
            out += term
        return out

    def restrict(self, a, v) -> Polynomial:
        """``t -> P(a + t v)`` by interpolation through ``d + 1`` points."""
        a, v = np.asarray(a, dtype=float), np.asarray(v, dtype=float)
        d = self.degree
        t = np.cos(np.pi * (np.arange(d + 1) + 0.5) / (d + 1))
        return Polynomial.fit(t, self(a + t[:, None] * v), d, domain=[-1, 1], window=[-1, 1])

    def check_restriction(self, a, v, tol: float = 1e-8) -> bool:
        r = self.restrict(a, v)
        t = np.linspace(-3, 3, 31)
        want = self(np.asarray(a) + t[:, None] * np.asarray(v))
        return bool(np.all(np.abs(r(t) - want) <= tol * max(1.0, float(np.max(np.abs(want))))))

    def to_json(self) -> str:
        return json.dumps([[list(map(int, e)), c] for e, c in zip(self.exps, self.coefs)])

    @classmethod
    def from_json(cls, text: str) -> "MultiPoly":
        return cls([(e, c) for e, c in json.loads(text)])

    @classmethod
    def random(cls, rng: np.random.Generator, dim: int, degree: int) -> "MultiPoly":
        """Standard normal coefficients on every monomial of total degree at
        most ``degree``."""
        grids = np.indices((degree + 1,) * dim).reshape(dim, -1).T
        exps = [tuple(e) for e in grids if e.sum() <= degree]
        return cls([(e, c) for e, c in zip(exps, rng.normal(size=len(exps)))])


# --------------------------------------------------------------------------
# Distributions of |P|
# --------------------------------------------------------------------------


class _Distribution:
    backend = ""
    seed: int | None = None

    def tail(self, c: float) -> float:
        """Share of the body where ``|P| >= c``."""
        raise NotImplementedError

    def tail_strict(self, c: float) -> float:
        raise NotImplementedError

    def below(self, c: float) -> float:
        raise NotImplementedError

    def prob_ci(self, p: float) -> float:
        return 0.0

    @property
    def atol(self) -> float:
        return EXACT_ATOL if self.backend == "exact" else 0.0

    def upper_quantile(self, p: float) -> float:
        """Smallest level ``c`` with ``tail(c) <= p``."""
        raise NotImplementedError

    def lower_quantile(self, p: float) -> float:
        """Largest level ``c`` with ``below(c) <= p``."""
        raise NotImplementedError

    def median_level(self) -> float:
        """``M`` with ``Vol{|P| >= M} = 1/e``."""
        raise NotImplementedError

    def norm(self, q: float) -> tuple[float, float]:
        """``(||P||_{L^q}, ci)``; ``q = 0`` is the geometric mean and
        negative ``q`` gives ``(mean |P|^q)^(1/q)``."""
        raise NotImplementedError

    @property
    def clamped(self) -> int:
        return 0


class ExactDistribution(_Distribution):
    """Law of ``|p|`` under the uniform measure on an interval."""

    backend = "exact"

    def __init__(self, p: Polynomial, interval: tuple[float, float] = (0.0, 1.0)):
        self.p = _as_poly(p)
        self.a, self.b = (float(v) for v in interval)
        if not self.b > self.a:
            raise ValueError("interval must have positive length")
        self.length = self.b - self.a
        self.constant = self.p.degree() < 1
        self.top = interval_max(self.p, self.a, self.b)
        self._breaks = self._split_points()

    def _real_roots(self, q: Polynomial) -> np.ndarray:
        if q.degree() < 1:
            return np.zeros(0)
        r = q.roots()
        r = r[np.abs(r.imag) <= 1e-9 * (1 + np.abs(r.real))].real
        return np.sort(r[(r > self.a) & (r < self.b)])

    def _split_points(self) -> np.ndarray:
        pts = [self.a, self.b]
        if not self.constant:
            pts += list(self._real_roots(self.p)) + list(self._real_roots(self.p.deriv()))
        return np.unique(pts)

    def _measure_where(self, c: float, strict: bool) -> float:
        if self.constant:
            v = abs(self.p.coef[0])
            return 1.0 if (v > c if strict else v >= c) else 0.0
        cuts = np.unique(np.concatenate([[self.a, self.b], self._real_roots(self.p - c),
                                         self._real_roots(self.p + c)]))
        mid = (cuts[:-1] + cuts[1:]) / 2
        inside = np.abs(self.p(mid)) >= c
        return float(np.sum(np.diff(cuts)[inside])) / self.length

    def tail(self, c):
        return self._measure_where(float(c), strict=False)

    def tail_strict(self, c):
        # level sets of a non-constant polynomial are null
        return self._measure_where(float(c), strict=True)

    def below(self, c):
        return 1.0 - self.tail(c)

    def _solve_tail(self, p: float) -> float:
        if self.constant:
            raise ValueError("a constant polynomial has no unique level")
        if p <= 0:
            return self.top
        if p >= 1:
            return 0.0
        return optimize.brentq(lambda c: self.tail(c) - p, 0.0, self.top, xtol=1e-15 * max(self.top, 1e-300),
                               rtol=1e-15, maxiter=500)

    def upper_quantile(self, p):
        return self._solve_tail(p)

    def lower_quantile(self, p):
        return self._solve_tail(1.0 - p)

    def median_level(self):
        return self._solve_tail(INV_E)

    def expect(self, g: Callable[[np.ndarray], np.ndarray]) -> float:
        """``mean of g(|p|)`` over the interval, split at the roots and
        critical points of ``p``."""
        total = 0.0
        for lo, hi in zip(self._breaks[:-1], self._breaks[1:]):
            v, _ = integrate.quad(lambda x: g(abs(self.p(x))), lo, hi, limit=400, epsabs=1e-14, epsrel=1e-12)
            total += v
        return total / self.length

    def norm(self, q):
        if q == 0:
            return math.exp(self.expect(lambda v: math.log(v) if v > 0 else LOG_FLOOR)), 0.0
        return self.expect(lambda v: v ** q if v > 0 else (0.0 if q > 0 else math.inf)) ** (1.0 / q), 0.0


class EmpiricalDistribution(_Distribution):
    """Sorted sample of ``|P|`` values."""

    def __init__(self, values, seed: int | None = None, mode: str = "montecarlo"):
        v = np.sort(np.abs(np.asarray(values, dtype=float)))
        if len(v) == 0:
            raise ValueError("empty sample")
        self.values = v
        self.seed = seed
        self.mode = mode
        self.backend = mode
        with np.errstate(divide="ignore"):
            logs = np.log(v)
        self._clamped = int(np.count_nonzero(logs < LOG_FLOOR))
        self.logs = np.maximum(logs, LOG_FLOOR)

    @classmethod
    def sample(cls, P: MultiPoly, F: ConvexPolygon, count: int, seed: int) -> "EmpiricalDistribution":
        pts = geo.sample_uniform(F, count, np.random.default_rng(seed))
        return cls(P(pts), seed, "montecarlo")

    @classmethod
    def grid(cls, P: MultiPoly, F: ConvexPolygon, resolution: int) -> "EmpiricalDistribution":
        lo, hi = F.bbox
        xs = [lo[j] + (np.arange(resolution) + 0.5) * (hi[j] - lo[j]) / resolution for j in range(2)]
        X, Y = np.meshgrid(*xs)
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        return cls(P(pts[F.contains(pts, tol=0.0)]), None, "grid")

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def clamped(self) -> int:
        return self._clamped

    def tail(self, c):
        return (self.count - int(np.searchsorted(self.values, c, side="left"))) / self.count

    def tail_strict(self, c):
        return (self.count - int(np.searchsorted(self.values, c, side="right"))) / self.count

    def below(self, c):
        return int(np.searchsorted(self.values, c, side="left")) / self.count

    def prob_ci(self, p):
        if self.mode == "grid":
            return 0.0
        return Z99 * math.sqrt(max(p * (1 - p), 0.0) / self.count)

    def _check_spread(self):
        if self.values[0] == self.values[-1]:
            raise ValueError("a constant polynomial has no unique level")

    def upper_quantile(self, p):
        self._check_spread()
        n = self.count
        k = math.ceil(n - p * n - 1e-9)
        return float(self.values[min(max(k - 1, 0), n - 1)])

    def lower_quantile(self, p):
        self._check_spread()
        n = self.count
        return float(self.values[min(int(math.floor(p * n + 1e-9)), n - 1)])

    def median_level(self):
        """The ``(1 - 1/e)`` quantile of the sample."""
        self._check_spread()
        k = int(math.floor(self.count * (1 - INV_E)))
        return float(self.values[min(k, self.count - 1)])

    def norm(self, q):
        n = self.count
        if q == 0:
            m = float(self.logs.mean())
            ci = Z99 * float(self.logs.std()) / math.sqrt(n)
            g = math.exp(m)
            return g, g * (math.exp(ci) - 1.0)
        w = np.exp(q * self.logs)
        m = float(w.mean())
        ci = Z99 * float(w.std()) / math.sqrt(n)
        val = m ** (1.0 / q)
        # delta method for m -> m^(1/q)
        return val, abs(val / (q * m)) * ci if m > 0 else math.inf


# --------------------------------------------------------------------------
# Result rows
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Row:
    quantity: str
    value: float
    ci: float
    bound: float
    sense: str = "le"
    backend: str = "exact"
    seed: int | None = None

    @property
    def margin(self) -> float:
        return self.bound - self.value if self.sense == "le" else self.value - self.bound

    @property
    def holds(self) -> bool:
        atol = EXACT_ATOL * max(1.0, abs(self.bound)) if self.backend == "exact" else 0.0
        return self.margin + 3 * self.ci + atol >= 0


ROW_HEADER = ["quantity", "value", "ci", "bound", "margin", "backend", "seed", "holds"]


def rows_to_csv(rows: Sequence[Row]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ROW_HEADER)
    for r in rows:
        w.writerow([r.quantity, repr(r.value), repr(r.ci), repr(r.bound), repr(r.margin), r.backend,
                    "" if r.seed is None else r.seed, str(r.holds).lower()])
    return buf.getvalue()


def _row(dist: _Distribution, name, value, ci, bound, sense="le") -> Row:
    return Row(name, float(value), float(ci), float(bound), sense, dist.backend, dist.seed)


# --------------------------------------------------------------------------
# Comparison lemma and distribution inequalities
# --------------------------------------------------------------------------


def median_level(dist: _Distribution) -> float:
    return dist.median_level()


def verify_comparison(dist: _Distribution, d: int, c: float, lam: float, A: float = REMEZ_A) -> Row:
    """``Vol{|P| >= (A lam)^d c} <= Vol{|P| >= c}^lam``."""
    if lam < 1 or not c > 0:
        raise ValueError("need lam >= 1 and c > 0")
    lhs = dist.tail((A * lam) ** d * c)
    base = dist.tail(c)
    rhs = base ** lam
    ci = dist.prob_ci(lhs) + lam * base ** (lam - 1) * dist.prob_ci(base)
    return _row(dist, f"comparison lam={lam!r} c={c!r}", lhs, ci, rhs)


def verify_distribution_inequalities(dist: _Distribution, d: int, M: float, lam_grid: Sequence[float],
                                     A: float = REMEZ_A, sharp: bool = False) -> list[Row]:
    """Per ``lam``: the upper tail against ``e^-lam`` and the lower tail
    against ``1/lam`` (or ``1 - e^(-1/lam)`` in the sharp form)."""
    rows = []
    tag = "sharp " if sharp else ""
    for lam in lam_grid:
        if not lam > 1:
            raise ValueError("distribution inequalities need lam > 1")
        k = chebyshev_T(d, 2 * lam - 1) if sharp else (A * lam) ** d
        up = dist.tail_strict(k * M)
        lo = dist.below(M / k)
        lo_bound = -math.expm1(-1.0 / lam) if sharp else 1.0 / lam
        rows.append(_row(dist, f"{tag}upper tail lam={lam!r}", up, dist.prob_ci(up), math.exp(-lam)))
        rows.append(_row(dist, f"{tag}lower tail lam={lam!r}", lo, dist.prob_ci(lo), lo_bound))
    return rows


# --------------------------------------------------------------------------
# Averages from distribution functions
# --------------------------------------------------------------------------


def tail_average_bound(tail: Callable[[float], float], phi: Callable[[float], float],
                       dphi: Callable[[float], float], Lam: float, muY: float = 1.0) -> float:
    """``phi(Lam) + (1/muY) int_Lam^inf tail(l) phi'(l) dl``."""
    if not muY > 0:
        raise ValueError("muY must be positive")
    out = integrate.quad(lambda l: tail(l) * dphi(l), Lam, math.inf, limit=400, epsrel=1e-10,
                         epsabs=1e-13, full_output=1)
    val = out[0]
    if not math.isfinite(val) or len(out) > 3:
        # quad reports divergence, or a subdivision limit it hits on divergent tails
        raise ValueError("the tail integral diverges or fails to converge")
    return phi(Lam) + val / muY


@dataclass(frozen=True)
class SigmaRecord:
    sigma: float
    lhs: float
    rhs: float
    gamma_form: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def sigma_observation(sigma: float) -> SigmaRecord:
    """``1 + sigma int_0^inf l^(sigma-1) e^-l dl <= (3 sigma)^sigma``."""
    if sigma < 1:
        raise ValueError("sigma must be at least 1")
    val, _ = integrate.quad(lambda l: sigma * l ** (sigma - 1) * math.exp(-l), 0, math.inf, epsrel=1e-12,
                            limit=400)
    return SigmaRecord(sigma, 1 + val, (3 * sigma) ** sigma, 1 + special.gamma(sigma + 1))


def moment_chain(sigma: float) -> Row:
    """The tail-integration bound with ``phi = l^sigma``, tail ``e^-l`` and
    floor level 1, against ``(3 sigma)^sigma``."""
    val = tail_average_bound(lambda l: math.exp(-l), lambda l: l ** sigma,
                             lambda l: sigma * l ** (sigma - 1), 1.0)
    return Row(f"moment chain sigma={sigma!r}", val, 0.0, (3 * sigma) ** sigma)


# --------------------------------------------------------------------------
# Norms
# --------------------------------------------------------------------------


def lq_norms(dist: _Distribution, d: int, M: float, q_grid: Sequence[float], A: float = REMEZ_A) -> list[Row]:
    """Rows for the ``L^q`` upper bounds (``q > 0``), ``L^q`` lower bounds
    with ``-1/d < q < 0``, and both geometric-mean bounds at ``q = 0``."""
    if any(q < 0 and -q * d >= 1 for q in q_grid):
        raise ValueError("the L^-q bound needs 0 < q < 1/d")
    rows = []
    for q in q_grid:
        val, ci = dist.norm(q)
        if q > 0:
            bound = (3 * A * q * d) ** d * M if q * d >= 1 else (3 * A) ** d * M
            rows.append(_row(dist, f"L^q q={q!r}", val, ci, bound))
        elif q < 0:
            r = -q
            rows.append(_row(dist, f"L^-q q={r!r}", val, ci, A ** -d * (1 - r * d) ** (1 / r) * M, "ge"))
        else:
            rows.append(_row(dist, "L^0 lower", val, ci, (math.e * A) ** -d * M, "ge"))
            rows.append(_row(dist, "L^0 upper", val, ci, (3 * A) ** d * M))
    return rows


def inverse_holder(dist: _Distribution, d: int, q: float, r: float, A: float = REMEZ_A) -> Row:
    """``||P||_q ||1/P||_r <= (3 A max(1, q d))^d / (1 - r d)^(1/r)``; at
    ``r = 0`` the geometric mean is used and the bound tends to
    ``(3 A max(1, q d))^d e^d``."""
    if q < 0 or not 0 <= r < 1 / d:
        raise ValueError("need q >= 0 and 0 <= r < 1/d")
    nq, cq = dist.norm(q)
    nr, cr = dist.norm(-r)
    inv = 1.0 / nr
    prod = nq * inv
    ci = prod * (cq / nq + cr / nr) if nq > 0 and nr > 0 else math.inf
    head = (3 * A * max(1.0, q * d)) ** d
    bound = head * math.exp(d) if r == 0 else head / (1 - r * d) ** (1 / r)
    return _row(dist, f"inverse Holder q={q!r} r={r!r}", prod, ci, bound)


@dataclass(frozen=True)
class RemezConstants:
    A: float
    A_plus: float
    A_minus: float

    @property
    def product(self) -> float:
        return self.A_plus * self.A_minus


def estimate_aplus_aminus(dist: _Distribution, d: int, M: float, lam_max: float = 20.0, steps: int = 400,
                          A: float = REMEZ_A) -> RemezConstants:
    """Smallest constants for which the two tail bounds hold on the scanned
    ``lam`` grid in ``[1, lam_max]``."""
    lams = np.geomspace(1.0, lam_max, steps)
    ap = am = 0.0
    for lam in lams:
        up = dist.upper_quantile(math.exp(-lam))
        ap = max(ap, (up / M) ** (1 / d) / lam)
        lo = dist.lower_quantile(1 / lam)
        am = max(am, math.inf if lo <= 0 else (M / lo) ** (1 / d) / lam)
    return RemezConstants(A, float(ap), float(am))


def aplus_aminus_row(dist: _Distribution, d: int, M: float, A: float = REMEZ_A) -> Row:
    c = estimate_aplus_aminus(dist, d, M, A=A)
    return _row(dist, "A+ A- product", c.product, 0.0, A)


# --------------------------------------------------------------------------
# BMO of log|P| and averages over subsets
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BMORecord:
    sup_over_bodies: float
    ci: float
    bound: float
    bodies: int

    @property
    def holds(self) -> bool:
        return self.sup_over_bodies <= self.bound + 3 * self.ci


def bmo_mean_deviation(P: MultiPoly, F: ConvexPolygon, samples: int, seed: int) -> tuple[float, float]:
    """``min_C mean |log|P| - C|`` over ``F``, attained at the median of the
    sampled logarithms; returns the value and its CI half-width."""
    pts = geo.sample_uniform(F, samples, np.random.default_rng(seed))
    with np.errstate(divide="ignore"):
        u = np.maximum(np.log(np.abs(P(pts))), LOG_FLOOR)
    dev = np.abs(u - np.median(u))
    return float(dev.mean()), Z99 * float(dev.std()) / math.sqrt(samples)


def random_body(rng: np.random.Generator, vertices: int = 8) -> ConvexPolygon:
    """Hull of random points, translated and rescaled to unit area."""
    Q = ConvexPolygon.hull(rng.normal(size=(vertices, 2)) * rng.uniform(0.2, 3.0, size=2))
    V = (Q.vertices - Q.centroid) / math.sqrt(Q.area) + rng.uniform(-2, 2, size=2)
    return ConvexPolygon(V)


def bmo_check(P: MultiPoly, bodies: Sequence[ConvexPolygon], seed: int, samples: int = 20_000,
              A: float = REMEZ_A) -> BMORecord:
    """Largest mean deviation over the bodies against ``((4 + log A)/2) d``."""
    best, best_ci = 0.0, 0.0
    for i, F in enumerate(bodies):
        sub = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
        v, ci = bmo_mean_deviation(P, F, samples, sub)
        if v > best:
            best, best_ci = v, ci
    return BMORecord(best, best_ci, (4 + math.log(A)) / 2 * max(P.degree, 1), len(bodies))


@dataclass(frozen=True)
class LogAverageRecord:
    devE: float
    devF: float
    volume_ratio: float
    bound: float
    ci: float

    @property
    def deviation(self) -> float:
        return abs(self.devE - self.devF)

    @property
    def holds(self) -> bool:
        return self.deviation <= self.bound + 3 * self.ci


def log_average_deviation(P: MultiPoly, F: ConvexPolygon, E: MembershipOracle, seed: int,
                          samples: int = 1_000_000, A: float = REMEZ_A) -> LogAverageRecord:
    """Mean of ``log|P|`` over ``E`` against the mean over ``F``, bounded by
    ``d log(e^2 A Vol(F)/Vol(E))``; both means from one uniform sample."""
    pts = geo.sample_uniform(F, samples, np.random.default_rng(seed))
    with np.errstate(divide="ignore"):
        u = np.maximum(np.log(np.abs(P(pts))), LOG_FLOOR)
    inE = E.contains(pts)
    k = int(inE.sum())
    if k == 0:
        raise ValueError("no sample landed in E")
    share = k / samples
    devE, devF = float(u[inE].mean()), float(u.mean())
    # the two means are correlated; bound the CI of their gap by the sum
    ci = Z99 * (float(u[inE].std()) / math.sqrt(k) + float(u.std()) / math.sqrt(samples))
    d = max(P.degree, 1)
    # a smaller share loosens the bound, so use the low end of its CI
    low = max(share - Z99 * math.sqrt(share * (1 - share) / samples), 1.0 / samples)
    return LogAverageRecord(devE, devF, share, d * math.log(math.e ** 2 * A / low), ci)


def log_average_deviation_1d(p: Polynomial, I: tuple[float, float], E: IntervalSet,
                             A: float = REMEZ_A) -> LogAverageRecord:
    """Exact version on an interval; ``E`` is a union of sub-intervals."""
    full = ExactDistribution(p, I)
    m = E.measure
    if m <= 0:
        raise ValueError("E must have positive length")
    logabs = lambda x: math.log(abs(float(full.p(x)))) if full.p(x) != 0 else LOG_FLOOR  # noqa: E731
    total = 0.0
    for lo, hi in E:
        pts = full._breaks[(full._breaks > lo) & (full._breaks < hi)]
        v, _ = integrate.quad(logabs, lo, hi, points=pts if len(pts) else None, limit=400, epsabs=1e-14,
                              epsrel=1e-12)
        total += v
    devE = total / m
    devF = math.log(full.norm(0)[0])
    d = max(full.p.degree(), 1)
    share = m / full.length
    return LogAverageRecord(devE, devF, share, d * math.log(math.e ** 2 * A / share), 0.0)
