"""Verification suites behind the command line.

Each suite takes validated parameters and a seed and returns check rows
plus named text artifacts.  Artifacts contain no timings, so equal seeds
give byte-identical files.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from . import geometry as geo
from . import klscore, needle, onedim, polydist, zeros

SUITES = ("onedim-verify", "needle", "kls2d", "remez", "dist", "zeros")


class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass(frozen=True)
class Check:
    anchor: str
    quantity: str
    value: float
    bound: float
    margin: float
    passed: bool
    ci: float = 0.0


@dataclass
class SuiteResult:
    name: str
    checks: list[Check]
    files: dict[str, str | bytes] = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


CHECK_HEADER = ["anchor", "quantity", "value", "ci", "bound", "margin", "pass"]


def checks_to_csv(checks: list[Check]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CHECK_HEADER)
    for c in checks:
        w.writerow([c.anchor, c.quantity, repr(float(c.value)), repr(float(c.ci)), repr(float(c.bound)),
                    repr(float(c.margin)), str(bool(c.passed)).lower()])
    return buf.getvalue()


def _table(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def le_check(anchor: str, quantity: str, value: float, bound: float, ci: float = 0.0) -> Check:
    return Check(anchor, quantity, float(value), float(bound), float(bound - value), bool(value <= bound + 3 * ci),
                 float(ci))


def sub_seed(master: int, suite: str) -> int:
    """Seed of one suite: ``SeedSequence([master, index of the suite])``."""
    return int(np.random.SeedSequence([int(master), SUITES.index(suite)]).generate_state(1)[0])


def _pmap(fn: Callable, items: list, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------------------
# Parameters
# --------------------------------------------------------------------------


DEFAULTS: dict[str, dict] = {
    "onedim-verify": {"instances": 1000, "lambdas": [1.5, 2.0, 3.0, 5.0], "max_breaks": 8, "max_intervals": 10,
                      "identity": 1000, "observations": 10_000},
    "needle": {"cases": ["square-full", "square-half", "square-annulus", "disk-full", "disk-half", "disk-annulus"],
               "deltas": [0.1, 0.05], "tol": 1e-3, "factor": 16.0},
    "kls2d": {"cases": ["half", "annulus"], "lambdas": [1.5, 2.0, 3.0], "resolution": 256, "directions": 64,
              "refine": 512, "weighted": True},
    "remez": {"instances": 1000, "max_degree": 8, "min_ratio": 0.05, "sharp_degrees": 6,
              "rhos": [1.0, 1.5, 2.0, 4.0], "turan": 200, "turan_terms": 4},
    "dist": {"exact_degrees": [1, 2, 3, 4], "samples": 1_000_000, "quadratics": 3,
             "lambdas": [1.1, 1.5, 2.0, 4.0, 8.0], "q_grid": [-0.4, -0.2, 0.0, 0.25, 0.5, 1.0, 2.0, 4.0],
             "sigmas": [1.0, 1.5, 2.0, 5.0, 10.0], "holder": [[1.0, 0.0], [1.0, 0.1], [2.0, 0.2]],
             "cubics": 4, "bodies": 50, "bmo_samples": 20_000},
    "zeros": {"K": 16, "r": 0.5, "lambdas": [0.5, 1.0, 2.0, 4.0, 8.0], "samples": 10_000,
              "identity_samples": 100, "resolution": 1024, "winding_samples": 100, "winding_radius": 0.9,
              "winding_nodes": 4096, "corollary_r": [0.25, 0.5, 0.75], "corollary_samples": 100_000},
}

QUICK: dict[str, dict] = {
    "onedim-verify": {"instances": 100, "identity": 200, "observations": 1000},
    "needle": {"cases": ["square-full", "square-half", "disk-half"], "deltas": [0.1]},
    "kls2d": {"resolution": 64, "directions": 16, "refine": 128},
    "remez": {"instances": 100, "turan": 20},
    "dist": {"samples": 50_000, "quadratics": 1, "cubics": 1, "bodies": 10, "bmo_samples": 5000},
    "zeros": {"samples": 2000, "identity_samples": 10, "resolution": 256, "winding_samples": 20,
              "corollary_samples": 20_000},
}


def _need(cond: bool, msg: str):
    if not cond:
        raise ConfigError(msg)


def _positive_int(p: dict, key: str):
    v = p[key]
    _need(isinstance(v, int) and not isinstance(v, bool) and v > 0, f"{key} must be a positive integer")


def _lambdas(values, key: str = "lambdas"):
    _need(isinstance(values, list) and len(values) > 0, f"{key} must be a non-empty list")
    for v in values:
        _need(isinstance(v, (int, float)) and v > 1, f"{key}: lambda must satisfy lambda > 1, got {v}")


def resolve_params(suite: str, given: dict | None, quick: bool = False) -> dict:
    """Defaults, then quick overrides, then the given values; validated."""
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)} or all")
    given = dict(given or {})
    unknown = set(given) - set(DEFAULTS[suite])
    _need(not unknown, f"unknown parameters for {suite}: {', '.join(sorted(unknown))}")
    p = dict(DEFAULTS[suite])
    if quick:
        p.update(QUICK[suite])
    p.update(given)
    VALIDATORS[suite](p)
    return p


def _v_onedim(p):
    for k in ("instances", "max_breaks", "max_intervals", "identity", "observations"):
        _positive_int(p, k)
    _lambdas(p["lambdas"])


def _v_needle(p):
    _need(all(c in NEEDLE_CASES for c in p["cases"]), f"needle cases must be among {', '.join(NEEDLE_CASES)}")
    _need(all(isinstance(d, (int, float)) and d > 0 for d in p["deltas"]), "deltas must be positive")
    _need(0 < p["tol"] < 1, "tol must lie in (0, 1)")
    _need(p["factor"] > 0, "factor must be positive")


def _v_kls(p):
    _need(all(c in ("half", "annulus") for c in p["cases"]), "kls2d cases must be half or annulus")
    _lambdas(p["lambdas"])
    _need(isinstance(p["resolution"], int) and p["resolution"] >= 16, "resolution must be an integer >= 16")
    _need(isinstance(p["directions"], int) and p["directions"] >= 8, "directions must be an integer >= 8")
    _need(p["refine"] == 0 or (isinstance(p["refine"], int) and p["refine"] > p["resolution"]),
          "refine must be 0 or a resolution above resolution")


def _v_remez(p):
    for k in ("instances", "max_degree", "sharp_degrees", "turan", "turan_terms"):
        _positive_int(p, k)
    _need(0 < p["min_ratio"] <= 1, "min_ratio must lie in (0, 1]")
    _need(all(r >= 1 for r in p["rhos"]), "rhos must be >= 1")


def _v_dist(p):
    for k in ("samples", "quadratics", "cubics", "bodies", "bmo_samples"):
        _positive_int(p, k)
    _need(all(isinstance(d, int) and d >= 1 for d in p["exact_degrees"]), "exact_degrees must be integers >= 1")
    _lambdas(p["lambdas"])
    _need(all(s >= 1 for s in p["sigmas"]), "sigmas must be >= 1")
    _need(all(len(h) == 2 and h[0] >= 0 and h[1] >= 0 for h in p["holder"]), "holder pairs need q >= 0, r >= 0")


def _v_zeros(p):
    for k in ("K", "samples", "identity_samples", "resolution", "winding_samples", "winding_nodes",
              "corollary_samples"):
        _positive_int(p, k)
    _need(0 < p["r"] < 1, "r must lie in (0, 1)")
    _need(all(0 < r < 1 for r in p["corollary_r"]), "corollary_r values must lie in (0, 1)")
    _need(0 < p["winding_radius"] < 1, "winding_radius must lie in (0, 1)")
    _need(all(v > 0 for v in p["lambdas"]), "lambdas must be positive")


VALIDATORS = {"onedim-verify": _v_onedim, "needle": _v_needle, "kls2d": _v_kls, "remez": _v_remez,
              "dist": _v_dist, "zeros": _v_zeros}


# --------------------------------------------------------------------------
# onedim-verify
# --------------------------------------------------------------------------


def run_onedim(p: dict, seed: int, threads: int = 1) -> SuiteResult:
    rng = np.random.default_rng(seed)
    checks, lemma_rows = [], []
    for i in range(p["instances"]):
        f = onedim.random_weight(rng, (0.0, 1.0), p["max_breaks"])
        E = onedim.random_interval_set(rng, (0.0, 1.0), p["max_intervals"])
        lam = float(p["lambdas"][int(rng.integers(len(p["lambdas"])))])
        rec = onedim.verify_lemma(f, E, lam)
        lemma_rows.append([i, lam, rec.lhs, rec.rhs, rec.margin, str(rec.holds).lower()])
        checks.append(Check("1-D lemma", f"instance {i}", rec.lhs, rec.rhs, rec.margin, rec.holds))
    id_rows, worst = [], 0.0
    for i in range(p["identity"]):
        a = math.exp(rng.uniform(math.log(0.1), math.log(10.0)))
        m = math.exp(rng.uniform(math.log(0.01), math.log(5.0)))
        lam = float(rng.uniform(1.01, 6.0))
        rec = onedim.exponential_identity(a, m, lam)
        worst = max(worst, rec.rel_gap)
        id_rows.append([i, a, m, lam, rec.lhs, rec.rhs, rec.rel_gap])
    checks.append(le_check("Exponential identity", "max relative gap", worst, 1e-12))
    obs_rows = []
    for k in (1, 2, 3, 4):
        bad = redraws = 0
        done = 0
        while done < p["observations"]:
            kw = onedim.random_observation(k, rng)
            try:
                ok = onedim.check_observation(k, **kw)
            except onedim.HypothesisViolation:
                redraws += 1
                continue
            done += 1
            bad += not ok
        obs_rows.append([k, done, bad, redraws])
        checks.append(le_check(f"Observation {k}", "violations", bad, 0))
    files = {
        "lemma.csv": _table(["instance", "lambda", "lhs", "rhs", "margin", "holds"], lemma_rows),
        "identity.csv": _table(["draw", "a", "m", "lambda", "lhs", "rhs", "rel_gap"], id_rows),
        "observations.csv": _table(["observation", "draws", "violations", "redraws"], obs_rows),
    }
    return SuiteResult("onedim-verify", checks, files)


# --------------------------------------------------------------------------
# needle
# --------------------------------------------------------------------------


def _needle_case(name: str):
    body, kind = name.split("-")
    if body == "square":
        F = geo.unit_square()
        E = {"full": geo.PolygonRegion(F), "half": geo.HalfPlaneRegion((1, 0), 0.5),
             "annulus": geo.DiskRegion((0.5, 0.5), 0.4, outside=True)}[kind]
    else:
        F = geo.regular_polygon(128)
        E = {"full": geo.PolygonRegion(F), "half": geo.HalfPlaneRegion((0, -1), 0.0),
             "annulus": geo.DiskRegion((0.0, 0.0), 0.8, outside=True)}[kind]
    return F, E


NEEDLE_CASES = ("square-full", "square-half", "square-annulus", "disk-full", "disk-half", "disk-annulus")


def run_needle(p: dict, seed: int, threads: int = 1) -> SuiteResult:
    jobs = [(c, d) for c in p["cases"] for d in p["deltas"]]

    def work(job):
        c, d = job
        F, E = _needle_case(c)
        return needle_decompose_job(F, E, d, p, seed)

    results = _pmap(work, jobs, threads)
    checks, files, summary = [], {}, []
    for (c, d), D in zip(jobs, results):
        tag = f"{c} delta={d!r}"
        rel = abs(D.total_area - D.area) / D.area
        checks.append(le_check("Needle decomposition", f"{tag} max width", D.max_width, 8 * d))
        checks.append(le_check("Needle decomposition", f"{tag} area relative error", rel, 1e-8))
        checks.append(le_check("Needle decomposition", f"{tag} max fraction error", D.max_fraction_error, D.tol))
        files[f"needle_{c}_{d!r}.csv"] = D.to_csv()
        summary.append([c, d, len(D.pieces), D.splits, D.alpha, D.max_width, D.max_fraction_error, rel])
    files["summary.csv"] = _table(["case", "delta", "pieces", "splits", "alpha", "max_width", "max_fraction_error",
                                   "area_rel_error"], summary)
    return SuiteResult("needle", checks, files)


def needle_decompose_job(F, E, d, p, seed):
    return needle.needle_decompose(F, E, d, tol=p["tol"], seed=seed, factor=p["factor"])


# --------------------------------------------------------------------------
# kls2d
# --------------------------------------------------------------------------


def kls_case(name: str):
    F = geo.regular_polygon(128)
    E = geo.HalfPlaneRegion((0, -1), 0.0) if name == "half" else geo.DiskRegion((0.0, 0.0), 0.8, outside=True)
    return F, E


def run_kls2d(p: dict, seed: int, threads: int = 1) -> SuiteResult:
    jobs = [(c, lam) for c in p["cases"] for lam in p["lambdas"]]
    kw = {"directions": p["directions"]}

    def work(job):
        c, lam = job
        F, E = kls_case(c)
        coarse = klscore.core_set_2d(F, E, lam, resolution=p["resolution"], **kw)
        fine = klscore.core_set_2d(F, E, lam, resolution=p["refine"], **kw) if p["refine"] else None
        return coarse, fine

    results = _pmap(work, jobs, threads)
    checks, files, records, labels, refine_rows = [], {}, [], [], []
    for (c, lam), (coarse, fine) in zip(jobs, results):
        F, E = kls_case(c)
        rec = klscore.verify_kls(F, E, lam, mask=coarse)
        tag = f"disk {c} lambda={lam!r}"
        records.append(rec)
        labels.append(tag)
        checks.append(Check("Geometric KLS", tag, rec.core_fraction, rec.bound + rec.slack, rec.margin, rec.holds))
        checks.append(le_check("Geometric KLS", f"{tag} slack", rec.slack, 0.02))
        files[f"mask_{c}_{lam!r}.pbm"] = coarse.to_pbm()
        files[f"mask_{c}_{lam!r}.json"] = coarse.sidecar()
        if fine is not None:
            chk = klscore.refinement_check(coarse, fine)
            refine_rows.append([tag, p["resolution"], p["refine"], chk.coarse, chk.fine, chk.excess, chk.band])
            checks.append(Check("KLS mask refinement", tag, chk.excess, chk.band, chk.band - chk.excess, chk.holds))
    if p["weighted"]:
        res = min(p["resolution"], 128)
        sq = geo.unit_square()
        gauss = klscore.LogConcaveDensity(lambda q: -0.5 * np.sum(q * q, axis=1), "gaussian")
        lap = klscore.LogConcaveDensity(lambda q: -np.hypot(q[:, 0], q[:, 1]), "laplace")
        disk, ann = kls_case("annulus")
        for tag, F, E, lam, dens in (("gaussian square left half lambda=2.0", sq, geo.HalfPlaneRegion((1, 0), 0.5),
                                      2.0, gauss),
                                     ("laplace disk annulus lambda=1.5", disk, ann, 1.5, lap)):
            ok = dens.check(F, np.random.default_rng(seed))
            rec = klscore.verify_kls_weighted(F, E, lam, dens, resolution=res, directions=p["directions"])
            records.append(rec)
            labels.append(tag)
            checks.append(Check("Log-concave KLS", tag, rec.core_fraction, rec.bound + rec.slack, rec.margin,
                                rec.holds and ok))
    files["kls.csv"] = klscore.records_to_csv(records, labels)
    if refine_rows:
        files["refinement.csv"] = _table(["case", "resolution", "refined", "coarse_fraction", "fine_fraction",
                                          "excess", "band"], refine_rows)
    return SuiteResult("kls2d", checks, files)


# --------------------------------------------------------------------------
# remez
# --------------------------------------------------------------------------


def random_remez_instance(rng: np.random.Generator, max_degree: int, min_ratio: float):
    d = int(rng.integers(0, max_degree + 1))
    p = Polynomial(rng.normal(size=d + 1))
    a = float(rng.uniform(-2, 2))
    J = (a, a + float(rng.uniform(0.1, 4.0)))
    while True:
        E = onedim.random_interval_set(rng, J)
        if E.measure >= min_ratio * (J[1] - J[0]):
            return p, J, E


def run_remez(p: dict, seed: int, threads: int = 1) -> SuiteResult:
    rng = np.random.default_rng(seed)
    checks, rows = [], []
    worst = 0.0
    for i in range(p["instances"]):
        poly, J, E = random_remez_instance(rng, p["max_degree"], p["min_ratio"])
        rec = polydist.remez_check(poly, J, E)
        ratio = rec.maxJ / rec.bound
        worst = max(worst, ratio)
        rows.append([i, rec.degree, J[0], J[1], E.measure, rec.maxJ, rec.supE, rec.bound, str(rec.holds).lower()])
        checks.append(Check("Remez", f"instance {i}", ratio, 1 + 1e-6, 1 + 1e-6 - ratio, rec.holds))
    sharp = []
    for d in range(1, p["sharp_degrees"] + 1):
        for rho in p["rhos"]:
            s = polydist.remez_sharpness(d, rho)
            sharp.append([d, rho, s.extremal_ratio, s.chebyshev_prediction, s.rel_gap])
            checks.append(le_check("Remez sharpness", f"d={d} rho={rho!r}", s.rel_gap, 1e-6))
    tur = []
    for i in range(p["turan"]):
        s = polydist.random_expsum(rng, p["turan_terms"])
        a = float(rng.uniform(-2, 2))
        J = (a, a + float(rng.uniform(0.1, 4.0)))
        while True:
            E = onedim.random_interval_set(rng, J)
            if E.measure >= p["min_ratio"] * (J[1] - J[0]):
                break
        rec = polydist.turan_check(s, J, E)
        tur.append([i, s.order, J[0], J[1], E.measure, rec.maxJ, rec.supE, rec.bound, str(rec.holds).lower()])
        checks.append(Check("Turan", f"sum {i}", rec.maxJ / rec.bound, 1 + 1e-6, 1 + 1e-6 - rec.maxJ / rec.bound,
                            rec.holds))
    head = ["instance", "degree", "J_lo", "J_hi", "E_length", "maxJ", "supE", "bound", "holds"]
    files = {"remez.csv": _table(head, rows),
             "sharpness.csv": _table(["d", "rho", "extremal_ratio", "chebyshev_prediction", "rel_gap"], sharp),
             "turan.csv": _table(head, tur)}
    return SuiteResult("remez", checks, files, {"worst_ratio": worst})


# --------------------------------------------------------------------------
# dist
# --------------------------------------------------------------------------


def _dist_rows(D, d: int, p: dict, label: str) -> list[polydist.Row]:
    M = D.median_level()
    rows = polydist.verify_distribution_inequalities(D, d, M, p["lambdas"])
    rows += polydist.verify_distribution_inequalities(D, d, M, p["lambdas"], sharp=True)
    for c_scale in (0.25, 1.0):
        rows.append(polydist.verify_comparison(D, d, c_scale * M, 2.0))
    qs = [q for q in p["q_grid"] if q >= 0 or -q * d < 1]
    rows += polydist.lq_norms(D, d, M, qs)
    for q, r in p["holder"]:
        if r * d < 1:
            rows.append(polydist.inverse_holder(D, d, q, r))
    rows.append(polydist.aplus_aminus_row(D, d, M))
    return [polydist.Row(f"{label}: {r.quantity}", r.value, r.ci, r.bound, r.sense, r.backend, r.seed)
            for r in rows]


def _anchor(quantity: str) -> str:
    q = quantity.split(": ", 1)[1]
    for key, name in (("sharp", "Sharp distribution inequalities"), ("tail", "Distribution inequalities"),
                      ("comparison", "Comparison lemma"), ("L^0", "Geometric mean"), ("L^-q", "L^-q bound"),
                      ("L^q", "L^q bound"), ("Holder", "Inverse Holder"), ("A+ A-", "A+ A- <= A")):
        if key in q:
            return name
    return "Distribution"


def run_dist(p: dict, seed: int, threads: int = 1) -> SuiteResult:
    rng = np.random.default_rng(seed)
    rows: list[polydist.Row] = []
    anchors: list[str] = []
    checks: list[Check] = []

    def add(rs, anchor=None):
        for r in rs:
            rows.append(r)
            anchors.append(anchor or _anchor(r.quantity))

    x = Polynomial([0.0, 1.0])
    for d in p["exact_degrees"]:
        D = polydist.ExactDistribution(x ** d, (0.0, 1.0))
        add(_dist_rows(D, d, p, f"x^{d} exact"))
        rec = polydist.log_average_deviation_1d(x ** d, (0.0, 1.0), onedim.IntervalSet([(0.5, 1.0)]))
        add([polydist.Row(f"x^{d} exact: log-average on [1/2, 1]", rec.deviation, 0.0, rec.bound)],
            "Log-average claim")
    for i in range(p["quadratics"]):
        P = polydist.MultiPoly.random(rng, 2, 2)
        s = int(rng.integers(2**31))
        D = polydist.EmpiricalDistribution.sample(P, geo.unit_square(), p["samples"], s)
        add(_dist_rows(D, 2, p, f"quadratic {i}"))
        checks.append(le_check("Log clamp", f"quadratic {i} clamped logs", D.clamped, 0))
        H = geo.HalfPlaneRegion(rng.normal(size=2), float(rng.uniform(-0.2, 0.8)))
        rec = polydist.log_average_deviation(P, geo.unit_square(), H, s + 1, p["samples"])
        add([polydist.Row(f"quadratic {i}: log-average on a half-plane cut", rec.deviation, rec.ci, rec.bound,
                          backend="montecarlo", seed=s + 1)], "Log-average claim")
    for sigma in p["sigmas"]:
        so = polydist.sigma_observation(sigma)
        add([polydist.Row(f"sigma={sigma!r}: 1 + Gamma(sigma+1)", so.lhs, 0.0, so.rhs)], "(3 sigma)^sigma")
        add([polydist.moment_chain(sigma)], "(3 sigma)^sigma")
    for i in range(p["cubics"]):
        P = polydist.MultiPoly.random(rng, 2, 3)
        bodies = [polydist.random_body(rng) for _ in range(p["bodies"])]
        rec = polydist.bmo_check(P, bodies, int(rng.integers(2**31)), p["bmo_samples"])
        add([polydist.Row(f"cubic {i}: BMO over {rec.bodies} bodies", rec.sup_over_bodies, rec.ci, rec.bound,
                          backend="montecarlo")], "BMO of log|P|")
    for r, a in zip(rows, anchors):
        checks.append(Check(a, r.quantity, r.value, r.bound, r.margin, r.holds, r.ci))
    return SuiteResult("dist", checks, {"dist.csv": polydist.rows_to_csv(rows)})


# --------------------------------------------------------------------------
# zeros
# --------------------------------------------------------------------------


def run_zeros(p: dict, seed: int, threads: int = 1) -> SuiteResult:
    fam = zeros.power_series_family(p["K"])
    psi = zeros.RadialSpline(p["r"])
    checks, files = [], {}
    rng = np.random.default_rng(zeros._sub_seed(seed, 10))
    id_rows, refused = [], 0
    while len(id_rows) < p["identity_samples"]:
        c = fam.coeffs(fam.sample(1, rng))[0]
        try:
            rec = zeros.laplacian_identity_check(c, psi, p["resolution"])
        except zeros.QuadratureRefusal:
            refused += 1
            continue
        id_rows.append([len(id_rows), rec.sum_side, rec.integral_side, rec.gap])
    worst = max(r[3] for r in id_rows)
    checks.append(le_check("Laplacian identity", f"max relative gap ({refused} refused)", worst, 1e-2))
    files["identity.csv"] = _table(["sample", "sum_side", "integral_side", "gap"], id_rows)
    rng = np.random.default_rng(zeros._sub_seed(seed, 11))
    wind, mism, near = [], 0, 0
    R = p["winding_radius"]
    # the trapezoid rule loses accuracy like rho**nodes for a zero at |z| = rho*R,
    # so draws with a zero within 8 node spacings of the contour are redrawn
    gap = 8 * R / p["winding_nodes"]
    while len(wind) < p["winding_samples"]:
        c = fam.coeffs(fam.sample(1, rng))[0]
        Z = zeros.roots_in_disk(c, 2.0)
        if np.any(np.abs(np.abs(Z.roots) - R) < gap):
            near += 1
            continue
        k, raw = zeros.argument_principle_count(c, R, p["winding_nodes"])
        n = Z.count_within(R)
        mism += k != n
        wind.append([len(wind), n, k, raw])
    checks.append(le_check("Argument principle", f"count mismatches ({near} redrawn)", mism, 0))
    files["winding.csv"] = _table(["sample", "roots", "winding", "raw"], wind)
    off = zeros.offord_tail(fam, psi, p["lambdas"], p["samples"], zeros._sub_seed(seed, 12))
    for r in off.rows:
        note = " (bound >= 1, holds trivially)" if r.bound >= 1 else ""
        checks.append(Check("Offord", f"lambda={r.param!r}{note}", r.empirical, r.bound, r.margin, r.holds, r.ci))
    files["offord.csv"] = zeros.tail_rows_to_csv(off.rows)
    meta = {"nu_mean": off.nu.mean, "nu_ci": off.nu.ci, "nu_seed": off.nu.seed, "tail_seed": off.seed,
            "samples": p["samples"], "trivial_lambdas": [r.param for r in off.rows if r.bound >= 1], **off.info}
    files["offord.json"] = json.dumps(meta, sort_keys=True)
    shift = zeros.shift_family(-2.0, 2.0)
    cor = zeros.exceptional_counting_check(shift, p["corollary_r"], p["corollary_samples"],
                                           zeros._sub_seed(seed, 13))
    checks.append(Check("Corollary", "exceptional share vs 1/2", cor.exceptional, 0.5,
                        3 * cor.exceptional_ci - abs(cor.exceptional - 0.5),
                        abs(cor.exceptional - 0.5) <= 3 * cor.exceptional_ci, cor.exceptional_ci))
    for r in cor.rows:
        checks.append(Check("Corollary", f"r={r.param!r} bound", r.empirical, r.bound, r.margin, r.holds, r.ci))
        gap = abs(r.empirical - r.param / 2)
        checks.append(Check("Corollary", f"r={r.param!r} count vs r/2", r.empirical, r.param / 2,
                            3 * r.ci - gap, gap <= 3 * r.ci, r.ci))
    files["corollary.csv"] = zeros.tail_rows_to_csv(cor.rows, "r")
    return SuiteResult("zeros", checks, files)


RUNNERS = {"onedim-verify": run_onedim, "needle": run_needle, "kls2d": run_kls2d, "remez": run_remez,
           "dist": run_dist, "zeros": run_zeros}


def run_suite(name: str, params: dict, seed: int, threads: int = 1) -> SuiteResult:
    return RUNNERS[name](params, seed, threads)
