"""Command line: ``klslab run <config.json>`` and ``klslab report <dir>``.

Exit status is 0 when every check passes, 1 when a check fails and 2 for an
invalid configuration or missing artifacts.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from importlib import metadata
from pathlib import Path

from .suites import SUITES, ConfigError, checks_to_csv, resolve_params, run_suite, sub_seed


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def load_config(path: str, seed: int | None, out: str | None, quick: bool) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    suite = doc.get("suite")
    if suite != "all" and suite not in SUITES:
        raise ConfigError(f"suite must be one of {', '.join(SUITES)} or all")
    seed = doc.get("seed") if seed is None else seed
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigError("a non-negative integer seed is required")
    names = list(SUITES) if suite == "all" else [suite]
    raw = doc.get("params", {})
    if not isinstance(raw, dict):
        raise ConfigError("params must be an object")
    if suite == "all":
        extra = set(raw) - set(SUITES)
        if extra:
            raise ConfigError(f"params for all must be keyed by suite; unknown {', '.join(sorted(extra))}")
        params = {n: resolve_params(n, raw.get(n), quick) for n in names}
    else:
        params = {suite: resolve_params(suite, raw, quick)}
    return {"suites": names, "seed": seed, "params": params, "out": out or doc.get("out") or "klslab-out",
            "quick": quick}


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config, args.seed, args.out, args.quick)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    meta = {"version": _version(), "seed": cfg["seed"], "quick": cfg["quick"], "suites": {}}
    ok = True
    for name in cfg["suites"]:
        seed = sub_seed(cfg["seed"], name)
        t0 = time.perf_counter()
        res = run_suite(name, cfg["params"][name], seed, args.threads)
        wall = time.perf_counter() - t0
        d = out / name
        d.mkdir(exist_ok=True)
        (d / "checks.csv").write_text(checks_to_csv(res.checks))
        for fname, body in res.files.items():
            (d / fname).write_bytes(body if isinstance(body, bytes) else body.encode())
        fails = sum(not c.passed for c in res.checks)
        ok &= fails == 0
        meta["suites"][name] = {"seed": seed, "params": cfg["params"][name], "checks": len(res.checks),
                                "failures": fails, "passed": fails == 0, "wall_seconds": wall}
        print(f"{name}: {len(res.checks)} checks, {fails} failed, {wall:.1f} s")
    meta["passed"] = ok
    (out / "run.json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def summarize(directory: Path) -> list[tuple[str, float, int, int]]:
    """Worst margin, check count and failure count per anchor, in order of
    first appearance."""
    order = {n: i for i, n in enumerate(SUITES)}
    files = sorted(directory.glob("*/checks.csv"), key=lambda f: (order.get(f.parent.name, len(order)), f.parent.name))
    files += sorted(directory.glob("checks.csv"))
    stats: dict[str, list] = {}
    for f in files:
        with f.open(newline="") as fh:
            for row in csv.DictReader(fh):
                s = stats.setdefault(row["anchor"], [float("inf"), 0, 0])
                s[0] = min(s[0], float(row["margin"]))
                s[1] += 1
                s[2] += row["pass"] != "true"
    return [(a, s[0], s[1], s[2]) for a, s in stats.items()]


def cmd_report(args) -> int:
    d = Path(args.dir)
    if not d.is_dir():
        print(f"no such directory: {d}", file=sys.stderr)
        return 2
    lines = summarize(d)
    if not lines:
        print(f"no checks.csv artifacts under {d}", file=sys.stderr)
        return 2
    width = max(len(a) for a, *_ in lines)
    bad = 0
    for anchor, margin, n, fails in lines:
        status = "ok" if fails == 0 else f"{fails} FAILED"
        print(f"{anchor:<{width}}  worst margin {margin:.6g}  ({n} checks, {status})")
        bad += fails
    return 0 if bad == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="klslab", description="Run and summarise the verification suites.")
    sub = ap.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the suite named in a JSON config")
    r.add_argument("config")
    r.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
    r.add_argument("--out", default=None, help="output directory (overrides the config)")
    r.add_argument("--threads", type=int, default=1, help="worker threads for independent cases")
    r.add_argument("--quick", action="store_true", help="reduced sample counts; not for acceptance")
    r.set_defaults(func=cmd_run)
    s = sub.add_parser("report", help="summarise the artifacts of a run")
    s.add_argument("dir")
    s.set_defaults(func=cmd_report)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
