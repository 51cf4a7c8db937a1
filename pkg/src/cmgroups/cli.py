"""Command-line entry point: compute, report, verify, presets.

The prime p = 2 is always excluded, as are primes dividing the conductor or
the discriminant of the short Weierstrass model; they contribute 0 to every sum.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from .asymptotics import CSV_COLUMNS, aggregate, c_E_truncated, nk_sanity, theorem_reports, weil_check
from .cache import CacheMismatch, RecordCache, cache_path, empty_cache, read_cache
from .config import RunConfig
from .curves import (
    ENUMERATION_LIMIT,
    CurveError,
    CurveSpec,
    InvariantViolation,
    RecordWorker,
    check_record,
    cm_trace_fast,
    count_points_bsgs,
    count_points_enumeration,
)
from .division import cubic_root_count, estimate_table, splits_completely
from .presets import DEFAULT_PRESET, load_catalog, presets
from .primes import good_primes, iter_segments, parallel_map_records

log = logging.getLogger("cmgroups")


class ReportError(RuntimeError):
    pass


def cmd_compute(config: RunConfig) -> RecordCache:
    """Extend the on-disk cache to cover all good p <= xmax; reruns only fill the gap."""
    path = cache_path(config.cache_dir, config.curve)
    cache = read_cache(path, config.curve) if path.exists() else empty_cache(config.curve)
    cache.computed = 0
    if cache.x_max >= config.xmax:
        log.info("cache %s already covers x <= %d", path, cache.x_max)
        return cache
    worker = RecordWorker(config.curve, config.crosscheck_rate)
    start = max(cache.x_max + 1, 2)
    for seg in iter_segments(start, config.xmax + 1, config.segment):
        primes = good_primes(seg, config.curve).primes
        recs = parallel_map_records(primes, worker, config.workers)
        cache.extend(recs, seg.hi - 1)
        cache.computed += len(recs)
        cache.write(path)
        log.info("computed %d records in [%d, %d)", len(recs), seg.lo, seg.hi)
    return cache


def _load(config: RunConfig, need: int) -> RecordCache:
    path = cache_path(config.cache_dir, config.curve)
    if not path.exists():
        raise ReportError(f"no cache at {path}; run `cmgroups compute --xmax {need}` first")
    cache = read_cache(path, config.curve)
    if cache.x_max < need:
        raise ReportError(f"cache covers x <= {cache.x_max} but x = {need} is required; run compute with --xmax {need}")
    return cache


@dataclass
class ReportResult:
    report: object
    verdicts: list
    json_path: Path
    csv_path: Path

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)


def build_report(config: RunConfig, cache: RecordCache | None = None) -> ReportResult:
    xmax = config.checkpoints[-1]
    cache = cache or _load(config, xmax)
    if cache.x_max < xmax:
        raise ReportError(f"cache covers x <= {cache.x_max} but x = {xmax} is required")
    records = [r for r in cache.records() if r.p <= xmax]
    report = aggregate(records, config.curve, config.checkpoints, config.K)
    ce = c_E_truncated(config.curve, config.K, estimate_table(config.curve, config.K, records, xmax))
    verdicts = theorem_reports(report, ce) + nk_sanity(config.curve, records, xmax)
    payload = report.to_json()
    payload["c_E"] = {
        "K": ce.K,
        "value": ce.value,
        "sigma": ce.sigma,
        "tail": ce.tail,
        "envelope_floor": ce.envelope_floor,
        "terms": [{"k": k, "g": g, "term": t} for k, g, t in ce.terms],
    }
    payload["verdicts"] = [{"name": v.name, "passed": v.passed, "detail": v.detail} for v in verdicts]
    config.out.mkdir(parents=True, exist_ok=True)
    json_path = config.out / "report.json"
    csv_path = config.out / "report.csv"
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in report.rows:
        w.writerow(row.csv_values())
    csv_path.write_text(buf.getvalue())
    return ReportResult(report, verdicts, json_path, csv_path)


def cmd_report(config: RunConfig, cache: RecordCache | None = None) -> int:
    try:
        result = build_report(config, cache)
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1
    for v in result.verdicts:
        print(f"[{'PASS' if v.passed else 'FAIL'}] {v.name}: {v.detail}")
    print(f"wrote {result.json_path} and {result.csv_path}")
    return 0 if result.passed else 1


@dataclass
class Check:
    name: str
    cases: int
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures


def verify_records(config: RunConfig, cache: RecordCache) -> list[Check]:
    curve = config.curve
    records = cache.records()
    checks = []

    bad = []
    for r in records:
        try:
            check_record(r)
            weil_check(r)
        except InvariantViolation:
            bad.append(r.p)
    checks.append(Check("record invariants (d*e=n, d|e, d|p-1, Hasse, Weil)", len(records), bad))

    small = [r for r in records if r.p <= config.dual_oracle_limit]
    mism, cases = [], 0
    for r in small:
        for k in config.dual_oracle_k:
            if k % r.p == 0:
                continue
            cases += 1
            if (r.d_p % k == 0) != splits_completely(curve, k, r.p):
                mism.append((r.p, k))
    checks.append(Check(f"k | d_p <=> E[k] rational, k in {list(config.dual_oracle_k)}", cases, mism))

    two_d = sum(1 for r in small if r.d_p % 2 == 0)
    two_c = sum(1 for r in small if cubic_root_count(curve, r.p) == 3)
    checks.append(Check("2 | d_p count equals cubic splitting count", len(small), [] if two_d == two_c else [(two_d, two_c)]))

    worker = RecordWorker(curve, config.crosscheck_rate)
    sample = [r for r in records if r.p <= config.dual_oracle_limit or worker.wants_crosscheck(r.p)]
    tri = []
    for r in sample:
        try:
            counts = {"cached": r.n, "bsgs": count_points_bsgs(curve, r.p), "cm_fast": r.p + 1 - cm_trace_fast(curve, r.p)}
            if r.p <= ENUMERATION_LIMIT:
                counts["enumeration"] = count_points_enumeration(curve, r.p)
        except CurveError as exc:
            tri.append((r.p, str(exc)))
            continue
        if len(set(counts.values())) != 1:
            tri.append((r.p, counts))
    checks.append(Check("point-count oracles agree (enumeration/bsgs/cm_fast/cache)", len(sample), tri))
    return checks


def cmd_verify(config: RunConfig, cache: RecordCache | None = None) -> int:
    cache = cache or _load(config, 3)
    checks = verify_records(config, cache)
    width = max(len(c.name) for c in checks)
    print(f"{'check':<{width}}  {'cases':>7}  {'fail':>5}  status")
    for c in checks:
        print(f"{c.name:<{width}}  {c.cases:>7}  {len(c.failures):>5}  {'ok' if c.passed else 'MISMATCH'}")
        for f in c.failures[:20]:
            print(f"    offending: {f}")
    return 0 if all(c.passed for c in checks) else 1


def cmd_presets() -> int:
    cat = load_catalog()
    print(cat["source"])
    for label, c in presets().items():
        print(f"{label:8s} d_K={c.d_K:5d}  N={c.conductor:6d}  y^2 = x^3 + ({c.a4}) x + ({c.a6})")
    return 0


def _curve_from_args(args) -> CurveSpec:
    literal = [args.a4, args.a6, args.conductor, args.disc]
    if any(v is not None for v in literal):
        if any(v is None for v in literal):
            raise SystemExit("ad hoc curves need all of --a4, --a6, --conductor, --disc")
        return CurveSpec(args.a4, args.a6, args.conductor, args.disc, args.label or "adhoc")
    return presets()[args.curve] if args.curve in presets() else _bad_preset(args.curve)


def _bad_preset(label):
    raise SystemExit(f"unknown preset {label!r}; see `cmgroups presets`")


def _parse_ints(text: str) -> tuple[int, ...]:
    return tuple(int(float(t)) for t in text.split(",") if t.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cmgroups",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--curve", default=DEFAULT_PRESET, help="preset label, e.g. cm-4 (default) or cm-163")
    common.add_argument("--a4", type=int)
    common.add_argument("--a6", type=int)
    common.add_argument("--conductor", type=int)
    common.add_argument("--disc", type=int, help="CM discriminant d_K of an ad hoc curve")
    common.add_argument("--label", help="label for an ad hoc curve")
    common.add_argument("--xmax", type=lambda s: int(float(s)), default=100_000, help="largest prime bound (accepts 1e6)")
    common.add_argument("--checkpoints", type=_parse_ints, default=(), help="comma-separated x values")
    common.add_argument("--workers", type=int, help="worker processes (env CMGROUPS_WORKERS)")
    common.add_argument("--segment", type=int, default=None, help="sieve segment length")
    common.add_argument("--K", type=int, default=None, help="truncation point for c_E")
    common.add_argument("--cache-dir", type=Path, help="record cache directory (env CMGROUPS_CACHE_DIR)")
    common.add_argument("--out", type=Path, default=Path("report"), help="report output directory")
    common.add_argument("--crosscheck-rate", type=float, default=0.01)
    common.add_argument("--dual-oracle-k", type=_parse_ints, default=(2, 3, 4, 5))
    common.add_argument("--dual-oracle-limit", type=int, default=10_000)
    common.add_argument("-v", "--verbose", action="store_true")
    for name, hlp in (
        ("compute", "extend the record cache to --xmax"),
        ("report", "write report.json and report.csv; exit status is the verdict"),
        ("verify", "cross-check cached records against independent oracles"),
    ):
        sub.add_parser(name, parents=[common], help=hlp, description=hlp)
    sub.add_parser("presets", help="list the preset curves")
    return parser


def config_from_args(args) -> RunConfig:
    kw = dict(
        curve=_curve_from_args(args),
        xmax=args.xmax,
        checkpoints=args.checkpoints,
        out=args.out,
        crosscheck_rate=args.crosscheck_rate,
        dual_oracle_k=args.dual_oracle_k,
        dual_oracle_limit=args.dual_oracle_limit,
    )
    for key, val in (("workers", args.workers), ("segment", args.segment), ("K", args.K), ("cache_dir", args.cache_dir)):
        if val is not None:
            kw[key] = val
    return RunConfig(**kw)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        return cmd_presets()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        config = config_from_args(args)
        if args.command == "compute":
            cache = cmd_compute(config)
            print(f"cache covers x <= {cache.x_max}: {len(cache)} records ({cache.computed} new)")
            return 0
        if args.command == "report":
            return cmd_report(config)
        return cmd_verify(config)
    except (ReportError, CacheMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
