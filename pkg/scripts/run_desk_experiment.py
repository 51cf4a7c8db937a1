#!/usr/bin/env python3
"""Full desk run for one curve: compute records, verify them, write the report.

    python3 scripts/run_desk_experiment.py --curve cm-4 --xmax 1e6 --workers 4
"""

import argparse
import sys
import time
from pathlib import Path

from cmgroups.cli import build_report, cmd_compute, verify_records
from cmgroups.config import RunConfig
from cmgroups.presets import get_preset


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--curve", default="cm-4")
    ap.add_argument("--xmax", type=lambda s: int(float(s)), default=10**6)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--cache-dir", type=Path, default=Path(".cmgroups-cache"))
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()

    config = RunConfig(
        curve=get_preset(args.curve),
        xmax=args.xmax,
        workers=args.workers,
        cache_dir=args.cache_dir,
        out=args.out or Path("runs") / f"{args.curve}-{args.xmax}",
    )
    t0 = time.perf_counter()
    cache = cmd_compute(config)
    print(f"records: {len(cache)} ({cache.computed} new) in {time.perf_counter() - t0:.1f}s")

    for c in verify_records(config, cache):
        print(f"  verify {'ok      ' if c.passed else 'MISMATCH'} {c.name} ({c.cases} cases)")

    result = build_report(config, cache)
    print(f"{'x':>9} {'R(x)':>10} {'c_E':>10} {'+-':>8} {'sum_d/(x loglog x)':>19} {'sup k^2 pi_E/x':>15}")
    for r in result.report.rows:
        thm = f"{r.thm12_ratio:.5f}" if r.thm12_ratio is not None else "-"
        print(f"{r.x:>9} {r.R:>10.6f} {r.c_E_trunc:>10.6f} {r.sigma_total:>8.4f} {thm:>19} {r.lemma23_sup:>15.4f}")
    for v in result.verdicts:
        print(f"[{'PASS' if v.passed else 'FAIL'}] {v.name}: {v.detail}")
    print(f"wrote {result.json_path}, {result.csv_path}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
