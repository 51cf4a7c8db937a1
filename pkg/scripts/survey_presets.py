#!/usr/bin/env python3
"""R(x) against the truncated c_E and the sampled n_k for every preset curve.

Prints one row per curve; records are cached, so reruns are cheap.

    python3 scripts/survey_presets.py --xmax 1e5
"""

import argparse
from pathlib import Path

from cmgroups.asymptotics import DEFAULT_K, aggregate, c_E_truncated
from cmgroups.cli import cmd_compute
from cmgroups.config import RunConfig
from cmgroups.division import estimate_table
from cmgroups.presets import presets

SHOW_K = (2, 3, 4, 5, 7, 8)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--xmax", type=lambda s: int(float(s)), default=10**5)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--cache-dir", type=Path, default=Path(".cmgroups-cache"))
    args = ap.parse_args()

    head = f"{'curve':8} {'d_K':>5} {'R(x)':>9} {'c_E':>9} {'sigma':>7} {'tail':>7} " + " ".join(f"{'n_' + str(k):>7}" for k in SHOW_K)
    print(head)
    for label, curve in sorted(presets().items(), key=lambda kv: -kv[1].d_K):
        config = RunConfig(curve=curve, xmax=args.xmax, workers=args.workers, cache_dir=args.cache_dir)
        records = [r for r in cmd_compute(config).records() if r.p <= args.xmax]
        row = aggregate(records, curve, [args.xmax]).rows[-1]
        est = estimate_table(curve, DEFAULT_K, records, args.xmax)
        ce = c_E_truncated(curve, DEFAULT_K, est)
        nks = " ".join(f"{est[k].value:>7.2f}" for k in SHOW_K)
        print(f"{label:8} {curve.d_K:>5} {row.R:>9.5f} {ce.value:>9.5f} {ce.sigma:>7.4f} {ce.tail:>7.4f} {nks}")


if __name__ == "__main__":
    main()
