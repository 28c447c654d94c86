"""Phi along the sharp concentrating sequence against the threshold.

    python3 scripts/scs_sweep.py --g const:1 --s 0.1
    python3 scripts/scs_sweep.py --g shift:1,0.4,1 --s 0.3
"""

import argparse
import sys

import numpy as np

from logmoser.blowup import convergence_report, reports_to_csv
from logmoser.constants import make_dimension_context, parse_nonlinearity


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--g", default="const:1")
    ap.add_argument("--s", type=float, default=0.1)
    ap.add_argument("--decades", type=int, nargs=2, default=(2, 5))
    ap.add_argument("--per-decade", type=int, default=2)
    args = ap.parse_args()

    ctx = make_dimension_context(args.dim)
    nl = parse_nonlinearity(args.g, ctx)
    lo, hi = args.decades
    ns = np.unique(np.round(np.logspace(lo, hi, (hi - lo) * args.per_decade + 1)).astype(int))
    reps = convergence_report(ctx, nl, ns, args.s)
    sys.stdout.write(reports_to_csv(reps))
    gaps = [(r.n, r.threshold - r.phi) for r in reps if r.error is None]
    for n, gap in gaps:
        print(f"# n={n:>8d} threshold - phi = {gap:+.6g}", file=sys.stderr)


if __name__ == "__main__":
    main()
