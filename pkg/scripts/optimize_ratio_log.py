"""Search for a maximiser with a vanishing-at-infinity g and compare with baselines."""

import argparse

from logmoser.cli import json_text
from logmoser.constants import make_dimension_context, parse_nonlinearity
from logmoser.optimize import OptimizerConfig, maximize_phi
from logmoser.profiles import to_radial, write_profile


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--g", default="ratio-log:1")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--iters", type=int, default=60)
    ap.add_argument("--restarts", type=int, default=3)
    ap.add_argument("--out", default=None, help="write the best profile (radial form) here")
    args = ap.parse_args()

    ctx = make_dimension_context(args.dim)
    nl = parse_nonlinearity(args.g, ctx)
    res = maximize_phi(ctx, nl, OptimizerConfig(seed=args.seed, max_iters=args.iters, restarts=args.restarts))
    if args.out:
        write_profile(args.out, to_radial(res.profile))
    summary = res.summary()
    summary.pop("trace")
    print(json_text(summary))


if __name__ == "__main__":
    main()
