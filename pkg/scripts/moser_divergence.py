"""Phi along the Moser sequence: unbounded for log-power g, bounded for constant g."""

import argparse

from logmoser.constants import make_dimension_context, parse_nonlinearity
from logmoser.functional import phi_transformed
from logmoser.profiles import dirichlet_radial, moser_profile, to_transformed


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dim", type=int, default=2)
    ap.add_argument("--g", nargs="+", default=["log-pow:2.2", "const:1"])
    ap.add_argument("--max-exp", type=int, default=5)
    args = ap.parse_args()

    ctx = make_dimension_context(args.dim)
    print("g,n,dirichlet,phi")
    for spec in args.g:
        nl = parse_nonlinearity(spec, ctx)
        for k in range(1, args.max_exp + 1):
            m = moser_profile(ctx, 10**k)
            phi = phi_transformed(ctx, nl, to_transformed(m))
            print(f"{spec},{10**k},{dirichlet_radial(m):.17g},{phi:.17g}")


if __name__ == "__main__":
    main()
