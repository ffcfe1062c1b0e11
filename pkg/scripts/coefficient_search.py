"""Search for coefficients with a smaller constant and print the path taken."""

import argparse

from bellpara.coeff_search import FeasibilitySpec, search_coefficients
from bellpara.core_bellman import Exponents


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=5_000, help="per region and sign")
    ap.add_argument("--budget", type=int, default=80)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--q", type=float, default=6.0)
    ap.add_argument("--r", type=float, default=3.0)
    ap.add_argument("--verbose", action="store_true", help="print every feasibility query")
    args = ap.parse_args()
    e = Exponents(args.p, args.q, args.r)
    rep = search_coefficients(e, FeasibilitySpec(e, args.samples, args.seed), budget=args.budget)
    if args.verbose:
        for A, C, ok in rep.history:
            print(f"  A={A:<14.6g} C={C:<14.6g} {'feasible' if ok else 'infeasible'}")
    c = rep.coefficients
    print(f"default constant : {rep.default_constant:.6g}")
    print(f"found            : A={c.A:.6g} B={c.B:g} C={c.C:.6g} constant={rep.constant:.6g}")
    print(f"queries          : {rep.evaluations}, validated on seed {rep.validation_seed}: {rep.validated}")
    print(f"status           : {rep.label}")


if __name__ == "__main__":
    main()
