"""Minimum scaled leading minor of M per region and sign, for several exponent triples."""

import argparse

from bellpara.core_bellman import Exponents, coefficients_default
from bellpara.psd_verifier import scan_regions

TRIPLES = [(2, 6, 3), (3, 6, 2), (4, 8, 1.6), (2.5, 4, 20 / 7)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    print(f"{'p,q,r':>14} {'region':>8} {'sign':>4} {'min minor':>11} {'min eig':>11} {'bad':>4}")
    for pqr in TRIPLES:
        e = Exponents(*pqr)
        for rep in scan_regions(coefficients_default(e), e, args.samples, args.seed):
            print(f"{','.join(f'{v:g}' for v in pqr):>14} {rep.region.name:>8} {rep.sign:>4} "
                  f"{rep.min_minor_scaled:11.4g} {rep.min_eig_scaled:11.4g} {rep.violation_count:>4}")


if __name__ == "__main__":
    main()
