"""Riemann sums of B dB on refined partitions against the Ito integral (B_1^2 - 1)/2."""

import argparse

from bellpara.martingale_sim import AffineMartingale, brownian_riemann_approx, ito_square


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=50_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    B = AffineMartingale()
    rep = brownian_riemann_approx(B, B, 1.0, (4, 16, 64, 256, 1024), args.paths, args.seed,
                                  reference=ito_square)
    print(f"{'m':>6} {'E|err|^2':>12} {'stderr':>10} {'1/(2m)':>10} {'Var(sum)':>10} {'1/2-1/(2m)':>11}")
    for i, m in enumerate(rep.partitions):
        print(f"{m:>6} {rep.error_msq[i]:12.4e} {rep.error_msq_stderr[i]:10.2e} {1 / (2 * m):10.4e} "
              f"{rep.variance[i]:10.4f} {0.5 - 1 / (2 * m):11.4f}")


if __name__ == "__main__":
    main()
