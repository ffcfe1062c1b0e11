"""Two quadratures of the continuous paraproduct form under panel refinement."""

import argparse

import numpy as np

from bellpara.heat_model import Grid1D, lambda_heat, lambda_heat_bump, random_bump


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--triples", type=int, default=2)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"{'triple':>6} {'panels':>7} {'log-t form':>14} {'s form':>14} {'rel diff':>10}")
    for i in range(args.triples):
        f, g, h = random_bump(rng), random_bump(rng), random_bump(rng)
        grid = Grid1D.covering(f, g, h)
        for n in (4, 8, 16, 32):
            a = lambda_heat(f, g, h, grid, t_panels=n)
            b = lambda_heat_bump(f, g, h, grid, s_panels=n)
            print(f"{i:>6} {n:>7} {a:14.8g} {b:14.8g} {abs(a - b) / max(abs(a), 1e-300):10.2e}")


if __name__ == "__main__":
    main()
