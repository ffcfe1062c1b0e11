"""Lower bounds for the abstract dyadic Bellman function as the tree depth grows."""

import argparse

import numpy as np

from bellpara import sampling
from bellpara.core_bellman import Exponents, coefficients_default, eval_B
from bellpara.dyadic_model import abstract_bellman_lower
from bellpara.errors import InfeasibleMoments


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=5)
    ap.add_argument("--max-depth", type=int, default=6)
    ap.add_argument("--iters", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    e = Exponents(2, 6, 3)
    c = coefficients_default(e)
    rng = np.random.default_rng(args.seed)
    pts = sampling.domain_points(e, sampling.loguniform(rng, (args.points, 3), 1e-1, 1e1), rng)
    depths = range(1, args.max_depth + 1)
    print("point".ljust(8) + "".join(f"{'d=' + str(d):>11}" for d in depths) + f"{'B(x)':>12}")
    for i, x in enumerate(pts):
        vals = []
        for d in depths:
            try:
                vals.append(abstract_bellman_lower(c, e, x, d, args.iters, args.seed + i))
            except InfeasibleMoments:
                vals.append(float("nan"))
        print(f"{i:<8}" + "".join(f"{v:11.4g}" for v in vals) + f"{float(eval_B(c, e, x)):12.4g}")


if __name__ == "__main__":
    main()
