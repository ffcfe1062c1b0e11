"""Worst normalized margin of every property scan, defaults versus unit coefficients."""

import argparse

from bellpara.core_bellman import Coefficients, Exponents, coefficients_default
from bellpara.property_suite import SuiteConfig, run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=20_000)
    ap.add_argument("--p", type=float, default=2.0)
    ap.add_argument("--q", type=float, default=6.0)
    ap.add_argument("--r", type=float, default=3.0)
    args = ap.parse_args()
    e = Exponents(args.p, args.q, args.r)
    cfg = SuiteConfig(samples=args.samples, c1_samples=500, mollified_samples=200)
    rows = {}
    for label, c in (("default", coefficients_default(e)), ("unit", Coefficients(1, 1, 1))):
        for res in run_suite(c, e, cfg):
            rows.setdefault(res.name, {})[label] = res
    print(f"{'property':>16} {'default margin':>15} {'unit margin':>12} {'unit bad':>9}")
    for name, d in rows.items():
        print(f"{name:>16} {d['default'].worst_margin:15.3g} {d['unit'].worst_margin:12.3g} "
              f"{d['unit'].violations.shape[0]:>9}")


if __name__ == "__main__":
    main()
