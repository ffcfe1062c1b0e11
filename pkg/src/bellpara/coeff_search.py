"""Search for coefficients with a smaller constant than the defaults.

Feasibility is empirical: two closed-form lower bounds on ``C`` and ``A``
plus a sampled PSD scan of ``M``.  With ``B = 1`` the constant is
``max(A p, q, C r)``, so the search pushes ``A`` down by bisection for each
``C`` on a grid, then alternates coordinate bisections.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core_bellman import Coefficients, Exponents, c_constant, coefficients_default
from .errors import SearchFailure
from .psd_verifier import LOG_RANGE, TOL_ABS, TOL_REL, scan_regions

VALIDATION_OFFSET = 1_000_003


@dataclass(frozen=True)
class FeasibilitySpec:
    exponents: Exponents
    samples_per_region: int = 10_000
    seed: int = 0
    tol_abs: float = TOL_ABS
    tol_rel: float = TOL_REL
    log_range: tuple = LOG_RANGE
    threads: int = 1

    def __post_init__(self):
        if self.samples_per_region < 1:
            raise ValueError("samples_per_region must be >= 1")

    def reseeded(self, seed: int) -> "FeasibilitySpec":
        return FeasibilitySpec(self.exponents, self.samples_per_region, seed, self.tol_abs,
                               self.tol_rel, self.log_range, self.threads)


@dataclass
class Feasibility:
    feasible: bool
    witness: dict | None = None

    def __bool__(self):
        return self.feasible


def lower_bounds(e: Exponents, B: float = 1.0) -> tuple[float, float]:
    """Necessary lower bounds ``(A_min, C_min)`` for the given ``B``."""
    p, q, r = float(e.p), float(e.q), float(e.r)
    return B * (q + r) / (2 * r * (p - 1)), B * (q - r) / (2 * r)


def feasibility_check(c: Coefficients, spec: FeasibilitySpec) -> Feasibility:
    e = spec.exponents
    a_min, c_min = lower_bounds(e, c.B)
    if c.C < c_min:
        return Feasibility(False, {"condition": "C >= B(q-r)/(2r)", "C": c.C, "bound": c_min})
    if c.A < a_min:
        return Feasibility(False, {"condition": "A >= B(q+r)/(2r(p-1))", "A": c.A, "bound": a_min})
    reports = scan_regions(c, e, spec.samples_per_region, spec.seed, spec.tol_abs, spec.tol_rel,
                           spec.threads, log_range=spec.log_range)
    for rep in reports:
        if rep.violation_count:
            t, s, m1, m2, m3 = (float(v) for v in rep.violations[0])
            return Feasibility(False, {"condition": "psd", "region": rep.region.name,
                                       "sign": rep.sign, "t": t, "s": s,
                                       "minors": [m1, m2, m3]})
    return Feasibility(True)


@dataclass
class SearchReport:
    coefficients: Coefficients
    constant: float
    default_constant: float
    evaluations: int
    validated: bool
    validation_seed: int
    samples_per_region: int
    label: str = "empirically feasible"
    history: list = field(default_factory=list, repr=False)  # (A, C, feasible)


class _Budget:
    def __init__(self, spec: FeasibilitySpec, budget: int):
        self.spec, self.left, self.used, self.history = spec, budget, 0, []

    def feasible(self, A: float, C: float) -> bool | None:
        if self.left <= 0:
            return None
        self.left -= 1
        self.used += 1
        ok = feasibility_check(Coefficients(A, 1.0, C), self.spec).feasible
        self.history.append((A, C, ok))
        return ok


def _bisect(test, lo: float, hi: float, rel: float) -> float | None:
    """Smallest feasible value in ``[lo, hi]`` assuming upward monotonicity.

    ``hi`` must be feasible; returns ``hi`` when the budget runs out.
    """
    ok = test(lo)
    if ok is None:
        return hi
    if ok:
        return lo
    while hi / lo > 1 + rel:
        mid = np.sqrt(lo * hi)
        res = test(mid)
        if res is None:
            break
        if res:
            hi = mid
        else:
            lo = mid
    return hi


def search_coefficients(e: Exponents, spec: FeasibilitySpec | None = None, budget: int = 80,
                        c_grid: int = 5, rel: float = 1e-3, max_expand: int = 8) -> SearchReport:
    """Minimize ``max(A p, q, C r)`` over empirically feasible ``(A, 1, C)``."""
    spec = spec or FeasibilitySpec(e)
    defaults = coefficients_default(e)
    big_def = c_constant(defaults, e)
    val_seed = spec.seed + VALIDATION_OFFSET
    p, q, r = float(e.p), float(e.q), float(e.r)
    bud = _Budget(spec, budget)

    def report(c: Coefficients, validated: bool) -> SearchReport:
        return SearchReport(c, c_constant(c, e), big_def, bud.used, validated, val_seed,
                            spec.samples_per_region, history=bud.history)

    first = bud.feasible(defaults.A, defaults.C)
    if first is None:
        return report(defaults, False)
    if not first:
        raise SearchFailure("default coefficients fail the sampled scan; check tolerances")

    a_min, c_min = lower_bounds(e)
    a_cap = big_def / p
    best = (defaults.A, defaults.C)

    def objective(A, C):
        return max(A * p, q, C * r)

    grid = np.geomspace(max(c_min, 1e-12), defaults.C, c_grid)
    for C in grid[::-1]:
        if bud.feasible(a_cap, C) is not True:
            continue
        A = _bisect(lambda a: bud.feasible(a, C), max(a_min, 1e-12), a_cap, rel)
        if objective(A, C) < objective(*best):
            best = (A, C)
    # coordinate passes: shrink C at the best A, then A at that C
    for _ in range(2):
        A, C = best
        C2 = _bisect(lambda cc: bud.feasible(A, cc), max(c_min, 1e-12), C, rel)
        A2 = _bisect(lambda a: bud.feasible(a, C2), max(a_min, 1e-12), A, rel)
        if objective(A2, C2) <= objective(*best):
            best = (A2, C2)

    # fresh-sample validation; expand by growing margins until it passes
    val_spec = spec.reseeded(val_seed)
    A, C = best
    margin = rel
    for _ in range(max_expand):
        cand = Coefficients(min(A, a_cap), 1.0, min(C, defaults.C))
        if feasibility_check(cand, val_spec).feasible:
            return report(cand, True)
        A, C = best[0] * (1 + margin), best[1] * (1 + margin)
        margin *= 4
    if feasibility_check(defaults, val_spec).feasible:
        return report(defaults, True)
    raise SearchFailure("defaults fail validation on a fresh sample set")
