"""Acceptance criteria at their stated sizes, tolerances and time budgets."""

import time
from fractions import Fraction

import numpy as np
import pytest

from bellpara.cli import main
from bellpara.coeff_search import FeasibilitySpec, feasibility_check, search_coefficients
from bellpara.core_bellman import Exponents, c_constant, coefficients_default, default_coefficient_fractions
from bellpara.dyadic_model import DyadicConfig, bracket_bellman
from bellpara.dyadic_model import run_battery as dyadic_battery
from bellpara.heat_model import HeatConfig
from bellpara.heat_model import run_battery as heat_battery
from bellpara.martingale_sim import MartingaleConfig
from bellpara.martingale_sim import run_battery as martingale_battery
from bellpara.property_suite import SuiteConfig, check_C1_across_surfaces, run_suite
from bellpara.psd_verifier import scan_regions
from bellpara.sampling import SURFACES

from conftest import TRIPLES

E = Exponents(2.0, 6.0, 3.0)
C = coefficients_default(E)


class Clock:
    def __init__(self, budget):
        self.budget = budget
        self.start = time.perf_counter()

    @property
    def elapsed(self):
        return time.perf_counter() - self.start

    def check(self):
        assert self.elapsed < self.budget, f"took {self.elapsed:.1f}s, budget {self.budget}s"


def _failing(results):
    return [(r.name, r.worst_margin, r.violations.shape[0]) for r in results if not r.passed]


@pytest.mark.criterion(1, "default coefficients exact at (2,6,3)")
def test_criterion_01_coefficients(request):
    A, B, Cc = default_coefficient_fractions(E)
    assert (A, B, Cc) == (57024, 1, 1188)
    assert all(isinstance(v, Fraction) for v in (A, B, Cc))
    assert max(2 * A, 6 * B, 3 * Cc) == 114048
    assert (C.A, C.B, C.C) == (57024, 1, 1188) and c_constant(C, E) == 114048
    request.node.criterion_detail = "A=57024 B=1 C=1188 const=114048"


@pytest.mark.criterion(2, "C1 gluing on three surfaces for three triples")
def test_criterion_02_regularity(request):
    clock = Clock(10)
    res = []
    for pqr in TRIPLES:
        e = Exponents(*pqr)
        for k, surface in enumerate(SURFACES):
            res.append(check_C1_across_surfaces(coefficients_default(e), e, surface, 1000, seed=k,
                                                tol_branch=1e-10, tol_fd=1e-5))
    assert not _failing(res), _failing(res)
    clock.check()
    request.node.criterion_detail = f"{len(res)} scans x 1000 points, {clock.elapsed:.1f}s"


@pytest.mark.criterion(3, "PSD scan, 1e5 samples per region and sign, three triples")
def test_criterion_03_psd(request):
    clock = Clock(60)
    worst = []
    for pqr in TRIPLES:
        e = Exponents(*pqr)
        reports = scan_regions(coefficients_default(e), e, 100_000, seed=0)
        bad = [(r.region.name, r.sign, r.violation_count, r.disagreements) for r in reports if not r.passed]
        assert not bad, (pqr, bad)
        worst.append(min(r.min_minor_scaled for r in reports))
    clock.check()
    request.node.criterion_detail = f"min scaled minor {min(worst):.3g}, {clock.elapsed:.1f}s"


@pytest.mark.criterion(4, "property scans, 1e5 instances each")
def test_criterion_04_properties(request):
    clock = Clock(60)
    names = ("A2", "A3", "A3_inf", "A4", "B3", "B4")
    res = run_suite(C, E, SuiteConfig(samples=100_000, tol=1e-9), names=names)
    assert [r.samples for r in res] == [100_000] * len(names)
    assert not _failing(res), _failing(res)
    clock.check()
    request.node.criterion_detail = f"{len(names)} properties, {clock.elapsed:.1f}s"


@pytest.mark.criterion(5, "dyadic identities and estimates, 1e4 triples")
def test_criterion_05_dyadic(request):
    clock = Clock(60)
    res = dyadic_battery(C, E, DyadicConfig(trials=10_000, max_depth=10, identity_tol=1e-12, tol=1e-9))
    assert not _failing(res), _failing(res)
    assert {r.name for r in res} >= {"scaling", "duality", "square_fn", "estimate", "induction"}
    clock.check()
    request.node.criterion_detail = f"{clock.elapsed:.1f}s"


@pytest.mark.criterion(6, "abstract Bellman lower bounds below the explicit function, 1e3 points")
def test_criterion_06_bracket(request):
    clock = Clock(300)
    res = bracket_bellman(C, E, DyadicConfig(bellman_points=1000, bellman_depth=6, bellman_iters=20))
    assert res.samples + res.skipped == 1000
    assert res.skipped == 0
    assert res.passed, res
    clock.check()
    request.node.criterion_detail = f"worst normalized gap {res.worst_margin:.3g}, {clock.elapsed:.1f}s"


@pytest.mark.criterion(7, "martingale identities, 1e4 depth-8 triples, 1e5 Brownian paths")
def test_criterion_07_martingale(request):
    clock = Clock(300)
    res = martingale_battery(C, E, MartingaleConfig(trials=10_000, depth=8, paths=100_000, sigmas=3.0))
    assert not _failing(res), _failing(res)
    clock.check()
    request.node.criterion_detail = f"{clock.elapsed:.1f}s"


@pytest.mark.criterion(8, "heat extension, paraproduct forms and pointwise defect, 10 triples")
def test_criterion_08_heat(request):
    clock = Clock(300)
    res = heat_battery(C, E, HeatConfig(triples=10, closed_form_tol=1e-8, form_tol=1e-3))
    assert not _failing(res), _failing(res)
    clock.check()
    request.node.criterion_detail = f"{clock.elapsed:.1f}s"


@pytest.mark.criterion(9, "coefficient search validated with constant <= 114048")
def test_criterion_09_search(request):
    clock = Clock(600)
    spec = FeasibilitySpec(E, samples_per_region=10_000, seed=0)
    rep = search_coefficients(E, spec)
    assert rep.validated
    assert rep.constant <= 114048
    fresh = spec.reseeded(rep.validation_seed)
    assert feasibility_check(rep.coefficients, fresh)
    clock.check()
    request.node.criterion_detail = (f"A={rep.coefficients.A:.6g} C={rep.coefficients.C:.6g} "
                                     f"const={rep.constant:.6g}, {clock.elapsed:.1f}s")


DETERMINISM_RUNS = {
    "eval": ["--point", "1,1.3,1.1,2,6,2"],
    "verify-psd": ["--samples", "20000", "--seed", "7"],
    "verify-properties": ["--samples", "5000", "--c1-samples", "200", "--mollified-samples", "100"],
    "dyadic-test": ["--trials", "300", "--bellman-points", "5", "--bellman-depth", "4"],
    "martingale-sim": ["--trials", "100", "--paths", "20000"],
    "heat-test": ["--triples", "2", "--lambda-triples", "1"],
    "search-coeffs": ["--samples", "1000", "--budget", "20"],
}


@pytest.mark.criterion(10, "reports byte-identical across runs and thread counts")
def test_criterion_10_determinism(request, tmp_path):
    for cmd, extra in DETERMINISM_RUNS.items():
        blobs = []
        for run, threads in enumerate((1, 1, 3)):
            out = tmp_path / f"{cmd}-{run}.json"
            assert main([cmd, *extra, "--threads", str(threads), "--out", str(out)]) == 0
            blobs.append((out.read_bytes(), out.with_name(out.stem + ".witnesses.csv").read_bytes()))
        assert blobs[0] == blobs[1] == blobs[2], cmd
    request.node.criterion_detail = f"{len(DETERMINISM_RUNS)} commands x 3 runs"
