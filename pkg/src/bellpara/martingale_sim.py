"""Martingale paraproducts on finite trees and on Brownian paths.

A ``Tree`` is a regular K-ary filtration: level ``k`` has ``K**k`` atoms and
each atom splits into ``K`` children with its own probabilities.  Martingales
are stored level by level as node-valued arrays; ``X[k]`` is obtained from
``X[k+1]`` by the conditional average, so the martingale property holds by
construction.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .core_bellman import Coefficients, Exponents, c_constant, eval_B
from .errors import DomainError, ProbabilityError, SimulationError

PROB_TOL = 1e-12
JENSEN_SLACK = 1e-12


@dataclass(frozen=True)
class Tree:
    """Regular filtration; ``probs[k]`` has shape ``(K**k, K)``."""

    depth: int
    branching: int = 2
    probs: tuple = field(default=(), repr=False)

    def __post_init__(self):
        K = self.branching
        if self.depth < 0 or K < 2:
            raise ValueError("need depth >= 0 and branching >= 2")
        if not self.probs:
            probs = tuple(np.full((K**k, K), 1.0 / K) for k in range(self.depth))
        else:
            probs = tuple(np.asarray(p, dtype=float) for p in self.probs)
        if len(probs) != self.depth:
            raise ProbabilityError(f"need {self.depth} probability levels, got {len(probs)}")
        for k, p in enumerate(probs):
            if p.shape != (K**k, K):
                raise ProbabilityError(f"level {k} probabilities need shape {(K**k, K)}")
            if np.any(p < 0) or np.any(np.abs(p.sum(axis=1) - 1) > PROB_TOL):
                raise ProbabilityError(f"level {k} split weights must be >= 0 and sum to 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def dyadic(cls, depth: int) -> "Tree":
        return cls(depth)

    @classmethod
    def random(cls, depth: int, branching: int, rng: np.random.Generator) -> "Tree":
        probs = []
        for k in range(depth):
            w = rng.uniform(0.05, 1.0, (branching**k, branching))
            probs.append(w / w.sum(axis=1, keepdims=True))
        return cls(depth, branching, tuple(probs))

    def weights(self, k: int) -> np.ndarray:
        """Probability of each level-k atom."""
        w = np.ones(1)
        for j in range(k):
            w = (w[:, None] * self.probs[j]).ravel()
        return w

    def condition(self, arr: np.ndarray, k: int) -> np.ndarray:
        """Conditional average of a level-(k+1) array onto level k."""
        K = self.branching
        return np.sum(arr.reshape(K**k, K) * self.probs[k], axis=1)

    def lift(self, arr: np.ndarray, k: int, n: int) -> np.ndarray:
        """Repeat a level-k array onto the atoms of level n >= k."""
        return np.repeat(arr, self.branching ** (n - k))


@dataclass(frozen=True)
class MartingaleTriple:
    tree: Tree
    X: tuple
    Y: tuple
    Z: tuple
    U: tuple | None = None
    V: tuple | None = None
    W: tuple | None = None

    @property
    def depth(self) -> int:
        return self.tree.depth

    def point(self, k: int) -> np.ndarray:
        """The six-component process at level k, shape ``(K**k, 6)``."""
        if self.U is None:
            raise ValueError("auxiliary martingales were not built")
        return np.stack([self.X[k], self.Y[k], self.Z[k], self.U[k], self.V[k], self.W[k]], axis=-1)

    def to_json(self, seed: int | None = None) -> str:
        data = {
            "depth": self.tree.depth,
            "branching": self.tree.branching,
            "probabilities": [p.tolist() for p in self.tree.probs],
            "terminal": {"X": self.X[-1].tolist(), "Y": self.Y[-1].tolist(), "Z": self.Z[-1].tolist()},
            "seed": seed,
        }
        return json.dumps(data)


def _levels(tree: Tree, terminal: np.ndarray) -> tuple:
    out = [np.asarray(terminal, dtype=float)]
    for k in range(tree.depth - 1, -1, -1):
        out.append(tree.condition(out[-1], k))
    return tuple(out[::-1])


def martingale_from_terminal(tree: Tree, x, y, z, e: Exponents | None = None,
                             signed: bool = False) -> MartingaleTriple:
    """Conditional-expectation martingales of the terminal variables.

    With exponents given, also builds ``U_k = E(X_n^p | F_k)`` and the
    analogous ``V``, ``W``.  Jensen's inequality keeps ``U_k >= X_k^p``; a
    rounding-level shortfall is clamped and anything larger is an error.
    """
    n_leaves = tree.branching**tree.depth
    terms = [np.asarray(a, dtype=float) for a in (x, y, z)]
    for a in terms:
        if a.shape != (n_leaves,):
            raise ValueError(f"terminal values need shape ({n_leaves},), got {a.shape}")
        if not signed and np.any(a < 0):
            raise ValueError("terminal values must be nonnegative")
    X, Y, Z = (_levels(tree, a) for a in terms)
    if e is None:
        return MartingaleTriple(tree, X, Y, Z)
    aux = []
    for lv, a, pw in zip((X, Y, Z), terms, e.powers):
        up = list(_levels(tree, np.abs(a) ** pw))
        for k in range(tree.depth + 1):
            lower = np.abs(lv[k]) ** pw
            short = lower - up[k]
            if np.any(short > JENSEN_SLACK * (1 + lower)):
                raise DomainError(f"level {k} power average below power of average")
            up[k] = np.maximum(up[k], lower)
        aux.append(tuple(up))
    return MartingaleTriple(tree, X, Y, Z, *aux)


def triple_from_json(text: str, e: Exponents | None = None) -> tuple[MartingaleTriple, int | None]:
    data = json.loads(text)
    tree = Tree(data["depth"], data["branching"], tuple(np.array(p) for p in data["probabilities"]))
    t = data["terminal"]
    signed = any(min(t[k]) < 0 for k in ("X", "Y", "Z"))
    return martingale_from_terminal(tree, t["X"], t["Y"], t["Z"], e, signed), data.get("seed")


def random_triple(rng: np.random.Generator, depth: int, e: Exponents | None = None,
                  branching: int = 2, random_probs: bool = False,
                  lo: float = 1e-2, hi: float = 1e2) -> MartingaleTriple:
    tree = Tree.random(depth, branching, rng) if random_probs else Tree(depth, branching)
    n = branching**depth
    vals = np.exp(rng.uniform(np.log(lo), np.log(hi), (3, n)))
    vals[rng.random((3, n)) < 0.05] = 0.0
    return martingale_from_terminal(tree, *vals, e)


# ---------------------------------------------------------------------------
# paraproduct and identities


def paraproduct_discrete(tri: MartingaleTriple, n: int | None = None, X=None, Y=None) -> np.ndarray:
    """``(X.Y)_n = sum_{k<=n} X_{k-1}(Y_k - Y_{k-1})`` on the level-n atoms."""
    tree = tri.tree
    X = tri.X if X is None else X
    Y = tri.Y if Y is None else Y
    n = tree.depth if n is None else n
    total = np.zeros(tree.branching**n)
    for k in range(1, n + 1):
        inc = X[k - 1].repeat(tree.branching) * (Y[k] - Y[k - 1].repeat(tree.branching))
        total += tree.lift(inc, k, n)
    return total


def _increment_terms(tri: MartingaleTriple, k: int, absolute: bool) -> np.ndarray:
    K = tri.tree.branching
    dy = tri.Y[k] - tri.Y[k - 1].repeat(K)
    dz = tri.Z[k] - tri.Z[k - 1].repeat(K)
    if absolute:
        dy, dz = np.abs(dy), np.abs(dz)
    return tri.X[k - 1].repeat(K) * dy * dz


class Defect(NamedTuple):
    defect: float
    scale: float


def dual_identity_check(tri: MartingaleTriple, n: int | None = None) -> Defect:
    """``|E((X.Y)_n Z_n) - sum_k E(X_{k-1} dY_k dZ_k)|`` with its natural scale."""
    tree = tri.tree
    n = tree.depth if n is None else n
    wn = tree.weights(n)
    prod = paraproduct_discrete(tri, n) * tri.Z[n]
    lhs = float(np.dot(wn, prod))
    rhs, scale = 0.0, float(np.dot(wn, np.abs(prod)))
    for k in range(1, n + 1):
        wk = tree.weights(k)
        terms = _increment_terms(tri, k, absolute=False)
        rhs += float(np.dot(wk, terms))
        scale += float(np.dot(wk, np.abs(terms)))
    return Defect(abs(lhs - rhs), scale)


class StepMargins(NamedTuple):
    margins: np.ndarray  # one per level-(k-1) atom
    scales: np.ndarray

    def ok(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.margins >= -tol * self.scales))


def supermartingale_step_check(c: Coefficients, e: Exponents, tri: MartingaleTriple, k: int) -> StepMargins:
    """``B(X_{k-1}) - E(B(X_k)|F_{k-1}) - (2/3) E(X_{k-1}|dY_k||dZ_k| | F_{k-1})`` per atom."""
    if not 1 <= k <= tri.depth:
        raise ValueError("need 1 <= k <= depth")
    tree = tri.tree
    b_prev = np.asarray(eval_B(c, e, tri.point(k - 1)))
    b_next = np.asarray(eval_B(c, e, tri.point(k)))
    cond_b = tree.condition(b_next, k - 1)
    cond_abs_b = tree.condition(np.abs(b_next), k - 1)
    para = tree.condition(_increment_terms(tri, k, absolute=True), k - 1)
    margins = b_prev - cond_b - (2.0 / 3.0) * para
    scales = 1.0 + np.abs(b_prev) + cond_abs_b + para
    return StepMargins(margins, scales)


@dataclass
class DualizedReport:
    paraproduct_mass: float      # (2/3) sum_k E(X_{k-1}|dY_k||dZ_k|)
    bellman_drop: float          # E B(X_0) - E B(X_n)
    bound: float                 # C (|X_n|_p^p/p + |Y_n|_q^q/q + |Z_n|_r^r/r)
    trilinear: float             # |E((X.Y)_n Z_n)|
    homogeneous_bound: float     # (3/2) C |X_n|_p |Y_n|_q |Z_n|_r
    scale: float
    step_ok: bool

    def ok(self, tol: float = 1e-9) -> bool:
        slack = tol * self.scale
        return (self.step_ok
                and self.bellman_drop >= self.paraproduct_mass - slack
                and self.paraproduct_mass <= self.bound + slack
                and self.trilinear <= self.homogeneous_bound + slack)


def verify_estimate_dualized(c: Coefficients, e: Exponents, tri: MartingaleTriple,
                             tol: float = 1e-9, check_steps: bool = True) -> DualizedReport:
    """Telescoped supermartingale bound and its homogenized trilinear form.

    Homogenizing ``(2/3) sum E(...) <= C (...)`` gives the trilinear bound
    with constant ``3C/2``; that is the constant checked here.
    """
    tree, n = tri.tree, tri.depth
    big = c_constant(c, e)
    mass = sum(float(np.dot(tree.weights(k), _increment_terms(tri, k, True))) for k in range(1, n + 1))
    mass *= 2.0 / 3.0
    b0 = float(eval_B(c, e, tri.point(0)[0]))
    bn = float(np.dot(tree.weights(n), eval_B(c, e, tri.point(n))))
    U0, V0, W0 = tri.U[0][0], tri.V[0][0], tri.W[0][0]
    bound = big * (U0 / e.p + V0 / e.q + W0 / e.r)
    tril = abs(float(np.dot(tree.weights(n), paraproduct_discrete(tri) * tri.Z[n])))
    hom = 1.5 * big * U0 ** (1 / e.p) * V0 ** (1 / e.q) * W0 ** (1 / e.r)
    step_ok = (not check_steps
               or all(supermartingale_step_check(c, e, tri, k).ok(tol) for k in range(1, n + 1)))
    scale = 1.0 + abs(b0) + abs(bn) + mass + bound
    return DualizedReport(mass, b0 - bn, bound, tril, hom, scale, step_ok)


@dataclass
class SignedReport:
    trilinear: float
    bound: float
    parts: list

    def ok(self, tol: float = 1e-9) -> bool:
        return (all(p.ok(tol) for p in self.parts)
                and self.trilinear <= self.bound + tol * (1 + self.bound))


def verify_estimate_signed(c: Coefficients, e: Exponents, tree: Tree, x, y, z,
                           tol: float = 1e-9) -> SignedReport:
    """Split signed terminal variables into positive and negative parts.

    The trilinear form is a signed sum over the eight part combinations, each
    of which is a nonnegative triple covered by ``verify_estimate_dualized``.
    """
    parts_of = [(np.maximum(a, 0.0), np.maximum(-np.asarray(a, float), 0.0)) for a in (x, y, z)]
    reports, bound = [], 0.0
    for i in (0, 1):
        for j in (0, 1):
            for k in (0, 1):
                tri = martingale_from_terminal(tree, parts_of[0][i], parts_of[1][j], parts_of[2][k], e)
                rep = verify_estimate_dualized(c, e, tri, tol)
                reports.append(rep)
                bound += rep.homogeneous_bound
    full = martingale_from_terminal(tree, x, y, z, signed=True)
    tril = abs(float(np.dot(tree.weights(tree.depth), paraproduct_discrete(full) * full.Z[-1])))
    return SignedReport(tril, bound, reports)


class NormReport(NamedTuple):
    norm: float      # |(X.Y)_n|_{r'}
    bound: float     # 3 C |X_n|_p |Y_n|_q
    dual_value: float


def paraproduct_norm_check(c: Coefficients, e: Exponents, tri: MartingaleTriple) -> NormReport:
    """``|(X.Y)_n|_{r'}`` against the worst dual variable ``Z = sgn(P)|P|^{r'-1}``.

    The extremal ``Z`` is signed, so two nonnegative parts each cost ``3C/2``.
    """
    tree, n = tri.tree, tri.depth
    w = tree.weights(n)
    rp = e.r / (e.r - 1)
    P = paraproduct_discrete(tri)
    norm = float(np.dot(w, np.abs(P) ** rp) ** (1 / rp))
    if norm == 0:
        return NormReport(0.0, 0.0, 0.0)
    Z = np.sign(P) * np.abs(P) ** (rp - 1)
    zr = float(np.dot(w, np.abs(Z) ** e.r) ** (1 / e.r))
    dual = float(np.dot(w, P * Z)) / zr
    xn = float(np.dot(w, tri.X[n] ** e.p) ** (1 / e.p))
    yn = float(np.dot(w, tri.Y[n] ** e.q) ** (1 / e.q))
    return NormReport(norm, 3.0 * c_constant(c, e) * xn * yn, dual)


# ---------------------------------------------------------------------------
# Brownian paths


@dataclass(frozen=True)
class BrownianGrid:
    steps: int
    horizon: float = 1.0
    paths: int = 10_000
    seed: int = 0
    chunk: int = 4096

    def chunks(self):
        """Yield (chunk index, Brownian values at grid times), shape (n, steps+1)."""
        dt = self.horizon / self.steps
        for i, start in enumerate(range(0, self.paths, self.chunk)):
            n = min(self.chunk, self.paths - start)
            rng = np.random.default_rng([self.seed, i])
            inc = rng.normal(0.0, np.sqrt(dt), (n, self.steps))
            yield i, np.concatenate([np.zeros((n, 1)), np.cumsum(inc, axis=1)], axis=1)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.steps + 1)


@dataclass(frozen=True)
class AffineMartingale:
    """``a + b B_t``."""

    a: float = 0.0
    b: float = 1.0

    def __call__(self, t, B):
        return self.a + self.b * B


@dataclass(frozen=True)
class ExponentialMartingale:
    """``a exp(sigma B_t - sigma^2 t / 2)``."""

    a: float = 1.0
    sigma: float = 1.0

    def __call__(self, t, B):
        return self.a * np.exp(self.sigma * B - 0.5 * self.sigma**2 * t)


@dataclass
class RiemannReport:
    partitions: list
    mean: list
    stderr: list
    variance: list
    variance_stderr: list
    norm: list                     # Monte Carlo L^power norm of the sums
    power: float
    paths: int
    error_mean: list | None = None  # mean of (sum - reference)
    error_stderr: list | None = None
    error_msq: list | None = None   # mean of (sum - reference)^2
    error_msq_stderr: list | None = None
    note: str = ("stabilization across refinements is reported; the continuous limit "
                 "holds in probability and is not certified")


def _moments(a: np.ndarray) -> np.ndarray:
    """Count and raw power sums up to order four."""
    return np.array([a.size, a.sum(), (a**2).sum(), (a**3).sum(), (a**4).sum()])


def _variance_stderr(n, s1, s2, s3, s4) -> float:
    mu = s1 / n
    m2 = s2 / n - mu**2
    m4 = s4 / n - 4 * mu * s3 / n + 6 * mu**2 * s2 / n - 3 * mu**4
    return float(np.sqrt(max(m4 - m2**2, 0.0) / n))


def brownian_riemann_approx(xgen: Callable, ygen: Callable, horizon: float = 1.0,
                            partitions=(16, 64, 256, 1024), paths: int = 10_000, seed: int = 0,
                            power: float = 2.0, reference: Callable | None = None,
                            threads: int = 1, chunk: int = 4096,
                            martingale_sigmas: float = 5.0) -> RiemannReport:
    """Riemann sums ``sum_k X_{t_{k-1}} (Y_{t_k} - Y_{t_{k-1}})`` on nested partitions.

    All partitions are subsampled from one finest grid, so the same paths
    serve every refinement.  ``reference(t, B_t)`` (for instance the Ito
    integral in closed form) is compared pathwise when given.  Per-chunk
    sums are combined in chunk order, so results do not depend on ``threads``.
    """
    ms = sorted(int(m) for m in partitions)
    fine = ms[-1]
    if any(fine % m for m in ms):
        raise ValueError("partitions must divide the finest one")
    grid = BrownianGrid(fine, horizon, paths, seed, chunk)
    times = grid.times

    def run(item):
        _, B = item
        out = {}
        xv, yv = xgen(times, B), ygen(times, B)
        # martingale sanity on the coarsest increments
        out["incs"] = np.stack([_moments(xv[:, -1] - xv[:, 0]), _moments(yv[:, -1] - yv[:, 0])])
        ref = reference(horizon, B[:, -1]) if reference is not None else None
        for m in ms:
            step = fine // m
            xs, ys = xv[:, ::step], yv[:, ::step]
            S = np.sum(xs[:, :-1] * np.diff(ys, axis=1), axis=1)
            rows = [_moments(S), np.array([0.0, np.sum(np.abs(S) ** power), 0.0, 0.0, 0.0])]
            if ref is not None:
                d = S - ref
                rows += [_moments(d), _moments(d**2)]
            out[m] = np.stack(rows)
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, grid.chunks()))
    else:
        results = [run(it) for it in grid.chunks()]

    incs = sum(r["incs"] for r in results)
    for name, (n, s1, s2, _, _) in zip(("X", "Y"), incs):
        mean = s1 / n
        sd = np.sqrt(max(s2 / n - mean**2, 0.0) / n)
        if abs(mean) > martingale_sigmas * sd + 1e-12:
            raise SimulationError(f"{name} increments have mean {mean:.3g} (stderr {sd:.3g})")

    rep = RiemannReport(ms, [], [], [], [], [], power, paths)
    if reference is not None:
        rep.error_mean, rep.error_stderr, rep.error_msq, rep.error_msq_stderr = [], [], [], []
    for m in ms:
        tot = sum(r[m] for r in results)
        n, s1, s2, s3, s4 = tot[0]
        mean = s1 / n
        var = (s2 - n * mean**2) / (n - 1)
        rep.mean.append(mean)
        rep.variance.append(var)
        rep.variance_stderr.append(_variance_stderr(n, s1, s2, s3, s4))
        rep.stderr.append(np.sqrt(var / n))
        rep.norm.append((tot[1][1] / n) ** (1 / power))
        if reference is not None:
            for row, (mu_list, se_list) in zip(tot[2:], ((rep.error_mean, rep.error_stderr),
                                                         (rep.error_msq, rep.error_msq_stderr))):
                n_, a1, a2 = row[:3]
                mu = a1 / n_
                mu_list.append(mu)
                se_list.append(np.sqrt(max(a2 / n_ - mu**2, 0.0) / n_))
    for key in ("mean", "stderr", "variance", "variance_stderr", "norm", "error_mean", "error_stderr",
                "error_msq", "error_msq_stderr"):
        vals = getattr(rep, key)
        if vals is not None:
            setattr(rep, key, [float(v) for v in vals])
    return rep


def ito_square(t, B_t):
    """Closed form of the integral of B against itself: (B_t^2 - t) / 2."""
    return 0.5 * (B_t**2 - t)


# ---------------------------------------------------------------------------
# randomized battery


@dataclass(frozen=True)
class MartingaleConfig:
    trials: int = 10_000
    depth: int = 8
    paths: int = 100_000
    partitions: tuple = (16, 64, 256, 1024)
    seed: int = 0
    identity_tol: float = 1e-12
    tol: float = 1e-9
    sigmas: float = 3.0
    threads: int = 1


def run_battery(c: Coefficients, e: Exponents, cfg: MartingaleConfig = MartingaleConfig()) -> list:
    """Tree identities and estimates, then the Brownian Riemann-sum check.

    Trial ``i`` draws from seed ``[seed, i]``; every fourth trial uses random
    split probabilities.
    """
    from .property_suite import _summarize

    names = ("dual_identity", "supermartingale", "dualized", "norm")
    rows = {k: ([], [], []) for k in names}

    def add(name, margin, scale, wit):
        rows[name][0].append(margin)
        rows[name][1].append(scale)
        rows[name][2].append(wit)

    for i in range(cfg.trials):
        rng = np.random.default_rng([cfg.seed, i])
        tri = random_triple(rng, cfg.depth, e, random_probs=(i % 4 == 3))
        d = dual_identity_check(tri)
        add("dual_identity", -d.defect, 1 + d.scale, (i, d.defect))
        worst, wscale = np.inf, 1.0
        for k in range(1, tri.depth + 1):
            st = supermartingale_step_check(c, e, tri, k)
            j = int(np.argmin(st.margins / st.scales))
            if st.margins[j] / st.scales[j] < worst / wscale:
                worst, wscale = st.margins[j], st.scales[j]
        add("supermartingale", worst, wscale, (i, worst))
        rep = verify_estimate_dualized(c, e, tri, cfg.tol, check_steps=False)
        slack = min(rep.bellman_drop - rep.paraproduct_mass, rep.bound - rep.paraproduct_mass,
                     rep.homogeneous_bound - rep.trilinear)
        add("dualized", slack, rep.scale, (i, slack))
        nr = paraproduct_norm_check(c, e, tri)
        add("norm", nr.bound - nr.norm, 1 + nr.bound + nr.norm, (i, nr.bound - nr.norm))

    out = []
    for name in names:
        m, s, w = rows[name]
        tol = cfg.identity_tol if name == "dual_identity" else cfg.tol
        out.append(_summarize(name, np.array(m, float), np.array(s, float),
                              np.array(w, float).reshape(-1, 2), cfg.seed, tol))
    if cfg.paths > 0:
        out.extend(brownian_checks(cfg))
    return out


def brownian_checks(cfg: MartingaleConfig) -> list:
    """``X = Y = B`` on [0, 1]: Riemann sums against ``(B_1^2 - 1)/2``.

    Exact values: the error has mean 0 and mean square ``1/(2m)``; the sum
    has mean 0 and variance ``1/2 - 1/(2m)``.  Each estimate must lie within
    ``sigmas`` standard errors.
    """
    from .property_suite import _summarize

    B = AffineMartingale()
    rep = brownian_riemann_approx(B, B, 1.0, cfg.partitions, cfg.paths, cfg.seed,
                                  reference=ito_square, threads=cfg.threads)
    out = []
    checks = {
        "brownian_error_mean": [(rep.error_mean[i], 0.0, rep.error_stderr[i]) for i in range(len(rep.partitions))],
        "brownian_error_msq": [(rep.error_msq[i], 1 / (2 * m), rep.error_msq_stderr[i])
                               for i, m in enumerate(rep.partitions)],
        "brownian_mean": [(rep.mean[i], 0.0, rep.stderr[i]) for i in range(len(rep.partitions))],
        "brownian_variance": [(rep.variance[i], 0.5 - 1 / (2 * m), rep.variance_stderr[i])
                              for i, m in enumerate(rep.partitions)],
    }
    for name, vals in checks.items():
        arr = np.array(vals, float)
        margin = cfg.sigmas * arr[:, 2] - np.abs(arr[:, 0] - arr[:, 1])
        wit = np.column_stack([rep.partitions, arr])
        out.append(_summarize(name, margin, np.ones(len(arr)), wit, cfg.seed, 0.0))
    return out
