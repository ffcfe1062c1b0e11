"""Dyadic step functions on [0, 1) and the paraproduct forms built from them.

A step function of depth ``n`` holds ``2**n`` cell values.  Node ``(k, i)``
is the dyadic interval ``[i 2^-k, (i+1) 2^-k)``.  Averages are computed by
repeated pairwise halving from the finest level, which keeps constants exact
and makes the scaling identity for ``phi_form`` hold to rounding.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import optimize

from .core_bellman import Coefficients, Exponents, c_constant, eval_B
from .errors import InfeasibleMoments


@dataclass(frozen=True)
class DyadicStep:
    """Cell values of a step function on the dyadic cells of [0, 1).

    Values must be nonnegative unless ``signed`` is set; ``pi_apply``
    produces signed functions.
    """

    values: np.ndarray
    signed: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        n = vals.size
        if vals.ndim != 1 or n == 0 or n & (n - 1):
            raise ValueError(f"need 2**depth cell values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("cell values must be finite")
        if not self.signed and np.any(vals < 0):
            raise ValueError("cell values must be nonnegative (pass signed=True otherwise)")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def depth(self) -> int:
        return int(self.values.size).bit_length() - 1

    @property
    def nonneg(self) -> bool:
        return bool(np.all(self.values >= 0))

    def refine(self, depth: int) -> "DyadicStep":
        if depth < self.depth:
            raise ValueError("cannot refine to a coarser depth")
        return DyadicStep(np.repeat(self.values, 2 ** (depth - self.depth)), self.signed)

    def power(self, p: float) -> "DyadicStep":
        return DyadicStep(np.abs(self.values) ** p)

    def integral(self) -> float:
        return float(np.mean(self.values))

    def norm(self, p: float) -> float:
        return float(np.mean(np.abs(self.values) ** p) ** (1 / p))

    def to_json(self) -> str:
        data = {"depth": self.depth, "values": [float(v) for v in self.values]}
        if self.signed:
            data["signed"] = True
        return json.dumps(data)

    @classmethod
    def from_json(cls, text: str) -> "DyadicStep":
        data = json.loads(text)
        step = cls(np.array(data["values"], dtype=float), bool(data.get("signed", False)))
        if step.depth != data["depth"]:
            raise ValueError("depth does not match number of values")
        return step

    def to_text(self) -> str:
        return f"{self.depth}\n" + " ".join(repr(float(v)) for v in self.values) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "DyadicStep":
        head, body = text.strip().split("\n", 1)
        vals = np.array([float(t) for t in body.split()])
        step = cls(vals, bool(np.any(vals < 0)))
        if step.depth != int(head):
            raise ValueError("depth does not match number of values")
        return step


@dataclass(frozen=True)
class TreeNode:
    level: int
    index: int

    def __post_init__(self):
        if self.level < 0 or not (0 <= self.index < 2**self.level):
            raise IndexError(f"no dyadic node at level {self.level}, index {self.index}")

    @property
    def length(self) -> float:
        return 2.0**-self.level

    @property
    def left(self) -> "TreeNode":
        return TreeNode(self.level + 1, 2 * self.index)

    @property
    def right(self) -> "TreeNode":
        return TreeNode(self.level + 1, 2 * self.index + 1)


ROOT = TreeNode(0, 0)


@dataclass(frozen=True)
class SignPattern:
    """Weights ``eps_J`` in [-1, 1]; ``levels[k]`` has one entry per level-k node."""

    levels: tuple

    def __post_init__(self):
        lv = tuple(np.asarray(a, dtype=float) for a in self.levels)
        for k, a in enumerate(lv):
            if a.shape != (2**k,):
                raise ValueError(f"level {k} needs {2**k} weights, got {a.shape}")
            if np.any(np.abs(a) > 1):
                raise ValueError("sign weights must satisfy |eps| <= 1")
        object.__setattr__(self, "levels", lv)

    @property
    def depth(self) -> int:
        return len(self.levels)

    @classmethod
    def ones(cls, depth: int) -> "SignPattern":
        return cls(tuple(np.ones(2**k) for k in range(depth)))

    @classmethod
    def random(cls, depth: int, rng: np.random.Generator, signs_only: bool = False) -> "SignPattern":
        if signs_only:
            return cls(tuple(rng.choice([-1.0, 1.0], 2**k) for k in range(depth)))
        return cls(tuple(rng.uniform(-1, 1, 2**k) for k in range(depth)))


# ---------------------------------------------------------------------------
# averages and Haar differences


def level_averages(f: DyadicStep) -> list[np.ndarray]:
    """``out[k][i]`` is the average over node ``(k, i)``, ``k = 0..depth``."""
    out = [np.asarray(f.values)]
    for _ in range(f.depth):
        fine = out[-1]
        out.append(0.5 * (fine[0::2] + fine[1::2]))
    return out[::-1]


def haar_diffs(f: DyadicStep) -> list[np.ndarray]:
    """``out[k][i] = ([f]_left - [f]_right) / 2`` at node ``(k, i)``, ``k < depth``."""
    avg = level_averages(f)
    return [0.5 * (avg[k + 1][0::2] - avg[k + 1][1::2]) for k in range(f.depth)]


def average(f: DyadicStep, J: TreeNode) -> float:
    if J.level <= f.depth:
        return float(level_averages(f)[J.level][J.index])
    return float(f.values[J.index >> (J.level - f.depth)])


def haar_diff(f: DyadicStep, J: TreeNode) -> float:
    if J.level >= f.depth:
        return 0.0
    return float(haar_diffs(f)[J.level][J.index])


def _common(*fs: DyadicStep) -> list[DyadicStep]:
    n = max(f.depth for f in fs)
    return [f.refine(n) for f in fs]


def _subtree(I: TreeNode, k: int) -> slice:
    """Indices of the level-k nodes contained in I (k >= I.level)."""
    width = 2 ** (k - I.level)
    return slice(I.index * width, (I.index + 1) * width)


def paraproduct_terms(f: DyadicStep, g: DyadicStep, h: DyadicStep) -> list[np.ndarray]:
    """``[f]_J |dg_J| |dh_J|`` per node, level by level."""
    f, g, h = _common(f, g, h)
    af = level_averages(f)
    dg, dh = haar_diffs(g), haar_diffs(h)
    return [af[k] * np.abs(dg[k]) * np.abs(dh[k]) for k in range(f.depth)]


def phi_form(f: DyadicStep, g: DyadicStep, h: DyadicStep, I: TreeNode = ROOT) -> float:
    terms = paraproduct_terms(f, g, h)
    total = 0.0
    for k in range(I.level, len(terms)):
        total += 2.0 ** -(k - I.level) * float(np.sum(terms[k][_subtree(I, k)]))
    return total


def lambda_form(eps: SignPattern, f: DyadicStep, g: DyadicStep, h: DyadicStep) -> float:
    f, g, h = _common(f, g, h)
    if eps.depth < f.depth:
        raise ValueError("sign pattern shallower than the step functions")
    af = level_averages(f)
    dg, dh = haar_diffs(g), haar_diffs(h)
    return float(sum(2.0**-k * np.sum(eps.levels[k] * af[k] * dg[k] * dh[k])
                     for k in range(f.depth)))


def _haar_synthesis(coeffs: list[np.ndarray], depth: int) -> np.ndarray:
    """Cell values of ``sum_J coeffs_J h_J`` with L-infinity normalized Haar functions."""
    out = np.zeros(2**depth)
    for k, cf in enumerate(coeffs):
        half = 2 ** (depth - k - 1)
        pattern = np.concatenate([np.ones(half), -np.ones(half)])
        out += np.kron(cf, pattern)
    return out


def pi_apply(eps: SignPattern, f: DyadicStep, g: DyadicStep) -> DyadicStep:
    f, g = _common(f, g)
    af = level_averages(f)
    dg = haar_diffs(g)
    coeffs = [eps.levels[k] * af[k] * dg[k] for k in range(f.depth)]
    return DyadicStep(_haar_synthesis(coeffs, f.depth), signed=True)


def maximal_fn(f: DyadicStep) -> DyadicStep:
    avg = level_averages(f)
    n = f.depth
    stacked = np.stack([np.repeat(np.abs(a), 2 ** (n - k)) for k, a in enumerate(avg)])
    return DyadicStep(stacked.max(axis=0))


def square_fn(f: DyadicStep) -> DyadicStep:
    n = f.depth
    total = np.zeros(2**n)
    for k, d in enumerate(haar_diffs(f)):
        total += np.repeat(d**2, 2 ** (n - k))
    return DyadicStep(np.sqrt(total))


# ---------------------------------------------------------------------------
# estimates


def _local_moments(fs: DyadicStep, I: TreeNode, p: float) -> tuple[float, float]:
    a = average(fs, I)
    return a, average(fs.power(p), I)


class EstimateReport(NamedTuple):
    phi: float
    bound: float
    margin: float
    ratio: float  # phi / (|f|_p |g|_q |h|_r) on I; bounded by the constant
    constant: float


def verify_normalized_estimate(c: Coefficients, e: Exponents, f: DyadicStep, g: DyadicStep,
                               h: DyadicStep, I: TreeNode = ROOT) -> EstimateReport:
    """Compare ``Phi_I`` with ``C([f^p]_I/p + [g^q]_I/q + [h^r]_I/r)``."""
    for fn in (f, g, h):
        if not fn.nonneg:
            raise ValueError("normalized estimate needs nonnegative inputs")
    f, g, h = _common(f, g, h)
    big = c_constant(c, e)
    phi = phi_form(f, g, h, I)
    P = average(f.power(e.p), I)
    Q = average(g.power(e.q), I)
    R = average(h.power(e.r), I)
    bound = big * (P / e.p + Q / e.q + R / e.r)
    norms = P ** (1 / e.p) * Q ** (1 / e.q) * R ** (1 / e.r)
    ratio = phi / norms if norms > 0 else 0.0
    return EstimateReport(phi, bound, bound - phi, ratio, big)


def node_moments(e: Exponents, f: DyadicStep, g: DyadicStep, h: DyadicStep) -> list[np.ndarray]:
    """Bellman points ``x_J`` per level, shape (2**k, 6).

    The power averages are clamped from below by the powers of the averages,
    which Jensen's inequality guarantees and rounding can break by an ulp.
    """
    f, g, h = _common(f, g, h)
    lv = [level_averages(fn) for fn in (f, g, h, f.power(e.p), g.power(e.q), h.power(e.r))]
    out = []
    for k in range(f.depth + 1):
        x = np.stack([a[k] for a in lv], axis=-1)
        x[:, 3:] = np.maximum(x[:, 3:], x[:, :3] ** e.powers)
        out.append(x)
    return out


class InductionReport(NamedTuple):
    defects: np.ndarray  # one per level k = 0..n
    scales: np.ndarray

    def ok(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.defects >= -tol * self.scales))


def bellman_induction_check(c: Coefficients, e: Exponents, f: DyadicStep, g: DyadicStep,
                            h: DyadicStep, I: TreeNode = ROOT, n: int | None = None) -> InductionReport:
    """Level-``k`` defect of the iterated main inequality, relative to |I| = 1.

    ``B(x_I) - sum_{|J| = 2^-k |I|} |J|/|I| B(x_J)
    - sum_{|J| > 2^-k |I|} |J|/|I| [f]_J |dg_J| |dh_J|``.
    """
    f, g, h = _common(f, g, h)
    if n is None:
        n = f.depth - I.level
    if n < 0 or I.level + n > f.depth:
        raise ValueError("n exceeds the depth available below I")
    moments = node_moments(e, f, g, h)
    terms = paraproduct_terms(f, g, h)
    b_top = float(eval_B(c, e, moments[I.level][I.index]))
    defects, scales = [0.0], [abs(b_top)]
    acc = 0.0
    for k in range(1, n + 1):
        lvl = I.level + k
        prev = I.level + k - 1
        acc += 2.0 ** -(prev - I.level) * float(np.sum(terms[prev][_subtree(I, prev)]))
        b_level = np.asarray(eval_B(c, e, moments[lvl][_subtree(I, lvl)]))
        mass = 2.0**-k * float(np.sum(b_level))
        defects.append(b_top - mass - acc)
        scales.append(1.0 + abs(b_top) + 2.0**-k * float(np.sum(np.abs(b_level))) + acc)
    return InductionReport(np.array(defects), np.array(scales))


def random_step(rng: np.random.Generator, depth: int, lo: float = 1e-2, hi: float = 1e2) -> DyadicStep:
    """Nonnegative step function with log-uniform cell values; some cells zeroed."""
    vals = np.exp(rng.uniform(np.log(lo), np.log(hi), 2**depth))
    vals[rng.random(vals.size) < 0.05] = 0.0
    return DyadicStep(vals)


# ---------------------------------------------------------------------------
# lower bounds for the abstract Bellman function


def _shape_to_values(mean: float, moment: float, p: float, logshape: np.ndarray,
                     max_sharpen: int = 64) -> np.ndarray:
    """Cell values ``mean * (1 + lam * z)`` with ``mean(values**p) = moment``.

    ``z`` is the normalized shape (zero mean, minimum -1), so ``lam`` in [0, 1]
    keeps values nonnegative; ``lam`` is found by bracketing root search.
    If even ``lam = 1`` is too mild the shape is sharpened (squared).
    """
    n = logshape.size
    if mean == 0:
        if moment > 0:
            raise InfeasibleMoments("zero mean forces a zero function")
        return np.zeros(n)
    rho = moment / mean**p
    if rho <= 1 + 1e-15:
        return np.full(n, float(mean))
    s = np.exp(logshape - logshape.max())
    for _ in range(max_sharpen):
        sbar = s.mean()
        spread = 1 - s.min() / sbar
        if spread > 1e-12:
            z = (s / sbar - 1) / spread

            def excess(lam):
                return np.mean((1 + lam * z) ** p) - rho

            if excess(1.0) >= 0:
                lam = optimize.brentq(excess, 0.0, 1.0, xtol=1e-15, rtol=1e-15)
                return mean * np.maximum(1 + lam * z, 0.0)
        s = s**2
        if not np.all(np.isfinite(s)) or s.max() == 0:
            break
        s = s / s.max()
    raise InfeasibleMoments(f"moment ratio {rho:.6g} not reachable with {n} cells "
                            f"(limit {n ** (p - 1):.6g})")


def _seed_shapes(k: int) -> list[np.ndarray]:
    """Log-shapes for left/right halves high and first/last cell spiking."""
    n = 2**k
    half = np.r_[np.zeros(n // 2), np.ones(n // 2)]
    first = np.zeros(n)
    first[0] = 4.0
    last = first[::-1].copy()
    return [half, 1 - half, first, last] if n > 2 else [half, 1 - half]


def abstract_bellman_lower(c: Coefficients, e: Exponents, x, depth: int = 4,
                           iters: int = 40, seed: int = 0, return_steps: bool = False):
    """Best ``Phi`` found over step functions whose six moments equal ``x``.

    Any feasible candidate is a lower bound for the abstract Bellman
    function at ``x``.  Depths ``1..depth`` are searched in turn; each stage
    starts from the previous best (refined, which keeps ``Phi``) and uses its
    own seed, so the result never decreases when ``depth`` grows.
    """
    x = np.asarray(x.as_array() if hasattr(x, "as_array") else x, dtype=float)
    if np.any(x < 0) or np.any(x[:3] ** e.powers > x[3:] * (1 + 1e-15)):
        raise InfeasibleMoments("x is not in the Bellman domain")
    pw = e.powers
    best_shapes, best_val, best_steps = None, -np.inf, None
    for k in range(1, depth + 1):
        rng = np.random.default_rng([seed, k])
        if best_shapes is not None:
            # refinement keeps the function, so keep the value from the coarser stage
            best_shapes = [np.repeat(s, 2) for s in best_shapes]
            best_steps = [s.refine(k) for s in best_steps]
        seeds = []
        for i in range(3):
            opts = []
            for shape in _seed_shapes(k):
                try:
                    opts.append((shape, DyadicStep(_shape_to_values(x[i], x[3 + i], pw[i], shape))))
                except InfeasibleMoments:
                    pass
            seeds.append(opts)
        for a, b, cc in itertools.product(*seeds):
            val = phi_form(a[1], b[1], cc[1])
            if val > best_val:
                best_val, best_shapes, best_steps = val, [a[0], b[0], cc[0]], [a[1], b[1], cc[1]]
        if best_shapes is None:
            continue
        for _ in range(iters):
            which = int(rng.integers(0, 3))
            shape = best_shapes[which].copy()
            if rng.random() < 0.5:
                shape += rng.choice([0.1, 0.5, 2.0]) * rng.standard_normal(shape.size)
            else:
                shape[rng.integers(0, shape.size)] += rng.normal(0.0, 1.0)
            try:
                step = DyadicStep(_shape_to_values(x[which], x[3 + which], pw[which], shape))
            except InfeasibleMoments:
                continue
            steps = list(best_steps)
            steps[which] = step
            val = phi_form(*steps)
            if val > best_val:
                best_val, best_steps = val, steps
                best_shapes = list(best_shapes)
                best_shapes[which] = shape
    if best_steps is None:
        raise InfeasibleMoments(f"no step function of depth <= {depth} matches x")
    if return_steps:
        return best_val, best_steps
    return best_val


# ---------------------------------------------------------------------------
# randomized battery


@dataclass(frozen=True)
class DyadicConfig:
    trials: int = 10_000
    max_depth: int = 10
    induction_depth: int = 8    # induction check runs on triples up to this depth
    bellman_points: int = 0
    bellman_depth: int = 6
    bellman_iters: int = 20
    seed: int = 0
    identity_tol: float = 1e-12
    tol: float = 1e-9


def _triple(seed: int, trial: int, max_depth: int):
    rng = np.random.default_rng([seed, trial])
    depth = int(rng.integers(1, max_depth + 1))
    return rng, depth, [random_step(rng, depth) for _ in range(3)]


def run_battery(c: Coefficients, e: Exponents, cfg: DyadicConfig = DyadicConfig()) -> list:
    """Identities and estimates over random triples; trial ``i`` uses seed ``[seed, i]``."""
    from .property_suite import _summarize

    rows = {k: ([], [], []) for k in ("scaling", "duality", "square_fn", "estimate",
                                      "homogeneous", "induction")}
    big = c_constant(c, e)

    def add(name, margin, scale, wit):
        rows[name][0].append(margin)
        rows[name][1].append(scale)
        rows[name][2].append(wit)

    for i in range(cfg.trials):
        rng, depth, (f, g, h) = _triple(cfg.seed, i, cfg.max_depth)
        lvl = int(rng.integers(0, depth))
        node = TreeNode(lvl, int(rng.integers(0, 2**lvl)))
        phi = phi_form(f, g, h, node)
        split = (0.5 * phi_form(f, g, h, node.left) + 0.5 * phi_form(f, g, h, node.right)
                 + average(f, node) * abs(haar_diff(g, node)) * abs(haar_diff(h, node)))
        add("scaling", -abs(phi - split), 1 + abs(phi) + abs(split), (i, depth, phi - split))

        eps = SignPattern.random(depth, rng)
        lam = lambda_form(eps, f, g, h)
        dual = float(np.mean(pi_apply(eps, f, g).values * h.values))
        scale = 1 + phi_form(f, g, h)
        add("duality", -abs(lam - dual), scale, (i, depth, lam - dual))

        sq = lambda_form(SignPattern.ones(depth), f, g, g)
        direct = float(np.mean(f.values * square_fn(g).values ** 2))
        add("square_fn", -abs(sq - direct), 1 + abs(direct), (i, depth, sq - direct))

        rep = verify_normalized_estimate(c, e, f, g, h)
        add("estimate", rep.margin, 1 + rep.bound + rep.phi, (i, depth, rep.margin))
        hom = big * f.norm(e.p) * g.norm(e.q) * h.norm(e.r)
        add("homogeneous", hom - abs(lam), 1 + hom + abs(lam), (i, depth, hom - abs(lam)))

        if depth <= cfg.induction_depth:
            ind = bellman_induction_check(c, e, f, g, h)
            k = 1 + int(np.argmin(ind.defects[1:] / ind.scales[1:]))
            add("induction", ind.defects[k], ind.scales[k], (i, depth, ind.defects[k]))

    out = []
    for name, (m, s, w) in rows.items():
        tol = cfg.identity_tol if name in ("scaling", "duality", "square_fn") else cfg.tol
        out.append(_summarize(name, np.array(m, float), np.array(s, float),
                              np.array(w, float).reshape(-1, 3), cfg.seed, tol))
    if cfg.bellman_points > 0:
        out.append(bracket_bellman(c, e, cfg))
    return out


def bracket_bellman(c: Coefficients, e: Exponents, cfg: DyadicConfig):
    """``abstract_bellman_lower <= eval_B`` on random domain points."""
    from . import sampling
    from .property_suite import _summarize

    rng = np.random.default_rng([cfg.seed, 7])
    x = sampling.domain_points(e, sampling.loguniform(rng, (cfg.bellman_points, 3), 1e-1, 1e1), rng)
    margins, scales, wit, skipped = [], [], [], 0
    for i, pt in enumerate(x):
        try:
            low = abstract_bellman_lower(c, e, pt, cfg.bellman_depth, cfg.bellman_iters, cfg.seed + i)
        except InfeasibleMoments:
            skipped += 1
            continue
        b = float(eval_B(c, e, pt))
        margins.append(b - low)
        scales.append(1 + abs(b) + abs(low))
        wit.append(np.r_[pt, low, b])
    return _summarize("bellman_bracket", np.array(margins), np.array(scales),
                      np.array(wit).reshape(-1, 8), cfg.seed, cfg.tol, skipped)
