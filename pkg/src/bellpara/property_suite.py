"""Randomized verification of the inequalities satisfied by ``A`` and ``B``.

Each ``check_*`` function is vectorized and returns raw margins (LHS - RHS);
a margin counts as a violation when it is below ``-TOL * scale`` where the
scale is ``1 + |LHS| + |RHS|`` of that instance.  The ``scan_*`` functions
draw random instances and wrap the outcome in a :class:`PropertyResult`.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import sampling
from .core_bellman import (
    HESS_MARGIN,
    Coefficients,
    Exponents,
    Region,
    _points,
    c_constant,
    check_domain,
    eval_A,
    eval_A_branch,
    eval_B,
    grad_A,
    grad_A_branch,
    grad_B,
    hess_A,
    hess_A_unchecked,
    hess_B,
    hess_margin_ok,
)
from .errors import DomainError, QuadratureWarning
from .psd_verifier import build_A_pm, is_psd

TOL = 1e-9


@dataclass
class PropertyResult:
    name: str
    samples: int
    worst_margin: float  # min over samples of margin / scale
    seed: int
    violations: np.ndarray = field(repr=False)  # witness rows, layout per property
    tol: float = TOL
    skipped: int = 0

    @property
    def passed(self) -> bool:
        return self.violations.shape[0] == 0


def _summarize(name, margin, scale, witnesses, seed, tol=TOL, skipped=0) -> PropertyResult:
    norm = margin / scale
    bad = norm < -tol
    return PropertyResult(
        name=name,
        samples=int(margin.size),
        worst_margin=float(norm.min()) if norm.size else 0.0,
        seed=seed,
        violations=np.asarray(witnesses)[bad],
        tol=tol,
        skipped=skipped,
    )


# ---------------------------------------------------------------------------
# pointwise checks


def _a2(c, e, x):
    a = np.asarray(eval_A(c, e, x))
    arr, _ = _points(x, 3)
    top = c.A * arr[..., 0] ** e.p + c.B * arr[..., 1] ** e.q + c.C * arr[..., 2] ** e.r
    return a, top - a, 1 + np.abs(a) + np.abs(top)


def check_A2(c: Coefficients, e: Exponents, x):
    """(lower, upper) margins of ``0 <= A <= A u^p + B v^q + C w^r``."""
    lower, upper, _ = _a2(c, e, x)
    if np.ndim(lower) == 0:
        return float(lower), float(upper)
    return lower, upper


def _a3(c, e, x1, x2, afun=eval_A):
    x1, _ = _points(x1, 3)
    x2, _ = _points(x2, 3)
    x = 0.5 * (x1 + x2)
    a1, a2, a0 = (np.asarray(afun(c, e, y)) for y in (x1, x2, x))
    lhs = 0.5 * a1 + 0.5 * a2 - a0
    rhs = x[..., 0] * np.abs(x1[..., 1] - x2[..., 1]) / 2 * np.abs(x1[..., 2] - x2[..., 2]) / 2
    return lhs - rhs, 1 + 0.5 * np.abs(a1) + 0.5 * np.abs(a2) + np.abs(a0) + rhs


def check_A3_midpoint(c: Coefficients, e: Exponents, x1, x2):
    margin, _ = _a3(c, e, x1, x2)
    return float(margin) if np.ndim(margin) == 0 else margin


def _a3_inf(c, e, x, d, margin_cfg):
    arr, _ = _points(x, 3)
    d = np.asarray(d, dtype=float)
    h = hess_A(c, e, arr, margin_cfg)
    quad = np.einsum("...i,...ij,...j->...", d, h, d)
    rhs = 2 * arr[..., 0] * np.abs(d[..., 1]) * np.abs(d[..., 2])
    absq = np.einsum("...i,...ij,...j->...", np.abs(d), np.abs(h), np.abs(d))
    return quad - rhs, 1 + absq + rhs


def check_A3_infinitesimal(c: Coefficients, e: Exponents, x, d, margin_cfg: float = HESS_MARGIN):
    """``d' H d - 2 u |d_v| |d_w|``; nonnegative iff ``d' A_sign d >= 0``."""
    margin, _ = _a3_inf(c, e, x, d, margin_cfg)
    return float(margin) if np.ndim(margin) == 0 else margin


def _a4(c, e, x, x1):
    x, _ = _points(x, 3)
    x1, _ = _points(x1, 3)
    a0 = np.asarray(eval_A(c, e, x))
    a1 = np.asarray(eval_A(c, e, x1))
    g = np.asarray(grad_A(c, e, x))
    lin = np.sum(g * (x1 - x), axis=-1)
    rhs = 2 / 3 * x[..., 0] * np.abs(x1[..., 1] - x[..., 1]) * np.abs(x1[..., 2] - x[..., 2])
    scale = 1 + np.abs(a1) + np.abs(a0) + np.sum(np.abs(g * (x1 - x)), axis=-1) + rhs
    return a1 - a0 - lin - rhs, scale


def check_A4_tangent(c: Coefficients, e: Exponents, x, x1):
    margin, _ = _a4(c, e, x, x1)
    return float(margin) if np.ndim(margin) == 0 else margin


def _b3(c, e, x1, x2):
    x1, _ = _points(x1, 6)
    x2, _ = _points(x2, 6)
    x = 0.5 * (x1 + x2)
    b1, b2, b0 = (np.asarray(eval_B(c, e, y)) for y in (x1, x2, x))
    rhs = x[..., 0] * np.abs(x1[..., 1] - x2[..., 1]) / 2 * np.abs(x1[..., 2] - x2[..., 2]) / 2
    return b0 - 0.5 * b1 - 0.5 * b2 - rhs, 1 + np.abs(b0) + 0.5 * np.abs(b1) + 0.5 * np.abs(b2) + rhs


def check_B_main(c: Coefficients, e: Exponents, x, x1, x2):
    """Main inequality margin; ``x`` must be the midpoint of ``x1`` and ``x2``."""
    xa, _ = _points(x, 6)
    x1a, _ = _points(x1, 6)
    x2a, _ = _points(x2, 6)
    mid = 0.5 * (x1a + x2a)
    if not np.allclose(xa, mid, rtol=1e-12, atol=0):
        raise DomainError("x must equal (x1 + x2) / 2")
    margin, _ = _b3(c, e, x1a, x2a)
    return float(margin) if np.ndim(margin) == 0 else margin


def _b3_inf(c, e, x, d6, margin_cfg):
    arr, _ = _points(x, 6)
    d6 = np.asarray(d6, dtype=float)
    h = hess_B(c, e, arr, margin_cfg)
    quad = -np.einsum("...i,...ij,...j->...", d6, h, d6)
    rhs = 2 * arr[..., 0] * np.abs(d6[..., 1]) * np.abs(d6[..., 2])
    absq = np.einsum("...i,...ij,...j->...", np.abs(d6), np.abs(h), np.abs(d6))
    return quad - rhs, 1 + absq + rhs


def check_B_infinitesimal(c: Coefficients, e: Exponents, x, d6, margin_cfg: float = HESS_MARGIN):
    margin, _ = _b3_inf(c, e, x, d6, margin_cfg)
    return float(margin) if np.ndim(margin) == 0 else margin


def _b4(c, e, x, x1):
    x, _ = _points(x, 6)
    x1, _ = _points(x1, 6)
    b0 = np.asarray(eval_B(c, e, x))
    b1 = np.asarray(eval_B(c, e, x1))
    g = np.asarray(grad_B(c, e, x))
    lin = np.sum(g * (x1 - x), axis=-1)
    rhs = 2 / 3 * x[..., 0] * np.abs(x1[..., 1] - x[..., 1]) * np.abs(x1[..., 2] - x[..., 2])
    scale = 1 + np.abs(b0) + np.abs(b1) + np.sum(np.abs(g * (x1 - x)), axis=-1) + rhs
    return b0 + lin - b1 - rhs, scale


def check_B_tangent(c: Coefficients, e: Exponents, x, x1):
    margin, _ = _b4(c, e, x, x1)
    return float(margin) if np.ndim(margin) == 0 else margin


# ---------------------------------------------------------------------------
# C^1 gluing across the critical surfaces


def adjacent_regions(surface: str, above: bool) -> tuple[Region, Region]:
    """The two regions that meet on ``surface``.

    ``above`` says whether the third power exceeds the common value.
    """
    table = {
        ("up=vq", False): (Region.R2, Region.R3),
        ("up=vq", True): (Region.R6, Region.R5),
        ("up=wr", True): (Region.R1, Region.R2),
        ("up=wr", False): (Region.R4, Region.R5),
        ("vq=wr", True): (Region.R3, Region.R4),
        ("vq=wr", False): (Region.R1, Region.R6),
    }
    return table[(surface, above)]


def surface_points(e: Exponents, surface: str, n: int, rng: np.random.Generator) -> np.ndarray:
    return sampling.onto_surface(e, sampling.loguniform(rng, (n, 3)), surface)


def _third_above(e, x, surface):
    pw = x ** e.powers
    common, third = {"up=vq": (0, 2), "up=wr": (0, 1), "vq=wr": (1, 0)}[surface]
    return pw[:, third] > pw[:, common]


def _natural_scale(c, e, x):
    return c.A * x[..., 0] ** e.p + c.B * x[..., 1] ** e.q + c.C * x[..., 2] ** e.r


def fd_gradient(c: Coefficients, e: Exponents, x, rel_step: float = 1e-6) -> np.ndarray:
    """Central differences of ``eval_A`` with step ``rel_step * x_i`` per axis."""
    x, _ = _points(x, 3)
    out = np.empty_like(x)
    for i in range(3):
        h = rel_step * x[..., i]
        up, dn = x.copy(), x.copy()
        up[..., i] += h
        dn[..., i] -= h
        out[..., i] = (np.asarray(eval_A(c, e, up)) - np.asarray(eval_A(c, e, dn))) / (2 * h)
    return out


def check_C1_across_surfaces(c: Coefficients, e: Exponents, surface: str, samples: int,
                             seed: int = 0, tol_branch: float = 1e-10,
                             tol_fd: float = 1e-5) -> PropertyResult:
    """Branch gradients and values agree on a surface; both match finite differences.

    Gradient errors are measured component-wise as ``|x_i * err_i| / S`` with
    ``S = A u^p + B v^q + C w^r`` (each ``x_i dA/dx_i`` is of that order).  The reported margin is the worst of the three
    normalized slacks ``tol - err``.  Witness rows: ``u, v, w, err_value,
    err_branch_grad, err_fd``.
    """
    rng = np.random.default_rng(seed)
    x = surface_points(e, surface, samples, rng)
    above = _third_above(e, x, surface)
    err_val = np.zeros(samples)
    err_grad = np.zeros(samples)
    err_fd = np.zeros(samples)
    fd = fd_gradient(c, e, x)
    for flag in (True, False):
        sel = above == flag
        if not np.any(sel):
            continue
        ra, rb = adjacent_regions(surface, flag)
        va = eval_A_branch(c, e, ra, x[sel])
        vb = eval_A_branch(c, e, rb, x[sel])
        err_val[sel] = np.abs(va - vb) / (1 + np.abs(va))
        ga = grad_A_branch(c, e, ra, x[sel])
        gb = grad_A_branch(c, e, rb, x[sel])
        weight = x[sel] / _natural_scale(c, e, x[sel])[:, None]
        err_grad[sel] = np.max(np.abs(ga - gb) * weight, axis=-1)
        err_fd[sel] = np.maximum(np.max(np.abs(ga - fd[sel]) * weight, axis=-1),
                                 np.max(np.abs(gb - fd[sel]) * weight, axis=-1))
    slack = np.minimum(np.minimum(tol_branch - err_val, tol_branch - err_grad) / tol_branch,
                       (tol_fd - err_fd) / tol_fd)
    bad = slack < 0
    return PropertyResult(
        name=f"C1[{surface}]",
        samples=samples,
        worst_margin=float(slack.min()),
        seed=seed,
        violations=np.column_stack([x, err_val, err_grad, err_fd])[bad],
        tol=0.0,
    )


# ---------------------------------------------------------------------------
# mollification


def _bump(x):
    x = np.asarray(x, dtype=float)
    inside = np.abs(x) < 1
    out = np.zeros_like(x)
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return out


BUMP_MASS = integrate.quad(lambda y: float(_bump(y)), -1, 1, epsabs=0, epsrel=1e-13, limit=200)[0]


def bump(x):
    """Even C-infinity bump supported in (-1, 1) with unit integral."""
    return _bump(x) / BUMP_MASS


def mollifier_rule(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes on (-1, 1) with weights ``w_i * bump(x_i)``.

    The weights are renormalized to sum to one, so the discrete rule keeps
    the exact properties used downstream: constants are reproduced and the
    first moment vanishes by symmetry.
    """
    x, w = np.polynomial.legendre.leggauss(nodes)
    wt = w * bump(x)
    return x, wt / wt.sum()


def _tensor_offsets(eps, nodes):
    x, w = mollifier_rule(nodes)
    a, b, cc = np.meshgrid(x, x, x, indexing="ij")
    offs = eps * np.stack([a.ravel(), b.ravel(), cc.ravel()], axis=-1)
    wts = (w[:, None, None] * w[None, :, None] * w[None, None, :]).ravel()
    return offs, wts


def _mollify(fn, eps, x, nodes, chunk=2048):
    """sum_k wts_k * fn(x - offs_k) for a stack of points ``x`` (n, 3)."""
    offs, wts = _tensor_offsets(eps, nodes)
    res = []
    for start in range(0, x.shape[0], chunk):
        blk = x[start:start + chunk]
        shifted = blk[:, None, :] - offs[None, :, :]
        vals = np.asarray(fn(shifted.reshape(-1, 3)))
        vals = vals.reshape((blk.shape[0], offs.shape[0]) + vals.shape[1:])
        res.append(np.tensordot(wts, vals, axes=([0], [1])))
    return np.concatenate(res, axis=0)


def _mollify_checked(fn, eps, x, nodes):
    arr, single = _points(x, 3)
    if eps <= 0:
        raise ValueError("eps must be positive")
    if nodes < 8:
        raise ValueError("nodes must be at least 8")
    flat = arr.reshape(-1, 3)
    if np.any(flat.min(axis=-1) <= eps):
        raise DomainError("mollified quantities need min(u, v, w) > eps")
    return arr, single, flat


def mollify_A(c: Coefficients, e: Exponents, eps: float, x, nodes: int = 8,
              check: bool = True):
    """Mollified ``A`` by tensor Gauss-Legendre quadrature with ``nodes`` per axis."""
    arr, single, flat = _mollify_checked(lambda y: y, eps, x, nodes)
    val = _mollify(lambda y: eval_A(c, e, y), eps, flat, nodes)
    if check:
        fine = _mollify(lambda y: eval_A(c, e, y), eps, flat, 2 * nodes)
        drift = np.max(np.abs(fine - val) / np.maximum(np.abs(fine), 1e-300))
        if drift > 1e-8:
            warnings.warn(f"mollifier quadrature: doubling nodes moved the value by "
                          f"{drift:.2e} (relative)", QuadratureWarning, stacklevel=2)
    val = val.reshape(arr.shape[:-1])
    return float(val) if single else val


def mollify_grad_A(c: Coefficients, e: Exponents, eps: float, x, nodes: int = 8) -> np.ndarray:
    arr, _, flat = _mollify_checked(lambda y: y, eps, x, nodes)
    return _mollify(lambda y: grad_A(c, e, y), eps, flat, nodes).reshape(arr.shape)


def mollify_hess_A(c: Coefficients, e: Exponents, eps: float, x, nodes: int = 8) -> np.ndarray:
    """Mollified piecewise Hessian; equals the Hessian of the mollified ``A``
    because ``A`` is C^1 (no singular part on the surfaces)."""
    arr, _, flat = _mollify_checked(lambda y: y, eps, x, nodes)
    h = _mollify(lambda y: hess_A_unchecked(c, e, y), eps, flat, nodes)
    return h.reshape(arr.shape + (3,))


# ---------------------------------------------------------------------------
# scans


def _local_pairs(rng, x, scale_lo=1e-4, scale_hi=0.5):
    rel = sampling.loguniform(rng, (x.shape[0], 1), scale_lo, scale_hi)
    return x * np.abs(1 + rel * rng.uniform(-1, 1, x.shape))


def _split_pairs(e, n, rng):
    """Half independent pairs, half small perturbations of a common base."""
    n_far = n // 2
    x1 = sampling.triples(e, n, rng)
    far = sampling.triples(e, n_far, rng)
    near = _local_pairs(rng, x1[n_far:])
    return x1, np.concatenate([far, near])


def scan_A2(c, e, samples, seed=0, tol=TOL):
    rng = np.random.default_rng(seed)
    x = sampling.triples(e, samples, rng)
    lower, upper, scale = _a2(c, e, x)
    return _summarize("A2", np.minimum(lower, upper), scale, x, seed, tol)


def scan_A3(c, e, samples, seed=0, tol=TOL):
    rng = np.random.default_rng(seed)
    x1, x2 = _split_pairs(e, samples, rng)
    margin, scale = _a3(c, e, x1, x2)
    return _summarize("A3", margin, scale, np.hstack([x1, x2]), seed, tol)


def _interior_points(e, n, rng, margin_cfg):
    out = np.empty((0, 3))
    while out.shape[0] < n:
        x = sampling.triples(e, n, rng, degenerate=0.0)
        out = np.concatenate([out, x[hess_margin_ok(e, x, margin_cfg)]])
    return out[:n]


def scan_A3_inf(c, e, samples, seed=0, tol=TOL, margin_cfg=HESS_MARGIN):
    rng = np.random.default_rng(seed)
    x = _interior_points(e, samples, rng, margin_cfg)
    d = x * rng.standard_normal(x.shape)
    margin, scale = _a3_inf(c, e, x, d, margin_cfg)
    return _summarize("A3_inf", margin, scale, np.hstack([x, d]), seed, tol)


def scan_A4(c, e, samples, seed=0, tol=TOL):
    rng = np.random.default_rng(seed)
    x, x1 = _split_pairs(e, samples, rng)
    # a slice of base points exactly on a surface, using the extended gradient
    k = samples // 10
    which = rng.integers(0, 3, size=k)
    for i, surface in enumerate(sampling.SURFACES):
        sel = np.flatnonzero(which == i)
        x[sel] = sampling.onto_surface(e, x[sel], surface)
    margin, scale = _a4(c, e, x, x1)
    return _summarize("A4", margin, scale, np.hstack([x, x1]), seed, tol)


def scan_B3(c, e, samples, seed=0, tol=TOL):
    rng = np.random.default_rng(seed)
    t1, t2 = _split_pairs(e, samples, rng)
    x1 = sampling.domain_points(e, t1, rng)
    x2 = sampling.domain_points(e, t2, rng)
    margin, scale = _b3(c, e, x1, x2)
    return _summarize("B3", margin, scale, np.hstack([x1, x2]), seed, tol)


def scan_B3_inf(c, e, samples, seed=0, tol=TOL, margin_cfg=HESS_MARGIN):
    rng = np.random.default_rng(seed)
    t = _interior_points(e, samples, rng, margin_cfg)
    x = sampling.domain_points(e, t, rng)
    d6 = x * rng.standard_normal(x.shape)
    margin, scale = _b3_inf(c, e, x, d6, margin_cfg)
    return _summarize("B3_inf", margin, scale, np.hstack([x, d6]), seed, tol)


def scan_B4(c, e, samples, seed=0, tol=TOL):
    rng = np.random.default_rng(seed)
    t, t1 = _split_pairs(e, samples, rng)
    x = sampling.domain_points(e, t, rng)
    x1 = sampling.domain_points(e, t1, rng)
    margin, scale = _b4(c, e, x, x1)
    return _summarize("B4", margin, scale, np.hstack([x, x1]), seed, tol)


def scan_A3_psd_agreement(c, e, samples, seed=0, tol=TOL, margin_cfg=HESS_MARGIN):
    """A negative infinitesimal margin must come with a failing ``A_sign`` PSD test.

    The sign is ``-sign(d_v d_w)``, the one that turns ``-2u|d_v||d_w|``
    into ``2 sign u d_v d_w``.  Margin is 1 per agreeing sample, -1 otherwise.
    """
    rng = np.random.default_rng(seed)
    x = _interior_points(e, samples, rng, margin_cfg)
    d = x * rng.standard_normal(x.shape)
    margin, scale = _a3_inf(c, e, x, d, margin_cfg)
    sign = np.where(d[:, 1] * d[:, 2] > 0, -1, 1)
    psd = np.empty(samples, dtype=bool)
    for sg in (1, -1):
        sel = sign == sg
        if np.any(sel):
            psd[sel] = is_psd(build_A_pm(c, e, x[sel], sg, margin_cfg))
    failed_inf = margin / scale < -tol
    agree = ~(failed_inf & psd)
    return _summarize("A3_inf_vs_psd", np.where(agree, 1.0, -1.0), np.ones(samples),
                      np.hstack([x, d]), seed, tol=0.5)


def scan_A3_mollified(c, e, samples, seed=0, tol=TOL, eps=None, nodes=8):
    """Midpoint inequality for the mollified ``A`` on triples inside ``(eps, inf)^3``."""
    rng = np.random.default_rng(seed)
    x1 = sampling.loguniform(rng, (samples, 3), 1e-2, 1e2)
    x2 = np.where(rng.random((samples, 1)) < 0.5,
                  sampling.loguniform(rng, (samples, 3), 1e-2, 1e2), _local_pairs(rng, x1))
    if eps is None:
        eps = 0.5 * min(x1.min(), x2.min())
    margin, scale = _a3(c, e, x1, x2,
                        afun=lambda cc, ee, y: mollify_A(cc, ee, eps, y, nodes, check=False))
    return _summarize("A3_mollified", margin, scale, np.hstack([x1, x2]), seed, tol)


@dataclass
class SuiteConfig:
    samples: int = 100_000
    c1_samples: int = 1_000
    mollified_samples: int = 1_000
    seed: int = 0
    tol: float = TOL
    threads: int = 1


SUITE = (
    "A2", "A3", "A3_inf", "A4", "B3", "B3_inf", "B4",
    "C1[up=vq]", "C1[up=wr]", "C1[vq=wr]", "A3_inf_vs_psd", "A3_mollified",
)


def _run_one(name, c, e, cfg: SuiteConfig, seed):
    n, tol = cfg.samples, cfg.tol
    if name.startswith("C1["):
        return check_C1_across_surfaces(c, e, name[3:-1], cfg.c1_samples, seed)
    fn = {
        "A2": scan_A2, "A3": scan_A3, "A3_inf": scan_A3_inf, "A4": scan_A4,
        "B3": scan_B3, "B3_inf": scan_B3_inf, "B4": scan_B4,
        "A3_inf_vs_psd": scan_A3_psd_agreement,
    }.get(name)
    if fn is not None:
        return fn(c, e, n, seed, tol)
    if name == "A3_mollified":
        return scan_A3_mollified(c, e, cfg.mollified_samples, seed, tol)
    raise KeyError(name)


def run_suite(c: Coefficients, e: Exponents, config: SuiteConfig | None = None,
              names=SUITE) -> list[PropertyResult]:
    """Run every property scan; property ``i`` uses seed ``config.seed + i``."""
    cfg = config or SuiteConfig()
    jobs = [(name, cfg.seed + SUITE.index(name)) for name in names]
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            return list(pool.map(lambda j: _run_one(j[0], c, e, cfg, j[1]), jobs))
    return [_run_one(name, c, e, cfg, sd) for name, sd in jobs]


__all__ = [
    "PropertyResult", "SuiteConfig", "SUITE", "TOL",
    "check_A2", "check_A3_midpoint", "check_A3_infinitesimal", "check_A4_tangent",
    "check_B_main", "check_B_infinitesimal", "check_B_tangent", "check_C1_across_surfaces",
    "mollify_A", "mollify_grad_A", "mollify_hess_A", "mollifier_rule", "bump",
    "run_suite",
]
