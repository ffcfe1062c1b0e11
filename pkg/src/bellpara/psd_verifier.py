"""Positive semi-definiteness of the reduced matrices ``M`` and ``A_pm``.

``A_pm`` is the Hessian of ``A`` with ``+-u`` added to the (v, w) entries.
Conjugating by ``D = diag(u^(1-p/2), u^(p/q-p/2), u^(p/r-p/2))`` turns it into
``M``, which only depends on ``t = v^q/u^p`` and ``s = w^r/u^p``.  A region
scan samples ``(t, s)`` inside each of the six regions and checks ``M`` for
both signs by leading minors and, independently, by its smallest eigenvalue.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .core_bellman import (
    HESS_MARGIN,
    REGIONS,
    Coefficients,
    Exponents,
    Region,
    _points,
    classify_gamma,
    gamma_derivatives,
    hess_A,
)
from .errors import BoundaryError, DomainError

TOL_ABS = 1e-12
TOL_REL = 1e-9
LOG_RANGE = (1e-3, 1e3)
SHARD_SIZE = 20_000


def build_M(c: Coefficients, e: Exponents, g, sign: int, margin: float = HESS_MARGIN) -> np.ndarray:
    """Reduced 3x3 matrix at ``g = (t, s)``; shape ``(..., 3, 3)``."""
    arr, _ = _points(g, 2)
    if np.any(arr <= 0):
        raise DomainError("t and s must be positive")
    if np.any(np.asarray(classify_gamma(arr.reshape(-1, 2), margin)) == 0):
        raise BoundaryError("(t, s) too close to a region boundary")
    d = gamma_derivatives(c, e, arr)
    t, s = arr[..., 0], arr[..., 1]
    p, q, r = float(e.p), float(e.q), float(e.r)
    m = np.empty(arr.shape[:-1] + (3, 3))
    m[..., 0, 0] = (p * (p - 1) * (d["g"] - t * d["t"] - s * d["s"])
                    + 2 * p * p * t * s * d["ts"] + p * p * t * t * d["tt"]
                    + p * p * s * s * d["ss"])
    m[..., 0, 1] = -p * q * t ** (1 - 1 / q) * s * d["ts"] - p * q * t ** (2 - 1 / q) * d["tt"]
    m[..., 0, 2] = -p * r * t * s ** (1 - 1 / r) * d["ts"] - p * r * s ** (2 - 1 / r) * d["ss"]
    m[..., 1, 1] = q * (q - 1) * t ** (1 - 2 / q) * d["t"] + q * q * t ** (2 - 2 / q) * d["tt"]
    m[..., 1, 2] = q * r * t ** (1 - 1 / q) * s ** (1 - 1 / r) * d["ts"] + sign
    m[..., 2, 2] = r * (r - 1) * s ** (1 - 2 / r) * d["s"] + r * r * s ** (2 - 2 / r) * d["ss"]
    m[..., 1, 0] = m[..., 0, 1]
    m[..., 2, 0] = m[..., 0, 2]
    m[..., 2, 1] = m[..., 1, 2]
    return m


def build_A_pm(c: Coefficients, e: Exponents, x, sign: int, margin: float = HESS_MARGIN) -> np.ndarray:
    arr, _ = _points(x, 3)
    h = np.array(hess_A(c, e, arr, margin))
    h[..., 1, 2] += sign * arr[..., 0]
    h[..., 2, 1] += sign * arr[..., 0]
    return h


def conjugation_diag(e: Exponents, u) -> np.ndarray:
    """Diagonal of ``D`` with ``M = D A_pm D``."""
    u = np.asarray(u, dtype=float)
    p, q, r = float(e.p), float(e.q), float(e.r)
    return np.stack([u ** (1 - p / 2), u ** (p / q - p / 2), u ** (p / r - p / 2)], axis=-1)


@dataclass(frozen=True)
class MinorTriple:
    m1: float
    m2: float
    m3: float


def leading_minors(m) -> np.ndarray:
    """Leading principal minors by cofactor expansion, shape ``(..., 3)``."""
    m = np.asarray(m, dtype=float)
    a, b, c = m[..., 0, 0], m[..., 0, 1], m[..., 0, 2]
    d, e_, f = m[..., 1, 1], m[..., 1, 2], m[..., 2, 2]
    m1 = a
    m2 = a * d - b * b
    m3 = a * (d * f - e_ * e_) - b * (b * f - e_ * c) + c * (b * e_ - d * c)
    return np.stack([m1, m2, m3], axis=-1)


def principal_minors(m) -> MinorTriple:
    vals = leading_minors(m)
    return MinorTriple(*(float(v) for v in vals))


def minor_scales(m) -> np.ndarray:
    diag = np.abs(np.einsum("...ii->...i", np.asarray(m, dtype=float)))
    return np.cumprod(diag, axis=-1)


def scaled_minors(m) -> np.ndarray:
    """Minors divided by the matching products of diagonal magnitudes."""
    minors = leading_minors(m)
    scale = minor_scales(m)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = minors / scale
    return np.where(scale > 0, out, np.where(minors < 0, -np.inf, np.inf))


def psd_tests(m, tol_abs: float = TOL_ABS, tol_rel: float = TOL_REL):
    """Return (minor_ok, eig_ok) boolean arrays for a stack of symmetric matrices."""
    m = np.asarray(m, dtype=float)
    minors = leading_minors(m)
    minor_ok = np.all(minors >= -(tol_abs + tol_rel * minor_scales(m)), axis=-1)
    ev = np.linalg.eigvalsh(m)
    eig_scale = np.max(np.abs(ev), axis=-1)
    eig_ok = ev[..., 0] >= -(tol_abs + tol_rel * eig_scale)
    return minor_ok, eig_ok


def is_psd(m, tol_abs: float = TOL_ABS, tol_rel: float = TOL_REL):
    """PSD by leading minors AND smallest eigenvalue; see ``psd_tests`` for the split."""
    minor_ok, eig_ok = psd_tests(m, tol_abs, tol_rel)
    res = minor_ok & eig_ok
    return bool(res) if np.ndim(res) == 0 else res


def region1_minors_closed(c: Coefficients, e: Exponents, g, sign: int = 1) -> MinorTriple:
    """Closed-form Region-1 minors (independent of the numeric pipeline).

    The determinant does not depend on the sign because the off-diagonal
    entry is ``+-1`` and enters squared.
    """
    arr, _ = _points(g, 2)
    t, s = float(arr[0]), float(arr[1])
    if not (1 < s < t):
        raise DomainError("region 1 requires 1 < s < t")
    A, B, C = c.A, c.B, c.C
    p, q, r = float(e.p), float(e.q), float(e.r)
    m1 = A * p * (p - 1)
    m2 = A * B * p * (p - 1) * q * (q - 1) * t ** (1 - 2 / q)
    m3 = A * B * C * p * (p - 1) * q * (q - 1) * r * (r - 1) * t ** (1 - 2 / q) * s ** (1 - 2 / r) - m1
    return MinorTriple(m1, m2, m3)


# ---------------------------------------------------------------------------
# sampling


def _loguniform(rng, lo, hi, size):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


def sample_region(region: Region, n: int, rng: np.random.Generator,
                  log_range=LOG_RANGE, margin: float = HESS_MARGIN) -> np.ndarray:
    """Log-uniform ``(t, s)`` points strictly inside one region.

    Coordinates below 1 are drawn from ``(lo, 1)``, above 1 from ``(1, hi)``,
    and two coordinates on the same side are sorted to respect the order.
    Points that land within ``margin`` of a boundary are redrawn.
    """
    lo, hi = log_range
    # (t side, s side, t < s?) per region; side -1 means below 1
    layout = {
        Region.R1: (1, 1, False),
        Region.R2: (1, -1, None),
        Region.R3: (-1, -1, False),
        Region.R4: (-1, -1, True),
        Region.R5: (-1, 1, None),
        Region.R6: (1, 1, True),
    }
    t_side, s_side, t_below_s = layout[region]
    out = np.empty((0, 2))
    while out.shape[0] < n:
        need = n - out.shape[0]
        t = _loguniform(rng, *((lo, 1.0) if t_side < 0 else (1.0, hi)), need)
        s = _loguniform(rng, *((lo, 1.0) if s_side < 0 else (1.0, hi)), need)
        if t_below_s is not None:
            small, big = np.minimum(t, s), np.maximum(t, s)
            t, s = (small, big) if t_below_s else (big, small)
        pts = np.stack([t, s], axis=-1)
        keep = np.asarray(classify_gamma(pts, margin)) == region.value
        out = np.concatenate([out, pts[keep]])
    return out[:n]


# ---------------------------------------------------------------------------
# scans


@dataclass
class ScanReport:
    exponents: Exponents
    coefficients: Coefficients
    region: Region
    sign: int
    samples: int
    seed: int
    min_minor_scaled: float
    min_eig_scaled: float
    violations: np.ndarray = field(repr=False)  # rows: t, s, m1, m2, m3
    disagreements: int = 0

    @property
    def violation_count(self) -> int:
        return int(self.violations.shape[0])

    @property
    def passed(self) -> bool:
        return self.violation_count == 0 and self.disagreements == 0


def _scan_shard(c, e, region, n, seed, tol_abs, tol_rel, log_range):
    rng = np.random.default_rng(seed)
    g = sample_region(region, n, rng, log_range)
    out = {}
    for sign in (1, -1):
        m = build_M(c, e, g, sign)
        minors = leading_minors(m)
        minor_ok, eig_ok = psd_tests(m, tol_abs, tol_rel)
        ev = np.linalg.eigvalsh(m)
        diag = np.abs(np.einsum("...ii->...i", m)).max(axis=-1)
        bad = ~minor_ok
        out[sign] = dict(
            min_scaled=float(np.min(scaled_minors(m))),
            min_eig=float(np.min(ev[:, 0] / np.where(diag > 0, diag, 1.0))),
            viol=np.concatenate([g[bad], minors[bad]], axis=1),
            disagree=int(np.sum(minor_ok != eig_ok)),
        )
    return out


def scan_regions(c: Coefficients, e: Exponents, samples_per_region: int, seed: int = 0,
                 tol_abs: float = TOL_ABS, tol_rel: float = TOL_REL, threads: int = 1,
                 shard_size: int = SHARD_SIZE, log_range=LOG_RANGE,
                 regions=REGIONS) -> list[ScanReport]:
    """PSD scan of ``M`` for both signs in every region.

    Work is split into shards of ``shard_size`` samples; shard ``k`` (counted
    over regions in order) is drawn with seed ``seed + k``, so the output does
    not depend on ``threads``.
    """
    if samples_per_region < 1:
        raise ValueError("samples_per_region must be >= 1")
    jobs = []
    k = 0
    for region in regions:
        left = samples_per_region
        while left > 0:
            n = min(shard_size, left)
            jobs.append((region, n, seed + k))
            left -= n
            k += 1

    def run(job):
        region, n, sd = job
        return _scan_shard(c, e, region, n, sd, tol_abs, tol_rel, log_range)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]

    reports = []
    for region in regions:
        parts = [res for job, res in zip(jobs, results) if job[0] == region]
        for sign in (1, -1):
            reports.append(ScanReport(
                exponents=e,
                coefficients=c,
                region=region,
                sign=sign,
                samples=samples_per_region,
                seed=seed,
                min_minor_scaled=min(pt[sign]["min_scaled"] for pt in parts),
                min_eig_scaled=min(pt[sign]["min_eig"] for pt in parts),
                violations=np.concatenate([pt[sign]["viol"] for pt in parts]),
                disagreements=sum(pt[sign]["disagree"] for pt in parts),
            ))
    return reports
