"""Explicit Bellman function for the trilinear dyadic paraproduct.

The function ``A(u, v, w)`` is piecewise: which formula applies depends on
the ordering of ``u**p``, ``v**q`` and ``w**r``.  Every branch is a short sum
of monomials ``k * u**a * v**b * w**c``, so values, gradients and Hessians
are all computed from a single monomial table.  The reduced function
``gamma(t, s)`` with ``A = u**p * gamma(v**q / u**p, w**r / u**p)`` has its own
independently transcribed table; the two are cross-checked in the tests.

All evaluators broadcast over leading axes: a point set has shape
``(..., 3)`` (or ``(..., 6)`` for the Bellman function ``B``, ``(..., 2)``
for ``gamma``).  A single point returns a Python float.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BoundaryError, ConstraintViolation, DomainError

BRANCH_TOL = 1e-12
HESS_MARGIN = 1e-6


@dataclass(frozen=True)
class Exponents:
    """A triple ``(p, q, r)`` with ``1/p + 1/q + 1/r = 1`` and ``q > r``."""

    p: float
    q: float
    r: float

    def __post_init__(self):
        p, q, r = self.p, self.q, self.r
        for name, val in (("p", p), ("q", q), ("r", r)):
            if not np.isfinite(float(val)):
                raise ConstraintViolation(f"{name}={val} is not finite")
            if not float(val) > 1:
                raise ConstraintViolation(f"{name}={val} must exceed 1")
        if not float(q) > float(r):
            raise ConstraintViolation(f"q > r fails (q={q}, r={r})")
        gap = abs(1 / float(p) + 1 / float(q) + 1 / float(r) - 1)
        if gap > 1e-12:
            raise ConstraintViolation(f"1/p + 1/q + 1/r - 1 = {gap:.3e} exceeds 1e-12")

    @property
    def powers(self) -> np.ndarray:
        return np.array([float(self.p), float(self.q), float(self.r)])


def exponents_new(p, q, r) -> Exponents:
    return Exponents(p, q, r)


@dataclass(frozen=True)
class Coefficients:
    A: float
    B: float
    C: float

    def __post_init__(self):
        for name in ("A", "B", "C"):
            val = float(getattr(self, name))
            if not (np.isfinite(val) and val > 0):
                raise ConstraintViolation(f"{name}={val} must be positive and finite")
            object.__setattr__(self, name, val)

    def scaled(self, lam: float) -> "Coefficients":
        return Coefficients(lam * self.A, lam * self.B, lam * self.C)


def default_coefficient_fractions(e: Exponents) -> tuple[Fraction, Fraction, Fraction]:
    """Exact rational (A, B, C) for exponents representable as binary fractions."""
    p, q, r = (Fraction(x) for x in (e.p, e.q, e.r))
    A = 88 * q**4 * r / ((p - 1) * (r - 1) * (q - r))
    C = 11 * q**3 * r / ((r - 1) * (q - r))
    return A, Fraction(1), C


def coefficients_default(e: Exponents) -> Coefficients:
    p, q, r = float(e.p), float(e.q), float(e.r)
    A = 88 * q**4 * r / ((p - 1) * (r - 1) * (q - r))
    C = 11 * q**3 * r / ((r - 1) * (q - r))
    return Coefficients(A, 1.0, C)


def c_constant(c: Coefficients, e: Exponents) -> float:
    return max(c.A * e.p, c.B * e.q, c.C * e.r)


class Region(enum.Enum):
    R1 = 1  # u^p <= w^r <= v^q
    R2 = 2  # w^r <= u^p <= v^q
    R3 = 3  # w^r <= v^q <= u^p
    R4 = 4  # v^q <= w^r <= u^p
    R5 = 5  # v^q <= u^p <= w^r
    R6 = 6  # u^p <= v^q <= w^r
    BOUNDARY = 0


# Region k as an ordering (smallest, middle, largest) of indices into
# (u^p, v^q, w^r).
REGION_ORDER = {
    Region.R1: (0, 2, 1),
    Region.R2: (2, 0, 1),
    Region.R3: (2, 1, 0),
    Region.R4: (1, 2, 0),
    Region.R5: (1, 0, 2),
    Region.R6: (0, 1, 2),
}
REGIONS = tuple(REGION_ORDER)


@dataclass(frozen=True)
class TriplePoint:
    u: float
    v: float
    w: float

    def __post_init__(self):
        if min(self.u, self.v, self.w) < 0:
            raise DomainError(f"negative coordinate in {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w], dtype=float)


@dataclass(frozen=True)
class GammaPoint:
    t: float
    s: float

    def __post_init__(self):
        if not (self.t > 0 and self.s > 0):
            raise DomainError(f"t and s must be positive, got {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.s], dtype=float)


@dataclass(frozen=True)
class BellmanPoint:
    u: float
    v: float
    w: float
    U: float
    V: float
    W: float

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w, self.U, self.V, self.W], dtype=float)

    def check(self, e: Exponents) -> "BellmanPoint":
        check_domain(e, self.as_array())
        return self

    @classmethod
    def new(cls, e: Exponents, u, v, w, U, V, W) -> "BellmanPoint":
        return cls(u, v, w, U, V, W).check(e)


def _points(x, dim: int) -> tuple[np.ndarray, bool]:
    if hasattr(x, "as_array"):
        x = x.as_array()
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1:] != (dim,):
        raise ValueError(f"expected trailing dimension {dim}, got shape {arr.shape}")
    return arr, arr.ndim == 1


def _out(val: np.ndarray, single: bool):
    return float(val) if single else val


def check_domain(e: Exponents, x) -> None:
    """Raise DomainError unless every row of ``x`` lies in the Bellman domain.

    ``u^p <= U`` is tested with a few ulps of slack, since different power
    routines disagree in the last bit.
    """
    arr, _ = _points(x, 6)
    pw = e.powers
    low = arr[..., :3]
    high = arr[..., 3:]
    if np.any(arr < 0) or np.any(low**pw > high * (1 + 8 * np.finfo(float).eps)):
        raise DomainError("point outside {u^p <= U, v^q <= V, w^r <= W} or negative")


# ---------------------------------------------------------------------------
# monomial tables


def a_branch_table(c: Coefficients, e: Exponents) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-region (coefficients, exponent rows) of the monomials of ``A``."""
    A, B, C = c.A, c.B, c.C
    p, q, r = float(e.p), float(e.q), float(e.r)
    shared = (A * (p - 1) - (B + C)) / (p - 1)
    cross = B * q * (q - r) / (2 * r * (q - 2))
    wtail = (2 * C * r - B * (q - r)) / (2 * r)
    rows = [
        [(A, (p, 0, 0)), (B, (0, q, 0)), (C, (0, 0, r))],
        [((A * (p - 1) - C) / (p - 1), (p, 0, 0)), (B, (0, q, 0)),
         (C * p / (p - 1), (1, 0, r - r / p))],
        [(shared, (p, 0, 0)), (B * p / (p - 1), (1, q - q / p, 0)),
         (C * p / (p - 1), (1, 0, r - r / p))],
        [(shared, (p, 0, 0)), (B * q / 2, (1, 2, 1 - r / q)),
         ((2 * C * p * r - B * p * (q - r)) / (2 * r * (p - 1)), (1, 0, r - r / p))],
        [((2 * A * r * (p - 1) - B * (q + r)) / (2 * r * (p - 1)), (p, 0, 0)),
         (B * q**2 / (2 * p * (q - 2)), (p - 2 * p / q, 2, 0)),
         (cross, (0, 2, r - 2 * r / q)), (wtail, (0, 0, r))],
        [(A, (p, 0, 0)), (B * q / (p * (q - 2)), (0, q, 0)),
         (cross, (0, 2, r - 2 * r / q)), (wtail, (0, 0, r))],
    ]
    return [(np.array([k for k, _ in br]), np.array([ex for _, ex in br], dtype=float))
            for br in rows]


def gamma_branch_table(c: Coefficients, e: Exponents) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-region (coefficients, (t, s) exponent rows) of ``gamma``."""
    A, B, C = c.A, c.B, c.C
    p, q, r = float(e.p), float(e.q), float(e.r)
    shared = (A * (p - 1) - (B + C)) / (p - 1)
    cross = B * q * (q - r) / (2 * r * (q - 2))
    stail = (2 * C * r - B * (q - r)) / (2 * r)
    rows = [
        [(A, (0, 0)), (B, (1, 0)), (C, (0, 1))],
        [((A * (p - 1) - C) / (p - 1), (0, 0)), (B, (1, 0)), (C * p / (p - 1), (0, 1 - 1 / p))],
        [(shared, (0, 0)), (B * p / (p - 1), (1 - 1 / p, 0)), (C * p / (p - 1), (0, 1 - 1 / p))],
        [(shared, (0, 0)), (B * q / 2, (2 / q, 1 / r - 1 / q)),
         ((2 * C * p * r - B * p * (q - r)) / (2 * r * (p - 1)), (0, 1 - 1 / p))],
        [((2 * A * r * (p - 1) - B * (q + r)) / (2 * r * (p - 1)), (0, 0)),
         (B * q**2 / (2 * p * (q - 2)), (2 / q, 0)),
         (cross, (2 / q, 1 - 2 / q)), (stail, (0, 1))],
        [(A, (0, 0)), (B * q / (p * (q - 2)), (1, 0)),
         (cross, (2 / q, 1 - 2 / q)), (stail, (0, 1))],
    ]
    return [(np.array([k for k, _ in br]), np.array([ex for _, ex in br], dtype=float))
            for br in rows]


# ---------------------------------------------------------------------------
# region dispatch


def _le(a, b, tol):
    return a <= b + tol * np.maximum(np.abs(a), np.abs(b))


def _branch_from_keys(keys: np.ndarray, tol: float) -> np.ndarray:
    """Index 0..5 of the first region whose non-strict chain holds."""
    idx = np.full(keys.shape[:-1], -1, dtype=int)
    for k, region in enumerate(REGIONS):
        i, j, m = REGION_ORDER[region]
        ok = _le(keys[..., i], keys[..., j], tol) & _le(keys[..., j], keys[..., m], tol)
        idx = np.where((idx < 0) & ok, k, idx)
    return idx


def branch_index(e: Exponents, x, tol: float = BRANCH_TOL) -> np.ndarray:
    """Deterministic branch choice (0-based) for points of ``[0, inf)^3``."""
    arr, _ = _points(x, 3)
    return _branch_from_keys(arr**e.powers, tol)


def gamma_branch_index(g, tol: float = BRANCH_TOL) -> np.ndarray:
    arr, _ = _points(g, 2)
    keys = np.concatenate([np.ones(arr.shape[:-1] + (1,)), arr], axis=-1)
    return _branch_from_keys(keys, tol)


def _strict_region(keys: np.ndarray, tol: float) -> np.ndarray:
    """Region value 1..6, or 0 where any two keys are within ``tol`` (relative)."""
    a, b, c = keys[..., 0], keys[..., 1], keys[..., 2]

    def apart(x, y):
        return np.abs(x - y) > tol * np.maximum(x, y)

    separated = apart(a, b) & apart(a, c) & apart(b, c)
    idx = _branch_from_keys(keys, 0.0) + 1
    return np.where(separated, idx, 0)


def classify_region(x, e: Exponents, tol: float = BRANCH_TOL):
    arr, single = _points(x, 3)
    if np.any(arr <= 0):
        raise DomainError("classification needs u, v, w > 0")
    vals = _strict_region(arr**e.powers, tol)
    if single:
        return Region(int(vals))
    return vals


def classify_gamma(g, tol: float = BRANCH_TOL):
    arr, single = _points(g, 2)
    if np.any(arr <= 0):
        raise DomainError("classification needs t, s > 0")
    keys = np.concatenate([np.ones(arr.shape[:-1] + (1,)), arr], axis=-1)
    vals = _strict_region(keys, tol)
    if single:
        return Region(int(vals))
    return vals


# ---------------------------------------------------------------------------
# monomial evaluation


def _mono_values(coef, expo, pts):
    # pts: (n, d); expo: (k, d)
    terms = np.prod(pts[:, None, :] ** expo[None, :, :], axis=-1)
    return terms @ coef


def _mono_limit(expo_rows: np.ndarray, pts: np.ndarray, powers: np.ndarray) -> np.ndarray:
    """Monomials ``x**b`` including their limits at coordinate planes.

    Zero coordinates are approached along ``x_i = tau**(1/powers_i)``; the
    monomial then behaves like ``tau**sum(b_i / powers_i)`` in the vanishing
    coordinates.  Returns shape (n, k).
    """
    zero = pts == 0.0
    safe = np.where(zero, 1.0, pts)
    base = np.prod(safe[:, None, :] ** expo_rows[None, :, :], axis=-1)
    if not zero.any():
        return base
    touched = zero[:, None, :] & (expo_rows[None, :, :] != 0)
    tau_exp = np.sum(np.where(zero[:, None, :], expo_rows[None, :, :] / powers, 0.0), axis=-1)
    lim = np.where(tau_exp > 1e-12, 0.0, np.where(tau_exp < -1e-12, np.inf, base))
    return np.where(touched.any(axis=-1), lim, base)


def _dispatch(table, idx, pts, fn, out_shape):
    out = np.zeros(out_shape)
    for k, (coef, expo) in enumerate(table):
        sel = idx == k
        if np.any(sel):
            out[sel] = fn(coef, expo, pts[sel])
    return out


def eval_A(c: Coefficients, e: Exponents, x):
    arr, single = _points(x, 3)
    if np.any(arr < 0):
        raise DomainError("A is defined on [0, inf)^3")
    flat = arr.reshape(-1, 3)
    idx = branch_index(e, flat)
    vals = _dispatch(a_branch_table(c, e), idx, flat, _mono_values, (flat.shape[0],))
    return _out(vals.reshape(arr.shape[:-1]), single)


def eval_A_branch(c: Coefficients, e: Exponents, region: Region, x):
    """Value of one fixed branch formula, regardless of where ``x`` lies."""
    arr, single = _points(x, 3)
    coef, expo = a_branch_table(c, e)[region.value - 1]
    flat = arr.reshape(-1, 3)
    return _out(_mono_values(coef, expo, flat).reshape(arr.shape[:-1]), single)


def eval_gamma(c: Coefficients, e: Exponents, g):
    arr, single = _points(g, 2)
    if np.any(arr <= 0):
        raise DomainError("gamma needs t, s > 0")
    flat = arr.reshape(-1, 2)
    idx = gamma_branch_index(flat)
    vals = _dispatch(gamma_branch_table(c, e), idx, flat, _mono_values, (flat.shape[0],))
    return _out(vals.reshape(arr.shape[:-1]), single)


def eval_gamma_branch(c: Coefficients, e: Exponents, region: Region, g):
    arr, single = _points(g, 2)
    coef, expo = gamma_branch_table(c, e)[region.value - 1]
    flat = arr.reshape(-1, 2)
    return _out(_mono_values(coef, expo, flat).reshape(arr.shape[:-1]), single)


def _grad_fn(powers):
    def fn(coef, expo, pts):
        d = expo.shape[1]
        out = np.zeros((pts.shape[0], d))
        for j in range(d):
            shifted = expo.copy()
            shifted[:, j] -= 1.0
            mono = _mono_limit(shifted, pts, powers)
            k = coef * expo[:, j]
            # terms whose exponent in x_j is 0 do not depend on x_j
            mono = np.where(k[None, :] == 0, 0.0, mono)
            out[:, j] = mono @ k
        return out
    return fn


def _branch_grad(table, idx, flat, powers):
    return _dispatch(table, idx, flat, _grad_fn(powers), flat.shape)


def grad_A(c: Coefficients, e: Exponents, x):
    """Gradient of ``A``, continuously extended to surfaces and coordinate planes."""
    arr, single = _points(x, 3)
    if np.any(arr < 0):
        raise DomainError("A is defined on [0, inf)^3")
    flat = arr.reshape(-1, 3)
    g = _branch_grad(a_branch_table(c, e), branch_index(e, flat), flat, e.powers)
    g = g.reshape(arr.shape)
    return g if not single else g.copy()


def grad_A_branch(c: Coefficients, e: Exponents, region: Region, x):
    arr, _ = _points(x, 3)
    flat = arr.reshape(-1, 3)
    idx = np.full(flat.shape[0], region.value - 1)
    return _branch_grad(a_branch_table(c, e), idx, flat, e.powers).reshape(arr.shape)


def _hess_fn(coef, expo, pts):
    d = expo.shape[1]
    out = np.zeros((pts.shape[0], d, d))
    for j in range(d):
        for k in range(j, d):
            shifted = expo.copy()
            shifted[:, j] -= 1.0
            shifted[:, k] -= 1.0
            fac = coef * expo[:, j] * (expo[:, k] - (1.0 if j == k else 0.0))
            mono = np.prod(pts[:, None, :] ** shifted[None, :, :], axis=-1)
            val = np.where(fac[None, :] == 0, 0.0, mono) @ fac
            out[:, j, k] = val
            out[:, k, j] = val
    return out


def hess_margin_ok(e: Exponents, x, margin: float = HESS_MARGIN) -> np.ndarray:
    arr, _ = _points(x, 3)
    keys = arr**e.powers
    away = _strict_region(keys, margin) > 0
    return away & (arr.min(axis=-1) > margin)


def hess_A_unchecked(c: Coefficients, e: Exponents, x) -> np.ndarray:
    """Piecewise Hessian of the active branch with no distance check.

    Needs strictly positive coordinates.  Used where the Hessian is only
    needed almost everywhere (e.g. under a mollifier integral).
    """
    arr, _ = _points(x, 3)
    flat = arr.reshape(-1, 3)
    idx = branch_index(e, flat)
    h = _dispatch(a_branch_table(c, e), idx, flat, _hess_fn, (flat.shape[0], 3, 3))
    return h.reshape(arr.shape + (3,))


def hess_A(c: Coefficients, e: Exponents, x, margin: float = HESS_MARGIN) -> np.ndarray:
    arr, _ = _points(x, 3)
    if not np.all(hess_margin_ok(e, arr, margin)):
        raise BoundaryError(f"Hessian requested within relative margin {margin} of a "
                            "critical surface or coordinate plane")
    return hess_A_unchecked(c, e, arr)


def gamma_derivatives(c: Coefficients, e: Exponents, g) -> dict[str, np.ndarray]:
    """gamma and its partials up to order two, keys ``g, t, s, tt, ts, ss``."""
    arr, _ = _points(g, 2)
    flat = arr.reshape(-1, 2)
    table = gamma_branch_table(c, e)
    idx = gamma_branch_index(flat)
    val = _dispatch(table, idx, flat, _mono_values, (flat.shape[0],))
    grad = _branch_grad(table, idx, flat, np.ones(2))
    hess = _dispatch(table, idx, flat, _hess_fn, (flat.shape[0], 2, 2))
    shape = arr.shape[:-1]
    return {
        "g": val.reshape(shape),
        "t": grad[:, 0].reshape(shape),
        "s": grad[:, 1].reshape(shape),
        "tt": hess[:, 0, 0].reshape(shape),
        "ts": hess[:, 0, 1].reshape(shape),
        "ss": hess[:, 1, 1].reshape(shape),
    }


# ---------------------------------------------------------------------------
# the Bellman function B = C_pqr (U/p + V/q + W/r) - A(u, v, w)


def eval_B(c: Coefficients, e: Exponents, x):
    arr, single = _points(x, 6)
    check_domain(e, arr)
    big = c_constant(c, e)
    lin = big * (arr[..., 3] / e.p + arr[..., 4] / e.q + arr[..., 5] / e.r)
    a = np.asarray(eval_A(c, e, arr[..., :3]))
    return _out(lin - a, single)


def grad_B(c: Coefficients, e: Exponents, x) -> np.ndarray:
    arr, _ = _points(x, 6)
    check_domain(e, arr)
    big = c_constant(c, e)
    ga = np.asarray(grad_A(c, e, arr[..., :3]))
    lin = np.broadcast_to(np.array([big / e.p, big / e.q, big / e.r]), ga.shape)
    return np.concatenate([-ga, lin], axis=-1)


def hess_B(c: Coefficients, e: Exponents, x, margin: float = HESS_MARGIN) -> np.ndarray:
    arr, _ = _points(x, 6)
    check_domain(e, arr)
    ha = hess_A(c, e, arr[..., :3], margin)
    out = np.zeros(arr.shape[:-1] + (6, 6))
    out[..., :3, :3] = -ha
    return out
