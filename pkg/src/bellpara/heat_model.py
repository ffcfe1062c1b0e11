"""Heat extensions of compactly supported profiles and the heat paraproduct.

Extensions are evaluated by composite Gauss-Legendre quadrature over the
support, split at the profile's breakpoints and into panels no wider than a
fraction of ``sqrt(t)`` so the Gaussian is resolved at every time.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy import special

from .core_bellman import Coefficients, Exponents, c_constant
from .errors import BoundaryError, EpsilonError, QuadratureError, TruncationWarning
from .property_suite import mollify_hess_A

GL_NODES = 16
PANEL_FRACTION = 0.5   # panel width <= PANEL_FRACTION * sqrt(t)
KERNEL_REACH = 40.0    # kernel treated as zero beyond KERNEL_REACH * sqrt(t) (it underflows)
FORM_REACH = 12.0      # x-range of the paraproduct integrand beyond the supports, in sqrt(t)


# ---------------------------------------------------------------------------
# profiles


@dataclass(frozen=True)
class Profile:
    """A bounded function with support in ``[lo, hi]`` and smooth between breakpoints."""

    fn: Callable
    lo: float
    hi: float
    breaks: tuple = ()
    deriv: Callable | None = None  # classical derivative, None if the profile jumps
    label: str = "profile"

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        inside = (y >= self.lo) & (y <= self.hi)
        return np.where(inside, self.fn(np.clip(y, self.lo, self.hi)), 0.0)

    @property
    def resolution(self) -> float:
        """Panel width that resolves the profile itself."""
        return (self.hi - self.lo) / 32

    @property
    def knots(self) -> np.ndarray:
        inner = [b for b in self.breaks if self.lo < b < self.hi]
        return np.array(sorted({self.lo, self.hi, *inner}))

    def power(self, p: float) -> "Profile":
        base = self.fn
        return Profile(lambda y: np.abs(base(y)) ** p, self.lo, self.hi, self.breaks,
                       None, f"{self.label}^{p:g}")

    def scaled(self, a: float) -> "Profile":
        base, d = self.fn, self.deriv
        return Profile(lambda y: a * base(y), self.lo, self.hi, self.breaks,
                       None if d is None else (lambda y: a * d(y)), self.label)

    def norm(self, p: float, nodes: int = 64) -> float:
        y, w = composite_rule(self.knots, (self.hi - self.lo) / 8, nodes)
        return float(np.dot(w, np.abs(self(y)) ** p) ** (1 / p))

    def sup(self, nodes: int = 64) -> float:
        y, _ = composite_rule(self.knots, (self.hi - self.lo) / 8, nodes)
        return float(np.max(np.abs(self(y))))


def indicator(a: float, b: float, height: float = 1.0) -> Profile:
    return Profile(lambda y: np.full(np.shape(y), float(height)), a, b, (), None,
                   f"{height:g}*1[{a:g},{b:g}]")


def smooth_bump(center: float = 0.0, width: float = 1.0, height: float = 1.0) -> Profile:
    """``height * exp(1 - 1/(1 - z^2))`` with ``z = (y - center)/width``; peak value ``height``."""

    def fn(y):
        z = (np.asarray(y, dtype=float) - center) / width
        inside = np.abs(z) < 1
        zz = np.where(inside, z, 0.0)
        return np.where(inside, height * np.exp(1 - 1 / (1 - zz**2)), 0.0)

    def d(y):
        z = (np.asarray(y, dtype=float) - center) / width
        inside = np.abs(z) < 1
        zz = np.where(inside, z, 0.0)
        val = height * np.exp(1 - 1 / (1 - zz**2)) * (-2 * zz / (1 - zz**2) ** 2) / width
        return np.where(inside, val, 0.0)

    return Profile(fn, center - width, center + width, (center,), d,
                   f"bump({center:g},{width:g},{height:g})")


def poly_bump(center: float = 0.0, width: float = 1.0, height: float = 1.0, power: int = 3) -> Profile:
    """``height * (1 - z^2)^power`` on ``|z| < 1``; C^(power-1) at the edges."""

    def fn(y):
        z = (np.asarray(y, dtype=float) - center) / width
        return height * np.clip(1 - z**2, 0, None) ** power

    def d(y):
        z = (np.asarray(y, dtype=float) - center) / width
        return height * power * np.clip(1 - z**2, 0, None) ** (power - 1) * (-2 * z) / width

    return Profile(fn, center - width, center + width, (center,), d,
                   f"poly({center:g},{width:g},{height:g},{power})")


def profile_sum(*parts: Profile) -> Profile:
    lo, hi = min(p.lo for p in parts), max(p.hi for p in parts)
    breaks = tuple(sorted({b for p in parts for b in (*p.breaks, p.lo, p.hi)}))
    derivs = [p.deriv for p in parts]
    deriv = None
    if all(d is not None for d in derivs):
        def deriv(y):
            y = np.asarray(y, dtype=float)
            return sum(np.where((y >= p.lo) & (y <= p.hi), p.deriv(y), 0.0) for p in parts)
    return Profile(lambda y: sum(p(y) for p in parts), lo, hi, breaks, deriv,
                   "+".join(p.label for p in parts))


# ---------------------------------------------------------------------------
# kernel and extensions


def heat_kernel(x, t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("heat kernel needs t > 0")
    return np.exp(-np.asarray(x, dtype=float) ** 2 / (2 * t)) / np.sqrt(2 * np.pi * t)


def heat_kernel_dx(x, t):
    x = np.asarray(x, dtype=float)
    return -x / t * heat_kernel(x, t)


def heat_kernel_dxx(x, t):
    x = np.asarray(x, dtype=float)
    return (x**2 / t**2 - 1 / t) * heat_kernel(x, t)


_KERNELS = (heat_kernel, heat_kernel_dx, heat_kernel_dxx)


def composite_rule(knots: np.ndarray, max_width: float, nodes: int = GL_NODES):
    """Gauss-Legendre nodes and weights on consecutive knot intervals, each
    split into equal panels of width at most ``max_width``."""
    g, gw = np.polynomial.legendre.leggauss(nodes)
    ys, ws = [], []
    for a, b in zip(knots[:-1], knots[1:]):
        if b <= a:
            continue
        k = max(1, int(np.ceil((b - a) / max_width)))
        edges = np.linspace(a, b, k + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        ys.append((mid[:, None] + half[:, None] * g).ravel())
        ws.append((half[:, None] * gw).ravel())
    if not ys:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(ys), np.concatenate(ws)


def _extend_once(f: Profile, x: np.ndarray, t: float, order: int, nodes: int) -> np.ndarray:
    st = np.sqrt(t)
    lo = max(f.lo, float(x.min()) - KERNEL_REACH * st)
    hi = min(f.hi, float(x.max()) + KERNEL_REACH * st)
    if hi <= lo:
        return np.zeros_like(x)
    knots = np.array(sorted({lo, hi, *(k for k in f.knots if lo < k < hi)}))
    y, w = composite_rule(knots, min(PANEL_FRACTION * st, f.resolution), nodes)
    fy = f(y) * w
    kern = _KERNELS[order]
    out = np.empty_like(x)
    for start in range(0, x.size, 512):
        xb = x[start:start + 512]
        out[start:start + 512] = kern(xb[:, None] - y[None, :], t) @ fy
    return out


def heat_extend(f: Profile, x, t: float, order: int = 0, nodes: int = GL_NODES,
                check: bool = True, rtol: float = 1e-10) -> np.ndarray:
    """``d^order/dx^order`` of the heat extension of ``f`` at time ``t``.

    With ``check`` set the result is recomputed with 1.5x the nodes and a
    disagreement beyond ``rtol`` (relative to ``sup|f| * t^(-order/2)``)
    raises ``QuadratureError``.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    val = _extend_once(f, x, t, order, nodes)
    if check:
        alt = _extend_once(f, x, t, order, nodes + nodes // 2)
        scale = f.sup() * t ** (-order / 2)
        err = float(np.max(np.abs(alt - val))) if x.size else 0.0
        if err > rtol * (1 + scale):
            raise QuadratureError(f"heat extension quadrature moved by {err:.3g} at t={t:g}")
    return val


def indicator_heat(a: float, b: float, x, t):
    """Closed form for the extension of the indicator of [a, b].

    Written as a difference of lower normal tails on each side of the
    midpoint, so values far from [a, b] keep full relative accuracy.
    """
    st = np.sqrt(t)
    x = np.asarray(x, dtype=float)
    right = special.ndtr((b - x) / st) - special.ndtr((a - x) / st)
    left = special.ndtr((x - a) / st) - special.ndtr((x - b) / st)
    return np.where(x >= 0.5 * (a + b), right, left)


# ---------------------------------------------------------------------------
# grid and fields


@dataclass(frozen=True)
class Grid1D:
    R: float = 4.0
    dx: float = 1.0 / 128
    delta: float = 0.05
    T: float = 2.0
    dt: float | None = None

    def __post_init__(self):
        if self.dt is None:
            object.__setattr__(self, "dt", self.dx**2 / 2)
        if min(self.R, self.dx, self.dt, self.delta) <= 0 or self.T <= 2 * self.delta:
            raise ValueError("need R, dx, dt, delta > 0 and T > 2 delta")

    def xs(self, stride: int = 1) -> np.ndarray:
        n = int(round(self.R / self.dx))
        return np.arange(-n, n + 1, stride) * self.dx

    def ts(self, stride: int = 1) -> np.ndarray:
        n = int(np.floor((self.T - self.delta) / self.dt + 1e-9))
        return self.delta + np.arange(0, n + 1, stride) * self.dt

    @classmethod
    def covering(cls, *profiles: Profile, **kw) -> "Grid1D":
        """Grid whose R leaves Gaussian tail mass below 1e-12 outside the window."""
        T = kw.get("T", 2.0)
        reach = max(max(abs(p.lo), abs(p.hi)) for p in profiles)
        return cls(R=float(np.ceil((reach + 7.5 * np.sqrt(T)) * 4) / 4), **kw)


@dataclass
class HeatField:
    x: np.ndarray
    t: np.ndarray
    values: np.ndarray   # shape (len(t), len(x))
    dx_values: np.ndarray

    def to_csv(self, path, which: str = "values") -> None:
        data = getattr(self, which)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["x", "t", which])
            for j, t in enumerate(self.t):
                for i, x in enumerate(self.x):
                    wr.writerow([repr(float(x)), repr(float(t)), repr(float(data[j, i]))])


def heat_field(f: Profile, grid: Grid1D, x_stride: int = 16, t_stride: int = 4096) -> HeatField:
    xs, ts = grid.xs(x_stride), grid.ts(t_stride)
    vals = np.stack([heat_extend(f, xs, t) for t in ts])
    dvals = np.stack([heat_extend(f, xs, t, 1) for t in ts])
    return HeatField(xs, ts, vals, dvals)


def heat_residual(f: Profile, x, t: float, dx: float, dt: float) -> np.ndarray:
    """Finite-difference ``d_t u - u_xx / 2`` with central stencils."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    u_t = (heat_extend(f, x, t + dt) - heat_extend(f, x, t - dt)) / (2 * dt)
    u_xx = (heat_extend(f, x + dx, t) - 2 * heat_extend(f, x, t) + heat_extend(f, x - dx, t)) / dx**2
    return u_t - 0.5 * u_xx


# ---------------------------------------------------------------------------
# paraproduct forms


def _x_rule(profiles, R, t, nodes):
    st = np.sqrt(t)
    lo = max(-R, min(p.lo for p in profiles) - FORM_REACH * st)
    hi = min(R, max(p.hi for p in profiles) + FORM_REACH * st)
    knots = np.array(sorted({lo, hi, *(k for p in profiles for k in p.knots if lo < k < hi)}))
    return composite_rule(knots, PANEL_FRACTION * st, nodes)


def _time_rule(a: float, b: float, panels: int, nodes: int):
    """Gauss-Legendre in log time on ``[a, b]``; returns (t, weight including dt)."""
    la, lb = np.log(a), np.log(b)
    lt, w = composite_rule(np.linspace(la, lb, panels + 1), np.inf, nodes)
    t = np.exp(lt)
    return t, w * t


class HeatTail(NamedTuple):
    small_t: float
    large_t: float


def _tail_bounds(f: Profile, g: Profile, h: Profile, delta: float, T: float) -> HeatTail:
    """Bounds for the parts of the form outside ``[delta, T]``.

    Large times: ``|u| <= |f|_1 / sqrt(2 pi t)`` and
    ``|v_x|_2 <= |g|_1 t^(-3/4) / (4 sqrt(pi))^(1/2)``.
    Small times: ``|u| <= sup|f|`` and ``|v_x|_2 <= |g'|_2``; infinite when a
    profile jumps.
    """
    l1 = f.norm(1) * g.norm(1) * h.norm(1)
    large = l1 / (np.sqrt(2 * np.pi) * 4 * np.sqrt(np.pi) * T)
    if g.deriv is None or h.deriv is None:
        small = np.inf
    else:
        dg = Profile(g.deriv, g.lo, g.hi, g.breaks).norm(2)
        dh = Profile(h.deriv, h.lo, h.hi, h.breaks).norm(2)
        small = f.sup() * dg * dh * delta
    return HeatTail(float(small), float(large))


def _warn_tail(value, tail: HeatTail, warn_rel: float):
    total = tail.small_t + tail.large_t
    if total > warn_rel * max(abs(value), 1e-300):
        warnings.warn(f"time window misses up to {total:.3g} of the form "
                      f"(small t {tail.small_t:.3g}, large t {tail.large_t:.3g})",
                      TruncationWarning, stacklevel=3)


def lambda_heat(f: Profile, g: Profile, h: Profile, grid: Grid1D, t_panels: int = 24,
                nodes: int = GL_NODES, warn_rel: float = 1e-2) -> float:
    """``int int u v_x w_x dx dt`` over ``[-R, R] x [delta, T]``."""
    ts, tw = _time_rule(grid.delta, grid.T, t_panels, nodes)
    total = 0.0
    for t, wt in zip(ts, tw):
        x, wx = _x_rule((f, g, h), grid.R, t, nodes)
        u = heat_extend(f, x, t, 0, nodes, check=False)
        vx = heat_extend(g, x, t, 1, nodes, check=False)
        wxx = heat_extend(h, x, t, 1, nodes, check=False)
        total += wt * float(np.dot(wx, u * vx * wxx))
    _warn_tail(total, _tail_bounds(f, g, h, grid.delta, grid.T), warn_rel)
    return total


def _convolve(f: Profile, kern: Callable, x: np.ndarray, s: float, nodes: int) -> np.ndarray:
    st = s
    lo = max(f.lo, float(x.min()) - KERNEL_REACH * st)
    hi = min(f.hi, float(x.max()) + KERNEL_REACH * st)
    if hi <= lo:
        return np.zeros_like(x)
    knots = np.array(sorted({lo, hi, *(k for k in f.knots if lo < k < hi)}))
    y, w = composite_rule(knots, min(PANEL_FRACTION * st, f.resolution), nodes)
    return kern(x[:, None] - y[None, :]) @ (f(y) * w)


def lambda_heat_bump(f: Profile, g: Profile, h: Profile, grid: Grid1D, s_panels: int = 24,
                     nodes: int = GL_NODES, warn_rel: float = 1e-2) -> float:
    """``int int (f*phi_s)(g*psi_s)(h*psi_s) ds/s dx`` for ``s`` in ``[sqrt(delta), sqrt(T)]``.

    ``phi_s = k(., s^2)`` and ``psi_s = -sqrt(2) s d_x k(., s^2)``.  The
    ``s``-rule is uniform in ``s`` (``lambda_heat`` is uniform in ``log t``),
    so the two forms share no quadrature nodes.
    """
    ss, sw = composite_rule(np.linspace(np.sqrt(grid.delta), np.sqrt(grid.T), s_panels + 1),
                            np.inf, nodes)
    total = 0.0
    for s, ws in zip(ss, sw):
        t = s * s
        x, wx = _x_rule((f, g, h), grid.R, t, nodes)
        phi = lambda z: heat_kernel(z, t)  # noqa: E731
        psi = lambda z: -np.sqrt(2) * s * heat_kernel_dx(z, t)  # noqa: E731
        a = _convolve(f, phi, x, s, nodes)
        b = _convolve(g, psi, x, s, nodes)
        cc = _convolve(h, psi, x, s, nodes)
        total += ws / s * float(np.dot(wx, a * b * cc))
    _warn_tail(total, _tail_bounds(f, g, h, grid.delta, grid.T), warn_rel)
    return total


class HeatEstimate(NamedTuple):
    value: float
    tail: float
    bound: float       # C |f|_p |g|_q |h|_r
    young_bound: float  # C (|f|_p^p/p + |g|_q^q/q + |h|_r^r/r) after normalizing each norm to 1
    margin: float


def heat_estimate_check(c: Coefficients, e: Exponents, f: Profile, g: Profile, h: Profile,
                        grid: Grid1D, **kw) -> HeatEstimate:
    """Windowed form plus its tail bound against the trilinear estimate."""
    val = lambda_heat(f, g, h, grid, **kw)
    tail = _tail_bounds(f, g, h, grid.delta, grid.T)
    big = c_constant(c, e)
    nf, ng, nh = f.norm(e.p), g.norm(e.q), h.norm(e.r)
    bound = big * nf * ng * nh
    total_tail = tail.small_t + tail.large_t
    return HeatEstimate(val, total_tail, bound, big, bound - abs(val) - total_tail)


# ---------------------------------------------------------------------------
# PDE defect of the composed Bellman function


@dataclass
class DefectReport:
    x: np.ndarray
    t: np.ndarray
    defect: np.ndarray      # (d_t - d_xx/2) b - |u v_x w_x|
    lhs: np.ndarray
    rhs: np.ndarray
    tol_grid: float
    min_field: float
    fd_error: float | None = None  # chain rule vs finite differences, relative

    @property
    def violations(self) -> int:
        return int(np.sum(self.defect < -self.tol_grid * (1 + np.abs(self.lhs) + self.rhs)))

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _six_fields(e, profiles, x, t, order):
    f, g, h = profiles
    base = (f, g, h, f.power(e.p), g.power(e.q), h.power(e.r))
    return np.stack([heat_extend(p, x, t, order) for p in base], axis=-1)


def bellman_field(c: Coefficients, e: Exponents, eps: float, profiles, x, t,
                  nodes: int = 8) -> np.ndarray:
    """``b = C (U/p + V/q + W/r) - A_eps(u, v, w)`` at time ``t``."""
    from .property_suite import mollify_A

    F = _six_fields(e, profiles, x, t, 0)
    big = c_constant(c, e)
    a = mollify_A(c, e, eps, F[:, :3], nodes, check=False)
    return big * (F[:, 3] / e.p + F[:, 4] / e.q + F[:, 5] / e.r) - a


def pde_defect_check(c: Coefficients, e: Exponents, f: Profile, g: Profile, h: Profile,
                     grid: Grid1D, eps: float, nodes: int = 8, x_stride: int = 64,
                     t_points: int = 8, c_grid: float = 1.0, fd_points: int = 0) -> DefectReport:
    """Pointwise ``(d_t - d_xx/2) b >= |u v_x w_x|`` on a subgrid of the window.

    The heat operator applied to ``b`` is evaluated by the chain rule: the
    first-order term drops because all six fields are caloric, leaving
    ``(1/2) grad^T Hess(A_eps) grad`` with ``grad = (u_x, v_x, w_x)``.
    ``fd_points`` interior points are also checked against central finite
    differences of the sampled ``b``.
    """
    xs = grid.xs(x_stride)
    xs = xs[(xs > -grid.R + grid.dx) & (xs < grid.R - grid.dx)]
    all_t = grid.ts()
    pick = np.unique(np.linspace(1, all_t.size - 2, t_points).round().astype(int))
    ts = all_t[pick]
    if ts.size == 0 or xs.size == 0:
        raise BoundaryError("window too small for interior grid points")
    profiles = (f, g, h)
    lhs_all, rhs_all, X, Tm = [], [], [], []
    min_field = np.inf
    for t in ts:
        F = _six_fields(e, profiles, xs, t, 0)
        D = _six_fields(e, profiles, xs, t, 1)
        min_field = min(min_field, float(F[:, :3].min()))
        if min_field <= eps:
            raise EpsilonError(f"min(u, v, w) = {min_field:.3g} does not exceed eps = {eps:g}")
        H = mollify_hess_A(c, e, eps, F[:, :3], nodes)
        grad = D[:, :3]
        lhs_all.append(0.5 * np.einsum("ni,nij,nj->n", grad, H, grad))
        rhs_all.append(np.abs(F[:, 0] * D[:, 1] * D[:, 2]))
        X.append(xs)
        Tm.append(np.full(xs.size, t))
    lhs, rhs = np.concatenate(lhs_all), np.concatenate(rhs_all)
    rep = DefectReport(np.concatenate(X), np.concatenate(Tm), lhs - rhs, lhs, rhs,
                       c_grid * (grid.dx**2 + grid.dt), min_field)
    if fd_points > 0:
        idx = np.unique(np.linspace(0, lhs.size - 1, fd_points).round().astype(int))
        errs = []
        for i in idx:
            x0, t0 = rep.x[i], rep.t[i]
            dx, dt = grid.dx, grid.dt
            bt = bellman_field(c, e, eps, profiles, np.array([x0]), t0 + dt, nodes)
            bm = bellman_field(c, e, eps, profiles, np.array([x0]), t0 - dt, nodes)
            row = bellman_field(c, e, eps, profiles, np.array([x0 - dx, x0, x0 + dx]), t0, nodes)
            fd = (bt - bm)[0] / (2 * dt) - 0.5 * (row[0] - 2 * row[1] + row[2]) / dx**2
            errs.append(abs(fd - lhs[i]) / (1 + abs(lhs[i])))
        rep.fd_error = float(max(errs))
    return rep


# ---------------------------------------------------------------------------
# randomized battery


@dataclass(frozen=True)
class HeatConfig:
    triples: int = 10
    seed: int = 0
    eps: float = 1e-4
    window_R: float = 1.0
    panels: tuple = (4, 8, 16)   # refinement levels for the two forms
    form_nodes: int = 8
    lambda_triples: int = 3      # triples used for the form comparison
    x_stride: int = 32
    t_points: int = 6
    fd_points: int = 4
    form_tol: float = 1e-3
    closed_form_tol: float = 1e-8
    tol: float = 1e-9


def random_bump(rng: np.random.Generator) -> Profile:
    """One or two bumps centered in [-0.5, 0.5] whose supports cover [-1, 1]."""
    parts = []
    for _ in range(int(rng.integers(1, 3))):
        center = rng.uniform(-0.5, 0.5)
        width = rng.uniform(1.6, 3.0)
        height = rng.uniform(0.5, 2.0)
        if rng.random() < 0.5:
            parts.append(smooth_bump(center, width, height))
        else:
            parts.append(poly_bump(center, width, height, int(rng.integers(2, 5))))
    return parts[0] if len(parts) == 1 else profile_sum(*parts)


def run_battery(c: Coefficients, e: Exponents, cfg: HeatConfig = HeatConfig()) -> list:
    from .property_suite import _summarize

    out = []
    # closed form for an indicator
    x = np.linspace(-3, 3, 61)
    margins, scales, wit = [], [], []
    for t in (0.01, 0.1, 0.5, 1.0, 2.0):
        u = heat_extend(indicator(-0.5, 1.0), x, t)
        ex = indicator_heat(-0.5, 1.0, x, t)
        margins.append(-np.abs(u - ex))
        scales.append(np.maximum(np.abs(ex), 1e-300))
        wit.append(np.column_stack([x, np.full_like(x, t), u, ex]))
    out.append(_summarize("indicator_closed_form", np.concatenate(margins), np.concatenate(scales),
                          np.vstack(wit), cfg.seed, cfg.closed_form_tol))

    profiles = []
    for i in range(cfg.triples):
        rng = np.random.default_rng([cfg.seed, i])
        profiles.append(tuple(random_bump(rng) for _ in range(3)))

    # two forms of the paraproduct under refinement
    margins, scales, wit = [], [], []
    for i, (f, g, h) in enumerate(profiles[: cfg.lambda_triples]):
        grid = Grid1D.covering(f, g, h)
        diffs = []
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            for n in cfg.panels:
                a = lambda_heat(f, g, h, grid, n, cfg.form_nodes)
                b = lambda_heat_bump(f, g, h, grid, n, cfg.form_nodes)
                diffs.append(abs(a - b) / max(abs(a), 1e-300))
                wit.append((i, n, a, b))
        # finest level within tolerance and no worse than the coarsest (above rounding)
        margins.append(min(cfg.form_tol - diffs[-1], max(diffs[0], 1e-12) - diffs[-1]))
        scales.append(1.0)
    out.append(_summarize("lambda_forms", np.array(margins), np.array(scales),
                          np.array(wit, float).reshape(-1, 4)[:: len(cfg.panels)], cfg.seed, 0.0))

    # trilinear estimate with tails, and the pointwise defect
    est_m, est_s, est_w = [], [], []
    fd_err = None
    pde_m, pde_s, pde_w = [], [], []
    for i, (f, g, h) in enumerate(profiles):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TruncationWarning)
            est = heat_estimate_check(c, e, f, g, h, Grid1D.covering(f, g, h),
                                      t_panels=cfg.panels[1], nodes=cfg.form_nodes)
        est_m.append(est.margin)
        est_s.append(1 + est.bound)
        est_w.append((i, est.value, est.tail, est.bound))
        rep = pde_defect_check(c, e, f, g, h, Grid1D(R=cfg.window_R), cfg.eps,
                               x_stride=cfg.x_stride, t_points=cfg.t_points,
                               fd_points=cfg.fd_points if i == 0 else 0)
        k = int(np.argmin(rep.defect / (1 + np.abs(rep.lhs) + rep.rhs)))
        pde_m.append(rep.defect[k] + rep.tol_grid * (1 + abs(rep.lhs[k]) + rep.rhs[k]))
        pde_s.append(1 + abs(rep.lhs[k]) + rep.rhs[k])
        pde_w.append((i, rep.x[k], rep.t[k], rep.lhs[k], rep.rhs[k]))
        if rep.fd_error is not None:
            fd_err = rep.fd_error
    out.append(_summarize("heat_estimate", np.array(est_m), np.array(est_s),
                          np.array(est_w, float).reshape(-1, 4), cfg.seed, cfg.tol))
    out.append(_summarize("pde_defect", np.array(pde_m), np.array(pde_s),
                          np.array(pde_w, float).reshape(-1, 5), cfg.seed, 0.0))
    if fd_err is not None:
        # chain rule versus finite differences: O(dx^2 + dt) with a generous constant
        g0 = Grid1D(R=cfg.window_R)
        allowed = 1e3 * (g0.dx**2 + g0.dt)
        out.append(_summarize("chain_rule_fd", np.array([allowed - fd_err]), np.ones(1),
                              np.array([[fd_err, allowed]]), cfg.seed, 0.0))
    return out
