"""Random point generators for the property scans."""

from __future__ import annotations

import numpy as np

from .core_bellman import Exponents

LOG_RANGE = (1e-3, 1e3)
SURFACES = ("up=vq", "up=wr", "vq=wr")


def loguniform(rng: np.random.Generator, size, lo: float = LOG_RANGE[0], hi: float = LOG_RANGE[1]):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


def onto_surface(e: Exponents, x: np.ndarray, surface: str, rel_gap=0.0) -> np.ndarray:
    """Move one coordinate of each row so that two powers agree (times 1 + rel_gap)."""
    x = np.array(x, dtype=float)
    p, q, r = e.powers
    gap = 1.0 + np.asarray(rel_gap)
    if surface == "up=vq":
        x[..., 1] = (x[..., 0] ** p * gap) ** (1 / q)
    elif surface == "up=wr":
        x[..., 2] = (x[..., 0] ** p * gap) ** (1 / r)
    elif surface == "vq=wr":
        x[..., 2] = (x[..., 1] ** q * gap) ** (1 / r)
    else:
        raise ValueError(f"unknown surface {surface!r}")
    return x


def triples(e: Exponents, n: int, rng: np.random.Generator, degenerate: float = 0.1,
            zeros: bool = True) -> np.ndarray:
    """Log-uniform points of ``(0, inf)^3``; a ``degenerate`` fraction is stressed.

    Half of the stressed rows sit within relative gap 1e-4 of a critical
    surface; the other half have one coordinate pushed next to (or, when
    ``zeros`` is set, onto) a coordinate plane.
    """
    x = loguniform(rng, (n, 3))
    k = int(round(degenerate * n))
    if k == 0:
        return x
    rows = rng.choice(n, size=k, replace=False)
    near_surf, near_plane = rows[: k // 2], rows[k // 2:]
    which = rng.integers(0, 3, size=near_surf.size)
    for i, surface in enumerate(SURFACES):
        sel = near_surf[which == i]
        gap = rng.uniform(-1e-4, 1e-4, sel.size)
        x[sel] = onto_surface(e, x[sel], surface, gap)
    axis = rng.integers(0, 3, size=near_plane.size)
    tiny = loguniform(rng, near_plane.size, 1e-9, 1e-6)
    if zeros:
        tiny[rng.random(near_plane.size) < 0.3] = 0.0
    x[near_plane, axis] = tiny
    return x


def domain_points(e: Exponents, x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Lift triples to the Bellman domain: ``U = u^p (1 + xi)`` with random excess."""
    pw = x ** e.powers
    excess = np.where(rng.random(x.shape) < 0.2, 0.0, loguniform(rng, x.shape, 1e-3, 1e1))
    return np.concatenate([x, pw * (1.0 + excess)], axis=-1)
