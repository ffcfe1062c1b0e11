"""Reference implementations written independently of the package.

Plain-float, one-point-at-a-time transcriptions used as test oracles.
"""

from __future__ import annotations

import math
from fractions import Fraction


def default_fractions(p, q, r):
    p, q, r = Fraction(p), Fraction(q), Fraction(r)
    A = 88 * q**4 * r / ((p - 1) * (r - 1) * (q - r))
    C = 11 * q**3 * r / ((r - 1) * (q - r))
    return A, Fraction(1), C


def explicit_A(A, B, C, p, q, r, u, v, w):
    """Piecewise formula chosen by comparing u^p, v^q, w^r directly."""
    U, V, W = u**p, v**q, w**r
    if U <= W <= V:
        return A * U + B * V + C * W
    if W <= U <= V:
        return (A * (p - 1) - C) / (p - 1) * U + B * V + C * p / (p - 1) * u * w ** (r - r / p)
    if W <= V <= U:
        return ((A * (p - 1) - (B + C)) / (p - 1) * U + B * p / (p - 1) * u * v ** (q - q / p)
                + C * p / (p - 1) * u * w ** (r - r / p))
    if V <= W <= U:
        return ((A * (p - 1) - (B + C)) / (p - 1) * U + B * q / 2 * u * v**2 * w ** (1 - r / q)
                + (2 * C * p * r - B * p * (q - r)) / (2 * r * (p - 1)) * u * w ** (r - r / p))
    if V <= U <= W:
        return ((2 * A * r * (p - 1) - B * (q + r)) / (2 * r * (p - 1)) * U
                + B * q**2 / (2 * p * (q - 2)) * u ** (p - 2 * p / q) * v**2
                + B * q * (q - r) / (2 * r * (q - 2)) * v**2 * w ** (r - 2 * r / q)
                + (2 * C * r - B * (q - r)) / (2 * r) * W)
    return (A * U + B * q / (p * (q - 2)) * V
            + B * q * (q - r) / (2 * r * (q - 2)) * v**2 * w ** (r - 2 * r / q)
            + (2 * C * r - B * (q - r)) / (2 * r) * W)


def fd_grad(fn, x, rel=1e-6):
    out = []
    for i in range(len(x)):
        h = rel * max(abs(x[i]), 1e-3)
        up = list(x)
        dn = list(x)
        up[i] += h
        dn[i] -= h
        out.append((fn(up) - fn(dn)) / (2 * h))
    return out


def fd_hess(fn, x, rel=1e-4):
    n = len(x)
    H = [[0.0] * n for _ in range(n)]
    hs = [rel * max(abs(xi), 1e-3) for xi in x]
    for i in range(n):
        for j in range(n):
            def shifted(si, sj):
                y = list(x)
                y[i] += si * hs[i]
                y[j] += sj * hs[j]
                return fn(y)
            H[i][j] = (shifted(1, 1) - shifted(1, -1) - shifted(-1, 1) + shifted(-1, -1)) / (4 * hs[i] * hs[j])
    return H


def brute_phi(f, g, h):
    """Normalized dyadic sum over every subinterval, by explicit slicing."""
    n = len(f)
    total = 0.0
    length = n
    while length >= 2:
        for start in range(0, n, length):
            half = length // 2
            fj = sum(f[start:start + length]) / length
            gl = sum(g[start:start + half]) / half
            gr = sum(g[start + half:start + length]) / half
            hl = sum(h[start:start + half]) / half
            hr = sum(h[start + half:start + length]) / half
            total += length / n * fj * abs(gl - gr) / 2 * abs(hl - hr) / 2
        length //= 2
    return total


def normal_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2))


def indicator_heat(a, b, x, t):
    """Heat extension (kernel variance t) of 1_[a,b] via erfc."""
    s = math.sqrt(t)
    if x < a:  # both arguments positive: difference of upper tails avoids cancellation
        return normal_cdf((x - a) / s) - normal_cdf((x - b) / s)
    return normal_cdf((b - x) / s) - normal_cdf((a - x) / s)
