"""Deterministic fixed-node quadrature helpers.

Everything here uses fixed node counts (no adaptivity) so that repeated runs
are bit-reproducible.  Composite Simpson is used for smooth integrands,
trapezoid for data known only on a sample grid.
"""

from functools import lru_cache

import numpy as np


def simpson_nodes(a: float, b: float, panels: int):
    """Nodes and weights of composite Simpson on [a, b] with ``panels`` panels.

    ``panels`` must be even (each Simpson panel pair spans two subintervals).
    """
    if panels % 2 != 0:
        raise ValueError("composite Simpson needs an even panel count")
    x = np.linspace(a, b, panels + 1)
    h = (b - a) / panels
    w = np.full(panels + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return x, w * (h / 3.0)

def piecewise_simpson_nodes(breaks, panels):
    """Composite Simpson over consecutive segments with per-segment panel counts.

    ``breaks`` is an increasing sequence of segment boundaries, ``panels`` the
    panel count per segment.  Shared endpoints are kept (their weights add).
    """
    xs, ws = [], []
    for (a, b), n in zip(zip(breaks[:-1], breaks[1:]), panels):
        x, w = simpson_nodes(a, b, n)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


@lru_cache(maxsize=32)
def gauss_legendre(n: int):
    """Cached Gauss-Legendre nodes/weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_nodes(a: float, b: float, n: int):
    """Gauss-Legendre nodes and weights mapped to [a, b]."""
    x, w = gauss_legendre(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * x, half * w


def trapezoid_weights(t):
    """Trapezoid weights for a (possibly non-uniform) increasing grid."""
    t = np.asarray(t, dtype=float)
    w = np.empty_like(t)
    d = np.diff(t)
    w[0] = d[0] / 2
    w[-1] = d[-1] / 2
    w[1:-1] = (d[:-1] + d[1:]) / 2
    return w
