"""Gauss-Legendre rules on reference intervals."""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(n):
    """Nodes and weights of the n-point rule on [0, 1].

    Weights sum to one, so ``sum(w * f(a + (b - a) * x))`` is the average of
    ``f`` over ``[a, b]``.
    """
    t, w = np.polynomial.legendre.leggauss(n)
    nodes = 0.5 * (t + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def interval_nodes(a, b, n=3):
    """Gauss nodes on ``[a, b]`` together with averaging weights."""
    nodes, weights = gauss_legendre(n)
    return a + (b - a) * nodes, weights
