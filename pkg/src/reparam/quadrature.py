"""Composite Gauss-Legendre rules on intervals and boxes."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _leggauss(order: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(order)


def gauss_legendre_panels(a: float, b: float, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of ``panels`` equal Gauss-Legendre panels on ``[a, b]``."""
    if panels < 1 or order < 1:
        raise ValueError("need at least one panel and one node")
    x, w = _leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def box_rule(D: int, panels: int, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor-product rule on ``[0, 1]^D``: nodes ``(D, N)``, weights ``(N,)``."""
    x, w = gauss_legendre_panels(0.0, 1.0, panels, order)
    grids = np.meshgrid(*([x] * D), indexing="ij")
    wgrids = np.meshgrid(*([w] * D), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids])
    weights = np.prod(np.stack([g.ravel() for g in wgrids]), axis=0)
    return nodes, weights
