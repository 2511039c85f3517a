"""Brute-force correlation oracle by exact tensor-grid quadrature.

The (k1, k2)-point correlation is, by definition, the falling-factorial
prefactor times the marginal of the normalized density over the unfixed
angles.  The density is a Laurent trigonometric polynomial of per-variable
bandwidth below 2*(n1 + 2*n2), so a uniform grid with more nodes than the
bandwidth integrates it exactly to roundoff; no tolerance estimation is
involved.  This path shares nothing with the Pfaffian machinery and serves
as the reference it is validated against.
"""

from __future__ import annotations

import math

import numpy as np

from .plasma import TWO_PI, log_normalization

__all__ = ["oracle_correlation", "oracle_node_count"]

MAX_ORACLE_ORDER = 8


def oracle_node_count(cfg):
    """Default grid size per free dimension, above the integrand bandwidth."""
    return 2 * cfg.order + 3


def oracle_correlation(k1, k2, xs, ys, cfg, m=None):
    """Correlation by marginal integration: exact for the circular plasma.

    Dimension of the quadrature grid is (n1 - k1) + (n2 - k2); systems with
    n1 + 2*n2 above 8 are rejected (grid growth), as are more fixed points
    than particles.
    """
    if cfg.order > MAX_ORACLE_ORDER:
        raise ValueError(f"oracle limited to n1 + 2*n2 <= {MAX_ORACLE_ORDER}")
    if k1 > cfg.n1 or k2 > cfg.n2 or k1 < 0 or k2 < 0:
        raise ValueError("invalid numbers of fixed points")
    if len(xs) != k1 or len(ys) != k2:
        raise ValueError("point counts must match (k1, k2)")
    if m is None:
        m = oracle_node_count(cfg)
    elif m < oracle_node_count(cfg) - 2:
        raise ValueError(f"grid too coarse; need about {oracle_node_count(cfg)} nodes")

    free = (cfg.n1 - k1) + (cfg.n2 - k2)
    grid = TWO_PI * np.arange(m) / m

    def axis_array(d):
        shape = [1] * free
        shape[d] = m
        return grid.reshape(shape)

    coords = []
    d = 0
    for i in range(cfg.n1):
        if i < k1:
            coords.append(float(xs[i]))
        else:
            coords.append(axis_array(d))
            d += 1
    for a in range(cfg.n2):
        if a < k2:
            coords.append(float(ys[a]))
        else:
            coords.append(axis_array(d))
            d += 1

    weight = np.ones([1] * free) if free else np.ones(())
    n1 = cfg.n1
    for i in range(n1):
        for j in range(i + 1, n1):
            weight = weight * (2.0 - 2.0 * np.cos(coords[i] - coords[j]))
    for a in range(n1, n1 + cfg.n2):
        for b in range(a + 1, n1 + cfg.n2):
            weight = weight * (2.0 - 2.0 * np.cos(coords[a] - coords[b])) ** 2
    for i in range(n1):
        for a in range(n1, n1 + cfg.n2):
            weight = weight * (2.0 - 2.0 * np.cos(coords[i] - coords[a]))

    integral = float(np.sum(weight)) * (TWO_PI / m) ** free
    log_pref = (
        math.log(math.factorial(cfg.n1)) - math.log(math.factorial(cfg.n1 - k1))
        + math.log(math.factorial(cfg.n2)) - math.log(math.factorial(cfg.n2 - k2))
        - log_normalization(cfg.n1, cfg.n2)
    )
    return integral * math.exp(log_pref)
