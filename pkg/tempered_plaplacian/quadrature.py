#!/usr/bin/env python
# coding: utf-8
"""Composite Gauss-Legendre rules on geometrically graded panels."""
from functools import lru_cache

import numpy as np
from scipy import special


@lru_cache(maxsize=32)
def gauss_legendre(points):
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    nodes, weights = special.roots_legendre(points)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def graded_edges(a, b, levels, toward='both'):
    """Panel edges on [a, b] halving geometrically toward one or both ends.

    With toward='a' the panels are [a, a + L 2^-levels], ..., [a + L/2, b]
    where L = b - a; 'both' grades each half toward its own end.
    """
    if toward == 'both':
        middle = 0.5 * (a + b)
        left = graded_edges(a, middle, levels, 'a')
        right = graded_edges(middle, b, levels, 'b')
        return np.concatenate([left, right[1:]])
    fractions = np.concatenate([[0.0], 2.0 ** -np.arange(levels, -1, -1, dtype=float)])
    if toward == 'a':
        return a + (b - a) * fractions
    return (b - (b - a) * fractions)[::-1]


def subdivide(edges, parts):
    """Split every panel into `parts` equal panels."""
    if parts <= 1:
        return np.asarray(edges, dtype=float)
    edges = np.asarray(edges, dtype=float)
    steps = np.linspace(0.0, 1.0, parts + 1)[:-1]
    inner = edges[:-1, None] + (edges[1:] - edges[:-1])[:, None] * steps[None, :]
    return np.concatenate([inner.ravel(), edges[-1:]])


def panel_rule(edges, points):
    """Nodes and weights of the composite Gauss rule on the given panels."""
    edges = np.asarray(edges, dtype=float)
    nodes, weights = gauss_legendre(points)
    half = 0.5 * (edges[1:] - edges[:-1])
    centre = 0.5 * (edges[1:] + edges[:-1])
    keep = half > 0
    return ((centre[keep, None] + half[keep, None] * nodes[None, :]).ravel(),
            (half[keep, None] * weights[None, :]).ravel())


def breakpoint_rule(breaks, levels, points, parts=1, graded=True):
    """Composite rule over consecutive breakpoints, graded toward each of them."""
    breaks = np.unique(np.asarray(breaks, dtype=float))
    all_nodes, all_weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a <= 1e-14 * max(1.0, abs(b)):
            continue
        if graded:
            edges = graded_edges(a, b, levels, 'both')
        else:
            edges = np.linspace(a, b, levels + 1)
        nodes, weights = panel_rule(subdivide(edges, parts), points)
        all_nodes.append(nodes)
        all_weights.append(weights)
    if not all_nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(all_nodes), np.concatenate(all_weights)
