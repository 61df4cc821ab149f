import numpy as np
import pytest

from tempered_plaplacian.quadrature import (
    breakpoint_rule, gauss_legendre, graded_edges, panel_rule, subdivide
)


def test_gauss_legendre_is_exact_for_polynomials():
    nodes, weights = gauss_legendre(8)
    for degree in range(16):
        exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
        assert np.dot(weights, nodes ** degree) == pytest.approx(exact, abs=1e-14)


def test_graded_edges():
    edges = graded_edges(0.0, 1.0, 10, 'a')
    assert edges[0] == 0.0 and edges[-1] == 1.0
    assert np.all(np.diff(edges) > 0)
    assert edges[1] == pytest.approx(2.0 ** -10)
    both = graded_edges(0.0, 2.0, 4)
    assert both[0] == 0.0 and both[-1] == 2.0
    assert np.allclose(np.diff(both), np.diff(both)[::-1])
    toward_b = graded_edges(0.0, 1.0, 5, 'b')
    assert 1.0 - toward_b[-2] == pytest.approx(2.0 ** -5)


def test_subdivide():
    assert np.allclose(subdivide([0.0, 1.0, 3.0], 2), [0.0, 0.5, 1.0, 2.0, 3.0])
    assert np.array_equal(subdivide([0.0, 1.0], 1), [0.0, 1.0])


def test_panel_rule_skips_empty_panels():
    nodes, weights = panel_rule([0.0, 0.5, 0.5, 1.0], 4)
    assert nodes.size == 8
    assert weights.sum() == pytest.approx(1.0)


def test_breakpoint_rule_resolves_endpoint_singularities():
    nodes, weights = breakpoint_rule([0.0, 1.0], 16, 8)
    assert np.dot(weights, np.sqrt(nodes)) == pytest.approx(2.0 / 3.0, rel=1e-8)
    nodes, weights = breakpoint_rule([0.0, 0.5, 1.0], 16, 8)
    assert np.dot(weights, np.sqrt(np.abs(nodes - 0.5))) == pytest.approx(
        2.0 / 3.0 * 0.5 ** 1.5 * 2, rel=1e-8)


def test_breakpoint_rule_ignores_repeated_breaks():
    nodes, weights = breakpoint_rule([0.0, 1.0, 1.0, 2.0], 3, 4, graded=False)
    assert weights.sum() == pytest.approx(2.0)
    empty = breakpoint_rule([1.0, 1.0], 3, 4)
    assert empty[0].size == 0
