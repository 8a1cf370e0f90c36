"""Tests for reference simplex rules and quadrature on manifolds."""

import itertools
import math

import numpy as np
import pytest

from src.errors import DegenerateSimplexError, DegreeUnsupportedError
from src.geometry import quadrature_nodes
from src.meshes import box_cells, disk, interval, point_set, unit_cube, unit_square
from src.simplex_rules import reference_rule


def simplex_moment(exponents):
    """Average of prod x_i^a_i over the unit k-simplex."""
    k = len(exponents)
    numerator = math.factorial(k) * math.prod(math.factorial(a) for a in exponents)
    return numerator / math.factorial(sum(exponents) + k)


def monomials(k, degree):
    for exponents in itertools.product(range(degree + 1), repeat=k):
        if sum(exponents) <= degree:
            yield exponents


def rule_average(k, degree, exponents, strategy="exact"):
    bary, weights = reference_rule(k, degree, strategy)
    x = bary[:, 1:]
    values = np.prod(x ** np.array(exponents), axis=1)
    return float(np.dot(weights, values))


@pytest.mark.parametrize(
    "k,degree",
    [(1, 1), (1, 7), (2, 1), (2, 2), (2, 3), (2, 4), (2, 5), (2, 9), (3, 1), (3, 2), (3, 6)],
)
def test_reference_rule_is_exact(k, degree):
    bary, weights = reference_rule(k, degree)
    assert weights.sum() == pytest.approx(1.0)
    assert np.all(weights > 0)
    assert np.allclose(bary.sum(axis=1), 1.0)
    for exponents in monomials(k, degree):
        assert rule_average(k, degree, exponents) == pytest.approx(
            simplex_moment(exponents), rel=1e-11, abs=1e-14
        )


@pytest.mark.parametrize("k", [2, 3])
def test_subdivided_rule_is_exact_to_base_degree(k):
    degree = 8
    bary, weights = reference_rule(k, degree, "subdivide")
    assert weights.sum() == pytest.approx(1.0)
    assert np.all(weights > 0)
    for exponents in monomials(k, 4):
        assert rule_average(k, degree, exponents, "subdivide") == pytest.approx(
            simplex_moment(exponents), rel=1e-11, abs=1e-14
        )


def test_subdivided_rule_converges_beyond_base_degree():
    exponents = (7, 0)
    exact = simplex_moment(exponents)
    coarse = abs(rule_average(2, 8, exponents, "subdivide") - exact)
    fine = abs(rule_average(2, 32, exponents, "subdivide") - exact)
    assert fine < coarse


def test_table_strategy_refuses_high_degree():
    with pytest.raises(DegreeUnsupportedError):
        reference_rule(2, 6, "table")
    with pytest.raises(DegreeUnsupportedError):
        reference_rule(4, 2)
    with pytest.raises(DegreeUnsupportedError):
        reference_rule(2, 0)


def test_points_rule_has_unit_weights():
    rule = quadrature_nodes(point_set([[0.1, 0.2], [0.3, 0.4]]), degree=5)
    assert np.all(rule.weights == 1.0)
    assert rule.points.shape == (2, 2)


@pytest.mark.parametrize(
    "mesh,measure",
    [
        (interval(0.2, 0.7, 3), 0.5),
        (unit_square(3), 1.0),
        (unit_cube(2), 1.0),
        (box_cells([[0.0, 0.0], [0.5, 0.0]], [[0.5, 1.0], [1.0, 1.0]]), 1.0),
    ],
    ids=["interval", "square", "cube", "boxes"],
)
def test_weights_sum_to_measure(mesh, measure):
    rule = quadrature_nodes(mesh, degree=6)
    assert rule.weights.sum() == pytest.approx(measure)
    assert np.all(rule.weights > 0)


def test_square_integrates_polynomials_exactly():
    rule = quadrature_nodes(unit_square(2), degree=7)
    x, y = rule.points[:, 0], rule.points[:, 1]
    assert rule.integrate(x**3 * y**4) == pytest.approx(1.0 / 20.0, rel=1e-12)


def test_disk_area_matches_polygon_area():
    segments = 64
    rule = quadrature_nodes(disk((0.5, 0.5), 0.3, segments=segments), degree=2)
    polygon_area = 0.5 * segments * 0.3**2 * math.sin(2 * math.pi / segments)
    assert rule.weights.sum() == pytest.approx(polygon_area, rel=1e-12)


def test_interpolate_is_linear_on_cells():
    mesh = unit_square(2)
    from src.geometry import ManifoldFunction

    mf = ManifoldFunction(mesh, 2.0 * mesh.vertices[:, 0] - mesh.vertices[:, 1])
    rule = quadrature_nodes(mesh, degree=3)
    expected = 2.0 * rule.points[:, 0] - rule.points[:, 1]
    assert np.allclose(rule.interpolate(mf), expected)


def test_degenerate_simplex_raises():
    from src.geometry import SimplicialManifold

    flat = SimplicialManifold(
        d=2, k=2, vertices=[[0.1, 0.1], [0.5, 0.5], [0.9, 0.9]], simplices=[[0, 1, 2]]
    )
    with pytest.raises(DegenerateSimplexError):
        quadrature_nodes(flat, degree=2)
