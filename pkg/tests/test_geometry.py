"""Tests for manifolds, measures, validation, refinement and sampling."""

import math

import numpy as np
import pytest
from scipy.special import i0

from src.errors import BallExitsDomainError, DataError, DegenerateSimplexError
from src.fields import ExpSum
from src.geometry import (
    ManifoldFunction,
    SimplicialManifold,
    hausdorff_measure,
    quadrature_nodes,
    refine,
    sample_points,
    simplex_measure,
    simplex_measures,
    validate_manifold,
)
from src.meshes import (
    ball,
    box_cells,
    disk,
    interval,
    point_set,
    polygonal_circle,
    segment,
    unit_cube,
    unit_square,
)


def integral(mf, degree=6):
    rule = quadrature_nodes(mf.manifold, degree)
    return rule.integrate(rule.interpolate(mf))


def test_simplex_measure():
    assert simplex_measure([[0.2, 0.3]]) == 1.0
    assert simplex_measure([[0.0, 0.0], [0.3, 0.4]]) == pytest.approx(0.5)
    assert simplex_measure([[0, 0, 0], [1, 0, 0], [0, 1, 0]]) == pytest.approx(0.5)
    assert simplex_measure([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]]) == pytest.approx(1 / 6)
    with pytest.raises(DegenerateSimplexError):
        simplex_measure([[0.1, 0.1], [0.1, 0.1]])


@pytest.mark.parametrize(
    "mesh,expected",
    [
        (point_set([[0.1, 0.1], [0.5, 0.2], [0.9, 0.7]]), 3.0),
        (segment([0.1, 0.1, 0.1], [0.4, 0.5, 0.1], segments=4), 0.5),
        (unit_square(4), 1.0),
        (unit_cube(3), 1.0),
    ],
    ids=["points", "segment", "square", "cube"],
)
def test_hausdorff_measure(mesh, expected):
    assert hausdorff_measure(mesh) == pytest.approx(expected)


def test_polygonal_circle_perimeter():
    segments = 2048
    mesh = polygonal_circle(radius=0.3, segments=segments)
    expected = 2 * segments * 0.3 * math.sin(math.pi / segments)
    assert hausdorff_measure(mesh) == pytest.approx(expected, rel=1e-12)
    assert hausdorff_measure(mesh) == pytest.approx(2 * math.pi * 0.3, rel=1e-6)


def test_manifold_rejects_bad_input():
    with pytest.raises(DataError):
        SimplicialManifold(d=2, k=3, vertices=[[0.1, 0.1]], simplices=[[0, 0, 0, 0]])
    with pytest.raises(DataError):
        SimplicialManifold(d=2, k=1, vertices=[[0.1, 0.1]], simplices=[[0, 1]])
    with pytest.raises(DataError):
        ManifoldFunction(interval(0.1, 0.9, 2), [1.0, 2.0])
    with pytest.raises(DataError):
        ManifoldFunction(interval(0.1, 0.9, 1), [1.0, np.nan])


def test_manifold_arrays_are_read_only():
    mesh = unit_square(1)
    with pytest.raises(ValueError):
        mesh.vertices[0, 0] = 0.5


def test_validate_clean_manifold():
    report = validate_manifold(disk((0.5, 0.5), 0.2))
    assert report.ok
    assert report.clean
    assert report.summary() == [
        "  → pairwise intersections are checked only for shared-face overlap"
    ]


def test_validate_reports_problems():
    mesh = SimplicialManifold(
        d=2,
        k=1,
        vertices=[[0.1, 0.1], [1.2, 0.5], [0.1, 0.1], [0.3, 0.3]],
        simplices=[[0, 1], [1, 0], [0, 2], [3, 0]],
    )
    report = validate_manifold(mesh)
    assert not report.ok
    assert report.containment_violations == [1]
    assert report.duplicate_vertices == [(0, 2)]
    assert report.duplicate_simplices == [(0, 1)]
    assert report.degenerate_simplices == [2]
    assert report.to_dict()["ok"] is False
    assert any(line.startswith("✗") for line in report.summary())


def test_validate_periodic_boundary_contact():
    mesh = unit_square(1)
    assert validate_manifold(mesh).clean
    report = validate_manifold(mesh, periodic=True)
    assert report.ok
    assert not report.clean
    assert len(report.boundary_contacts) == 4


@pytest.mark.parametrize("method", ["midpoint", "centroid"])
@pytest.mark.parametrize(
    "mesh",
    [interval(0.1, 0.8, 3), disk((0.5, 0.5), 0.3, segments=12), unit_cube(1)],
    ids=["interval", "disk", "cube"],
)
def test_refine_preserves_measure_and_integral(mesh, method):
    mf = ManifoldFunction(mesh, 1.0 + mesh.vertices.sum(axis=1))
    refined = refine(mf, method)
    assert hausdorff_measure(refined.manifold) == pytest.approx(hausdorff_measure(mesh))
    # f is linear, so the piecewise-linear interpolant does not change
    assert integral(refined) == pytest.approx(integral(mf))


def test_midpoint_refinement_counts():
    assert len(refine(ManifoldFunction.constant(unit_square(1))).manifold.simplices) == 8
    assert len(refine(ManifoldFunction.constant(unit_cube(1))).manifold.simplices) == 48
    shared = refine(ManifoldFunction.constant(unit_square(1))).manifold
    # 4 corners, 4 edge midpoints and the shared diagonal midpoint
    assert len(shared.vertices) == 9


def test_circle_integral_converges_with_segments():
    # int over the circle of exp(x + y) is 2 pi r e^{2 c} I0(r sqrt 2)
    center, radius = 0.5, 0.3
    exact = 2 * math.pi * radius * math.exp(2 * center) * i0(radius * math.sqrt(2))
    errors = []
    for segments in (16, 32, 64, 128):
        mf = ManifoldFunction.from_field(polygonal_circle(radius=radius, segments=segments), ExpSum())
        errors.append(abs(integral(mf) - exact))
    rates = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    # inscribed polygon plus linear interpolation: second order
    assert np.all(rates > 1.8)


def test_box_cells():
    boxes = box_cells([[0.0, 0.2], [0.5, 0.2]], [[0.5, 0.2], [1.0, 0.2]])
    assert boxes.k == 1
    assert hausdorff_measure(boxes) == pytest.approx(1.0)
    mf = ManifoldFunction(boxes, [1.0, 3.0, 3.0, 5.0])
    # each box carries the mean of its corner values: 2 and 4
    assert integral(mf) == pytest.approx(0.5 * 2.0 + 0.5 * 4.0)
    with pytest.raises(DataError):
        box_cells([[0.0, 0.0], [0.5, 0.0]], [[0.5, 0.5], [1.0, 0.0]])
    with pytest.raises(DataError):
        refine(mf)


def test_ball_meshes():
    assert ball([0.5], 0.1).k == 1
    assert hausdorff_measure(ball([0.5], 0.1)) == pytest.approx(0.2)
    assert ball([0.5, 0.5], 0.1).k == 2
    with pytest.raises(BallExitsDomainError):
        ball([0.05, 0.5], 0.1)


def test_sample_points_lie_on_manifold():
    rng = np.random.default_rng(0)
    mf = ManifoldFunction.from_field(segment([0.1, 0.2], [0.7, 0.2], segments=5), ExpSum())
    points, values = sample_points(mf, 500, rng)
    assert points.shape == (500, 2)
    assert np.allclose(points[:, 1], 0.2)
    assert np.all((points[:, 0] >= 0.1) & (points[:, 0] <= 0.7))
    # linear interpolation of exp is within the chord error
    assert np.allclose(values, np.exp(points.sum(axis=1)), atol=2e-2)


def test_sample_points_follow_measure():
    rng = np.random.default_rng(1)
    mesh = interval(0.0, 1.0, 4)
    _, values = sample_points(ManifoldFunction(mesh, mesh.vertices[:, 0]), 20000, rng)
    assert values.mean() == pytest.approx(0.5, abs=0.02)


def test_simplex_measures_flags_zero_extent_boxes():
    boxes = box_cells([[0.1, 0.1]], [[0.1, 0.1]])
    with pytest.raises(DegenerateSimplexError):
        simplex_measures(
            SimplicialManifold(d=2, k=1, vertices=boxes.vertices, simplices=boxes.simplices, is_box=True)
        )
