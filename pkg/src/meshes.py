"""Builders for the simplicial meshes used by studies, tests and the CLI."""

import itertools
from typing import Sequence

import numpy as np

from .errors import BallExitsDomainError, DataError, UnsupportedDimensionError
from .geometry import BOUNDARY_TOLERANCE, SimplicialManifold


def point_set(points, name: str = "points") -> SimplicialManifold:
    """k = 0 manifold of isolated points."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    return SimplicialManifold(
        d=points.shape[1],
        k=0,
        vertices=points,
        simplices=np.arange(len(points))[:, None],
        name=name,
    )


def interval(a: float = 0.0, b: float = 1.0, segments: int = 1) -> SimplicialManifold:
    """[a, b] in d = 1 split into equal segments."""
    if not a < b:
        raise DataError(f"Empty interval [{a}, {b}]")
    nodes = np.linspace(a, b, segments + 1)
    edges = np.column_stack([np.arange(segments), np.arange(1, segments + 1)])
    return SimplicialManifold(d=1, k=1, vertices=nodes[:, None], simplices=edges, name="interval")


def segment(start, end, segments: int = 1) -> SimplicialManifold:
    """Straight polyline between two points in any dimension."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    t = np.linspace(0.0, 1.0, segments + 1)[:, None]
    edges = np.column_stack([np.arange(segments), np.arange(1, segments + 1)])
    return SimplicialManifold(
        d=len(start), k=1, vertices=start + t * (end - start), simplices=edges, name="segment"
    )


def polygon_boundary(corners, name: str = "polygon") -> SimplicialManifold:
    """Closed polyline through the given 2-d corners."""
    corners = np.asarray(corners, dtype=float)
    count = len(corners)
    if count < 3:
        raise DataError("A closed polygon needs at least 3 corners")
    edges = np.column_stack([np.arange(count), (np.arange(count) + 1) % count])
    return SimplicialManifold(d=2, k=1, vertices=corners, simplices=edges, name=name)


def regular_polygon(center, radius: float, segments: int, phase: float = 0.0) -> np.ndarray:
    theta = phase + 2.0 * np.pi * np.arange(segments) / segments
    center = np.asarray(center, dtype=float)
    return center + radius * np.column_stack([np.cos(theta), np.sin(theta)])


def polygonal_circle(center=(0.5, 0.5), radius: float = 0.3, segments: int = 2048):
    """Inscribed regular polygon approximating a circle."""
    _check_ball(center, radius)
    return polygon_boundary(regular_polygon(center, radius, segments), name="circle")


def disk(center=(0.5, 0.5), radius: float = 0.3, segments: int = 64, rings: int = 1):
    """Triangulated regular-polygon disk.

    rings = 1 is a fan around the centre; more rings add concentric layers of
    quadrilaterals, each split in two triangles.
    """
    _check_ball(center, radius)
    center = np.asarray(center, dtype=float)
    vertices = [center]
    triangles = []
    for ring in range(1, rings + 1):
        vertices.extend(regular_polygon(center, radius * ring / rings, segments))
    for j in range(segments):
        triangles.append((0, 1 + j, 1 + (j + 1) % segments))
    for ring in range(1, rings):
        inner = 1 + (ring - 1) * segments
        outer = 1 + ring * segments
        for j in range(segments):
            nxt = (j + 1) % segments
            triangles.append((inner + j, outer + j, outer + nxt))
            triangles.append((inner + j, outer + nxt, inner + nxt))
    return SimplicialManifold(
        d=2, k=2, vertices=np.array(vertices), simplices=np.array(triangles), name="disk"
    )


def unit_square(divisions: int = 1) -> SimplicialManifold:
    """[0, 1]^2 as a structured triangulation with 2 * divisions^2 triangles."""
    ticks = np.linspace(0.0, 1.0, divisions + 1)
    xx, yy = np.meshgrid(ticks, ticks, indexing="ij")
    vertices = np.column_stack([xx.ravel(), yy.ravel()])
    stride = divisions + 1
    triangles = []
    for i in range(divisions):
        for j in range(divisions):
            v00 = i * stride + j
            v10 = (i + 1) * stride + j
            v01 = v00 + 1
            v11 = v10 + 1
            triangles.append((v00, v10, v11))
            triangles.append((v00, v11, v01))
    return SimplicialManifold(
        d=2, k=2, vertices=vertices, simplices=np.array(triangles), name="unit_square"
    )


def unit_cube(divisions: int = 1) -> SimplicialManifold:
    """[0, 1]^3 split into 6 tetrahedra per sub-cube (Freudenthal split)."""
    ticks = np.linspace(0.0, 1.0, divisions + 1)
    grid = np.meshgrid(ticks, ticks, ticks, indexing="ij")
    vertices = np.column_stack([g.ravel() for g in grid])
    shape = (divisions + 1,) * 3

    tets = []
    for base in itertools.product(range(divisions), repeat=3):
        for order in itertools.permutations(range(3)):
            corner = list(base)
            path = [np.ravel_multi_index(corner, shape)]
            for axis in order:
                corner[axis] += 1
                path.append(np.ravel_multi_index(corner, shape))
            tets.append(path)
    return SimplicialManifold(
        d=3, k=3, vertices=vertices, simplices=np.array(tets), name="unit_cube"
    )


def ball(center: Sequence[float], radius: float, resolution: int = 64) -> SimplicialManifold:
    """Solid ball B(x, r) for d = 1 (interval) or d = 2 (fan disk)."""
    center = np.asarray(center, dtype=float).ravel()
    _check_ball(center, radius)
    if len(center) == 1:
        lo, hi = center[0] - radius, center[0] + radius
        mesh = interval(lo, hi, max(2, resolution // 2 * 2))
        return mesh
    if len(center) == 2:
        return disk(center, radius, segments=resolution)
    raise UnsupportedDimensionError("Ball meshes are available for d = 1 and d = 2")


def box_cells(lower, upper) -> SimplicialManifold:
    """Axis-aligned box decomposition from paired (lower, upper) corners."""
    lower = np.atleast_2d(np.asarray(lower, dtype=float))
    upper = np.atleast_2d(np.asarray(upper, dtype=float))
    if lower.shape != upper.shape:
        raise DataError("Box corners must pair up")
    extents = upper - lower
    if np.any(extents < 0):
        raise DataError("Box upper corner below lower corner")
    axes = (extents > BOUNDARY_TOLERANCE).sum(axis=1)
    if len(set(axes.tolist())) != 1:
        raise DataError("All boxes in one decomposition must share a dimension")
    count = len(lower)
    vertices = np.concatenate([lower, upper])
    cells = np.column_stack([np.arange(count), np.arange(count, 2 * count)])
    return SimplicialManifold(
        d=lower.shape[1], k=int(axes[0]), vertices=vertices, simplices=cells, is_box=True, name="boxes"
    )


def _check_ball(center, radius: float) -> None:
    center = np.asarray(center, dtype=float)
    if radius <= 0:
        raise DataError(f"Radius must be positive, got {radius}")
    if np.any(center - radius < -BOUNDARY_TOLERANCE) or np.any(center + radius > 1.0 + BOUNDARY_TOLERANCE):
        raise BallExitsDomainError(f"Ball of radius {radius} at {center.tolist()} leaves [0, 1]^d")
