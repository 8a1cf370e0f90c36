"""Simplicial manifolds in [0, 1]^d, Hausdorff measure and quadrature."""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import DataError, DegenerateSimplexError, DegreeUnsupportedError
from .fields import ScalarField
from .simplex_rules import MIDPOINT_EDGES, RED_CHILDREN, gauss_segment, reference_rule

# Coordinates within this distance of 0 or 1 count as touching the boundary
BOUNDARY_TOLERANCE = 1e-12
# A simplex is degenerate when its measure falls below this fraction of
# (longest edge)^k
DEGENERACY_TOLERANCE = 1e-14


@dataclass(frozen=True, eq=False)
class SimplicialManifold:
    """A k-dimensional simplicial complex with vertices in [0, 1]^d.

    For k = 0 every simplex is a single vertex. With `is_box` set, each cell is
    an axis-aligned box given by its (lower, upper) corner vertices and k is the
    number of axes along which the boxes have extent.
    """

    d: int
    k: int
    vertices: np.ndarray
    simplices: np.ndarray
    is_box: bool = False
    name: str = ""

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=float).reshape(-1, self.d)
        width = 2 if self.is_box else self.k + 1
        simplices = np.asarray(self.simplices, dtype=np.int64).reshape(-1, width)
        if not 0 <= self.k <= self.d:
            raise DataError(f"Intrinsic dimension k={self.k} outside [0, d={self.d}]")
        if len(simplices) == 0:
            raise DataError("Manifold has no simplices")
        if simplices.min() < 0 or simplices.max() >= len(vertices):
            raise DataError("Simplex references a vertex index out of range")
        vertices.setflags(write=False)
        simplices.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "simplices", simplices)

    @property
    def cell_width(self) -> int:
        return self.simplices.shape[1]

    def simplex_coordinates(self, index: int) -> np.ndarray:
        return self.vertices[self.simplices[index]]


@dataclass(frozen=True, eq=False)
class ManifoldFunction:
    """A manifold plus one real sample per vertex (piecewise-linear f_M)."""

    manifold: SimplicialManifold
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        if len(values) != len(self.manifold.vertices):
            raise DataError(
                f"{len(values)} values for {len(self.manifold.vertices)} vertices"
            )
        if not np.all(np.isfinite(values)):
            raise DataError("Manifold function values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def d(self) -> int:
        return self.manifold.d

    @property
    def k(self) -> int:
        return self.manifold.k

    @classmethod
    def from_field(
        cls, manifold: SimplicialManifold, phi: ScalarField
    ) -> "ManifoldFunction":
        """Sample a field at the vertices."""
        return cls(manifold, phi.evaluate(manifold.vertices))

    @classmethod
    def constant(cls, manifold: SimplicialManifold, value: float = 1.0):
        return cls(manifold, np.full(len(manifold.vertices), float(value)))

    def with_values(self, values) -> "ManifoldFunction":
        return ManifoldFunction(self.manifold, values)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """Nodes and positive weights on a manifold.

    `cells` maps each node to its simplex and `bary` holds the interpolation
    weights of that simplex's vertices at the node.
    """

    points: np.ndarray
    weights: np.ndarray
    cells: np.ndarray
    bary: np.ndarray
    degree: int

    def __len__(self) -> int:
        return len(self.weights)

    def interpolate(self, mf: ManifoldFunction) -> np.ndarray:
        """Piecewise-linear f_M at the nodes."""
        corner_values = mf.values[mf.manifold.simplices[self.cells]]
        return (self.bary * corner_values).sum(axis=1)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def simplex_measure(coords) -> float:
    """k-dimensional measure sqrt(det(J^T J)) / k! of one simplex.

    coords holds the k + 1 vertices as rows; a single point has measure 1.
    """
    coords = np.atleast_2d(np.asarray(coords, dtype=float))
    k = len(coords) - 1
    if k == 0:
        return 1.0
    if k > coords.shape[1]:
        raise DataError(f"A {k}-simplex does not fit in dimension {coords.shape[1]}")
    edges = coords[1:] - coords[0]
    gram = edges @ edges.T
    measure = math.sqrt(max(np.linalg.det(gram), 0.0)) / math.factorial(k)
    scale = max(np.linalg.norm(coords[:, None] - coords[None], axis=2).max(), 1e-300)
    if measure <= DEGENERACY_TOLERANCE * scale**k:
        raise DegenerateSimplexError(f"Degenerate {k}-simplex with measure {measure}")
    return measure


def _box_extents(manifold: SimplicialManifold) -> np.ndarray:
    lower = manifold.vertices[manifold.simplices[:, 0]]
    upper = manifold.vertices[manifold.simplices[:, 1]]
    return upper - lower


def _raw_measures(manifold: SimplicialManifold) -> np.ndarray:
    """Per-cell measures without degeneracy checks."""
    if manifold.k == 0:
        return np.ones(len(manifold.simplices))
    if manifold.is_box:
        extents = np.abs(_box_extents(manifold))
        extents = np.where(extents > BOUNDARY_TOLERANCE, extents, 1.0)
        return extents.prod(axis=1)
    coords = manifold.vertices[manifold.simplices]
    edges = coords[:, 1:] - coords[:, :1]
    gram = np.einsum("sid,sjd->sij", edges, edges)
    dets = np.clip(np.linalg.det(gram), 0.0, None)
    return np.sqrt(dets) / math.factorial(manifold.k)


def _degenerate_cells(manifold: SimplicialManifold, measures: np.ndarray) -> np.ndarray:
    if manifold.k == 0:
        return np.zeros(len(measures), dtype=bool)
    if manifold.is_box:
        nonzero = (np.abs(_box_extents(manifold)) > BOUNDARY_TOLERANCE).sum(axis=1)
        return nonzero != manifold.k
    coords = manifold.vertices[manifold.simplices]
    spans = np.linalg.norm(coords[:, :, None] - coords[:, None], axis=3).max(axis=(1, 2))
    return measures <= DEGENERACY_TOLERANCE * np.maximum(spans, 1e-300) ** manifold.k


def simplex_measures(manifold: SimplicialManifold) -> np.ndarray:
    """Measure of every cell; raises on degenerate cells."""
    measures = _raw_measures(manifold)
    bad = np.flatnonzero(_degenerate_cells(manifold, measures))
    if len(bad):
        raise DegenerateSimplexError(
            f"{len(bad)} degenerate cell(s), first at index {int(bad[0])}"
        )
    return measures


def hausdorff_measure(manifold: SimplicialManifold) -> float:
    """H^k(M): the sum of cell measures (counting measure for k = 0)."""
    return float(np.sum(simplex_measures(manifold)))


def _box_rule(manifold: SimplicialManifold, degree: int) -> QuadratureRule:
    lower = manifold.vertices[manifold.simplices[:, 0]]
    extents = _box_extents(manifold)
    t_bary, t_w = gauss_segment(degree)
    t = t_bary[:, 1]

    points, weights, cells = [], [], []
    for c in range(len(manifold.simplices)):
        axes = np.flatnonzero(np.abs(extents[c]) > BOUNDARY_TOLERANCE)
        grids = np.meshgrid(*([t] * len(axes)), indexing="ij")
        wgrids = np.meshgrid(*([t_w] * len(axes)), indexing="ij")
        local = np.stack([g.ravel() for g in grids], axis=1)
        w = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
        p = np.repeat(lower[c][None], len(local), axis=0)
        p[:, axes] += local * extents[c, axes]
        points.append(p)
        weights.append(w * np.prod(np.abs(extents[c, axes])))
        cells.append(np.full(len(p), c))
    points = np.concatenate(points)
    # box cells carry the mean of their two corner values
    bary = np.full((len(points), 2), 0.5)
    return QuadratureRule(
        points, np.concatenate(weights), np.concatenate(cells), bary, degree
    )


def quadrature_nodes(
    manifold: SimplicialManifold, degree: int, strategy: str = "exact"
) -> QuadratureRule:
    """Quadrature on M exact for polynomials of the given total degree per cell.

    k = 0 uses the points themselves with unit weights; segments use
    Gauss-Legendre; triangles and tetrahedra use tabulated symmetric rules and,
    beyond them, the fallback named by `strategy` ('exact' or 'subdivide').
    """
    if degree < 1:
        raise DegreeUnsupportedError(f"Quadrature degree must be >= 1, got {degree}")
    k = manifold.k
    count = len(manifold.simplices)
    if k == 0:
        return QuadratureRule(
            points=manifold.vertices[manifold.simplices[:, 0]].copy(),
            weights=np.ones(count),
            cells=np.arange(count),
            bary=np.ones((count, 1)),
            degree=degree,
        )
    if manifold.is_box:
        simplex_measures(manifold)
        return _box_rule(manifold, degree)

    bary, ref_w = reference_rule(k, degree, strategy)
    measures = simplex_measures(manifold)
    coords = manifold.vertices[manifold.simplices]  # (S, k+1, d)
    points = np.einsum("qb,sbd->sqd", bary, coords).reshape(-1, manifold.d)
    weights = (measures[:, None] * ref_w[None, :]).ravel()
    cells = np.repeat(np.arange(count), len(ref_w))
    return QuadratureRule(
        points=np.clip(points, 0.0, 1.0) if _inside(manifold) else points,
        weights=weights,
        cells=cells,
        bary=np.tile(bary, (count, 1)),
        degree=degree,
    )


def _inside(manifold: SimplicialManifold) -> bool:
    v = manifold.vertices
    return bool(np.all(v >= -BOUNDARY_TOLERANCE) and np.all(v <= 1 + BOUNDARY_TOLERANCE))


@dataclass
class ValidationReport:
    """Findings of validate_manifold. Containment and index problems are fatal."""

    containment_violations: List[int] = field(default_factory=list)
    degenerate_simplices: List[int] = field(default_factory=list)
    duplicate_vertices: List[Tuple[int, int]] = field(default_factory=list)
    duplicate_simplices: List[Tuple[int, int]] = field(default_factory=list)
    boundary_contacts: List[int] = field(default_factory=list)
    periodic: bool = False
    advisories: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        """True when nothing fatal was found."""
        return not self.containment_violations

    @property
    def clean(self) -> bool:
        """True when nothing at all was flagged."""
        return self.ok and not (
            self.degenerate_simplices
            or self.duplicate_vertices
            or self.duplicate_simplices
            or (self.periodic and self.boundary_contacts)
        )

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "containment_violations": self.containment_violations,
            "degenerate_simplices": self.degenerate_simplices,
            "duplicate_vertices": [list(p) for p in self.duplicate_vertices],
            "duplicate_simplices": [list(p) for p in self.duplicate_simplices],
            "boundary_contacts": self.boundary_contacts,
            "periodic": self.periodic,
            "advisories": self.advisories,
        }

    def summary(self) -> List[str]:
        lines = []
        if self.containment_violations:
            lines.append(
                f"✗ {len(self.containment_violations)} vertex(es) outside [0, 1]^d"
            )
        if self.degenerate_simplices:
            lines.append(f"✗ {len(self.degenerate_simplices)} degenerate simplex(es)")
        if self.duplicate_vertices:
            lines.append(f"  → {len(self.duplicate_vertices)} duplicate vertex pair(s)")
        if self.duplicate_simplices:
            lines.append(
                f"  → {len(self.duplicate_simplices)} overlapping simplex pair(s)"
            )
        if self.periodic and self.boundary_contacts:
            lines.append(
                f"✗ {len(self.boundary_contacts)} vertex(es) touch the boundary "
                "(periodic bases need M inside the open cube)"
            )
        lines.extend(f"  → {a}" for a in self.advisories)
        if not lines:
            lines.append("✓ Manifold passed all checks")
        return lines


def validate_manifold(
    manifold: SimplicialManifold, periodic: bool = False
) -> ValidationReport:
    """Report containment, degeneracy, duplicates and boundary contact.

    The intersection condition between pieces is only checked heuristically:
    simplices spanning the same vertex set are reported as overlapping.
    """
    report = ValidationReport(periodic=periodic)
    v = manifold.vertices

    outside = np.any(v < -BOUNDARY_TOLERANCE, axis=1) | np.any(
        v > 1.0 + BOUNDARY_TOLERANCE, axis=1
    )
    report.containment_violations = [int(i) for i in np.flatnonzero(outside)]

    touching = np.any(v <= BOUNDARY_TOLERANCE, axis=1) | np.any(
        v >= 1.0 - BOUNDARY_TOLERANCE, axis=1
    )
    report.boundary_contacts = [int(i) for i in np.flatnonzero(touching)]

    measures = _raw_measures(manifold)
    report.degenerate_simplices = [
        int(i) for i in np.flatnonzero(_degenerate_cells(manifold, measures))
    ]

    _, first, inverse = np.unique(v, axis=0, return_index=True, return_inverse=True)
    inverse = np.asarray(inverse).ravel()
    for i, group in enumerate(inverse):
        if first[group] != i:
            report.duplicate_vertices.append((int(first[group]), i))

    seen = {}
    for i, simplex in enumerate(manifold.simplices):
        key = tuple(sorted(int(j) for j in simplex))
        if key in seen:
            report.duplicate_simplices.append((seen[key], i))
        else:
            seen[key] = i

    report.advisories.append(
        "pairwise intersections are checked only for shared-face overlap"
    )
    return report


def refine(mf: ManifoldFunction, method: str = "midpoint") -> ManifoldFunction:
    """Refine every simplex, interpolating values linearly.

    'midpoint' splits segments in 2, triangles in 4 and tetrahedra in 8 through
    edge midpoints; 'centroid' splits each k-simplex into k + 1 around its
    centroid. Neither changes the set M.
    """
    manifold = mf.manifold
    k = manifold.k
    if k == 0:
        return mf
    if manifold.is_box:
        raise DataError("Box decompositions cannot be refined")

    vertices = [row for row in manifold.vertices]
    values = list(mf.values)
    simplices = []

    if method == "centroid":
        for simplex in manifold.simplices:
            centre = len(vertices)
            vertices.append(manifold.vertices[simplex].mean(axis=0))
            values.append(float(mf.values[simplex].mean()))
            for face in range(k + 1):
                child = [int(j) for j in simplex]
                child[face] = centre
                simplices.append(child)
    elif method == "midpoint":
        midpoints = {}
        for simplex in manifold.simplices:
            local = [int(j) for j in simplex]
            for a, b in MIDPOINT_EDGES[k]:
                key = tuple(sorted((local[a], local[b])))
                if key not in midpoints:
                    midpoints[key] = len(vertices)
                    vertices.append(0.5 * (manifold.vertices[key[0]] + manifold.vertices[key[1]]))
                    values.append(0.5 * (mf.values[key[0]] + mf.values[key[1]]))
                local.append(midpoints[key])
            for child in RED_CHILDREN[k]:
                simplices.append([local[i] for i in child])
    else:
        raise ValueError(f"Unknown refinement method '{method}'")

    refined = SimplicialManifold(
        d=manifold.d,
        k=k,
        vertices=np.array(vertices),
        simplices=np.array(simplices),
        name=manifold.name,
    )
    return ManifoldFunction(refined, np.array(values))


def sample_points(
    mf: ManifoldFunction, count: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Draw points from the normalized Hausdorff measure on M.

    Returns (points, values) with values interpolated from the vertices.
    """
    manifold = mf.manifold
    measures = simplex_measures(manifold)
    cells = rng.choice(len(measures), size=count, p=measures / measures.sum())
    corners = manifold.simplices[cells]

    if manifold.k == 0:
        return manifold.vertices[corners[:, 0]].copy(), mf.values[corners[:, 0]].copy()
    if manifold.is_box:
        lower = manifold.vertices[corners[:, 0]]
        upper = manifold.vertices[corners[:, 1]]
        points = lower + rng.random((count, manifold.d)) * (upper - lower)
        return points, mf.values[corners].mean(axis=1)

    bary = rng.dirichlet(np.ones(manifold.k + 1), size=count)
    points = np.einsum("nb,nbd->nd", bary, manifold.vertices[corners])
    values = (bary * mf.values[corners]).sum(axis=1)
    return points, values
