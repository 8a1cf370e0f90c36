"""Reference quadrature rules on the unit k-simplex.

Rules are returned in barycentric form: an array of barycentric coordinates
(q, k + 1) and weights summing to 1, so they can be mapped onto any simplex by
multiplying the weights with its measure.
"""

import math
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .errors import DegreeUnsupportedError


def _triangle_table(degree: int):
    """Symmetric triangle rules with positive weights (Strang and Fix)."""
    if degree <= 1:
        xy = [[1.0 / 3.0, 1.0 / 3.0]]
        w = [1.0]
    elif degree == 2:
        xy = [[1.0 / 6.0, 1.0 / 6.0], [2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0]]
        w = [1.0 / 3.0] * 3
    elif degree == 3:
        a, b, c = 0.659027622374092, 0.231933368553031, 0.109039009072877
        xy = [[a, b], [a, c], [b, a], [b, c], [c, a], [c, b]]
        w = [1.0 / 6.0] * 6
    elif degree == 4:
        a, b = 0.816847572980459, 0.091576213509771
        c, e = 0.108103018168070, 0.445948490915965
        xy = [[a, b], [b, a], [b, b], [c, e], [e, c], [e, e]]
        w = [0.109951743655322] * 3 + [0.223381589678011] * 3
    elif degree == 5:
        a, b = 0.79742698535308720, 0.10128650732345633
        c, e = 0.05971587178976981, 0.47014206410511505
        xy = [[1.0 / 3.0, 1.0 / 3.0], [a, b], [b, a], [b, b], [c, e], [e, c], [e, e]]
        w = [0.225] + [0.12593918054482717] * 3 + [0.13239415278850616] * 3
    else:
        return None
    xy = np.array(xy)
    bary = np.column_stack([1.0 - xy.sum(axis=1), xy])
    w = np.array(w)
    return bary, w / w.sum()


def _tetrahedron_table(degree: int):
    """Symmetric tetrahedron rules with positive weights (Zienkiewicz and Taylor)."""
    if degree <= 1:
        xyz = [[0.25, 0.25, 0.25]]
    elif degree == 2:
        a, b = 0.5854101966249685, 0.1381966011250105
        xyz = [[a, b, b], [b, a, b], [b, b, a], [b, b, b]]
    else:
        return None
    xyz = np.array(xyz)
    bary = np.column_stack([1.0 - xyz.sum(axis=1), xyz])
    return bary, np.full(len(xyz), 1.0 / len(xyz))


# Highest degree with a tabulated rule, per intrinsic dimension
TABULATED_DEGREE = {2: 5, 3: 2}


def gauss_segment(degree: int):
    """Gauss-Legendre on the unit segment, exact to the given degree."""
    q = max(1, math.ceil((degree + 1) / 2))
    t, w = leggauss(q)
    t = 0.5 * (t + 1.0)
    return np.column_stack([1.0 - t, t]), 0.5 * w


def collapsed_rule(k: int, degree: int):
    """Conical product Gauss-Jacobi rule on the unit k-simplex.

    Maps the cube [0, 1]^k onto the simplex with x_1 = u_1,
    x_i = u_i * prod_{j<i} (1 - u_j); the Jacobian is absorbed into Jacobi
    weights, so every weight is positive and the rule is exact to `degree`.
    """
    q = max(1, math.ceil((degree + 1) / 2))
    axes = []
    for i in range(k):
        exponent = k - 1 - i
        t, w = roots_jacobi(q, exponent, 0.0)
        u = 0.5 * (t + 1.0)
        axes.append((u, w / 2.0 ** (exponent + 1)))

    grids = np.meshgrid(*[u for u, _ in axes], indexing="ij")
    wgrids = np.meshgrid(*[w for _, w in axes], indexing="ij")
    u = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)

    x = np.zeros_like(u)
    remaining = np.ones(len(u))
    for i in range(k):
        x[:, i] = u[:, i] * remaining
        remaining = remaining * (1.0 - u[:, i])
    bary = np.column_stack([1.0 - x.sum(axis=1), x])
    return bary, weights / weights.sum()


# Sub-simplices of red (midpoint) refinement, in terms of local points:
# vertices 0..k followed by edge midpoints in the order of MIDPOINT_EDGES[k].
MIDPOINT_EDGES = {
    1: [(0, 1)],
    2: [(0, 1), (0, 2), (1, 2)],
    3: [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
}

RED_CHILDREN = {
    1: [(0, 2), (2, 1)],
    2: [(0, 3, 4), (3, 1, 5), (4, 5, 2), (3, 5, 4)],
    3: [
        # corner tetrahedra
        (0, 4, 5, 6),
        (4, 1, 7, 8),
        (5, 7, 2, 9),
        (6, 8, 9, 3),
        # inner octahedron split along the m02 - m13 diagonal
        (4, 5, 6, 8),
        (4, 5, 7, 8),
        (5, 6, 8, 9),
        (5, 7, 8, 9),
    ],
}


def red_children_barycentric(k: int) -> list:
    """Barycentric vertex coordinates of each child of one red refinement."""
    local = [np.eye(k + 1)[i] for i in range(k + 1)]
    for a, b in MIDPOINT_EDGES[k]:
        local.append(0.5 * (np.eye(k + 1)[a] + np.eye(k + 1)[b]))
    return [np.array([local[i] for i in child]) for child in RED_CHILDREN[k]]


def subdivided_rule(k: int, degree: int, base_degree: int = 4):
    """Composite rule: uniform red refinement until `base_degree` rules suffice.

    Each level halves the element size; the number of levels grows with
    log2(degree / base_degree).
    """
    levels = max(0, math.ceil(math.log2(max(degree, 1) / base_degree)))
    base_bary, base_w = reference_rule(k, min(degree, base_degree), "exact")
    children = [np.eye(k + 1)]
    for _ in range(levels):
        next_children = []
        for corners in children:
            for child in red_children_barycentric(k):
                next_children.append(child @ corners)
        children = next_children
    bary = np.concatenate([base_bary @ corners for corners in children])
    # |det| of a child's barycentric corner matrix is its volume fraction
    fractions = np.array([abs(np.linalg.det(corners)) for corners in children])
    weights = np.concatenate([base_w * f for f in fractions])
    return bary, weights / weights.sum()


@lru_cache(maxsize=128)
def _cached_rule(k: int, degree: int, strategy: str):
    if k == 1:
        return gauss_segment(degree)
    table = _triangle_table(degree) if k == 2 else _tetrahedron_table(degree)
    if table is not None:
        return table
    if strategy == "subdivide":
        return subdivided_rule(k, degree)
    if strategy == "exact":
        return collapsed_rule(k, degree)
    raise DegreeUnsupportedError(
        f"No tabulated rule of degree {degree} for k={k} "
        f"(max {TABULATED_DEGREE[k]}) and strategy '{strategy}'"
    )


def reference_rule(k: int, degree: int, strategy: str = "exact"):
    """Barycentric nodes (q, k + 1) and weights (q,) summing to one.

    strategy: 'exact' falls back to collapsed Gauss-Jacobi rules beyond the
    tabulated degrees, 'subdivide' to composite degree-4 rules, 'table' raises.
    """
    if k < 1 or k > 3:
        raise DegreeUnsupportedError(f"No simplex rules for k={k}")
    if degree < 1:
        raise DegreeUnsupportedError(f"Quadrature degree must be >= 1, got {degree}")
    bary, weights = _cached_rule(k, int(degree), strategy)
    return bary.copy(), weights.copy()
