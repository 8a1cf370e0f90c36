"""Manifold function encoders: plain, joint, measure-weighted and Monte Carlo."""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .basis import BasisSpec, basis_table
from .errors import (
    DataError,
    DimensionMismatchError,
    EmptyInputError,
    MixedNormalizationError,
    PeriodicBoundaryContactError,
    WeightNormalizationError,
)
from .fields import ScalarField, as_points
from .geometry import (
    BOUNDARY_TOLERANCE,
    ManifoldFunction,
    QuadratureRule,
    hausdorff_measure,
    quadrature_nodes,
    sample_points,
)
from .models import EncodedVector, Normalization, Provenance

# Rows of the basis table evaluated at once
CHUNK_SIZE = 4096
WEIGHT_TOLERANCE = 1e-9


def default_degree(spec: BasisSpec) -> int:
    """Quadrature degree for phi_{n,m} times a piecewise-linear f_M.

    Along any simplex a tensor polynomial of per-axis degree n - 1 has total
    degree d (n - 1); f_M adds one, and one more is kept as margin. Fourier
    members are integrated at twice that.
    """
    degree = spec.d * (spec.n - 1) + 2
    return 2 * degree if spec.periodic else degree


def _check_compatible(mf: ManifoldFunction, spec: BasisSpec) -> None:
    if mf.d != spec.d:
        raise DimensionMismatchError(
            f"Manifold lives in d={mf.d} but the basis has d={spec.d}"
        )
    if spec.periodic:
        v = mf.manifold.vertices
        if np.any(v <= BOUNDARY_TOLERANCE) or np.any(v >= 1.0 - BOUNDARY_TOLERANCE):
            raise PeriodicBoundaryContactError(
                "Fourier bases need the manifold strictly inside (0, 1)^d"
            )


def integrate_against_basis(
    spec: BasisSpec, points: np.ndarray, weighted: Dict[str, np.ndarray]
) -> Dict[str, np.ndarray]:
    """sum_q w_q g(x_q) phi_m(x_q) for each named weighted integrand.

    Accumulates chunk by chunk in node order.
    """
    totals = {name: np.zeros(spec.kappa) for name in weighted}
    for start in range(0, len(points), CHUNK_SIZE):
        stop = start + CHUNK_SIZE
        table = basis_table(spec, points[start:stop])
        for name, values in weighted.items():
            totals[name] += values[start:stop] @ table
    return totals


def _manifold_integrals(
    mf: ManifoldFunction,
    spec: BasisSpec,
    rule: QuadratureRule,
    shape_field: Optional[ScalarField] = None,
    coordinate_blocks: bool = False,
) -> Dict[str, np.ndarray]:
    shape_values = (
        np.ones(len(rule)) if shape_field is None else shape_field.evaluate(rule.points)
    )
    weighted = {
        "shape": rule.weights * shape_values,
        "function": rule.weights * rule.interpolate(mf),
    }
    if coordinate_blocks:
        for j in range(spec.d):
            weighted[f"coord_{j + 1}"] = rule.weights * rule.points[:, j]
    return integrate_against_basis(spec, rule.points, weighted)


def encode(
    mf: ManifoldFunction,
    basis: BasisSpec,
    degree: Optional[int] = None,
    strategy: str = "exact",
    shape_field: Optional[ScalarField] = None,
    coordinate_blocks: bool = False,
) -> EncodedVector:
    """Plain encoding: shape_m = int_M phi_m, function_m = int_M f_M phi_m.

    `shape_field` replaces the constant shape integrand and
    `coordinate_blocks` adds blocks coord_1..coord_d for the coordinate
    functions. The result is Raw (no 1 / H^k factor).
    """
    _check_compatible(mf, basis)
    degree = degree or default_degree(basis)
    rule = quadrature_nodes(mf.manifold, degree, strategy)
    blocks = _manifold_integrals(mf, basis, rule, shape_field, coordinate_blocks)
    return EncodedVector(
        basis=basis,
        blocks=blocks,
        normalization=Normalization.RAW,
        provenance=Provenance(method="quadrature", degree=degree, samples=len(rule)),
    )


@dataclass
class JointManifoldFunction:
    """One optional manifold function per intrinsic dimension 0..d."""

    d: int
    entries: Dict[int, ManifoldFunction]

    def __post_init__(self):
        self.entries = {k: mf for k, mf in self.entries.items() if mf is not None}
        if not self.entries:
            raise EmptyInputError("Joint manifold function has no components")
        for k, mf in self.entries.items():
            if mf.d != self.d:
                raise DimensionMismatchError(
                    f"Component k={k} lives in d={mf.d}, expected d={self.d}"
                )
            if mf.k != k:
                raise DataError(f"Component stored under k={k} has k={mf.k}")

    @classmethod
    def from_components(cls, components: Iterable[ManifoldFunction]) -> "JointManifoldFunction":
        """Group components by intrinsic dimension; one per dimension."""
        components = list(components)
        if not components:
            raise EmptyInputError("Joint manifold function has no components")
        entries = {}
        for mf in components:
            if mf.k in entries:
                raise DataError(f"Two components with k={mf.k}")
            entries[mf.k] = mf
        return cls(d=components[0].d, entries=entries)

    def components(self) -> List[ManifoldFunction]:
        return [self.entries[k] for k in sorted(self.entries)]


def encode_joint(
    jmf: JointManifoldFunction,
    basis: BasisSpec,
    degree: Optional[int] = None,
    strategy: str = "exact",
) -> EncodedVector:
    """Sum over present components of (1 / H^k(M_k)) int_{M_k} (.) phi_m."""
    degree = degree or default_degree(basis)
    shape = np.zeros(basis.kappa)
    function = np.zeros(basis.kappa)
    samples = 0
    for mf in jmf.components():
        _check_compatible(mf, basis)
        rule = quadrature_nodes(mf.manifold, degree, strategy)
        measure = hausdorff_measure(mf.manifold)
        blocks = _manifold_integrals(mf, basis, rule)
        shape += blocks["shape"] / measure
        function += blocks["function"] / measure
        samples += len(rule)
    return EncodedVector(
        basis=basis,
        blocks={"shape": shape, "function": function},
        normalization=Normalization.MEASURE_NORMALIZED,
        provenance=Provenance(method="quadrature", degree=degree, samples=samples),
    )


def uniform_density(mf: ManifoldFunction) -> np.ndarray:
    """Per-vertex density 1 / H^k(M), a probability density on M."""
    return np.full(len(mf.values), 1.0 / hausdorff_measure(mf.manifold))


def encode_measured(
    mf: ManifoldFunction,
    weights: Sequence[float],
    basis: BasisSpec,
    degree: Optional[int] = None,
    kind: str = "mass",
    strategy: str = "exact",
) -> EncodedVector:
    """Three-block encoding against a probability measure mu_M on M.

    kind='mass': weights are point masses at the vertices summing to one.
    kind='density': weights are vertex samples of a piecewise-linear density
    whose Hausdorff integral over M is one.
    Blocks: shape (Hausdorff-normalized), measure (int phi dmu) and
    function (int f phi dmu).
    """
    _check_compatible(mf, basis)
    weights = np.asarray(weights, dtype=float).ravel()
    if len(weights) != len(mf.values):
        raise DataError(f"{len(weights)} weights for {len(mf.values)} vertices")
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise WeightNormalizationError("Measure weights must be finite and non-negative")

    degree = degree or default_degree(basis)
    rule = quadrature_nodes(mf.manifold, degree, strategy)
    measure = hausdorff_measure(mf.manifold)

    if kind == "mass":
        total = weights.sum()
        points = mf.manifold.vertices
        mass = weights
        values = mf.values
    elif kind == "density":
        density = rule.interpolate(mf.with_values(weights))
        total = rule.integrate(density)
        points = rule.points
        mass = rule.weights * density
        values = rule.interpolate(mf)
    else:
        raise ValueError(f"Unknown measure kind '{kind}'")
    if abs(total - 1.0) > WEIGHT_TOLERANCE:
        raise WeightNormalizationError(f"Measure has total mass {total}, expected 1")

    shape = integrate_against_basis(basis, rule.points, {"shape": rule.weights})["shape"]
    blocks = integrate_against_basis(
        basis, points, {"measure": mass, "function": mass * values}
    )
    return EncodedVector(
        basis=basis,
        blocks={"shape": shape / measure, **blocks},
        normalization=Normalization.MEASURE_NORMALIZED,
        provenance=Provenance(method="quadrature", degree=degree, samples=len(points)),
    )


def encode_pointcloud(
    points,
    values,
    basis: BasisSpec,
    seed: Optional[int] = None,
) -> EncodedVector:
    """Monte Carlo blocks measure_m = mean phi_m(x_i), function_m = mean f_i phi_m(x_i).

    No shape block: a point cloud carries no Hausdorff measure estimate.
    """
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        raise EmptyInputError("Point cloud is empty")
    points = as_points(points, None if points.ndim == 2 else basis.d)
    values = np.asarray(values, dtype=float).ravel()
    if points.shape[1] != basis.d:
        raise DimensionMismatchError(
            f"Points live in d={points.shape[1]} but the basis has d={basis.d}"
        )
    if len(values) != len(points):
        raise DataError(f"{len(values)} values for {len(points)} points")
    mass = np.full(len(points), 1.0 / len(points))
    blocks = integrate_against_basis(
        basis, points, {"measure": mass, "function": mass * values}
    )
    return EncodedVector(
        basis=basis,
        blocks=blocks,
        normalization=Normalization.MEASURE_NORMALIZED,
        provenance=Provenance(
            method="monte-carlo", samples=len(points), seed=seed, shape_omitted=True
        ),
    )


def encode_sampled(
    mf: ManifoldFunction, basis: BasisSpec, count: int, seed: int
) -> EncodedVector:
    """Point-cloud encoding of `count` uniform samples drawn from M."""
    _check_compatible(mf, basis)
    rng = np.random.default_rng(seed)
    points, values = sample_points(mf, count, rng)
    return encode_pointcloud(points, values, basis, seed=seed)


def concat_blocks(encoded: EncodedVector, names: Sequence[str]) -> np.ndarray:
    """Flat feature vector of the named blocks in order."""
    return np.concatenate([encoded.block(name) for name in names])


def check_dataset_normalization(vectors: Sequence[EncodedVector]) -> Normalization:
    """Reject datasets mixing normalizations or bases; return the shared mode."""
    if not vectors:
        raise EmptyInputError("No encoded vectors")
    modes = {v.normalization for v in vectors}
    if len(modes) > 1:
        raise MixedNormalizationError(
            f"Dataset mixes normalizations {sorted(m.value for m in modes)}"
        )
    bases = {v.basis for v in vectors}
    if len(bases) > 1:
        raise DataError("Dataset mixes encodings from different bases")
    return modes.pop()
