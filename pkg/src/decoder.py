"""Decoding by dual pairing, and reconstruction fields for visualization."""

import weakref
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .basis import GramMatrix, basis_table, gram_hs, project_hs
from .errors import DataError, UnsupportedDimensionError
from .fields import ScalarField
from .models import EncodedVector


@dataclass
class DualRepresentation:
    """An encoded vector read as a functional through an H^s Gram matrix."""

    encoded: EncodedVector
    gram: GramMatrix
    points_per_axis: Optional[int] = None
    _coefficients: weakref.WeakKeyDictionary = field(
        default_factory=weakref.WeakKeyDictionary, repr=False
    )

    def __post_init__(self):
        if self.encoded.basis != self.gram.spec:
            raise DataError(
                f"Encoded basis {self.encoded.basis.to_dict()} does not match "
                f"Gram basis {self.gram.spec.to_dict()}"
            )

    @property
    def s(self) -> int:
        return self.gram.s

    def projection(self, phi: ScalarField) -> np.ndarray:
        """H^s projection coefficients of phi, cached while the field is alive."""
        coeffs = self._coefficients.get(phi)
        if coeffs is None:
            coeffs = project_hs(self.encoded.basis, self.gram, phi, self.points_per_axis)
            self._coefficients[phi] = coeffs
        return coeffs


def dual_representation(
    encoded: EncodedVector, s: Optional[int] = None, gram: Optional[GramMatrix] = None
) -> DualRepresentation:
    """Pair an encoded vector with its Gram matrix (built when not given)."""
    gram = gram or gram_hs(encoded.basis, s)
    return DualRepresentation(encoded=encoded, gram=gram)


def pair(dual: DualRepresentation, block: str, phi: ScalarField) -> float:
    """<P_n(M, f), phi> = Phi_block . c with c the H^s projection of phi."""
    values = dual.encoded.block(block)
    return float(values @ dual.projection(phi))


def reconstruction_error(
    dual: DualRepresentation, block: str, phi: ScalarField, reference: float
) -> float:
    """|pair - reference| for an independently computed reference pairing."""
    return abs(pair(dual, block, phi) - reference)


def grid_axis(resolution: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, resolution)


def grid_points(
    d: int,
    resolution: int,
    slice_axis: Optional[int] = None,
    slice_value: float = 0.5,
) -> np.ndarray:
    """Uniform grid over [0, 1]^d in C order; d = 3 needs a slice."""
    ticks = grid_axis(resolution)
    if d == 3:
        if slice_axis is None:
            raise UnsupportedDimensionError(
                "Full 3-d grids are not produced; choose a slice axis"
            )
        free = [j for j in range(3) if j != slice_axis]
        a, b = np.meshgrid(ticks, ticks, indexing="ij")
        points = np.empty((a.size, 3))
        points[:, free[0]] = a.ravel()
        points[:, free[1]] = b.ravel()
        points[:, slice_axis] = slice_value
        return points
    mesh = np.meshgrid(*([ticks] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def reconstruct_field(
    encoded: EncodedVector,
    block: str,
    resolution: int,
    premultiply: bool = False,
    s: Optional[int] = None,
    gram: Optional[GramMatrix] = None,
    slice_axis: Optional[int] = None,
    slice_value: float = 0.5,
) -> np.ndarray:
    """r(x) = sum_m Phi_block[m] phi_m(x) on a uniform grid.

    With `premultiply` the coefficients are G^{-1} Phi_block, the dual-basis
    representative for s > 0. Returns shape (resolution,) for d = 1 and
    (resolution, resolution) otherwise (rows follow the first free axis).
    """
    if resolution < 2:
        raise DataError(f"Grid resolution must be >= 2, got {resolution}")
    spec = encoded.basis
    coeffs = encoded.block(block)
    if premultiply:
        gram = gram or gram_hs(spec, s)
        coeffs = gram.solve(coeffs)
    points = grid_points(spec.d, resolution, slice_axis, slice_value)
    values = np.zeros(len(points))
    for start in range(0, len(points), 4096):
        values[start : start + 4096] = basis_table(spec, points[start : start + 4096]) @ coeffs
    if spec.d == 1:
        return values
    return values.reshape(resolution, resolution)


def visual_transform(grid) -> np.ndarray:
    """Entrywise log(max(1, value))."""
    return np.log(np.maximum(1.0, np.asarray(grid, dtype=float)))


def normalize_grid(grid) -> np.ndarray:
    """Scale so the largest magnitude is 1 (zero grids stay zero)."""
    grid = np.asarray(grid, dtype=float)
    peak = np.max(np.abs(grid)) if grid.size else 0.0
    return grid / peak if peak > 0 else grid.copy()
