"""Tensor-product bases on V = [0, 1]^d, H^s Gram matrices and projections."""

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .base_family import BasisFamily1D, MAX_DERIVATIVE_ORDER, gauss_legendre_unit
from .errors import (
    IndexOutOfRangeError,
    InvalidOrderError,
    NonSPDError,
    PointOutOfDomainError,
    SolverFailureError,
    UnsupportedDimensionError,
    UnsupportedOrderError,
)
from .fields import ScalarField, as_points, field_derivative
from .registry import get_family

MAX_DIMENSION = 3
# Points may sit this far outside [0, 1] and still count as inside
DOMAIN_TOLERANCE = 1e-12


class Family(str, Enum):
    LEGENDRE = "legendre"
    FOURIER = "fourier"


@dataclass(frozen=True)
class BasisSpec:
    """A tensor basis: family, per-axis order n and ambient dimension d."""

    family: Family
    n: int
    d: int

    @property
    def family_impl(self) -> BasisFamily1D:
        return get_family(self.family.value)

    @property
    def per_axis(self) -> int:
        return self.family_impl.size(self.n)

    @property
    def kappa(self) -> int:
        return self.per_axis**self.d

    @property
    def periodic(self) -> bool:
        return self.family_impl.periodic

    def multi_index(self, m: int) -> tuple:
        """Flat index -> per-axis indices (lexicographic, last axis fastest)."""
        self.check_index(m)
        return tuple(int(i) for i in np.unravel_index(m, (self.per_axis,) * self.d))

    def flat_index(self, multi: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(multi), (self.per_axis,) * self.d))

    def check_index(self, m: int) -> None:
        if not 0 <= m < self.kappa:
            raise IndexOutOfRangeError(f"Basis index {m} outside [0, {self.kappa})")

    def to_dict(self) -> dict:
        return {"family": self.family.value, "n": self.n, "d": self.d}

    @classmethod
    def from_dict(cls, data: dict) -> "BasisSpec":
        return make_basis(data["family"], data["n"], data["d"])


def make_basis(family, n: int, d: int) -> BasisSpec:
    """Build a BasisSpec, validating order and dimension."""
    if n < 1:
        raise InvalidOrderError(f"Basis order must be >= 1, got {n}")
    if d < 1 or d > MAX_DIMENSION:
        raise UnsupportedDimensionError(
            f"Ambient dimension {d} unsupported (1 <= d <= {MAX_DIMENSION})"
        )
    return BasisSpec(family=Family(family), n=int(n), d=int(d))


def default_sobolev_order(d: int) -> int:
    """Smallest integer s with s > d / 2."""
    return d // 2 + 1


def check_points(spec: BasisSpec, points: np.ndarray) -> np.ndarray:
    points = as_points(points, spec.d)
    if np.any(points < -DOMAIN_TOLERANCE) or np.any(points > 1.0 + DOMAIN_TOLERANCE):
        raise PointOutOfDomainError("Evaluation point outside [0, 1]^d")
    return points


def axis_tables(spec: BasisSpec, points: np.ndarray, order: int = 0) -> list:
    """Per-axis 1-d tables, each of shape (order + 1, per_axis, N)."""
    impl = spec.family_impl
    return [impl.table(spec.n, points[:, j], order) for j in range(spec.d)]


def _tensor_rows(factors: list) -> np.ndarray:
    """Combine per-axis (N, per_axis) factors into (N, kappa) rows."""
    rows = factors[0]
    for factor in factors[1:]:
        rows = (rows[:, :, None] * factor[:, None, :]).reshape(len(rows), -1)
    return rows


def basis_table(
    spec: BasisSpec, points, alpha: Optional[Sequence[int]] = None
) -> np.ndarray:
    """All basis members (or their mixed partial d^alpha) at many points: (N, kappa)."""
    points = check_points(spec, points)
    alpha = tuple(alpha) if alpha is not None else (0,) * spec.d
    if any(a < 0 for a in alpha) or sum(alpha) > MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(f"Unsupported derivative multi-order {alpha}")
    tables = axis_tables(spec, points, max(alpha))
    return _tensor_rows([tables[j][alpha[j]].T for j in range(spec.d)])


def eval_basis(spec: BasisSpec, m: int, x) -> float:
    """phi_{n,m}(x) for a single point."""
    spec.check_index(m)
    return float(basis_table(spec, x)[0, m])


def eval_basis_deriv(spec: BasisSpec, m: int, x, alpha: Sequence[int]) -> float:
    """Mixed partial d^alpha phi_{n,m}(x) for a single point."""
    spec.check_index(m)
    if len(alpha) != spec.d:
        raise UnsupportedOrderError(f"Multi-order {tuple(alpha)} needs {spec.d} entries")
    return float(basis_table(spec, x, alpha)[0, m])


def multi_orders(d: int, s: int) -> list:
    """All multi-orders alpha with |alpha| <= s, sorted."""
    return sorted(
        alpha
        for alpha in itertools.product(range(s + 1), repeat=d)
        if sum(alpha) <= s
    )


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """H^s Gram matrix of a basis plus its Cholesky factorization."""

    spec: BasisSpec
    s: int
    matrix: np.ndarray
    factor: tuple = field(repr=False)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        try:
            return cho_solve(self.factor, rhs)
        except (LinAlgError, ValueError) as e:
            raise SolverFailureError(f"Gram solve failed: {e}") from e

    @property
    def inverse(self) -> np.ndarray:
        """G^{-1}; its rows are the dual coefficients of the basis."""
        return self.solve(np.eye(len(self.matrix)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix)[0])


def gram_from_matrix(spec: BasisSpec, s: int, matrix: np.ndarray) -> GramMatrix:
    """Factorize an assembled (or cached) Gram matrix."""
    matrix = np.asarray(matrix, dtype=float)
    try:
        factor = cho_factor(matrix, lower=True)
    except LinAlgError as e:
        raise NonSPDError(f"H^{s} Gram matrix is not positive definite: {e}") from e
    matrix.setflags(write=False)
    return GramMatrix(spec=spec, s=s, matrix=matrix, factor=factor)


def gram_hs(spec: BasisSpec, s: Optional[int] = None) -> GramMatrix:
    """G_ml = sum_{|alpha| <= s} integral over V of d^alpha phi_m * d^alpha phi_l.

    The tensor structure gives G = sum_alpha kron_j G1[alpha_j] with the 1-d
    derivative Gram matrices G1 of the family.
    """
    s = default_sobolev_order(spec.d) if s is None else s
    if s < 0 or s > MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(f"Sobolev order {s} outside [0, {MAX_DERIVATIVE_ORDER}]")
    impl = spec.family_impl
    one_d = [impl.derivative_gram(spec.n, a) for a in range(s + 1)]

    matrix = np.zeros((spec.kappa, spec.kappa))
    for alpha in multi_orders(spec.d, s):
        term = one_d[alpha[0]]
        for a in alpha[1:]:
            term = np.kron(term, one_d[a])
        matrix += term
    return gram_from_matrix(spec, s, 0.5 * (matrix + matrix.T))


def projection_points(spec: BasisSpec, s: int) -> int:
    """Default Gauss points per axis for the projection right-hand side.

    Fourier modes oscillate, so periodic families get about twice as many.
    """
    if spec.periodic:
        return 4 * spec.n + 2 * s + 16
    return 2 * spec.n + 2 * s + 8


def tensor_grid(
    d: int, points_per_axis: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre grid on [0, 1]^d (C order), 1-d nodes and weights."""
    nodes, weights = gauss_legendre_unit(points_per_axis)
    mesh = np.meshgrid(*([nodes] * d), indexing="ij")
    grid = np.stack([axis.ravel() for axis in mesh], axis=1)
    return grid, nodes, weights


def hs_load_vector(
    spec: BasisSpec,
    s: int,
    phi: ScalarField,
    points_per_axis: Optional[int] = None,
) -> np.ndarray:
    """b_m = <phi, phi_m>_{H^s} by tensor Gauss quadrature."""
    q = points_per_axis or projection_points(spec, s)
    grid, nodes, weights = tensor_grid(spec.d, q)
    impl = spec.family_impl
    table = impl.table(spec.n, nodes, s)  # shared by every axis

    load = np.zeros((spec.per_axis,) * spec.d)
    for alpha in multi_orders(spec.d, s):
        values = field_derivative(phi, grid, alpha).reshape((q,) * spec.d)
        for a in alpha:
            weighted = table[a].T * weights[:, None]  # (q, per_axis)
            values = np.tensordot(values, weighted, axes=([0], [0]))
        load += values
    return load.ravel()


def project_hs(
    spec: BasisSpec,
    gram: GramMatrix,
    phi: ScalarField,
    points_per_axis: Optional[int] = None,
) -> np.ndarray:
    """Coefficients c of the H^s-orthogonal projection: G c = b."""
    load = hs_load_vector(spec, gram.s, phi, points_per_axis)
    coeffs = gram.solve(load)
    if not np.all(np.isfinite(coeffs)):
        raise SolverFailureError("Projection produced non-finite coefficients")
    return coeffs


def evaluate_expansion(spec: BasisSpec, coeffs: np.ndarray, points) -> np.ndarray:
    """sum_m c_m phi_{n,m}(x) at many points."""
    return basis_table(spec, points) @ coeffs


def projection_residual(
    spec: BasisSpec, coeffs: np.ndarray, phi: ScalarField, points
) -> float:
    """max |phi - sum_m c_m phi_m| over the given sample points."""
    points = check_points(spec, points)
    return float(np.max(np.abs(phi.evaluate(points) - evaluate_expansion(spec, coeffs, points))))


class BasisMember(ScalarField):
    """phi_{n,m} as a field, with exact derivatives."""

    def __init__(self, spec: BasisSpec, m: int):
        spec.check_index(m)
        self.spec = spec
        self.m = m
        self.name = f"basis:{m}"

    def evaluate(self, points):
        return basis_table(self.spec, points)[:, self.m]

    def derivative(self, points, alpha):
        return basis_table(self.spec, points, alpha)[:, self.m]


class Expansion(ScalarField):
    """sum_m c_m phi_{n,m} as a field."""

    name = "expansion"

    def __init__(self, spec: BasisSpec, coeffs: np.ndarray):
        self.spec = spec
        self.coeffs = np.asarray(coeffs, dtype=float)

    def evaluate(self, points):
        return basis_table(self.spec, points) @ self.coeffs

    def derivative(self, points, alpha):
        return basis_table(self.spec, points, alpha) @ self.coeffs
