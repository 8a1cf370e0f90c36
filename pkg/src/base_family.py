"""Base class for one-dimensional basis families on [0, 1]."""

from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import QuadratureDegreeError, UnsupportedOrderError

# Highest derivative order the families evaluate analytically
MAX_DERIVATIVE_ORDER = 4


def gauss_legendre_unit(points: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped from [-1, 1] to [0, 1]."""
    nodes, weights = leggauss(points)
    return 0.5 * (nodes + 1.0), 0.5 * weights


class BasisFamily1D:
    """One axis of a tensor-product basis. Override in subclasses.

    Tensor bases are built from `size(n)` functions per axis; the flat index of
    a tensor member is the lexicographic (C-order) index of its per-axis indices.
    """

    family_name: str = "unknown"
    periodic: bool = False

    def size(self, n: int) -> int:
        """Number of 1-d functions per axis at order n."""
        raise NotImplementedError

    def table(self, n: int, x: np.ndarray, order: int = 0) -> np.ndarray:
        """Values of all 1-d functions and their derivatives.

        Returns an array of shape (order + 1, size(n), len(x)); entry [a, i, p]
        is the a-th derivative of function i at x[p].
        """
        raise NotImplementedError

    def wavenumbers(self, n: int) -> np.ndarray:
        """Per-function frequency / polynomial degree, used for reporting."""
        return np.arange(self.size(n))

    def check_order(self, order: int) -> None:
        if order < 0 or order > MAX_DERIVATIVE_ORDER:
            raise UnsupportedOrderError(
                f"Derivative order {order} outside supported range "
                f"[0, {MAX_DERIVATIVE_ORDER}]"
            )

    def gram_points(self, n: int, order: int) -> int:
        """Gauss points per axis for assembling derivative Gram matrices."""
        return -(-(2 * n + 2 * order) // 2) + 2

    def derivative_gram(self, n: int, order: int) -> np.ndarray:
        """Matrix of integrals over [0, 1] of D^a(phi_i) * D^a(phi_j), a = order.

        The default assembles it with Gauss-Legendre quadrature; families with a
        closed form override it.
        """
        return self.quadrature_gram(n, order)

    def quadrature_gram(
        self, n: int, order: int, points: Optional[int] = None
    ) -> np.ndarray:
        self.check_order(order)
        q = points or self.gram_points(n, order)
        if not self.periodic and 2 * q - 1 < 2 * (n - 1):
            raise QuadratureDegreeError(
                f"{q} Gauss points cannot integrate degree {2 * (n - 1)} exactly"
            )
        nodes, weights = gauss_legendre_unit(q)
        values = self.table(n, nodes, order)[order]
        gram = (values * weights) @ values.T
        return 0.5 * (gram + gram.T)
