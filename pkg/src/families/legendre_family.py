"""Shifted, L2-orthonormal Legendre polynomials on [0, 1]."""

import numpy as np

from ..base_family import BasisFamily1D


def legendre_with_derivatives(count: int, t: np.ndarray, order: int) -> np.ndarray:
    """P_i^(a)(t) for i < count, a <= order, by the three-term recurrence.

    Derivatives use P_i^(a) = P_{i-2}^(a) + (2i - 1) P_{i-1}^(a-1).
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros((order + 1, count, t.size))
    out[0, 0] = 1.0
    if count > 1:
        out[0, 1] = t
        if order >= 1:
            out[1, 1] = 1.0
    for i in range(2, count):
        out[0, i] = ((2 * i - 1) * t * out[0, i - 1] - (i - 1) * out[0, i - 2]) / i
        for a in range(1, order + 1):
            out[a, i] = out[a, i - 2] + (2 * i - 1) * out[a - 1, i - 1]
    return out


class LegendreFamily(BasisFamily1D):
    """l_i(x) = sqrt(2i + 1) * P_i(2x - 1), orthonormal in L2([0, 1])."""

    family_name = "legendre"
    periodic = False

    def size(self, n: int) -> int:
        return n

    def table(self, n: int, x: np.ndarray, order: int = 0) -> np.ndarray:
        self.check_order(order)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        raw = legendre_with_derivatives(n, 2.0 * x - 1.0, order)
        norms = np.sqrt(2.0 * np.arange(n) + 1.0)
        # chain rule for t = 2x - 1
        chain = 2.0 ** np.arange(order + 1)
        return raw * norms[None, :, None] * chain[:, None, None]
