"""Real Fourier basis on the unit torus."""

import numpy as np

from ..base_family import BasisFamily1D


class FourierFamily(BasisFamily1D):
    """Unit-norm real Fourier modes with wavenumbers |k| <= n - 1.

    Per-axis index 0 is the constant; index 2k - 1 is sqrt(2) cos(2 pi k x) and
    index 2k is sqrt(2) sin(2 pi k x).
    """

    family_name = "fourier"
    periodic = True

    def size(self, n: int) -> int:
        return 2 * n - 1

    def wavenumbers(self, n: int) -> np.ndarray:
        index = np.arange(self.size(n))
        return (index + 1) // 2

    def table(self, n: int, x: np.ndarray, order: int = 0) -> np.ndarray:
        self.check_order(order)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros((order + 1, self.size(n), x.size))
        out[0, 0] = 1.0
        for k in range(1, n):
            omega = 2.0 * np.pi * k
            phase = omega * x
            for a in range(order + 1):
                scale = np.sqrt(2.0) * omega**a
                shift = 0.5 * np.pi * a
                out[a, 2 * k - 1] = scale * np.cos(phase + shift)
                out[a, 2 * k] = scale * np.sin(phase + shift)
        return out

    def derivative_gram(self, n: int, order: int) -> np.ndarray:
        """Closed form: diagonal with entries (2 pi k)^(2a)."""
        self.check_order(order)
        k = self.wavenumbers(n).astype(float)
        diagonal = (2.0 * np.pi * k) ** (2 * order)
        if order == 0:
            diagonal[:] = 1.0
        return np.diag(diagonal)
