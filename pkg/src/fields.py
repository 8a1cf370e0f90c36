"""Scalar fields on [0, 1]^d used as test functions and integrands."""

import math
from typing import Callable, Optional, Sequence

import numpy as np

# Central-difference step per total derivative order
FD_STEPS = {1: 1e-5, 2: 1e-4, 3: 1e-3, 4: 1e-3}


def as_points(x, d: Optional[int] = None) -> np.ndarray:
    """Coerce a point or a list of points to an (N, d) float array."""
    points = np.asarray(x, dtype=float)
    if points.ndim == 0:
        points = points.reshape(1, 1)
    elif points.ndim == 1:
        points = points.reshape(1, -1) if d is None or points.size == d else points[:, None]
    if d is not None and points.shape[1] != d:
        raise ValueError(f"Expected points of dimension {d}, got {points.shape[1]}")
    return points


class ScalarField:
    """A deterministic real function of x in [0, 1]^d.

    Subclasses implement `evaluate`; `derivative` is optional and signals its
    absence with NotImplementedError, in which case callers fall back to
    `finite_difference`.
    """

    name: str = "field"

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def derivative(self, points: np.ndarray, alpha: Sequence[int]) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(as_points(x))


def finite_difference(
    field: ScalarField, points: np.ndarray, alpha: Sequence[int]
) -> np.ndarray:
    """Mixed partial derivative by nested central differences."""
    alpha = tuple(int(a) for a in alpha)
    order = sum(alpha)
    if order == 0:
        return field.evaluate(points)
    h = FD_STEPS[min(order, max(FD_STEPS))]
    axis = next(j for j, a in enumerate(alpha) if a > 0)
    lower = list(alpha)
    lower[axis] -= 1

    step = np.zeros(points.shape[1])
    step[axis] = h
    forward = finite_difference(field, points + step, lower)
    backward = finite_difference(field, points - step, lower)
    return (forward - backward) / (2.0 * h)


def field_derivative(
    field: ScalarField, points: np.ndarray, alpha: Sequence[int]
) -> np.ndarray:
    """Analytic derivative when the field provides one, else finite differences."""
    if sum(alpha) == 0:
        return field.evaluate(points)
    try:
        return field.derivative(points, alpha)
    except NotImplementedError:
        return finite_difference(field, points, alpha)


class ConstantField(ScalarField):
    name = "constant"

    def __init__(self, value: float = 1.0):
        self.value = float(value)

    def evaluate(self, points):
        return np.full(len(points), self.value)

    def derivative(self, points, alpha):
        return np.zeros(len(points))


class CoordinateField(ScalarField):
    """x_j, the j-th coordinate function (0-based axis)."""

    def __init__(self, axis: int):
        self.axis = axis
        self.name = f"coord_{axis + 1}"

    def evaluate(self, points):
        return points[:, self.axis].copy()

    def derivative(self, points, alpha):
        unit = [0] * points.shape[1]
        unit[self.axis] = 1
        if list(alpha) == unit:
            return np.ones(len(points))
        return np.zeros(len(points))


class ExpSum(ScalarField):
    """exp(scale * (x_1 + ... + x_d)); entire, so every rate is observable."""

    name = "expsum"

    def __init__(self, scale: float = 1.0):
        self.scale = scale

    def evaluate(self, points):
        return np.exp(self.scale * points.sum(axis=1))

    def derivative(self, points, alpha):
        return self.scale ** sum(alpha) * self.evaluate(points)


class PolynomialField(ScalarField):
    """((x_1 + ... + x_d) / d)^k."""

    def __init__(self, degree: int):
        self.degree = degree
        self.name = f"poly:{degree}"

    def evaluate(self, points):
        mean = points.mean(axis=1)
        return mean**self.degree

    def derivative(self, points, alpha):
        order = sum(alpha)
        if order > self.degree:
            return np.zeros(len(points))
        d = points.shape[1]
        factor = math.factorial(self.degree) / math.factorial(self.degree - order)
        return factor * d ** (-order) * points.mean(axis=1) ** (self.degree - order)


class RungeField(ScalarField):
    """1 / (1 + 25 |x - c|^2): analytic but with nearby complex poles."""

    name = "runge"

    def __init__(self, center: Optional[Sequence[float]] = None):
        self.center = None if center is None else np.asarray(center, dtype=float)

    def evaluate(self, points):
        center = 0.5 if self.center is None else self.center
        r2 = ((points - center) ** 2).sum(axis=1)
        return 1.0 / (1.0 + 25.0 * r2)


class PeriodicField(ScalarField):
    """prod_j exp(sin(2 pi x_j + j)): smooth and 1-periodic in every axis."""

    name = "periodic"

    def _factors(self, points):
        shifts = np.arange(points.shape[1])
        theta = 2.0 * np.pi * points + shifts
        return theta, np.exp(np.sin(theta))

    def evaluate(self, points):
        _, g = self._factors(points)
        return g.prod(axis=1)

    def derivative(self, points, alpha):
        if max(alpha) > 2:
            raise NotImplementedError
        theta, g = self._factors(points)
        w = 2.0 * np.pi
        result = np.ones(len(points))
        for j, a in enumerate(alpha):
            if a == 0:
                result *= g[:, j]
            elif a == 1:
                result *= w * np.cos(theta[:, j]) * g[:, j]
            else:
                result *= w**2 * (np.cos(theta[:, j]) ** 2 - np.sin(theta[:, j])) * g[:, j]
        return result


class BumpField(ScalarField):
    """exp(1 - 1 / (1 - u)) with u = |x - c|^2 / R^2, zero for u >= 1."""

    name = "bump"

    def __init__(self, center: Sequence[float], radius: float):
        self.center = np.asarray(center, dtype=float)
        self.radius = float(radius)

    def _profile(self, points):
        delta = points - self.center
        u = (delta**2).sum(axis=1) / self.radius**2
        inside = u < 1.0
        g = np.zeros(len(points))
        one_minus = np.where(inside, 1.0 - u, 1.0)
        g[inside] = np.exp(1.0 - 1.0 / one_minus[inside])
        return delta, inside, one_minus, g

    def evaluate(self, points):
        return self._profile(points)[3]

    def derivative(self, points, alpha):
        order = sum(alpha)
        if order > 2:
            raise NotImplementedError
        delta, inside, v, g = self._profile(points)
        r2 = self.radius**2
        g1 = np.where(inside, -g / v**2, 0.0)
        axes = [j for j, a in enumerate(alpha) for _ in range(a)]
        if order == 1:
            return g1 * 2.0 * delta[:, axes[0]] / r2
        g2 = np.where(inside, g * (1.0 / v**4 - 2.0 / v**3), 0.0)
        i, j = axes
        du_i = 2.0 * delta[:, i] / r2
        du_j = 2.0 * delta[:, j] / r2
        second = g2 * du_i * du_j
        if i == j:
            second = second + g1 * 2.0 / r2
        return second


class CallableField(ScalarField):
    """Wrap a vectorized callable (and optionally its derivative)."""

    def __init__(
        self,
        func: Callable[[np.ndarray], np.ndarray],
        derivative: Optional[Callable[[np.ndarray, tuple], np.ndarray]] = None,
        name: str = "callable",
    ):
        self.func = func
        self.derivative_func = derivative
        self.name = name

    def evaluate(self, points):
        return np.asarray(self.func(points), dtype=float)

    def derivative(self, points, alpha):
        if self.derivative_func is None:
            raise NotImplementedError
        return np.asarray(self.derivative_func(points, tuple(alpha)), dtype=float)


class LinearCombination(ScalarField):
    """sum_i c_i * f_i."""

    name = "combination"

    def __init__(self, fields: Sequence[ScalarField], coeffs: Sequence[float]):
        self.fields = list(fields)
        self.coeffs = [float(c) for c in coeffs]

    def evaluate(self, points):
        total = np.zeros(len(points))
        for c, f in zip(self.coeffs, self.fields):
            total += c * f.evaluate(points)
        return total

    def derivative(self, points, alpha):
        total = np.zeros(len(points))
        for c, f in zip(self.coeffs, self.fields):
            total += c * field_derivative(f, points, alpha)
        return total


def make_test_field(name: str, basis=None) -> ScalarField:
    """Build a field from its CLI name: expsum, runge, periodic, poly:k, basis:m."""
    if name == "expsum":
        return ExpSum()
    if name == "runge":
        return RungeField()
    if name == "periodic":
        return PeriodicField()
    if name.startswith("poly:"):
        return PolynomialField(int(name.split(":", 1)[1]))
    if name.startswith("basis:"):
        if basis is None:
            raise ValueError("basis:m test fields need a basis")
        from .basis import BasisMember

        return BasisMember(basis, int(name.split(":", 1)[1]))
    raise ValueError(f"Unknown test function '{name}'")
