"""Empirical convergence studies for the encoder/decoder pair."""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .basis import BasisSpec, GramMatrix, default_sobolev_order, gram_hs, make_basis
from .decoder import DualRepresentation, pair
from .encoder import (
    JointManifoldFunction,
    default_degree,
    encode,
    encode_joint,
    encode_measured,
    encode_sampled,
    uniform_density,
)
from .errors import AllErrorsAtFloorError, DataError, InsufficientPointsError
from .fields import ScalarField
from .geometry import ManifoldFunction, hausdorff_measure, quadrature_nodes
from .meshes import ball, point_set

# Errors at or below this are treated as exact and left out of rate fits
ERROR_FLOOR = 1e-13
# Oracle quadrature degrees are capped to keep tensor rules affordable
MAX_ORACLE_DEGREE = 80

GramProvider = Callable[[BasisSpec, int], GramMatrix]


def estimate_rate(errors: Sequence[float], ns: Sequence[float], floor: float = ERROR_FLOOR) -> float:
    """Least-squares slope of log(error) against log(n), floor entries excluded."""
    errors = np.asarray(errors, dtype=float)
    ns = np.asarray(ns, dtype=float)
    keep = errors > floor
    if keep.sum() < 3:
        raise InsufficientPointsError(
            f"Need at least 3 errors above {floor:g} to fit a rate, got {int(keep.sum())}"
        )
    slope, _ = np.polyfit(np.log(ns[keep]), np.log(errors[keep]), 1)
    return float(slope)


def error_envelope(errors: Sequence[float]) -> np.ndarray:
    """Running minimum: the best error seen up to each n."""
    return np.minimum.accumulate(np.asarray(errors, dtype=float))


def direct_pairing(
    mf: ManifoldFunction,
    phi: ScalarField,
    block: str = "function",
    degree: int = 20,
    normalized: bool = False,
) -> float:
    """int_M g phi dH^k by quadrature, with g = f_M ('function') or 1 ('shape')."""
    rule = quadrature_nodes(mf.manifold, degree)
    integrand = phi.evaluate(rule.points)
    if block == "function":
        integrand = integrand * rule.interpolate(mf)
    elif block != "shape":
        raise DataError(f"No direct pairing for block '{block}'")
    value = rule.integrate(integrand)
    return value / hausdorff_measure(mf.manifold) if normalized else value


def joint_direct_pairing(
    jmf: JointManifoldFunction, phi: ScalarField, block: str, degree: int
) -> float:
    return sum(
        direct_pairing(mf, phi, block, degree, normalized=True) for mf in jmf.components()
    )


@dataclass
class RateStudy:
    """Errors of the decoded pairing for each (test function, block) over n."""

    family: str
    s: int
    d: int
    ns: List[int]
    errors: Dict[Tuple[str, str], List[float]] = field(default_factory=dict)
    references: Dict[Tuple[str, str], float] = field(default_factory=dict)
    slopes: Dict[Tuple[str, str], Optional[float]] = field(default_factory=dict)
    floor: float = ERROR_FLOOR

    def rows(self) -> List[dict]:
        """One row per (n, block, test function) for the CSV rate table."""
        rows = []
        for (name, block), errs in self.errors.items():
            for n, err in zip(self.ns, errs):
                rows.append(
                    {
                        "n": n,
                        "N": 2 * n**self.d,
                        "block": block,
                        "test_fn": name,
                        "error": err,
                        "at_floor": err <= self.floor,
                    }
                )
        return rows

    def all_at_floor(self) -> bool:
        return all(err <= self.floor for errs in self.errors.values() for err in errs)


def convergence_study(
    mf: ManifoldFunction,
    family: str,
    s: Optional[int],
    test_functions: Dict[str, ScalarField],
    n_list: Sequence[int],
    blocks: Sequence[str] = ("shape", "function"),
    oracle_degree: Optional[int] = None,
    floor: float = ERROR_FLOOR,
    strict: bool = True,
    gram_provider: Optional[GramProvider] = None,
    verbose: bool = False,
) -> RateStudy:
    """err(n) = |<(M, f), phi> - pair(...)| for every test function and block.

    References come from direct quadrature at `oracle_degree` (default four
    times the largest study degree). With `strict`, a study whose errors all
    sit at the floor raises AllErrorsAtFloorError.
    """
    n_list = sorted(int(n) for n in n_list)
    if len(n_list) < 3 and strict:
        raise InsufficientPointsError("A rate study needs at least 3 orders")
    d = mf.d
    s = default_sobolev_order(d) if s is None else s
    gram_provider = gram_provider or gram_hs

    top = make_basis(family, n_list[-1], d)
    oracle_degree = oracle_degree or min(4 * default_degree(top), MAX_ORACLE_DEGREE)
    study = RateStudy(family=family, s=s, d=d, ns=n_list, floor=floor)
    for name, phi in test_functions.items():
        for block in blocks:
            study.references[(name, block)] = direct_pairing(mf, phi, block, oracle_degree)
            study.errors[(name, block)] = []

    for n in n_list:
        spec = make_basis(family, n, d)
        dual = DualRepresentation(encode(mf, spec), gram_provider(spec, s))
        for name, phi in test_functions.items():
            for block in blocks:
                err = abs(pair(dual, block, phi) - study.references[(name, block)])
                study.errors[(name, block)].append(err)
        if verbose:
            worst = max(errs[-1] for errs in study.errors.values())
            print(f"  → n={n}: max error {worst:.3e}")

    for key, errs in study.errors.items():
        try:
            study.slopes[key] = estimate_rate(errs, n_list, floor)
        except InsufficientPointsError:
            study.slopes[key] = None

    if strict and study.all_at_floor():
        raise AllErrorsAtFloorError(
            "Every error is at the floor; the test function lies in the span"
        )
    return study


def smoothness_rates(study: RateStudy, r_max: int = 6) -> Dict[Tuple[str, str], Dict[int, bool]]:
    """For each fitted slope, whether it is steeper than -(r - s) for r = s+1..r_max.

    A test function passing every r behaves super-algebraically over the
    studied range.
    """
    checks = {}
    for key, slope in study.slopes.items():
        checks[key] = {
            r: slope is not None and slope < -(r - study.s)
            for r in range(study.s + 1, r_max + 1)
        }
    return checks


@dataclass
class ConsistencyRow:
    radius: float
    deviation: float  # max over basis members, shape block
    function_deviation: Optional[float]
    per_member: np.ndarray


def consistency_check(
    x: Sequence[float],
    radii: Sequence[float],
    basis: BasisSpec,
    f: Optional[ScalarField] = None,
    resolution: int = 64,
) -> List[ConsistencyRow]:
    """Compare the encoding of the point x with that of shrinking balls B(x, r).

    deviation(r) = max_m |(1 / H^d(B)) int_B phi_m - phi_m(x)|; with f the
    function block is compared the same way.
    """
    x = np.asarray(x, dtype=float).ravel()
    if len(x) != basis.d:
        raise DataError(f"Point has {len(x)} coordinates, basis has d={basis.d}")
    point = point_set(x[None, :])
    point_mf = (
        ManifoldFunction.from_field(point, f) if f is not None else ManifoldFunction.constant(point, 0.0)
    )
    at_point = encode_joint(JointManifoldFunction(basis.d, {0: point_mf}), basis)

    rows = []
    for radius in radii:
        mesh = ball(x, radius, resolution)
        ball_mf = ManifoldFunction.from_field(mesh, f) if f is not None else ManifoldFunction.constant(mesh, 0.0)
        averaged = encode_joint(JointManifoldFunction(basis.d, {basis.d: ball_mf}), basis)
        per_member = np.abs(averaged.shape - at_point.shape)
        function_deviation = (
            float(np.max(np.abs(averaged.function - at_point.function))) if f is not None else None
        )
        rows.append(
            ConsistencyRow(
                radius=float(radius),
                deviation=float(per_member.max()),
                function_deviation=function_deviation,
                per_member=per_member,
            )
        )
    return rows


@dataclass
class MonteCarloStudy:
    sample_counts: List[int]
    rms_errors: List[float]
    block_errors: Dict[str, List[float]]
    slope: Optional[float]
    seeds: int


def mc_vs_quadrature(
    mf: ManifoldFunction,
    basis: BasisSpec,
    sample_counts: Sequence[int],
    seeds: int,
    base_seed: int = 0,
    floor: float = ERROR_FLOOR,
) -> MonteCarloStudy:
    """RMS over seeds of the max coefficient error of point-cloud encodings.

    The reference is the quadrature encoding under the uniform probability
    density on M; samples are drawn cell by cell proportional to measure.
    """
    reference = encode_measured(mf, uniform_density(mf), basis, kind="density")
    blocks = ("measure", "function")
    block_errors: Dict[str, List[float]] = {b: [] for b in blocks}
    rms = []
    for count in sample_counts:
        worst = np.zeros(seeds)
        per_block = {b: np.zeros(seeds) for b in blocks}
        for i in range(seeds):
            sampled = encode_sampled(mf, basis, int(count), seed=base_seed + i)
            for b in blocks:
                per_block[b][i] = np.max(np.abs(sampled.block(b) - reference.block(b)))
            worst[i] = max(per_block[b][i] for b in blocks)
        rms.append(float(np.sqrt(np.mean(worst**2))))
        for b in blocks:
            block_errors[b].append(float(np.sqrt(np.mean(per_block[b] ** 2))))
    try:
        slope = estimate_rate(rms, sample_counts, floor)
    except InsufficientPointsError:
        slope = None
    return MonteCarloStudy(
        sample_counts=[int(c) for c in sample_counts],
        rms_errors=rms,
        block_errors=block_errors,
        slope=slope,
        seeds=seeds,
    )


@dataclass
class LocalityRow:
    n: int
    block: str
    pairing: float


def locality_study(
    jmf: JointManifoldFunction,
    bump: ScalarField,
    n_list: Sequence[int],
    family: str = "legendre",
    s: int = 0,
    gram_provider: Optional[GramProvider] = None,
) -> List[LocalityRow]:
    """|<P_n(M, f), bump>| for a bump supported away from every component.

    The exact pairing is zero, so each value is the reconstruction error.
    Decoding defaults to L2 (s = 0).
    """
    gram_provider = gram_provider or gram_hs
    rows = []
    for n in n_list:
        spec = make_basis(family, n, jmf.d)
        dual = DualRepresentation(encode_joint(jmf, spec), gram_provider(spec, s))
        for block in ("shape", "function"):
            rows.append(LocalityRow(n=int(n), block=block, pairing=abs(pair(dual, block, bump))))
    return rows


def locality_setup(segments: int = 6, resolution: int = 64):
    """Polygon boundary plus a disk in the lower-left corner and a bump far away.

    The bump support stays more than 0.1 away from both components.
    """
    from .fields import BumpField, ExpSum
    from .meshes import disk, polygon_boundary, regular_polygon

    polygon = polygon_boundary(regular_polygon((0.15, 0.15), 0.08, segments), name="polygon")
    spot = disk((0.30, 0.06), 0.04, segments=resolution)
    values = ExpSum()
    jmf = JointManifoldFunction(
        d=2,
        entries={
            1: ManifoldFunction.from_field(polygon, values),
            2: ManifoldFunction.from_field(spot, values),
        },
    )
    return jmf, BumpField(center=(0.72, 0.72), radius=0.6)
