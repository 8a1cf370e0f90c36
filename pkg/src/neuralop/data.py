"""Operator-learning datasets and the analytic 1-d Poisson generator."""

from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..basis import make_basis
from ..encoder import encode
from ..errors import DataError, EmptyInputError
from ..geometry import ManifoldFunction
from ..meshes import interval, point_set

# Query grid per sample for the Poisson problems
QUERY_COUNT = 64
MIN_LENGTH = 0.2
LOWER, UPPER = 0.05, 0.95


@dataclass
class OperatorDataset:
    """Encoded inputs, query points, targets and L^2 loss weights per sample."""

    branch_inputs: List[np.ndarray]  # one (S, width_i) array per branch
    queries: np.ndarray  # (S, Q, dq)
    targets: np.ndarray  # (S, Q)
    weights: np.ndarray  # (S, Q)
    metadata: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        self.branch_inputs = [np.asarray(x, dtype=float) for x in self.branch_inputs]
        self.queries = np.asarray(self.queries, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        count = len(self.targets)
        if self.queries.ndim != 3:
            raise DataError("Queries must have shape (samples, points, dim)")
        if self.targets.shape != self.queries.shape[:2] or self.weights.shape != self.targets.shape:
            raise DataError("Query, target and weight counts disagree")
        if any(len(x) != count for x in self.branch_inputs):
            raise DataError("Every branch input needs one row per sample")
        if np.any(self.weights < 0):
            raise DataError("Loss weights must be non-negative")

    def __len__(self) -> int:
        return len(self.targets)

    @property
    def branch_widths(self) -> List[int]:
        return [x.shape[1] for x in self.branch_inputs]

    def subset(self, indices: Sequence[int]) -> "OperatorDataset":
        indices = np.asarray(indices, dtype=np.int64)
        return OperatorDataset(
            branch_inputs=[x[indices] for x in self.branch_inputs],
            queries=self.queries[indices],
            targets=self.targets[indices],
            weights=self.weights[indices],
            metadata=dict(self.metadata),
        )


def split_dataset(
    dataset: OperatorDataset, n_train: int, seed: int
) -> Tuple[OperatorDataset, OperatorDataset]:
    """Random train/test split of a dataset."""
    if not 0 < n_train < len(dataset):
        raise DataError(f"Cannot take {n_train} training samples out of {len(dataset)}")
    order = np.random.default_rng(seed).permutation(len(dataset))
    return dataset.subset(np.sort(order[:n_train])), dataset.subset(np.sort(order[n_train:]))


def poisson_solution(x, a: float, b: float, c: float, ga: float = 0.0, gb: float = 0.0):
    """Solution of -u'' = c on [a, b] with u(a) = ga, u(b) = gb, zero outside."""
    x = np.asarray(x, dtype=float)
    inside = (x >= a) & (x <= b)
    u = c * (x - a) * (b - x) / 2.0 + ga + (gb - ga) * (x - a) / (b - a)
    return np.where(inside, u, 0.0)


def query_grid(count: int = QUERY_COUNT) -> np.ndarray:
    """Cell midpoints of a uniform partition of [0, 1]."""
    return (np.arange(count) + 0.5) / count


def gen_poisson1d_dataset(
    count: int, n: int, seed: int, boundary: bool = False, queries: int = QUERY_COUNT
) -> OperatorDataset:
    """Samples of the solution operator of -u'' = c on random intervals [a, b].

    Branch 0 sees the shape encoding of [a, b]; branch 1 sees the function
    encoding of the constant source c and, with `boundary`, that of the
    Dirichlet data on {a, b}. Targets are zero-extended to [0, 1] and the loss
    weights vanish outside [a, b].
    """
    if count < 1:
        raise EmptyInputError("Dataset needs at least one sample")
    rng = np.random.default_rng(seed)
    basis = make_basis("legendre", n, 1)
    x = query_grid(queries)

    shapes, sources, targets, weights = [], [], [], []
    for _ in range(count):
        a = rng.uniform(LOWER, UPPER - MIN_LENGTH)
        b = rng.uniform(a + MIN_LENGTH, UPPER)
        c = rng.uniform(-1.0, 1.0)
        mesh = interval(a, b)
        encoded = encode(ManifoldFunction.constant(mesh, c), basis)
        source = encoded.function
        ga = gb = 0.0
        if boundary:
            ga, gb = rng.uniform(-0.1, 0.1, size=2)
            ends = point_set([[a], [b]])
            source = np.concatenate(
                [source, encode(ManifoldFunction(ends, [ga, gb]), basis).function]
            )
        shapes.append(encoded.shape)
        sources.append(source)
        targets.append(poisson_solution(x, a, b, c, ga, gb))
        weights.append(np.where((x >= a) & (x <= b), 1.0 / queries, 0.0))

    return OperatorDataset(
        branch_inputs=[np.array(shapes), np.array(sources)],
        queries=np.broadcast_to(x[None, :, None], (count, queries, 1)).copy(),
        targets=np.array(targets),
        weights=np.array(weights),
        metadata={
            "generator": "poisson1d-boundary" if boundary else "poisson1d",
            "seed": seed,
            "basis": basis.to_dict(),
            "linear_branches": [False, True],
        },
    )
