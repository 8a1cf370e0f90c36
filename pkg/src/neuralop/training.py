"""Training loop, evaluation and gradient checking for MIONets."""

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..config import NetworkConfig, OptimizerConfig, TrainConfig
from ..errors import AllTargetsDegenerateError, DivergenceError
from .data import OperatorDataset
from .network import MIONet, build_mionet
from .optim import AdamState, adam_step, learning_rate

# Samples whose target norm falls below this are left out of relative errors
DEGENERATE_TARGET = 1e-12


@dataclass
class TrainResult:
    net: MIONet
    losses: List[float] = field(default_factory=list)
    iterations: int = 0


def _batch_gradient(net: MIONet, data: OperatorDataset, mode: str, workers: int):
    if mode == "deterministic" or workers <= 1 or len(data) < 2 * workers:
        return net.loss_and_gradient(data.branch_inputs, data.queries, data.targets, data.weights)

    # Each chunk's loss is scaled by its share of the batch before summing
    chunks = np.array_split(np.arange(len(data)), workers)
    loss = 0.0
    grads = None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            pool.submit(
                net.loss_and_gradient,
                [x[idx] for x in data.branch_inputs],
                data.queries[idx],
                data.targets[idx],
                data.weights[idx],
            ): len(idx)
            for idx in chunks
        }
        for future in as_completed(futures):
            share = futures[future] / len(data)
            part_loss, part_grads = future.result()
            loss += share * part_loss
            if grads is None:
                grads = [share * g for g in part_grads]
            else:
                for g, part in zip(grads, part_grads):
                    g += share * part
    return loss, grads


def train(
    dataset: OperatorDataset,
    network: NetworkConfig,
    optimizer: OptimizerConfig,
    config: TrainConfig,
    seed: int,
    workers: int = 1,
    net: Optional[MIONet] = None,
    verbose: bool = False,
) -> TrainResult:
    """Minimize the mean weighted squared error with Adam on random minibatches.

    Deterministic given the seed in 'deterministic' mode; 'fast' mode splits
    each minibatch over worker threads and sums in completion order.
    """
    init_seq, batch_seq = np.random.SeedSequence(seed).spawn(2)
    if net is None:
        linear = dataset.metadata.get("linear_branches") or [False] * len(dataset.branch_widths)
        if not network.linear_source_branch:
            linear = [False] * len(linear)
        net = build_mionet(
            dataset.branch_widths,
            linear,
            dataset.queries.shape[2],
            network,
            seed=int(init_seq.generate_state(1)[0]),
        )
        net.metadata["seed"] = seed
    rng = np.random.default_rng(batch_seq)
    params = net.parameters()
    state = AdamState.zeros_like(params)
    batch_size = min(config.batch_size, len(dataset))

    result = TrainResult(net=net)
    for it in range(config.iterations):
        batch = dataset.subset(rng.choice(len(dataset), size=batch_size, replace=False))
        loss, grads = _batch_gradient(net, batch, config.mode, workers)
        if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads):
            raise DivergenceError(f"Loss became non-finite at iteration {it}")
        lr = learning_rate(optimizer.lr, it, optimizer.decay_every, optimizer.decay_rate)
        params, state = adam_step(
            params, grads, state, lr, optimizer.beta1, optimizer.beta2, optimizer.eps
        )
        net = net.load_parameters(params)
        result.losses.append(loss)
        if verbose and (it + 1) % config.log_interval == 0:
            print(f"  → iteration {it + 1}: loss {loss:.4e} (lr {lr:.1e})")

    result.net = net
    result.iterations = config.iterations
    return result


@dataclass
class EvaluationResult:
    per_sample: np.ndarray  # NaN where excluded
    mean: float
    excluded: int


def weighted_norm(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Per-sample sqrt(sum_q w_q |v_q|^2)."""
    sq = values**2 if values.ndim == 2 else (values**2).sum(axis=-1)
    return np.sqrt((weights * sq).sum(axis=1))


def evaluate_relative_l2(
    net: MIONet, dataset: OperatorDataset, predictions: Optional[np.ndarray] = None
) -> EvaluationResult:
    """Mean over samples of ||pred - target||_w / ||target||_w."""
    if predictions is None:
        predictions = net.predict(dataset.branch_inputs, dataset.queries)
    target_norm = weighted_norm(dataset.targets, dataset.weights)
    error_norm = weighted_norm(predictions - dataset.targets, dataset.weights)
    valid = target_norm >= DEGENERATE_TARGET
    if not valid.any():
        raise AllTargetsDegenerateError("Every target has (near) zero norm")
    per_sample = np.full(len(dataset), np.nan)
    per_sample[valid] = error_norm[valid] / target_norm[valid]
    return EvaluationResult(
        per_sample=per_sample,
        mean=float(np.mean(per_sample[valid])),
        excluded=int((~valid).sum()),
    )


def gradient_check(
    net: MIONet,
    batch: OperatorDataset,
    step: float = 1e-5,
    max_entries: Optional[int] = None,
    seed: int = 0,
) -> float:
    """Max deviation between reverse-mode and central-difference gradients.

    Deviations are relative to the largest gradient entry. With `max_entries`
    only a random subset of entries is perturbed.
    """

    def loss_of(params):
        return net.load_parameters(params).loss_and_gradient(
            batch.branch_inputs, batch.queries, batch.targets, batch.weights
        )[0]

    params = [p.copy() for p in net.parameters()]
    _, grads = net.loss_and_gradient(batch.branch_inputs, batch.queries, batch.targets, batch.weights)
    positions = [(i, j) for i, p in enumerate(params) for j in range(p.size)]
    if max_entries is not None and max_entries < len(positions):
        rng = np.random.default_rng(seed)
        picks = rng.choice(len(positions), size=max_entries, replace=False)
        positions = [positions[k] for k in sorted(picks)]

    scale = max(max(float(np.max(np.abs(g))) for g in grads), 1e-12)
    worst = 0.0
    for i, j in positions:
        original = params[i].flat[j]
        params[i].flat[j] = original + step
        upper = loss_of(params)
        params[i].flat[j] = original - step
        lower = loss_of(params)
        params[i].flat[j] = original
        numeric = (upper - lower) / (2.0 * step)
        worst = max(worst, abs(numeric - grads[i].flat[j]) / scale)
    return worst
