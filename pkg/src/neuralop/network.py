"""Dense networks and the MIONet composition, with reverse-mode gradients."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..config import NetworkConfig
from ..errors import DataError, WidthMismatchError

ACTIVATIONS = ("tanh", "relu")


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


@dataclass
class MLP:
    """Fully connected network: activation on hidden layers, linear output.

    A network without biases and without hidden layers is a plain matrix.
    """

    weights: List[np.ndarray]
    biases: List[Optional[np.ndarray]]
    activation: str = "tanh"

    def __post_init__(self):
        if not self.weights:
            raise DataError("A network needs at least one layer")
        if self.activation not in ACTIVATIONS:
            raise DataError(f"Unknown activation '{self.activation}'")
        for left, right in zip(self.weights, self.weights[1:]):
            if left.shape[1] != right.shape[0]:
                raise WidthMismatchError("Consecutive layer widths do not chain")

    @classmethod
    def create(
        cls,
        widths: Sequence[int],
        rng: np.random.Generator,
        activation: str = "tanh",
        bias: bool = True,
    ) -> "MLP":
        """Glorot-uniform weights and zero biases for widths [in, ..., out]."""
        if len(widths) < 2 or min(widths) < 1:
            raise DataError(f"Invalid layer widths {list(widths)}")
        weights = [glorot_uniform(rng, a, b) for a, b in zip(widths, widths[1:])]
        biases = [np.zeros(b) if bias else None for b in widths[1:]]
        return cls(weights=weights, biases=biases, activation=activation)

    @property
    def in_width(self) -> int:
        return self.weights[0].shape[0]

    @property
    def out_width(self) -> int:
        return self.weights[-1].shape[1]

    @property
    def linear(self) -> bool:
        return len(self.weights) == 1

    def _act(self, z):
        return np.tanh(z) if self.activation == "tanh" else np.maximum(z, 0.0)

    def _act_grad(self, z, a):
        return 1.0 - a**2 if self.activation == "tanh" else (z > 0).astype(float)

    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, list]:
        """Outputs (B, out) and the per-layer cache used by `backward`."""
        if x.shape[-1] != self.in_width:
            raise WidthMismatchError(
                f"Input width {x.shape[-1]} does not match network width {self.in_width}"
            )
        cache = []
        a = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w
            if b is not None:
                z = z + b
            out = z if i == last else self._act(z)
            cache.append((a, z, out))
            a = out
        return a, cache

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)[0]

    def backward(self, cache: list, grad_out: np.ndarray) -> List[np.ndarray]:
        """Parameter gradients in `parameters()` order."""
        grads: List[np.ndarray] = []
        delta = grad_out
        last = len(self.weights) - 1
        for i in range(last, -1, -1):
            a_in, z, out = cache[i]
            if i != last:
                delta = delta * self._act_grad(z, out)
            layer = [a_in.T @ delta]
            if self.biases[i] is not None:
                layer.append(delta.sum(axis=0))
            grads[:0] = layer
            if i > 0:
                delta = delta @ self.weights[i].T
        return grads

    def parameters(self) -> List[np.ndarray]:
        params = []
        for w, b in zip(self.weights, self.biases):
            params.append(w)
            if b is not None:
                params.append(b)
        return params

    def load_parameters(self, params: Sequence[np.ndarray]) -> "MLP":
        """Copy with the given parameters in `parameters()` order."""
        it = iter(params)
        weights, biases = [], []
        for b in self.biases:
            weights.append(next(it))
            biases.append(next(it) if b is not None else None)
        return MLP(weights=weights, biases=biases, activation=self.activation)


@dataclass
class MIONet:
    """prediction(x) = sum(b_1 (.) ... (.) b_B (.) t(x)), or W (b (.) t) with W."""

    branches: List[MLP]
    trunk: MLP
    output: Optional[np.ndarray] = None  # (outputs, p)
    metadata: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        p = self.trunk.out_width
        for i, branch in enumerate(self.branches):
            if branch.out_width != p:
                raise WidthMismatchError(
                    f"Branch {i} outputs {branch.out_width} features, trunk outputs {p}"
                )
        if self.output is not None and self.output.shape[1] != p:
            raise WidthMismatchError(f"Output matrix needs {p} columns")

    @property
    def latent(self) -> int:
        return self.trunk.out_width

    @property
    def outputs(self) -> int:
        return 1 if self.output is None else self.output.shape[0]

    def parameters(self) -> List[np.ndarray]:
        params = []
        for branch in self.branches:
            params.extend(branch.parameters())
        params.extend(self.trunk.parameters())
        if self.output is not None:
            params.append(self.output)
        return params

    def load_parameters(self, params: Sequence[np.ndarray]) -> "MIONet":
        params = list(params)
        start = 0
        branches = []
        for branch in self.branches:
            count = len(branch.parameters())
            branches.append(branch.load_parameters(params[start : start + count]))
            start += count
        count = len(self.trunk.parameters())
        trunk = self.trunk.load_parameters(params[start : start + count])
        start += count
        output = params[start] if self.output is not None else None
        return MIONet(branches=branches, trunk=trunk, output=output, metadata=dict(self.metadata))

    def predict(self, branch_inputs: Sequence[np.ndarray], queries: np.ndarray) -> np.ndarray:
        """Batched predictions: inputs (B, width_i), queries (B, Q, dq) -> (B, Q[, outputs])."""
        return self._forward(branch_inputs, queries)[0]

    def _forward(self, branch_inputs, queries):
        if len(branch_inputs) != len(self.branches):
            raise WidthMismatchError(
                f"{len(branch_inputs)} branch inputs for {len(self.branches)} branches"
            )
        batch, count, dq = queries.shape
        branch_out, branch_cache = [], []
        for branch, x in zip(self.branches, branch_inputs):
            out, cache = branch.forward(np.asarray(x, dtype=float))
            branch_out.append(out)
            branch_cache.append(cache)
        trunk_out, trunk_cache = self.trunk.forward(queries.reshape(batch * count, dq))
        trunk_out = trunk_out.reshape(batch, count, self.latent)

        product = np.ones((batch, self.latent))
        for out in branch_out:
            product = product * out
        s = product[:, None, :] * trunk_out
        pred = s.sum(axis=-1) if self.output is None else s @ self.output.T
        return pred, (branch_out, branch_cache, trunk_out, trunk_cache, product, s)

    def loss_and_gradient(
        self,
        branch_inputs: Sequence[np.ndarray],
        queries: np.ndarray,
        targets: np.ndarray,
        weights: np.ndarray,
    ) -> Tuple[float, List[np.ndarray]]:
        """(1 / B) sum_i sum_q w_iq |pred_iq - target_iq|^2 and its exact gradient."""
        pred, (branch_out, branch_cache, trunk_out, trunk_cache, product, s) = self._forward(
            branch_inputs, queries
        )
        batch, count = queries.shape[:2]
        residual = pred - targets
        w = weights if self.output is None else weights[..., None]
        loss = float(np.sum(w * residual**2) / batch)
        d_pred = 2.0 * w * residual / batch

        if self.output is None:
            d_s = np.repeat(d_pred[..., None], self.latent, axis=-1)
            d_output = None
        else:
            d_output = d_pred.reshape(-1, self.outputs).T @ s.reshape(-1, self.latent)
            d_s = d_pred @ self.output

        d_product = (d_s * trunk_out).sum(axis=1)
        d_trunk = (d_s * product[:, None, :]).reshape(batch * count, self.latent)

        # products of all other branches via prefix/suffix sweeps
        prefix = [np.ones_like(product)]
        for out in branch_out[:-1]:
            prefix.append(prefix[-1] * out)
        suffix = np.ones_like(product)
        branch_grads = [None] * len(self.branches)
        for i in range(len(self.branches) - 1, -1, -1):
            d_branch = d_product * prefix[i] * suffix
            branch_grads[i] = self.branches[i].backward(branch_cache[i], d_branch)
            suffix = suffix * branch_out[i]

        grads = [g for layer in branch_grads for g in layer]
        grads.extend(self.trunk.backward(trunk_cache, d_trunk))
        if d_output is not None:
            grads.append(d_output)
        return loss, grads


def mionet_forward(net: MIONet, branch_inputs: Sequence[np.ndarray], query) -> np.ndarray:
    """Prediction for one sample at one query point: length 1 or `outputs`."""
    inputs = [np.asarray(x, dtype=float)[None, :] for x in branch_inputs]
    query = np.asarray(query, dtype=float).reshape(1, 1, -1)
    return np.atleast_1d(net.predict(inputs, query)[0, 0])


def mionet_gradient(net: MIONet, batch) -> List[np.ndarray]:
    """Exact gradient of the weighted squared-error loss on a minibatch."""
    if len(batch.targets) == 0:
        raise DataError("Minibatch is empty")
    return net.loss_and_gradient(batch.branch_inputs, batch.queries, batch.targets, batch.weights)[1]


def build_mionet(
    branch_widths: Sequence[int],
    linear_branches: Sequence[bool],
    query_dim: int,
    config: NetworkConfig,
    seed: int,
    outputs: Optional[int] = None,
) -> MIONet:
    """Glorot-initialized MIONet; linear branches are bias-free matrices."""
    rng = np.random.default_rng(seed)
    p = config.latent
    branches = []
    for width, linear in zip(branch_widths, linear_branches):
        if linear:
            branches.append(MLP.create([width, p], rng, config.activation, bias=False))
        else:
            branches.append(MLP.create([width, *config.hidden, p], rng, config.activation))
    trunk = MLP.create([query_dim, *config.hidden, p], rng, config.activation)
    output = glorot_uniform(rng, p, outputs).T if outputs else None
    return MIONet(
        branches=branches,
        trunk=trunk,
        output=output,
        metadata={"seed": seed, "linear_branches": [bool(b) for b in linear_branches]},
    )


def network_arrays(net: MIONet) -> Dict[str, np.ndarray]:
    """Flat name -> array mapping for checkpoints."""
    arrays = {}
    for i, branch in enumerate(net.branches):
        for j, (w, b) in enumerate(zip(branch.weights, branch.biases)):
            arrays[f"branch{i}.layer{j}.weight"] = w
            if b is not None:
                arrays[f"branch{i}.layer{j}.bias"] = b
    for j, (w, b) in enumerate(zip(net.trunk.weights, net.trunk.biases)):
        arrays[f"trunk.layer{j}.weight"] = w
        arrays[f"trunk.layer{j}.bias"] = b
    if net.output is not None:
        arrays["output"] = net.output
    return arrays


def _mlp_from_arrays(arrays: Dict[str, np.ndarray], prefix: str, activation: str) -> MLP:
    weights, biases = [], []
    j = 0
    while f"{prefix}.layer{j}.weight" in arrays:
        weights.append(arrays[f"{prefix}.layer{j}.weight"])
        biases.append(arrays.get(f"{prefix}.layer{j}.bias"))
        j += 1
    return MLP(weights=weights, biases=biases, activation=activation)


def network_from_arrays(arrays: Dict[str, np.ndarray], activation: str, metadata=None) -> MIONet:
    branches = []
    i = 0
    while f"branch{i}.layer0.weight" in arrays:
        branches.append(_mlp_from_arrays(arrays, f"branch{i}", activation))
        i += 1
    return MIONet(
        branches=branches,
        trunk=_mlp_from_arrays(arrays, "trunk", activation),
        output=arrays.get("output"),
        metadata=dict(metadata or {}),
    )
