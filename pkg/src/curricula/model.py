"""Feed-forward softmax classifier on a flat parameter vector.

The model is an MLP: affine layers with relu or tanh between them and a
softmax head. Parameters live in one flat float64 vector (layout in
kernels.numpy_backend) so optimizers and checkpoints treat the model as a
plain array.

Initialisation scheme: weights uniform in [-s, s] with
s = sqrt(6 / (fan_in + fan_out)) per layer, biases zero, drawn layer by
layer from a numpy PCG64 stream seeded with the model seed. Two models
built from the same spec are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigurationError, InputError
from .kernels import numpy_backend

ACTIVATIONS = ("relu", "tanh")


@dataclass(frozen=True)
class ModelSpec:
    input_dim: int
    hidden_dims: tuple[int, ...]
    num_classes: int
    activation: str = "relu"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        if self.input_dim < 1:
            raise ConfigurationError(f"input_dim must be positive, got {self.input_dim}")
        if any(h < 1 for h in self.hidden_dims):
            raise ConfigurationError(f"hidden_dims must be positive, got {self.hidden_dims}")
        if self.num_classes < 2:
            raise ConfigurationError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.activation not in ACTIVATIONS:
            raise ConfigurationError(
                f"activation must be one of {ACTIVATIONS}, got {self.activation!r}"
            )
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_dims, self.num_classes)

    @property
    def activation_code(self) -> int:
        return ACTIVATIONS.index(self.activation)

    @property
    def param_count(self) -> int:
        dims = self.dims
        return sum((dims[l] + 1) * dims[l + 1] for l in range(len(dims) - 1))

    @property
    def num_probes(self) -> int:
        """Probe locations: input, each hidden activation, post-softmax."""
        return len(self.hidden_dims) + 2


@dataclass(frozen=True)
class ModelState:
    parameters: np.ndarray
    spec: ModelSpec
    epoch_tag: int = 0

    def __post_init__(self):
        params = np.array(self.parameters, dtype=np.float64, order="C", copy=True)
        if params.ndim != 1 or params.shape[0] != self.spec.param_count:
            raise ConfigurationError(
                f"expected {self.spec.param_count} parameters, got shape {params.shape}"
            )
        params.flags.writeable = False
        object.__setattr__(self, "parameters", params)

    def dims_array(self) -> np.ndarray:
        return np.asarray(self.spec.dims, dtype=np.int64)


@dataclass
class LayerActivations:
    """Per-probe representations, ordered input -> hidden -> post-softmax."""

    per_layer: list[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.per_layer)


def init_model(spec: ModelSpec) -> ModelState:
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    dims = spec.dims
    chunks = []
    for l in range(len(dims) - 1):
        fan_in, fan_out = dims[l], dims[l + 1]
        s = np.sqrt(6.0 / (fan_in + fan_out))
        chunks.append(rng.uniform(-s, s, size=fan_in * fan_out))
        chunks.append(np.zeros(fan_out))
    return ModelState(np.concatenate(chunks), spec, epoch_tag=0)


def zero_model(spec: ModelSpec) -> ModelState:
    """All-zero parameters; the output is uniform for any input."""
    return ModelState(np.zeros(spec.param_count), spec, epoch_tag=0)


def _check_features(spec: ModelSpec, x: np.ndarray) -> np.ndarray:
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != spec.input_dim:
        raise InputError(f"expected features of width {spec.input_dim}, got shape {x.shape}")
    return x


def batch_activations(state: ModelState, x: np.ndarray) -> list[np.ndarray]:
    """All probe representations for a batch, input first, probabilities last.

    Always evaluated on the numpy path: probe extraction is not hot, and a
    single code path keeps representations identical across backends.
    """
    spec = state.spec
    x = _check_features(spec, x)
    dims = state.dims_array()
    offs = numpy_backend.layer_offsets(dims)
    acts = [x]
    a = x
    n_aff = len(dims) - 1
    for l in range(n_aff):
        w_end = offs[l] + dims[l] * dims[l + 1]
        w = state.parameters[offs[l]:w_end].reshape(dims[l], dims[l + 1])
        b = state.parameters[w_end:offs[l + 1]]
        z = a @ w + b
        if l < n_aff - 1:
            a = np.maximum(z, 0.0) if spec.activation_code == 0 else np.tanh(z)
            acts.append(a)
        else:
            acts.append(numpy_backend.softmax_rows(z))
    return acts


def forward(state: ModelState, x: np.ndarray) -> tuple[np.ndarray, LayerActivations]:
    """Probabilities and probe activations for a single sample."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise InputError(f"forward expects a single feature vector, got shape {x.shape}")
    acts = batch_activations(state, x[None, :])
    return acts[-1][0], LayerActivations([a[0] for a in acts])


def batch_probs(state: ModelState, x: np.ndarray) -> np.ndarray:
    """Class probabilities for a batch via the active kernel backend."""
    x = _check_features(state.spec, x)
    return kernels.forward_probs(state.parameters, state.dims_array(), state.spec.activation_code, x)


def _check_labels(spec: ModelSpec, y: np.ndarray, n: int) -> np.ndarray:
    y = np.ascontiguousarray(y, dtype=np.int64)
    if y.ndim != 1 or y.shape[0] != n:
        raise InputError(f"expected {n} labels, got shape {y.shape}")
    if y.size and (y.min() < 0 or y.max() >= spec.num_classes):
        raise InputError(
            f"labels must lie in [0, {spec.num_classes}), got range "
            f"[{y.min()}, {y.max()}]"
        )
    return y


def loss_and_grad(state: ModelState, x: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy over a batch and its flat gradient."""
    x = _check_features(state.spec, x)
    if x.shape[0] == 0:
        raise InputError("batch must be non-empty")
    y = _check_labels(state.spec, y, x.shape[0])
    return kernels.loss_grad(state.parameters, state.dims_array(), state.spec.activation_code, x, y)


def loss_and_grad_at(
    params: np.ndarray, spec: ModelSpec, x: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray]:
    """Same as loss_and_grad but at an arbitrary parameter vector."""
    dims = np.asarray(spec.dims, dtype=np.int64)
    return kernels.loss_grad(params, dims, spec.activation_code, x, y)
