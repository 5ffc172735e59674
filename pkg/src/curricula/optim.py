"""Optimizers over flat parameter vectors: SGD with momentum, Adam, SAM.

SAM composes over SGD-momentum: ascend along rho * g / ||g||, recompute
the gradient at the perturbed point, then apply the base update at the
original point. When ||g|| < 1e-12 the ascent is skipped (the direction
is undefined) and the base step uses the unperturbed gradient.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, NumericError

FAMILIES = ("sgd_momentum", "adam", "sam")
SAM_NORM_FLOOR = 1e-12

# (loss, grad) at a parameter vector; SAM re-invokes it at the perturbed point.
LossGradFn = Callable[[np.ndarray], tuple[float, np.ndarray]]


@dataclass(frozen=True)
class OptimizerSpec:
    family: str
    learning_rate: float
    momentum: float = 0.9
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    sam_rho: float = 0.05

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"family must be one of {FAMILIES}, got {self.family!r}")
        # lr = 0 is allowed: a zero step is a well-defined no-op.
        if self.learning_rate < 0:
            raise ConfigurationError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if not 0 <= self.momentum < 1:
            raise ConfigurationError(f"momentum must be in [0, 1), got {self.momentum}")
        for name in ("adam_beta1", "adam_beta2"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ConfigurationError(f"{name} must be in (0, 1), got {v}")
        if self.adam_eps <= 0:
            raise ConfigurationError(f"adam_eps must be positive, got {self.adam_eps}")
        if self.sam_rho < 0:
            raise ConfigurationError(f"sam_rho must be >= 0, got {self.sam_rho}")


class Optimizer:
    """Stateful update rule; buffers are sized to the parameter count."""

    def __init__(self, spec: OptimizerSpec, param_count: int):
        self.spec = spec
        self.velocity = np.zeros(param_count)
        self.adam_m = np.zeros(param_count)
        self.adam_v = np.zeros(param_count)
        self.step_count = 0

    def _check_grad(self, grad: np.ndarray) -> None:
        if not np.all(np.isfinite(grad)):
            raise NumericError("non-finite gradient; parameters left unchanged")

    def _base_update(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        spec = self.spec
        if spec.family == "adam":
            self.step_count += 1
            self.adam_m = spec.adam_beta1 * self.adam_m + (1 - spec.adam_beta1) * grad
            self.adam_v = spec.adam_beta2 * self.adam_v + (1 - spec.adam_beta2) * grad**2
            m_hat = self.adam_m / (1 - spec.adam_beta1**self.step_count)
            v_hat = self.adam_v / (1 - spec.adam_beta2**self.step_count)
            return params - spec.learning_rate * m_hat / (np.sqrt(v_hat) + spec.adam_eps)
        self.velocity = spec.momentum * self.velocity + grad
        return params - spec.learning_rate * self.velocity

    def step(
        self, params: np.ndarray, grad: np.ndarray, loss_grad_fn: LossGradFn | None = None
    ) -> np.ndarray:
        """One update; returns the new parameter vector.

        ``grad`` is the gradient at ``params``. SAM additionally needs
        ``loss_grad_fn`` to re-evaluate the gradient at the perturbed point.
        """
        self._check_grad(grad)
        if self.spec.family == "sam":
            norm = float(np.linalg.norm(grad))
            if self.spec.sam_rho > 0 and norm >= SAM_NORM_FLOOR:
                if loss_grad_fn is None:
                    raise ConfigurationError("sam requires a loss_grad_fn to recompute gradients")
                perturbed = params + (self.spec.sam_rho / norm) * grad
                _, grad = loss_grad_fn(perturbed)
                self._check_grad(grad)
        return self._base_update(params, grad)


def optimizer_step(
    params: np.ndarray,
    grad: np.ndarray,
    spec: OptimizerSpec,
    loss_grad_fn: LossGradFn | None = None,
) -> np.ndarray:
    """Single stateless step (fresh buffers); convenience for one-shot use."""
    return Optimizer(spec, params.shape[0]).step(params, grad, loss_grad_fn)
