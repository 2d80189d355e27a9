from dataclasses import dataclass
from typing import Dict, Iterable, Tuple
import logging

import numpy as np

from ..config import check_positive
from ..errors import InvalidInput, ShapeError

logger = logging.getLogger(__name__)


@dataclass
class AdadeltaSlot:
    """Running averages of squared gradients and squared updates for one parameter."""

    accumulated_grad: np.ndarray
    accumulated_delta: np.ndarray

    @classmethod
    def zeros_like(cls, param: np.ndarray) -> "AdadeltaSlot":
        return cls(np.zeros_like(param), np.zeros_like(param))


def adadelta_step(
    param: np.ndarray,
    grad: np.ndarray,
    slot: AdadeltaSlot,
    rho: float = 0.95,
    learning_rate: float = 0.001,
    epsilon: float = 1e-7,
    weight_decay: float = 0.0005,
) -> np.ndarray:
    """
    Apply one Adadelta update to `param` in place.

    The weight decay is added to the gradient as `weight_decay * param`. The accumulators
    track the unscaled update; the applied step is that update times `learning_rate`.

    Args:
        param (np.ndarray): Parameter tensor, updated in place.
        grad (np.ndarray): Gradient of the loss with respect to `param`.
        slot (AdadeltaSlot): The parameter's accumulators, updated in place.
        rho (float): Decay of the running averages.
        learning_rate (float): Scale of the applied update.
        epsilon (float): Added inside both square roots.
        weight_decay (float): L2 coefficient.

    Returns:
        np.ndarray: `param`, for chaining.

    Raises:
        ShapeError: If the gradient or the accumulators do not match the parameter.
    """
    if grad.shape != param.shape or slot.accumulated_grad.shape != param.shape:
        raise ShapeError(
            f"Parameter {param.shape}, gradient {grad.shape} and accumulator "
            f"{slot.accumulated_grad.shape} shapes must agree"
        )
    g = grad + weight_decay * param if weight_decay else grad
    slot.accumulated_grad *= rho
    slot.accumulated_grad += (1 - rho) * g * g
    rms_delta = np.sqrt(slot.accumulated_delta + epsilon)
    delta = rms_delta / np.sqrt(slot.accumulated_grad + epsilon) * g
    slot.accumulated_delta *= rho
    slot.accumulated_delta += (1 - rho) * delta * delta
    param -= learning_rate * delta
    return param


class Adadelta:
    """
    Adadelta over a set of named parameters.

    Accumulators are created lazily, one slot per parameter name.

    Args:
        learning_rate (float): Scale of every applied update.
        rho (float): Decay of the running averages, in (0, 1).
        epsilon (float): Numerical floor inside the square roots.
        weight_decay (float): L2 coefficient added to the gradients.
    """

    def __init__(
        self,
        learning_rate: float = 0.001,
        rho: float = 0.95,
        epsilon: float = 1e-7,
        weight_decay: float = 0.0005,
    ):
        check_positive(
            type(self).__name__, learning_rate=learning_rate, epsilon=epsilon
        )
        if not 0 < rho < 1:
            raise InvalidInput(f"rho must lie in (0, 1), got {rho}")
        if weight_decay < 0:
            raise InvalidInput(f"weight_decay must be non-negative, got {weight_decay}")
        self.learning_rate = learning_rate
        self.rho = rho
        self.epsilon = epsilon
        self.weight_decay = weight_decay
        self.slots: Dict[str, AdadeltaSlot] = {}

    def step(
        self,
        params: Iterable[Tuple[str, np.ndarray]],
        grads: Dict[str, np.ndarray],
    ) -> None:
        """
        Update every named parameter in place with its gradient.

        Raises:
            InvalidInput: If a parameter has no gradient.
        """
        for name, param in params:
            if name not in grads:
                raise InvalidInput(f"No gradient for parameter {name}")
            slot = self.slots.get(name)
            if slot is None:
                slot = self.slots[name] = AdadeltaSlot.zeros_like(param)
            adadelta_step(
                param,
                grads[name],
                slot,
                self.rho,
                self.learning_rate,
                self.epsilon,
                self.weight_decay,
            )
