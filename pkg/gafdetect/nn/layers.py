from abc import ABC, abstractmethod
from typing import Dict, Iterator, List, Optional, Sequence, Tuple
import logging

import numpy as np

from ..errors import InvalidInput, StateError
from . import functional as F

logger = logging.getLogger(__name__)


class Layer(ABC):
    """
    A differentiable layer with named parameters.

    `forward` caches what `backward` needs; `backward` fills `grads` with one gradient per
    entry of `params` and returns the gradient with respect to the input. Buffers hold
    non-trainable state that a checkpoint must carry.

    Attributes:
        name (str): Unique name within a `Sequential`.
        params (Dict[str, np.ndarray]): Trainable tensors.
        grads (Dict[str, np.ndarray]): Gradients from the latest backward pass.
    """

    def __init__(self, name: str):
        self.name = name
        self.params: Dict[str, np.ndarray] = {}
        self.grads: Dict[str, np.ndarray] = {}
        self._cache = None

    @abstractmethod
    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        pass

    @abstractmethod
    def backward(self, dout: np.ndarray) -> np.ndarray:
        pass

    def buffers(self) -> Dict[str, np.ndarray]:
        return {}

    def load_buffers(self, buffers: Dict[str, np.ndarray]) -> None:
        if buffers:
            raise InvalidInput(f"{self.name} has no buffers, got {sorted(buffers)}")

    def _take_cache(self):
        if self._cache is None:
            raise StateError(f"{self.name}: backward called before forward")
        cache, self._cache = self._cache, None
        return cache

    def __repr__(self) -> str:
        shapes = ", ".join(f"{k}={v.shape}" for k, v in self.params.items())
        return f"{type(self).__name__}({self.name}{': ' + shapes if shapes else ''})"


def kaiming_normal(rng: np.random.Generator, shape, fan_in: int, slope: float = 0.0):
    """Fan-in scaled normal initialisation for (leaky) rectifier stacks."""
    std = np.sqrt(2.0 / ((1.0 + slope * slope) * fan_in))
    return rng.normal(0.0, std, size=shape)


class Conv2D(Layer):
    def __init__(
        self,
        name: str,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        rng: np.random.Generator,
        slope: float = 0.1,
        stride: int = 1,
    ):
        super().__init__(name)
        fan_in = in_channels * kernel_size * kernel_size
        self.params["weight"] = kaiming_normal(
            rng, (out_channels, in_channels, kernel_size, kernel_size), fan_in, slope
        )
        self.params["bias"] = np.zeros(out_channels)
        self.stride = stride

    def forward(self, x, training):
        out, self._cache = F.conv2d_forward(
            x, self.params["weight"], self.params["bias"], self.stride
        )
        return out

    def backward(self, dout):
        dx, self.grads["weight"], self.grads["bias"] = F.conv2d_backward(
            dout, self._take_cache()
        )
        return dx


class BatchNorm2D(Layer):
    def __init__(
        self, name: str, channels: int, momentum: float = 0.99, epsilon: float = 1e-5
    ):
        super().__init__(name)
        self.params["gamma"] = np.ones(channels)
        self.params["beta"] = np.zeros(channels)
        self.state = F.BatchNormState.fresh(channels, momentum, epsilon)

    def forward(self, x, training):
        out, self._cache = F.batchnorm_forward(
            x, self.params["gamma"], self.params["beta"], self.state, training=training
        )
        return out

    def backward(self, dout):
        dx, self.grads["gamma"], self.grads["beta"] = F.batchnorm_backward(
            dout, self._take_cache()
        )
        return dx

    def buffers(self):
        return {
            "running_mean": self.state.running_mean,
            "running_var": self.state.running_var,
        }

    def load_buffers(self, buffers):
        mean = np.asarray(buffers["running_mean"], dtype=np.float64)
        var = np.asarray(buffers["running_var"], dtype=np.float64)
        if mean.shape != self.state.running_mean.shape or var.shape != mean.shape:
            raise InvalidInput(f"{self.name}: running statistics have the wrong shape")
        if np.any(var < 0):
            raise InvalidInput(f"{self.name}: running variance must be non-negative")
        self.state.running_mean = mean.copy()
        self.state.running_var = var.copy()


class LeakyReLU(Layer):
    def __init__(self, name: str, slope: float = 0.1):
        super().__init__(name)
        if not 0 < slope < 1:
            raise InvalidInput(f"Leaky slope must lie in (0, 1), got {slope}")
        self.slope = slope

    def forward(self, x, training):
        self._cache = x
        return F.leaky_relu(x, self.slope)

    def backward(self, dout):
        return F.leaky_relu_backward(dout, self._take_cache(), self.slope)


class MaxPool2(Layer):
    def forward(self, x, training):
        out, self._cache = F.maxpool2(x)
        return out

    def backward(self, dout):
        return F.maxpool2_backward(dout, self._take_cache())


class Flatten(Layer):
    def forward(self, x, training):
        self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._take_cache())


class Dense(Layer):
    def __init__(
        self, name: str, in_features: int, out_features: int, rng: np.random.Generator
    ):
        super().__init__(name)
        scale = np.sqrt(1.0 / in_features)
        self.params["weight"] = rng.normal(0.0, scale, (in_features, out_features))
        self.params["bias"] = np.zeros(out_features)

    def forward(self, x, training):
        weight, bias = self.params["weight"], self.params["bias"]
        out, self._cache = F.dense_forward(x, weight, bias)
        return out

    def backward(self, dout):
        dx, self.grads["weight"], self.grads["bias"] = F.dense_backward(
            dout, self._take_cache(), self.params["weight"]
        )
        return dx


class Sequential:
    """
    An ordered chain of layers.

    Parameter and buffer names are `<layer name>.<tensor name>`.
    """

    def __init__(self, layers: Sequence[Layer]):
        names = [layer.name for layer in layers]
        if len(set(names)) != len(names):
            raise InvalidInput(f"Layer names must be unique: {names}")
        self.layers: List[Layer] = list(layers)

    def forward(self, x: np.ndarray, *, training: bool) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x, training)
        return x

    def backward(self, dout: np.ndarray) -> np.ndarray:
        """
        Backpropagate through every layer in reverse.

        Raises:
            StateError: If a layer has no cached forward pass.
        """
        for layer in reversed(self.layers):
            dout = layer.backward(dout)
        return dout

    def named_parameters(self) -> Iterator[Tuple[str, np.ndarray]]:
        for layer in self.layers:
            for key, value in layer.params.items():
                yield f"{layer.name}.{key}", value

    def named_gradients(self) -> Iterator[Tuple[str, np.ndarray]]:
        for layer in self.layers:
            for key in layer.params:
                if key not in layer.grads:
                    raise StateError(f"{layer.name}.{key} has no gradient yet")
                yield f"{layer.name}.{key}", layer.grads[key]

    def named_buffers(self) -> Iterator[Tuple[str, np.ndarray]]:
        for layer in self.layers:
            for key, value in layer.buffers().items():
                yield f"{layer.name}.{key}", value

    def state_dict(self) -> Dict[str, np.ndarray]:
        """Copies of every parameter and buffer, keyed by qualified name."""
        state = {name: value.copy() for name, value in self.named_parameters()}
        state.update({name: value.copy() for name, value in self.named_buffers()})
        return state

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        """
        Replace every parameter and buffer.

        Raises:
            InvalidInput: If a tensor is missing, unexpected or of the wrong shape.
        """
        expected = set(self.state_dict())
        if set(state) != expected:
            missing = sorted(expected - set(state))
            extra = sorted(set(state) - expected)
            raise InvalidInput(f"State mismatch: missing {missing}, unexpected {extra}")
        for layer in self.layers:
            for key, value in layer.params.items():
                new = np.asarray(state[f"{layer.name}.{key}"], dtype=np.float64)
                if new.shape != value.shape:
                    raise InvalidInput(
                        f"{layer.name}.{key}: "
                        f"expected shape {value.shape}, got {new.shape}"
                    )
                layer.params[key] = new.copy()
            buffers = {
                key: state[f"{layer.name}.{key}"] for key in layer.buffers()
            }
            layer.load_buffers(buffers)


def backward(graph: Sequential, loss_grad: np.ndarray) -> Dict[str, np.ndarray]:
    """
    Reverse-mode gradients of every parameter and of the input.

    Args:
        graph (Sequential): A network that has just run `forward`.
        loss_grad (np.ndarray): Gradient of the loss with respect to the network output.

    Returns:
        Dict[str, np.ndarray]: One gradient per qualified parameter name, plus `input`.

    Raises:
        StateError: If called before a forward pass.
    """
    dx = graph.backward(loss_grad)
    grads = dict(graph.named_gradients())
    grads["input"] = dx
    return grads


def parameter_count(graph: Sequential, names: Optional[Sequence[str]] = None) -> int:
    return sum(
        v.size for k, v in graph.named_parameters() if names is None or k in names
    )
