from .functional import (
    BatchNormState,
    batchnorm_backward,
    batchnorm_forward,
    conv2d_backward,
    conv2d_forward,
    dense_backward,
    dense_forward,
    leaky_relu,
    leaky_relu_backward,
    log_softmax,
    maxpool2,
    maxpool2_backward,
    sigmoid,
    softmax,
)
from .layers import (
    BatchNorm2D,
    Conv2D,
    Dense,
    Flatten,
    Layer,
    LeakyReLU,
    MaxPool2,
    Sequential,
    backward,
)
from .optim import Adadelta, AdadeltaSlot, adadelta_step
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "BatchNormState",
    "batchnorm_backward",
    "batchnorm_forward",
    "conv2d_backward",
    "conv2d_forward",
    "dense_backward",
    "dense_forward",
    "leaky_relu",
    "leaky_relu_backward",
    "log_softmax",
    "maxpool2",
    "maxpool2_backward",
    "sigmoid",
    "softmax",
    "BatchNorm2D",
    "Conv2D",
    "Dense",
    "Flatten",
    "Layer",
    "LeakyReLU",
    "MaxPool2",
    "Sequential",
    "backward",
    "Adadelta",
    "AdadeltaSlot",
    "adadelta_step",
    "load_checkpoint",
    "save_checkpoint",
]
