from dataclasses import dataclass
from typing import BinaryIO, Dict, List, Optional, Tuple, Union
import logging
import os

import numpy as np

from ..config import default_seed
from ..core.patterns import N_CLASSES, FeatureSet, PatternClass
from ..core.samples import MIN_WINDOW, WINDOW
from ..core.serialization import JsonSerializable
from ..core.utils import round_half_away_from_zero
from ..errors import FormatError, InvalidInput, ShapeError
from ..nn.checkpoint import load_checkpoint, save_checkpoint
from ..nn.functional import sigmoid, softmax
from ..nn.layers import (
    BatchNorm2D,
    Conv2D,
    Dense,
    Flatten,
    Layer,
    LeakyReLU,
    MaxPool2,
    Sequential,
    parameter_count,
)

logger = logging.getLogger(__name__)

# output layout: [w0, c0, w1, c1, 8 class logits]
N_PAIRS = 2
BOX_OUTPUTS = 2 * N_PAIRS
N_OUTPUTS = BOX_OUTPUTS + N_CLASSES
CHECKPOINT_KIND = "gafdetect-detector"


@dataclass(frozen=True)
class DetectorArchitecture(JsonSerializable):
    """
    Shape of the single-cell detector.

    Every block is conv, batch norm and leaky ReLU; blocks listed in `pool_after`
    (1-based) end with a 2 x 2 max pool. A dense layer maps the final 1 x 1 feature map
    to the 12 outputs.

    Attributes:
        widths (Tuple[int, ...]): Output channels per block.
        kernels (Tuple[int, ...]): Odd kernel size per block.
        pool_after (Tuple[int, ...]): Blocks followed by max pooling.
        in_channels (int): Input channels (GAF channels).
        window (int): Input height and width.
        feature_set (FeatureSet): The encoding the model was trained on.
        leaky_slope (float): Negative slope of the activations.
        bn_momentum (float): Running-statistics momentum.
        bn_epsilon (float): Batch-norm variance floor.
    """

    widths: Tuple[int, ...] = (16, 32, 64, 128, 128, 128)
    kernels: Tuple[int, ...] = (3, 3, 3, 3, 1, 1)
    pool_after: Tuple[int, ...] = (1, 2, 3, 4)
    in_channels: int = 4
    window: int = WINDOW
    feature_set: FeatureSet = FeatureSet.OHLC
    leaky_slope: float = 0.1
    bn_momentum: float = 0.99
    bn_epsilon: float = 1e-5

    _casters = {
        "widths": tuple,
        "kernels": tuple,
        "pool_after": tuple,
        "feature_set": FeatureSet.parse,
    }

    def __post_init__(self):
        if not self.widths or len(self.widths) != len(self.kernels):
            raise InvalidInput(
                "widths and kernels must be non-empty and of equal length"
            )
        bad_kernel = any(k < 1 or k % 2 == 0 for k in self.kernels)
        if any(w < 1 for w in self.widths) or bad_kernel:
            raise InvalidInput("Widths must be positive and kernels odd")
        if any(not 1 <= p <= len(self.widths) for p in self.pool_after):
            raise InvalidInput(f"pool_after must name blocks 1..{len(self.widths)}")
        if self.spatial_trace()[-1] != 1:
            raise InvalidInput(
                f"Pooling must reduce {self.window}x{self.window} to 1x1, "
                f"trace is {self.spatial_trace()}"
            )

    def spatial_trace(self) -> List[int]:
        """Spatial size at the input and after every block."""
        size = self.window
        trace = [size]
        for block in range(1, len(self.widths) + 1):
            if block in self.pool_after:
                if size % 2:
                    raise InvalidInput(f"Block {block} pools an odd size {size}")
                size //= 2
            trace.append(size)
        return trace

    @property
    def n_outputs(self) -> int:
        return N_OUTPUTS


@dataclass(frozen=True)
class DetectorOutput:
    """
    Decoded head of one sample.

    Attributes:
        pairs (Tuple[Tuple[float, float], ...]): Two (w_norm, confidence) pairs in (0, 1).
        class_scores (Tuple[float, ...]): Eight class probabilities summing to 1.
    """

    pairs: Tuple[Tuple[float, float], ...]
    class_scores: Tuple[float, ...]

    def __post_init__(self):
        if len(self.pairs) != N_PAIRS or any(len(p) != 2 for p in self.pairs):
            raise ShapeError(f"Expected {N_PAIRS} (w, c) pairs, got {self.pairs}")
        if len(self.class_scores) != N_CLASSES:
            raise ShapeError(f"Expected {N_CLASSES} class scores")

    @classmethod
    def from_activated(cls, values) -> "DetectorOutput":
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if values.size != N_OUTPUTS:
            raise ShapeError(f"Expected {N_OUTPUTS} outputs, got {values.size}")
        pairs = tuple(
            (float(values[2 * k]), float(values[2 * k + 1])) for k in range(N_PAIRS)
        )
        return cls(pairs, tuple(float(v) for v in values[BOX_OUTPUTS:]))

    def to_array(self) -> np.ndarray:
        boxes = [v for pair in self.pairs for v in pair]
        return np.array(boxes + list(self.class_scores))

    @property
    def best_pair(self) -> int:
        """Index of the pair with the higher confidence; ties go to pair 0."""
        return int(np.argmax([c for _, c in self.pairs]))

    @property
    def pattern_class(self) -> PatternClass:
        return PatternClass.from_id(int(np.argmax(self.class_scores)) + 1)

    @property
    def window_size(self) -> int:
        return window_size_from_norm(self.pairs[self.best_pair][0])


def window_size_from_norm(w_norm: float) -> int:
    """Bars covered by a normalized width: round half away from zero, clamped to [5, 16]."""
    w = round_half_away_from_zero(float(w_norm) * WINDOW)
    return int(min(max(w, MIN_WINDOW), WINDOW))


def activate(raw: np.ndarray) -> np.ndarray:
    """Sigmoid on the (w, c) logits and softmax on the class logits, shape (B, 12)."""
    raw = np.asarray(raw, dtype=np.float64)
    return np.concatenate(
        [sigmoid(raw[:, :BOX_OUTPUTS]), softmax(raw[:, BOX_OUTPUTS:], axis=1)], axis=1
    )


def predicted_labels(raw: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Class indices (0-7) and window sizes decoded from raw head values.

    The window size comes from the pair with the higher confidence.
    """
    values = activate(raw)
    classes = values[:, BOX_OUTPUTS:].argmax(axis=1)
    best = np.where(values[:, 3] > values[:, 1], 1, 0)
    w_norm = values[np.arange(len(values)), 2 * best]
    sizes = np.array([window_size_from_norm(w) for w in w_norm], dtype=np.int64)
    return classes, sizes


class DetectorModel:
    """
    The single-cell detector network.

    Args:
        architecture (Optional[DetectorArchitecture]): Network shape; defaults otherwise.
        seed: Seed (or `numpy.random.SeedSequence`) for the weight initialisation.
    """

    def __init__(self, architecture: Optional[DetectorArchitecture] = None, seed=None):
        self.architecture = architecture or DetectorArchitecture()
        rng = np.random.default_rng(default_seed() if seed is None else seed)
        self.graph = Sequential(self._build_layers(rng))
        logger.debug(
            "Built detector %s with %d parameters",
            self.architecture.widths,
            parameter_count(self.graph),
        )

    def _build_layers(self, rng: np.random.Generator) -> List[Layer]:
        arch = self.architecture
        layers: List[Layer] = []
        channels = arch.in_channels
        blocks = enumerate(zip(arch.widths, arch.kernels), start=1)
        for block, (width, kernel) in blocks:
            layers.append(
                Conv2D(f"conv{block}", channels, width, kernel, rng, arch.leaky_slope)
            )
            layers.append(
                BatchNorm2D(f"bn{block}", width, arch.bn_momentum, arch.bn_epsilon)
            )
            layers.append(LeakyReLU(f"act{block}", arch.leaky_slope))
            if block in arch.pool_after:
                layers.append(MaxPool2(f"pool{block}"))
            channels = width
        layers.append(Flatten("flatten"))
        layers.append(Dense("head", channels, N_OUTPUTS, rng))
        return layers

    def forward(self, x: np.ndarray, training: bool = False) -> np.ndarray:
        """
        Raw head values (before sigmoid and softmax).

        Args:
            x (np.ndarray): Inputs of shape (B, 4, 16, 16).
            training (bool): Batch statistics and running-stat updates in batch norm.

        Returns:
            np.ndarray: Shape (B, 12).

        Raises:
            ShapeError: If the input shape does not match the architecture.
        """
        x = np.asarray(x, dtype=np.float64)
        arch = self.architecture
        expected = (arch.in_channels, arch.window, arch.window)
        if x.ndim != 4 or x.shape[1:] != expected:
            raise ShapeError(f"Detector input must be (B, {expected}), got {x.shape}")
        return self.graph.forward(x, training=training)

    def backward(self, dout: np.ndarray) -> np.ndarray:
        return self.graph.backward(dout)

    def predict(self, x: np.ndarray) -> List[DetectorOutput]:
        """Decoded outputs in inference mode, one per sample."""
        return [DetectorOutput.from_activated(row) for row in activate(self.forward(x))]

    def parameters(self):
        return self.graph.named_parameters()

    def gradients(self) -> Dict[str, np.ndarray]:
        return dict(self.graph.named_gradients())

    def state_dict(self) -> Dict[str, np.ndarray]:
        return self.graph.state_dict()

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        self.graph.load_state_dict(state)

    def save(self, path_or_file: Union[str, os.PathLike, BinaryIO]) -> None:
        """Write weights and batch-norm statistics with the architecture in the header."""
        save_checkpoint(
            path_or_file,
            self.state_dict(),
            {"kind": CHECKPOINT_KIND, "architecture": self.architecture.to_dict()},
        )

    @classmethod
    def load(cls, path_or_file: Union[str, os.PathLike, BinaryIO]) -> "DetectorModel":
        """
        Rebuild a model from a checkpoint.

        Raises:
            FormatError: If the checkpoint is not a detector checkpoint or does not fit its architecture.
        """
        tensors, metadata = load_checkpoint(path_or_file)
        if metadata.get("kind") != CHECKPOINT_KIND or "architecture" not in metadata:
            raise FormatError("Checkpoint does not describe a detector")
        try:
            architecture = DetectorArchitecture.from_dict(metadata["architecture"])
            model = cls(architecture, seed=0)
            model.load_state_dict({k: v.astype(np.float64) for k, v in tensors.items()})
        except (TypeError, InvalidInput) as e:
            raise FormatError(f"Checkpoint does not fit its architecture: {e}") from e
        return model
