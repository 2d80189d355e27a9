from .gaf import (
    GafTensor,
    decode_tensor,
    encode_batch,
    encode_features,
    encode_window,
    gaf_decode_diagonal,
    gaf_encode,
    gaf_encode_angular,
    minmax_normalize,
    window_features,
)
from .dtw import (
    dtw_distance,
    dtw_distance_batch,
    multichannel_dtw,
    multichannel_dtw_batch,
    normalized_channels,
)

__all__ = [
    "GafTensor",
    "decode_tensor",
    "encode_batch",
    "encode_features",
    "encode_window",
    "gaf_decode_diagonal",
    "gaf_encode",
    "gaf_encode_angular",
    "minmax_normalize",
    "window_features",
    "dtw_distance",
    "dtw_distance_batch",
    "multichannel_dtw",
    "multichannel_dtw_batch",
    "normalized_channels",
]
