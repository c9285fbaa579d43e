"""Distance-scored attention over sequences of SPD matrices.

Queries, keys and values are produced by three SPD FC layers (Log-Euclidean
or G-invariant). Scores are ``-c1 d(q, k) - c2``; the output for each query is
the Log-Euclidean weighted Frechet mean of the values under the row-softmax
of its scores.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import softmax

from .errors import DimensionError
from .gi import FcLayerGi, fc_layer_gi_forward, gi_dist
from .matkernels import as_spd
from .spd_pem import LOG_EUCLIDEAN, FcLayerLe, fc_layer_le_forward, pem_dist, wfm_le

FcLayer = Union[FcLayerLe, FcLayerGi]


def _softplus(x: float) -> float:
    return float(np.logaddexp(0.0, x))


@dataclass(frozen=True)
class AttentionBlock:
    """Single-head attention block.

    ``c1_raw`` is unconstrained; the score scale is ``c1 = softplus(c1_raw)``.
    All three layers must be of the same variant and share input and output
    dimensions.
    """

    fc_q: FcLayer
    fc_k: FcLayer
    fc_v: FcLayer
    c1_raw: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        layers = (self.fc_q, self.fc_k, self.fc_v)
        kinds = {type(f) for f in layers}
        if len(kinds) != 1 or not kinds <= {FcLayerLe, FcLayerGi}:
            raise TypeError("fc_q, fc_k and fc_v must all be FcLayerLe or all FcLayerGi")
        if len({(f.m_in, f.m_out) for f in layers}) != 1:
            raise DimensionError("query, key and value layers must share (m_in, m_out)")

    @property
    def variant(self) -> str:
        return "le" if isinstance(self.fc_q, FcLayerLe) else "gi"

    @property
    def c1(self) -> float:
        return _softplus(self.c1_raw)

    @property
    def m_in(self) -> int:
        return self.fc_q.m_in

    def project(self, layer: FcLayer, x) -> np.ndarray:
        if isinstance(layer, FcLayerLe):
            return fc_layer_le_forward(layer, x)
        return fc_layer_gi_forward(layer, x)

    def distance(self, q, z) -> float:
        if self.variant == "le":
            return pem_dist(LOG_EUCLIDEAN, q, z)
        return gi_dist(as_spd(q), as_spd(z))


def f_att(block: AttentionBlock, q, z) -> float:
    return -block.c1 * block.distance(q, z) - block.c2


def attention_scores(block: AttentionBlock, queries: Sequence[np.ndarray], keys: Sequence[np.ndarray]) -> np.ndarray:
    return np.array([[f_att(block, q, z) for z in keys] for q in queries])


def attention_weights(scores: np.ndarray) -> np.ndarray:
    """Row-wise softmax (max-subtracted)."""
    return softmax(np.asarray(scores, dtype=np.float64), axis=1)


def _check_sequence(block: AttentionBlock, seq) -> list[np.ndarray]:
    if len(seq) == 0:
        raise ValueError("attention needs a nonempty sequence")
    out = []
    for i, x in enumerate(seq):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (block.m_in, block.m_in):
            raise DimensionError(f"token {i} has shape {x.shape}, expected {(block.m_in, block.m_in)}")
        out.append(x)
    return out


def attention_forward(block: AttentionBlock, seq: Sequence[np.ndarray], return_weights: bool = False):
    seq = _check_sequence(block, seq)
    queries = [block.project(block.fc_q, x) for x in seq]
    keys = [block.project(block.fc_k, x) for x in seq]
    values = [block.project(block.fc_v, x) for x in seq]
    weights = attention_weights(attention_scores(block, queries, keys))
    outputs = []
    for row in weights:
        # keys whose weight underflowed to zero contribute nothing to the mean
        keep = np.flatnonzero(row > 0)
        w = row[keep]
        outputs.append(wfm_le([values[j] for j in keep], w / w.sum()))
    if return_weights:
        return outputs, weights
    return outputs
