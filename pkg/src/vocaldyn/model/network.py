"""Multi-scale temporal CNN with self-attention for 10-class frame labeling.

Layer stack (frame rate preserved throughout):
  1. bin embedding: linear input_bins -> E (E = channels[0])
  2. stage 1: per-scale temporal conv E -> channels[0], concat, ReLU, mean pool
  3. stage 2: per-scale temporal conv -> channels[1], concat, ReLU, mean pool
  4. multi-head self-attention over time with residual
  5. linear head -> 10 logits per frame

Parameter count from the shape formulas (S = len(conv_scales), E = C1):
  embed: bins*E + E
  stage1: sum_k (k*E*C1 + C1)        stage2: sum_k (k*S*C1*C2 + C2)
  attention (D = S*C2, A = attention_dim): 3*(D*A + A) + A*D + D
  head: D*10 + 10
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..labeling import MASKED_SENTINEL, FrameLabelSequence
from .config import ModelConfig
from .layers import (
    attention_backward,
    attention_forward,
    attention_infer,
    avg_pool_backward,
    avg_pool_forward,
    conv1d_backward,
    conv1d_forward,
    linear_backward,
    linear_forward,
    relu_backward,
    relu_forward,
)

_POOL_WINDOW = 3


class UndefinedLossError(ValueError):
    """Loss requested with zero masked-in frames."""


@dataclass
class ModelParams:
    config: ModelConfig
    tensors: dict[str, np.ndarray]

    def __post_init__(self):
        expected = {name for name, _, _ in _tensor_specs(self.config)}
        if set(self.tensors) != expected:
            missing = expected - set(self.tensors)
            extra = set(self.tensors) - expected
            raise ValueError(f"tensor names mismatch (missing {missing}, extra {extra})")
        for name, shape, _ in _tensor_specs(self.config):
            if self.tensors[name].shape != shape:
                raise ValueError(f"{name}: expected shape {shape}, got {self.tensors[name].shape}")
            if not np.isfinite(self.tensors[name]).all():
                raise ValueError(f"{name}: non-finite values")

    @property
    def parameter_count(self) -> int:
        return sum(t.size for t in self.tensors.values())


def _tensor_specs(config: ModelConfig) -> list[tuple[str, tuple, int]]:
    """(name, shape, fan_in) for every tensor, in deterministic init order."""
    e = config.embed_dim
    c1, c2 = config.channels
    s = len(config.conv_scales)
    d = config.attention_input_dim
    a = config.attention_dim
    specs = [
        ("embed.weight", (config.input_bins, e), config.input_bins),
        ("embed.bias", (e,), 0),
    ]
    for k in config.conv_scales:
        specs.append((f"stage1.k{k}.weight", (k, e, c1), k * e))
        specs.append((f"stage1.k{k}.bias", (c1,), 0))
    for k in config.conv_scales:
        specs.append((f"stage2.k{k}.weight", (k, s * c1, c2), k * s * c1))
        specs.append((f"stage2.k{k}.bias", (c2,), 0))
    for name in ("wq", "wk", "wv"):
        specs.append((f"attn.{name}", (d, a), d))
        specs.append((f"attn.{name.replace('w', 'b')}", (a,), 0))
    specs.append(("attn.wo", (a, d), a))
    specs.append(("attn.bo", (d,), 0))
    specs.append(("head.weight", (d, config.classes), d))
    specs.append(("head.bias", (config.classes,), 0))
    return specs


def parameter_count(config: ModelConfig) -> int:
    return sum(int(np.prod(shape)) for _, shape, _ in _tensor_specs(config))


def init_model(config: ModelConfig, dtype=np.float32) -> ModelParams:
    """Fan-in-scaled uniform weights, zero biases, deterministic per seed."""
    rng = np.random.default_rng(config.seed)
    tensors = {}
    for name, shape, fan_in in _tensor_specs(config):
        if fan_in == 0:
            tensors[name] = np.zeros(shape, dtype=dtype)
        else:
            bound = np.sqrt(6.0 / fan_in)
            tensors[name] = rng.uniform(-bound, bound, size=shape).astype(dtype)
    return ModelParams(config=config, tensors=tensors)


def _check_input(config: ModelConfig, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features)
    if features.ndim != 2 or features.shape[1] != config.input_bins:
        raise ValueError(
            f"features must be frames x {config.input_bins}, got {features.shape}"
        )
    return features


def _forward_cached(params: ModelParams, features: np.ndarray):
    config = params.config
    t = params.tensors
    x = _check_input(config, features).astype(t["embed.weight"].dtype)
    caches = {}
    h, caches["embed"] = linear_forward(x, t["embed.weight"], t["embed.bias"])
    for stage in (1, 2):
        outs, convs = [], []
        for k in config.conv_scales:
            out, cache = conv1d_forward(h, t[f"stage{stage}.k{k}.weight"], t[f"stage{stage}.k{k}.bias"])
            outs.append(out)
            convs.append(cache)
        caches[f"conv{stage}"] = convs
        h = np.concatenate(outs, axis=1)
        h, caches[f"relu{stage}"] = relu_forward(h)
        h, caches[f"pool{stage}"] = avg_pool_forward(h, _POOL_WINDOW)
    h, caches["attn"] = attention_forward(h, t, "attn", config.attention_heads)
    logits, caches["head"] = linear_forward(h, t["head.weight"], t["head.bias"])
    return logits, caches


def forward(params: ModelParams, features: np.ndarray) -> np.ndarray:
    """Per-frame logits, (frames, 10). Deterministic in (params, input)."""
    config = params.config
    t = params.tensors
    x = _check_input(config, features).astype(t["embed.weight"].dtype)
    h = x @ t["embed.weight"] + t["embed.bias"]
    for stage in (1, 2):
        h = np.concatenate(
            [
                conv1d_forward(h, t[f"stage{stage}.k{k}.weight"], t[f"stage{stage}.k{k}.bias"])[0]
                for k in config.conv_scales
            ],
            axis=1,
        )
        h = np.maximum(h, 0)
        h, _ = avg_pool_forward(h, _POOL_WINDOW)
    h = attention_infer(h, t, "attn", config.attention_heads)
    return h @ t["head.weight"] + t["head.bias"]


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def _loss_and_dlogits(
    logits: np.ndarray, labels: FrameLabelSequence, class_weights: np.ndarray | None = None
):
    if len(logits) != labels.frames:
        raise ValueError(f"{len(logits)} logit frames vs {labels.frames} label frames")
    mask = labels.mask
    if not mask.any():
        raise UndefinedLossError("all frames are masked out; loss is undefined")
    idx = np.flatnonzero(mask)
    cls = labels.class_index[idx].astype(int)
    probs = _softmax(logits[idx])
    picked = np.clip(probs[np.arange(len(idx)), cls], 1e-300, None)
    weights = np.ones(len(idx)) if class_weights is None else class_weights[cls]
    total = weights.sum()
    loss = float((weights * -np.log(picked)).sum() / total)
    dlogits = np.zeros_like(logits)
    grad = probs
    grad[np.arange(len(idx)), cls] -= 1.0
    dlogits[idx] = grad * (weights / total)[:, None]
    return loss, dlogits


def masked_cross_entropy(logits: np.ndarray, labels: FrameLabelSequence) -> float:
    """Mean -log softmax probability of the labeled class over masked-in frames."""
    loss, _ = _loss_and_dlogits(np.asarray(logits, dtype=np.float64), labels)
    return loss


def backward(
    params: ModelParams,
    features: np.ndarray,
    labels: FrameLabelSequence,
    class_weights: np.ndarray | None = None,
):
    """Analytic gradients of the masked loss: (loss, grads keyed like tensors)."""
    loss, grads, _ = backward_with_logits(params, features, labels, class_weights)
    return loss, grads


def backward_with_logits(
    params: ModelParams,
    features: np.ndarray,
    labels: FrameLabelSequence,
    class_weights: np.ndarray | None = None,
):
    config = params.config
    t = params.tensors
    logits, caches = _forward_cached(params, features)
    loss, dlogits = _loss_and_dlogits(logits, labels, class_weights)
    grads = {}
    dh, grads["head.weight"], grads["head.bias"] = linear_backward(
        dlogits.astype(logits.dtype), caches["head"], t["head.weight"]
    )
    dh, attn_grads = attention_backward(dh, caches["attn"], t, "attn")
    grads.update(attn_grads)
    c1, c2 = config.channels
    for stage, width in ((2, c2), (1, c1)):
        dh = avg_pool_backward(dh, caches[f"pool{stage}"])
        dh = relu_backward(dh, caches[f"relu{stage}"])
        dprev = None
        for i, k in enumerate(config.conv_scales):
            dout = dh[:, i * width: (i + 1) * width]
            dx, dw, db = conv1d_backward(dout, caches[f"conv{stage}"][i])
            grads[f"stage{stage}.k{k}.weight"] = dw
            grads[f"stage{stage}.k{k}.bias"] = db
            dprev = dx if dprev is None else dprev + dx
        dh = dprev
    _, grads["embed.weight"], grads["embed.bias"] = linear_backward(
        dh, caches["embed"], t["embed.weight"]
    )
    return loss, grads, logits


def chunk_spans(total_frames: int, sequence_length: int) -> list[tuple[int, int]]:
    """Abutting [start, end) windows covering every frame exactly once."""
    return [
        (start, min(start + sequence_length, total_frames))
        for start in range(0, max(total_frames, 1), sequence_length)
    ]


def _pad_chunk(values: np.ndarray, sequence_length: int) -> np.ndarray:
    if len(values) == sequence_length:
        return values
    pad = np.zeros((sequence_length - len(values), values.shape[1]), dtype=values.dtype)
    return np.concatenate([values, pad])


def pad_labels(labels: FrameLabelSequence, sequence_length: int) -> FrameLabelSequence:
    if labels.frames == sequence_length:
        return labels
    pad = sequence_length - labels.frames
    return FrameLabelSequence(
        class_index=np.concatenate(
            [labels.class_index, np.full(pad, MASKED_SENTINEL, dtype=np.uint8)]
        ),
        mask=np.concatenate([labels.mask, np.zeros(pad, dtype=bool)]),
        hop_seconds=labels.hop_seconds,
    )


def predict(params: ModelParams, features) -> np.ndarray:
    """Per-frame argmax class over abutting sequence_length windows; logit
    ties resolve to the lowest class index."""
    values = features.values if hasattr(features, "values") else np.asarray(features)
    values = _check_input(params.config, values)
    seq = params.config.sequence_length
    out = np.empty(len(values), dtype=np.int64)
    for start, end in chunk_spans(len(values), seq):
        if end <= start:
            continue
        logits = forward(params, _pad_chunk(values[start:end], seq))
        out[start:end] = np.argmax(logits[: end - start], axis=1)
    return out
