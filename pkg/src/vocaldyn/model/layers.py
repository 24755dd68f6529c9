"""Primitive network layers with explicit forward caches and backward passes.

Everything operates on (frames, channels) arrays. Temporal layers replicate
edge frames for padding so the frame rate is preserved end to end and a
constant input yields a constant output at every frame.
"""

from __future__ import annotations

import numpy as np


def _replicate_pad(x: np.ndarray, left: int, right: int) -> np.ndarray:
    return np.concatenate([np.repeat(x[:1], left, axis=0), x, np.repeat(x[-1:], right, axis=0)])


def _fold_pad_gradient(dpad: np.ndarray, left: int, right: int) -> np.ndarray:
    """Adjoint of _replicate_pad: padded positions fold onto the edge frames."""
    frames = len(dpad) - left - right
    dx = dpad[left: left + frames].copy()
    if left:
        dx[0] += dpad[:left].sum(axis=0)
    if right:
        dx[-1] += dpad[left + frames:].sum(axis=0)
    return dx


def conv1d_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray):
    """Temporal correlation, frame rate preserved.

    x: (frames, c_in); weight: (kernel, c_in, c_out); bias: (c_out,).
    """
    kernel = weight.shape[0]
    left = kernel // 2
    right = kernel - 1 - left
    xpad = _replicate_pad(x, left, right)
    frames = len(x)
    out = np.tile(bias, (frames, 1))
    for dt in range(kernel):
        out += xpad[dt: dt + frames] @ weight[dt]
    return out, (xpad, weight, left, right, frames)


def conv1d_backward(dout: np.ndarray, cache):
    xpad, weight, left, right, frames = cache
    kernel = weight.shape[0]
    dweight = np.empty_like(weight)
    dpad = np.zeros_like(xpad)
    for dt in range(kernel):
        dweight[dt] = xpad[dt: dt + frames].T @ dout
        dpad[dt: dt + frames] += dout @ weight[dt].T
    return _fold_pad_gradient(dpad, left, right), dweight, dout.sum(axis=0)


def avg_pool_forward(x: np.ndarray, window: int):
    """Stride-1 temporal mean over `window` frames, replicate-padded."""
    left = window // 2
    right = window - 1 - left
    xpad = _replicate_pad(x, left, right)
    frames = len(x)
    out = np.zeros_like(x)
    for dt in range(window):
        out += xpad[dt: dt + frames]
    return out / window, (window, left, right, frames, x.shape)


def avg_pool_backward(dout: np.ndarray, cache):
    window, left, right, frames, shape = cache
    dpad = np.zeros((frames + left + right, shape[1]), dtype=dout.dtype)
    share = dout / window
    for dt in range(window):
        dpad[dt: dt + frames] += share
    return _fold_pad_gradient(dpad, left, right)


def relu_forward(x: np.ndarray):
    out = np.maximum(x, 0)
    return out, x > 0


def relu_backward(dout: np.ndarray, positive: np.ndarray):
    return dout * positive


def linear_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray):
    return x @ weight + bias, x


def linear_backward(dout: np.ndarray, x: np.ndarray, weight: np.ndarray):
    return dout @ weight.T, x.T @ dout, dout.sum(axis=0)


def _softmax_rows(scores: np.ndarray) -> np.ndarray:
    shifted = scores - scores.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def attention_forward(x: np.ndarray, params: dict, prefix: str, heads: int):
    """Multi-head self-attention over time with a residual connection.

    y = x + (concat_h softmax(Q_h K_h^T / sqrt(d_h)) V_h) W_o + b_o
    """
    q, _ = linear_forward(x, params[f"{prefix}.wq"], params[f"{prefix}.bq"])
    k, _ = linear_forward(x, params[f"{prefix}.wk"], params[f"{prefix}.bk"])
    v, _ = linear_forward(x, params[f"{prefix}.wv"], params[f"{prefix}.bv"])
    dim = q.shape[1]
    d_head = dim // heads
    scale = 1.0 / np.sqrt(d_head)
    ctx = np.empty_like(q)
    weights = []
    for h in range(heads):
        sl = slice(h * d_head, (h + 1) * d_head)
        a = _softmax_rows((q[:, sl] @ k[:, sl].T) * scale)
        ctx[:, sl] = a @ v[:, sl]
        weights.append(a)
    out, _ = linear_forward(ctx, params[f"{prefix}.wo"], params[f"{prefix}.bo"])
    return x + out, (x, q, k, v, ctx, weights, scale, heads, d_head)


def attention_backward(dy: np.ndarray, cache, params: dict, prefix: str):
    x, q, k, v, ctx, weights, scale, heads, d_head = cache
    grads = {}
    dctx, grads[f"{prefix}.wo"], grads[f"{prefix}.bo"] = linear_backward(
        dy, ctx, params[f"{prefix}.wo"]
    )
    dq = np.empty_like(q)
    dk = np.empty_like(k)
    dv = np.empty_like(v)
    for h in range(heads):
        sl = slice(h * d_head, (h + 1) * d_head)
        a = weights[h]
        dv[:, sl] = a.T @ dctx[:, sl]
        da = dctx[:, sl] @ v[:, sl].T
        dscores = a * (da - (da * a).sum(axis=1, keepdims=True))
        dq[:, sl] = (dscores @ k[:, sl]) * scale
        dk[:, sl] = (dscores.T @ q[:, sl]) * scale
    dx = dy.copy()  # residual branch
    for name, dout in (("q", dq), ("k", dk), ("v", dv)):
        dpart, grads[f"{prefix}.w{name}"], grads[f"{prefix}.b{name}"] = linear_backward(
            dout, x, params[f"{prefix}.w{name}"]
        )
        dx += dpart
    return dx, grads


def attention_infer(x: np.ndarray, params: dict, prefix: str, heads: int, block: int = 1024):
    """Cache-free attention for inference; query rows processed in blocks so
    long sequences never materialize the full frames x frames weights."""
    q, _ = linear_forward(x, params[f"{prefix}.wq"], params[f"{prefix}.bq"])
    k, _ = linear_forward(x, params[f"{prefix}.wk"], params[f"{prefix}.bk"])
    v, _ = linear_forward(x, params[f"{prefix}.wv"], params[f"{prefix}.bv"])
    dim = q.shape[1]
    d_head = dim // heads
    scale = 1.0 / np.sqrt(d_head)
    ctx = np.empty_like(q)
    for h in range(heads):
        sl = slice(h * d_head, (h + 1) * d_head)
        for start in range(0, len(x), block):
            rows = slice(start, min(start + block, len(x)))
            a = _softmax_rows((q[rows, sl] @ k[:, sl].T) * scale)
            ctx[rows, sl] = a @ v[:, sl]
    out, _ = linear_forward(ctx, params[f"{prefix}.wo"], params[f"{prefix}.bo"])
    return x + out
