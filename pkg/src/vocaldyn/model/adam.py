"""Adam parameter updates with per-tensor moment state."""

from __future__ import annotations

import numpy as np

from .config import TrainConfig


class AdamState:
    def __init__(self, tensors: dict[str, np.ndarray]):
        self.m = {name: np.zeros_like(t, dtype=np.float64) for name, t in tensors.items()}
        self.v = {name: np.zeros_like(t, dtype=np.float64) for name, t in tensors.items()}
        self.step_count = 0

    def apply(self, tensors: dict[str, np.ndarray], grads: dict[str, np.ndarray], cfg: TrainConfig):
        self.step_count += 1
        t = self.step_count
        bias1 = 1.0 - cfg.beta1**t
        bias2 = 1.0 - cfg.beta2**t
        for name, grad in grads.items():
            g = grad.astype(np.float64)
            self.m[name] = cfg.beta1 * self.m[name] + (1.0 - cfg.beta1) * g
            self.v[name] = cfg.beta2 * self.v[name] + (1.0 - cfg.beta2) * g * g
            m_hat = self.m[name] / bias1
            v_hat = self.v[name] / bias2
            update = cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
            tensors[name] = (tensors[name].astype(np.float64) - update).astype(tensors[name].dtype)
