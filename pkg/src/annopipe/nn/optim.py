"""First-order optimizers over ParamSet parameters."""

from __future__ import annotations

import numpy as np


class SGD:
    def __init__(self, params, lr=0.1):
        self.params = list(params)
        self.lr = lr

    def step(self):
        for param in self.params:
            if param.grad is not None:
                param.data = param.data - self.lr * param.grad
            param.zero_grad()


class Adam:
    def __init__(self, params, lr=0.002, beta1=0.9, beta2=0.999, eps=1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self):
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for i, param in enumerate(self.params):
            if param.grad is not None:
                g = param.grad
                self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
                self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
                m_hat = self.m[i] / b1t
                v_hat = self.v[i] / b2t
                param.data = param.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            param.zero_grad()


def make_optimizer(scheme: str, params, lr: float):
    if scheme == "sgd":
        return SGD(params, lr=lr)
    if scheme == "adam":
        return Adam(params, lr=lr)
    raise ValueError(f"unknown optimizer scheme {scheme!r}")
