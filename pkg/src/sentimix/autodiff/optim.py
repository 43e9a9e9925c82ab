"""Parameters, initializers and in-place optimizers."""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .tensor import Tensor


class Parameter(Tensor):
    """A trainable leaf tensor with a name and optimizer state."""

    __slots__ = ("init", "trainable", "adam_m", "adam_v")

    def __init__(self, data, name: str, init: str = "given", trainable: bool = True):
        super().__init__(data, requires_grad=trainable, name=name)
        self.init = init
        self.trainable = trainable
        self.adam_m = None
        self.adam_v = None

    def __repr__(self):
        return f"Parameter({self.name}, shape={self.shape})"


def glorot_uniform(rng: np.random.Generator, shape, fan_in: int, fan_out: int) -> np.ndarray:
    limit = math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def zero_grad(params: Iterable[Parameter]):
    for p in params:
        p.grad = None


def grad_norm(params: Sequence[Parameter]) -> float:
    return math.sqrt(math.fsum(float(np.sum(p.grad * p.grad)) for p in params if p.grad is not None))


def clip_grad_norm(params: Sequence[Parameter], max_norm: float) -> float:
    """Rescale all gradients together so their global L2 norm is <= max_norm."""
    norm = grad_norm(params)
    if norm > max_norm > 0:
        scale = max_norm / norm
        for p in params:
            if p.grad is not None:
                p.grad *= scale
    return norm


def sgd_step(params: Iterable[Parameter], lr: float):
    for p in params:
        if p.trainable and p.grad is not None:
            p.data -= lr * p.grad


def adam_step(params: Iterable[Parameter], lr: float, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8, t: int = 1):
    """One bias-corrected Adam update; ``t`` counts steps from 1."""
    if t < 1:
        raise ValueError("Adam step counter starts at 1")
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for p in params:
        if not p.trainable or p.grad is None:
            continue
        if p.adam_m is None:
            p.adam_m = np.zeros_like(p.data)
            p.adam_v = np.zeros_like(p.data)
        p.adam_m *= beta1
        p.adam_m += (1.0 - beta1) * p.grad
        p.adam_v *= beta2
        p.adam_v += (1.0 - beta2) * p.grad * p.grad
        p.data -= lr * (p.adam_m / c1) / (np.sqrt(p.adam_v / c2) + eps)


class Adam:
    def __init__(self, params: Sequence[Parameter], lr: float = 1e-3, beta1: float = 0.9,
                 beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0

    def step(self):
        self.t += 1
        adam_step(self.params, self.lr, self.beta1, self.beta2, self.eps, self.t)


class SGD:
    def __init__(self, params: Sequence[Parameter], lr: float = 0.1):
        self.params = list(params)
        self.lr = lr

    def step(self):
        sgd_step(self.params, self.lr)


def make_optimizer(name: str, params, lr: float):
    if name == "adam":
        return Adam(params, lr)
    if name == "sgd":
        return SGD(params, lr)
    raise ValueError(f"unknown optimizer {name!r}")
