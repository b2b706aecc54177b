"""Single-neuron ReLU network used on the classical side of the hybrid
experiment: forward pass, input gradients for the kick, and SGD updates."""

from __future__ import annotations

import numpy as np

__all__ = ["ClassicalNet"]


def _relu(z):
    return np.maximum(z, 0.0)


def _relu_prime(z):
    return (z > 0.0).astype(float)


class ClassicalNet:
    """y = relu(w . x + b) with squared-error loss (y - target)^2."""

    def __init__(self, weights, bias: float = 0.0):
        self.weights = np.asarray(weights, dtype=float).copy()
        self.bias = float(bias)

    def forward(self, x) -> float:
        return float(_relu(self.weights @ np.asarray(x) + self.bias))

    def input_gradient(self, x, target: float) -> np.ndarray:
        """dL/dx at the point x; feeds the linear phase kick on the quantum side."""
        x = np.asarray(x, dtype=float)
        pre = self.weights @ x + self.bias
        err = 2.0 * (_relu(pre) - target)
        return err * _relu_prime(pre) * self.weights

    def param_gradients(self, x, target: float):
        x = np.asarray(x, dtype=float)
        pre = self.weights @ x + self.bias
        err = 2.0 * (_relu(pre) - target) * _relu_prime(pre)
        return err * x, err

    def sgd_update(self, x, target: float, lr: float) -> None:
        gw, gb = self.param_gradients(x, target)
        self.weights -= lr * gw
        self.bias -= lr * gb

    def loss(self, x, target: float) -> float:
        return (self.forward(x) - target) ** 2
