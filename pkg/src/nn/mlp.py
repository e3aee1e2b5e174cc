# src/nn/mlp.py

from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..autodiff.tensor import Tensor, add, as_tensor, matmul, relu, reshape
from ..utils.errors import ShapeError

DEFAULT_HIDDEN: Tuple[int, ...] = (32, 32, 32, 32)


class Mlp:
    """
    Feed-forward network with ReLU hidden layers and one raw logit output.

    Attributes:
        widths (Tuple[int, ...]): input, hidden..., 1
        weights (List[Tensor]): One (fan_in, fan_out) matrix per layer
        biases (List[Tensor]): One (fan_out,) vector per layer
        activation (str): Hidden activation tag
    """

    def __init__(self, widths: Sequence[int], weights: Sequence[np.ndarray],
                 biases: Sequence[np.ndarray], activation: str = 'relu'):
        """
        Raises:
            ValueError: If the width chain and the parameter shapes disagree,
                or a parameter is not finite
        """
        self.widths = tuple(int(w) for w in widths)
        if len(self.widths) < 2 or self.widths[-1] != 1:
            raise ValueError(f"Width chain must end in a single logit: {self.widths}")
        if activation != 'relu':
            raise ValueError(f"Unsupported activation: {activation}")
        self.activation = activation
        if len(weights) != len(self.widths) - 1 or len(biases) != len(weights):
            raise ValueError("One weight matrix and one bias per layer required")

        self.weights: List[Tensor] = []
        self.biases: List[Tensor] = []
        for i, (w, b) in enumerate(zip(weights, biases)):
            w = np.asarray(w, dtype=np.float64)
            b = np.asarray(b, dtype=np.float64)
            if w.shape != (self.widths[i], self.widths[i + 1]) or b.shape != (self.widths[i + 1],):
                raise ValueError(f"Layer {i} has shapes {w.shape}, {b.shape}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"Layer {i} has non-finite parameters")
            self.weights.append(Tensor(w, requires_grad=True))
            self.biases.append(Tensor(b, requires_grad=True))

    @property
    def input_dim(self) -> int:
        return self.widths[0]

    def parameters(self) -> List[Tensor]:
        params: List[Tensor] = []
        for w, b in zip(self.weights, self.biases):
            params.extend((w, b))
        return params

    def forward(self, batch) -> Tensor:
        """
        Logits for a batch of input rows.

        Args:
            batch: (n, input_dim) inputs

        Returns:
            (n,) logits

        Raises:
            ShapeError: If the last dimension is not input_dim
        """
        batch = as_tensor(batch)
        if batch.ndim != 2 or batch.shape[1] != self.input_dim:
            raise ShapeError(f"Expected (n, {self.input_dim}) input, got {batch.shape}")
        hidden = batch
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            hidden = add(matmul(hidden, w), b)
            if i < last:
                hidden = relu(hidden)
        return reshape(hidden, (batch.shape[0],))

    __call__ = forward

    def copy(self) -> 'Mlp':
        return Mlp(self.widths, [w.data.copy() for w in self.weights],
                   [b.data.copy() for b in self.biases], self.activation)

    def to_dict(self) -> dict:
        return {'widths': list(self.widths), 'activation': self.activation,
                'weights': [w.data.tolist() for w in self.weights],
                'biases': [b.data.tolist() for b in self.biases]}

    @classmethod
    def from_dict(cls, payload: dict) -> 'Mlp':
        widths = payload['widths']
        weights = [np.asarray(w, dtype=np.float64).reshape(widths[i], widths[i + 1])
                   for i, w in enumerate(payload['weights'])]
        return cls(widths, weights, payload['biases'], payload.get('activation', 'relu'))

    def __repr__(self) -> str:
        return f"Mlp(widths={self.widths})"


def mlp_init(input_dim: int, hidden: Sequence[int] = DEFAULT_HIDDEN,
             seed: Optional[int] = None, rng: Optional[np.random.Generator] = None) -> Mlp:
    """
    He-initialised MLP: weights ~ N(0, 2/fan_in), zero biases.

    Args:
        input_dim: Number of inputs (>= 1)
        hidden: Hidden layer widths; empty gives an affine map
        seed: Seed for a fresh generator (ignored when `rng` is given)
        rng: Generator to draw from, shared by callers building several nets

    Raises:
        ValueError: If input_dim < 1
    """
    if input_dim < 1:
        raise ValueError("input_dim must be at least 1")
    rng = rng if rng is not None else np.random.default_rng(seed)
    widths = (input_dim,) + tuple(hidden) + (1,)
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return Mlp(widths, weights, biases)


def mlp_forward(model: Mlp, batch) -> Tensor:
    return model.forward(batch)
