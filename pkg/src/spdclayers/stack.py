"""Layered-structure geometry: layers, boundary positions, scaling."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .materials import Material


@dataclass(frozen=True)
class Layer:
    material: Material
    length: float   # metres

    def __post_init__(self):
        if not (self.length > 0.0):
            raise InvalidArgument(f"layer length must be positive, got {self.length}")


@dataclass(frozen=True)
class Stack:
    """Ordered layers l = 1..N surrounded by air half-spaces; z_0 fixed at 0."""

    layers: tuple

    def __post_init__(self):
        if len(self.layers) == 0:
            raise InvalidArgument("stack needs at least one layer")
        object.__setattr__(self, "layers", tuple(self.layers))

    @property
    def n_layers(self) -> int:
        return len(self.layers)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([ly.length for ly in self.layers])

    @property
    def boundaries(self) -> np.ndarray:
        """z_0 .. z_N with z_0 = 0; z_l - z_{l-1} = L_l by construction."""
        return np.concatenate([[0.0], np.cumsum(self.lengths)])

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())

    def nonlinear_layers(self) -> list[int]:
        """0-based indices of layers with a nonzero d tensor."""
        return [i for i, ly in enumerate(self.layers) if ly.material.is_nonlinear]

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        for ly in self.layers:
            h.update(ly.material.name.encode())
            h.update(np.float64(ly.length).tobytes())
        return h.hexdigest()[:16]


def build_ab_stack(material_a: Material, material_b: Material, n_layers: int,
                   l_a: float, l_b: float) -> Stack:
    """Alternating a,b,a,...,a stack with an odd number of layers.

    (N+1)/2 layers of material a (lengths l_a) sandwich (N-1)/2 layers of
    material b (lengths l_b).
    """
    if n_layers < 1 or n_layers % 2 == 0:
        raise InvalidArgument(f"layer count must be a positive odd integer, got {n_layers}")
    if not (l_a > 0.0) or not (l_b > 0.0):
        raise InvalidArgument("layer lengths must be positive")
    layers = []
    for i in range(n_layers):
        if i % 2 == 0:
            layers.append(Layer(material_a, l_a))
        else:
            layers.append(Layer(material_b, l_b))
    return Stack(tuple(layers))


def scale_stack(stack: Stack, s: float) -> Stack:
    """Multiply every layer length by s; materials unchanged."""
    if not (s > 0.0):
        raise InvalidArgument(f"scale factor must be positive, got {s}")
    return Stack(tuple(Layer(ly.material, ly.length * s) for ly in stack.layers))
