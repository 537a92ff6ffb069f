"""Wire messages a worker can broadcast in its TDMA slot.

A sender transmits either its raw local gradient (d floats) or a
compact echo: the magnitude ratio k relative to its echo gradient, the
projection coefficients, and the ascending list of worker IDs whose
stored raw gradients span the projection.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = ["RawGradient", "EchoMessage", "Message"]


@dataclass(frozen=True, eq=False)
class RawGradient:
    payload: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "payload", np.ascontiguousarray(self.payload, dtype=np.float64)
        )
        if self.payload.ndim != 1:
            raise ValueError("raw gradient payload must be a 1-d vector")


@dataclass(frozen=True, eq=False)
class EchoMessage:
    k: float
    coeffs: np.ndarray
    ids: tuple[int, ...]

    def __post_init__(self):
        k = float(self.k)
        object.__setattr__(self, "k", k)
        object.__setattr__(
            self, "coeffs", np.ascontiguousarray(self.coeffs, dtype=np.float64)
        )
        ids = self.ids
        if type(ids) is not tuple:
            ids = tuple(int(i) for i in ids)
            object.__setattr__(self, "ids", ids)
        if not (0.0 < k < np.inf):
            raise ValueError("norm ratio k must be a positive finite scalar")
        if len(ids) == 0:
            raise ValueError("echo message must reference at least one worker")
        if any(b <= a for a, b in zip(ids, ids[1:])):
            raise ValueError("referenced worker IDs must be strictly ascending")
        if self.coeffs.ndim != 1 or self.coeffs.size != len(ids):
            raise ValueError("need exactly one coefficient per referenced worker")


Message = Union[RawGradient, EchoMessage]
