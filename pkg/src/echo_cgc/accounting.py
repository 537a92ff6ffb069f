"""Bit-level communication accounting.

The baseline (every worker broadcasting a raw gradient) costs
n * d * bits_per_scalar per round; an echo message costs one scalar for
the norm ratio, one per coefficient, and one compact ID per referenced
worker.  The defaults (64-bit scalars, ceil(log2 n)-bit IDs, no header)
are configuration, not ground truth: only the asymptotic O(d)-vs-O(n)
gap is intrinsic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .messages import EchoMessage, RawGradient

__all__ = [
    "CostModel",
    "RoundMetrics",
    "message_bits",
    "round_ratio",
    "raw_round_bits",
]


@dataclass(frozen=True)
class CostModel:
    """Per-message bit costs."""

    bits_per_scalar: int = 64
    bits_per_id: int = 8
    header_bits: int = 0

    def __post_init__(self):
        if self.bits_per_scalar <= 0:
            raise ValueError("bits_per_scalar must be positive")
        if self.bits_per_id <= 0:
            raise ValueError("bits_per_id must be positive")
        if self.header_bits < 0:
            raise ValueError("header_bits must be >= 0")

    @classmethod
    def for_network(cls, n, bits_per_scalar=64, header_bits=0):
        """Defaults for an n-worker network: ceil(log2 n)-bit worker IDs."""
        if n < 1:
            raise ValueError("need at least one worker")
        return cls(
            bits_per_scalar=bits_per_scalar,
            bits_per_id=max(1, math.ceil(math.log2(n))) if n > 1 else 1,
            header_bits=header_bits,
        )


@dataclass(frozen=True)
class RoundMetrics:
    """Per-round record emitted by the protocol engine.

    echo_count is the number of echo messages sent (n*); ball_count is
    the number of fault-free sampled gradients inside the echo ball
    (n_B); distance_sq is ||w - w*||^2 after the round's update.
    """

    round_index: int
    bits_sent: int
    echo_count: int
    ball_count: int
    detections: frozenset[int]
    distance_sq: float


def message_bits(model, msg, d):
    """Bits on the air for one message under the given cost model."""
    if isinstance(msg, RawGradient):
        return model.header_bits + d * model.bits_per_scalar
    if isinstance(msg, EchoMessage):
        return (
            model.header_bits
            + model.bits_per_scalar * (1 + msg.coeffs.size)
            + len(msg.ids) * model.bits_per_id
        )
    raise TypeError(f"not a protocol message: {type(msg).__name__}")


def raw_round_bits(model, n, d):
    """Baseline round cost: n raw gradients."""
    return n * (model.header_bits + d * model.bits_per_scalar)


def round_ratio(metrics, model, n, d):
    """Round traffic as a fraction of the all-raw baseline."""
    return metrics.bits_sent / raw_round_bits(model, n, d)
