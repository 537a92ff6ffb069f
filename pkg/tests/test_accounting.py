import numpy as np
import pytest

from echo_cgc.accounting import (
    CostModel,
    RoundMetrics,
    message_bits,
    raw_round_bits,
    round_ratio,
)
from echo_cgc.messages import EchoMessage, RawGradient


class TestCostModel:
    def test_network_defaults(self):
        model = CostModel.for_network(100)
        assert model.bits_per_scalar == 64
        assert model.bits_per_id == 7  # ceil(log2 100)
        assert model.header_bits == 0

    def test_small_networks(self):
        assert CostModel.for_network(1).bits_per_id == 1
        assert CostModel.for_network(2).bits_per_id == 1
        assert CostModel.for_network(3).bits_per_id == 2
        assert CostModel.for_network(1024).bits_per_id == 10

    def test_validation(self):
        with pytest.raises(ValueError):
            CostModel(bits_per_scalar=0)
        with pytest.raises(ValueError):
            CostModel(bits_per_id=0)
        with pytest.raises(ValueError):
            CostModel(header_bits=-1)


class TestMessageBits:
    def test_raw_high_dimensional(self):
        model = CostModel.for_network(100)
        assert message_bits(model, RawGradient(np.zeros(10_000)), 10_000) == 640_000

    def test_echo(self):
        model = CostModel.for_network(100)
        msg = EchoMessage(1.5, np.ones(3), (1, 2, 3))
        assert message_bits(model, msg, 10_000) == 64 * 4 + 3 * 7  # 277

    def test_raw_minimal(self):
        model = CostModel.for_network(2)
        assert message_bits(model, RawGradient(np.zeros(1)), 1) == 64

    def test_header_counted(self):
        model = CostModel(bits_per_scalar=32, bits_per_id=4, header_bits=16)
        assert message_bits(model, RawGradient(np.zeros(10)), 10) == 16 + 320
        assert message_bits(model, EchoMessage(1.0, np.ones(2), (1, 2)), 10) == 16 + 96 + 8

    def test_rejects_non_messages(self):
        with pytest.raises(TypeError):
            message_bits(CostModel.for_network(4), object(), 10)


def _metrics(bits):
    return RoundMetrics(0, bits, 0, 0, frozenset(), 0.0)


class TestRoundRatio:
    def test_all_raw_is_unity(self):
        model = CostModel.for_network(10)
        n, d = 10, 100
        assert round_ratio(_metrics(raw_round_bits(model, n, d)), model, n, d) == 1.0

    def test_high_dimensional_example(self):
        # 99 echoes of 277 bits + one raw gradient out of n=100, d=1e4.
        model = CostModel.for_network(100)
        bits = 640_000 + 99 * 277
        ratio = round_ratio(_metrics(bits), model, 100, 10_000)
        assert ratio == pytest.approx(1 / 100 + 99 * 277 / (100 * 640_000), rel=1e-12)
        assert ratio == pytest.approx(0.0104, abs=1e-4)

    def test_echo_ratio_vanishes_with_dimension(self):
        model = CostModel.for_network(100)
        msg = EchoMessage(1.0, np.ones(50), tuple(range(1, 51)))
        ratios = [
            message_bits(model, msg, d) / (model.bits_per_scalar * d)
            for d in (10**3, 10**5, 10**7)
        ]
        assert ratios[0] > ratios[1] > ratios[2]
        assert ratios[2] < 1e-4
