"""Shared test fixtures and the literal per-worker reference engine."""

from dataclasses import dataclass

import numpy as np
import pytest

from echo_cgc.accounting import CostModel, RoundMetrics, message_bits
from echo_cgc.cost import sample_gradients
from echo_cgc.geometry import GradientBasis
from echo_cgc.protocol import (
    AdversaryStrategy,
    RoundContext,
    ServerSlotTable,
    WorkerState,
    adversary_message,
    cgc_filter,
    server_receive,
    worker_overhear,
    worker_slot_action,
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@dataclass
class NaiveRoundResult:
    """Everything the literal engine saw, for white-box assertions."""

    w_next: np.ndarray
    metrics: RoundMetrics
    messages: dict[int, object]
    table: ServerSlotTable
    honest_gradients: dict[int, np.ndarray]
    workers: dict[int, WorkerState]


def naive_run_round(
    w,
    cost,
    noise,
    n,
    f,
    eta,
    r,
    rng,
    adversary=None,
    adversary_rng=None,
    cost_model=None,
    round_index=0,
):
    """Reference implementation keeping one explicit state per worker.

    Every fault-free worker overhears every slot individually; the
    production engine must match this bit for bit (it collapses the
    per-worker stores into one shared basis).  Quadratic in n, test use
    only.
    """
    adversary = adversary or AdversaryStrategy()
    byzantine = adversary.byzantine_ids
    if adversary_rng is None:
        adversary_rng = rng
    if cost_model is None:
        cost_model = CostModel.for_network(n)
    d = cost.dim
    true_grad = cost.gradient(w)

    honest_ids = [i for i in range(1, n + 1) if i not in byzantine]
    samples = sample_gradients(cost, noise, w, len(honest_ids), rng)
    honest = dict(zip(honest_ids, samples))

    workers = {
        i: WorkerState(i, GradientBasis(d, capacity=min(n, d)), honest.get(i))
        for i in range(1, n + 1)
    }
    table = ServerSlotTable(n, d)
    messages = {}
    bits = 0
    echo_count = 0
    for slot in range(1, n + 1):
        if slot in byzantine:
            ctx = RoundContext(
                round_index=round_index,
                slot=slot,
                n=n,
                d=d,
                true_gradient=true_grad,
                honest_gradients=honest,
                filled_ids=table.filled_ids(),
                rng=adversary_rng,
            )
            msg = adversary_message(adversary, slot, ctx)
        else:
            msg = worker_slot_action(workers[slot], r)
        messages[slot] = msg
        server_receive(table, slot, msg)
        for j in range(slot + 1, n + 1):
            if j not in byzantine:
                worker_overhear(workers[j], slot, msg)
        bits += message_bits(cost_model, msg, d)
        echo_count += int(not hasattr(msg, "payload"))

    table.close_round()
    filtered = cgc_filter(table.gradient_matrix(), f)
    w_next = w - eta * filtered.sum(axis=0)

    ball_radius = (r / (2.0 + r)) * np.linalg.norm(true_grad)
    ball_count = int(
        np.count_nonzero(np.linalg.norm(samples - true_grad, axis=1) <= ball_radius)
    )
    delta = w_next - cost.optimum
    metrics = RoundMetrics(
        round_index=round_index,
        bits_sent=bits,
        echo_count=echo_count,
        ball_count=ball_count,
        detections=frozenset(table.detected),
        distance_sq=float(delta @ delta),
    )
    return NaiveRoundResult(w_next, metrics, messages, table, honest, workers)
