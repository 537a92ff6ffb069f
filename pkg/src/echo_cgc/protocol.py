"""The synchronous round engine: TDMA slots, echoes, CGC, adversaries.

Each round has three phases.  Computation: every fault-free worker
samples a stochastic gradient at the broadcast parameter.  Communication:
workers transmit in slot order 1..n; a worker whose stored overheard
gradients approximate its own gradient within the deviation ratio sends
a compact echo message, otherwise the raw vector.  Raw vectors are
overheard and stored by all later workers (when independent of what
they already hold).  The server reconstructs per-worker gradients,
flags senders whose echoes reference an empty slot as Byzantine, then
clips norms with the CGC filter and applies the summed gradient step.

Byzantine senders emit one arbitrary message per round, delivered
identically to the server and all workers (reliable local broadcast
forbids equivocation), and scheduled like everyone else.

The engine exploits a consequence of reliable broadcast: every
fault-free worker hears the same raw-gradient sequence and applies the
same deterministic independence rule, so all stored sets agree at any
point in the round.  One shared basis therefore stands in for every
worker's store; the per-worker operation `worker_overhear` exists for
direct use and for the reference engine the tests compare against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .accounting import CostModel, RoundMetrics, message_bits
from .cost import sample_gradients
from .geometry import TAU_IND, TAU_ZERO, GradientBasis, is_independent
from .messages import EchoMessage, RawGradient

__all__ = [
    "ADVERSARY_KINDS",
    "AdversaryStrategy",
    "RoundContext",
    "ServerSlotTable",
    "WorkerState",
    "DuplicateTransmissionError",
    "worker_slot_action",
    "worker_overhear",
    "server_receive",
    "adversary_message",
    "cgc_filter",
    "run_round",
]

ADVERSARY_KINDS = (
    "none",
    "zero",
    "sign_flip",
    "large_norm",
    "within_threshold",
    "bogus_echo_missing_id",
    "bogus_echo_corrupt_coeffs",
)


class DuplicateTransmissionError(RuntimeError):
    """A worker transmitted twice in one round; TDMA forbids this."""


@dataclass
class WorkerState:
    """One worker's view inside a round: its slot ID, overheard basis,
    and the stochastic gradient it computed this round."""

    id: int
    basis: GradientBasis
    local_gradient: np.ndarray | None = None


@dataclass(frozen=True)
class AdversaryStrategy:
    """Which workers are Byzantine and what they broadcast.

    scale parametrizes the kinds that need one: the norm multiplier for
    large_norm, a multiplier on the median fault-free norm for
    within_threshold, and the bogus norm ratio for
    bogus_echo_corrupt_coeffs.
    """

    kind: str = "none"
    scale: float = 1.0
    byzantine_ids: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.kind not in ADVERSARY_KINDS:
            raise ValueError(f"unknown adversary kind {self.kind!r}")
        object.__setattr__(self, "byzantine_ids", frozenset(int(i) for i in self.byzantine_ids))
        if self.kind == "none" and self.byzantine_ids:
            raise ValueError("kind 'none' cannot have byzantine workers")
        if self.kind != "none" and not self.byzantine_ids:
            raise ValueError(f"kind {self.kind!r} needs at least one byzantine worker")


@dataclass
class RoundContext:
    """What an omniscient adversary knows when composing a message:
    the current round and slot, the true gradient, every fault-free
    worker's sampled gradient, and which slots have transmitted."""

    round_index: int
    slot: int
    n: int
    d: int
    true_gradient: np.ndarray
    honest_gradients: dict[int, np.ndarray]
    filled_ids: tuple[int, ...]
    rng: np.random.Generator


class ServerSlotTable:
    """The server's per-worker gradient store for one round.

    Entries start empty; raw gradients are stored as-is, echoes are
    reconstructed from already-stored entries, and senders caught
    referencing an empty slot are flagged and zero-filled.  At the end
    of a round no entry may remain empty (absent senders are flagged
    and zero-filled too, mirroring the detection path).
    """

    def __init__(self, n, dim):
        if n < 1 or dim < 1:
            raise ValueError("need n >= 1 and dim >= 1")
        self.n = int(n)
        self.dim = int(dim)
        self._store = np.zeros((self.n, self.dim))
        self._filled = np.zeros(self.n, dtype=bool)
        self.detected: set[int] = set()

    def _index(self, worker_id):
        if not (1 <= worker_id <= self.n):
            raise ValueError(f"worker ID {worker_id} out of range 1..{self.n}")
        return worker_id - 1

    def is_filled(self, worker_id):
        return bool(self._filled[self._index(worker_id)])

    def entry(self, worker_id):
        """Stored gradient for the worker, or None while still empty."""
        i = self._index(worker_id)
        return self._store[i] if self._filled[i] else None

    @property
    def entries(self):
        return [self.entry(i) for i in range(1, self.n + 1)]

    def filled_ids(self):
        return tuple(int(i) + 1 for i in np.flatnonzero(self._filled))

    def close_round(self):
        """Flag and zero-fill any worker that never transmitted."""
        for i in np.flatnonzero(~self._filled):
            self.detected.add(int(i) + 1)
            self._filled[i] = True

    def gradient_matrix(self):
        """The (n, d) matrix of stored gradients; requires a closed round."""
        if not self._filled.all():
            raise RuntimeError("round not complete: some workers have no entry")
        return self._store


def worker_slot_action(state, r):
    """Compose the message a fault-free worker broadcasts in its slot.

    Raw fallbacks: empty basis, zero local gradient, failed send-check,
    or a degenerate (numerically zero) echo gradient.  The arithmetic is
    exactly mp_project + echo_check + norm_ratio, fused so the hot loop
    computes each norm once (see test_slot_action_consistent_with_ops).
    """
    g = state.local_gradient
    basis = state.basis
    if len(basis) == 0:
        return RawGradient(g)
    gsq = float(g @ g)
    if gsq == 0.0:
        return RawGradient(g)
    basis._check_factor()
    coeffs, echo, rnorm = basis._kernels.project(basis._qt, basis._rmat, basis._k, g)
    gnorm = math.sqrt(gsq)
    if rnorm > r * gnorm:
        return RawGradient(g)
    enorm = math.sqrt(float(echo @ echo))
    if enorm <= TAU_ZERO * gnorm:
        return RawGradient(g)
    return EchoMessage(gnorm / enorm, coeffs, basis.owner_ids)


def worker_overhear(state, sender, msg):
    """Update a worker's stored set with an overheard slot.

    Only raw gradients are stored, and only when linearly independent
    of the current store; echo messages never enter the basis.
    """
    if isinstance(msg, RawGradient) and is_independent(state.basis, msg.payload, state.basis.tol):
        state.basis.append(msg.payload, sender)
    return state


def server_receive(table, sender, msg):
    """Record one transmission at the server.

    Echo messages referencing any not-yet-filled slot expose the sender
    as Byzantine (reliable broadcast means a fault-free worker can only
    reference gradients everyone, including the server, received); the
    sender is flagged and zero-filled.  Otherwise the echo is
    reconstructed as k * A_I @ x from the stored entries, which may
    include zero-filled columns from earlier detections.
    """
    i = table._index(sender)
    if table._filled[i]:
        raise DuplicateTransmissionError(f"worker {sender} already transmitted this round")
    if isinstance(msg, RawGradient):
        if msg.payload.size != table.dim:
            raise ValueError("raw gradient has the wrong dimension")
        table._store[i] = msg.payload
    elif isinstance(msg, EchoMessage):
        ids = msg.ids
        # ids are strictly ascending, so the ends bound the range.
        if ids[0] < 1 or ids[-1] > table.n:
            raise ValueError(f"referenced worker IDs out of range 1..{table.n}")
        refs = [j - 1 for j in ids]
        if table._filled[refs].all():
            table._store[i] = msg.k * (msg.coeffs @ table._store[refs])
        else:
            table.detected.add(sender)
    else:
        raise TypeError(f"not a protocol message: {type(msg).__name__}")
    table._filled[i] = True
    return table


def adversary_message(strategy, worker_id, ctx):
    """The message a Byzantine worker broadcasts, given full knowledge.

    Deterministic given the strategy, the context, and ctx.rng's state.
    """
    if worker_id not in strategy.byzantine_ids:
        raise ValueError(f"worker {worker_id} is not controlled by the adversary")
    kind = strategy.kind
    d = ctx.d
    if kind == "zero":
        return RawGradient(np.zeros(d))
    if kind == "sign_flip":
        return RawGradient(-ctx.true_gradient)
    if kind == "large_norm":
        return RawGradient(strategy.scale * ctx.true_gradient)
    if kind == "within_threshold":
        # A rotated vector that hides under the CGC clipping threshold:
        # random direction, norm pinned to the median fault-free norm.
        norms = [np.linalg.norm(g) for g in ctx.honest_gradients.values()]
        target = strategy.scale * (np.median(norms) if norms else 0.0)
        u = ctx.rng.standard_normal(d)
        unorm = np.linalg.norm(u)
        if unorm == 0.0 or target == 0.0:
            return RawGradient(np.zeros(d))
        return RawGradient((target / unorm) * u)
    if kind == "bogus_echo_missing_id":
        # Reference a slot that cannot have transmitted yet; the server
        # must flag the sender in the same slot.
        target = ctx.slot + 1 if ctx.slot < ctx.n else ctx.slot
        return EchoMessage(1.0, np.ones(1), (target,))
    if kind == "bogus_echo_corrupt_coeffs":
        # Valid references, garbage content: reconstructed as claimed,
        # then left to the CGC filter.  The most recent transmissions
        # are referenced (earlier ones may be zero-filled detections).
        ids = ctx.filled_ids[-3:]
        if not ids:
            # Nothing valid to reference yet; self-reference (still an
            # arbitrary message, caught by the empty-slot rule).
            ids = (ctx.slot,)
        coeffs = ctx.rng.standard_normal(len(ids))
        return EchoMessage(max(strategy.scale, 1.0), coeffs, ids)
    raise ValueError(f"adversary kind {kind!r} sends no messages")


def cgc_filter(gradients, f):
    """Comparative gradient clipping.

    Let T be the (n-f)-th smallest norm; every gradient with norm above
    T is scaled down to norm T, the rest (zero vectors included) pass
    through unchanged.  Order is preserved.  Accepts a sequence of
    vectors or an (n, d) array and returns the matching form.
    """
    as_array = isinstance(gradients, np.ndarray) and gradients.ndim == 2
    arr = gradients if as_array else np.asarray(
        [np.asarray(g, dtype=np.float64) for g in gradients]
    )
    n = arr.shape[0]
    if not (n > 2 * f >= 0):
        raise ValueError(f"need n > 2f >= 0, got n={n}, f={f}")
    norms = np.linalg.norm(arr, axis=1)
    threshold = np.partition(norms, n - f - 1)[n - f - 1]
    clip = norms > threshold
    if not clip.any():
        return arr.copy() if as_array else [row.copy() for row in arr]
    scale = np.ones(n)
    scale[clip] = threshold / norms[clip]
    out = arr * scale[:, None]
    return out if as_array else [row for row in out]


def run_round(
    w,
    cost,
    noise,
    n,
    f,
    eta,
    r,
    rng,
    *,
    adversary=None,
    adversary_rng=None,
    cost_model=None,
    round_index=0,
    kernels=None,
):
    """Execute one synchronous round; returns (next parameter, metrics).

    Assumes the configuration was validated up front (see
    theory.feasibility); nothing is re-checked here.  `rng` drives the
    fault-free gradient sampling, `adversary_rng` (defaults to `rng`)
    the adversary's draws.
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

    table = ServerSlotTable(n, d)
    shared_basis = GradientBasis(d, capacity=min(n, d), tol=TAU_IND, kernels=kernels)
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
            msg = worker_slot_action(WorkerState(slot, shared_basis, honest[slot]), r)
        server_receive(table, slot, msg)
        # Equivalent to worker_overhear at every later worker (all
        # fault-free stores evolve identically); nobody overhears the
        # final slot.
        if slot < n and isinstance(msg, RawGradient):
            shared_basis.append(msg.payload, slot)
        bits += message_bits(cost_model, msg, d)
        if isinstance(msg, EchoMessage):
            echo_count += 1

    table.close_round()
    filtered = cgc_filter(table.gradient_matrix(), f)
    w_next = w - eta * filtered.sum(axis=0)

    tnorm = np.linalg.norm(true_grad)
    ball_radius = (r / (2.0 + r)) * tnorm
    ball_count = int(np.count_nonzero(np.linalg.norm(samples - true_grad, axis=1) <= ball_radius))
    delta = w_next - cost.optimum
    metrics = RoundMetrics(
        round_index=round_index,
        bits_sent=bits,
        echo_count=echo_count,
        ball_count=ball_count,
        detections=frozenset(table.detected),
        distance_sq=float(delta @ delta),
    )
    return w_next, metrics
