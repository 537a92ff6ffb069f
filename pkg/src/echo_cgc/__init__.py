"""Echo-CGC: Byzantine-tolerant distributed SGD for single-hop radio networks.

Workers overhear earlier gradient broadcasts and, when their own
gradient is close to the span of what they heard, transmit a compact
echo (coefficients + norm ratio) instead of the raw d-dimensional
vector; the server reconstructs, clips norms with the CGC filter, and
takes the summed gradient step.  The package bundles the round
protocol, the gradient-echo geometry, synthetic assumption-satisfying
cost oracles, every closed-form convergence/communication constant,
bit-level traffic accounting, and a CLI for experiments.
"""

from . import backend
from .accounting import CostModel, RoundMetrics, message_bits, round_ratio
from .config import ConfigError, RunConfig
from .cost import (
    NoiseModel,
    QuadraticCost,
    sample_gradient,
    sample_gradients,
    true_gradient,
)
from .geometry import (
    TAU_IND,
    TAU_ZERO,
    DegenerateEchoError,
    GradientBasis,
    Projection,
    SingularGramError,
    echo_check,
    in_ball,
    is_independent,
    mp_project,
    norm_ratio,
)
from .messages import EchoMessage, Message, RawGradient
from .protocol import (
    ADVERSARY_KINDS,
    AdversaryStrategy,
    DuplicateTransmissionError,
    RoundContext,
    ServerSlotTable,
    WorkerState,
    adversary_message,
    cgc_filter,
    run_round,
    server_receive,
    worker_overhear,
    worker_slot_action,
)
from .runner import ReplicaResult, resolved_eta, run_experiment, run_replica
from .theory import (
    DomainError,
    FeasibilityReport,
    InfeasibleConfigError,
    TheoryConstants,
    comm_bounds,
    constants,
    feasibility,
    k_of,
    k_star,
    k_star_point,
    r_bounds,
    x_max,
)

__version__ = "0.1.0"

__all__ = [
    "backend",
    "ADVERSARY_KINDS",
    "AdversaryStrategy",
    "ConfigError",
    "CostModel",
    "DegenerateEchoError",
    "DomainError",
    "DuplicateTransmissionError",
    "EchoMessage",
    "FeasibilityReport",
    "GradientBasis",
    "InfeasibleConfigError",
    "Message",
    "NoiseModel",
    "Projection",
    "QuadraticCost",
    "RawGradient",
    "ReplicaResult",
    "RoundContext",
    "RoundMetrics",
    "RunConfig",
    "ServerSlotTable",
    "SingularGramError",
    "TAU_IND",
    "TAU_ZERO",
    "TheoryConstants",
    "WorkerState",
    "adversary_message",
    "cgc_filter",
    "comm_bounds",
    "constants",
    "echo_check",
    "feasibility",
    "in_ball",
    "is_independent",
    "k_of",
    "k_star",
    "k_star_point",
    "message_bits",
    "mp_project",
    "norm_ratio",
    "r_bounds",
    "resolved_eta",
    "round_ratio",
    "run_experiment",
    "run_replica",
    "run_round",
    "sample_gradient",
    "sample_gradients",
    "server_receive",
    "true_gradient",
    "worker_overhear",
    "worker_slot_action",
    "x_max",
]
