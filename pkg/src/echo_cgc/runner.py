"""Experiment orchestration: seeded replicas, sweeps, CSV rows.

Replica k of a run draws all its randomness from streams derived from
(seed, k), so replicas are independent, reproducible, and agnostic to
execution order.  Within a replica there is one stream for the initial
parameter, one for fault-free gradient sampling, and one for adversary
draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .accounting import CostModel, RoundMetrics, round_ratio
from .config import ConfigError, RunConfig
from .cost import NoiseModel
from .protocol import run_round
from .theory import DomainError, comm_bounds, constants

__all__ = [
    "ReplicaResult",
    "resolved_eta",
    "run_replica",
    "run_experiment",
    "converge_rows",
    "sweep_rows",
    "CONVERGE_COLUMNS",
    "SWEEP_COLUMNS",
]

CONVERGE_COLUMNS = (
    "replica",
    "round",
    "distance_sq",
    "bits_sent",
    "echo_count",
    "ball_count",
    "detections",
)

SWEEP_COLUMNS = ("axis", "value", "p", "C", "status", "empirical_ratio")

SWEEP_AXES = ("sigma", "mu_over_L", "x", "n")


@dataclass(frozen=True)
class ReplicaResult:
    replica: int
    initial_distance_sq: float
    metrics: tuple[RoundMetrics, ...]

    @property
    def distance_trace(self):
        """Squared distances including the initial one (length rounds+1)."""
        return np.array(
            [self.initial_distance_sq] + [m.distance_sq for m in self.metrics]
        )


def resolved_eta(config):
    """The configured step size, or the rate-optimal beta / gamma."""
    if config.eta is not None:
        return config.eta
    consts = constants(config.n, config.f, config.mu, config.L, config.sigma, config.r)
    if consts.beta <= 0:
        raise ConfigError(
            "eta cannot default to beta/gamma for an infeasible configuration "
            f"(beta={consts.beta:.6g}); set eta explicitly"
        )
    return consts.beta / consts.gamma


def _streams(config, replica):
    root = np.random.SeedSequence(entropy=config.seed, spawn_key=(replica,))
    init_ss, sample_ss, adversary_ss = root.spawn(3)
    return (
        np.random.default_rng(init_ss),
        np.random.default_rng(sample_ss),
        np.random.default_rng(adversary_ss),
    )


def run_replica(config, replica, *, kernels=None):
    """Run one seeded replica of the configured experiment."""
    cost = config.build_cost()
    noise = NoiseModel(config.sigma)
    strategy = config.strategy()
    eta = resolved_eta(config)
    cost_model = CostModel.for_network(config.n)
    init_rng, sample_rng, adversary_rng = _streams(config, replica)

    w = init_rng.standard_normal(config.d)
    delta = w - cost.optimum
    initial = float(delta @ delta)
    metrics = []
    for t in range(config.rounds):
        w, m = run_round(
            w,
            cost,
            noise,
            config.n,
            config.f,
            eta,
            config.r,
            sample_rng,
            adversary=strategy,
            adversary_rng=adversary_rng,
            cost_model=cost_model,
            round_index=t,
            kernels=kernels,
        )
        metrics.append(m)
    return ReplicaResult(replica=replica, initial_distance_sq=initial, metrics=tuple(metrics))


def run_experiment(config, *, kernels=None):
    """All replicas, in replica order."""
    return [run_replica(config, k, kernels=kernels) for k in range(config.replicas)]


def _fmt(x):
    return format(float(x), ".17g")


def converge_rows(results):
    """CSV rows for a convergence run (see CONVERGE_COLUMNS)."""
    for res in results:
        for m in res.metrics:
            yield (
                str(res.replica),
                str(m.round_index),
                _fmt(m.distance_sq),
                str(m.bits_sent),
                str(m.echo_count),
                str(m.ball_count),
                ";".join(str(i) for i in sorted(m.detections)),
            )


def _axis_config(config, axis, value):
    """Materialize a sweep point as a concrete run configuration."""
    if axis == "sigma":
        return config.replace(sigma=float(value))
    if axis == "mu_over_L":
        return config.replace(mu=float(value) * config.L)
    if axis == "x":
        return config.replace(f=int(round(float(value) * config.n)))
    if axis == "n":
        n = int(round(value))
        # Hold the fault-tolerance factor f/n fixed while n varies.
        return config.replace(n=n, f=int(round(config.f / config.n * n)))
    raise ValueError(f"unknown sweep axis {axis!r}")


def _mean_empirical_ratio(config, kernels=None):
    model = CostModel.for_network(config.n)
    results = run_experiment(config, kernels=kernels)
    ratios = [
        round_ratio(m, model, config.n, config.d)
        for res in results
        for m in res.metrics
    ]
    return float(np.mean(ratios))


def sweep_rows(config, axis, values, *, empirical=False, kernels=None):
    """CSV rows for a theory sweep along one axis (see SWEEP_COLUMNS).

    Grid points outside the C expression's domain yield a row with
    status "domain_error" instead of failing the sweep; C values above
    1 are clamped with status "vacuous" (the bound says nothing there).
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {', '.join(SWEEP_AXES)}")
    for value in values:
        sigma = config.sigma
        mu_over_L = config.mu / config.L
        x = config.f / config.n
        n = config.n
        if axis == "sigma":
            sigma = float(value)
        elif axis == "mu_over_L":
            mu_over_L = float(value)
        elif axis == "x":
            x = float(value)
        else:
            n = int(round(value))
        try:
            p, C = comm_bounds(sigma, x, mu_over_L, n, config.r)
        except DomainError:
            yield (axis, _fmt(value), "", "", "domain_error", "")
            continue
        status = "ok"
        if C > 1.0:
            status = "vacuous"
            C = 1.0
        ratio = ""
        if empirical:
            point = _axis_config(config, axis, value)
            point.validate()
            ratio = _fmt(_mean_empirical_ratio(point, kernels=kernels))
        yield (axis, _fmt(value), _fmt(p), _fmt(C), status, ratio)
