"""Experiment configuration: defaults, JSON loading, validation.

A config file is a flat JSON object whose keys match RunConfig's field
names; CLI flags override file values.  Structural problems (wrong
types, n <= 2f, unknown keys) are configuration errors; whether the
parameters admit *convergence* is a separate question answered by
theory.feasibility and enforced only under --strict, so infeasible
regimes can still be simulated and studied.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

from .cost import SPECTRUM_MODES, QuadraticCost
from .protocol import ADVERSARY_KINDS, AdversaryStrategy

__all__ = ["ConfigError", "RunConfig"]


class ConfigError(ValueError):
    """Malformed or structurally invalid run configuration."""


@dataclass(frozen=True)
class RunConfig:
    n: int = 50
    f: int = 5
    d: int = 10
    mu: float = 1.0
    L: float = 1.0
    sigma: float = 0.05
    r: float = 0.1
    eta: float | None = None  # None: use the rate-optimal beta / gamma
    rounds: int = 200
    seed: int = 0
    adversary: str = "none"
    adversary_scale: float = 1.0
    byzantine_slots: tuple[int, ...] | None = None  # None: slots 1..f
    hessian_spectrum_mode: str = "linear"
    replicas: int = 1

    def __post_init__(self):
        if self.byzantine_slots is not None:
            object.__setattr__(self, "byzantine_slots", tuple(int(s) for s in self.byzantine_slots))

    @classmethod
    def field_names(cls):
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def from_dict(cls, values):
        unknown = set(values) - set(cls.field_names())
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        try:
            cfg = cls(**values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")
        return cls.from_dict(values)

    def replace(self, **overrides):
        cfg = dataclasses.replace(self, **overrides)
        cfg.validate()
        return cfg

    def validate(self):
        if not (isinstance(self.n, int) and isinstance(self.f, int) and isinstance(self.d, int)):
            raise ConfigError("n, f, d must be integers")
        if self.n < 1 or self.d < 1:
            raise ConfigError("n and d must be >= 1")
        if not (self.n > 2 * self.f >= 0):
            raise ConfigError(f"need n > 2f >= 0, got n={self.n}, f={self.f}")
        if not (0 < self.mu <= self.L):
            raise ConfigError(f"need 0 < mu <= L, got mu={self.mu}, L={self.L}")
        if self.sigma < 0:
            raise ConfigError("sigma must be >= 0")
        if self.r <= 0:
            raise ConfigError("r must be positive")
        if self.eta is not None and not self.eta > 0:
            raise ConfigError("eta must be positive when given")
        if self.rounds < 1 or self.replicas < 1:
            raise ConfigError("rounds and replicas must be >= 1")
        if self.adversary not in ADVERSARY_KINDS:
            raise ConfigError(
                f"unknown adversary {self.adversary!r}; choose from {', '.join(ADVERSARY_KINDS)}"
            )
        if self.hessian_spectrum_mode not in SPECTRUM_MODES:
            raise ConfigError(
                f"unknown spectrum mode {self.hessian_spectrum_mode!r}; "
                f"choose from {', '.join(SPECTRUM_MODES)}"
            )
        if self.hessian_spectrum_mode == "isotropic" and self.mu != self.L:
            raise ConfigError("isotropic spectrum requires mu == L")
        slots = self.resolved_byzantine_slots()
        if len(set(slots)) != len(slots):
            raise ConfigError("byzantine_slots must be distinct")
        if any(not (1 <= s <= self.n) for s in slots):
            raise ConfigError(f"byzantine_slots must lie in 1..{self.n}")
        if len(slots) > self.f:
            raise ConfigError(f"at most f={self.f} byzantine workers allowed, got {len(slots)}")
        if self.adversary != "none" and not slots:
            raise ConfigError("an active adversary needs byzantine slots (is f zero?)")

    def resolved_byzantine_slots(self):
        if self.adversary == "none":
            return ()
        if self.byzantine_slots is None:
            return tuple(range(1, self.f + 1))
        return self.byzantine_slots

    def strategy(self):
        return AdversaryStrategy(
            kind=self.adversary,
            scale=self.adversary_scale,
            byzantine_ids=frozenset(self.resolved_byzantine_slots()),
        )

    def build_cost(self):
        """The shared cost function; the optimum sits at the origin."""
        return QuadraticCost.from_spectrum_mode(
            self.d,
            self.mu,
            self.L,
            self.hessian_spectrum_mode,
            rotation_seed=self.seed,
        )

    def to_dict(self):
        return dataclasses.asdict(self)
