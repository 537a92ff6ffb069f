"""Closed-form convergence and communication constants.

Everything here is a pure function of the run parameters
(n, f, h, b, mu, L, sigma, r, eta):

    k_x     = 1 + (x - 1) / sqrt(2x - 1)                    for x >= 1
    k*      = sup_{x >= 1} k_x / sqrt(x)   (~1.116, at x ~ 1.91)
    beta    = (n - 2f) (mu - r(1+sigma)L) / (1+r) - b (1 + k_h sigma) L
    alpha_h = h sigma^2 + (1 + k_h sigma)^2
    gamma   = n L^2 (h (1 + sigma^2) + b alpha_h)
    rho(eta)= 1 - 2 beta eta + gamma eta^2

The squared distance to the optimum contracts by rho per round in
expectation; rho is a convex quadratic in eta minimized at eta = beta /
gamma with minimum 1 - beta^2 / gamma, and lies in [0, 1) for any
eta in (0, 2 beta / gamma) once beta > 0.

The communication side: a stochastic gradient lands in the mutual-echo
ball with probability at least p = 1 - (1 + 2/r)^2 sigma^2, and the
expected traffic of the protocol relative to the all-raw baseline is
bounded by C = sigma^2 (1 + 2 ((1-2x)(1+sigma) + (1 + sigma k* sqrt(n)) x)
/ (mu/L - (3 + sigma k* sqrt(n)) x))^2 with x = f/n.

k* is found numerically (golden-section search); it is never
hard-coded, so the regression test against the known value is
meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

__all__ = [
    "DomainError",
    "InfeasibleConfigError",
    "TheoryConstants",
    "FeasibilityReport",
    "k_of",
    "k_star",
    "k_star_point",
    "constants",
    "r_bounds",
    "feasibility",
    "comm_bounds",
    "x_max",
]


class DomainError(ValueError):
    """Argument outside the domain of a closed-form expression."""


class InfeasibleConfigError(ValueError):
    """Parameters violate the preconditions of the convergence analysis."""


def k_of(x):
    """Order-statistics constant k_x = 1 + (x-1)/sqrt(2x-1), x >= 1."""
    if x < 1:
        raise DomainError(f"k_x is defined for x >= 1, got {x}")
    return 1.0 + (x - 1.0) / math.sqrt(2.0 * x - 1.0)


@lru_cache(maxsize=1)
def _k_star_search():
    # Golden-section maximization of k_x / sqrt(x) on [1, 10]; the
    # function is unimodal there with an interior maximum near 1.91.
    f = lambda x: k_of(x) / math.sqrt(x)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    lo, hi = 1.0, 10.0
    a = hi - invphi * (hi - lo)
    b = lo + invphi * (hi - lo)
    fa, fb = f(a), f(b)
    while hi - lo > 1e-12:
        if fa > fb:
            hi, b, fb = b, a, fa
            a = hi - invphi * (hi - lo)
            fa = f(a)
        else:
            lo, a, fa = a, b, fb
            b = lo + invphi * (hi - lo)
            fb = f(b)
    x = 0.5 * (lo + hi)
    return x, f(x)


def k_star():
    """Supremum of k_x / sqrt(x) over x >= 1 (so k_h <= k* sqrt(h))."""
    return _k_star_search()[1]


def k_star_point():
    """(argmax, value) of the k_x / sqrt(x) maximization."""
    return _k_star_search()


@dataclass(frozen=True)
class TheoryConstants:
    """All derived constants for one parameter set.

    h and b are the per-execution actual fault-free/faulty counts;
    entries that are undefined for the parameters (C when x is past the
    resilience limit) are NaN.
    """

    n: int
    f: int
    h: int
    b: int
    mu: float
    L: float
    sigma: float
    r: float
    k_h: float
    k_n: float
    k_star: float
    alpha_h: float
    beta: float
    gamma: float
    eta_max: float
    rho_min: float
    r_max_general: float
    r_max_strict: float
    p: float
    C: float

    def rho_at(self, eta):
        """Per-round contraction factor rho(eta) = 1 - 2 beta eta + gamma eta^2."""
        return 1.0 - 2.0 * self.beta * eta + self.gamma * eta * eta


def constants(n, f, mu, L, sigma, r, h=None, b=None):
    """Evaluate every convergence constant for one parameter set.

    Defaults to the worst case b = f, h = n - f; pass actual counts for
    a per-execution rate.
    """
    n, f = int(n), int(f)
    if b is None:
        b = f
    if h is None:
        h = n - b
    h, b = int(h), int(b)
    if not (n > 2 * f >= 0):
        raise InfeasibleConfigError(f"need n > 2f >= 0, got n={n}, f={f}")
    if h + b != n or not (0 <= b <= f):
        raise InfeasibleConfigError(f"need h + b = n and 0 <= b <= f, got h={h}, b={b}")
    if not (0 < mu <= L):
        raise InfeasibleConfigError(f"need 0 < mu <= L, got mu={mu}, L={L}")
    if sigma < 0:
        raise InfeasibleConfigError(f"need sigma >= 0, got {sigma}")
    if r <= 0:
        raise InfeasibleConfigError(f"need r > 0, got {r}")

    k_h = k_of(h)
    k_n = k_of(n)
    ks = k_star()
    beta = (n - 2 * f) * (mu - r * (1 + sigma) * L) / (1 + r) - b * (1 + k_h * sigma) * L
    alpha_h = h * sigma**2 + (1 + k_h * sigma) ** 2
    gamma = n * L**2 * (h * (1 + sigma**2) + b * alpha_h)
    r_gen, r_strict = r_bounds(n, f, mu, L, sigma)
    p = 1.0 - (1.0 + 2.0 / r) ** 2 * sigma**2
    x = f / n
    try:
        _, C = comm_bounds(sigma, x, mu / L, n, r)
    except DomainError:
        C = math.nan
    return TheoryConstants(
        n=n,
        f=f,
        h=h,
        b=b,
        mu=mu,
        L=L,
        sigma=sigma,
        r=r,
        k_h=k_h,
        k_n=k_n,
        k_star=ks,
        alpha_h=alpha_h,
        beta=beta,
        gamma=gamma,
        eta_max=2.0 * beta / gamma,
        rho_min=1.0 - beta**2 / gamma,
        r_max_general=r_gen,
        r_max_strict=r_strict,
        p=p,
        C=C,
    )


def r_bounds(n, f, mu, L, sigma):
    """Upper bounds on the deviation ratio keeping beta > 0.

    Returns (general, strict): the general bound uses k_n * sigma, the
    strict one replaces it with k* (valid once sigma < 1/sqrt(n)).
    Non-positive values signal an infeasible (n, f, mu, L) combination.
    """
    if not (n > 2 * f >= 0):
        raise InfeasibleConfigError(f"need n > 2f >= 0, got n={n}, f={f}")
    kn_sigma = k_of(n) * sigma
    ks = k_star()
    general = (n * mu - (3 + kn_sigma) * f * L) / (
        (n - 2 * f) * (1 + sigma) * L + (1 + kn_sigma) * f * L
    )
    strict = (n * mu - (3 + ks) * f * L) / (
        (n - 2 * f) * (1 + sigma) * L + (1 + ks) * f * L
    )
    return general, strict


@dataclass(frozen=True)
class FeasibilityReport:
    """Named pass/fail checks plus the worst-case constants behind them."""

    checks: tuple[tuple[str, bool, str], ...]
    constants: TheoryConstants | None

    @property
    def ok(self):
        return all(passed for _, passed, _ in self.checks)

    def failed(self):
        return tuple(name for name, passed, _ in self.checks if not passed)


def feasibility(n, f, mu, L, sigma, r, eta):
    """Diagnose whether (n, f, mu, L, sigma, r, eta) admits convergence.

    All checks are evaluated at the worst case b = f.  Check names:
    n_gt_2f, resilience_margin (n mu - (3 + k*) f L > 0), sigma_bound
    (sigma < 1/sqrt(n)), r_below_strict, beta_positive, eta_in_range,
    rho_in_unit.
    """
    checks = []
    ks = k_star()
    n_ok = n > 2 * f >= 0
    checks.append(("n_gt_2f", bool(n_ok), f"n={n}, f={f}"))
    margin = n * mu - (3 + ks) * f * L if n_ok else math.nan
    checks.append(
        ("resilience_margin", bool(n_ok and margin > 0), f"n*mu-(3+k*)*f*L={margin:.6g}")
    )
    sig_ok = n >= 1 and sigma < 1.0 / math.sqrt(n)
    checks.append(("sigma_bound", bool(sig_ok), f"sigma={sigma:.6g}, 1/sqrt(n)={1.0 / math.sqrt(n) if n >= 1 else math.nan:.6g}"))

    consts = None
    r_ok = beta_ok = eta_ok = rho_ok = False
    if n_ok and mu > 0 and mu <= L and sigma >= 0 and r > 0:
        consts = constants(n, f, mu, L, sigma, r)
        r_ok = r < consts.r_max_strict
        beta_ok = consts.beta > 0
        eta_ok = beta_ok and 0 < eta < consts.eta_max
        rho = consts.rho_at(eta)
        rho_ok = 0 <= rho < 1
        checks.append(("r_below_strict", bool(r_ok), f"r={r:.6g}, r_max_strict={consts.r_max_strict:.6g}"))
        checks.append(("beta_positive", bool(beta_ok), f"beta={consts.beta:.6g}"))
        checks.append(("eta_in_range", bool(eta_ok), f"eta={eta:.6g}, eta_max={consts.eta_max:.6g}"))
        checks.append(("rho_in_unit", bool(rho_ok), f"rho(eta)={rho:.6g}"))
    else:
        detail = "prerequisites unmet (need n > 2f, 0 < mu <= L, sigma >= 0, r > 0)"
        for name in ("r_below_strict", "beta_positive", "eta_in_range", "rho_in_unit"):
            checks.append((name, False, detail))
    return FeasibilityReport(checks=tuple(checks), constants=consts)


def x_max(mu_over_L, sigma, n):
    """Largest admissible fault-tolerance factor x = f/n for the C bound."""
    return mu_over_L / (3.0 + sigma * k_star() * math.sqrt(n))


def comm_bounds(sigma, x, mu_over_L, n, r):
    """Echo probability floor p and relative-traffic ceiling C.

    p = 1 - (1 + 2/r)^2 sigma^2 (may be <= 0, in which case the bound is
    vacuous).  Raises DomainError when x reaches the resilience limit
    x_max, where the C expression's denominator is non-positive.
    """
    if sigma < 0:
        raise DomainError(f"need sigma >= 0, got {sigma}")
    if r <= 0:
        raise DomainError(f"need r > 0, got {r}")
    if n < 1:
        raise DomainError(f"need n >= 1, got {n}")
    if x < 0:
        raise DomainError(f"need x >= 0, got {x}")
    if mu_over_L <= 0 or mu_over_L > 1:
        raise DomainError(f"need 0 < mu/L <= 1, got {mu_over_L}")
    xm = x_max(mu_over_L, sigma, n)
    if x >= xm:
        raise DomainError(f"x={x:.6g} is at or past the resilience limit x_max={xm:.6g}")
    p = 1.0 - (1.0 + 2.0 / r) ** 2 * sigma**2
    ksn = sigma * k_star() * math.sqrt(n)
    num = (1.0 - 2.0 * x) * (1.0 + sigma) + (1.0 + ksn) * x
    den = mu_over_L - (3.0 + ksn) * x
    C = sigma**2 * (1.0 + 2.0 * num / den) ** 2
    return p, C
