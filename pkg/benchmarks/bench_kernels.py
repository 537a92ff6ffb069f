#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure-numpy fallback.

Micro-benchmarks time the two hot kernels (basis append, projection)
in isolation; the end-to-end benchmark times full protocol rounds with
each backend driving the engine.

Usage:
    python benchmarks/bench_kernels.py            # default sizes
    python benchmarks/bench_kernels.py --d 64 --rank 32 --rounds 100
"""

import argparse
import time

import numpy as np

from echo_cgc import backend
from echo_cgc.cost import NoiseModel, QuadraticCost
from echo_cgc.protocol import AdversaryStrategy, run_round


def time_call(fn, repeat):
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn()
        best = min(best, (time.perf_counter() - t0) / repeat)
    return best


def bench_kernels(kern, d, rank, repeat):
    rng = np.random.default_rng(0)
    qt = np.zeros((d, d))
    rmat = np.zeros((d, d))
    k = 0
    for _ in range(rank):
        k = kern.try_append(qt, rmat, k, rng.standard_normal(d), 1e-8)
    g = np.ascontiguousarray(rng.standard_normal(d))
    v = np.ascontiguousarray(rng.standard_normal(d))

    def do_append():
        # Rejected append (basis is full rank on this path): pure
        # orthogonalization cost, no state mutation to undo.
        kern.try_append(qt, rmat, k, v, 1e20)

    t_append = time_call(do_append, repeat)
    t_project = time_call(lambda: kern.project(qt, rmat, k, g), repeat)
    t_residual = time_call(lambda: kern.residual_norm(qt, k, g), repeat)
    return t_append, t_project, t_residual


def bench_rounds(kern, n, f, d, rounds):
    cost = QuadraticCost.from_spectrum_mode(d, 1.0, 1.0, "linear", rotation_seed=1)
    noise = NoiseModel(0.1)
    adversary = AdversaryStrategy("zero", 1.0, frozenset(range(1, f + 1))) if f else None
    rng = np.random.default_rng(3)
    w = rng.standard_normal(d)
    t0 = time.perf_counter()
    for t in range(rounds):
        w, _ = run_round(
            w, cost, noise, n, f, 0.004, 0.05, rng,
            adversary=adversary, round_index=t, kernels=kern,
        )
    return (time.perf_counter() - t0) / rounds


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--d", type=int, default=20, help="gradient dimension")
    parser.add_argument("--rank", type=int, default=20, help="basis size for kernel benchmarks")
    parser.add_argument("--repeat", type=int, default=2000, help="kernel calls per timing pass")
    parser.add_argument("--n", type=int, default=100, help="workers for the round benchmark")
    parser.add_argument("--f", type=int, default=10, help="fault tolerance for the round benchmark")
    parser.add_argument("--rounds", type=int, default=50, help="rounds to time end to end")
    args = parser.parse_args()

    backends = backend.available_backends()
    print(f"backends available: {', '.join(sorted(backends))} (selected: {backend.name})")
    print(f"\nkernel micro-benchmarks (d={args.d}, rank={args.rank}; microseconds/call)")
    print(f"{'backend':<10} {'append':>10} {'project':>10} {'residual':>10}")
    micro = {}
    for name in sorted(backends):
        ta, tp, tr = bench_kernels(backends[name], args.d, args.rank, args.repeat)
        micro[name] = (ta, tp, tr)
        print(f"{name:<10} {ta * 1e6:>10.2f} {tp * 1e6:>10.2f} {tr * 1e6:>10.2f}")

    print(f"\nfull protocol rounds (n={args.n}, f={args.f}, d={args.d}; ms/round)")
    print(f"{'backend':<10} {'per round':>12}")
    per_round = {}
    for name in sorted(backends):
        t = bench_rounds(backends[name], args.n, args.f, args.d, args.rounds)
        per_round[name] = t
        print(f"{name:<10} {t * 1e3:>12.3f}")

    if {"python", "compiled"} <= set(backends):
        speedups = [
            micro["python"][i] / micro["compiled"][i] for i in range(3)
        ]
        print(
            f"\ncompiled speedup: append {speedups[0]:.1f}x, project {speedups[1]:.1f}x, "
            f"residual {speedups[2]:.1f}x, end-to-end "
            f"{per_round['python'] / per_round['compiled']:.2f}x"
        )


if __name__ == "__main__":
    main()
