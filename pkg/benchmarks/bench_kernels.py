"""Compare the compiled and pure-Python sampling kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--samples 200000] [--repeats 3]

Times alias-table construction, raw alias draws and full path sampling on a
layered noisy circuit for every available backend, and checks that all
backends return bit-identical samples.
"""
import argparse
import time

import numpy as np

from weylsim.kernels import available_backends, get_backend
from weylsim.noise import RotationGate, depolarizing, rotation_superop
from weylsim.pathsampler import sample_many
from weylsim.reps import Circuit, computational_state, pauli_observable


def bench_circuit(n=8, depth=6, seed=0):
    rng = np.random.default_rng(seed)
    circ = Circuit(2, n)
    for _ in range(depth):
        for q in range(n):
            circ.append(rotation_superop(RotationGate(float(rng.uniform(0, 2 * np.pi)), q)))
            circ.append(depolarizing(0.95).to_superop((q,)))
        for q in range(0, n - 1, 2):
            circ.append(depolarizing(0.9, 2).to_superop((q, q + 1)))
    return circ, computational_state([0] * n), pauli_observable("Z" * n)


def best_of(fn, repeats):
    times = []
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    circ, rho, E = bench_circuit()
    probs = np.random.default_rng(1).random((256, 16))
    probs /= probs.sum(axis=1, keepdims=True)
    u = np.random.default_rng(2).random(args.samples)

    rows = []
    results = {}
    for name in available_backends():
        k = get_backend(name)
        t_build, (prob, alias) = best_of(lambda: k.build_alias(probs), args.repeats)
        t_draw, _ = best_of(lambda: k.alias_draw(prob[0], alias[0], u), args.repeats)
        t_walk, est = best_of(lambda: sample_many(circ, rho, E, args.samples, seed=7, backend=k), args.repeats)
        results[name] = est
        rows.append((name, t_build, t_draw, t_walk, args.samples / t_walk))

    print(f"{'backend':<8} {'build_alias[s]':>14} {'alias_draw[s]':>14} {'walk[s]':>10} {'samples/s':>12}")
    for name, tb, td, tw, rate in rows:
        print(f"{name:<8} {tb:14.5f} {td:14.5f} {tw:10.4f} {rate:12.0f}")
    if len(rows) == 2:
        print(f"speedup (walk): {rows[0][3] / rows[1][3]:.1f}x")
        a, b = (np.asarray(results[n_]) for n_ in available_backends())
        print("bit-identical samples:", bool(np.array_equal(a, b)))


if __name__ == "__main__":
    main()
