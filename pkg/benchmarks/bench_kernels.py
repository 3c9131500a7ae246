"""Benchmark the compiled voting kernels against the pure-Python twin.

Runs both backends over the same batch of randomly generated vote
configurations, checks that every result is identical, and prints a
timing table. Invoke from the repository root:

    python3 benchmarks/bench_kernels.py [--configs N] [--repeats R] [--seed S]
"""

import argparse
import random
import time

from routerlab.kernels import _pure

try:
    from routerlab.kernels import _native
except ImportError:
    _native = None

LEVEL_WEIGHTS = (0.325, 0.4375, 0.55, 0.6625, 0.775, 0.8875, 1.0)


def make_configs(n, seed):
    """Random vote configs shaped like real cascade inputs."""
    rng = random.Random(seed)
    configs = []
    for _ in range(n):
        k = rng.randint(1, 10)
        n_answers = rng.randint(1, 4)
        codes = [
            -1 if rng.random() < 0.2 else rng.randrange(n_answers) for _ in range(k)
        ]
        weights = [rng.choice(LEVEL_WEIGHTS) for _ in range(k)]
        tokens = [rng.randint(1, 400) for _ in range(k)]
        tau = rng.choice([0.0, 0.2, 0.5, 0.6, 0.8, 1.0, rng.random()])
        configs.append((codes, weights, tokens, n_answers, tau))
    return configs


def run_backend(impl, configs):
    out = []
    for codes, weights, tokens, n_answers, tau in configs:
        out.append(impl.vote_masses(codes, weights, n_answers))
        out.append(impl.cascade_vote(codes, weights, tokens, tau))
    return out


def time_backend(impl, configs, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        run_backend(impl, configs)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--configs", type=int, default=20_000)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=1234)
    args = parser.parse_args()

    configs = make_configs(args.configs, args.seed)
    calls = 2 * args.configs  # one mass tally plus one full vote per config

    if _native is not None:
        pure_out = run_backend(_pure, configs)
        native_out = run_backend(_native, configs)
        if pure_out != native_out:
            raise SystemExit("backend results differ; refusing to time a broken twin")
        print(f"verified: {calls} calls produce identical results on both backends")
    else:
        print("native kernel not built; timing the pure backend only")

    rows = [("pure", time_backend(_pure, configs, args.repeats))]
    if _native is not None:
        rows.append(("native", time_backend(_native, configs, args.repeats)))

    base = rows[0][1]
    print(f"\n{'backend':<8} {'total':>10} {'per call':>12} {'speedup':>8}")
    for name, total in rows:
        print(
            f"{name:<8} {total * 1e3:>8.2f}ms {total / calls * 1e9:>10.0f}ns"
            f" {base / total:>7.2f}x"
        )


if __name__ == "__main__":
    main()
