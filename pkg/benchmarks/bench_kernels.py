"""Compare the compiled and pure-Python refinement kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--max-n 12]

Times ``run_all_states`` end to end and the two kernel primitives on the full
state space, for each available backend.
"""
import argparse
import random
import statistics
import time

from dimarket import generators, kernel
from dimarket.engine import Market, run_all_states


def best_of(repeat, fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times)


def cases(max_n, seed=0):
    rng = random.Random(seed)
    for n in range(6, max_n + 1, 2):
        yield f"threshold N={n}", generators.random_threshold(rng, n), generators.random_table_prior(rng, n)
        yield f"table N={n}", generators.random_table_security(rng, n), generators.random_table_prior(rng, n)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--max-n", type=int, default=12)
    args = ap.parse_args(argv)

    backends = sorted(kernel.BACKENDS)
    print(f"backends: {', '.join(backends)} (default {kernel.BACKEND})")
    header = f"{'case':<18}{'op':<14}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) > 1:
        header += f"{'speedup':>10}"
    print(header)
    for label, g, P in cases(args.max_n):
        n = g.n_players
        members = list(range(1 << n))
        rows = {"run_all_states": [], "slice_sums": [], "price_groups": []}
        for b in backends:
            market = Market(g, P, backend=b)
            ctx = market._ctx
            coeffs = [random.Random(1).randint(-1000, 1000) for _ in range(2 * n)]
            rows["run_all_states"].append(best_of(args.repeat, lambda: run_all_states(g, P, market=market))[0])
            rows["slice_sums"].append(best_of(args.repeat, lambda: ctx.slice_sums(members))[0])
            rows["price_groups"].append(best_of(args.repeat, lambda: ctx.price_groups(members, coeffs))[0])
        for op, ts in rows.items():
            line = f"{label:<18}{op:<14}" + "".join(f"{t * 1e3:>10.2f}ms" for t in ts)
            if len(ts) > 1:
                line += f"{ts[backends.index('python')] / ts[backends.index('cython')]:>9.1f}x"
            print(line)


if __name__ == "__main__":
    main()
