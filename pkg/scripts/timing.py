"""In-process matching and substitution latency per strategy as the library grows.

    python3 scripts/timing.py --sizes 250 500 1000 2000
"""
import argparse
import statistics
import time

from ghost.engine import AnalysisConfig, Strategy, analyze, respond
from ghost.evaluation import generate_library


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[250, 500, 1000])
    ap.add_argument("--probes", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'n':>6} {'strategy':>10} {'clusters':>8} {'analyze s':>10} {'match us':>10} {'subst us':>10}")
    for n in args.sizes:
        lib = generate_library(n, seed=args.seed)
        probes = generate_library(args.probes, seed=args.seed + 10_000)
        for strategy in Strategy:
            t0 = time.perf_counter()
            model = analyze(lib, AnalysisConfig(strategy))
            built = time.perf_counter() - t0
            respond(model, probes[0].request)  # warm the compiled kernels
            replies = [respond(model, x.request) for x in probes]
            m = statistics.fmean(r.match_seconds for r in replies) * 1e6
            s = statistics.fmean(r.substitution_seconds for r in replies) * 1e6
            print(f"{n:>6} {strategy.value:>10} {len(model.clusters):>8} {built:>10.2f} {m:>10.1f} {s:>10.1f}",
                  flush=True)


if __name__ == "__main__":
    main()
