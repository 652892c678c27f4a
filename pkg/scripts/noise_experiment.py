"""Accuracy of the consensus strategy when clusters are polluted with foreign members.

Sweeps noise ratios and consensus thresholds f, mirroring the noisy-cluster
experiment: each cluster swaps ceil(ratio * size) members with other clusters
before centroids and prototypes are rebuilt.

    python3 scripts/noise_experiment.py --n 1000 --seed 0
"""
import argparse

from ghost.engine import AnalysisConfig, Strategy
from ghost.evaluation import generate_library, run_cross_validation


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--folds", type=int, default=10)
    ap.add_argument("--ratios", type=float, nargs="+", default=[0.0, 0.05, 0.10, 0.20])
    ap.add_argument("--f", type=float, nargs="+", default=[0.5, 0.8])
    args = ap.parse_args()

    lib = generate_library(args.n, seed=args.seed)
    print(f"{'noise':>6} " + " ".join(f"{'f=' + str(f):>8}" for f in args.f))
    for ratio in args.ratios:
        cells = []
        for f in args.f:
            cfg = AnalysisConfig(Strategy.CONSENSUS_WEIGHTED, f=f)
            rep = run_cross_validation(lib, cfg, k=args.folds, seed=args.seed, noise=ratio)
            cells.append(f"{100 * rep.accuracy_ratio:7.2f}%")
        print(f"{100 * ratio:5.0f}% " + " ".join(cells), flush=True)


if __name__ == "__main__":
    main()
