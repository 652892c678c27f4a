"""10-fold cross-validation of all three strategies on synthetic directory traffic.

    python3 scripts/cross_validation.py --n 1000 --seeds 0 1 2
"""
import argparse
import json

from ghost.engine import AnalysisConfig, Strategy
from ghost.evaluation import generate_library, run_cross_validation


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--folds", type=int, default=10)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0])
    ap.add_argument("--strategies", nargs="+", default=[s.value for s in Strategy],
                    choices=[s.value for s in Strategy])
    ap.add_argument("--json", help="write all reports here")
    args = ap.parse_args()

    docs = []
    for seed in args.seeds:
        lib = generate_library(args.n, seed=seed)
        for name in args.strategies:
            report = run_cross_validation(lib, AnalysisConfig(Strategy(name)), k=args.folds, seed=seed)
            print(f"# library seed {seed}")
            print(report.table())
            print()
            docs.append({"library_seed": seed, **report.to_json()})
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(docs, fh, indent=1)


if __name__ == "__main__":
    main()
