"""Write reordered dissimilarity images (PGM) for the sample library and a synthetic one.

    python3 scripts/vat_image.py --out-dir images
"""
import argparse
from pathlib import Path

from ghost.clustering import Basis, bea_reorder, build_matrix, render_image, vat_reorder_prim, write_pgm
from ghost.evaluation import generate_library
from ghost.samples import directory_library


def dump(lib, path: Path, reorder: str) -> None:
    dm = build_matrix(lib, Basis.RESPONSE)
    perm = vat_reorder_prim(dm) if reorder == "prim" else bea_reorder(dm)
    with open(path, "wb") as fh:
        write_pgm(render_image(dm, perm), fh)
    print(f"{path}: {dm.n}x{dm.n}, order starts {[p + 1 for p in perm[:10]]}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="images")
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for reorder in ("prim", "bea"):
        dump(directory_library(), out / f"sample_{reorder}.pgm", reorder)
    dump(generate_library(args.n, seed=args.seed), out / f"synthetic_{args.n}_prim.pgm", "prim")


if __name__ == "__main__":
    main()
