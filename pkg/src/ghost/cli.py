"""Command line: analyze | serve | evaluate | image | generate."""
from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .alignment import WeightedMatchConstants
from .clustering import Basis, bea_reorder, build_matrix, render_image, vat_reorder_prim, write_pgm
from .engine import AnalysisConfig, Strategy, analyze
from .evaluation import DIRECTORY, generate_library, run_cross_validation
from .model import load_model, save_model
from .server import Framing, ServerConfig, configure_logging, parse_listen, serve
from .trace import TraceFormatError, parse_trace_file, serialize_trace

STRATEGIES = {s.value: s for s in Strategy}


def _boundaries(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _alpha(text: str) -> float | None:
    if text == "off":
        return None
    return float(text)


def _add_analysis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--strategy", choices=sorted(STRATEGIES), default="consensus")
    p.add_argument("--reorder", choices=("prim", "bea"), default="prim")
    part = p.add_mutually_exclusive_group()
    part.add_argument("--boundaries", type=_boundaries, help="block starts in permuted order, e.g. 5,8")
    part.add_argument("--auto-partition", action="store_true", help="split blocks automatically (default)")
    p.add_argument("--tau", type=float, help="auto-partition threshold")
    p.add_argument("--alpha", type=_alpha, default=1.5,
                   help="relative block threshold for auto-partition, or 'off' for a fixed tau")
    p.add_argument("--f", type=float, default=0.8, help="consensus frequency threshold")
    p.add_argument("--b", type=float, default=1.0, help="entropy weight scale")
    p.add_argument("--c", type=float, default=10.0, help="entropy weight exponent")
    p.add_argument("--minlen", type=int, default=4, help="minimum symmetric field length")
    p.add_argument("--normalization", choices=("padded", "sum"), default="padded")


def _config(args) -> AnalysisConfig:
    if args.tau is not None and args.boundaries is not None:
        raise SystemExit("error: --tau only applies to --auto-partition")
    return AnalysisConfig(
        strategy=STRATEGIES[args.strategy], reorder=args.reorder, boundaries=args.boundaries,
        tau=args.tau, alpha=args.alpha, f=args.f, b=args.b, c=args.c, min_len=args.minlen,
        constants=WeightedMatchConstants(), normalization=args.normalization)


def _load_library(path: str):
    with open(path, encoding="utf-8") as fh:
        return parse_trace_file(fh)


def _write_image(lib, path: str, basis: Basis, reorder: str, normalization: str) -> None:
    dm = build_matrix(lib, basis, normalization)
    if reorder == "prim":
        perm = vat_reorder_prim(dm)
    elif reorder == "bea":
        perm = bea_reorder(dm)
    else:
        perm = list(range(dm.n))
    with open(path, "wb") as fh:
        write_pgm(render_image(dm, perm), fh)


def cmd_analyze(args) -> int:
    lib = _load_library(args.inp)
    cfg = _config(args)
    model = analyze(lib, cfg)
    with open(args.out, "w", encoding="utf-8") as fh:
        save_model(model, fh)
    if args.emit_image:
        _write_image(lib, args.emit_image, Basis.RESPONSE, args.reorder, args.normalization)
    print(f"{len(lib)} interactions, {len(model.clusters)} clusters -> {args.out}", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    configure_logging()
    with open(args.inp, encoding="utf-8") as fh:
        model = load_model(fh)
    host, port = parse_listen(args.listen)
    cfg = ServerConfig(host, port, Framing.parse(args.framing), args.idle_timeout_ms, args.max_bytes)
    serve(model, cfg)
    return 0


def cmd_evaluate(args) -> int:
    lib = _load_library(args.inp)
    validator = DIRECTORY if args.protocol == "directory" else None
    report = run_cross_validation(lib, _config(args), args.folds, args.seed, validator, args.noise,
                                  args.workers)
    doc = report.to_json()
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
    print(json.dumps(doc, sort_keys=True))
    print(report.table())
    return 0


def cmd_image(args) -> int:
    lib = _load_library(args.inp)
    _write_image(lib, args.out, Basis(args.basis), args.reorder, args.normalization)
    return 0


def cmd_generate(args) -> int:
    lib = generate_library(args.n, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        serialize_trace(lib, fh)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ghost", description="Opaque service emulation from recorded traffic.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="cluster a trace library and write a model file")
    p.add_argument("--in", dest="inp", required=True, help="trace library (JSONL)")
    p.add_argument("--out", required=True, help="model file (JSON)")
    p.add_argument("--emit-image", metavar="PGM", help="also write the reordered response matrix image")
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("serve", help="replay a model over TCP")
    p.add_argument("--in", dest="inp", required=True, help="model file from 'analyze'")
    p.add_argument("--listen", default="127.0.0.1:9000", help="host:port")
    p.add_argument("--framing", default="len32", help="conn | len32 | delim:<hex>")
    p.add_argument("--idle-timeout-ms", type=int, default=30_000)
    p.add_argument("--max-bytes", type=int, default=1 << 20, help="largest accepted request")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("evaluate", help="k-fold cross-validation with the five-way taxonomy")
    p.add_argument("--in", dest="inp", required=True, help="trace library (JSONL)")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--noise", type=float, default=0.0, help="fraction of each cluster to swap")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--protocol", choices=("directory", "none"), default="directory",
                   help="validator for the middle categories; 'none' only supports byte identity")
    p.add_argument("--json", help="also write the report here")
    _add_analysis_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("image", help="write a dissimilarity image (PGM)")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--basis", choices=("response", "request"), default="response")
    p.add_argument("--reorder", choices=("prim", "bea", "none"), default="prim")
    p.add_argument("--normalization", choices=("padded", "sum"), default="padded")
    p.set_defaults(func=cmd_image)

    p = sub.add_parser("generate", help="write a synthetic directory-service trace library")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, TraceFormatError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
