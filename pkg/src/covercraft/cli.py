"""``covercraft`` command-line interface.

Exit codes: 0 success, 2 usage or input error, 3 capacity guard, 4 numeric failure.
Every command writes a JSON run manifest next to its outputs; ``covercraft
replay MANIFEST`` re-runs the command and checks the output hashes.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from covercraft import io
from covercraft.errors import CapacityError, CovercraftError, InvariantError, NumericError, ParameterError
from covercraft.manifest import RunManifest

log = logging.getLogger("covercraft")

EXIT_OK, EXIT_USAGE, EXIT_CAPACITY, EXIT_NUMERIC = 0, 2, 3, 4


class VerificationError(InvariantError):
    pass


def _manifest_path(out) -> Path:
    return Path(str(out) + ".manifest.json")


def _new_manifest(args, config: dict, seed=None) -> RunManifest:
    return RunManifest(command=args.command, argv=list(args.argv), cwd=os.getcwd(), config=config, seed=seed)


def _finish(manifest: RunManifest, outputs, volatile=(), path=None):
    for out in outputs:
        manifest.add_output(out)
    manifest.volatile = [str(v) for v in volatile]
    manifest.write(path or _manifest_path(outputs[0]))


def _png_path(out) -> Path:
    return Path(out).with_suffix(".png")


def cmd_gen(args) -> int:
    from covercraft.geometry import generate

    X = generate(args.kind, args.n, args.seed)
    io.save_points(args.out, X.points)
    m = _new_manifest(args, {"kind": args.kind, "n": args.n}, args.seed)
    _finish(m, [args.out])
    print(f"wrote {args.n} points to {args.out}")
    return EXIT_OK


def cmd_cover(args) -> int:
    from covercraft.learner import LearnConfig, shape_discover
    from covercraft.plotting import plot_loss_history

    X = io.load_points(args.input)
    cfg = LearnConfig(n_cov=args.n_cov, n_neigh=args.n_neigh, reg=args.reg, lr=args.lr,
                      n_epoch=args.n_epoch, p=args.p, seed=args.seed, graph_kind=args.graph,
                      persistence_every=args.persistence_every)
    cover, trace = shape_discover(X, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {name: out / name for name in ("cover.csv", "initial_cover.csv", "trace.jsonl", "loss.png")}
    io.save_fuzzy_cover(paths["cover.csv"], cover)
    io.save_fuzzy_cover(paths["initial_cover.csv"], trace.initial_cover)
    io.atomic_write(paths["trace.jsonl"], trace.to_jsonl())
    plot_loss_history(trace.history, paths["loss.png"], title=f"{cfg.n_cov}-member cover")
    timings = out / "timings.json"
    io.atomic_write(timings, json.dumps(trace.timings, indent=2, sort_keys=True) + "\n")
    m = _new_manifest(args, cfg.to_dict(), cfg.seed)
    m.add_input(args.input)
    _finish(m, list(paths.values()), [timings], out / "manifest.json")
    final = trace.history[-1]["total"] if trace.history else float("nan")
    print(f"epochs={trace.epochs} final_loss={io.fmt(final)} out={out}")
    return EXIT_OK


def _load_any_cover(path, lam: float):
    """A crisp cover (JSON) or a fuzzy cover (CSV) thresholded at ``lam``; also returns the matrix if fuzzy."""
    from covercraft.complex import check_fuzzy_cover, threshold

    if not 0.0 <= lam < 1.0:
        raise ParameterError(f"--lambda must lie in [0, 1), got {lam}")
    if str(path).endswith(".json"):
        return io.load_cover(path), None
    g = check_fuzzy_cover(io.load_fuzzy_cover(path))
    return threshold(g, lam), g


def cmd_nerve(args) -> int:
    from covercraft.complex import FilteredComplex, fuzzy_nerve_filtration, nerve

    cover, g = _load_any_cover(args.input, args.lam)
    labels = io.load_labels(args.labels) if args.labels else None
    if labels is not None and len(labels) != cover.n:
        raise ParameterError(f"--labels has {len(labels)} rows, cover has {cover.n} points")
    if args.format == "dot":
        text = io.nerve_dot(cover, labels)
    elif args.format == "graphml":
        text = io.nerve_graphml(cover, labels)
    else:
        K = nerve(cover, args.max_dim)
        if g is None:
            F = FilteredComplex(tuple((s, 0.0) for s in K.simplices))
        else:
            # fuzzy input: keep the -log(lambda) values of the simplices alive at this threshold
            values = fuzzy_nerve_filtration(g, args.max_dim).as_dict()
            F = FilteredComplex(tuple((s, values[s]) for s in K.simplices))
        text = io.complex_json(F)
    io.atomic_write(args.out, text)
    m = _new_manifest(args, {"lambda": args.lam, "max_dim": args.max_dim, "format": args.format})
    m.add_input(args.input)
    if args.labels:
        m.add_input(args.labels)
    _finish(m, [args.out])
    print(f"nerve with {len(cover.nonempty())} vertices written to {args.out}")
    return EXIT_OK


def _landmarks(X, args) -> list[int]:
    from covercraft.geometry import epsilon_net, furthest_point_subsample

    if args.eps is not None:
        return epsilon_net(X, args.eps, args.seed)
    if args.landmarks is not None:
        return furthest_point_subsample(X, args.landmarks, args.seed)
    return list(range(len(X)))


def verify_witness_ball_mapper(X, landmarks, eps: float, max_dim: int) -> tuple[bool, int]:
    """Check that the ball-mapper nerve at ``eps`` equals the witness complex sublevel at ``eps``."""
    from covercraft.baselines import ball_mapper, witness_v0
    from covercraft.complex import nerve

    K_ball = nerve(ball_mapper(X, eps, landmarks=landmarks), max_dim).simplices
    K_wit = witness_v0(X, landmarks, max_dim).sublevel(eps)
    return K_ball == K_wit, len(K_ball ^ K_wit)


def cmd_barcode(args) -> int:
    from covercraft.baselines import vietoris_rips, witness_v0
    from covercraft.complex import check_fuzzy_cover, fuzzy_nerve_filtration
    from covercraft.persistence import reduce_barcode
    from covercraft.plotting import plot_barcode

    if args.verify and (args.source != "witness" or args.eps is None):
        raise ParameterError("--verify needs the witness source and --eps")
    data = io.load_fuzzy_cover(args.input) if args.source == "fuzzy-nerve" else io.load_points(args.input)
    if args.source == "fuzzy-nerve":
        K = fuzzy_nerve_filtration(check_fuzzy_cover(data), args.max_dim)
    elif args.source == "rips":
        idx = _landmarks(data, args)
        K = vietoris_rips(data[idx], args.max_dim, args.max_radius, guard=args.guard)
    else:
        idx = _landmarks(data, args)
        K = witness_v0(data, idx, args.max_dim, args.max_radius)
        if args.verify:
            ok, diff = verify_witness_ball_mapper(data, idx, args.eps, args.max_dim)
            print(f"verify: {'ok' if ok else f'MISMATCH ({diff} simplices differ)'}")
            if not ok:
                raise VerificationError("ball-mapper nerve differs from the witness sublevel complex")
    bc = reduce_barcode(K, max_hom_dim=args.max_hom_dim)
    io.save_barcode(args.out, bc)
    png = _png_path(args.out)
    plot_barcode(bc, png, title=f"{args.source} barcode")
    config = {k: getattr(args, k) for k in ("source", "max_dim", "max_hom_dim", "max_radius", "eps",
                                              "landmarks", "verify")}
    m = _new_manifest(args, {k: (str(v) if isinstance(v, float) and math.isinf(v) else v)
                             for k, v in config.items()}, args.seed)
    m.add_input(args.input)
    _finish(m, [args.out, png])
    print(f"{len(K)} simplices, {len(bc)} bars written to {args.out}")
    return EXIT_OK


def _parse_betti(text: str) -> list[int]:
    try:
        target = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ParameterError(f"--betti must be comma-separated integers, got {text!r}") from None
    if not target or any(t < 0 for t in target):
        raise ParameterError("--betti needs at least one nonnegative integer")
    return target


def cmd_hrq(args) -> int:
    from covercraft.evaluation import homology_recovery_quotient, recovery_window

    target = _parse_betti(args.betti)
    bc = io.load_barcode(args.input)
    q = homology_recovery_quotient(bc, target)
    window = recovery_window(bc) or (math.nan, math.nan)
    print(io.fmt(q))
    if args.out:
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["barcode", "betti", "quotient", "a", "b"])
        writer.writerow([args.input, ",".join(map(str, target)), io.fmt(q), io.fmt(window[0]), io.fmt(window[1])])
        io.atomic_write(args.out, buf.getvalue())
        m = _new_manifest(args, {"betti": target})
        m.add_input(args.input)
        _finish(m, [args.out])
    return EXIT_OK


def load_suite(path) -> dict:
    """Parse a benchmark suite TOML file.

    ``[suite]`` holds ``target`` (Betti numbers), ``seeds`` and optionally
    ``max_dim`` and ``min_quotient``. Each ``[[dataset]]`` has ``kind``, ``n``,
    ``seed`` and optionally ``name`` and ``target``. Each ``[[method]]`` has
    ``name`` and ``budget`` or an ascending ``budgets`` list; for a list the
    smallest budget whose quotient exceeds ``min_quotient`` is reported.
    Remaining method keys are passed to the method.
    """
    try:
        import tomllib
    except ModuleNotFoundError:  # Python < 3.11
        import tomli as tomllib

    with open(path, "rb") as fh:
        try:
            spec = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ParameterError(f"{path}: {exc}") from None
    suite = spec.get("suite", {})
    if "target" not in suite:
        raise ParameterError(f"{path}: [suite] needs a target list")
    if not spec.get("dataset") or not spec.get("method"):
        raise ParameterError(f"{path}: need at least one [[dataset]] and one [[method]]")
    for method in spec["method"]:
        if "name" not in method or ("budget" not in method and "budgets" not in method):
            raise ParameterError(f"{path}: every [[method]] needs name and budget(s)")
    return spec


def _bench_cell(suite: dict, dataset: dict, method: dict):
    from covercraft.evaluation import inference_harness

    target = dataset.get("target", suite["target"])
    params = {k: v for k, v in method.items() if k not in ("budget", "budgets")}
    budgets = method.get("budgets", [method.get("budget")])
    threshold = float(suite.get("min_quotient", 0.0))
    ds = {k: v for k, v in dataset.items() if k != "target"}
    report = None
    for budget in sorted(int(b) for b in budgets):
        report = inference_harness(ds, params, budget, target, seeds=suite.get("seeds", [0, 1, 2]),
                                   max_dim=suite.get("max_dim"))
        if report.quotient > threshold:
            break
    return report, report.quotient > threshold


def thread_cap(default: int = 1) -> int:
    raw = os.environ.get("COVERCRAFT_THREADS")
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ParameterError(f"COVERCRAFT_THREADS must be an integer, got {raw!r}") from None
    if value < 1:
        raise ParameterError("COVERCRAFT_THREADS must be positive")
    return value


def cmd_bench(args) -> int:
    from covercraft.plotting import plot_bench

    spec = load_suite(args.suite)
    suite = spec.get("suite", {})
    cells = [(d, m) for d in spec["dataset"] for m in spec["method"]]
    workers = min(len(cells), args.threads or thread_cap())
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda c: _bench_cell(suite, *c), cells))
    else:
        results = [_bench_cell(suite, *c) for c in cells]

    columns = ["method", "dataset", "budget", "vertices", "simplices", "quotient", "recovered"]
    rows = []
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    tbuf = _io.StringIO()
    twriter = csv.writer(tbuf, lineterminator="\n")
    twriter.writerow(["method", "dataset", "budget", "stage", "seconds"])
    for report, recovered in results:
        row = {**report.row(), "recovered": recovered}
        rows.append(row)
        writer.writerow([io.fmt(row[c]) if isinstance(row[c], float) else row[c] for c in columns])
        for stage, seconds in [*report.stages.items(), ("total", report.seconds)]:
            twriter.writerow([report.method, report.dataset, report.budget, stage, io.fmt(seconds)])
    out = Path(args.out)
    io.atomic_write(out, buf.getvalue())
    png = _png_path(out)
    plot_bench(rows, png, title="recovery quotient (labels: simplices)")
    timings = out.with_name(out.stem + "_timings.csv")
    io.atomic_write(timings, tbuf.getvalue())
    m = _new_manifest(args, spec)
    m.add_input(args.suite)
    _finish(m, [out, png], [timings])
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


@contextmanager
def _working_dir(path):
    old = os.getcwd()
    os.chdir(path)
    try:
        yield
    finally:
        os.chdir(old)


def cmd_replay(args) -> int:
    manifest = RunManifest.load(args.manifest)
    with _working_dir(manifest.cwd):
        for path, digest in manifest.inputs.items():
            if io_hash(path) != digest:
                raise ParameterError(f"input {path} changed since the recorded run")
        code = main(manifest.argv)
        if code != EXIT_OK:
            return code
        bad = manifest.mismatches()
    for path, (want, got) in bad.items():
        print(f"MISMATCH {path}: recorded {want[:12]} now {str(got)[:12]}")
    if bad:
        raise VerificationError(f"{len(bad)} output(s) differ from the manifest")
    print(f"replay ok: {len(manifest.outputs)} outputs identical")
    return EXIT_OK


def io_hash(path) -> str | None:
    from covercraft.manifest import file_hash

    return file_hash(path) if Path(path).exists() else None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="covercraft", description="Fuzzy cover learning, nerves and persistence.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", help="sample a synthetic point cloud to CSV")
    s.add_argument("kind", choices=["sphere2", "sphere3", "circle", "blobs"])
    s.add_argument("n", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-o", "--out", required=True, help="output CSV path")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("cover", help="learn a fuzzy cover of a point cloud")
    s.add_argument("input", help="point cloud CSV")
    s.add_argument("--n-cov", type=int, default=10)
    s.add_argument("--n-neigh", type=int, default=15)
    s.add_argument("--reg", type=float, default=10.0)
    s.add_argument("--lr", type=float, default=0.1)
    s.add_argument("--n-epoch", type=int, default=500)
    s.add_argument("--p", type=float, default=5.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--graph", choices=["unit", "umap"], default="umap")
    s.add_argument("--persistence-every", type=int, default=1,
                   help="recompute the topology-loss pairing every this many epochs")
    s.add_argument("-o", "--out", required=True, help="output directory")
    s.set_defaults(func=cmd_cover)

    s = sub.add_parser("nerve", help="threshold a cover and export its nerve")
    s.add_argument("input", help="fuzzy cover CSV or crisp cover JSON")
    s.add_argument("--lambda", dest="lam", type=float, default=0.5)
    s.add_argument("--max-dim", type=int, default=2)
    s.add_argument("--format", choices=["dot", "graphml", "json"], default="dot")
    s.add_argument("--labels", help="CSV whose first column labels each point")
    s.add_argument("-o", "--out", required=True)
    s.set_defaults(func=cmd_nerve)

    s = sub.add_parser("barcode", help="persistence barcode of a filtered complex")
    s.add_argument("source", choices=["fuzzy-nerve", "rips", "witness"])
    s.add_argument("input", help="fuzzy cover CSV (fuzzy-nerve) or point cloud CSV")
    s.add_argument("--max-dim", type=int, default=2, help="top simplex dimension")
    s.add_argument("--max-hom-dim", type=int, default=1)
    s.add_argument("--max-radius", type=float, default=math.inf)
    s.add_argument("--landmarks", type=int, help="furthest-point landmark count")
    s.add_argument("--eps", type=float, help="eps-net landmarks (witness, rips)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--guard", type=int, default=10**7, help="refuse Rips complexes larger than this")
    s.add_argument("--verify", action="store_true",
                   help="check the witness complex at eps against the ball-mapper nerve")
    s.add_argument("-o", "--out", required=True, help="barcode CSV path; a PNG is written alongside")
    s.set_defaults(func=cmd_barcode)

    s = sub.add_parser("hrq", help="homology recovery quotient of a barcode")
    s.add_argument("input", help="barcode CSV")
    s.add_argument("--betti", required=True, help='target Betti numbers, e.g. "1,0,1"')
    s.add_argument("-o", "--out", help="write a CSV row here")
    s.set_defaults(func=cmd_hrq)

    s = sub.add_parser("bench", help="run a topological-inference suite from TOML")
    s.add_argument("suite", help="suite TOML")
    s.add_argument("-o", "--out", required=True, help="report CSV; PNG and timings CSV are written alongside")
    s.add_argument("--threads", type=int, help="worker threads (default COVERCRAFT_THREADS or 1)")
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("replay", help="re-run a command from its manifest and compare outputs")
    s.add_argument("manifest")
    s.set_defaults(func=cmd_replay)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"covercraft: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (NumericError, FloatingPointError, InvariantError) as exc:
        print(f"covercraft: numeric: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (CovercraftError, ValueError, OSError, KeyError) as exc:
        print(f"covercraft: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
