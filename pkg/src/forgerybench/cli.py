"""``forgerybench`` command-line entry point.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import shlex
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import (
    GridSearchConfig,
    KernelKind,
    export_model_text,
    kfold_grid_search,
    load_model,
    predict,
    save_model,
    train_svm,
)
from .classifier.model import LABEL_NAMES
from .datasets import Registry, apply_declared_subsample
from .errors import ForgeryBenchError, NonConvergence, UnknownMethod
from .experiments import (
    METHOD_KERNELS,
    FeatureCache,
    execute_plan,
    expand_jobs,
    load_plan,
    parse_grid_file,
    render_report,
)
from .experiments.report import read_report_csv, summarize_drop
from .features import FeatureRecord, Method, extract, read_features, write_features
from .imgio import load_image
from .synth import CorpusConfig, build_corpus

log = logging.getLogger("forgerybench")

EXTRACT_FAILURE_LIMIT = 0.05


class CommandFailed(Exception):
    """Runtime failure reported with exit status 1."""


# ------------------------------------------------------------------ argument types


def _method(value: str) -> Method:
    try:
        return Method.parse(value)
    except UnknownMethod as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _mix(value: str) -> float:
    """``50/50`` (copy-move/splice percent) or a single copy-move percent."""
    try:
        parts = [float(p) for p in value.split("/")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad mix {value!r}") from None
    if len(parts) == 1:
        parts.append(100.0 - parts[0])
    if len(parts) != 2 or min(parts) < 0 or max(parts) > 100 or abs(sum(parts) - 100) > 1e-9:
        raise argparse.ArgumentTypeError(
            f"mix {value!r} must be two non-negative percentages summing to 100")
    return parts[0] / 100.0


def _size(value: str) -> tuple[int, int]:
    try:
        parts = [int(p) for p in value.lower().split("x")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size {value!r}") from None
    if len(parts) == 1:
        parts *= 2
    if len(parts) != 2 or min(parts) < 64:
        raise argparse.ArgumentTypeError(f"size {value!r} must be at least 64x64 (HxW)")
    return parts[0], parts[1]


def _qrange(value: str) -> tuple[int, int]:
    try:
        lo, hi = (int(p) for p in value.split("-"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"quality range {value!r} must look like 70-95") from None
    if not 1 <= lo <= hi <= 100:
        raise argparse.ArgumentTypeError(f"quality range {value!r} outside 1..100")
    return lo, hi


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _count(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("count must be >= 1")
    return n


# ------------------------------------------------------------------ helpers


def _invocation(argv) -> str:
    return "forgerybench " + shlex.join(argv)


def _header(args) -> list[str]:
    return [f"invocation: {_invocation(args.argv)}", f"seed: {args.seed}",
            f"forgerybench {__version__}"]


def _record_outputs(args, command: str, paths) -> Path:
    """Write ``produced_<command>.txt`` under --out: header plus sha256 per file."""
    out = Path(args.out)
    lines = [f"# {h}" for h in _header(args)]
    for p in sorted(Path(p) for p in paths):
        digest = hashlib.sha256(p.read_bytes()).hexdigest()
        try:
            rel = p.resolve().relative_to(out.resolve()).as_posix()
        except ValueError:
            rel = p.as_posix()
        lines.append(f"{digest}  {rel}")
    target = out / f"produced_{command}.txt"
    target.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return target


def _registry(args) -> Registry:
    if not args.registry:
        raise CommandFailed("this command needs --registry DIR")
    if not Path(args.registry).is_dir():
        raise CommandFailed(f"registry directory {args.registry} does not exist")
    return Registry.discover(args.registry)


def _grid(args) -> GridSearchConfig:
    base = GridSearchConfig(seed=args.seed)
    return parse_grid_file(args.grid_file, base) if args.grid_file else base


def _extract_one(job):
    method, path = job
    try:
        return extract(method, load_image(path)), None
    except (ForgeryBenchError, OSError, ValueError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


# ------------------------------------------------------------------ commands


def cmd_synth(args) -> int:
    cfg = CorpusConfig(
        n_pristine=args.count, n_tampered=args.count,
        sizes=tuple(args.size) if args.size else ((128, 128),),
        copy_move_share=args.mix, seed=args.seed,
        quality_range=args.quality, source_quality_range=args.source_quality,
        matched_quality=args.matched, feather=args.feather,
        dataset_id=args.id, year=args.year,
    )
    target = Path(args.out) / args.id
    manifest = build_corpus(cfg, target, jobs=args.jobs)
    produced = [e.path for e in manifest.entries]
    produced += [target / f"{args.id}.manifest", target / "recipes.json"]
    _record_outputs(args, "synth", produced)
    n_p, n_t = manifest.counts
    print(f"wrote {args.id}: {n_p} pristine + {n_t} tampered "
          f"({manifest.scale_class.value}) under {target}")
    return 0


def cmd_extract(args) -> int:
    registry = _registry(args)
    m = registry[args.dataset]
    entries = list(m.entries)
    jobs = [(args.method, e.path) for e in entries]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_extract_one, jobs, chunksize=16))
    else:
        results = [_extract_one(j) for j in jobs]
    records, failures = [], []
    for e, (vec, err) in zip(entries, results):
        if vec is None:
            failures.append((e.path, err))
        else:
            records.append(FeatureRecord(e.image_id, e.label, vec))
    header = _header(args) + [f"dataset: {m.id}", f"method: {args.method.value}"]
    header += [f"skipped: {p} ({err})" for p, err in failures]
    out = Path(args.out) / "features" / f"{m.id}_{args.method.value.lower()}.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_features(out, records, header=header)
    _record_outputs(args, "extract", [out])
    for p, err in failures:
        print(f"skipped {p}: {err}", file=sys.stderr)
    print(f"wrote {len(records)} feature lines to {out}")
    if entries and len(failures) / len(entries) > EXTRACT_FAILURE_LIMIT:
        raise CommandFailed(f"{len(failures)} of {len(entries)} images failed "
                            f"(limit {EXTRACT_FAILURE_LIMIT:.0%})")
    return 0


def cmd_train(args) -> int:
    grid = _grid(args)
    if args.features:
        recs = read_features(args.features)
        if any(r.vector.method is not args.method for r in recs):
            raise CommandFailed(f"{args.features} holds features of another method")
        X = np.vstack([r.vector.values for r in recs])
        y = [r.label for r in recs]
        source = str(args.features)
    else:
        registry = _registry(args)
        if not args.dataset:
            raise CommandFailed("train needs --dataset ID or --features FILE")
        m = apply_declared_subsample(registry[args.dataset], args.seed)
        X, y, skipped = FeatureCache().matrix(args.method, m.entries)
        for p in skipped:
            print(f"skipped {p}", file=sys.stderr)
        source = m.id
    kind = KernelKind(args.kernel) if args.kernel else METHOD_KERNELS[args.method]
    search = kfold_grid_search(X, y, kind, grid)
    if search.all_disqualified:
        raise CommandFailed("no grid cell converged; widen max_epochs or the C grid")
    try:
        model = train_svm(X, y, search.kernel, search.c, grid.tol, grid.max_epochs, args.seed,
                          args.method.value)
    except NonConvergence as exc:
        raise CommandFailed(str(exc)) from None
    stem = Path(args.out) / "models" / f"{Path(source).stem}_{args.method.value.lower()}"
    stem.parent.mkdir(parents=True, exist_ok=True)
    model_path = stem.with_suffix(".model")
    text_path = stem.with_suffix(".model.txt")
    save_model(model, model_path)
    text_path.write_text("".join(f"# {h}\n" for h in _header(args)) + export_model_text(model),
                         encoding="utf-8")
    _record_outputs(args, "train", [model_path, text_path])
    print(f"{args.method.value}: {search.kernel.describe()} C={search.c:g} "
          f"cv accuracy {100 * search.best_score:.2f}% -> {model_path}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    method = Method.parse(model.method) if model.method else args.method
    if method is None:
        raise CommandFailed("model file does not name its method; pass --method")
    lines = [f"# {h}" for h in _header(args)] + ["path,label,decision"]
    failed = 0
    for p in args.images:
        try:
            vec = extract(method, load_image(p)).values
        except (ForgeryBenchError, OSError, ValueError) as exc:
            print(f"skipped {p}: {exc}", file=sys.stderr)
            failed += 1
            continue
        label, value = predict(model, vec)
        lines.append(f"{p},{LABEL_NAMES[label]},{value:.9g}")
        print(f"{LABEL_NAMES[label]:9s} {value:+.6f}  {p}")
    out = Path(args.out) / "predictions.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    _record_outputs(args, "predict", [out])
    if failed == len(args.images):
        raise CommandFailed("no image could be scored")
    return 0


def cmd_run(args) -> int:
    plan_path = Path(args.plan)
    if not plan_path.exists():
        bundled = Path(__file__).parent / "plans" / plan_path.name
        if bundled.exists():
            plan_path = bundled
    plan = load_plan(plan_path, grid=_grid(args), default_seed=args.seed)
    registry = _registry(args)
    for line in plan.describe():
        print(line)
    jobs = expand_jobs(plan, registry)
    if args.dry_run:
        for j in jobs:
            print(j)
        print(f"{len(jobs)} jobs")
        return 0
    reports = execute_plan(plan, registry, jobs=args.jobs)
    header = _header(args) + [f"plan: {plan_path.name}"] + plan.describe()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{plan_path.stem}.csv"
    md_path = out / f"{plan_path.stem}.md"
    csv_path.write_text(render_report(reports, "csv", header), encoding="utf-8")
    md_path.write_text(render_report(reports, "markdown", header), encoding="utf-8")
    _record_outputs(args, "run", [csv_path, md_path])
    print(render_report(reports, "markdown"), end="")
    print(f"{len(reports)} reports -> {csv_path}, {md_path}")
    return 0


def cmd_report(args) -> int:
    reports = [r for p in args.reports for r in read_report_csv(p)]
    header = _header(args) + [f"source: {Path(p).name}" for p in args.reports]
    text = render_report(reports, args.format, header)
    out = Path(args.out) / f"report.{'md' if args.format == 'markdown' else 'csv'}"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    _record_outputs(args, "report", [out])
    print(text, end="")
    if args.drop:
        same = [r for r in reports if r.set_id == "SET1_SAME"]
        cross = [r for r in reports if r.set_id == "SET2_CROSS"]
        for method, drop in sorted(summarize_drop(same, cross).items()):
            print(f"{method}: mean cross-dataset accuracy drop {drop:.1f}%")
    return 0


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--registry", help="directory of dataset manifests")
    common.add_argument("--out", default="out", help="output directory (default: out)")
    common.add_argument("--seed", type=int, default=42, help="master seed (default: 42)")
    common.add_argument("--jobs", type=_positive, default=1, help="worker processes")
    common.add_argument("--grid-file", help="grid overrides (c_grid, gamma_grid, ...)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="forgerybench",
                                     description="Image forgery detection benchmark")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus")
    p.add_argument("--count", type=_count, default=200, help="images per class")
    p.add_argument("--mix", type=_mix, default=0.5, help="copy-move/splice percent, e.g. 50/50")
    p.add_argument("--size", type=_size, action="append", help="HxW (repeatable)")
    p.add_argument("--id", default="synth", help="dataset id")
    p.add_argument("--year", type=int, default=2024)
    p.add_argument("--quality", type=_qrange, default=(70, 95), help="final JPEG quality range")
    p.add_argument("--source-quality", type=_qrange, default=(50, 65),
                   help="earlier compression range for forged content")
    p.add_argument("--matched", action="store_true",
                   help="matched-quality forgeries (harder)")
    p.add_argument("--feather", type=int, default=0, help="edge blend width in pixels")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", parents=[common], help="write a feature file")
    p.add_argument("dataset")
    p.add_argument("method", type=_method)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", parents=[common], help="grid-search and train a model")
    p.add_argument("--method", type=_method, required=True)
    p.add_argument("--dataset")
    p.add_argument("--features", help="train from a feature file instead of images")
    p.add_argument("--kernel", choices=[k.value for k in KernelKind])
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", parents=[common], help="score images with a model")
    p.add_argument("--model", required=True)
    p.add_argument("--method", type=_method)
    p.add_argument("images", nargs="+")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("run", parents=[common], help="execute an experiment plan")
    p.add_argument("plan")
    p.add_argument("--dry-run", action="store_true", help="list jobs without running them")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", parents=[common], help="re-render report csv files")
    p.add_argument("reports", nargs="+")
    p.add_argument("--format", choices=("markdown", "csv"), default="markdown")
    p.add_argument("--drop", action="store_true", help="summarise cross-dataset accuracy drop")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (CommandFailed, ForgeryBenchError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
