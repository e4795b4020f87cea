"""Evaluation reports and their csv / markdown renderings."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from ..classifier.kernels import KernelKind, KernelSpec
from ..errors import EmptyInput, ParseError
from .metrics import ClassScores, Metrics, mean_metrics

SET_IDS = ("SET1_SAME", "SET1_AMALGAM", "SET2_CROSS", "SET3_WILD", "SET3_AMALGAM")

CSV_COLUMNS = ("set", "method", "train", "test", "accuracy", "macro_f1", "p_prec", "p_rec",
               "t_prec", "t_rec", "degenerate", "kernel", "C", "gamma_or_degree", "seed")


@dataclass(frozen=True)
class EvaluationReport:
    set_id: str
    method: str
    train: str
    test: str
    metrics: Metrics
    kernel: KernelSpec | None
    c: float | None
    seed: int
    split_fraction: float | None = None
    n_train: int = 0
    n_test: int = 0
    flagged: str = ""        # e.g. non-convergence, set when the cell is suspect
    repeat: int | None = None
    skipped: tuple = field(default=(), compare=False)

    @property
    def accuracy(self) -> float:
        return self.metrics.accuracy

    @property
    def macro_f1(self) -> float:
        return self.metrics.macro_f1

    @property
    def degenerate(self) -> bool:
        return self.metrics.degenerate


def mean_report(reports) -> EvaluationReport:
    reports = list(reports)
    if not reports:
        raise EmptyInput("no reports to average")
    first = reports[0]
    flags = sorted({r.flagged for r in reports if r.flagged})
    return EvaluationReport(
        set_id=first.set_id, method=first.method, train=first.train, test=first.test,
        metrics=mean_metrics(r.metrics for r in reports),
        kernel=first.kernel if all(r.kernel == first.kernel for r in reports) else None,
        c=first.c if all(r.c == first.c for r in reports) else None,
        seed=first.seed, split_fraction=first.split_fraction,
        n_train=first.n_train, n_test=first.n_test,
        flagged="; ".join(flags), repeat=None,
    )


def format_cell(accuracy: float, macro_f1: float, degenerate: bool) -> str:
    """``93.18% (0.93)``, with a trailing ``*`` for degenerate runs."""
    return f"{accuracy:.2f}% ({macro_f1:.2f})" + ("*" if degenerate else "")


def report_cell(r: EvaluationReport) -> str:
    return format_cell(r.accuracy, r.macro_f1, r.degenerate)


def _param(r: EvaluationReport) -> str:
    if r.kernel is None:
        return ""
    if r.kernel.kind is KernelKind.POLY:
        return f"{r.kernel.degree}"
    return f"{r.kernel.gamma:.6g}"


def csv_row(r: EvaluationReport) -> list[str]:
    m = r.metrics
    return [
        r.set_id, r.method, r.train, r.test,
        f"{m.accuracy:.2f}", f"{m.macro_f1:.2f}",
        f"{m.pristine.precision:.4f}", f"{m.pristine.recall:.4f}",
        f"{m.tampered.precision:.4f}", f"{m.tampered.recall:.4f}",
        "1" if m.degenerate else "0",
        r.kernel.kind.value if r.kernel else "", "" if r.c is None else f"{r.c:g}",
        _param(r), str(r.seed),
    ]


def _column_key(r: EvaluationReport) -> str:
    if r.set_id in ("SET2_CROSS", "SET3_WILD"):
        return f"{r.train} -> {r.test}"
    if r.set_id.endswith("_AMALGAM"):
        return f"{r.test} sample {r.repeat + 1}" if r.repeat is not None else f"{r.test} mean"
    return r.test


def _markdown_table(reports) -> list[str]:
    columns, methods = [], []
    cells = {}
    for r in reports:
        col = _column_key(r)
        if col not in columns:
            columns.append(col)
        if r.method not in methods:
            methods.append(r.method)
        cells[(r.method, col)] = report_cell(r) + (" !" if r.flagged else "")
    lines = ["| Method | " + " | ".join(columns) + " |",
             "|---|" + "---|" * len(columns)]
    for meth in methods:
        row = [cells.get((meth, col), "") for col in columns]
        lines.append(f"| {meth} | " + " | ".join(row) + " |")
    return lines


def render_report(reports, fmt: str = "markdown", header=()) -> str:
    """Render reports as ``csv`` (one row each) or ``markdown`` (one table per
    set: methods as rows, datasets or train -> test pairs as columns)."""
    reports = list(reports)
    if not reports:
        raise EmptyInput("no reports to render")
    if fmt == "csv":
        buf = io.StringIO()
        for line in header:
            buf.write(f"# {line}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in reports:
            writer.writerow(csv_row(r))
        return buf.getvalue()
    if fmt != "markdown":
        raise ValueError(f"unknown report format {fmt!r}")
    out = [f"<!-- {line} -->" for line in header]
    sets = []
    for r in reports:
        if r.set_id not in sets:
            sets.append(r.set_id)
    for set_id in sets:
        subset = [r for r in reports if r.set_id == set_id]
        if out:
            out.append("")
        out.append(f"## {set_id}")
        out.append("")
        out.extend(_markdown_table(subset))
        flagged = [r for r in subset if r.flagged]
        if flagged:
            out.append("")
            for r in flagged:
                out.append(f"- `!` {r.method} {_column_key(r)}: {r.flagged}")
    out.append("")
    out.append("Cells: accuracy % (macro-F1); `*` marks a class that is never "
               "correctly predicted (precision = recall = 0).")
    return "\n".join(out) + "\n"


def summarize_drop(same_reports, cross_reports) -> dict[str, float]:
    """Mean relative accuracy drop (percent) per method, going from
    same-dataset to cross-dataset evaluation of the same training set."""
    base = {(r.method, r.train): r.accuracy for r in same_reports}
    drops: dict[str, list[float]] = {}
    for r in cross_reports:
        ref = base.get((r.method, r.train))
        if ref:
            drops.setdefault(r.method, []).append(100.0 * (ref - r.accuracy) / ref)
    return {m: sum(v) / len(v) for m, v in drops.items()}


def read_report_csv(path) -> list[EvaluationReport]:
    """Load rows written by :func:`render_report` (csv). Values come back at
    the printed precision; per-class F1 is recomputed from precision/recall."""
    def scores(p, r):
        return ClassScores(p, r, 2 * p * r / (p + r) if p + r else 0.0)

    reports = []
    with open(path, encoding="utf-8", newline="") as fh:
        rows = csv.reader(line for line in fh if not line.startswith("#"))
        head = next(rows, None)
        if head is None or tuple(head) != CSV_COLUMNS:
            raise ParseError("not a report csv (unexpected columns)", path=path)
        for lineno, row in enumerate(rows, 2):
            try:
                rec = dict(zip(CSV_COLUMNS, row, strict=True))
                kernel = None
                if rec["kernel"]:
                    kind = KernelKind(rec["kernel"])
                    if kind is KernelKind.POLY:
                        kernel = KernelSpec(kind, 1.0, int(rec["gamma_or_degree"]))
                    else:
                        kernel = KernelSpec(kind, float(rec["gamma_or_degree"]))
                metrics = Metrics(
                    accuracy=float(rec["accuracy"]), macro_f1=float(rec["macro_f1"]),
                    pristine=scores(float(rec["p_prec"]), float(rec["p_rec"])),
                    tampered=scores(float(rec["t_prec"]), float(rec["t_rec"])),
                    degenerate=rec["degenerate"] == "1", n=0)
                reports.append(EvaluationReport(
                    rec["set"], rec["method"], rec["train"], rec["test"], metrics, kernel,
                    float(rec["C"]) if rec["C"] else None, int(rec["seed"])))
            except (ValueError, KeyError) as exc:
                raise ParseError(str(exc), line=lineno, path=path) from None
    return reports
