"""Same-dataset, cross-dataset, in-the-wild and amalgamated evaluations."""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ..classifier import GridSearchConfig, KernelKind, kfold_grid_search, train_svm
from ..classifier.model import PRISTINE, TAMPERED, SvmModel
from ..datasets import DatasetManifest, Entry, amalgamate, stratified_split
from ..errors import (
    ForgeryBenchError,
    NonConvergence,
    PlanInvariantViolation,
    WildFlagViolation,
)
from ..features import Method, extract
from ..imgio import load_image
from .metrics import compute_metrics
from .report import EvaluationReport, mean_report

log = logging.getLogger(__name__)

DEFAULT_SPLIT = 0.8

# Kernel family searched for each method.
METHOD_KERNELS = {
    Method.ALAHMADI: KernelKind.RBF,
    Method.DUA: KernelKind.RBF,
    Method.ARMAN: KernelKind.RBF,
    Method.MANDEEP: KernelKind.RBF,
    Method.MOHAMMED: KernelKind.POLY,
}


class FeatureCache:
    """Per-(method, image) memo of extracted vectors; failures remembered."""

    def __init__(self):
        self._store: dict[tuple[str, Path], np.ndarray | None] = {}
        self.errors: dict[tuple[str, Path], str] = {}

    def get(self, method: Method, path: Path) -> np.ndarray | None:
        key = (method.value, Path(path))
        if key not in self._store:
            try:
                self._store[key] = extract(method, load_image(path)).values
            except (ForgeryBenchError, OSError, ValueError) as exc:
                log.warning("feature extraction failed for %s: %s", path, exc)
                self._store[key] = None
                self.errors[key] = str(exc)
        return self._store[key]

    def matrix(self, method: Method, entries: Sequence[Entry]):
        """``(X, y, skipped_paths)``; entries that fail to load are dropped."""
        rows, labels, skipped = [], [], []
        for e in entries:
            v = self.get(method, e.path)
            if v is None:
                skipped.append(str(e.path))
                continue
            rows.append(v)
            labels.append(TAMPERED if e.label == "tampered" else PRISTINE)
        if not rows:
            raise ValueError("no usable images")
        return np.vstack(rows), np.array(labels, dtype=np.float64), tuple(skipped)


@dataclass
class Trained:
    model: SvmModel
    kernel_kind: KernelKind
    flagged: str
    n_train: int


def fit_tuned(method: Method, X, y, grid: GridSearchConfig, seed: int,
              kind: KernelKind | None = None) -> Trained:
    """Grid search on (X, y) only, then refit on all of it."""
    kind = kind or METHOD_KERNELS[method]
    cfg = replace(grid, seed=seed)
    search = kfold_grid_search(X, y, kind, cfg)
    flagged = ""
    if search.all_disqualified:
        flagged = "every grid cell failed to converge"
    try:
        model = train_svm(X, y, search.kernel, search.c, cfg.tol, cfg.max_epochs, seed,
                          method.value)
    except NonConvergence as exc:
        model = exc.model
        flagged = (flagged + "; " if flagged else "") + f"final fit did not converge ({exc})"
    return Trained(model, kind, flagged, int(y.shape[0]))


def _evaluate(set_id, method, train_id, test_id, trained: Trained, X, y, seed, *,
              split=None, skipped=(), repeat=None) -> EvaluationReport:
    pred = trained.model.predict_labels(X)
    return EvaluationReport(
        set_id=set_id, method=method.value, train=train_id, test=test_id,
        metrics=compute_metrics(pred, y), kernel=trained.model.kernel, c=trained.model.c,
        seed=seed, split_fraction=split, n_train=trained.n_train, n_test=int(y.shape[0]),
        flagged=trained.flagged, repeat=repeat, skipped=tuple(skipped),
    )


def run_same_dataset(method, dataset: DatasetManifest, split_fraction: float = DEFAULT_SPLIT,
                     grid: GridSearchConfig = GridSearchConfig(), seed: int = 42,
                     cache: FeatureCache | None = None, set_id: str = "SET1_SAME",
                     repeat: int | None = None, kind=None) -> EvaluationReport:
    method = Method.parse(method)
    cache = cache or FeatureCache()
    plan = stratified_split(dataset, split_fraction, seed)
    Xtr, ytr, skip_tr = cache.matrix(method, plan.train)
    Xte, yte, skip_te = cache.matrix(method, plan.test)
    trained = fit_tuned(method, Xtr, ytr, grid, seed, kind)
    return _evaluate(set_id, method, dataset.id, dataset.id, trained, Xte, yte, seed,
                     split=split_fraction, skipped=skip_tr + skip_te, repeat=repeat)


def _train_full(method, train: DatasetManifest, grid, seed, cache, kind):
    X, y, skipped = cache.matrix(method, train.entries)
    return fit_tuned(method, X, y, grid, seed, kind), skipped


def run_cross(method, train_dataset: DatasetManifest, test_datasets: Sequence[DatasetManifest],
              grid: GridSearchConfig = GridSearchConfig(), seed: int = 42,
              cache: FeatureCache | None = None, set_id: str = "SET2_CROSS",
              kind=None) -> list[EvaluationReport]:
    """Train once on the whole training set and score every test set."""
    method = Method.parse(method)
    cache = cache or FeatureCache()
    for t in test_datasets:
        if t.id == train_dataset.id:
            raise PlanInvariantViolation(f"{train_dataset.id} cannot be both train and test")
    trained, skipped = _train_full(method, train_dataset, grid, seed, cache, kind)
    reports = []
    for t in test_datasets:
        X, y, skip_te = cache.matrix(method, t.entries)
        reports.append(_evaluate(set_id, method, train_dataset.id, t.id, trained, X, y, seed,
                                 skipped=skipped + skip_te))
    return reports


def check_wild_flags(train_dataset: DatasetManifest, wild_datasets) -> None:
    if train_dataset.in_the_wild:
        raise WildFlagViolation(f"{train_dataset.id} is an in-the-wild set; train on a standard one")
    for t in wild_datasets:
        if not t.in_the_wild:
            raise WildFlagViolation(f"{t.id} is not marked as an in-the-wild set")


def run_wild(method, train_dataset: DatasetManifest, wild_datasets: Sequence[DatasetManifest],
             grid: GridSearchConfig = GridSearchConfig(), seed: int = 42,
             cache: FeatureCache | None = None, kind=None) -> list[EvaluationReport]:
    check_wild_flags(train_dataset, wild_datasets)
    return run_cross(method, train_dataset, wild_datasets, grid, seed, cache, "SET3_WILD", kind)


@dataclass(frozen=True)
class AmalgamResult:
    repeats: tuple
    mean: EvaluationReport


def run_amalgam(method, sources: Sequence[DatasetManifest], per_source: tuple[int, int],
                n_repeats: int = 3, grid: GridSearchConfig = GridSearchConfig(),
                seed: int = 42, split_fraction: float = DEFAULT_SPLIT,
                cache: FeatureCache | None = None, set_id: str = "SET1_AMALGAM",
                seeds: Sequence[int] | None = None, ds_id: str | None = None,
                kind=None) -> AmalgamResult:
    """Repeat (amalgamate, split, tune, train, test) with seeds seed, seed+1, ...
    and average accuracy and macro-F1 over the repeats."""
    method = Method.parse(method)
    cache = cache or FeatureCache()
    seeds = list(seeds) if seeds is not None else [seed + k for k in range(n_repeats)]
    if not seeds:
        raise ValueError("need at least one repeat")
    name = ds_id or "amalgam(" + "+".join(s.id for s in sources) + ")"
    reports = []
    for k, s in enumerate(seeds):
        mixed = amalgamate(sources, per_source, s, ds_id=name)
        reports.append(run_same_dataset(method, mixed, split_fraction, grid, s, cache, set_id,
                                        repeat=k, kind=kind))
    return AmalgamResult(tuple(reports), mean_report(reports))
