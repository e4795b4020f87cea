"""Stratified k-fold grid search over (C, gamma[, degree])."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..errors import TooFewSamplesPerClass
from .kernels import KernelKind, KernelSpec, as_matrix, fit_scaler, kernel_matrix
from .model import DEFAULT_MAX_EPOCHS, DEFAULT_TOL, as_labels, fit_prepared

# Grid token resolved to 1 / n_features at search time.
GAMMA_INV_DIM = "1/d"

DEFAULT_C_GRID = (0.1, 1.0, 10.0, 100.0, 1000.0)
DEFAULT_GAMMA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0, GAMMA_INV_DIM)
DEFAULT_DEGREE_GRID = (2, 3)


@dataclass(frozen=True)
class GridSearchConfig:
    c_grid: tuple = DEFAULT_C_GRID
    gamma_grid: tuple = DEFAULT_GAMMA_GRID
    degree_grid: tuple = DEFAULT_DEGREE_GRID
    folds: int = 10
    seed: int = 42
    coef0: float = 1.0
    tol: float = DEFAULT_TOL
    max_epochs: int = DEFAULT_MAX_EPOCHS

    def __post_init__(self):
        for name in ("c_grid", "gamma_grid", "degree_grid"):
            values = tuple(getattr(self, name))
            if not values:
                raise ValueError(f"{name} must not be empty")
            object.__setattr__(self, name, values)
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if any(not c > 0 for c in self.c_grid):
            raise ValueError("C values must be positive")
        for g in self.gamma_grid:
            if g != GAMMA_INV_DIM and not float(g) > 0:
                raise ValueError("gamma values must be positive")


def resolve_gamma(g, dim: int) -> float:
    return 1.0 / dim if g == GAMMA_INV_DIM else float(g)


@dataclass(frozen=True)
class CvCell:
    kernel: KernelSpec
    c: float
    mean: float
    std: float
    converged: bool
    fold_scores: tuple = field(default=(), repr=False)

    def order_key(self):
        return (self.c, self.kernel.gamma, self.kernel.degree)


@dataclass(frozen=True)
class GridSearchResult:
    kernel: KernelSpec
    c: float
    cv_table: tuple
    all_disqualified: bool = False

    @property
    def best_score(self) -> float:
        for cell in self.cv_table:
            if cell.kernel == self.kernel and cell.c == self.c and cell.converged:
                return cell.mean
        return float("nan")


def stratified_folds(labels, folds: int, seed: int) -> list[np.ndarray]:
    """Seeded stratified assignment; returns per-fold validation indices."""
    y = np.asarray(labels)
    rng = np.random.default_rng(seed)
    buckets = [[] for _ in range(folds)]
    offset = 0
    for cls in (-1.0, 1.0):
        idx = np.flatnonzero(y == cls)
        if idx.size < folds:
            raise TooFewSamplesPerClass(
                f"class {int(cls):+d} has {idx.size} samples, need >= {folds} for {folds}-fold CV"
            )
        idx = idx[rng.permutation(idx.size)]
        for k, i in enumerate(idx):
            buckets[(k + offset) % folds].append(int(i))
        # keep fold sizes balanced when class sizes are not multiples of folds
        offset = (offset + idx.size) % folds
    return [np.array(sorted(b), dtype=np.int64) for b in buckets]


def kernel_cells(kind, cfg: GridSearchConfig, dim: int) -> list[KernelSpec]:
    kind = KernelKind(str(kind).upper())
    gammas = [resolve_gamma(g, dim) for g in cfg.gamma_grid]
    if kind is KernelKind.RBF:
        return [KernelSpec(kind, g) for g in gammas]
    return [KernelSpec(kind, g, d, cfg.coef0) for g, d in itertools.product(gammas, cfg.degree_grid)]


def kfold_grid_search(samples, labels, kind, cfg: GridSearchConfig = GridSearchConfig()
                      ) -> GridSearchResult:
    """Score every grid cell by mean stratified k-fold accuracy.

    Ties go to the smaller C, then smaller gamma, then smaller degree. A cell
    with any non-converged fold is disqualified.
    """
    X = as_matrix(samples)
    y = as_labels(labels)
    folds = stratified_folds(y, cfg.folds, cfg.seed)
    kernels = kernel_cells(kind, cfg, X.shape[1])
    cs = [float(c) for c in cfg.c_grid]

    scores = {}  # (kernel index, c index) -> list of fold accuracies or None
    for fold_no, val_idx in enumerate(folds):
        train_mask = np.ones(y.shape[0], dtype=bool)
        train_mask[val_idx] = False
        Xtr, ytr = X[train_mask], y[train_mask]
        scaler = fit_scaler(Xtr)
        Ztr = scaler.transform(Xtr)
        Zva = scaler.transform(X[val_idx])
        yva = y[val_idx]
        for ki, kernel in enumerate(kernels):
            Ktr = kernel_matrix(kernel, Ztr, Ztr)
            Kva = kernel_matrix(kernel, Zva, Ztr)
            for ci, c in enumerate(cs):
                cell = scores.setdefault((ki, ci), [])
                if cell is None:
                    continue
                alpha, bias, _, gap = fit_prepared(Ktr, ytr, c, cfg.tol, cfg.max_epochs,
                                                   cfg.seed + fold_no)
                if not gap < cfg.tol:
                    scores[(ki, ci)] = None
                    continue
                dec = Kva @ (alpha * ytr) + bias
                pred = np.where(dec > 0, 1.0, -1.0)
                cell.append(float(np.mean(pred == yva)))

    table = []
    for ki, kernel in enumerate(kernels):
        for ci, c in enumerate(cs):
            fs = scores[(ki, ci)]
            if fs is None:
                table.append(CvCell(kernel, c, float("nan"), float("nan"), False))
            else:
                table.append(CvCell(kernel, c, float(np.mean(fs)), float(np.std(fs)), True,
                                    tuple(fs)))
    table.sort(key=CvCell.order_key)

    valid = [cell for cell in table if cell.converged]
    if not valid:
        first = table[0]
        return GridSearchResult(first.kernel, first.c, tuple(table), all_disqualified=True)
    best = max(cell.mean for cell in valid)
    winner = next(cell for cell in valid if cell.mean == best)
    return GridSearchResult(winner.kernel, winner.c, tuple(table))
