from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import DimensionMismatch, TooFewSamples

# Standard deviations below this are treated as zero (feature passes centred).
ZERO_SCALE = 1e-12


class KernelKind(str, Enum):
    RBF = "RBF"
    POLY = "POLY"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind
    gamma: float
    degree: int = 3
    coef0: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", KernelKind(str(self.kind).upper()))
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if int(self.degree) != self.degree or self.degree < 1:
            raise ValueError(f"degree must be an integer >= 1, got {self.degree}")
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "coef0", float(self.coef0))

    def describe(self) -> str:
        if self.kind is KernelKind.RBF:
            return f"RBF(gamma={self.gamma:g})"
        return f"POLY(degree={self.degree}, gamma={self.gamma:g}, coef0={self.coef0:g})"


def kernel_eval(k: KernelSpec, a, b) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DimensionMismatch(f"kernel arguments differ in length: {a.size} vs {b.size}")
    if k.kind is KernelKind.RBF:
        diff = a - b
        return float(np.exp(-k.gamma * np.dot(diff, diff)))
    return float((k.gamma * np.dot(a, b) + k.coef0) ** k.degree)


def kernel_matrix(k: KernelSpec, A, B) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"kernel arguments differ in width: {A.shape[1]} vs {B.shape[1]}")
    if k.kind is KernelKind.RBF:
        return np.exp(-k.gamma * cdist(A, B, "sqeuclidean"))
    return (k.gamma * (A @ B.T) + k.coef0) ** k.degree


@dataclass(frozen=True)
class ScalerParams:
    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64).ravel()
        scale = np.array(self.scale, dtype=np.float64).ravel()
        if mean.shape != scale.shape:
            raise DimensionMismatch("scaler mean and scale lengths differ")
        if np.any(scale <= 0):
            raise ValueError("scaler scale entries must be positive")
        mean.setflags(write=False)
        scale.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "scale", scale)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected {self.dim} features, got {X.shape[-1]}")
        return (X - self.mean) / self.scale


def as_matrix(samples) -> np.ndarray:
    """Stack FeatureVectors / rows into an ``(n, d)`` float matrix."""
    if isinstance(samples, np.ndarray):
        X = samples.astype(np.float64, copy=False)
        if X.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D sample matrix, got shape {X.shape}")
        return X
    rows = [np.asarray(getattr(s, "values", s), dtype=np.float64).ravel() for s in samples]
    if rows and len({r.shape[0] for r in rows}) > 1:
        raise DimensionMismatch("samples have differing dimensionality")
    return np.array(rows, dtype=np.float64).reshape(len(rows), -1)


def fit_scaler(samples) -> ScalerParams:
    X = as_matrix(samples)
    if X.shape[0] < 2:
        raise TooFewSamples(f"need at least 2 samples to fit a scaler, got {X.shape[0]}")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    return ScalerParams(mean, np.where(std < ZERO_SCALE, 1.0, std))
