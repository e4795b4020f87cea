"""Binary kernel SVM: training, prediction and model files.

Labels are fixed as pristine = -1, tampered = +1.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import (
    DimensionMismatch,
    NonConvergence,
    ParseError,
    SingleClassTrainingSet,
)
from .kernels import KernelKind, KernelSpec, ScalerParams, as_matrix, fit_scaler, kernel_matrix
from .smo import solve_dual

PRISTINE = -1
TAMPERED = 1
LABEL_NAMES = {PRISTINE: "pristine", TAMPERED: "tampered"}

DEFAULT_TOL = 1e-3
DEFAULT_MAX_EPOCHS = 10_000

MODEL_MAGIC = b"FBSVM\x00\x00\x00"
MODEL_VERSION = 1


def label_value(label) -> int:
    """Map ``pristine``/``tampered`` (or -1/+1, 0/1) to -1/+1."""
    if isinstance(label, str):
        key = label.strip().lower()
        if key == "pristine":
            return PRISTINE
        if key == "tampered":
            return TAMPERED
        raise ValueError(f"unknown label {label!r}")
    value = int(label)
    if value in (-1, 0):
        return PRISTINE
    if value == 1:
        return TAMPERED
    raise ValueError(f"unknown label {label!r}")


def as_labels(labels) -> np.ndarray:
    return np.array([label_value(v) for v in labels], dtype=np.float64)


@dataclass
class SvmModel:
    kernel: KernelSpec
    c: float
    support_vectors: np.ndarray  # already standardised
    dual_coeffs: np.ndarray      # alpha_i * y_i
    bias: float
    scaler: ScalerParams
    seed: int = 0
    method: str = ""
    converged: bool = True
    iterations: int = 0
    max_violation: float = 0.0
    classes: tuple = field(default=(PRISTINE, TAMPERED))

    @property
    def dim(self) -> int:
        return self.scaler.dim

    def decision_function(self, X) -> np.ndarray:
        X = np.atleast_2d(as_matrix(X) if not isinstance(X, np.ndarray) else X)
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"model expects {self.dim} features, got {X.shape[1]}")
        Z = self.scaler.transform(X)
        if self.support_vectors.shape[0] == 0:
            return np.full(Z.shape[0], self.bias)
        K = kernel_matrix(self.kernel, Z, self.support_vectors)
        return K @ self.dual_coeffs + self.bias

    def predict_labels(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) > 0, TAMPERED, PRISTINE)


def _max_iter(n: int, max_epochs: int) -> int:
    return int(max_epochs) * max(int(n), 1)


def fit_prepared(K: np.ndarray, y: np.ndarray, c: float, tol: float = DEFAULT_TOL,
                 max_epochs: int = DEFAULT_MAX_EPOCHS, seed: int = 0):
    """Solve the dual on a precomputed kernel matrix.

    The seed fixes the order in which equally violating pairs are visited.
    Returns ``(alpha, bias, iterations, gap)`` in the caller's sample order.
    """
    n = y.shape[0]
    perm = np.random.default_rng(seed).permutation(n)
    alpha_p, bias, it, gap = solve_dual(K[np.ix_(perm, perm)], y[perm], c, tol,
                                        _max_iter(n, max_epochs))
    alpha = np.empty(n)
    alpha[perm] = alpha_p
    return alpha, bias, it, gap


def build_model(Z, y, alpha, bias, kernel, c, scaler, *, seed=0, method="",
                iterations=0, gap=0.0, tol=DEFAULT_TOL) -> SvmModel:
    sv = alpha > 0
    return SvmModel(
        kernel=kernel,
        c=float(c),
        support_vectors=np.ascontiguousarray(Z[sv]),
        dual_coeffs=alpha[sv] * y[sv],
        bias=float(bias),
        scaler=scaler,
        seed=int(seed),
        method=str(method),
        converged=bool(gap < tol),
        iterations=int(iterations),
        max_violation=float(max(gap, 0.0)),
    )


def train_svm(samples, labels, kernel: KernelSpec, c: float, tol: float = DEFAULT_TOL,
              max_epochs: int = DEFAULT_MAX_EPOCHS, seed: int = 0, method: str = "") -> SvmModel:
    """Fit a standardising scaler and a soft-margin SVM.

    Raises :class:`NonConvergence` (carrying the last iterate as ``.model``)
    when the iteration cap of ``max_epochs * n`` is hit.
    """
    X = as_matrix(samples)
    y = as_labels(labels)
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatch(f"{X.shape[0]} samples but {y.shape[0]} labels")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise SingleClassTrainingSet("training set needs both pristine and tampered samples")
    if not c > 0:
        raise ValueError(f"C must be positive, got {c}")
    scaler = fit_scaler(X)
    Z = scaler.transform(X)
    K = kernel_matrix(kernel, Z, Z)
    alpha, bias, it, gap = fit_prepared(K, y, c, tol, max_epochs, seed)
    model = build_model(Z, y, alpha, bias, kernel, c, scaler, seed=seed, method=method,
                        iterations=it, gap=gap, tol=tol)
    if not model.converged:
        raise NonConvergence(gap, it, model)
    return model


def predict(model: SvmModel, x) -> tuple[int, float]:
    """Label and decision value for one sample; a zero decision means pristine."""
    value = float(model.decision_function(np.atleast_2d(np.asarray(getattr(x, "values", x),
                                                                  dtype=np.float64)))[0])
    return (TAMPERED if value > 0 else PRISTINE), value


# -- model files -------------------------------------------------------------

_HEADER = struct.Struct("<8sI16sBid d d qd II")


def save_model(model: SvmModel, path: str | os.PathLike) -> None:
    """Binary model: fixed header, then scaler mean/scale, support vectors and
    dual coefficients, all little-endian float64."""
    kind = 0 if model.kernel.kind is KernelKind.RBF else 1
    method = model.method.encode("ascii")[:16]
    header = _HEADER.pack(
        MODEL_MAGIC, MODEL_VERSION, method, kind, model.kernel.degree,
        model.kernel.gamma, model.kernel.coef0, model.c, model.seed, model.bias,
        model.dim, model.support_vectors.shape[0],
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for arr in (model.scaler.mean, model.scaler.scale, model.support_vectors,
                    model.dual_coeffs):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path: str | os.PathLike) -> SvmModel:
    data = open(path, "rb").read()
    if len(data) < _HEADER.size or data[:8] != MODEL_MAGIC:
        raise ParseError("not a forgerybench model file", path=path)
    (_, version, method, kind, degree, gamma, coef0, c, seed, bias, d,
     n_sv) = _HEADER.unpack_from(data)
    if version != MODEL_VERSION:
        raise ParseError(f"unsupported model version {version}", path=path)
    floats = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
    expected = 2 * d + n_sv * d + n_sv
    if floats.shape[0] != expected:
        raise ParseError(f"model body has {floats.shape[0]} values, expected {expected}",
                         path=path)
    mean, scale = floats[:d], floats[d:2 * d]
    sv = floats[2 * d:2 * d + n_sv * d].reshape(n_sv, d)
    dual = floats[2 * d + n_sv * d:]
    kernel = KernelSpec(KernelKind.RBF if kind == 0 else KernelKind.POLY, gamma, degree, coef0)
    return SvmModel(kernel, c, sv.copy(), dual.copy(), bias, ScalerParams(mean, scale),
                    seed=seed, method=method.rstrip(b"\x00").decode("ascii"))


def export_model_text(model: SvmModel) -> str:
    """Human-diffable mirror of the binary model file."""
    fmt = "{:.17g}".format
    lines = [
        f"format_version: {MODEL_VERSION}",
        f"method: {model.method}",
        f"kernel: {model.kernel.kind.value}",
        f"gamma: {fmt(model.kernel.gamma)}",
        f"degree: {model.kernel.degree}",
        f"coef0: {fmt(model.kernel.coef0)}",
        f"C: {fmt(model.c)}",
        f"seed: {model.seed}",
        f"bias: {fmt(model.bias)}",
        f"dim: {model.dim}",
        f"support_vectors: {model.support_vectors.shape[0]}",
        "mean: " + " ".join(map(fmt, model.scaler.mean)),
        "scale: " + " ".join(map(fmt, model.scaler.scale)),
    ]
    for coef, sv in zip(model.dual_coeffs, model.support_vectors):
        lines.append(f"sv: {fmt(coef)} | " + " ".join(map(fmt, sv)))
    return "\n".join(lines) + "\n"
