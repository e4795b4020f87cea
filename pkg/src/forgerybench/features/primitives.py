"""Numeric building blocks shared by the extractors: LBP, block DCT, Haar DWT,
AC-coefficient statistics and first-digit/mantissa statistics."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..errors import EmptyPlane, NoNonzeroCoefficients, PlaneTooSmall, TooFewBlocks

# (row offset, col offset) starting east and turning counter-clockwise as the
# image is displayed (row 0 at the top), so the second neighbor is north-east.
LBP_NEIGHBORS = (
    (0, 1), (-1, 1), (-1, 0), (-1, -1),
    (0, -1), (1, -1), (1, 0), (1, 1),
)

# AC coefficients whose magnitude is below this are treated as exact zeros;
# it only absorbs floating-point residue of the transform.
ZERO_EPS = 1e-9


def lbp_map(plane) -> np.ndarray:
    """8-neighbour, radius-1 LBP codes for every interior pixel.

    Bit ``i`` is set when neighbour ``i`` (see ``LBP_NEIGHBORS``) is ``>=`` the
    centre. Returns a ``(h-2, w-2)`` ``uint8`` array.
    """
    p = np.asarray(plane, dtype=np.float64)
    h, w = p.shape
    if h < 3 or w < 3:
        raise PlaneTooSmall(f"LBP needs at least 3x3 samples, got {w}x{h}")
    center = p[1:-1, 1:-1]
    codes = np.zeros(center.shape, dtype=np.uint8)
    for bit, (dr, dc) in enumerate(LBP_NEIGHBORS):
        neighbor = p[1 + dr:h - 1 + dr, 1 + dc:w - 1 + dc]
        codes |= (neighbor >= center).astype(np.uint8) << bit
    return codes


def lbp_histogram(codes) -> np.ndarray:
    codes = np.asarray(codes)
    if codes.size == 0:
        raise EmptyPlane("cannot histogram an empty code plane")
    counts = np.bincount(codes.ravel().astype(np.int64), minlength=256)
    return counts / counts.sum()


@lru_cache(maxsize=None)
def dct_matrix(n: int) -> np.ndarray:
    """Orthonormal DCT-II basis, rows indexed by frequency."""
    k = np.arange(n)[:, None]
    x = np.arange(n)[None, :]
    m = np.cos(np.pi * (2 * x + 1) * k / (2 * n))
    m[0] *= np.sqrt(1.0 / n)
    m[1:] *= np.sqrt(2.0 / n)
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class DctBlock:
    n: int
    coeffs: np.ndarray

    @property
    def dc(self) -> float:
        return float(self.coeffs[0, 0])


def dct2(block) -> DctBlock:
    b = np.asarray(block, dtype=np.float64)
    n = b.shape[0]
    if b.shape != (n, n) or n < 2:
        raise ValueError(f"dct2 needs a square block with side >= 2, got {b.shape}")
    c = dct_matrix(n)
    return DctBlock(n, c @ b @ c.T)


def idct2(block: DctBlock) -> np.ndarray:
    c = dct_matrix(block.n)
    return c.T @ block.coeffs @ c


def dct2_stack(blocks) -> np.ndarray:
    """Vectorised :func:`dct2` over an ``(k, n, n)`` stack; returns coefficients."""
    b = np.asarray(blocks, dtype=np.float64)
    c = dct_matrix(b.shape[-1])
    return c @ b @ c.T


@lru_cache(maxsize=None)
def zigzag_order(n: int = 8) -> tuple[tuple[int, int], ...]:
    """JPEG zig-zag scan of an ``n x n`` block as (row, col) pairs."""
    order = []
    for s in range(2 * n - 1):
        diag = [(r, s - r) for r in range(n) if 0 <= s - r < n]
        # even anti-diagonals run bottom-left to top-right
        order.extend(reversed(diag) if s % 2 == 0 else diag)
    return tuple(order)


def _coeff_stack(blocks) -> np.ndarray:
    if isinstance(blocks, np.ndarray):
        return blocks.astype(np.float64, copy=False)
    return np.stack([b.coeffs if isinstance(b, DctBlock) else np.asarray(b) for b in blocks])


def _zigzag_ac(coeffs: np.ndarray) -> np.ndarray:
    rows, cols = zip(*zigzag_order(coeffs.shape[-1])[1:])
    return coeffs[:, list(rows), list(cols)]


def round_half_away(x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


def ac_statistics(blocks) -> tuple[np.ndarray, np.ndarray]:
    """Per AC position (zig-zag order) population std and fraction of ones.

    ``blocks`` is a list of :class:`DctBlock` or an ``(k, 8, 8)`` coefficient
    stack. A coefficient counts as a "one" when ``|c|`` rounds half away from
    zero to exactly 1.
    """
    coeffs = _coeff_stack(blocks)
    if coeffs.shape[0] < 2:
        raise TooFewBlocks(f"need at least 2 blocks, got {coeffs.shape[0]}")
    if coeffs.shape[1:] != (8, 8):
        raise ValueError("ac_statistics expects 8x8 blocks")
    ac = _zigzag_ac(coeffs)
    std = ac.std(axis=0)
    ones = (round_half_away(np.abs(ac)) == 1.0).mean(axis=0)
    return std, ones


def _moments(m: np.ndarray) -> tuple[float, float, float, float]:
    mean = m.mean()
    dev = m - mean
    var = float(np.mean(dev ** 2))
    if var <= 0.0:
        return float(mean), 0.0, 0.0, 0.0
    sd = np.sqrt(var)
    skew = float(np.mean(dev ** 3) / sd ** 3)
    kurt = float(np.mean(dev ** 4) / var ** 2 - 3.0)
    return float(mean), var, skew, kurt


def mantissa_decompose(values) -> tuple[np.ndarray, np.ndarray]:
    """Split positive values into (leading digit, mantissa in [1, 10))."""
    v = np.asarray(values, dtype=np.float64)
    e = np.floor(np.log10(v))
    # multiply by an exact power of ten rather than divide by an inexact one
    # (0.03 / 0.01 == 2.9999999999999996 but 0.03 * 100 == 3.0)
    m = np.where(e >= 0, v / 10.0 ** np.abs(e), v * 10.0 ** np.abs(e))
    m = np.round(m, 12)
    # log10 can land one ulp off near exact powers of ten
    m = np.where(m >= 10.0, m / 10.0, m)
    m = np.where(m < 1.0, m * 10.0, m)
    digits = np.clip(np.floor(m), 1, 9).astype(np.int64)
    return digits, m


def first_digit_mantissa_stats(values) -> np.ndarray:
    """9 normalised first-digit bins followed by mean, variance, skewness and
    excess kurtosis of the mantissas. Zeros (``|v| < ZERO_EPS``) are skipped."""
    v = np.abs(np.asarray(values, dtype=np.float64).ravel())
    v = v[v >= ZERO_EPS]
    if v.size == 0:
        raise NoNonzeroCoefficients("no nonzero coefficients to analyse")
    digits, m = mantissa_decompose(v)
    hist = np.bincount(digits, minlength=10)[1:10] / v.size
    return np.concatenate([hist, _moments(m)])


def mantissa_features(blocks) -> np.ndarray:
    coeffs = _coeff_stack(blocks)
    if coeffs.shape[0] < 1:
        raise TooFewBlocks("need at least one block")
    ac = coeffs.reshape(coeffs.shape[0], -1)[:, 1:]
    return first_digit_mantissa_stats(ac)


@dataclass(frozen=True)
class DwtBands:
    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    def __iter__(self):
        return iter((self.ll, self.lh, self.hl, self.hh))


def haar_dwt1(plane) -> DwtBands:
    """One-level orthonormal 2-D Haar transform.

    ``lh`` sums horizontally and differences vertically (horizontal edges);
    ``hl`` is the transposed case. Odd trailing rows/columns are dropped.
    """
    p = np.asarray(plane, dtype=np.float64)
    h, w = p.shape
    if h < 2 or w < 2:
        raise PlaneTooSmall(f"Haar DWT needs at least 2x2 samples, got {w}x{h}")
    p = p[: h - h % 2, : w - w % 2]
    a = p[0::2, 0::2]
    b = p[0::2, 1::2]
    c = p[1::2, 0::2]
    d = p[1::2, 1::2]
    return DwtBands(
        ll=(a + b + c + d) / 2.0,
        lh=(a + b - c - d) / 2.0,
        hl=(a - b + c - d) / 2.0,
        hh=(a - b - c + d) / 2.0,
    )
