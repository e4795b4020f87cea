"""The five method-specific feature pipelines.

Each extractor maps a :class:`~forgerybench.imgio.YCbCrImage` to a fixed-length
:class:`FeatureVector`. Block sizes live in module constants; changing them
changes the dimensionality contract in ``DIMENSIONS`` too.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..errors import PlaneTooSmall, TooFewBlocks, UnknownMethod
from ..imgio import YCbCrImage, block_stack, to_grayscale
from .primitives import (
    ac_statistics,
    dct2_stack,
    haar_dwt1,
    lbp_histogram,
    lbp_map,
    mantissa_features,
)


class Method(str, Enum):
    ALAHMADI = "ALAHMADI"
    DUA = "DUA"
    ARMAN = "ARMAN"
    MANDEEP = "MANDEEP"
    MOHAMMED = "MOHAMMED"

    def __str__(self):
        return self.value

    @classmethod
    def parse(cls, name) -> "Method":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().upper())
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise UnknownMethod(f"unknown method {name!r}; valid ids: {valid}") from None


DIMENSIONS = {
    Method.ALAHMADI: 512,
    Method.DUA: 378,
    Method.ARMAN: 13,
    Method.MANDEEP: 1024,
    Method.MOHAMMED: 128,
}

ALAHMADI_BLOCK = 16
MOHAMMED_BLOCK = 8
DCT_BLOCK = 8


@dataclass(frozen=True)
class FeatureVector:
    method: Method
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        method = Method.parse(self.method)
        values = np.array(self.values, dtype=np.float64).ravel()
        if values.shape[0] != DIMENSIONS[method]:
            raise ValueError(
                f"{method} vectors have {DIMENSIONS[method]} entries, got {values.shape[0]}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("feature vector contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "method", method)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.shape[0]


def _blockwise_dct(plane, block: int, min_blocks: int, err=TooFewBlocks) -> np.ndarray:
    blocks = block_stack(plane, block)
    if blocks.shape[0] < min_blocks:
        raise err(
            f"plane of shape {np.shape(plane)} yields {blocks.shape[0]} "
            f"{block}x{block} blocks, need {min_blocks}"
        )
    return dct2_stack(blocks)


def extract_alahmadi(img: YCbCrImage) -> FeatureVector:
    """Chroma LBP maps -> block DCT -> per-coefficient std across blocks."""
    parts = []
    for plane in (img.cb, img.cr):
        coeffs = _blockwise_dct(lbp_map(plane), ALAHMADI_BLOCK, 2, err=PlaneTooSmall)
        parts.append(coeffs.reshape(coeffs.shape[0], -1).std(axis=0))
    return FeatureVector(Method.ALAHMADI, np.concatenate(parts))


def extract_dua(img: YCbCrImage) -> FeatureVector:
    parts = []
    for plane in (img.y, img.cb, img.cr):
        std, ones = ac_statistics(_blockwise_dct(plane, DCT_BLOCK, 2))
        parts.extend([std, ones])
    return FeatureVector(Method.DUA, np.concatenate(parts))


def extract_arman(img: YCbCrImage) -> FeatureVector:
    coeffs = _blockwise_dct(img.y, DCT_BLOCK, 1)
    return FeatureVector(Method.ARMAN, mantissa_features(coeffs))


def extract_mandeep(img: YCbCrImage) -> FeatureVector:
    gray = to_grayscale(img)
    if min(gray.shape) < 6:
        raise PlaneTooSmall(f"grayscale plane {gray.shape} too small for DWT+LBP")
    bands = haar_dwt1(gray)
    return FeatureVector(
        Method.MANDEEP, np.concatenate([lbp_histogram(lbp_map(b)) for b in bands])
    )


def extract_mohammed(img: YCbCrImage) -> FeatureVector:
    """Chroma LBP maps -> block DCT -> per-coefficient mean across blocks."""
    parts = []
    for plane in (img.cb, img.cr):
        codes = lbp_map(plane)
        coeffs = _blockwise_dct(codes, MOHAMMED_BLOCK, 1)
        parts.append(coeffs.reshape(coeffs.shape[0], -1).mean(axis=0))
    return FeatureVector(Method.MOHAMMED, np.concatenate(parts))


EXTRACTORS = {
    Method.ALAHMADI: extract_alahmadi,
    Method.DUA: extract_dua,
    Method.ARMAN: extract_arman,
    Method.MANDEEP: extract_mandeep,
    Method.MOHAMMED: extract_mohammed,
}


def extract(method, img: YCbCrImage) -> FeatureVector:
    return EXTRACTORS[Method.parse(method)](img)
