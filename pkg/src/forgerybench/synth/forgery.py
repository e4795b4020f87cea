"""Copy-move and splice forgeries with optional requantisation."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

from ..errors import DonorMissing, RegionOutOfBounds
from .jpeg import compress, decoded_pixels


class ForgeryKind(str, Enum):
    COPY_MOVE = "COPY_MOVE"
    SPLICE = "SPLICE"


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    w: int
    h: int

    def inside(self, height: int, width: int) -> bool:
        return (self.w > 0 and self.h > 0 and self.x >= 0 and self.y >= 0
                and self.x + self.w <= width and self.y + self.h <= height)

    def overlaps(self, other: "Rect") -> bool:
        return not (self.x + self.w <= other.x or other.x + other.w <= self.x
                    or self.y + self.h <= other.y or other.y + other.h <= self.y)

    def slices(self) -> tuple[slice, slice]:
        return slice(self.y, self.y + self.h), slice(self.x, self.x + self.w)


@dataclass(frozen=True)
class ForgeryRecipe:
    """``post`` is ``None`` or ``(q1, q2)``: the pasted patch is cut from a
    copy of its source compressed at q1 and the result is saved at q2."""

    kind: ForgeryKind
    region: Rect
    destination: tuple[int, int]
    donor: str | None = None
    post: tuple[int, int] | None = None
    feather: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", ForgeryKind(self.kind))
        if not isinstance(self.region, Rect):
            object.__setattr__(self, "region", Rect(*self.region))
        object.__setattr__(self, "destination", tuple(int(v) for v in self.destination))
        if self.kind is ForgeryKind.SPLICE and not self.donor:
            raise ValueError("SPLICE recipes need a donor id")
        if self.post is not None:
            q1, q2 = (int(q) for q in self.post)
            if not (1 <= q1 <= 100 and 1 <= q2 <= 100):
                raise ValueError(f"JPEG qualities must be in 1..100, got {self.post}")
            object.__setattr__(self, "post", (q1, q2))
        if self.feather < 0:
            raise ValueError("feather must be >= 0")

    @property
    def target(self) -> Rect:
        return Rect(self.destination[0], self.destination[1], self.region.w, self.region.h)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "region": [self.region.x, self.region.y, self.region.w, self.region.h],
            "destination": list(self.destination),
            "donor": self.donor,
            "post": list(self.post) if self.post else None,
            "feather": self.feather,
        }


@dataclass(frozen=True)
class Forgery:
    pixels: np.ndarray
    jpeg: bytes | None = None
    label: str = "tampered"


def check_recipe(recipe: ForgeryRecipe, host_shape, source_shape) -> None:
    if not recipe.region.inside(*source_shape[:2]):
        raise RegionOutOfBounds(f"source region {recipe.region} outside {source_shape[:2]}")
    if not recipe.target.inside(*host_shape[:2]):
        raise RegionOutOfBounds(f"destination {recipe.target} outside {host_shape[:2]}")
    if recipe.kind is ForgeryKind.COPY_MOVE and recipe.region.overlaps(recipe.target):
        raise RegionOutOfBounds("copy-move source and destination overlap")


def feather_mask(h: int, w: int, width: int) -> np.ndarray:
    """Opacity ramping linearly from the patch border over ``width`` pixels."""
    if width <= 0:
        return np.ones((h, w))
    ry = np.minimum(np.arange(h), np.arange(h)[::-1]) + 1
    rx = np.minimum(np.arange(w), np.arange(w)[::-1]) + 1
    d = np.minimum(ry[:, None], rx[None, :])
    return np.clip(d / (width + 1), 0.0, 1.0)


def apply_forgery(img, recipe: ForgeryRecipe,
                  donors: Mapping[str, np.ndarray] | None = None) -> Forgery:
    host = np.asarray(img, dtype=np.uint8)
    if recipe.kind is ForgeryKind.SPLICE:
        if donors is None or recipe.donor not in donors:
            raise DonorMissing(f"donor image {recipe.donor!r} not supplied")
        source = np.asarray(donors[recipe.donor], dtype=np.uint8)
    else:
        source = host
    check_recipe(recipe, host.shape, source.shape)
    if source.ndim != host.ndim:
        raise ValueError("donor and host must both be colour or both be gray")

    if recipe.post is not None:
        source = decoded_pixels(source, recipe.post[0])
    patch = source[recipe.region.slices()].astype(np.float64)

    out = host.copy()
    ys, xs = recipe.target.slices()
    if recipe.feather:
        a = feather_mask(recipe.region.h, recipe.region.w, recipe.feather)
        if out.ndim == 3:
            a = a[..., None]
        blended = a * patch + (1 - a) * host[ys, xs]
        out[ys, xs] = np.clip(np.rint(blended), 0, 255).astype(np.uint8)
    else:
        out[ys, xs] = patch.astype(np.uint8)

    if recipe.post is None:
        return Forgery(out)
    data, pixels = compress(out, recipe.post[1])
    return Forgery(pixels, data)
