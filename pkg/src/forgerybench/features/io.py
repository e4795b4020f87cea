"""Text serialisation of feature vectors.

One record per line: ``method,image_id,label,v0,v1,...`` with values printed at
9 significant digits. Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from ..errors import ParseError
from .extractors import FeatureVector, Method


@dataclass(frozen=True)
class FeatureRecord:
    image_id: str
    label: str
    vector: FeatureVector


def format_record(rec: FeatureRecord) -> str:
    if "," in rec.image_id or "\n" in rec.image_id:
        raise ValueError(f"image id may not contain commas or newlines: {rec.image_id!r}")
    values = ",".join(f"{v:.9g}" for v in rec.vector.values)
    return f"{rec.vector.method.value},{rec.image_id},{rec.label},{values}"


def write_features(path: str | os.PathLike, records: Iterable[FeatureRecord],
                   header: Iterable[str] = ()) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        for rec in records:
            fh.write(format_record(rec) + "\n")


def parse_record(line: str, lineno: int | None = None) -> FeatureRecord:
    parts = line.rstrip("\n").split(",")
    if len(parts) < 4:
        raise ParseError("expected method,image_id,label,values...", line=lineno)
    try:
        method = Method.parse(parts[0])
        vec = FeatureVector(method, np.array([float(v) for v in parts[3:]]))
    except (ValueError, KeyError) as exc:
        raise ParseError(str(exc), line=lineno) from exc
    return FeatureRecord(parts[1], parts[2], vec)


def iter_features(path: str | os.PathLike) -> Iterator[FeatureRecord]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip() or line.startswith("#"):
                continue
            yield parse_record(line, lineno)


def read_features(path: str | os.PathLike) -> list[FeatureRecord]:
    return list(iter_features(path))
