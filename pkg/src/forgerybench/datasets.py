"""Dataset manifests: loading, validation, sub-sampling, amalgamation, splits.

Manifest file layout::

    # comment
    id: casia1
    year: 2013
    types: splice, copy-move
    wild: no
    subsample: 800/921          (optional)

    pristine,Au/Au_ani_0001.jpg
    tampered,Tp/Tp_D_CND_M_N_ani00018.tif

Header ``key: value`` lines come first; everything after the first entry line
is an entry ``label,relative_path[,source_id]``. Paths are relative to the
manifest's directory.
"""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    InsufficientSamples,
    InvariantViolation,
    ParseError,
    TooFewSamplesPerClass,
    UnknownDataset,
)

log = logging.getLogger(__name__)

MANIFEST_SUFFIX = ".manifest"
LARGE_MIN = 1400
SMALL_MAX = 400
NEW_ERA_YEAR = 2016
FORGERY_TYPES = ("splice", "copy-move", "erase-fill", "retouch")
LABELS = ("pristine", "tampered")


class ScaleClass(str, Enum):
    LARGE = "LARGE"
    MEDIUM = "MEDIUM"
    SMALL = "SMALL"


class EraClass(str, Enum):
    OLD = "OLD"
    NEW = "NEW"


def scale_for(total: int) -> ScaleClass:
    if total >= LARGE_MIN:
        return ScaleClass.LARGE
    if total <= SMALL_MAX:
        return ScaleClass.SMALL
    return ScaleClass.MEDIUM


def era_for(year: int) -> EraClass:
    return EraClass.OLD if year < NEW_ERA_YEAR else EraClass.NEW


@dataclass(frozen=True)
class Entry:
    path: Path
    label: str
    source: str = ""

    @property
    def image_id(self) -> str:
        stem = self.path.stem
        return f"{self.source}:{stem}" if self.source else stem


@dataclass(frozen=True)
class DatasetManifest:
    id: str
    entries: tuple
    release_year: int
    forgery_types: frozenset = frozenset()
    in_the_wild: bool = False
    scale_class: ScaleClass | None = None
    era_class: EraClass | None = None
    subsample: tuple | None = None
    root: Path | None = field(default=None, compare=False)
    missing: tuple = field(default=(), compare=False)

    def __post_init__(self):
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "forgery_types", frozenset(self.forgery_types))
        for e in entries:
            if e.label not in LABELS:
                raise InvariantViolation(f"{self.id}: bad label {e.label!r}")
        seen = set()
        for e in entries:
            if e.path in seen:
                raise InvariantViolation(f"{self.id}: duplicate entry path {e.path}")
            seen.add(e.path)
        unknown = self.forgery_types - set(FORGERY_TYPES)
        if unknown:
            raise InvariantViolation(f"{self.id}: unknown forgery types {sorted(unknown)}")
        scale = scale_for(len(entries))
        if self.scale_class is None:
            object.__setattr__(self, "scale_class", scale)
        elif ScaleClass(self.scale_class) is not scale:
            raise InvariantViolation(
                f"{self.id}: declared scale {self.scale_class} but {len(entries)} entries imply {scale.value}"
            )
        era = era_for(self.release_year)
        if self.era_class is None:
            object.__setattr__(self, "era_class", era)
        elif EraClass(self.era_class) is not era:
            raise InvariantViolation(
                f"{self.id}: declared era {self.era_class} but year {self.release_year} implies {era.value}"
            )
        object.__setattr__(self, "scale_class", ScaleClass(self.scale_class))
        object.__setattr__(self, "era_class", EraClass(self.era_class))
        if self.subsample is None:
            object.__setattr__(self, "subsample", self.counts)

    def of_label(self, label: str) -> list[Entry]:
        return [e for e in self.entries if e.label == label]

    @property
    def counts(self) -> tuple[int, int]:
        n_p = sum(1 for e in self.entries if e.label == "pristine")
        return n_p, len(self.entries) - n_p

    def __len__(self):
        return len(self.entries)

    def with_entries(self, entries: Sequence[Entry], **changes) -> "DatasetManifest":
        """Copy with new entries; scale/era/subsample are recomputed."""
        return replace(self, entries=tuple(entries), scale_class=None, era_class=None,
                       subsample=None, missing=(), **changes)


# ----------------------------------------------------------------- file I/O


def _parse_bool(value: str, lineno: int, path) -> bool:
    v = value.strip().lower()
    if v in ("yes", "true", "1", "y"):
        return True
    if v in ("no", "false", "0", "n"):
        return False
    raise ParseError(f"expected yes/no, got {value!r}", line=lineno, path=path)


def _parse_pair(value: str, lineno: int, path) -> tuple[int, int]:
    try:
        a, b = value.replace(",", "/").split("/")
        return int(a), int(b)
    except ValueError:
        raise ParseError(f"expected N/M counts, got {value!r}", line=lineno, path=path) from None


def parse_manifest(text: str, root: Path | None = None, path=None,
                   check_files: bool = True) -> DatasetManifest:
    header: dict[str, tuple[str, int]] = {}
    entries: list[Entry] = []
    root = Path(root) if root is not None else Path(".")
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, rest = line.partition(",")
        if not entries and ":" in line and head.strip().lower() not in LABELS:
            key, _, value = line.partition(":")
            key = key.strip().lower()
            if key in header:
                raise ParseError(f"duplicate header key {key!r}", line=lineno, path=path)
            header[key] = (value.strip(), lineno)
            continue
        label = head.strip().lower()
        if label not in LABELS or not rest.strip():
            raise ParseError(f"expected 'label,path' entry, got {line!r}", line=lineno, path=path)
        rel, _, source = rest.partition(",")
        p = Path(rel.strip())
        entries.append(Entry(p if p.is_absolute() else root / p, label, source.strip()))

    def need(key):
        if key not in header:
            raise ParseError(f"missing header key {key!r}", path=path)
        return header[key]

    ds_id, _ = need("id")
    year_s, year_line = need("year")
    try:
        year = int(year_s)
    except ValueError:
        raise ParseError(f"bad year {year_s!r}", line=year_line, path=path) from None
    types = frozenset()
    if "types" in header:
        types = frozenset(t.strip().lower() for t in header["types"][0].split(",") if t.strip())
    wild = _parse_bool(*header["wild"], path) if "wild" in header else False
    sub = _parse_pair(*header["subsample"], path) if "subsample" in header else None
    scale = header.get("scale", (None,))[0]
    era = header.get("era", (None,))[0]
    try:
        manifest = DatasetManifest(
            id=ds_id, entries=tuple(entries), release_year=year, forgery_types=types,
            in_the_wild=wild, scale_class=scale.upper() if scale else None,
            era_class=era.upper() if era else None, subsample=sub, root=root,
        )
    except ValueError as exc:
        if isinstance(exc, InvariantViolation):
            raise
        raise InvariantViolation(str(exc)) from exc
    n_p, n_t = manifest.counts
    if sub is not None and (sub[0] > n_p or sub[1] > n_t):
        raise InvariantViolation(f"{ds_id}: subsample {sub} exceeds available {n_p}/{n_t}")
    if check_files:
        missing = tuple(e.path for e in entries if not e.path.is_file())
        if missing:
            log.warning("%s: %d referenced files are missing", ds_id, len(missing))
        manifest = replace(manifest, missing=missing)
    return manifest


def load_manifest(path: str | os.PathLike, check_files: bool = True) -> DatasetManifest:
    """Parse and validate a manifest file.

    Missing image files do not fail the load; they are listed in ``.missing``.
    """
    path = Path(path)
    return parse_manifest(path.read_text(encoding="utf-8"), root=path.parent, path=path,
                          check_files=check_files)


def format_manifest(m: DatasetManifest, relative_to: Path | None = None) -> str:
    lines = [
        f"id: {m.id}",
        f"year: {m.release_year}",
        f"types: {', '.join(t for t in FORGERY_TYPES if t in m.forgery_types)}",
        f"wild: {'yes' if m.in_the_wild else 'no'}",
        f"scale: {m.scale_class.value}",
        f"era: {m.era_class.value}",
    ]
    if m.subsample != m.counts:
        lines.append(f"subsample: {m.subsample[0]}/{m.subsample[1]}")
    lines.append("")
    for e in m.entries:
        p = e.path
        if relative_to is not None:
            try:
                p = Path(os.path.relpath(e.path, relative_to))
            except ValueError:
                pass
        rel = p.as_posix()
        lines.append(f"{e.label},{rel},{e.source}" if e.source else f"{e.label},{rel}")
    return "\n".join(lines) + "\n"


def write_manifest(m: DatasetManifest, path: str | os.PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_manifest(m, relative_to=path.parent), encoding="utf-8")
    return path


class Registry:
    """Manifests discovered (recursively) under a directory, keyed by id."""

    def __init__(self, manifests: Iterable[DatasetManifest] = ()):
        self._by_id: dict[str, DatasetManifest] = {}
        for m in manifests:
            self.add(m)

    def add(self, m: DatasetManifest) -> None:
        if m.id in self._by_id:
            raise InvariantViolation(f"dataset id {m.id!r} registered twice")
        self._by_id[m.id] = m

    @classmethod
    def discover(cls, directory: str | os.PathLike, check_files: bool = True) -> "Registry":
        directory = Path(directory)
        if not directory.is_dir():
            raise FileNotFoundError(f"registry directory {directory} does not exist")
        paths = sorted(directory.rglob(f"*{MANIFEST_SUFFIX}"))
        return cls(load_manifest(p, check_files=check_files) for p in paths)

    def __getitem__(self, ds_id: str) -> DatasetManifest:
        try:
            return self._by_id[ds_id]
        except KeyError:
            raise UnknownDataset(f"dataset {ds_id!r} is not registered") from None

    def __contains__(self, ds_id) -> bool:
        return ds_id in self._by_id

    def __iter__(self):
        return iter(self._by_id[k] for k in sorted(self._by_id))

    def __len__(self):
        return len(self._by_id)

    def ids(self) -> list[str]:
        return sorted(self._by_id)

    def standard(self) -> list[DatasetManifest]:
        return [m for m in self if not m.in_the_wild]

    def wild(self) -> list[DatasetManifest]:
        return [m for m in self if m.in_the_wild]


# ---------------------------------------------------------------- sampling


def _draw(rng: np.random.Generator, m: DatasetManifest, n_p: int, n_t: int) -> list[Entry]:
    chosen = []
    for label, n in (("pristine", n_p), ("tampered", n_t)):
        pool = m.of_label(label)
        if n > len(pool) or n < 0:
            raise InsufficientSamples(
                f"{m.id}: requested {n} {label} samples but only {len(pool)} available"
            )
        idx = np.sort(rng.choice(len(pool), size=n, replace=False))
        chosen.extend(pool[i] for i in idx)
    return chosen


def subsample(m: DatasetManifest, n_p: int, n_t: int, seed: int) -> DatasetManifest:
    """Uniform draw without replacement per class; keeps manifest order."""
    rng = np.random.default_rng(seed)
    return m.with_entries(_draw(rng, m, n_p, n_t))


def apply_declared_subsample(m: DatasetManifest, seed: int) -> DatasetManifest:
    """Reduce ``m`` to the counts declared in its ``subsample`` header."""
    if m.subsample == m.counts:
        return m
    return subsample(m, m.subsample[0], m.subsample[1], seed)


def amalgamate(sources: Sequence[DatasetManifest], per_source: tuple[int, int],
               seed: int, ds_id: str | None = None) -> DatasetManifest:
    """Seeded per-source draw, then union; entries keep their source id.

    One generator is consumed source by source, so a single-source
    amalgamation draws exactly what :func:`subsample` would.
    """
    if not sources:
        raise InsufficientSamples("amalgamate needs at least one source")
    rng = np.random.default_rng(seed)
    n_p, n_t = per_source
    entries = []
    for src in sources:
        for e in _draw(rng, src, n_p, n_t):
            entries.append(Entry(e.path, e.label, e.source or src.id))
    return DatasetManifest(
        id=ds_id or "amalgam(" + "+".join(s.id for s in sources) + ")",
        entries=tuple(entries),
        release_year=max(s.release_year for s in sources),
        forgery_types=frozenset().union(*(s.forgery_types for s in sources)),
        in_the_wild=all(s.in_the_wild for s in sources),
    )


@dataclass(frozen=True)
class SplitPlan:
    train: tuple
    test: tuple
    seed: int
    train_fraction: float


def stratified_split(m: DatasetManifest, train_fraction: float, seed: int) -> SplitPlan:
    """Per-class seeded shuffle and proportional cut (at least one sample of
    each class on each side)."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for label in LABELS:
        pool = m.of_label(label)
        if len(pool) < 2:
            raise TooFewSamplesPerClass(
                f"{m.id}: need >= 2 {label} entries to split, have {len(pool)}"
            )
        order = rng.permutation(len(pool))
        n_train = int(np.floor(train_fraction * len(pool) + 0.5))
        n_train = min(max(n_train, 1), len(pool) - 1)
        train.extend(pool[i] for i in order[:n_train])
        test.extend(pool[i] for i in order[n_train:])
    return SplitPlan(tuple(train), tuple(test), seed, train_fraction)


def repeat_seeds(seed: int, n: int = 3) -> list[int]:
    return [seed + k for k in range(n)]
