"""Seeded synthetic corpora written as a standard registry directory.

Every image is generated from its own stream ``SeedSequence([seed, stream,
index])``, so results do not depend on generation order or worker count.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..datasets import DatasetManifest, Entry, write_manifest
from .forgery import ForgeryKind, ForgeryRecipe, Rect, apply_forgery
from .jpeg import decoded_pixels, encode_jpeg
from .textures import MIN_SIDE, procedural_texture

# independent random streams per image
_PRISTINE, _HOST, _DONOR, _RECIPE = 0, 1, 2, 3
_SEED_MASK = (1 << 64) - 1


def image_rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & _SEED_MASK, stream, index]))


@dataclass(frozen=True)
class CorpusConfig:
    n_pristine: int = 200
    n_tampered: int = 200
    sizes: tuple = ((128, 128),)
    copy_move_share: float = 0.5
    seed: int = 42
    quality_range: tuple = (70, 95)
    source_quality_range: tuple = (50, 65)
    matched_quality: bool = False
    feather: int = 0
    dataset_id: str = "synth"
    year: int = 2024

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(tuple(int(v) for v in s) for s in self.sizes))
        if self.n_pristine < 0 or self.n_tampered < 0 or self.n_pristine + self.n_tampered < 1:
            raise ValueError("corpus needs at least one image")
        if not self.sizes or any(min(s) < MIN_SIDE for s in self.sizes):
            raise ValueError(f"image sizes must be at least {MIN_SIDE}x{MIN_SIDE}")
        if not 0.0 <= self.copy_move_share <= 1.0:
            raise ValueError("copy_move_share must be within [0, 1]")
        for lo, hi in (self.quality_range, self.source_quality_range):
            if not 1 <= lo <= hi <= 100:
                raise ValueError("quality ranges must satisfy 1 <= lo <= hi <= 100")
        if self.feather < 0:
            raise ValueError("feather must be >= 0")

    @property
    def n_copy_move(self) -> int:
        return int(np.floor(self.n_tampered * self.copy_move_share + 0.5))


def _quality(rng, lo_hi) -> int:
    return int(rng.integers(lo_hi[0], lo_hi[1] + 1))


def _size(rng, sizes) -> tuple[int, int]:
    return sizes[int(rng.integers(len(sizes)))] if len(sizes) > 1 else sizes[0]


def pristine_image(seed: int, index: int, cfg: CorpusConfig) -> tuple[bytes, dict]:
    rng = image_rng(seed, _PRISTINE, index)
    h, w = _size(rng, cfg.sizes)
    q = _quality(rng, cfg.quality_range)
    return encode_jpeg(procedural_texture(rng, h, w), q), {"quality": q}


def _random_rect(rng, h: int, w: int) -> Rect:
    rw = int(rng.integers(w // 8, 3 * w // 8 + 1))
    rh = int(rng.integers(h // 8, 3 * h // 8 + 1))
    return Rect(int(rng.integers(0, w - rw + 1)), int(rng.integers(0, h - rh + 1)), rw, rh)


def make_recipe(rng, kind: ForgeryKind, h: int, w: int, donor: str | None,
                post: tuple[int, int] | None, feather: int) -> ForgeryRecipe:
    while True:
        region = _random_rect(rng, h, w)
        dest = (int(rng.integers(0, w - region.w + 1)), int(rng.integers(0, h - region.h + 1)))
        target = Rect(dest[0], dest[1], region.w, region.h)
        if kind is ForgeryKind.SPLICE or not region.overlaps(target):
            return ForgeryRecipe(kind, region, dest, donor, post, feather)


def tampered_image(seed: int, index: int, kind: ForgeryKind,
                   cfg: CorpusConfig) -> tuple[bytes, dict]:
    rng = image_rng(seed, _RECIPE, index)
    h, w = _size(rng, cfg.sizes)
    if cfg.matched_quality:
        q_host = q1 = q2 = _quality(rng, cfg.quality_range)
    else:
        # host and patch both carry an earlier low-quality compression
        q_host = _quality(rng, cfg.source_quality_range)
        q1 = _quality(rng, cfg.source_quality_range)
        q2 = _quality(rng, cfg.quality_range)
    host_px = procedural_texture(image_rng(seed, _HOST, index), h, w)
    host = decoded_pixels(host_px, q_host)
    donors = None
    donor_id = None
    if kind is ForgeryKind.SPLICE:
        donor_id = f"donor_{index:05d}"
        donor_px = procedural_texture(image_rng(seed, _DONOR, index), h, w)
        donors = {donor_id: decoded_pixels(donor_px, _quality(rng, cfg.quality_range))}
    recipe = make_recipe(rng, kind, h, w, donor_id, (q1, q2), cfg.feather)
    forged = apply_forgery(host, recipe, donors)
    info = recipe.to_dict()
    info["host_quality"] = q_host
    return forged.jpeg, info


def _job(args):
    role, seed, index, kind, cfg = args
    if role == "pristine":
        return pristine_image(seed, index, cfg)
    return tampered_image(seed, index, ForgeryKind(kind), cfg)


def _tampered_kinds(cfg: CorpusConfig) -> list[ForgeryKind]:
    kinds = ([ForgeryKind.COPY_MOVE] * cfg.n_copy_move
             + [ForgeryKind.SPLICE] * (cfg.n_tampered - cfg.n_copy_move))
    order = np.random.default_rng(np.random.SeedSequence([int(cfg.seed) & _SEED_MASK, 99])
                                  ).permutation(len(kinds))
    return [kinds[i] for i in order]


def build_corpus(cfg: CorpusConfig, out_dir: str | os.PathLike, jobs: int = 1) -> DatasetManifest:
    """Write ``images/``, ``<id>.manifest`` and ``recipes.json`` under ``out_dir``."""
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    tasks = [("pristine", cfg.seed, i, None, cfg) for i in range(cfg.n_pristine)]
    tasks += [("tampered", cfg.seed, i, k.value, cfg) for i, k in enumerate(_tampered_kinds(cfg))]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_job, tasks, chunksize=8))
    else:
        results = [_job(t) for t in tasks]

    entries, recipes = [], {}
    for (role, _, i, _, _), (data, info) in zip(tasks, results):
        name = f"{'p' if role == 'pristine' else 't'}_{i:05d}.jpg"
        path = out / "images" / name
        path.write_bytes(data)
        entries.append(Entry(path, role))
        recipes[name] = info

    types = set()
    if cfg.n_copy_move:
        types.add("copy-move")
    if cfg.n_tampered - cfg.n_copy_move:
        types.add("splice")
    manifest = DatasetManifest(id=cfg.dataset_id, entries=tuple(entries),
                               release_year=cfg.year, forgery_types=frozenset(types),
                               root=out)
    write_manifest(manifest, out / f"{cfg.dataset_id}.manifest")
    meta = {"config": _config_dict(cfg), "images": recipes}
    (out / "recipes.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    return manifest


def _config_dict(cfg: CorpusConfig) -> dict:
    return {
        "n_pristine": cfg.n_pristine,
        "n_tampered": cfg.n_tampered,
        "sizes": [list(s) for s in cfg.sizes],
        "copy_move_share": cfg.copy_move_share,
        "seed": cfg.seed,
        "quality_range": list(cfg.quality_range),
        "source_quality_range": list(cfg.source_quality_range),
        "matched_quality": cfg.matched_quality,
        "feather": cfg.feather,
        "dataset_id": cfg.dataset_id,
        "year": cfg.year,
    }


def gen_pristine(seed: int, count: int, size=(128, 128), out_dir=None,
                 dataset_id: str = "pristine") -> DatasetManifest:
    """Pristine-only corpus; with no ``out_dir`` the images are not written
    and the manifest's paths are placeholders under the current directory."""
    if count < 1:
        raise ValueError("count must be >= 1")
    cfg = CorpusConfig(n_pristine=count, n_tampered=0, sizes=(tuple(size),), seed=seed,
                       dataset_id=dataset_id)
    if out_dir is not None:
        return build_corpus(cfg, out_dir)
    entries = [Entry(Path("images") / f"p_{i:05d}.jpg", "pristine") for i in range(count)]
    return DatasetManifest(id=dataset_id, entries=tuple(entries), release_year=cfg.year)
