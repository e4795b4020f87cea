import hashlib
import io
import json

import numpy as np
import pytest
from PIL import Image

from forgerybench.datasets import ScaleClass, load_manifest
from forgerybench.errors import DonorMissing, RegionOutOfBounds
from forgerybench.features import Method, extract
from forgerybench.features.primitives import dct2_stack, round_half_away
from forgerybench.imgio import block_stack, decode_image, image_from_rgb, load_image
from forgerybench.synth import (
    CorpusConfig,
    ForgeryKind,
    ForgeryRecipe,
    Rect,
    apply_forgery,
    build_corpus,
    compress,
    decode_rgb,
    encode_jpeg,
    feather_mask,
    gen_pristine,
    procedural_texture,
    quant_table,
)
from forgerybench.synth.corpus import image_rng
from forgerybench.synth.jpeg import LUMA_QUANT


def tree_digest(root):
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(p.relative_to(root).as_posix().encode())
            h.update(p.read_bytes())
    return h.hexdigest()


SMALL = dict(sizes=((64, 64),))


# ------------------------------------------------------------------ JPEG


def test_quant_table_scaling():
    assert np.array_equal(quant_table(LUMA_QUANT, 50), LUMA_QUANT)
    assert np.all(quant_table(LUMA_QUANT, 100) == 1)
    assert quant_table(LUMA_QUANT, 90)[0, 0] == 3  # (16 * 20 + 50) // 100
    assert quant_table(LUMA_QUANT, 10)[0, 0] == 80


@pytest.mark.parametrize("shape", [(64, 64, 3), (37, 53, 3), (24, 40)])
@pytest.mark.parametrize("quality", [30, 75, 95])
def test_encoder_output_decodes_like_internal_reconstruction(shape, quality):
    px = procedural_texture(np.random.default_rng(quality), 64, 64)
    px = px[: shape[0], : shape[1]] if len(shape) == 3 else px[: shape[0], : shape[1], 1]
    data, mine = compress(px, quality)
    assert data[:2] == b"\xff\xd8" and data[-2:] == b"\xff\xd9"
    ref = decode_rgb(data)
    assert ref.shape[:2] == shape[:2]
    # independent decoder (libjpeg via Pillow) agrees up to IDCT/colour rounding
    assert np.max(np.abs(ref.astype(int) - mine.astype(int))) <= 3


def test_encoder_quality_ordering():
    px = procedural_texture(np.random.default_rng(0), 96, 96)
    sizes = [len(encode_jpeg(px, q)) for q in (20, 60, 95)]
    assert sizes == sorted(sizes)
    err = [np.abs(decode_rgb(encode_jpeg(px, q)).astype(float) - px).mean() for q in (20, 95)]
    assert err[0] > err[1]


def test_encoder_deterministic():
    px = procedural_texture(np.random.default_rng(3), 64, 80)
    assert encode_jpeg(px, 80) == encode_jpeg(px.copy(), 80)


# --------------------------------------------------------------- forgery


def test_copy_move_on_constant_is_identity():
    img = np.full((64, 64, 3), 77, dtype=np.uint8)
    r = ForgeryRecipe(ForgeryKind.COPY_MOVE, Rect(0, 0, 16, 16), (32, 32))
    out = apply_forgery(img, r)
    assert np.array_equal(out.pixels, img) and out.label == "tampered"


def test_black_splice_into_white():
    host = np.full((64, 64, 3), 255, dtype=np.uint8)
    donor = np.zeros((64, 64, 3), dtype=np.uint8)
    r = ForgeryRecipe(ForgeryKind.SPLICE, Rect(3, 5, 10, 7), (20, 30), donor="d")
    out = apply_forgery(host, r, {"d": donor}).pixels
    black = np.all(out == 0, axis=2)
    assert black.sum() == 70
    assert black[30:37, 20:30].all()


def test_requantised_splice_changes_ones_fraction():
    host = procedural_texture(image_rng(0, 1, 0), 128, 128)
    donor = procedural_texture(image_rng(0, 2, 0), 128, 128)
    r = ForgeryRecipe(ForgeryKind.SPLICE, Rect(16, 16, 64, 64), (48, 48), "d", (60, 90))
    out = apply_forgery(host, r, {"d": donor})
    assert out.jpeg is not None
    y = image_from_rgb(out.pixels).y
    ac = dct2_stack(block_stack(y - 128, 8)).reshape(-1, 64)[:, 1:]
    ones = (round_half_away(np.abs(ac)) == 1).mean(axis=1).reshape(16, 16)
    inside = np.zeros((16, 16), dtype=bool)
    inside[6:14, 6:14] = True  # destination (48, 48) + 64 is block aligned
    assert ones[inside].mean() > ones[~inside].mean()


def test_recipe_validation():
    img = np.zeros((64, 64, 3), dtype=np.uint8)
    with pytest.raises(RegionOutOfBounds):
        apply_forgery(img, ForgeryRecipe(ForgeryKind.COPY_MOVE, Rect(60, 0, 10, 10), (0, 20)))
    with pytest.raises(RegionOutOfBounds):
        apply_forgery(img, ForgeryRecipe(ForgeryKind.COPY_MOVE, Rect(0, 0, 10, 10), (60, 0)))
    with pytest.raises(RegionOutOfBounds):
        apply_forgery(img, ForgeryRecipe(ForgeryKind.COPY_MOVE, Rect(0, 0, 10, 10), (5, 5)))
    with pytest.raises(DonorMissing):
        apply_forgery(img, ForgeryRecipe(ForgeryKind.SPLICE, Rect(0, 0, 4, 4), (0, 0), "gone"))
    with pytest.raises(ValueError):
        ForgeryRecipe(ForgeryKind.SPLICE, Rect(0, 0, 4, 4), (0, 0))
    with pytest.raises(ValueError):
        ForgeryRecipe(ForgeryKind.COPY_MOVE, Rect(0, 0, 4, 4), (9, 9), post=(0, 90))


def test_feather_mask():
    m = feather_mask(9, 9, 2)
    assert m[4, 4] == 1.0 and m[0, 0] == pytest.approx(1 / 3)
    assert np.all(feather_mask(3, 5, 0) == 1.0)


# ---------------------------------------------------------------- corpus


def test_corpus_counts_and_metadata(tmp_path):
    cfg = CorpusConfig(200, 200, copy_move_share=0.5, seed=7, **SMALL)
    assert cfg.n_copy_move == 100
    m = build_corpus(CorpusConfig(10, 10, seed=7, **SMALL), tmp_path / "c")
    assert m.counts == (10, 10) and m.scale_class is ScaleClass.SMALL
    meta = json.loads((tmp_path / "c" / "recipes.json").read_text())
    kinds = [v["kind"] for k, v in meta["images"].items() if k.startswith("t_")]
    assert kinds.count("COPY_MOVE") == kinds.count("SPLICE") == 5
    for k, v in meta["images"].items():
        if k.startswith("t_"):
            q1, q2 = v["post"]
            assert 50 <= q1 <= 65 and 70 <= q2 <= 95 and 50 <= v["host_quality"] <= 65
        else:
            assert 70 <= v["quality"] <= 95
    loaded = load_manifest(tmp_path / "c" / "synth.manifest")
    assert loaded.entries == m.entries and not loaded.missing


def test_matched_quality_corpus(tmp_path):
    build_corpus(CorpusConfig(2, 6, seed=3, matched_quality=True, **SMALL), tmp_path)
    meta = json.loads((tmp_path / "recipes.json").read_text())
    for k, v in meta["images"].items():
        if k.startswith("t_"):
            assert v["post"][0] == v["post"][1] == v["host_quality"]


def test_corpus_byte_identical(tmp_path):
    cfg = CorpusConfig(4, 4, seed=11, **SMALL)
    build_corpus(cfg, tmp_path / "a")
    build_corpus(cfg, tmp_path / "b", jobs=2)
    assert tree_digest(tmp_path / "a") == tree_digest(tmp_path / "b")
    build_corpus(CorpusConfig(4, 4, seed=12, **SMALL), tmp_path / "c")
    assert tree_digest(tmp_path / "a") != tree_digest(tmp_path / "c")


def test_images_are_baseline_jpeg_with_ac_energy(tmp_path):
    m = build_corpus(CorpusConfig(4, 4, seed=5, sizes=((64, 64), (96, 128))), tmp_path)
    for e in m.entries:
        data = e.path.read_bytes()
        with Image.open(io.BytesIO(data)) as im:
            assert im.format == "JPEG" and im.mode == "RGB"
        extract(Method.ARMAN, decode_image(data))  # must not raise


def test_tampered_differs_from_ancestor(tmp_path):
    from forgerybench.synth.corpus import tampered_image
    from forgerybench.synth.jpeg import decoded_pixels

    cfg = CorpusConfig(0, 4, seed=2, **SMALL)
    for i, kind in enumerate([ForgeryKind.COPY_MOVE, ForgeryKind.SPLICE]):
        data, info = tampered_image(cfg.seed, i, kind, cfg)
        host = procedural_texture(image_rng(cfg.seed, 1, i), 64, 64)
        ancestor = decoded_pixels(host, info["host_quality"])
        assert not np.array_equal(decode_rgb(data), ancestor)


def test_gen_pristine(tmp_path):
    m = gen_pristine(3, 200)
    assert m.counts == (200, 0)
    a = gen_pristine(3, 2, (64, 64), tmp_path / "a")
    b = gen_pristine(3, 2, (64, 64), tmp_path / "b")
    assert [e.path.read_bytes() for e in a.entries] == [e.path.read_bytes() for e in b.entries]
    assert load_image(a.entries[0].path).width == 64


def test_config_validation():
    with pytest.raises(ValueError):
        CorpusConfig(sizes=((32, 64),))
    with pytest.raises(ValueError):
        CorpusConfig(copy_move_share=1.5)
    with pytest.raises(ValueError):
        CorpusConfig(0, 0)
