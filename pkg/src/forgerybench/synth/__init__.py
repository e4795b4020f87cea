from .corpus import CorpusConfig, build_corpus, gen_pristine, image_rng, pristine_image
from .forgery import Forgery, ForgeryKind, ForgeryRecipe, Rect, apply_forgery, feather_mask
from .jpeg import compress, decode_rgb, decoded_pixels, encode_jpeg, quant_table, recompress
from .textures import procedural_texture

__all__ = [
    "CorpusConfig", "build_corpus", "gen_pristine", "image_rng", "pristine_image",
    "Forgery", "ForgeryKind", "ForgeryRecipe", "Rect", "apply_forgery", "feather_mask",
    "compress", "decode_rgb", "decoded_pixels", "encode_jpeg", "quant_table", "recompress", "procedural_texture",
]
