"""Minimal baseline (sequential, Huffman, 8-bit) JPEG encoder.

Uses the example quantisation and Huffman tables of ITU-T T.81 Annex K, IJG
quality scaling and 4:4:4 sampling, so output bytes depend only on the input
pixels and the quality setting. :func:`compress` also reconstructs the decoded
pixels from the quantised coefficients (float IDCT, round, clip), which keeps
multi-generation pipelines independent of any external decoder.
"""

from __future__ import annotations

import struct

import numpy as np

from ..features.primitives import dct2_stack, dct_matrix, round_half_away, zigzag_order
from ..imgio import block_stack, rgb_to_ycbcr, ycbcr_to_rgb

LUMA_QUANT = np.array([
    16, 11, 10, 16, 24, 40, 51, 61,
    12, 12, 14, 19, 26, 58, 60, 55,
    14, 13, 16, 24, 40, 57, 69, 56,
    14, 17, 22, 29, 51, 87, 80, 62,
    18, 22, 37, 56, 68, 109, 103, 77,
    24, 35, 55, 64, 81, 104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101,
    72, 92, 95, 98, 112, 100, 103, 99,
]).reshape(8, 8)

CHROMA_QUANT = np.full((8, 8), 99)
CHROMA_QUANT[:4, :4] = np.array([
    17, 18, 24, 47,
    18, 21, 26, 66,
    24, 26, 56, 99,
    47, 66, 99, 99,
]).reshape(4, 4)

DC_LUMA_BITS = (0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0)
DC_CHROMA_BITS = (0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0)
DC_VALUES = tuple(range(12))

AC_LUMA_BITS = (0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7D)
AC_LUMA_VALUES = bytes.fromhex(
    "01020300041105122131410613516107227114328191a1082342b1c11552d1f0"
    "2433627282090a161718191a25262728292a3435363738393a43444546474849"
    "4a535455565758595a636465666768696a737475767778797a83848586878889"
    "8a92939495969798999aa2a3a4a5a6a7a8a9aab2b3b4b5b6b7b8b9bac2c3c4c5"
    "c6c7c8c9cad2d3d4d5d6d7d8d9dae1e2e3e4e5e6e7e8e9eaf1f2f3f4f5f6f7f8"
    "f9fa"
)
AC_CHROMA_BITS = (0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77)
AC_CHROMA_VALUES = bytes.fromhex(
    "00 01 02 03 11 04 05 21 31 06 12 41 51 07 61 71"
    " 13 22 32 81 08 14 42 91 a1 b1 c1 09 23 33 52 f0"
    " 15 62 72 d1 0a 16 24 34 e1 25 f1 17 18 19 1a 26"
    " 27 28 29 2a 35 36 37 38 39 3a 43 44 45 46 47 48"
    " 49 4a 53 54 55 56 57 58 59 5a 63 64 65 66 67 68"
    " 69 6a 73 74 75 76 77 78 79 7a 82 83 84 85 86 87"
    " 88 89 8a 92 93 94 95 96 97 98 99 9a a2 a3 a4 a5"
    " a6 a7 a8 a9 aa b2 b3 b4 b5 b6 b7 b8 b9 ba c2 c3"
    " c4 c5 c6 c7 c8 c9 ca d2 d3 d4 d5 d6 d7 d8 d9 da"
    " e2 e3 e4 e5 e6 e7 e8 e9 ea f2 f3 f4 f5 f6 f7 f8"
    " f9 fa"
)
assert len(AC_LUMA_VALUES) == sum(AC_LUMA_BITS) == 162
assert len(AC_CHROMA_VALUES) == sum(AC_CHROMA_BITS) == 162

ZIGZAG = np.array([r * 8 + c for r, c in zigzag_order(8)])


def quant_table(base: np.ndarray, quality: int) -> np.ndarray:
    """IJG quality scaling of a base table, clamped to baseline range."""
    if not 1 <= quality <= 100:
        raise ValueError(f"quality must be in 1..100, got {quality}")
    scale = 5000 // quality if quality < 50 else 200 - 2 * quality
    return np.clip((base * scale + 50) // 100, 1, 255).astype(np.int64)


def _huffman_codes(bits, values) -> dict[int, tuple[int, int]]:
    codes = {}
    code = 0
    k = 0
    for length in range(1, 17):
        for _ in range(bits[length - 1]):
            codes[values[k]] = (code, length)
            code += 1
            k += 1
        code <<= 1
    return codes


_DC_TABLES = (_huffman_codes(DC_LUMA_BITS, DC_VALUES), _huffman_codes(DC_CHROMA_BITS, DC_VALUES))
_AC_TABLES = (_huffman_codes(AC_LUMA_BITS, AC_LUMA_VALUES),
              _huffman_codes(AC_CHROMA_BITS, AC_CHROMA_VALUES))


def _segment(marker: int, payload: bytes) -> bytes:
    return struct.pack(">BBH", 0xFF, marker, len(payload) + 2) + payload


def _pad_plane(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    return np.pad(plane, ((0, -h % 8), (0, -w % 8)), mode="edge")


def _quantized_blocks(plane: np.ndarray, table: np.ndarray) -> np.ndarray:
    coeffs = dct2_stack(block_stack(_pad_plane(plane) - 128.0, 8))
    q = round_half_away(coeffs / table).astype(np.int64)
    return q.reshape(q.shape[0], 64)[:, ZIGZAG]


def _emit_block(zz, pred, dc_codes, ac_codes, out_codes, out_lens):
    def put(symbol_codes, symbol, value, size):
        code, length = symbol_codes[symbol]
        if size:
            extra = value if value > 0 else value + (1 << size) - 1
            code = (code << size) | extra
            length += size
        out_codes.append(code)
        out_lens.append(length)

    diff = int(zz[0]) - pred
    size = abs(diff).bit_length()
    put(dc_codes, size, diff, size)
    last = 0
    for k in np.flatnonzero(zz[1:]) + 1:
        run = k - last - 1
        while run > 15:
            put(ac_codes, 0xF0, 0, 0)
            run -= 16
        v = int(zz[k])
        size = abs(v).bit_length()
        put(ac_codes, (run << 4) | size, v, size)
        last = k
    if last != 63:
        put(ac_codes, 0x00, 0, 0)
    return int(zz[0])


def _pack_bits(codes, lens) -> bytes:
    codes = np.array(codes, dtype=np.uint64)
    lens = np.array(lens, dtype=np.int64)
    shifts = np.arange(31, -1, -1, dtype=np.uint64)
    bits = ((codes[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.uint8)
    mask = np.arange(32)[None, :] >= (32 - lens)[:, None]
    stream = bits[mask]
    pad = -stream.size % 8
    stream = np.concatenate([stream, np.ones(pad, dtype=np.uint8)])
    return np.packbits(stream).tobytes().replace(b"\xff", b"\xff\x00")


def _planes(pixels) -> list[np.ndarray]:
    px = np.asarray(pixels)
    if px.ndim == 2:
        planes = [px.astype(np.float64)]
    elif px.ndim == 3 and px.shape[2] >= 3:
        planes = list(rgb_to_ycbcr(px[..., :3].astype(np.float64)))
    else:
        raise ValueError(f"expected (h, w) or (h, w, 3) pixels, got shape {px.shape}")
    h, w = planes[0].shape
    if not (1 <= h <= 65535 and 1 <= w <= 65535):
        raise ValueError("image dimensions out of baseline JPEG range")
    return planes


def _reconstruct(zz: np.ndarray, table: np.ndarray, shape) -> np.ndarray:
    h, w = shape
    ph, pw = h + (-h % 8), w + (-w % 8)
    coeffs = np.empty_like(zz, dtype=np.float64)
    coeffs[:, ZIGZAG] = zz
    coeffs = coeffs.reshape(-1, 8, 8) * table
    c = dct_matrix(8)
    blocks = c.T @ coeffs @ c + 128.0
    plane = blocks.reshape(ph // 8, pw // 8, 8, 8).transpose(0, 2, 1, 3).reshape(ph, pw)
    return plane[:h, :w]


def _stream(planes, quality):
    tables = [quant_table(LUMA_QUANT, quality), quant_table(CHROMA_QUANT, quality)]
    table_of = [0, 1, 1][: len(planes)]
    blocks = [_quantized_blocks(p, tables[t]) for p, t in zip(planes, table_of)]
    return tables, table_of, blocks


def _bytes(shape, tables, table_of, blocks) -> bytes:
    h, w = shape
    n = len(blocks)
    out = bytearray(b"\xff\xd8")
    out += _segment(0xE0, b"JFIF\x00\x01\x01\x00\x00\x01\x00\x01\x00\x00")
    dqt = b"".join(bytes([t]) + bytes(tables[t].ravel()[ZIGZAG].tolist())
                   for t in sorted(set(table_of)))
    out += _segment(0xDB, dqt)
    sof = struct.pack(">BHHB", 8, h, w, n)
    for cid, t in enumerate(table_of, 1):
        sof += bytes([cid, 0x11, t])
    out += _segment(0xC0, sof)
    dht = b""
    specs = [(0x00, DC_LUMA_BITS, DC_VALUES), (0x10, AC_LUMA_BITS, AC_LUMA_VALUES)]
    if n > 1:
        specs += [(0x01, DC_CHROMA_BITS, DC_VALUES), (0x11, AC_CHROMA_BITS, AC_CHROMA_VALUES)]
    for tc_th, bits, values in specs:
        dht += bytes([tc_th]) + bytes(bits) + bytes(values)
    out += _segment(0xC4, dht)
    sos = bytes([n])
    for cid, t in enumerate(table_of, 1):
        sos += bytes([cid, (t << 4) | t])
    out += _segment(0xDA, sos + b"\x00\x3f\x00")

    codes, lens = [], []
    preds = [0] * n
    for b in range(blocks[0].shape[0]):
        for c, t in enumerate(table_of):
            preds[c] = _emit_block(blocks[c][b], preds[c], _DC_TABLES[t], _AC_TABLES[t],
                                   codes, lens)
    out += _pack_bits(codes, lens)
    out += b"\xff\xd9"
    return bytes(out)


def encode_jpeg(pixels, quality: int) -> bytes:
    """Encode an ``(h, w, 3)`` RGB or ``(h, w)`` gray uint8 array."""
    planes = _planes(pixels)
    return _bytes(planes[0].shape, *_stream(planes, quality))


def _decode(shape, tables, table_of, blocks) -> np.ndarray:
    rec = [_reconstruct(b, tables[t], shape) for b, t in zip(blocks, table_of)]
    out = rec[0] if len(rec) == 1 else ycbcr_to_rgb(*rec)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def decoded_pixels(pixels, quality: int) -> np.ndarray:
    """Pixels a decoder recovers from ``encode_jpeg(pixels, quality)``."""
    planes = _planes(pixels)
    return _decode(planes[0].shape, *_stream(planes, quality))


def compress(pixels, quality: int) -> tuple[bytes, np.ndarray]:
    """``(jpeg_bytes, decoded_pixels)`` from one quantisation pass."""
    planes = _planes(pixels)
    parts = _stream(planes, quality)
    return _bytes(planes[0].shape, *parts), _decode(planes[0].shape, *parts)


def decode_rgb(data: bytes) -> np.ndarray:
    """Decode JPEG bytes back to an RGB (or gray) uint8 array."""
    import io

    from PIL import Image

    with Image.open(io.BytesIO(data)) as im:
        if im.mode == "L":
            return np.asarray(im, dtype=np.uint8).copy()
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def recompress(pixels, quality: int) -> np.ndarray:
    return decoded_pixels(pixels, quality)
