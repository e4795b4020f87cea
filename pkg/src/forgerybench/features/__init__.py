from .extractors import (
    DIMENSIONS,
    EXTRACTORS,
    FeatureVector,
    Method,
    extract,
    extract_alahmadi,
    extract_arman,
    extract_dua,
    extract_mandeep,
    extract_mohammed,
)
from .io import FeatureRecord, read_features, write_features
from .primitives import (
    DctBlock,
    DwtBands,
    ac_statistics,
    dct2,
    first_digit_mantissa_stats,
    haar_dwt1,
    idct2,
    lbp_histogram,
    lbp_map,
    mantissa_features,
    zigzag_order,
)

__all__ = [
    "DIMENSIONS", "EXTRACTORS", "FeatureVector", "Method", "extract",
    "extract_alahmadi", "extract_arman", "extract_dua", "extract_mandeep",
    "extract_mohammed", "FeatureRecord", "read_features", "write_features",
    "DctBlock", "DwtBands", "ac_statistics", "dct2", "first_digit_mantissa_stats",
    "haar_dwt1", "idct2", "lbp_histogram", "lbp_map", "mantissa_features",
    "zigzag_order",
]
