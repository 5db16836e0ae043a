"""Self-contained byte-mode QR codec (versions 1-10) with Reed-Solomon error correction."""

from .rs import UncorrectableError, rs_correct, rs_decode, rs_encode
from .symbol import (
    STATUS_BLOCK,
    STATUS_FINDER,
    STATUS_FORMAT,
    STATUS_INCONSISTENT,
    STATUS_OK,
    CapacityError,
    DecodeReport,
    QrSymbol,
    check_finders,
    data_region,
    qr_decode,
    qr_encode,
    repair_finders,
    version_from_side,
)
from .tables import EC_LEVELS, block_info, byte_capacity, side

__all__ = [
    "EC_LEVELS",
    "STATUS_BLOCK",
    "STATUS_FINDER",
    "STATUS_FORMAT",
    "STATUS_INCONSISTENT",
    "STATUS_OK",
    "CapacityError",
    "DecodeReport",
    "QrSymbol",
    "UncorrectableError",
    "block_info",
    "byte_capacity",
    "check_finders",
    "data_region",
    "qr_decode",
    "qr_encode",
    "repair_finders",
    "rs_correct",
    "rs_decode",
    "rs_encode",
    "side",
    "version_from_side",
]
