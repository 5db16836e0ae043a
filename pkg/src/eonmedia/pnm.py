"""Binary PBM (P4) and PGM (P5) reading and writing."""

from __future__ import annotations

from pathlib import Path

import numpy as np


class PnmError(ValueError):
    pass


def encode_pbm(bits: np.ndarray) -> bytes:
    """P4 bytes for a 0/1 array; 1 is written as black (tungsten)."""
    bits = np.asarray(bits, dtype=np.uint8)
    h, w = bits.shape
    packed = np.packbits(bits, axis=1)
    return b"P4\n%d %d\n" % (w, h) + packed.tobytes()


def encode_pgm(pixels: np.ndarray, comments: list[str] = ()) -> bytes:
    pixels = np.asarray(pixels)
    if pixels.dtype != np.uint8:
        raise PnmError("PGM pixels must be uint8")
    h, w = pixels.shape
    header = b"P5\n"
    for c in comments:
        if "\n" in c:
            raise PnmError("comments must be single lines")
        header += b"# " + c.encode("utf-8") + b"\n"
    return header + b"%d %d\n255\n" % (w, h) + pixels.tobytes()


def _parse_header(data: bytes, n_fields: int) -> tuple[bytes, list[int], list[str], int]:
    magic = data[:2]
    pos = 2
    fields: list[int] = []
    comments: list[str] = []
    while len(fields) < n_fields:
        if pos >= len(data):
            raise PnmError("truncated header")
        ch = data[pos : pos + 1]
        if ch == b"#":
            end = data.index(b"\n", pos)
            comments.append(data[pos + 1 : end].decode("utf-8").strip())
            pos = end + 1
        elif ch.isspace():
            pos += 1
        else:
            start = pos
            while pos < len(data) and data[pos : pos + 1].isdigit():
                pos += 1
            if start == pos:
                raise PnmError(f"unexpected byte {ch!r} in header")
            fields.append(int(data[start:pos]))
    # exactly one whitespace byte separates header from raster
    return magic, fields, comments, pos + 1


def decode_pbm(data: bytes) -> np.ndarray:
    magic, (w, h), _, start = _parse_header(data, 2)
    if magic != b"P4":
        raise PnmError(f"not a binary PBM (magic {magic!r})")
    row_bytes = (w + 7) // 8
    raw = np.frombuffer(data, dtype=np.uint8, count=row_bytes * h, offset=start)
    return np.unpackbits(raw.reshape(h, row_bytes), axis=1)[:, :w]


def decode_pgm(data: bytes) -> tuple[np.ndarray, list[str]]:
    magic, (w, h, maxval), comments, start = _parse_header(data, 3)
    if magic != b"P5":
        raise PnmError(f"not a binary PGM (magic {magic!r})")
    if maxval != 255:
        raise PnmError(f"only maxval 255 is supported, got {maxval}")
    if len(data) - start < w * h:
        raise PnmError("truncated raster")
    raw = np.frombuffer(data, dtype=np.uint8, count=w * h, offset=start)
    return raw.reshape(h, w).copy(), comments


def write_pbm(path: str | Path, bits: np.ndarray) -> None:
    Path(path).write_bytes(encode_pbm(bits))


def read_pbm(path: str | Path) -> np.ndarray:
    return decode_pbm(Path(path).read_bytes())


def write_pgm(path: str | Path, pixels: np.ndarray, comments: list[str] = ()) -> None:
    Path(path).write_bytes(encode_pgm(pixels, comments))


def read_pgm(path: str | Path) -> tuple[np.ndarray, list[str]]:
    return decode_pgm(Path(path).read_bytes())
