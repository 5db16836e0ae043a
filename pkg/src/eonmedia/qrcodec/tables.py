"""QR structural constants, loaded from the bundled CSV files."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cache
from importlib import resources

EC_LEVELS = ("L", "M", "Q", "H")
# two-bit codes written into the format information
EC_BITS = {"L": 0b01, "M": 0b00, "Q": 0b11, "H": 0b10}
MIN_VERSION, MAX_VERSION = 1, 10


@dataclass(frozen=True)
class BlockInfo:
    version: int
    ec_level: str
    total_codewords: int
    parity_per_block: int
    blocks1: int
    size1: int  # data codewords per block, group 1
    blocks2: int
    size2: int  # data codewords per block, group 2

    @property
    def n_blocks(self) -> int:
        return self.blocks1 + self.blocks2

    @property
    def data_codewords(self) -> int:
        return self.blocks1 * self.size1 + self.blocks2 * self.size2

    def block_sizes(self) -> list[int]:
        return [self.size1] * self.blocks1 + [self.size2] * self.blocks2


def _read(name: str) -> list[dict[str, str]]:
    text = resources.files("eonmedia.data").joinpath(name).read_text(encoding="utf-8")
    return list(csv.DictReader(text.splitlines()))


@cache
def _blocks() -> dict[tuple[int, str], BlockInfo]:
    out = {}
    for row in _read("qr_constants.csv"):
        info = BlockInfo(
            int(row["version"]),
            row["ecLevel"],
            int(row["totalCodewords"]),
            int(row["parityPerBlock"]),
            int(row["blocks1"]),
            int(row["size1"]),
            int(row["blocks2"]),
            int(row["size2"]),
        )
        if info.data_codewords + info.n_blocks * info.parity_per_block != info.total_codewords:
            raise ValueError(f"inconsistent block table row for {info.version}-{info.ec_level}")
        out[info.version, info.ec_level] = info
    return out


@cache
def _alignment() -> dict[int, tuple[int, ...]]:
    return {int(r["version"]): tuple(int(p) for p in r["positions"].split()) for r in _read("qr_alignment.csv")}


def check_version(version: int, ec_level: str | None = None) -> None:
    if not MIN_VERSION <= version <= MAX_VERSION:
        raise ValueError(f"version must be in {MIN_VERSION}..{MAX_VERSION}, got {version}")
    if ec_level is not None and ec_level not in EC_LEVELS:
        raise ValueError(f"ec level must be one of {EC_LEVELS}, got {ec_level!r}")


def block_info(version: int, ec_level: str) -> BlockInfo:
    check_version(version, ec_level)
    return _blocks()[version, ec_level]


def alignment_positions(version: int) -> tuple[int, ...]:
    check_version(version)
    return _alignment()[version]


def side(version: int) -> int:
    return 17 + 4 * version


def count_bits(version: int) -> int:
    """Width of the byte-mode character count field."""
    return 8 if version <= 9 else 16


def byte_capacity(version: int, ec_level: str) -> int:
    bits = block_info(version, ec_level).data_codewords * 8 - 4 - count_bits(version)
    return bits // 8
