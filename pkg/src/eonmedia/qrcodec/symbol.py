"""Byte-mode QR symbols, versions 1-10: matrix construction and matrix-level decoding.

Matrices are numpy uint8 arrays indexed ``[row, col]`` with 1 = dark.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cache

import numpy as np

from . import rs, tables
from .tables import EC_BITS, EC_LEVELS, block_info, side

FORMAT_MASK = 0x5412
FORMAT_POLY = 0x537
VERSION_POLY = 0x1F25
MAX_FORMAT_DISTANCE = 3
# a finder (with its separator) counts as found while at most this many of its modules are wrong
FINDER_TOLERANCE = 6

PENALTY_N1, PENALTY_N2, PENALTY_N3, PENALTY_N4 = 3, 3, 40, 10

STATUS_OK = "ok"
STATUS_FINDER = "finder not found"
STATUS_FORMAT = "format unreadable"
STATUS_BLOCK = "uncorrectable block"
STATUS_INCONSISTENT = "inconsistent payload"


class CapacityError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class QrSymbol:
    version: int
    ec_level: str
    mask: int
    modules: np.ndarray
    payload: bytes

    @property
    def side(self) -> int:
        return self.modules.shape[0]

    def __eq__(self, other):
        if not isinstance(other, QrSymbol):
            return NotImplemented
        return (self.version, self.ec_level, self.mask, self.payload) == (
            other.version,
            other.ec_level,
            other.mask,
            other.payload,
        ) and np.array_equal(self.modules, other.modules)

    __hash__ = None  # type: ignore[assignment]


@dataclass
class DecodeReport:
    payload: bytes | None
    status: str
    corrected_codewords: int = 0
    used_erasures: int = 0
    finder_status: tuple[bool, bool, bool] = (True, True, True)
    version: int | None = None
    ec_level: str | None = None
    mask: int | None = None
    detail: str = ""
    block_errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


# ---- function patterns ----


def _finder_corners(n: int) -> list[tuple[int, int]]:
    return [(0, 0), (0, n - 7), (n - 7, 0)]


@cache
def _function_layout(version: int) -> tuple[np.ndarray, np.ndarray]:
    """(is_function, value) for every module; format areas are reserved with value 0."""
    n = side(version)
    func = np.zeros((n, n), dtype=bool)
    val = np.zeros((n, n), dtype=np.uint8)

    idx = np.arange(n)
    func[6, :] = func[:, 6] = True
    val[6, :] = idx % 2 == 0
    val[:, 6] = idx % 2 == 0

    for r0, c0 in ((3, 3), (3, n - 4), (n - 4, 3)):
        for dr in range(-4, 5):
            for dc in range(-4, 5):
                r, c = r0 + dr, c0 + dc
                if 0 <= r < n and 0 <= c < n:
                    func[r, c] = True
                    val[r, c] = max(abs(dr), abs(dc)) not in (2, 4)

    pos = tables.alignment_positions(version)
    last = len(pos) - 1
    for i, r0 in enumerate(pos):
        for j, c0 in enumerate(pos):
            if (i, j) in ((0, 0), (0, last), (last, 0)):
                continue
            for dr in range(-2, 3):
                for dc in range(-2, 3):
                    func[r0 + dr, c0 + dc] = True
                    val[r0 + dr, c0 + dc] = max(abs(dr), abs(dc)) != 1

    for r, c in _format_positions(n)[0] + _format_positions(n)[1]:
        func[r, c] = True
        val[r, c] = 0
    func[n - 8, 8] = True
    val[n - 8, 8] = 1

    if version >= 7:
        bits = _version_bits(version)
        for i in range(18):
            a, b = n - 11 + i % 3, i // 3
            func[b, a] = func[a, b] = True
            val[b, a] = val[a, b] = (bits >> i) & 1
    func.setflags(write=False)
    val.setflags(write=False)
    return func, val


@cache
def _format_positions(n: int) -> tuple[list[tuple[int, int]], list[tuple[int, int]]]:
    """(row, col) of format bit i (LSB first) for both copies."""
    first = [(i, 8) for i in range(6)] + [(7, 8), (8, 8), (8, 7)] + [(8, 14 - i) for i in range(9, 15)]
    second = [(8, n - 1 - i) for i in range(8)] + [(n - 15 + i, 8) for i in range(8, 15)]
    return first, second


def _bch_remainder(value: int, poly: int, shift: int) -> int:
    rem = value << shift
    top = poly.bit_length() - 1
    for bit in range(rem.bit_length() - 1, top - 1, -1):
        if rem >> bit & 1:
            rem ^= poly << (bit - top)
    return rem


def format_bits(ec_level: str, mask: int) -> int:
    data = EC_BITS[ec_level] << 3 | mask
    return ((data << 10) | _bch_remainder(data, FORMAT_POLY, 10)) ^ FORMAT_MASK


def _version_bits(version: int) -> int:
    return version << 12 | _bch_remainder(version, VERSION_POLY, 12)


@cache
def _all_formats() -> tuple[tuple[int, str, int], ...]:
    return tuple((format_bits(ec, m), ec, m) for ec in EC_LEVELS for m in range(8))


@cache
def data_order(version: int) -> np.ndarray:
    """Flat indices of the data-region modules in placement order."""
    n = side(version)
    func, _ = _function_layout(version)
    order = []
    right = n - 1
    while right >= 1:
        if right == 6:
            right = 5
        upward = ((right + 1) & 2) == 0
        for vert in range(n):
            row = n - 1 - vert if upward else vert
            for j in range(2):
                col = right - j
                if not func[row, col]:
                    order.append(row * n + col)
        right -= 2
    out = np.array(order, dtype=np.intp)
    out.setflags(write=False)
    return out


def data_region(version: int) -> np.ndarray:
    """Boolean mask of modules that carry codeword (or remainder) bits."""
    func, _ = _function_layout(version)
    return ~func


def finder_regions(version: int) -> list[tuple[slice, slice]]:
    n = side(version)
    return [
        (slice(0, 8), slice(0, 8)),
        (slice(0, 8), slice(n - 8, n)),
        (slice(n - 8, n), slice(0, 8)),
    ]


@cache
def mask_pattern(version: int, mask: int) -> np.ndarray:
    n = side(version)
    i, j = np.indices((n, n))
    patterns = (
        (i + j) % 2 == 0,
        i % 2 == 0,
        j % 3 == 0,
        (i + j) % 3 == 0,
        (i // 2 + j // 3) % 2 == 0,
        (i * j) % 2 + (i * j) % 3 == 0,
        ((i * j) % 2 + (i * j) % 3) % 2 == 0,
        ((i + j) % 2 + (i * j) % 3) % 2 == 0,
    )
    out = patterns[mask] & data_region(version)
    out = out.astype(np.uint8)
    out.setflags(write=False)
    return out


# ---- codewords ----


def _data_codewords(payload: bytes, version: int, ec_level: str) -> bytes:
    info = block_info(version, ec_level)
    cap = tables.byte_capacity(version, ec_level)
    if len(payload) > cap:
        raise CapacityError(
            f"payload of {len(payload)} bytes exceeds capacity {cap} bytes of version {version}-{ec_level}"
        )
    cb = tables.count_bits(version)
    capacity_bits = info.data_codewords * 8
    bits = [0, 1, 0, 0]
    bits += [(len(payload) >> i) & 1 for i in range(cb - 1, -1, -1)]
    for byte in payload:
        bits += [(byte >> i) & 1 for i in range(7, -1, -1)]
    bits += [0] * min(4, capacity_bits - len(bits))
    bits += [0] * (-len(bits) % 8)
    out = bytearray(np.packbits(np.array(bits, dtype=np.uint8)).tobytes())
    pad = (0xEC, 0x11)
    while len(out) < info.data_codewords:
        out.append(pad[(len(out) - len(bits) // 8) % 2])
    return bytes(out)


@cache
def _interleave_map(version: int, ec_level: str) -> tuple[tuple[int, int], ...]:
    """For each transmitted codeword: (block, index within block incl. parity)."""
    info = block_info(version, ec_level)
    sizes = info.block_sizes()
    out = []
    for i in range(max(sizes)):
        for b, s in enumerate(sizes):
            if i < s:
                out.append((b, i))
    for i in range(info.parity_per_block):
        for b, s in enumerate(sizes):
            out.append((b, s + i))
    return tuple(out)


def _codewords(payload: bytes, version: int, ec_level: str) -> bytes:
    info = block_info(version, ec_level)
    data = _data_codewords(payload, version, ec_level)
    blocks = []
    k = 0
    for s in info.block_sizes():
        chunk = data[k : k + s]
        k += s
        blocks.append(chunk + rs.rs_encode(chunk, info.parity_per_block))
    return bytes(blocks[b][i] for b, i in _interleave_map(version, ec_level))


# ---- masking penalty ----


def _run_penalty(m: np.ndarray) -> np.ndarray:
    """Rule 1 along the last axis, for a stack of matrices shaped (k, n, n)."""
    k, rows, n = m.shape
    boundary = np.ones((k, rows, n + 1), dtype=bool)
    boundary[:, :, 1:-1] = m[:, :, 1:] != m[:, :, :-1]
    sym, r, c = np.nonzero(boundary)
    same_line = (r[1:] == r[:-1]) & (sym[1:] == sym[:-1])
    runs = np.diff(c)[same_line]
    owner = sym[1:][same_line]
    long_runs = runs >= 5
    return np.bincount(owner[long_runs], weights=runs[long_runs] - 5 + PENALTY_N1, minlength=k)


# 1011101 preceded or followed by four light modules, as 11-bit integers
_FINDER_LIKE = (0b10111010000, 0b00001011101)
_WEIGHTS = 1 << np.arange(10, -1, -1)


def _finder_like_penalty(m: np.ndarray) -> np.ndarray:
    padded = np.pad(m, ((0, 0), (0, 0), (4, 4))).astype(np.int64)
    windows = np.lib.stride_tricks.sliding_window_view(padded, 11, axis=2)
    codes = windows @ _WEIGHTS
    hits = np.count_nonzero((codes == _FINDER_LIKE[0]) | (codes == _FINDER_LIKE[1]), axis=(1, 2))
    return hits * PENALTY_N3


def penalty(m: np.ndarray) -> np.ndarray | int:
    """Masking penalty score of one matrix, or of each matrix in a (k, n, n) stack."""
    single = m.ndim == 2
    m = m.astype(np.uint8)[None] if single else m.astype(np.uint8)
    mt = m.transpose(0, 2, 1)
    score = _run_penalty(m) + _run_penalty(mt)
    block = (m[:, :-1, :-1] == m[:, 1:, :-1]) & (m[:, :-1, :-1] == m[:, :-1, 1:]) & (m[:, :-1, :-1] == m[:, 1:, 1:])
    score = score + np.count_nonzero(block, axis=(1, 2)) * PENALTY_N2
    score = score + _finder_like_penalty(m) + _finder_like_penalty(mt)
    total = m.shape[1] * m.shape[2]
    dark = m.sum(axis=(1, 2)).astype(np.int64)
    score = score + (np.abs(dark * 20 - total * 10) // total) * PENALTY_N4
    score = score.astype(np.int64)
    return int(score[0]) if single else score


def _place_format(m: np.ndarray, ec_level: str, mask: int) -> None:
    bits = format_bits(ec_level, mask)
    first, second = _format_positions(m.shape[0])
    for i in range(15):
        b = (bits >> i) & 1
        m[first[i]] = b
        m[second[i]] = b


# ---- public API ----


def qr_encode(payload: bytes, version: int, ec_level: str, mask: int | None = None) -> QrSymbol:
    """Byte-mode symbol; the mask is chosen by lowest penalty unless given."""
    tables.check_version(version, ec_level)
    payload = bytes(payload)
    codewords = _codewords(payload, version, ec_level)
    func, val = _function_layout(version)
    n = side(version)
    base = val.copy()
    order = data_order(version)
    bits = np.unpackbits(np.frombuffer(codewords, dtype=np.uint8))
    flat = base.reshape(-1)
    flat[order[: len(bits)]] = bits
    candidates = list(range(8)) if mask is None else [mask]
    stack = np.stack([base ^ mask_pattern(version, k) for k in candidates])
    for m, k in zip(stack, candidates):
        _place_format(m, ec_level, k)
    # argmin returns the first minimum, i.e. the lowest mask number on ties
    best = int(np.argmin(penalty(stack))) if mask is None else 0
    k, m = candidates[best], stack[best].copy()
    m.setflags(write=False)
    assert m.shape == (n, n)
    return QrSymbol(version, ec_level, k, m, payload)


def check_finders(matrix: np.ndarray, tolerance: int = FINDER_TOLERANCE) -> tuple[bool, bool, bool]:
    version = version_from_side(matrix.shape[0])
    _, val = _function_layout(version)
    out = []
    for rs_, cs in finder_regions(version):
        wrong = int(np.count_nonzero(matrix[rs_, cs] != val[rs_, cs]))
        out.append(wrong <= tolerance)
    return tuple(out)  # type: ignore[return-value]


def repair_finders(matrix: np.ndarray) -> np.ndarray:
    """Copy of ``matrix`` with the three finder+separator regions rewritten canonically."""
    m = np.array(matrix, dtype=np.uint8, copy=True)
    version = version_from_side(m.shape[0])
    _, val = _function_layout(version)
    for rs_, cs in finder_regions(version):
        m[rs_, cs] = val[rs_, cs]
    return m


def version_from_side(n: int) -> int:
    if (n - 17) % 4 or not tables.MIN_VERSION <= (n - 17) // 4 <= tables.MAX_VERSION:
        raise ValueError(f"{n}x{n} is not a supported symbol size")
    return (n - 17) // 4


def _read_format(m: np.ndarray) -> tuple[str, int] | None:
    first, second = _format_positions(m.shape[0])
    copies = [sum(int(m[p]) << i for i, p in enumerate(pos)) for pos in (first, second)]
    best = None
    for bits, ec, mask in _all_formats():
        d = min(bin(bits ^ c).count("1") for c in copies)
        if best is None or d < best[0]:
            best = (d, ec, mask)
    if best[0] > MAX_FORMAT_DISTANCE:
        return None
    return best[1], best[2]


def qr_decode(matrix: np.ndarray, erasure_mask: np.ndarray | None = None) -> DecodeReport:
    """Decode a module matrix. Never raises on damaged input; see ``DecodeReport.status``."""
    m = np.asarray(matrix).astype(np.uint8)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    version = version_from_side(m.shape[0])
    if erasure_mask is not None and np.shape(erasure_mask) != m.shape:
        raise ValueError("erasure mask shape differs from matrix")

    finders = check_finders(m)
    if not all(finders):
        missing = [i for i, ok in enumerate(finders) if not ok]
        return DecodeReport(
            None, STATUS_FINDER, finder_status=finders, version=version, detail=f"finder(s) {missing} unrecognizable"
        )
    fmt = _read_format(m)
    if fmt is None:
        return DecodeReport(None, STATUS_FORMAT, finder_status=finders, version=version)
    ec_level, mask = fmt
    info = block_info(version, ec_level)
    report = DecodeReport(None, STATUS_OK, finder_status=finders, version=version, ec_level=ec_level, mask=mask)

    order = data_order(version)[: info.total_codewords * 8]
    bits = m.reshape(-1)[order] ^ mask_pattern(version, mask).reshape(-1)[order]
    received = np.packbits(bits).tolist()
    if erasure_mask is not None:
        erased = np.asarray(erasure_mask, dtype=bool).reshape(-1)[order].reshape(-1, 8).any(axis=1)
    else:
        erased = np.zeros(info.total_codewords, dtype=bool)

    sizes = info.block_sizes()
    blocks = [[0] * (s + info.parity_per_block) for s in sizes]
    block_erasures: list[list[int]] = [[] for _ in sizes]
    for pos, (b, i) in enumerate(_interleave_map(version, ec_level)):
        blocks[b][i] = received[pos]
        if erased[pos]:
            block_erasures[b].append(i)

    data = bytearray()
    for b, (block, er) in enumerate(zip(blocks, block_erasures)):
        if len(er) > info.parity_per_block:
            er = []
        try:
            fixed, changed = rs.rs_correct(block, info.parity_per_block, er)
        except rs.UncorrectableError as exc:
            report.status = STATUS_BLOCK
            report.block_errors.append(f"block {b}: {exc}")
            continue
        report.corrected_codewords += len(changed)
        report.used_erasures += len(er)
        data += fixed[: sizes[b]]
    if report.status != STATUS_OK:
        report.detail = "; ".join(report.block_errors)
        return report

    payload = _parse_byte_mode(bytes(data), version)
    if payload is None or _data_codewords_safe(payload, version, ec_level) != bytes(data):
        report.status = STATUS_INCONSISTENT
        report.detail = "corrected codewords do not re-encode to a byte-mode payload"
        return report
    report.payload = payload
    return report


def _data_codewords_safe(payload: bytes, version: int, ec_level: str) -> bytes | None:
    try:
        return _data_codewords(payload, version, ec_level)
    except CapacityError:
        return None


def _parse_byte_mode(data: bytes, version: int) -> bytes | None:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8))
    if bits[:4].tolist() != [0, 1, 0, 0]:
        return None
    cb = tables.count_bits(version)
    count = int("".join(map(str, bits[4 : 4 + cb].tolist())), 2)
    start = 4 + cb
    if start + 8 * count > len(bits):
        return None
    return np.packbits(bits[start : start + 8 * count]).tobytes()
