"""Two-level disk layout: an outer QR symbol whose dark modules each hold an inner QR symbol.

One mask pixel is one inner module, so an outer module spans
``inner_side x inner_side`` pixels. Light outer modules carry no metal.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import pnm
from .qrcodec import CapacityError, QrSymbol, byte_capacity, qr_encode, side

QUIET_ZONE = 4
DEFAULT_OUTER = (2, "H")
DEFAULT_INNER = (1, "M")
DEFAULT_PITCH = 2e-6
PADDING_POLICY = "repeat-last"
# an outer cell reads as dark when at least this fraction of its pixels carry metal
OUTER_DARK_FRACTION = 0.2


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class LayoutGeometry:
    outer_version: int
    inner_version: int
    slots: tuple[int, ...]  # outer module indices (row-major) that carry an inner symbol
    quiet_zone: int = QUIET_ZONE
    offset: tuple[float, float] = (0.0, 0.0)  # (row, col) shift of the sampling grid in pixels

    @property
    def outer_side(self) -> int:
        return side(self.outer_version)

    @property
    def inner_side(self) -> int:
        return side(self.inner_version)

    @property
    def cells(self) -> int:
        return self.outer_side + 2 * self.quiet_zone

    @property
    def shape(self) -> tuple[int, int]:
        n = self.cells * self.inner_side
        return n, n

    def cell_origin(self, index: int) -> tuple[int, int]:
        r, c = divmod(index, self.outer_side)
        return (r + self.quiet_zone) * self.inner_side, (c + self.quiet_zone) * self.inner_side


@dataclass
class DiskLayout:
    outer_modules: np.ndarray
    outer_version: int
    outer_ec_level: str
    inner_payloads: dict[int, bytes]
    inner_version: int
    inner_ec_level: str
    pitch: float = DEFAULT_PITCH
    quiet_zone: int = QUIET_ZONE
    first_padded_slot: int | None = None
    outer_payload: bytes = b""
    _symbols: dict[bytes, QrSymbol] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        dark = {int(i) for i in np.flatnonzero(self.outer_modules)}
        if dark != set(self.inner_payloads):
            raise LayoutError("every dark outer module needs exactly one inner payload slot")

    @property
    def geometry(self) -> LayoutGeometry:
        return LayoutGeometry(
            self.outer_version, self.inner_version, tuple(sorted(self.inner_payloads)), self.quiet_zone
        )

    @property
    def dark_module_count(self) -> int:
        return len(self.inner_payloads)

    @property
    def outer_module_size(self) -> float:
        return side(self.inner_version) * self.pitch

    @property
    def core_size(self) -> float:
        """Physical edge length of the outer symbol without quiet zones [m]."""
        return side(self.outer_version) * self.outer_module_size

    @property
    def total_size(self) -> float:
        return self.geometry.cells * self.outer_module_size

    def inner_symbol(self, index: int) -> QrSymbol:
        payload = self.inner_payloads[index]
        sym = self._symbols.get(payload)
        if sym is None:
            sym = qr_encode(payload, self.inner_version, self.inner_ec_level)
            self._symbols[payload] = sym
        return sym


@dataclass(frozen=True)
class MaskBitmap:
    bits: np.ndarray  # 1 = tungsten
    pitch: float

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def to_pbm(self) -> bytes:
        return pnm.encode_pbm(self.bits)

    def sha256(self) -> str:
        return hashlib.sha256(self.to_pbm()).hexdigest()


def build_layout(
    outer_payload: bytes,
    inner_documents: list[bytes],
    outer_version: int = DEFAULT_OUTER[0],
    outer_ec_level: str = DEFAULT_OUTER[1],
    inner_version: int = DEFAULT_INNER[0],
    inner_ec_level: str = DEFAULT_INNER[1],
    pitch: float = DEFAULT_PITCH,
) -> DiskLayout:
    """Encode the outer symbol and assign documents to its dark modules in row-major order.

    With fewer documents than dark modules the last document is repeated.
    """
    outer = qr_encode(outer_payload, outer_version, outer_ec_level)
    slots = [int(i) for i in np.flatnonzero(outer.modules)]
    if not inner_documents:
        raise LayoutError("at least one inner document is required")
    if len(inner_documents) > len(slots):
        raise LayoutError(f"{len(inner_documents)} documents but only {len(slots)} dark outer modules")
    cap = byte_capacity(inner_version, inner_ec_level)
    for i, doc in enumerate(inner_documents):
        if len(doc) > cap:
            raise LayoutError(
                f"inner document {i} has {len(doc)} bytes; capacity of {inner_version}-{inner_ec_level} is {cap}"
            )
    payloads = {}
    for k, slot in enumerate(slots):
        payloads[slot] = bytes(inner_documents[min(k, len(inner_documents) - 1)])
    padded = len(inner_documents) if len(inner_documents) < len(slots) else None
    layout = DiskLayout(
        outer.modules,
        outer_version,
        outer_ec_level,
        payloads,
        inner_version,
        inner_ec_level,
        pitch,
        first_padded_slot=padded,
        outer_payload=bytes(outer_payload),
    )
    try:
        for slot in slots:
            layout.inner_symbol(slot)
    except CapacityError as exc:  # pragma: no cover - guarded above
        raise LayoutError(str(exc)) from None
    return layout


def render_mask(layout: DiskLayout) -> MaskBitmap:
    geo = layout.geometry
    bits = np.zeros(geo.shape, dtype=np.uint8)
    n = geo.inner_side
    for index in geo.slots:
        r0, c0 = geo.cell_origin(index)
        bits[r0 : r0 + n, c0 : c0 + n] = layout.inner_symbol(index).modules
    return MaskBitmap(bits, layout.pitch)


def _sample_indices(start: int, count: int, offset: float, limit: int) -> np.ndarray:
    idx = np.floor(start + offset + np.arange(count) + 0.5).astype(int)
    if idx.min() < 0 or idx.max() >= limit:
        raise LayoutError("sampling grid falls outside the bitmap")
    return idx


def sample_layout(bits: np.ndarray, geometry: LayoutGeometry) -> tuple[np.ndarray, dict[int, np.ndarray]]:
    """Nearest-pixel sampling at module centres: (outer matrix, {slot: inner matrix})."""
    bits = np.asarray(bits)
    if bits.shape != geometry.shape:
        raise LayoutError(f"bitmap shape {bits.shape} does not match layout geometry {geometry.shape}")
    h, w = bits.shape
    n = geometry.inner_side
    dr, dc = geometry.offset
    inner = {}
    for index in geometry.slots:
        r0, c0 = geometry.cell_origin(index)
        rows = _sample_indices(r0, n, dr, h)
        cols = _sample_indices(c0, n, dc, w)
        inner[index] = bits[np.ix_(rows, cols)].astype(np.uint8)
    m = geometry.outer_side
    q = geometry.quiet_zone
    core = bits[q * n : (q + m) * n, q * n : (q + m) * n].astype(float)
    fraction = core.reshape(m, n, m, n).mean(axis=(1, 3))
    outer = (fraction >= OUTER_DARK_FRACTION).astype(np.uint8)
    return outer, inner


def manifest(layout: DiskLayout, mask: MaskBitmap | None = None) -> dict:
    docs = [
        {"index": i, "bytes_sha256": hashlib.sha256(layout.inner_payloads[i]).hexdigest()}
        for i in sorted(layout.inner_payloads)
    ]
    out = {
        "outerVersion": layout.outer_version,
        "outerEcLevel": layout.outer_ec_level,
        "innerVersion": layout.inner_version,
        "innerEcLevel": layout.inner_ec_level,
        "pitch_m": layout.pitch,
        "darkModuleCount": layout.dark_module_count,
        "documents": docs,
        "quietZone": layout.quiet_zone,
        "padding": {"policy": PADDING_POLICY, "firstPaddedSlot": layout.first_padded_slot},
    }
    if mask is not None:
        out["mask_sha256"] = mask.sha256()
    return out


def manifest_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def geometry_from_manifest(data: dict) -> LayoutGeometry:
    try:
        slots = tuple(int(d["index"]) for d in data["documents"])
        geo = LayoutGeometry(
            int(data["outerVersion"]),
            int(data["innerVersion"]),
            slots,
            int(data.get("quietZone", QUIET_ZONE)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise LayoutError(f"malformed manifest: {exc}") from None
    if len(slots) != int(data["darkModuleCount"]):
        raise LayoutError("manifest darkModuleCount disagrees with its document list")
    return geo
