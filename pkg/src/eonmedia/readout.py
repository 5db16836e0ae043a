"""Reading an aged disk image back into documents and survival statistics."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .degrade import AgedDiskImage, gray_levels
from .layout import LayoutError, LayoutGeometry, geometry_from_manifest, sample_layout
from .optics import StackPair, design_stack_pair
from .qrcodec import DecodeReport, qr_decode, qr_encode, repair_finders
from .qrcodec.symbol import finder_regions, version_from_side

MONOCHROMATIC = "monochromatic"
WHITELIGHT = "whitelight"
MODES = (MONOCHROMATIC, WHITELIGHT)
UNDECODED_ERROR_FRACTION = 0.5


class ReadoutError(ValueError):
    pass


@dataclass
class ReadoutOptions:
    repair_finders: bool = False
    mode: str = MONOCHROMATIC
    alpha_target: float = 1e-6
    erasure_band: float = 0.1  # relative to the threshold gray value
    level_tolerance: int = 2  # whitelight: gray levels this close to a pristine level are trusted
    seed: int = 0
    stacks: StackPair | None = None

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass
class SymbolResult:
    index: int
    status: str
    corrected: int
    erasures: int
    finder: tuple[bool, bool, bool]
    decoded: bool
    repaired: bool = False


@dataclass
class ReadoutReport:
    total_inner: int
    decoded: int
    decoded_after_repair: int
    alpha_observed: float
    alpha_target: float
    per_symbol: list[SymbolResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.alpha_observed <= self.alpha_target

    def to_dict(self) -> dict:
        return {
            "totalInner": self.total_inner,
            "decoded": self.decoded,
            "decodedAfterRepair": self.decoded_after_repair,
            "alphaObserved": self.alpha_observed,
            "alphaTarget": self.alpha_target,
            "passed": self.passed,
            "undecodedErrorFraction": UNDECODED_ERROR_FRACTION,
            "perSymbol": [
                {
                    "index": s.index,
                    "status": s.status,
                    "corrected": s.corrected,
                    "erasures": s.erasures,
                    "finder": list(s.finder),
                }
                for s in self.per_symbol
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> ReadoutReport:
        d = json.loads(text)
        report = cls(d["totalInner"], d["decoded"], d["decodedAfterRepair"], d["alphaObserved"], d["alphaTarget"])
        for s in d["perSymbol"]:
            report.per_symbol.append(
                SymbolResult(
                    s["index"],
                    s["status"],
                    s["corrected"],
                    s["erasures"],
                    tuple(s["finder"]),
                    decoded=s["status"] in ("ok", "ok after repair"),
                    repaired=s["status"] == "ok after repair",
                )
            )
        if report.passed != d["passed"]:
            raise ValueError("report 'passed' flag disagrees with alpha values")
        return report


def classify(
    image: AgedDiskImage | np.ndarray,
    geometry: LayoutGeometry,
    mode: str = MONOCHROMATIC,
    stacks: StackPair | None = None,
    erasure_band: float = 0.1,
    level_tolerance: int = 2,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel tungsten bits and erasure flags.

    Monochromatic: threshold halfway between the pristine gray levels;
    values within ``erasure_band * threshold`` of it are erasures.
    Whitelight: values that match neither pristine level (within
    ``level_tolerance``) cannot be assigned and get a coin-flip bit; no
    erasures are reported.
    """
    pixels = image.pixels if isinstance(image, AgedDiskImage) else np.asarray(image)
    if pixels.shape != geometry.shape:
        raise LayoutError(f"image shape {pixels.shape} does not match layout geometry {geometry.shape}")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    bare, metal = gray_levels(stacks or design_stack_pair())
    if bare == metal:
        raise ReadoutError("stacks give identical gray levels; no contrast to read")
    v = pixels.astype(np.float64)
    threshold = (bare + metal) / 2
    bits = (v > threshold) if metal > bare else (v < threshold)
    bits = bits.astype(np.uint8)
    if mode == MONOCHROMATIC:
        erasures = np.abs(v - threshold) <= erasure_band * threshold
        return bits, erasures
    off_level = np.minimum(np.abs(v - bare), np.abs(v - metal)) > level_tolerance
    if np.any(off_level):
        idx = np.flatnonzero(off_level).astype(np.uint64)
        coin = rng.uniform(seed, rng.CLASSIFY, idx) < 0.5
        bits.reshape(-1)[idx.astype(np.intp)] = coin
    return bits, np.zeros(bits.shape, dtype=bool)


def _clear_finder_erasures(erasures: np.ndarray) -> np.ndarray:
    e = erasures.copy()
    for rs_, cs in finder_regions(version_from_side(e.shape[0])):
        e[rs_, cs] = False
    return e


def read_disk(image: AgedDiskImage, manifest: dict, options: ReadoutOptions | None = None) -> ReadoutReport:
    options = options or ReadoutOptions()
    geometry = geometry_from_manifest(manifest)
    if image.pixels.shape != geometry.shape:
        raise ReadoutError(f"image {image.pixels.shape} does not match manifest geometry {geometry.shape}")
    expected_mask = manifest.get("mask_sha256")
    actual_mask = image.provenance.get("layout_sha256")
    if expected_mask and actual_mask and expected_mask != actual_mask:
        raise ReadoutError("image was aged from a different mask than the manifest describes")

    bits, erasures = classify(
        image, geometry, options.mode, options.stacks, options.erasure_band, options.level_tolerance, options.seed
    )
    _, inner = sample_layout(bits, geometry)
    _, inner_erasures = sample_layout(erasures.astype(np.uint8), geometry)
    hashes = {int(d["index"]): d["bytes_sha256"] for d in manifest["documents"]}

    results = []
    error_modules = 0.0
    total_modules = 0
    reference: dict[tuple[bytes, str, int], np.ndarray] = {}
    memo: dict[tuple[bytes, bytes], DecodeReport] = {}  # padded layouts repeat identical symbols

    def decode(m: np.ndarray, e: np.ndarray) -> DecodeReport:
        key = (m.tobytes(), e.tobytes())
        if key not in memo:
            memo[key] = qr_decode(m, e if e.any() else None)
        return memo[key]

    for index in geometry.slots:
        matrix = inner[index]
        er = inner_erasures[index].astype(bool)
        report = decode(matrix, er)
        finders = tuple(bool(f) for f in report.finder_status)  # as found, before any repair
        status, decoded, repaired = _judge(report, hashes[index])
        if not decoded and options.repair_finders:
            retry = decode(repair_finders(matrix), _clear_finder_erasures(er))
            _, r_decoded, _ = _judge(retry, hashes[index])
            if r_decoded:
                report, status, decoded, repaired = retry, "ok after repair", True, True
        total_modules += matrix.size
        if decoded:
            key = (report.payload, report.ec_level, report.mask)
            ref = reference.get(key)
            if ref is None:
                ref = qr_encode(report.payload, report.version, report.ec_level, report.mask).modules
                reference[key] = ref
            error_modules += int(np.count_nonzero(ref != matrix))
        else:
            error_modules += UNDECODED_ERROR_FRACTION * matrix.size
        results.append(
            SymbolResult(index, status, report.corrected_codewords, report.used_erasures, finders, decoded, repaired)
        )
    n_plain = sum(1 for r in results if r.decoded and not r.repaired)
    n_total = sum(1 for r in results if r.decoded)
    alpha = error_modules / total_modules if total_modules else 0.0
    return ReadoutReport(len(results), n_plain, n_total, alpha, options.alpha_target, results)


def _judge(report: DecodeReport, expected_sha: str) -> tuple[str, bool, bool]:
    if not report.ok:
        return report.status, False, False
    if hashlib.sha256(report.payload).hexdigest() != expected_sha:
        return "payload mismatch", False, False
    return "ok", True, False
