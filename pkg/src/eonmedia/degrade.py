"""Monte-Carlo thermal ageing of a mastered disk, rendered to a reflectance image.

Damage channels, applied in this order:

* Arrhenius flips: each tungsten pixel disappears with the switching
  probability of the whole schedule (hazards of the segments add).
* Cracks in the top nitride for segments above the onset temperature:
  random-walk polylines; pixels near a crack get a jittered top thickness.
* Whiskers at or above ``whisker_temp``: sparse saturated pixels.
* Destruction at or above ``destruction_temp``: the image becomes noise.

All randomness is counter-based (see :mod:`eonmedia.rng`), keyed by the
scenario seed plus pixel or crack indices.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import pnm, rng
from .layout import MaskBitmap
from .optics import StackPair, design_stack_pair, reflectance, reflectance_vs_thickness
from .retention import K_B, T_REF, DomainError, barrier_temperature_model

# smallest barrier for which 1 h at 848 K leaves an error fraction below 1e-6 (f0 = 1 GHz)
DEFAULT_BIT_BARRIER = K_B * 848.0 * math.log(3600.0 * 1e9 / 1e-6)


@dataclass(frozen=True)
class DamageScenario:
    schedule: tuple[tuple[float, float], ...]
    bit_barrier: float = DEFAULT_BIT_BARRIER
    crack_onset_temp: float = 493.0
    crack_density: float = 5.0  # cracks per mm^2 per 100 K above onset
    destruction_temp: float = 1373.0
    whisker_temp: float = 923.0
    seed: int = 0
    f0: float = 1e9
    barrier_slope: float = 0.0  # J/K, barrier softening above T_REF
    crack_step_px: float = 5.0
    crack_mean_length_px: float = 200.0
    crack_halo_px: float = 2.0
    crack_turn_rad: float = 0.6
    thickness_jitter: float = 0.2
    whisker_fraction: float = 0.01
    noise_sigma: float = 20.0

    def __post_init__(self):
        sched = tuple((float(t), float(d)) for t, d in self.schedule)
        object.__setattr__(self, "schedule", sched)
        for t, d in sched:
            if not t > 0:
                raise DomainError(f"schedule temperature must be > 0, got {t}")
            if not d >= 0:
                raise DomainError(f"schedule duration must be >= 0, got {d}")
        if not self.crack_onset_temp < self.whisker_temp < self.destruction_temp:
            raise DomainError("need crack onset < whisker < destruction temperature")
        if self.crack_density < 0 or self.bit_barrier < 0 or not self.f0 > 0:
            raise DomainError("density and barrier must be >= 0, f0 > 0")

    def to_json(self) -> str:
        d = asdict(self)
        d["schedule"] = [list(s) for s in self.schedule]
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> DamageScenario:
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
        if "schedule" not in data:
            raise ValueError("scenario needs a schedule")
        kwargs = dict(data)
        kwargs["schedule"] = tuple(tuple(s) for s in data["schedule"])
        return cls(**kwargs)

    @classmethod
    def load(cls, path: str | Path) -> DamageScenario:
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def sha256(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    def active(self) -> tuple[tuple[float, float], ...]:
        return tuple((t, d) for t, d in self.schedule if d > 0)


@dataclass
class AgedDiskImage:
    pixels: np.ndarray  # uint8 grayscale
    provenance: dict = field(default_factory=dict)
    flipped_bits: int = 0
    crack_count: int = 0
    perturbed_pixels: int = 0
    destroyed: bool = False
    whiskers: int = 0

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def to_pgm(self) -> bytes:
        comment = "eonmedia " + json.dumps(self.provenance, sort_keys=True, separators=(",", ":"))
        return pnm.encode_pgm(self.pixels, [comment])

    @classmethod
    def from_pgm(cls, data: bytes) -> AgedDiskImage:
        pixels, comments = pnm.decode_pgm(data)
        provenance = {}
        for c in comments:
            if c.startswith("eonmedia "):
                provenance = json.loads(c[len("eonmedia ") :])
        return cls(pixels, provenance)


def to_gray(r: np.ndarray | float) -> np.ndarray:
    """Map reflectance [0, 1] linearly onto 0..255."""
    return np.clip(np.rint(np.asarray(r) * 255.0), 0, 255).astype(np.uint8)


def gray_levels(pair: StackPair) -> tuple[int, int]:
    """(bare, metal) gray levels of the undamaged stacks."""
    return int(to_gray(reflectance(pair.bare))), int(to_gray(reflectance(pair.metal)))


def pristine_image(mask: MaskBitmap, pair: StackPair | None = None) -> np.ndarray:
    pair = pair or design_stack_pair()
    bare, metal = gray_levels(pair)
    return np.where(mask.bits.astype(bool), np.uint8(metal), np.uint8(bare)).astype(np.uint8)


def total_hazard(scenario: DamageScenario) -> float:
    h = 0.0
    for t, d in scenario.active():
        barrier = barrier_temperature_model(scenario.bit_barrier, scenario.barrier_slope, t, T_REF)
        h += scenario.f0 * math.exp(-barrier / (K_B * t)) * d
    return h


def flip_probability(scenario: DamageScenario) -> float:
    return -math.expm1(-total_hazard(scenario))


def expected_flip_count(mask: MaskBitmap, scenario: DamageScenario) -> float:
    """P_sw * N over the tungsten pixels, without sampling."""
    return flip_probability(scenario) * int(np.count_nonzero(mask.bits))


def crack_polylines(shape: tuple[int, int], pitch: float, scenario: DamageScenario) -> list[np.ndarray]:
    """Crack paths as (k, 2) arrays of (row, col) vertices, in pixel units."""
    h, w = shape
    area_mm2 = h * w * (pitch * 1e3) ** 2
    seed = scenario.seed
    paths = []
    crack_id = 0
    for s, (t, _) in enumerate(scenario.active()):
        if t <= scenario.crack_onset_temp:
            continue
        lam = scenario.crack_density * area_mm2 * (t - scenario.crack_onset_temp) / 100.0
        count = rng.poisson(rng.uniform1(seed, rng.CRACK_COUNT + s, 0), lam)
        for _ in range(count):
            stream = rng.CRACK_WALK + (crack_id % rng.STREAM_STRIDE)
            head = rng.uniform(seed, stream, [0, 1, 2, 3])
            length = -scenario.crack_mean_length_px * math.log1p(-head[3])
            steps = max(1, int(math.ceil(length / scenario.crack_step_px)))
            turns = (rng.uniform(seed, stream, np.arange(4, 4 + steps)) - 0.5) * 2 * scenario.crack_turn_rad
            theta = 2 * math.pi * head[2] + np.cumsum(turns)
            pts = np.empty((steps + 1, 2))
            pts[0] = head[0] * h, head[1] * w
            pts[1:, 0] = pts[0, 0] + np.cumsum(scenario.crack_step_px * np.sin(theta))
            pts[1:, 1] = pts[0, 1] + np.cumsum(scenario.crack_step_px * np.cos(theta))
            paths.append(pts)
            crack_id += 1
    return paths


def rasterize_cracks(shape: tuple[int, int], paths: list[np.ndarray], halo: float) -> np.ndarray:
    """Boolean mask of pixels whose centre lies within ``halo`` of any crack segment."""
    h, w = shape
    hit = np.zeros(shape, dtype=bool)
    pad = int(math.ceil(halo)) + 1
    for pts in paths:
        for (r0, c0), (r1, c1) in zip(pts[:-1], pts[1:]):
            rlo, rhi = max(0, int(min(r0, r1)) - pad), min(h, int(max(r0, r1)) + pad + 1)
            clo, chi = max(0, int(min(c0, c1)) - pad), min(w, int(max(c0, c1)) + pad + 1)
            if rlo >= rhi or clo >= chi:
                continue
            rr, cc = np.mgrid[rlo:rhi, clo:chi]
            pr, pc = rr + 0.5, cc + 0.5
            dr, dc = r1 - r0, c1 - c0
            seg2 = dr * dr + dc * dc
            u = np.clip(((pr - r0) * dr + (pc - c0) * dc) / seg2, 0, 1) if seg2 > 0 else np.zeros_like(pr)
            dist2 = (pr - r0 - u * dr) ** 2 + (pc - c0 - u * dc) ** 2
            hit[rlo:rhi, clo:chi] |= dist2 <= halo * halo
    return hit


def age_disk(mask: MaskBitmap, pair: StackPair | None, scenario: DamageScenario) -> AgedDiskImage:
    pair = pair or design_stack_pair()
    seed = scenario.seed
    bits = mask.bits.astype(bool).copy()
    shape = bits.shape
    flat_index = np.arange(bits.size, dtype=np.uint64).reshape(shape)
    provenance = {"layout_sha256": mask.sha256(), "scenario_sha256": scenario.sha256(), "seed": seed}

    p = flip_probability(scenario)
    flipped = 0
    if p > 0:
        metal_idx = flat_index[bits]
        gone = rng.uniform(seed, rng.FLIP, metal_idx) < p
        flipped = int(np.count_nonzero(gone))
        if flipped:
            bits.reshape(-1)[metal_idx[gone].astype(np.intp)] = False

    bare, metal = gray_levels(pair)
    image = np.where(bits, np.uint8(metal), np.uint8(bare)).astype(np.uint8)

    paths = crack_polylines(shape, mask.pitch, scenario)
    perturbed = 0
    if paths:
        near = rasterize_cracks(shape, paths, scenario.crack_halo_px)
        perturbed = int(np.count_nonzero(near))
        if perturbed:
            jitter = 1 + scenario.thickness_jitter * (2 * rng.uniform(seed, rng.THICKNESS, flat_index[near]) - 1)
            on_metal = bits[near]
            r = np.empty(perturbed)
            top_bare = pair.bare.layers[pair.bare_top].thickness
            top_metal = pair.metal.layers[pair.metal_top].thickness
            r[~on_metal] = reflectance_vs_thickness(pair.bare, pair.bare_top, top_bare * jitter[~on_metal])
            r[on_metal] = reflectance_vs_thickness(pair.metal, pair.metal_top, top_metal * jitter[on_metal])
            image[near] = to_gray(r)

    whiskers = 0
    peak = max((t for t, _ in scenario.active()), default=0.0)
    if peak >= scenario.whisker_temp:
        salt = rng.uniform(seed, rng.WHISKER, flat_index) < scenario.whisker_fraction
        whiskers = int(np.count_nonzero(salt))
        image[salt] = 255

    destroyed = peak >= scenario.destruction_temp
    if destroyed:
        noise = 128.0 + scenario.noise_sigma * rng.normal(seed, rng.NOISE, flat_index)
        image = np.clip(np.rint(noise), 0, 255).astype(np.uint8)

    return AgedDiskImage(
        image,
        provenance,
        flipped_bits=flipped,
        crack_count=len(paths),
        perturbed_pixels=perturbed,
        destroyed=destroyed,
        whiskers=whiskers,
    )
