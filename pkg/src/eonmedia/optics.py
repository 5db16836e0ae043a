"""Normal-incidence thin-film optics for the W/Si3N4 medium.

Reflectance comes from the 2x2 characteristic-matrix method. Layers are
listed from the ambient side down to the substrate; complex indices use
the n + ik convention (k >= 0 absorbs).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from collections.abc import Callable

import numpy as np

WAVELENGTH = 550e-9
DESIGN_BOTTOM_NITRIDE = 338e-9
DESIGN_TUNGSTEN = 50e-9
DESIGN_TOP_NITRIDE = 225e-9


class IndexTableError(ValueError):
    pass


@dataclass(frozen=True)
class OpticalLayer:
    name: str
    n: complex
    thickness: float | None = None  # None for semi-infinite media

    def __post_init__(self):
        n = complex(self.n)
        object.__setattr__(self, "n", n)
        if not n.real > 0:
            raise ValueError(f"{self.name}: Re(n) must be > 0, got {n}")
        if n.imag < 0:
            raise ValueError(f"{self.name}: Im(n) must be >= 0, got {n}")
        if self.thickness is not None and not self.thickness > 0:
            raise ValueError(f"{self.name}: thickness must be > 0, got {self.thickness}")


@dataclass(frozen=True)
class LayerStack:
    ambient: OpticalLayer
    layers: tuple[OpticalLayer, ...]
    substrate: OpticalLayer
    wavelength: float = WAVELENGTH

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.wavelength > 0:
            raise ValueError("wavelength must be > 0")
        if self.ambient.thickness is not None or self.substrate.thickness is not None:
            raise ValueError("ambient and substrate must be semi-infinite (thickness=None)")
        for layer in self.layers:
            if layer.thickness is None:
                raise ValueError(f"layer {layer.name} needs a finite thickness")

    def with_thickness(self, index: int, thickness: float) -> LayerStack:
        layers = list(self.layers)
        layers[index] = replace(layers[index], thickness=thickness)
        return replace(self, layers=tuple(layers))


@dataclass
class IndexTable:
    samples: dict[str, list[tuple[float, complex]]] = field(default_factory=dict)

    def materials(self) -> list[str]:
        return sorted(self.samples)


def load_index_table(path: str | Path | None = None) -> IndexTable:
    """Read a ``material,wavelength_nm,n_real,n_imag`` CSV (bundled table if ``path`` is None)."""
    if path is None:
        text = resources.files("eonmedia.data").joinpath("index_table.csv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    reader = csv.reader(lines)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["material", "wavelength_nm", "n_real", "n_imag"]:
        raise IndexTableError(f"line 1: expected header material,wavelength_nm,n_real,n_imag, got {header}")
    table = IndexTable()
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 4:
            raise IndexTableError(f"line {lineno}: expected 4 fields, got {len(row)}")
        name = row[0].strip()
        try:
            wl = float(row[1]) / 1e9  # division keeps nm literals exact (500/1e9 == 500e-9)
            n = complex(float(row[2]), float(row[3]))
        except ValueError as exc:
            raise IndexTableError(f"line {lineno}: {exc}") from None
        if not name:
            raise IndexTableError(f"line {lineno}: empty material name")
        table.samples.setdefault(name, []).append((wl, n))
    for name, rows in table.samples.items():
        wls = [w for w, _ in rows]
        if any(b <= a for a, b in zip(wls, wls[1:])):
            raise IndexTableError(f"{name}: wavelengths must be strictly increasing")
        if len(rows) < 2:
            raise IndexTableError(f"{name}: at least two samples are needed")
    return table


def interpolate(table: IndexTable, material: str, wavelength: float) -> complex:
    """Linear interpolation of Re n and Im n between tabulated wavelengths."""
    try:
        rows = table.samples[material]
    except KeyError:
        raise IndexTableError(f"unknown material {material!r}; known: {table.materials()}") from None
    lo, hi = rows[0][0], rows[-1][0]
    if not lo <= wavelength <= hi:
        raise IndexTableError(
            f"{material}: wavelength {wavelength * 1e9:.6g} nm outside table range [{lo * 1e9:.6g}, {hi * 1e9:.6g}] nm"
        )
    for (w0, n0), (w1, n1) in zip(rows, rows[1:]):
        if wavelength == w0:
            return n0
        if wavelength == w1:
            return n1
        if w0 < wavelength < w1:
            f = (wavelength - w0) / (w1 - w0)
            return complex(n0.real + f * (n1.real - n0.real), n0.imag + f * (n1.imag - n0.imag))
    raise AssertionError("unreachable")


def _amplitudes(stack: LayerStack, thickness_override: dict[int, np.ndarray] | None = None):
    """Return (r, t) amplitude coefficients; broadcasts over overridden thicknesses."""
    k0 = 2 * np.pi / stack.wavelength
    m00 = m11 = np.complex128(1.0)
    m01 = m10 = np.complex128(0.0)
    for i, layer in enumerate(stack.layers):
        d = layer.thickness if thickness_override is None or i not in thickness_override else thickness_override[i]
        delta = k0 * layer.n * np.asarray(d)
        c, s = np.cos(delta), np.sin(delta)
        # n + ik convention: phase factor exp(+i delta) decays, hence the -i terms
        a00, a01, a10, a11 = c, -1j * s / layer.n, -1j * layer.n * s, c
        m00, m01, m10, m11 = (
            m00 * a00 + m01 * a10,
            m00 * a01 + m01 * a11,
            m10 * a00 + m11 * a10,
            m10 * a01 + m11 * a11,
        )
    na, ns = stack.ambient.n, stack.substrate.n
    b = m00 + m01 * ns
    c = m10 + m11 * ns
    denom = na * b + c
    r = (na * b - c) / denom
    t = 2 * na / denom
    return r, t


def reflectance(stack: LayerStack) -> float:
    r, _ = _amplitudes(stack)
    return float(abs(r) ** 2)


def transmittance(stack: LayerStack) -> float:
    """Power transmittance into the substrate (meaningful for a non-absorbing substrate)."""
    _, t = _amplitudes(stack)
    return float(stack.substrate.n.real / stack.ambient.n.real * abs(t) ** 2)


def reflectance_vs_thickness(stack: LayerStack, layer_index: int, thicknesses) -> np.ndarray:
    """Reflectance for an array of thicknesses of one layer, all else fixed."""
    r, _ = _amplitudes(stack, {layer_index: np.asarray(thicknesses, dtype=float)})
    return np.abs(r) ** 2


def contrast(bare: LayerStack, metallized: LayerStack) -> float:
    """Readout discriminant |R_bare - R_metal| between uncovered and tungsten-covered regions."""
    if bare.wavelength != metallized.wavelength:
        raise ValueError(f"wavelength mismatch: {bare.wavelength} vs {metallized.wavelength}")
    if bare.ambient.n != metallized.ambient.n:
        raise ValueError("stacks must share the ambient medium")
    return abs(reflectance(bare) - reflectance(metallized))


@dataclass(frozen=True)
class StackPair:
    """Bare and tungsten-covered stacks of the medium plus the index of the top nitride layer in each."""

    bare: LayerStack
    metal: LayerStack
    bare_top: int = 0
    metal_top: int = 0


def design_stack_pair(
    bottom: float = DESIGN_BOTTOM_NITRIDE,
    top: float = DESIGN_TOP_NITRIDE,
    tungsten: float = DESIGN_TUNGSTEN,
    wavelength: float = WAVELENGTH,
    table: IndexTable | None = None,
) -> StackPair:
    """Si / bottom nitride / [W] / top nitride / air.

    Where there is no metal, the top nitride sits directly on the bottom one.
    """
    table = table or load_index_table()
    air = OpticalLayer("Air", interpolate(table, "Air", wavelength))
    si = OpticalLayer("Si", interpolate(table, "Si", wavelength))
    n_sin = interpolate(table, "Si3N4", wavelength)
    top_layer = OpticalLayer("Si3N4-top", n_sin, top)
    bottom_layer = OpticalLayer("Si3N4-bottom", n_sin, bottom)
    w = OpticalLayer("W", interpolate(table, "W", wavelength), tungsten)
    bare = LayerStack(air, (top_layer, bottom_layer), si, wavelength)
    metal = LayerStack(air, (top_layer, w, bottom_layer), si, wavelength)
    return StackPair(bare, metal, bare_top=0, metal_top=0)


_GOLDEN = (math.sqrt(5) - 1) / 2
# contrast differences below this are rounding noise and count as ties
_TIE = 1e-12


def _golden_max(f: Callable[[float], float], a: float, b: float, tol: float) -> tuple[float, float]:
    c, d = b - _GOLDEN * (b - a), a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = (a + b) / 2
    return x, f(x)


def optimize_thicknesses(
    build: Callable[[float, float], tuple[LayerStack, LayerStack]],
    bounds: tuple[tuple[float, float], tuple[float, float]],
    grid: int = 81,
    tol: float = 1e-12,
) -> tuple[tuple[float, float], float]:
    """Maximise contrast over two free thicknesses.

    ``build(d1, d2)`` returns the (bare, metallized) pair. Exhaustive grid
    search, then golden-section refinement along each axis inside the
    neighbouring grid cells. Ties go to the lexicographically smallest pair;
    refinement only replaces the grid optimum on strict improvement
    (differences below 1e-12 are treated as ties).
    """
    (lo1, hi1), (lo2, hi2) = bounds
    if not (0 < lo1 <= hi1 and 0 < lo2 <= hi2):
        raise ValueError("bounds must be positive and ordered")
    if grid < 2:
        raise ValueError("grid needs at least 2 points per axis")

    def score(d1: float, d2: float) -> float:
        return contrast(*build(d1, d2))

    xs = np.linspace(lo1, hi1, grid)
    ys = np.linspace(lo2, hi2, grid)
    best = (float(xs[0]), float(ys[0]))
    best_val = -math.inf
    for x in xs:
        for y in ys:
            v = score(float(x), float(y))
            if v > best_val + _TIE:
                best, best_val = (float(x), float(y)), v
    step1 = (hi1 - lo1) / (grid - 1)
    step2 = (hi2 - lo2) / (grid - 1)
    x, y = best
    if step1 > 0:
        cx, cv = _golden_max(lambda u: score(u, y), max(lo1, x - step1), min(hi1, x + step1), tol)
        if cv > best_val + _TIE:
            x, best_val = cx, cv
    if step2 > 0:
        cy, cv = _golden_max(lambda u: score(x, u), max(lo2, y - step2), min(hi2, y + step2), tol)
        if cv > best_val + _TIE:
            y, best_val = cy, cv
    return (x, y), best_val


def design_builder(
    tungsten: float = DESIGN_TUNGSTEN,
    wavelength: float = WAVELENGTH,
    table: IndexTable | None = None,
) -> Callable[[float, float], tuple[LayerStack, LayerStack]]:
    table = table or load_index_table()

    def build(bottom: float, top: float) -> tuple[LayerStack, LayerStack]:
        pair = design_stack_pair(bottom, top, tungsten, wavelength, table)
        return pair.bare, pair.metal

    return build
