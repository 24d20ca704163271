"""Per-element phase map generation and quantization over an array grid.

Phase-design convention: an element's reflection coefficient multiplies the
incident feed field, so the required phase cancels the feed path delay and
then imposes the outgoing ramp (beam), helix (vortex), or focusing front.
All maps are stored wrapped to [0, 2*pi).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .codebook import Codebook
from .element import PinConfig
from .util import wavenumber, wrap_pi, wrap_two_pi

# Deterministic 64-bit linear congruential generator (Knuth's MMIX
# constants); the sign bit of each step decides a cell.  Fixed here so
# random coding masks reproduce bit-for-bit on any platform.
_LCG_MULT = 6364136223846793005
_LCG_INC = 1442695040888963407
_LCG_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class ArrayGeometry:
    """Centered rectangular grid of element positions in the z = 0 plane.

    Element (r, c) sits at x = (c - (cols-1)/2) * spacing,
    y = (r - (rows-1)/2) * spacing, so the grid centroid is the origin.
    """

    rows: int
    cols: int
    spacing: float

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be >= 1")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def xy(self) -> tuple[np.ndarray, np.ndarray]:
        "Element x and y coordinate grids, each rows x cols."
        c = np.arange(self.cols) - (self.cols - 1) / 2.0
        r = np.arange(self.rows) - (self.rows - 1) / 2.0
        x = np.broadcast_to(c * self.spacing, (self.rows, self.cols)).copy()
        y = np.broadcast_to((r * self.spacing)[:, None], (self.rows, self.cols)).copy()
        return x, y


class FeedKind(Enum):
    PLANE_WAVE = "plane"
    SPHERICAL = "spherical"


@dataclass(frozen=True)
class FeedSpec:
    """Spatial illumination of the array.

    A plane-wave feed is unit amplitude, zero phase at every element.  A
    spherical feed at `position` (z > 0) illuminates with a path-delay
    phase and a cos^q_feed taper of the angle off the feed-to-center axis.
    """

    kind: FeedKind
    position: tuple[float, float, float] | None = None
    q_feed: float = 0.0

    def __post_init__(self):
        if self.q_feed < 0:
            raise ValueError("q_feed must be >= 0")
        if self.kind is FeedKind.SPHERICAL:
            if self.position is None or self.position[2] <= 0:
                raise ValueError("spherical feed needs a position with z > 0")
        elif self.position is not None:
            raise ValueError("plane-wave feed takes no position")

    @classmethod
    def plane_wave(cls) -> "FeedSpec":
        return cls(kind=FeedKind.PLANE_WAVE)

    @classmethod
    def spherical(cls, x: float, y: float, z: float, q_feed: float = 0.0) -> "FeedSpec":
        return cls(kind=FeedKind.SPHERICAL, position=(x, y, z), q_feed=q_feed)


def feed_path_lengths(geom: ArrayGeometry, feed: FeedSpec) -> np.ndarray | None:
    "Distance from the feed to each element; None for a plane-wave feed."
    if feed.kind is FeedKind.PLANE_WAVE:
        return None
    x, y = geom.xy()
    fx, fy, fz = feed.position
    return np.sqrt((x - fx) ** 2 + (y - fy) ** 2 + fz**2)


def feed_field(geom: ArrayGeometry, feed: FeedSpec, f: float) -> np.ndarray:
    """Complex incident field at each element.

    Plane wave: ones.  Spherical: cos^q_feed taper of the angle between the
    feed-to-center axis and the feed-to-element ray, times exp(-j k d).
    Spreading loss is not modeled; the taper is the behavioral knob.
    """
    if feed.kind is FeedKind.PLANE_WAVE:
        return np.ones(geom.shape, dtype=complex)
    d = feed_path_lengths(geom, feed)
    x, y = geom.xy()
    fx, fy, fz = feed.position
    feed_norm = np.sqrt(fx**2 + fy**2 + fz**2)
    # cos of angle between (element - feed) and (origin - feed)
    cos_angle = ((x - fx) * (-fx) + (y - fy) * (-fy) + (-fz) * (-fz)) / (d * feed_norm)
    cos_angle = np.clip(cos_angle, 0.0, 1.0)
    amp = np.power(cos_angle, feed.q_feed)
    return amp * np.exp(-1j * wavenumber(f) * d)


@dataclass(frozen=True)
class PhaseMap:
    "Grid of desired element phases, wrapped to [0, 2*pi)."

    phases: np.ndarray
    geometry: ArrayGeometry

    def __post_init__(self):
        arr = np.asarray(self.phases, dtype=float)
        if arr.shape != self.geometry.shape:
            raise ValueError(
                f"phase grid shape {arr.shape} does not match geometry "
                f"{self.geometry.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("phase map entries must be finite")
        object.__setattr__(self, "phases", wrap_two_pi(arr))

    def __add__(self, other: "PhaseMap") -> "PhaseMap":
        if other.geometry != self.geometry:
            raise ValueError("cannot add phase maps over different geometries")
        return PhaseMap(wrap_two_pi(self.phases + other.phases), self.geometry)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PhaseMap):
            return NotImplemented
        return self.geometry == other.geometry and np.array_equal(
            self.phases, other.phases
        )


def required_phase_beam(
    geom: ArrayGeometry,
    feed: FeedSpec,
    f: float,
    theta0: float,
    phi0: float,
) -> PhaseMap:
    """Element phases that steer the reflected beam to (theta0, phi0).

    Spherical feeds get their path delay compensated; on top of that the
    map imposes the linear ramp -k (x sin(theta0) cos(phi0) +
    y sin(theta0) sin(phi0)).  theta0 must lie in [0, pi/2).
    """
    if not 0.0 <= theta0 < np.pi / 2:
        raise ValueError("theta0 must be in [0, pi/2)")
    if f <= 0:
        raise ValueError("frequency must be positive")
    k = wavenumber(f)
    x, y = geom.xy()
    psi = np.zeros(geom.shape)
    d = feed_path_lengths(geom, feed)
    if d is not None:
        psi = psi + k * d
    psi = psi - k * (
        x * np.sin(theta0) * np.cos(phi0) + y * np.sin(theta0) * np.sin(phi0)
    )
    return PhaseMap(psi, geom)


def oam_phase(geom: ArrayGeometry, ell: int) -> PhaseMap:
    """Helical phase ell * atan2(y, x), to be added to a beam map.

    An element exactly at the origin (odd x odd grids) takes phase 0, which
    is what atan2(0, 0) returns.
    """
    x, y = geom.xy()
    return PhaseMap(ell * np.arctan2(y, x), geom)


def focus_phase(
    geom: ArrayGeometry,
    feed: FeedSpec,
    f: float,
    focal_point: tuple[float, float, float],
) -> PhaseMap:
    "Phases focusing the reflected field at a point with z > 0."
    if focal_point[2] <= 0:
        raise ValueError("focal point must have z > 0")
    if f <= 0:
        raise ValueError("frequency must be positive")
    k = wavenumber(f)
    x, y = geom.xy()
    tx, ty, tz = focal_point
    target = np.sqrt((x - tx) ** 2 + (y - ty) ** 2 + tz**2)
    psi = k * target
    d = feed_path_lengths(geom, feed)
    if d is not None:
        psi = psi + k * d
    return PhaseMap(psi, geom)


def coding_pattern(
    kind: str,
    geom: ArrayGeometry,
    *,
    block: int = 1,
    seed: int = 0,
    grid: np.ndarray | None = None,
) -> PhaseMap:
    """Binary 0/pi scattering-suppression mask.

    kind 'checkerboard': pi on tiles where floor(r/block) + floor(c/block)
    is odd.  kind 'random': independent fair draws per cell from the fixed
    64-bit linear generator, traversed row-major, reproducible for a given
    seed.  kind 'custom': validates that the supplied grid is {0, pi}
    valued.
    """
    if kind == "checkerboard":
        if block < 1:
            raise ValueError("checkerboard block must be >= 1")
        r = np.arange(geom.rows)[:, None] // block
        c = np.arange(geom.cols)[None, :] // block
        values = np.pi * ((r + c) % 2)
    elif kind == "random":
        state = int(seed) & _LCG_MASK
        values = np.empty(geom.shape)
        for i in range(geom.rows):
            for j in range(geom.cols):
                state = (state * _LCG_MULT + _LCG_INC) & _LCG_MASK
                values[i, j] = np.pi * (state >> 63)
    elif kind == "custom":
        if grid is None:
            raise ValueError("custom coding requires a grid")
        values = np.asarray(grid, dtype=float)
        if values.shape != geom.shape:
            raise ValueError(
                f"custom grid shape {values.shape} does not match geometry "
                f"{geom.shape}"
            )
        if not np.all((values == 0.0) | (values == np.pi)):
            raise ValueError("custom coding grid must contain only 0 and pi")
    else:
        raise ValueError(f"unknown coding kind {kind!r}")
    return PhaseMap(values, geom)


@dataclass(frozen=True)
class StateMap:
    """Quantized PIN-state assignment over the array.

    Carries the per-element state indices, the codebook they refer to, and
    the signed quantization error of each element.
    """

    indices: np.ndarray
    book: Codebook
    errors: np.ndarray
    geometry: ArrayGeometry

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        err = np.asarray(self.errors, dtype=float)
        if idx.shape != self.geometry.shape or err.shape != self.geometry.shape:
            raise ValueError("index/error grids must match the geometry shape")
        if idx.min() < 0 or idx.max() >= len(self.book.states):
            raise ValueError("state index out of range for the codebook")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "errors", err)

    @property
    def max_abs_error(self) -> float:
        return float(np.max(np.abs(self.errors)))

    @property
    def rms_error(self) -> float:
        return float(np.sqrt(np.mean(self.errors**2)))

    def state_phases(self) -> np.ndarray:
        "Grid of the assigned codebook phases."
        return self.book.phases()[self.indices]

    def __eq__(self, other) -> bool:
        if not isinstance(other, StateMap):
            return NotImplemented
        return (
            self.geometry == other.geometry
            and self.book == other.book
            and np.array_equal(self.indices, other.indices)
            and np.array_equal(self.errors, other.errors)
        )


def quantize_map(pmap: PhaseMap, book: Codebook) -> StateMap:
    "Quantize every element of a phase map to its nearest codebook state."
    phases = book.phases()
    diffs = wrap_pi(pmap.phases[..., None] - phases[None, None, :])
    indices = np.argmin(np.abs(diffs), axis=-1)
    errors = np.take_along_axis(diffs, indices[..., None], axis=-1)[..., 0]
    return StateMap(
        indices=indices, book=book, errors=errors, geometry=pmap.geometry
    )


def format_bitstream(smap: StateMap, full_config: bool = False) -> str:
    """Render a state map as the control bitstream text document.

    Header line 'rows cols bits'; one character per element per row.  With
    bits 1 or 2 the character is the state index; full_config exports the
    4-bit PIN word (u+, v+, u-, v- as bit 3..0) as a lowercase hex nibble.
    """
    if full_config:
        cells = np.empty(smap.geometry.shape, dtype=np.int64)
        for i, state in enumerate(smap.book.states):
            cfg = state.config
            if not isinstance(cfg, PinConfig):
                raise ValueError(
                    f"state {state.label!r} has no single PIN config; "
                    "full-config export unavailable"
                )
            cells[smap.indices == i] = cfg.index
        bits = 4
        digits = "0123456789abcdef"
    else:
        cells = smap.indices
        bits = smap.book.bits
        digits = "0123456789"
    lines = [f"{smap.geometry.rows} {smap.geometry.cols} {bits}"]
    for row in cells:
        lines.append("".join(digits[int(v)] for v in row))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ParsedBitstream:
    rows: int
    cols: int
    bits: int
    cells: np.ndarray

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParsedBitstream):
            return NotImplemented
        return (
            (self.rows, self.cols, self.bits) == (other.rows, other.cols, other.bits)
            and np.array_equal(self.cells, other.cells)
        )


def parse_bitstream(text: str) -> ParsedBitstream:
    "Parse a bitstream document, validating the header against the body."
    lines = text.splitlines()
    if not lines:
        raise ValueError("bitstream is empty")
    head = lines[0].split()
    if len(head) != 3:
        raise ValueError(f"malformed bitstream header {lines[0]!r}")
    try:
        rows, cols, bits = (int(v) for v in head)
    except ValueError as exc:
        raise ValueError(f"malformed bitstream header {lines[0]!r}") from exc
    if bits not in (1, 2, 4):
        raise ValueError(f"unsupported bitstream bits value {bits}")
    body = lines[1:]
    if len(body) != rows:
        raise ValueError(
            f"bitstream header declares {rows} rows but body has {len(body)}"
        )
    cells = np.empty((rows, cols), dtype=np.int64)
    limit = 1 << bits
    for i, line in enumerate(body):
        if len(line) != cols:
            raise ValueError(
                f"bitstream line {i + 2}: expected {cols} cells, got {len(line)}"
            )
        for j, ch in enumerate(line):
            try:
                value = int(ch, 16)
            except ValueError as exc:
                raise ValueError(
                    f"bitstream line {i + 2}: invalid cell {ch!r}"
                ) from exc
            if value >= limit:
                raise ValueError(
                    f"bitstream line {i + 2}: cell value {value} "
                    f"out of range for {bits}-bit export"
                )
            cells[i, j] = value
    return ParsedBitstream(rows=rows, cols=cols, bits=bits, cells=cells)
