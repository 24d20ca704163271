"""Behavioral model of the X-shaped four-diode reflective element.

The element is a pair of crossed metal strips along the +-45 deg diagonals
(the u and v axes), each strip bridged by two PIN diodes.  Conducting diodes
lengthen the strip they sit on, which shifts resonances; states that leave
the two diagonals with different electrical lengths rotate the reflected
polarization.  This module classifies the 16 diode states under the two
canonical incidence directions into ten behavior classes and produces each
class's 2x2 complex reflection (Jones) response.

Frame convention: Jones matrices are expressed in the incidence frame, basis
vector 1 along the incident E-field.  For edge-aligned incidence E lies
along the element edge (x); for diagonal-aligned incidence E lies along the
u strip.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np


class Incidence(Enum):
    "Direction of the incident E-field relative to the element."

    EDGE = "edge"          # E along the element edge (x axis)
    DIAGONAL = "diagonal"  # E along the u strip (+45 deg)


class ModeLabel(Enum):
    A1 = "A1"
    A2 = "A2"
    A3 = "A3"
    A4 = "A4"
    B1 = "B1"
    B2 = "B2"
    B3 = "B3"
    B4 = "B4"
    B5 = "B5"
    B6 = "B6"


class ModeKind(Enum):
    RESONANT = "resonant"
    CONVERTING = "converting"


CONVERTING_LABELS = frozenset(
    {ModeLabel.A4, ModeLabel.B4, ModeLabel.B5, ModeLabel.B6}
)

# Effective-length fractions (long, short) of the full strip for each class.
# Stub < half < three-quarter < full keeps the resonances distinct; all of
# these are overridable through ElementSpec.
DEFAULT_LENGTH_TABLE: dict[ModeLabel, tuple[float, float]] = {
    ModeLabel.B1: (0.45, 0.45),
    ModeLabel.B2: (0.5, 0.5),
    ModeLabel.B3: (1.0, 1.0),
    ModeLabel.B4: (0.725, 0.45),
    ModeLabel.B5: (1.0, 0.45),
    ModeLabel.B6: (1.0, 0.725),
    ModeLabel.A1: (0.45, 0.45),
    ModeLabel.A2: (0.725, 0.45),
    ModeLabel.A3: (1.0, 0.45),
    ModeLabel.A4: (0.725, 0.45),
}

DEFAULT_Q_FACTOR = 5.0
DEFAULT_EXT_FACTOR = 0.85
DEFAULT_F0_HZ = 10e9


@dataclass(frozen=True, order=True)
class PinConfig:
    """ON/OFF state of the four arm diodes.

    Arms are ordered (u+, v+, u-, v-): arm u+ lies along +45 deg, v+ along
    +135 deg, u- along -135 deg, v- along -45 deg.  True means conducting.
    Ordering and equality are bitwise on this 4-tuple, u+ most significant.
    """

    arm_u_pos: bool
    arm_v_pos: bool
    arm_u_neg: bool
    arm_v_neg: bool

    @property
    def bits(self) -> tuple[bool, bool, bool, bool]:
        return (self.arm_u_pos, self.arm_v_pos, self.arm_u_neg, self.arm_v_neg)

    @property
    def index(self) -> int:
        "Canonical index 0-15, u+ as bit 3 down to v- as bit 0."
        u_pos, v_pos, u_neg, v_neg = self.bits
        return (u_pos << 3) | (v_pos << 2) | (u_neg << 1) | int(v_neg)

    @property
    def on_count(self) -> int:
        return sum(self.bits)

    def to_string(self) -> str:
        "Serialize as a 4-character 0/1 string, e.g. '1010' = u strip ON."
        return "".join("1" if b else "0" for b in self.bits)

    @classmethod
    def from_string(cls, text: str) -> "PinConfig":
        if len(text) != 4 or any(c not in "01" for c in text):
            raise ValueError(
                f"pin config must be 4 characters of 0/1, got {text!r}"
            )
        return cls(*(c == "1" for c in text))

    @classmethod
    def from_index(cls, index: int) -> "PinConfig":
        if not 0 <= index < 16:
            raise ValueError(f"pin config index out of range: {index}")
        return cls(bool(index & 8), bool(index & 4), bool(index & 2), bool(index & 1))

    def __str__(self) -> str:
        return self.to_string()


def all_pin_configs() -> list[PinConfig]:
    "All 16 configs in canonical bitwise order."
    return [PinConfig.from_index(i) for i in range(16)]


@dataclass(frozen=True)
class Mode:
    """One of the ten behavior classes.

    sigma is the +-1 orientation sign of the effective diagonal resonator
    and exists only for converting modes.  long_factor/short_factor are the
    effective-length fractions driving the two reflection phases.
    """

    label: ModeLabel
    kind: ModeKind
    sigma: int | None
    long_factor: float
    short_factor: float

    def __post_init__(self):
        if self.kind is ModeKind.CONVERTING:
            if self.sigma not in (+1, -1):
                raise ValueError("converting mode requires sigma of +1 or -1")
        elif self.sigma is not None:
            raise ValueError("resonant mode carries no sigma")
        if not 0.0 < self.short_factor <= self.long_factor <= 1.0:
            raise ValueError(
                "length factors must satisfy 0 < short <= long <= 1"
            )


@dataclass(frozen=True)
class ElementSpec:
    """Tunable element parameters.

    f0 is the resonant frequency of the full-length strip (length factor
    1.0); shorter effective lengths resonate at f0 / factor.  q_factor sets
    the steepness of the reflection phase S-curve.  ext_factor is the extra
    resonant length used by the four-state co-polarized scheme.
    """

    f0: float = DEFAULT_F0_HZ
    q_factor: float = DEFAULT_Q_FACTOR
    length_table: dict[ModeLabel, tuple[float, float]] = field(
        default_factory=lambda: dict(DEFAULT_LENGTH_TABLE)
    )
    ext_factor: float = DEFAULT_EXT_FACTOR

    def __post_init__(self):
        if self.f0 <= 0:
            raise ValueError(f"f0 must be positive, got {self.f0}")
        if self.q_factor <= 0:
            raise ValueError(f"q_factor must be positive, got {self.q_factor}")
        if not 0.0 < self.ext_factor <= 1.0:
            raise ValueError(f"ext_factor must be in (0, 1], got {self.ext_factor}")
        for label in ModeLabel:
            if label not in self.length_table:
                raise ValueError(f"length_table missing entry for {label.value}")
            long_f, short_f = self.length_table[label]
            if not 0.0 < short_f <= long_f <= 1.0:
                raise ValueError(
                    f"length factors for {label.value} must satisfy "
                    f"0 < short <= long <= 1, got ({long_f}, {short_f})"
                )

    def factors(self, label: ModeLabel) -> tuple[float, float]:
        return self.length_table[label]

    @classmethod
    def from_json_dict(cls, data: dict) -> "ElementSpec":
        table = dict(DEFAULT_LENGTH_TABLE)
        for key, pair in data.get("length_table", {}).items():
            table[ModeLabel(key)] = (float(pair[0]), float(pair[1]))
        return cls(
            f0=float(data.get("f0_hz", DEFAULT_F0_HZ)),
            q_factor=float(data.get("q_factor", DEFAULT_Q_FACTOR)),
            length_table=table,
            ext_factor=float(data.get("ext_factor", DEFAULT_EXT_FACTOR)),
        )

    def to_json_dict(self) -> dict:
        return {
            "f0_hz": self.f0,
            "q_factor": self.q_factor,
            "length_table": {
                label.value: list(pair) for label, pair in self.length_table.items()
            },
            "ext_factor": self.ext_factor,
        }

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ElementSpec":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


@dataclass(frozen=True)
class JonesMatrix:
    """2x2 complex reflection matrix in the incidence frame.

    Basis vector 1 is the incident E-field direction, so r11 is the co-pol
    and r21 the cross-pol reflection coefficient.  The lossless model keeps
    this matrix unitary.
    """

    r11: complex
    r12: complex
    r21: complex
    r22: complex

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.r11, self.r12], [self.r21, self.r22]], dtype=complex)

    def unitarity_defect(self) -> float:
        "Max elementwise deviation of R R^H from the identity."
        r = self.as_matrix()
        return float(np.max(np.abs(r @ r.conj().T - np.eye(2))))


def _bisector_parallel_to_e(config: PinConfig) -> bool:
    """True when the two ON adjacent arms open toward the E-field axis.

    For an adjacent ON pair the V formed by the arms has its bisector either
    along the edge axis (pairs u+/v- and v+/u-) or perpendicular to it
    (pairs u+/v+ and u-/v-).  The parallel case projects the full bent
    current path onto E; the perpendicular case only half.  Kept as one
    predicate so the assignment can be flipped in a single place.
    """
    return (config.arm_u_pos and config.arm_v_neg) or (
        config.arm_v_pos and config.arm_u_neg
    )


def _classify_edge(config: PinConfig) -> tuple[ModeLabel, int | None]:
    u_on = config.arm_u_pos + config.arm_u_neg
    v_on = config.arm_v_pos + config.arm_v_neg
    n = u_on + v_on
    if n == 0:
        return ModeLabel.B1, None
    if n == 1:
        return ModeLabel.B4, +1 if u_on else -1
    if n == 2:
        if u_on == 2:
            return ModeLabel.B5, +1
        if v_on == 2:
            return ModeLabel.B5, -1
        if _bisector_parallel_to_e(config):
            return ModeLabel.B3, None
        return ModeLabel.B2, None
    if n == 3:
        # The single OFF arm determines which diagonal stays full length.
        return ModeLabel.B6, +1 if u_on == 2 else -1
    return ModeLabel.B3, None


def _classify_diagonal(config: PinConfig) -> tuple[ModeLabel, int | None]:
    u_on = config.arm_u_pos + config.arm_u_neg
    v_on = config.arm_v_pos + config.arm_v_neg
    if u_on + v_on == 2 and u_on == 1 and v_on == 1:
        # Adjacent pair: the bent current path converts polarization.  Pairs
        # sharing a quadrant bisector (u+/v+ and u-/v-) take sigma +1.
        same_side = (config.arm_u_pos and config.arm_v_pos) or (
            config.arm_u_neg and config.arm_v_neg
        )
        return ModeLabel.A4, +1 if same_side else -1
    # Arms perpendicular to E (the v strip here) do not resonate; only the
    # count of conducting arms along E matters.
    if u_on == 0:
        return ModeLabel.A1, None
    if u_on == 1:
        return ModeLabel.A2, None
    return ModeLabel.A3, None


def classify(
    config: PinConfig,
    incidence: Incidence,
    spec: ElementSpec | None = None,
) -> Mode:
    """Classify a diode state under the given incidence direction.

    Total over all 32 (config, incidence) pairs.  The returned Mode carries
    effective-length factors from `spec` (defaults when omitted).
    """
    if incidence is Incidence.EDGE:
        label, sigma = _classify_edge(config)
    else:
        label, sigma = _classify_diagonal(config)
    table = spec.length_table if spec is not None else DEFAULT_LENGTH_TABLE
    long_f, short_f = table[label]
    kind = ModeKind.CONVERTING if label in CONVERTING_LABELS else ModeKind.RESONANT
    return Mode(label=label, kind=kind, sigma=sigma, long_factor=long_f, short_factor=short_f)


def enumerate_modes(
    incidence: Incidence,
    spec: ElementSpec | None = None,
) -> list[tuple[PinConfig, Mode]]:
    "All 16 configs in canonical bitwise order with their classification."
    return [(cfg, classify(cfg, incidence, spec)) for cfg in all_pin_configs()]


def resonant_phase(f, f_r: float, q: float):
    """Reflection phase of an idealized resonator, radians.

    phi(f) = -2 atan(2 q (f - f_r) / f_r): zero at resonance, strictly
    decreasing in f, saturating toward -+2 atan(2q).  Accepts scalar or
    array f.
    """
    f_arr = np.asarray(f, dtype=float)
    if np.any(f_arr <= 0.0):
        raise ValueError("frequency must be positive")
    if f_r <= 0.0 or q <= 0.0:
        raise ValueError("resonant frequency and q must be positive")
    phase = -2.0 * np.arctan(2.0 * q * (f_arr - f_r) / f_r)
    if np.isscalar(f) or f_arr.ndim == 0:
        return float(phase)
    return phase


def jones_response(
    config: PinConfig,
    incidence: Incidence,
    f: float,
    spec: ElementSpec | None = None,
) -> JonesMatrix:
    """Frequency-dependent Jones reflection matrix of a diode state.

    The long and short effective lengths reflect with unit magnitude and
    phases from `resonant_phase` at f0/long_factor and f0/short_factor.
    Resonant modes respond on the incidence axes directly; converting modes
    respond on the +-45 deg axes, giving half-sum / half-difference entries.
    The result is unitary.
    """
    if spec is None:
        spec = ElementSpec()
    mode = classify(config, incidence, spec)
    gamma_long = np.exp(1j * resonant_phase(f, spec.f0 / mode.long_factor, spec.q_factor))
    gamma_short = np.exp(1j * resonant_phase(f, spec.f0 / mode.short_factor, spec.q_factor))
    if mode.kind is ModeKind.RESONANT:
        return JonesMatrix(r11=gamma_long, r12=0j, r21=0j, r22=gamma_short)
    half_sum = (gamma_long + gamma_short) / 2.0
    half_diff = mode.sigma * (gamma_long - gamma_short) / 2.0
    return JonesMatrix(r11=half_sum, r12=half_diff, r21=half_diff, r22=half_sum)


def pol_conversion_ratio(jones: JonesMatrix) -> float:
    """Cross-pol reflected power over total reflected power, in [0, 1].

    1 means the incident polarization is fully rotated on reflection.
    """
    cross = abs(jones.r21) ** 2
    co = abs(jones.r11) ** 2
    total = cross + co
    if total == 0.0:
        raise ValueError("conversion ratio undefined: both reflection entries are zero")
    return cross / total
