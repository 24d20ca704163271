"""Selectable element states: codebook construction, calibration, quantization.

A codebook is an ordered set of diode states with their complex reflection
coefficients at one design frequency.  Converting schemes read the cross-pol
Jones entry, resonant schemes the co-pol entry.  Opposite-orientation
converting pairs are exactly pi apart at every frequency, so 1-bit books
never need calibration; multi-state books are calibrated by scanning for
the frequency with the most uniform phase spacing.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .element import (
    ElementSpec,
    Incidence,
    JonesMatrix,
    ModeLabel,
    PinConfig,
    all_pin_configs,
    classify,
    jones_response,
    pol_conversion_ratio,
    resonant_phase,
)
from .util import wrap_pi, wrap_two_pi

# Reflection magnitude below which a state is unusable during calibration
# (~ -10.5 dB); polarization cancellation in three-arm states costs
# amplitude, and this floor keeps calibrated books workable.
MIN_USABLE_MAGNITUDE = 0.3

# Codebook states must be separated by more than this at the build frequency.
MIN_PHASE_SPACING_RAD = np.deg2rad(1.0)


class Scheme(Enum):
    ONE_BIT_B5 = "1bit-b5"
    TWO_BIT_B5B6 = "2bit-b5b6"
    TWO_BIT_MIXED = "2bit-mixed"
    CO_POL_2BIT = "copol-2bit"
    DUAL_BAND_1BIT = "dualband-1bit"
    BIT_RECONFIGURABLE = "bitrecfg-b5b6"


class Channel(Enum):
    CO_POL = "copol"
    CROSS_POL = "crosspol"


# Schemes built on edge-aligned polarization conversion vs. the diagonal
# resonant scheme.
_EDGE_SCHEMES = frozenset(
    {
        Scheme.ONE_BIT_B5,
        Scheme.TWO_BIT_B5B6,
        Scheme.TWO_BIT_MIXED,
        Scheme.DUAL_BAND_1BIT,
        Scheme.BIT_RECONFIGURABLE,
    }
)

_MULTI_BIT_SCHEMES = frozenset(
    {Scheme.TWO_BIT_B5B6, Scheme.TWO_BIT_MIXED, Scheme.CO_POL_2BIT, Scheme.BIT_RECONFIGURABLE}
)


class CodebookConfigError(ValueError):
    "Scheme/incidence mismatch or missing scheme inputs."


class CalibrationError(RuntimeError):
    "No usable frequency, or state phases collide at the build frequency."


@dataclass(frozen=True)
class CodeState:
    """One selectable element state.

    config is a single PinConfig, a (band1, band2) pair for dual-band
    schemes, or None for the extra-switch co-pol state whose diode layout
    is outside the four-arm model.  coeff/phase are taken at the book's
    design frequency; dual-band states carry the second band's values in
    coeff2/phase2.
    """

    index: int
    label: str
    config: PinConfig | tuple[PinConfig, PinConfig] | None
    channel: Channel
    coeff: complex
    phase: float
    coeff2: complex | None = None
    phase2: float | None = None

    def __post_init__(self):
        expected = wrap_two_pi(np.angle(self.coeff))
        if abs(wrap_pi(self.phase - expected)) > 1e-12:
            raise ValueError("state phase must equal arg(coeff) mod 2*pi")


@dataclass(frozen=True)
class Codebook:
    scheme: Scheme
    freq: float
    states: tuple[CodeState, ...]
    bits: int
    freq2: float | None = None
    channel_mixed: bool = False

    def __post_init__(self):
        if len(self.states) == 0:
            raise ValueError("codebook must contain at least one state")

    def phases(self) -> np.ndarray:
        "State phases in [0, 2*pi), ordered by state index."
        return np.array([s.phase for s in self.states], dtype=float)

    def coeffs(self) -> np.ndarray:
        return np.array([s.coeff for s in self.states], dtype=complex)

    def onebit_subbook(self) -> "Codebook":
        """1-bit restriction of a bit-reconfigurable book to its B5 pair.

        The returned book shares the B5 CodeState objects, so switching the
        array between wideband 1-bit and narrowband 2-bit operation reuses
        the same two states.
        """
        if self.scheme not in (Scheme.BIT_RECONFIGURABLE, Scheme.TWO_BIT_B5B6):
            raise CodebookConfigError(
                f"onebit_subbook applies to B5/B6 books, not {self.scheme.value}"
            )
        b5 = tuple(s for s in self.states if s.label.startswith("B5"))
        return Codebook(scheme=Scheme.ONE_BIT_B5, freq=self.freq, states=b5, bits=1)


def _representative(
    label: ModeLabel, sigma: int | None, incidence: Incidence
) -> PinConfig:
    "Lowest canonical-index config classifying to (label, sigma)."
    for cfg in all_pin_configs():
        mode = classify(cfg, incidence)
        if mode.label is label and mode.sigma == sigma:
            return cfg
    raise ValueError(f"no config classifies to {label.value} sigma={sigma}")


def _jones(cfg: PinConfig, incidence: Incidence, f: float, spec: ElementSpec) -> JonesMatrix:
    return jones_response(cfg, incidence, f, spec)


def _state(index, label, cfg, channel, coeff, **extra) -> CodeState:
    return CodeState(
        index=index,
        label=label,
        config=cfg,
        channel=channel,
        coeff=complex(coeff),
        phase=float(wrap_two_pi(np.angle(coeff))),
        **extra,
    )


def _converting_states(
    labels: list[tuple[ModeLabel, int]], f: float, spec: ElementSpec, base_index: int = 0
) -> list[CodeState]:
    states = []
    for i, (label, sigma) in enumerate(labels):
        cfg = _representative(label, sigma, Incidence.EDGE)
        coeff = _jones(cfg, Incidence.EDGE, f, spec).r21
        name = f"{label.value}{'+' if sigma > 0 else '-'}"
        states.append(_state(base_index + i, name, cfg, Channel.CROSS_POL, coeff))
    return states


def _check_spacing(phases: np.ndarray, scheme: Scheme, f: float):
    n = len(phases)
    for i in range(n):
        for j in range(i + 1, n):
            gap = abs(wrap_pi(phases[i] - phases[j]))
            if gap <= MIN_PHASE_SPACING_RAD:
                raise CalibrationError(
                    f"{scheme.value} state phases collide at {f:.6g} Hz "
                    f"(gap {np.degrees(gap):.3f} deg <= 1 deg); "
                    "run calibrate_frequency to pick a working frequency"
                )


def build_codebook(
    scheme: Scheme,
    spec: ElementSpec,
    f: float,
    incidence: Incidence,
    f2: float | None = None,
) -> Codebook:
    """Assemble the selectable states of a scheme at a design frequency.

    Converting schemes require edge-aligned incidence, the co-pol resonant
    scheme diagonal-aligned.  Dual-band books additionally need the second
    band frequency f2.  Raises CodebookConfigError on mismatched inputs and
    CalibrationError when state phases collide at f.
    """
    if f <= 0:
        raise ValueError("design frequency must be positive")
    required = Incidence.EDGE if scheme in _EDGE_SCHEMES else Incidence.DIAGONAL
    if incidence is not required:
        raise CodebookConfigError(
            f"scheme {scheme.value} requires {required.value} incidence, "
            f"got {incidence.value}"
        )

    if scheme is Scheme.ONE_BIT_B5:
        states = _converting_states([(ModeLabel.B5, +1), (ModeLabel.B5, -1)], f, spec)
        book = Codebook(scheme, f, tuple(states), bits=1)

    elif scheme in (Scheme.TWO_BIT_B5B6, Scheme.BIT_RECONFIGURABLE):
        states = _converting_states(
            [(ModeLabel.B5, +1), (ModeLabel.B5, -1), (ModeLabel.B6, +1), (ModeLabel.B6, -1)],
            f,
            spec,
        )
        book = Codebook(scheme, f, tuple(states), bits=2)

    elif scheme is Scheme.TWO_BIT_MIXED:
        states = []
        for i, label in enumerate([ModeLabel.B1, ModeLabel.B3]):
            cfg = _representative(label, None, Incidence.EDGE)
            coeff = _jones(cfg, Incidence.EDGE, f, spec).r11
            states.append(_state(i, label.value, cfg, Channel.CO_POL, coeff))
        states += _converting_states(
            [(ModeLabel.B6, +1), (ModeLabel.B6, -1)], f, spec, base_index=2
        )
        book = Codebook(scheme, f, tuple(states), bits=2, channel_mixed=True)

    elif scheme is Scheme.CO_POL_2BIT:
        states = []
        for i, label in enumerate([ModeLabel.A1, ModeLabel.A2, ModeLabel.A3]):
            cfg = _representative(label, None, Incidence.DIAGONAL)
            coeff = _jones(cfg, Incidence.DIAGONAL, f, spec).r11
            states.append(_state(i, label.value, cfg, Channel.CO_POL, coeff))
        # Fourth resonant length enabled by an extra switch; its diode layout
        # is outside the four-arm model, so it carries no PinConfig.
        ext_coeff = np.exp(
            1j * resonant_phase(f, spec.f0 / spec.ext_factor, spec.q_factor)
        )
        states.append(_state(3, "EXT", None, Channel.CO_POL, ext_coeff))
        book = Codebook(scheme, f, tuple(states), bits=2)

    elif scheme is Scheme.DUAL_BAND_1BIT:
        if f2 is None or f2 <= 0:
            raise CodebookConfigError(
                "scheme dualband-1bit requires a positive second band frequency f2"
            )
        states = []
        for i, sigma in enumerate([+1, -1]):
            cfg1 = _representative(ModeLabel.B5, sigma, Incidence.EDGE)
            cfg2 = _representative(ModeLabel.B4, sigma, Incidence.EDGE)
            coeff1 = _jones(cfg1, Incidence.EDGE, f, spec).r21
            coeff2 = _jones(cfg2, Incidence.EDGE, f2, spec).r21
            name = f"DB{'+' if sigma > 0 else '-'}"
            states.append(
                _state(
                    i,
                    name,
                    (cfg1, cfg2),
                    Channel.CROSS_POL,
                    coeff1,
                    coeff2=complex(coeff2),
                    phase2=float(wrap_two_pi(np.angle(coeff2))),
                )
            )
        book = Codebook(scheme, f, tuple(states), bits=1, freq2=f2)

    else:  # pragma: no cover - enum is exhaustive
        raise CodebookConfigError(f"unknown scheme {scheme}")

    _check_spacing(book.phases(), scheme, f)
    if scheme is Scheme.DUAL_BAND_1BIT:
        _check_spacing(
            np.array([s.phase2 for s in book.states]), scheme, f2
        )
    return book


def _spacing_deviation(phases: np.ndarray) -> float:
    """Max deviation of sorted phases from uniform spacing, radians.

    The ideal comb is anchored at the first sorted phase: absolute phase is
    irrelevant to array synthesis, only the relative spacing matters.
    """
    srt = np.sort(wrap_two_pi(phases))
    step = 2.0 * np.pi / len(srt)
    ideal = srt[0] + step * np.arange(len(srt))
    return float(np.max(np.abs(wrap_pi(srt - ideal))))


def _multibit_objective(scheme: Scheme, spec: ElementSpec, f: float) -> float:
    "Spacing deviation at f, infinite when any state drops below the floor."
    incidence = Incidence.EDGE if scheme in _EDGE_SCHEMES else Incidence.DIAGONAL
    try:
        book = build_codebook(scheme, spec, f, incidence)
    except CalibrationError:
        # Colliding phases are simply a bad scan point.
        return np.inf
    if np.min(np.abs(book.coeffs())) < MIN_USABLE_MAGNITUDE:
        return np.inf
    return _spacing_deviation(book.phases())


def calibrate_frequency(
    scheme: Scheme,
    spec: ElementSpec,
    f_lo: float,
    f_hi: float,
    n_samples: int,
) -> float:
    """Pick the best design frequency on a uniform scan of [f_lo, f_hi].

    Multi-state schemes minimize the maximum deviation from uniform phase
    spacing, with any state magnitude under 0.3 disqualifying the sample.
    1-bit schemes maximize the polarization conversion ratio of the
    sigma-positive two-arm state.  Ties resolve to the lowest frequency.
    """
    if not 0 < f_lo < f_hi:
        raise ValueError("need 0 < f_lo < f_hi")
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    freqs = np.linspace(f_lo, f_hi, int(n_samples))

    if scheme in _MULTI_BIT_SCHEMES:
        objective = np.array(
            [_multibit_objective(scheme, spec, float(f)) for f in freqs]
        )
        if not np.any(np.isfinite(objective)):
            raise CalibrationError(
                f"no frequency in [{f_lo:.6g}, {f_hi:.6g}] Hz keeps all "
                f"{scheme.value} state magnitudes at or above {MIN_USABLE_MAGNITUDE}"
            )
        return float(freqs[int(np.argmin(objective))])

    # 1-bit schemes: strongest polarization conversion of the B5+ state.
    cfg = _representative(ModeLabel.B5, +1, Incidence.EDGE)
    pcr = np.array(
        [
            pol_conversion_ratio(jones_response(cfg, Incidence.EDGE, float(f), spec))
            for f in freqs
        ]
    )
    return float(freqs[int(np.argmax(pcr))])


def quantize_phase(desired: float, book: Codebook) -> tuple[int, float]:
    """Nearest codebook state to a desired phase.

    Returns (state index, signed error in [-pi, pi]) where error is the
    wrapped distance from the chosen state's phase to the desired phase.
    Ties resolve to the lowest state index.  The error never exceeds half
    the largest gap between adjacent sorted state phases.
    """
    diffs = wrap_pi(desired - book.phases())
    idx = int(np.argmin(np.abs(diffs)))
    return idx, float(diffs[idx])


def conversion_bandwidth(
    spec: ElementSpec,
    pcr_threshold: float,
    f_lo: float,
    f_hi: float,
    n_samples: int,
) -> tuple[float, float] | None:
    """Widest contiguous sampled band where the B5 state converts strongly.

    Scans n_samples uniformly spaced frequencies and returns the
    (band_lo, band_hi) endpoints of the longest run with polarization
    conversion ratio >= pcr_threshold, or None when no sample qualifies.
    The opposite-orientation state pair stays exactly pi apart everywhere,
    so the 1-bit property holds across the whole band by construction.
    """
    if not 0.0 < pcr_threshold < 1.0:
        raise ValueError("pcr_threshold must be in (0, 1)")
    if not 0 < f_lo < f_hi:
        raise ValueError("need 0 < f_lo < f_hi")
    if n_samples < 2:
        raise ValueError("need at least 2 samples")
    freqs = np.linspace(f_lo, f_hi, int(n_samples))
    cfg = _representative(ModeLabel.B5, +1, Incidence.EDGE)
    pcr = np.array(
        [
            pol_conversion_ratio(jones_response(cfg, Incidence.EDGE, float(f), spec))
            for f in freqs
        ]
    )
    mask = pcr >= pcr_threshold
    best_len, best_start, best_end = 0, -1, -1
    run_start = None
    for i, ok in enumerate(mask):
        if ok:
            if run_start is None:
                run_start = i
            length = i - run_start + 1
            if length > best_len:
                best_len, best_start, best_end = length, run_start, i
        else:
            run_start = None
    if best_len == 0:
        return None
    return float(freqs[best_start]), float(freqs[best_end])
