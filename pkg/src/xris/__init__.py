"""X-shaped reconfigurable intelligent surface design toolkit.

Classifies the four-diode element's states into their ten behavior classes,
models each class's complex reflection, builds phase codebooks, synthesizes
and quantizes array phase maps, and evaluates far-field patterns and
metrics.
"""

from .codebook import (
    CalibrationError,
    Channel,
    Codebook,
    CodebookConfigError,
    CodeState,
    Scheme,
    build_codebook,
    calibrate_frequency,
    conversion_bandwidth,
    quantize_phase,
)
from .element import (
    ElementSpec,
    Incidence,
    JonesMatrix,
    Mode,
    ModeKind,
    ModeLabel,
    PinConfig,
    all_pin_configs,
    classify,
    enumerate_modes,
    jones_response,
    pol_conversion_ratio,
    resonant_phase,
)
from .farfield import (
    FieldGrid,
    boresight_reduction,
    directivity,
    excitation_from_phases,
    excitation_from_statemap,
    field_at,
    oam_spectrum,
    peak_direction,
    quantization_loss,
    radiated_field,
)
from .synthesis import (
    ArrayGeometry,
    FeedKind,
    FeedSpec,
    PhaseMap,
    StateMap,
    coding_pattern,
    focus_phase,
    format_bitstream,
    oam_phase,
    parse_bitstream,
    quantize_map,
    required_phase_beam,
)

__version__ = "0.1.0"

__all__ = [
    "ArrayGeometry",
    "CalibrationError",
    "Channel",
    "Codebook",
    "CodebookConfigError",
    "CodeState",
    "ElementSpec",
    "FeedKind",
    "FeedSpec",
    "FieldGrid",
    "Incidence",
    "JonesMatrix",
    "Mode",
    "ModeKind",
    "ModeLabel",
    "PhaseMap",
    "PinConfig",
    "Scheme",
    "StateMap",
    "all_pin_configs",
    "boresight_reduction",
    "build_codebook",
    "calibrate_frequency",
    "classify",
    "coding_pattern",
    "conversion_bandwidth",
    "directivity",
    "enumerate_modes",
    "excitation_from_phases",
    "excitation_from_statemap",
    "field_at",
    "focus_phase",
    "format_bitstream",
    "jones_response",
    "oam_phase",
    "oam_spectrum",
    "parse_bitstream",
    "peak_direction",
    "pol_conversion_ratio",
    "quantization_loss",
    "quantize_map",
    "quantize_phase",
    "radiated_field",
    "required_phase_beam",
    "resonant_phase",
]
