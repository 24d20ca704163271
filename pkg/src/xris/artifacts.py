"""Reading and writing the on-disk artifact formats.

A synthesis run produces four files in one directory:

  bitstream.txt   control export, header 'rows cols bits' + one char/element
  statemap.json   state indices, quantization errors, geometry, feed, stats
  phasemap.json   the continuous desired phases
  codebook.json   the codebook the indices refer to

All writes are atomic (write to a temp name, then rename) and byte-stable:
identical inputs produce identical files.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .codebook import Channel, Codebook, CodeState, Scheme
from .element import PinConfig
from .farfield import FieldGrid
from .synthesis import (
    ArrayGeometry,
    FeedKind,
    FeedSpec,
    PhaseMap,
    StateMap,
    format_bitstream,
    parse_bitstream,
)

BITSTREAM_FILE = "bitstream.txt"
STATEMAP_FILE = "statemap.json"
PHASEMAP_FILE = "phasemap.json"
CODEBOOK_FILE = "codebook.json"

# Pattern-cut CSVs floor the normalized magnitude here instead of -inf.
CUT_DB_FLOOR = -120.0


class ArtifactError(ValueError):
    "Malformed or mutually inconsistent artifact files."


# ---------------------------------------------------------------------------
# JSON converters


def _config_to_json(config):
    if config is None:
        return None
    if isinstance(config, PinConfig):
        return config.to_string()
    return [c.to_string() for c in config]


def _config_from_json(data):
    if data is None:
        return None
    if isinstance(data, str):
        return PinConfig.from_string(data)
    return tuple(PinConfig.from_string(c) for c in data)


def codebook_to_json_dict(book: Codebook) -> dict:
    states = []
    for s in book.states:
        entry = {
            "index": s.index,
            "label": s.label,
            "config": _config_to_json(s.config),
            "channel": s.channel.value,
            "coeff": [s.coeff.real, s.coeff.imag],
            "phase_rad": s.phase,
        }
        if s.coeff2 is not None:
            entry["coeff2"] = [s.coeff2.real, s.coeff2.imag]
            entry["phase2_rad"] = s.phase2
        states.append(entry)
    data = {
        "scheme": book.scheme.value,
        "freq_hz": book.freq,
        "bits": book.bits,
        "channel_mixed": book.channel_mixed,
        "states": states,
    }
    if book.freq2 is not None:
        data["freq2_hz"] = book.freq2
    return data


def codebook_from_json_dict(data: dict) -> Codebook:
    try:
        states = []
        for s in data["states"]:
            coeff = complex(s["coeff"][0], s["coeff"][1])
            coeff2 = None
            phase2 = None
            if "coeff2" in s:
                coeff2 = complex(s["coeff2"][0], s["coeff2"][1])
                phase2 = float(s["phase2_rad"])
            states.append(
                CodeState(
                    index=int(s["index"]),
                    label=str(s["label"]),
                    config=_config_from_json(s["config"]),
                    channel=Channel(s["channel"]),
                    coeff=coeff,
                    phase=float(s["phase_rad"]),
                    coeff2=coeff2,
                    phase2=phase2,
                )
            )
        return Codebook(
            scheme=Scheme(data["scheme"]),
            freq=float(data["freq_hz"]),
            states=tuple(states),
            bits=int(data["bits"]),
            freq2=float(data["freq2_hz"]) if "freq2_hz" in data else None,
            channel_mixed=bool(data.get("channel_mixed", False)),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ArtifactError(f"malformed codebook document: {exc}") from exc


def _geometry_to_json(geom: ArrayGeometry) -> dict:
    return {"rows": geom.rows, "cols": geom.cols, "spacing_m": geom.spacing}


def _geometry_from_json(data: dict) -> ArrayGeometry:
    return ArrayGeometry(
        rows=int(data["rows"]), cols=int(data["cols"]), spacing=float(data["spacing_m"])
    )


def feed_to_json_dict(feed: FeedSpec) -> dict:
    data = {"kind": feed.kind.value, "q_feed": feed.q_feed}
    if feed.position is not None:
        data["position_m"] = list(feed.position)
    return data


def feed_from_json_dict(data: dict) -> FeedSpec:
    kind = FeedKind(data["kind"])
    position = tuple(data["position_m"]) if "position_m" in data else None
    return FeedSpec(kind=kind, position=position, q_feed=float(data.get("q_feed", 0.0)))


def phasemap_to_json_dict(pmap: PhaseMap) -> dict:
    return {
        "rows": pmap.geometry.rows,
        "cols": pmap.geometry.cols,
        "geometry": _geometry_to_json(pmap.geometry),
        "phases_rad": [list(row) for row in pmap.phases],
    }


def phasemap_from_json_dict(data: dict) -> PhaseMap:
    try:
        geom = _geometry_from_json(data["geometry"])
        return PhaseMap(np.array(data["phases_rad"], dtype=float), geom)
    except (KeyError, ValueError, TypeError) as exc:
        raise ArtifactError(f"malformed phase map document: {exc}") from exc


def statemap_to_json_dict(
    smap: StateMap,
    freq: float,
    feed: FeedSpec,
    design: dict | None = None,
) -> dict:
    data = {
        "rows": smap.geometry.rows,
        "cols": smap.geometry.cols,
        "geometry": _geometry_to_json(smap.geometry),
        "freq_hz": freq,
        "feed": feed_to_json_dict(feed),
        "codebook_file": CODEBOOK_FILE,
        "indices": [[int(v) for v in row] for row in smap.indices],
        "errors_rad": [list(row) for row in smap.errors],
        "stats": {
            "max_abs_error_rad": smap.max_abs_error,
            "rms_error_rad": smap.rms_error,
        },
    }
    if design:
        data["design"] = design
    return data


# ---------------------------------------------------------------------------
# File IO


def atomic_write_text(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)  # mkstemp defaults to 0600
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class ArtifactBundle:
    "Everything a synthesis run wrote, reloaded."

    smap: StateMap
    book: Codebook
    pmap: PhaseMap
    freq: float
    feed: FeedSpec
    design: dict


def write_artifacts(
    directory: str | Path,
    smap: StateMap,
    pmap: PhaseMap,
    book: Codebook,
    freq: float | None = None,
    feed: FeedSpec | None = None,
    design: dict | None = None,
):
    """Write the four artifact files atomically into `directory`.

    freq defaults to the codebook design frequency; feed defaults to a
    plane wave.  Identical inputs produce byte-identical files.
    """
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        freq = book.freq if freq is None else freq
        feed = FeedSpec.plane_wave() if feed is None else feed
        atomic_write_text(directory / BITSTREAM_FILE, format_bitstream(smap))
        atomic_write_text(
            directory / STATEMAP_FILE,
            _dump_json(statemap_to_json_dict(smap, freq, feed, design)),
        )
        atomic_write_text(
            directory / PHASEMAP_FILE, _dump_json(phasemap_to_json_dict(pmap))
        )
        atomic_write_text(
            directory / CODEBOOK_FILE, _dump_json(codebook_to_json_dict(book))
        )
    except OSError as exc:
        raise OSError(f"cannot write artifacts under {directory}: {exc}") from exc


def _load_json(path: Path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path}: invalid JSON: {exc}") from exc


def load_bundle(directory: str | Path) -> ArtifactBundle:
    """Load and cross-validate an artifact directory.

    Checks that the bitstream header matches the state map dimensions, that
    the bitstream cells equal the stored indices, that every index is in
    range for the codebook, and that the stored error stats are consistent.
    """
    directory = Path(directory)
    book = codebook_from_json_dict(_load_json(directory / CODEBOOK_FILE))
    sm_data = _load_json(directory / STATEMAP_FILE)
    pmap = phasemap_from_json_dict(_load_json(directory / PHASEMAP_FILE))

    try:
        geom = _geometry_from_json(sm_data["geometry"])
        indices = np.array(sm_data["indices"], dtype=np.int64)
        errors = np.array(sm_data["errors_rad"], dtype=float)
        freq = float(sm_data["freq_hz"])
        feed = feed_from_json_dict(sm_data["feed"])
        design = dict(sm_data.get("design", {}))
        stats = sm_data["stats"]
    except (KeyError, ValueError, TypeError) as exc:
        raise ArtifactError(f"{directory / STATEMAP_FILE}: {exc}") from exc

    if indices.shape != (geom.rows, geom.cols):
        raise ArtifactError(
            f"{directory / STATEMAP_FILE}: indices shape {indices.shape} does "
            f"not match geometry {(geom.rows, geom.cols)}"
        )
    if indices.size and (indices.min() < 0 or indices.max() >= len(book.states)):
        raise ArtifactError(
            f"{directory / STATEMAP_FILE}: state index "
            f"{int(indices.max())} out of range for the "
            f"{len(book.states)}-state codebook"
        )
    try:
        smap = StateMap(indices=indices, book=book, errors=errors, geometry=geom)
    except ValueError as exc:
        raise ArtifactError(f"{directory / STATEMAP_FILE}: {exc}") from exc

    bs_path = directory / BITSTREAM_FILE
    try:
        with open(bs_path) as fh:
            parsed = parse_bitstream(fh.read())
    except OSError as exc:
        raise OSError(f"cannot read {bs_path}: {exc}") from exc
    except ValueError as exc:
        raise ArtifactError(f"{bs_path}: {exc}") from exc
    if (parsed.rows, parsed.cols) != (geom.rows, geom.cols):
        raise ArtifactError(
            f"{bs_path}: header {parsed.rows}x{parsed.cols} does not match "
            f"statemap {geom.rows}x{geom.cols}"
        )
    if parsed.bits != book.bits:
        raise ArtifactError(
            f"{bs_path}: header bits {parsed.bits} does not match "
            f"codebook bits {book.bits}"
        )
    if not np.array_equal(parsed.cells, smap.indices):
        raise ArtifactError(f"{bs_path}: cells disagree with statemap indices")

    if pmap.geometry != geom:
        raise ArtifactError(
            f"{directory / PHASEMAP_FILE}: geometry does not match statemap"
        )
    for key, value in (
        ("max_abs_error_rad", smap.max_abs_error),
        ("rms_error_rad", smap.rms_error),
    ):
        if abs(float(stats[key]) - value) > 1e-9:
            raise ArtifactError(
                f"{directory / STATEMAP_FILE}: stored stat {key} disagrees "
                "with the error grid"
            )

    return ArtifactBundle(
        smap=smap, book=book, pmap=pmap, freq=freq, feed=feed, design=design
    )


def read_artifacts(directory: str | Path) -> tuple[StateMap, Codebook]:
    "Load an artifact directory, returning the state map and codebook."
    bundle = load_bundle(directory)
    return bundle.smap, bundle.book


# ---------------------------------------------------------------------------
# Field grid exports


def field_cut_csv(grid: FieldGrid, cut_axis: str, cut_value_rad: float) -> str:
    """Render one principal cut of a field grid as CSV text.

    cut_axis 'phi' fixes phi (columns vary theta); 'theta' fixes theta.
    Magnitudes are in dB normalized to the grid's global peak, floored at
    -120 dB.  Angles are written in degrees.
    """
    peak = float(np.max(grid.magnitude()))
    if peak == 0.0:
        raise ValueError("cannot normalize a zero field grid")
    lines = ["theta_deg,phi_deg,re,im,mag_db"]

    def mag_db(value):
        m = abs(value) / peak
        return CUT_DB_FLOOR if m <= 10 ** (CUT_DB_FLOOR / 20.0) else 20.0 * np.log10(m)

    if cut_axis == "phi":
        dphi = np.abs(np.mod(grid.phi - cut_value_rad, 2 * np.pi))
        ip = int(np.argmin(np.minimum(dphi, 2 * np.pi - dphi)))
        for it, theta in enumerate(grid.theta):
            val = grid.values[it, ip]
            lines.append(
                f"{np.degrees(theta):.10g},{np.degrees(grid.phi[ip]):.10g},"
                f"{val.real:.12e},{val.imag:.12e},{mag_db(val):.6f}"
            )
    elif cut_axis == "theta":
        it = int(np.argmin(np.abs(grid.theta - cut_value_rad)))
        for ip, phi in enumerate(grid.phi):
            val = grid.values[it, ip]
            lines.append(
                f"{np.degrees(grid.theta[it]):.10g},{np.degrees(phi):.10g},"
                f"{val.real:.12e},{val.imag:.12e},{mag_db(val):.6f}"
            )
    else:
        raise ValueError(f"cut axis must be 'theta' or 'phi', got {cut_axis!r}")
    return "\n".join(lines) + "\n"


def fieldgrid_to_json_dict(grid: FieldGrid) -> dict:
    return {
        "theta_deg": [float(np.degrees(t)) for t in grid.theta],
        "phi_deg": [float(np.degrees(p)) for p in grid.phi],
        "re": [list(row) for row in grid.values.real],
        "im": [list(row) for row in grid.values.imag],
        "freq_hz": grid.freq,
        "q_e": grid.q_e,
        "geometry": _geometry_to_json(grid.geometry),
        "hemisphere": "upper",
    }
