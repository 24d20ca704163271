"""Command-line front end.

Pure orchestration: every number printed comes from the library calls with
the parsed flags.  Angles on the command line and in files are degrees; the
API works in radians.  Exit codes: 0 success, 1 computation or validation
failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections import Counter
from pathlib import Path

import numpy as np

from . import artifacts, plotting
from .codebook import (
    _EDGE_SCHEMES,
    CalibrationError,
    CodebookConfigError,
    Scheme,
    build_codebook,
    calibrate_frequency,
)
from .element import (
    ElementSpec,
    Incidence,
    PinConfig,
    enumerate_modes,
    jones_response,
    pol_conversion_ratio,
)
from .farfield import (
    DEFAULT_PHI_POINTS,
    DEFAULT_THETA_POINTS,
    boresight_reduction,
    default_phi_samples,
    default_theta_samples,
    directivity,
    excitation_from_phases,
    excitation_from_statemap,
    oam_spectrum,
    peak_direction,
    quantization_loss,
    radiated_field,
)
from .synthesis import (
    ArrayGeometry,
    FeedSpec,
    PhaseMap,
    coding_pattern,
    focus_phase,
    oam_phase,
    quantize_map,
    required_phase_beam,
)
from .util import SPEED_OF_LIGHT


def _print_json(data):
    print(json.dumps(data, indent=2, sort_keys=True))


def _load_spec(path: str | None) -> ElementSpec:
    if path is None:
        return ElementSpec()
    try:
        return ElementSpec.from_json_file(path)
    except OSError as exc:
        raise OSError(f"--spec: cannot read {path}: {exc}") from exc
    except (ValueError, KeyError) as exc:
        raise ValueError(f"--spec: invalid element spec {path}: {exc}") from exc


def _scheme_incidence(scheme: Scheme) -> Incidence:
    return Incidence.EDGE if scheme in _EDGE_SCHEMES else Incidence.DIAGONAL


def _parse_pair(text: str, flag: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"{flag}: expected 'A,B', got {text!r}")
    return float(parts[0]), float(parts[1])


def _parse_triple(text: str, flag: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"{flag}: expected 'X,Y,Z', got {text!r}")
    return float(parts[0]), float(parts[1]), float(parts[2])


def _parse_cut(text: str) -> tuple[str, float]:
    "Parse 'phi=0' or 'theta=30' (degrees) into (axis, radians)."
    if "=" not in text:
        raise ValueError(f"--cut: expected 'phi=DEG' or 'theta=DEG', got {text!r}")
    axis, _, value = text.partition("=")
    axis = axis.strip()
    if axis not in ("phi", "theta"):
        raise ValueError(f"--cut: axis must be phi or theta, got {axis!r}")
    return axis, float(np.deg2rad(float(value)))


def _parse_coding(text: str) -> tuple[str, int]:
    kind, _, arg = text.partition(":")
    if kind == "checkerboard":
        return kind, int(arg) if arg else 1
    if kind == "random":
        if not arg:
            raise ValueError("--coding random requires an explicit seed, e.g. random:42")
        return kind, int(arg)
    raise ValueError(f"--coding: expected checkerboard:BLOCK or random:SEED, got {text!r}")


def _feed_from_args(args) -> FeedSpec:
    if args.feed is None:
        if args.q_feed not in (None, 0.0):
            raise ValueError("--q-feed requires a spherical --feed position")
        return FeedSpec.plane_wave()
    x, y, z = _parse_triple(args.feed, "--feed")
    return FeedSpec.spherical(x, y, z, q_feed=args.q_feed or 0.0)


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_modes(args) -> int:
    incidence = Incidence(args.incidence)
    table = enumerate_modes(incidence)
    counts = Counter(mode.label.value for _, mode in table)
    if args.json:
        _print_json(
            {
                "incidence": incidence.value,
                "modes": [
                    {
                        "config": cfg.to_string(),
                        "label": mode.label.value,
                        "kind": mode.kind.value,
                        "sigma": mode.sigma,
                        "long_factor": mode.long_factor,
                        "short_factor": mode.short_factor,
                    }
                    for cfg, mode in table
                ],
                "counts": dict(sorted(counts.items())),
            }
        )
        return 0
    print(f"{'config':<8}{'mode':<6}{'sigma':<7}{'long':<7}short")
    for cfg, mode in table:
        sigma = f"{mode.sigma:+d}" if mode.sigma is not None else "."
        print(
            f"{cfg.to_string():<8}{mode.label.value:<6}{sigma:<7}"
            f"{mode.long_factor:<7g}{mode.short_factor:g}"
        )
    summary = " ".join(f"{k}:{v}" for k, v in sorted(counts.items()))
    print(f"counts: {summary}")
    return 0


def _element_sweep(cfg, incidence, spec, freqs):
    rows = []
    for f in freqs:
        j = jones_response(cfg, incidence, float(f), spec)
        rows.append(
            {
                "freq_hz": float(f),
                "r11": j.r11,
                "r12": j.r12,
                "r21": j.r21,
                "r22": j.r22,
                "pcr": pol_conversion_ratio(j),
            }
        )
    return rows


_SWEEP_HEADER = (
    "freq_hz,r11_re,r11_im,r12_re,r12_im,r21_re,r21_im,r22_re,r22_im,pcr"
)


def _sweep_csv(rows) -> str:
    lines = [_SWEEP_HEADER]
    for r in rows:
        entries = [f"{r['freq_hz']:.10g}"]
        for key in ("r11", "r12", "r21", "r22"):
            entries.append(f"{r[key].real:.12e}")
            entries.append(f"{r[key].imag:.12e}")
        entries.append(f"{r['pcr']:.12e}")
        lines.append(",".join(entries))
    return "\n".join(lines) + "\n"


def _cmd_element(args) -> int:
    spec = _load_spec(args.spec)
    cfg = PinConfig.from_string(args.config)
    incidence = Incidence(args.incidence)
    if not 0 < args.f_start < args.f_stop:
        raise ValueError("--f-start/--f-stop: need 0 < start < stop")
    if args.points < 2:
        raise ValueError("--points: need at least 2")
    freqs = np.linspace(args.f_start, args.f_stop, args.points)
    rows = _element_sweep(cfg, incidence, spec, freqs)
    csv_text = _sweep_csv(rows)
    if args.out:
        artifacts.atomic_write_text(Path(args.out), csv_text)
    if args.json:
        _print_json(
            {
                "config": cfg.to_string(),
                "incidence": incidence.value,
                "sweep": [
                    {
                        "freq_hz": r["freq_hz"],
                        "r11": [r["r11"].real, r["r11"].imag],
                        "r12": [r["r12"].real, r["r12"].imag],
                        "r21": [r["r21"].real, r["r21"].imag],
                        "r22": [r["r22"].real, r["r22"].imag],
                        "pcr": r["pcr"],
                    }
                    for r in rows
                ],
                "out": args.out,
            }
        )
    elif args.out:
        print(f"wrote {args.out} ({len(rows)} rows)")
    else:
        sys.stdout.write(csv_text)
    return 0


def _cmd_calibrate(args) -> int:
    spec = _load_spec(args.spec)
    scheme = Scheme(args.scheme)
    f_star = calibrate_frequency(scheme, spec, args.f_start, args.f_stop, args.points)
    incidence = _scheme_incidence(scheme)
    f2 = f_star if scheme is Scheme.DUAL_BAND_1BIT else None
    book = build_codebook(scheme, spec, f_star, incidence, f2=f2)
    phases = np.degrees(np.sort(book.phases()))
    mags = np.abs(book.coeffs())
    if scheme is Scheme.ONE_BIT_B5 or scheme is Scheme.DUAL_BAND_1BIT:
        objective = {"kind": "pcr", "value": float(mags[0] ** 2)}
    else:
        srt = np.sort(book.phases())
        step = 2 * np.pi / len(srt)
        ideal = srt[0] + step * np.arange(len(srt))
        dev = float(np.degrees(np.max(np.abs(np.mod(srt - ideal + np.pi, 2 * np.pi) - np.pi))))
        objective = {"kind": "spacing_deviation_deg", "value": dev}
    if args.json:
        _print_json(
            {
                "scheme": scheme.value,
                "f_star_hz": f_star,
                "objective": objective,
                "state_phases_deg": [float(p) for p in phases],
                "state_magnitudes": [float(m) for m in mags],
            }
        )
    else:
        print(f"scheme:  {scheme.value}")
        print(f"f*:      {f_star:.6g} Hz")
        print(f"{objective['kind']}: {objective['value']:.6g}")
        print("phases (deg): " + " ".join(f"{p:.2f}" for p in phases))
        print("magnitudes:   " + " ".join(f"{m:.4f}" for m in mags))
    return 0


def _cmd_synth(args) -> int:
    spec = _load_spec(args.spec)
    scheme = Scheme(args.scheme)
    incidence = _scheme_incidence(scheme)
    if args.freq_hz <= 0:
        raise ValueError("--freq-hz must be positive")
    if args.spacing_m is not None:
        spacing = args.spacing_m
    else:
        ratio = 0.5 if args.spacing_lambda is None else args.spacing_lambda
        spacing = ratio * SPEED_OF_LIGHT / args.freq_hz
    geom = ArrayGeometry(args.rows, args.cols, spacing)
    feed = _feed_from_args(args)
    book = build_codebook(scheme, spec, args.freq_hz, incidence, f2=args.freq2_hz)

    design: dict = {"scheme": scheme.value}
    if args.focus is not None:
        focal = _parse_triple(args.focus, "--focus")
        desired = focus_phase(geom, feed, args.freq_hz, focal)
        design["focus_m"] = list(focal)
    else:
        theta0_deg, phi0_deg = (
            _parse_pair(args.beam, "--beam") if args.beam is not None else (0.0, 0.0)
        )
        desired = required_phase_beam(
            geom, feed, args.freq_hz, np.deg2rad(theta0_deg), np.deg2rad(phi0_deg)
        )
        design["beam_theta_deg"] = theta0_deg
        design["beam_phi_deg"] = phi0_deg
    if args.oam is not None:
        desired = desired + oam_phase(geom, args.oam)
        design["oam_ell"] = args.oam
    if args.coding is not None:
        kind, value = _parse_coding(args.coding)
        if kind == "checkerboard":
            desired = desired + coding_pattern(kind, geom, block=value)
        else:
            desired = desired + coding_pattern(kind, geom, seed=value)
        design["coding"] = args.coding

    smap = quantize_map(desired, book)
    artifacts.write_artifacts(
        args.out, smap, desired, book, freq=args.freq_hz, feed=feed, design=design
    )
    files = [
        artifacts.BITSTREAM_FILE,
        artifacts.STATEMAP_FILE,
        artifacts.PHASEMAP_FILE,
        artifacts.CODEBOOK_FILE,
    ]
    if args.json:
        _print_json(
            {
                "out_dir": str(args.out),
                "files": files,
                "scheme": scheme.value,
                "freq_hz": args.freq_hz,
                "spacing_m": spacing,
                "design": design,
                "stats": {
                    "max_abs_error_rad": smap.max_abs_error,
                    "rms_error_rad": smap.rms_error,
                },
            }
        )
    else:
        print(f"wrote {', '.join(files)} to {args.out}")
        print(
            f"quantization error: max {np.degrees(smap.max_abs_error):.2f} deg, "
            f"rms {np.degrees(smap.rms_error):.2f} deg"
        )
    return 0


def _compute_grid(bundle, args):
    exc = excitation_from_statemap(bundle.smap, bundle.feed, bundle.freq, band=args.band)
    return radiated_field(
        bundle.smap.geometry,
        exc,
        bundle.freq,
        default_theta_samples(args.theta_points),
        default_phi_samples(args.phi_points),
        q_e=args.q_e,
    )


def _cmd_pattern(args) -> int:
    bundle = artifacts.load_bundle(args.in_dir)
    grid = _compute_grid(bundle, args)
    axis, value = _parse_cut(args.cut)
    csv_text = artifacts.field_cut_csv(grid, axis, value)
    artifacts.atomic_write_text(Path(args.out), csv_text)
    if args.grid_out:
        artifacts.atomic_write_text(
            Path(args.grid_out),
            json.dumps(artifacts.fieldgrid_to_json_dict(grid), indent=2, sort_keys=True)
            + "\n",
        )
    theta_pk, phi_pk = peak_direction(grid)
    if args.json:
        _print_json(
            {
                "out": str(args.out),
                "grid_out": str(args.grid_out) if args.grid_out else None,
                "cut": args.cut,
                "peak_theta_deg": float(np.degrees(theta_pk)),
                "peak_phi_deg": float(np.degrees(phi_pk)),
            }
        )
    else:
        print(f"wrote {args.out}")
        print(
            f"peak: theta {np.degrees(theta_pk):.2f} deg, "
            f"phi {np.degrees(phi_pk):.2f} deg"
        )
    return 0


def _cmd_metrics(args) -> int:
    bundle = artifacts.load_bundle(args.in_dir)
    geom = bundle.smap.geometry
    grid = _compute_grid(bundle, args)
    theta_pk, phi_pk = peak_direction(grid)
    d_db = directivity(grid, theta_pk, phi_pk)

    design = bundle.design
    if "beam_theta_deg" in design and not design.get("oam_ell"):
        direction = (
            float(np.deg2rad(design["beam_theta_deg"])),
            float(np.deg2rad(design["beam_phi_deg"])),
        )
    else:
        # vortex or focus designs have no single stored target (a vortex is
        # null on axis); evaluate the loss at the continuous-pattern peak
        exc_c = excitation_from_phases(bundle.pmap, bundle.feed, bundle.freq)
        grid_c = radiated_field(
            geom,
            exc_c,
            bundle.freq,
            default_theta_samples(args.theta_points),
            default_phi_samples(args.phi_points),
            q_e=args.q_e,
        )
        direction = peak_direction(grid_c)
    loss_db = quantization_loss(
        geom, bundle.feed, bundle.freq, bundle.pmap, bundle.smap, direction
    )

    result = {
        "peak_theta_deg": float(np.degrees(theta_pk)),
        "peak_phi_deg": float(np.degrees(phi_pk)),
        "directivity_db": d_db,
        "quantization_loss_db": loss_db,
        "loss_direction_deg": [
            float(np.degrees(direction[0])),
            float(np.degrees(direction[1])),
        ],
    }

    if args.oam_ring is not None:
        ring_target = float(np.deg2rad(args.oam_ring))
        it = int(np.argmin(np.abs(grid.theta - ring_target)))
        ells, purity = oam_spectrum(grid, float(grid.theta[it]), args.oam_lmax)
        result["oam"] = {
            "ring_theta_deg": float(np.degrees(grid.theta[it])),
            "ells": [int(e) for e in ells],
            "purity": [float(p) for p in purity],
        }

    if args.rcs:
        quant = PhaseMap(bundle.smap.state_phases(), geom)
        coded = np.exp(1j * quant.phases)
        reference = np.ones(geom.shape, dtype=complex)
        result["rcs_boresight_reduction_db"] = boresight_reduction(
            geom, coded, reference, bundle.freq
        )

    if args.json:
        _print_json(result)
    else:
        print(f"peak:              ({result['peak_theta_deg']:.2f}, "
              f"{result['peak_phi_deg']:.2f}) deg")
        print(f"directivity:       {result['directivity_db']:.2f} dB")
        print(f"quantization loss: {result['quantization_loss_db']:.2f} dB "
              f"at ({result['loss_direction_deg'][0]:.1f}, "
              f"{result['loss_direction_deg'][1]:.1f}) deg")
        if "oam" in result:
            pairs = ", ".join(
                f"{e}:{p:.4f}"
                for e, p in zip(result["oam"]["ells"], result["oam"]["purity"])
            )
            print(f"oam purity @ {result['oam']['ring_theta_deg']:.2f} deg: {pairs}")
        if "rcs_boresight_reduction_db" in result:
            print(f"rcs reduction:     {result['rcs_boresight_reduction_db']:.2f} dB")
    return 0


def _cmd_report(args) -> int:
    bundle = artifacts.load_bundle(args.in_dir)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = _compute_grid(bundle, args)
    axis, value = _parse_cut(args.cut)

    written = []

    def emit(name):
        written.append(name)
        return out_dir / name

    artifacts.atomic_write_text(
        emit("cut.csv"), artifacts.field_cut_csv(grid, axis, value)
    )
    plotting.save_pattern_cut(emit("pattern_cut.png"), grid, axis, value)
    plotting.save_pattern_map(emit("pattern_map.png"), grid)
    plotting.save_phase_map(emit("phasemap.png"), bundle.pmap)
    quant = PhaseMap(bundle.smap.state_phases(), bundle.smap.geometry)
    plotting.save_phase_map(emit("quantized_phase.png"), quant, title="quantized phase")
    plotting.save_state_map(emit("statemap.png"), bundle.smap)
    plotting.save_codebook_constellation(emit("codebook.png"), bundle.book)

    if args.json:
        _print_json({"out_dir": str(out_dir), "files": written})
    else:
        print(f"wrote {', '.join(written)} to {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# Parser


def _add_grid_flags(p: argparse.ArgumentParser):
    p.add_argument("--theta-points", type=int, default=DEFAULT_THETA_POINTS)
    p.add_argument("--phi-points", type=int, default=DEFAULT_PHI_POINTS)
    p.add_argument("--q-e", type=float, default=1.0,
                   help="element factor exponent cos^q_e(theta)")
    p.add_argument("--band", type=int, default=1, choices=(1, 2),
                   help="band selector for dual-band codebooks")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xris",
        description="X-shaped RIS element taxonomy, codebooks, phase synthesis, "
                    "and far-field evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    scheme_choices = [s.value for s in Scheme]

    p = sub.add_parser("modes", help="enumerate the diode-state taxonomy")
    p.add_argument("--incidence", required=True, choices=("edge", "diagonal"))
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_modes)

    p = sub.add_parser("element", help="sweep one diode state's reflection response")
    p.add_argument("--config", required=True, help="4-character 0/1 diode word, e.g. 1010")
    p.add_argument("--incidence", required=True, choices=("edge", "diagonal"))
    p.add_argument("--spec", help="element spec JSON file")
    p.add_argument("--f-start", type=float, required=True)
    p.add_argument("--f-stop", type=float, required=True)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_element)

    p = sub.add_parser("calibrate", help="scan for the best codebook frequency")
    p.add_argument("--scheme", required=True, choices=scheme_choices)
    p.add_argument("--spec", help="element spec JSON file")
    p.add_argument("--f-start", type=float, required=True)
    p.add_argument("--f-stop", type=float, required=True)
    p.add_argument("--points", type=int, default=2001)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_calibrate)

    p = sub.add_parser("synth", help="synthesize and quantize a phase map")
    p.add_argument("--rows", type=int, required=True)
    p.add_argument("--cols", type=int, required=True)
    spacing = p.add_mutually_exclusive_group()
    spacing.add_argument("--spacing-lambda", type=float,
                         help="element spacing in wavelengths at --freq-hz (default 0.5)")
    spacing.add_argument("--spacing-m", type=float, help="element spacing in meters")
    p.add_argument("--freq-hz", type=float, required=True)
    p.add_argument("--scheme", required=True, choices=scheme_choices)
    p.add_argument("--freq2-hz", type=float, help="second band frequency (dual-band)")
    target = p.add_mutually_exclusive_group()
    target.add_argument("--beam", help="steering target 'THETA,PHI' in degrees")
    target.add_argument("--focus", help="focal point 'X,Y,Z' in meters")
    p.add_argument("--oam", type=int, help="vortex mode index")
    p.add_argument("--coding", help="checkerboard:BLOCK or random:SEED")
    p.add_argument("--feed", help="spherical feed position 'X,Y,Z' in meters")
    p.add_argument("--q-feed", type=float, default=0.0,
                   help="feed illumination taper exponent")
    p.add_argument("--spec", help="element spec JSON file")
    p.add_argument("--out", required=True, help="artifact output directory")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser("pattern", help="compute the far-field pattern of artifacts")
    p.add_argument("--in", dest="in_dir", required=True, help="artifact directory")
    p.add_argument("--cut", default="phi=0", help="principal cut, e.g. phi=0 or theta=30")
    _add_grid_flags(p)
    p.add_argument("--out", required=True, help="cut CSV output path")
    p.add_argument("--grid-out", help="full-grid JSON output path")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_pattern)

    p = sub.add_parser("metrics", help="evaluate pattern metrics of artifacts")
    p.add_argument("--in", dest="in_dir", required=True, help="artifact directory")
    _add_grid_flags(p)
    p.add_argument("--oam-ring", type=float,
                   help="evaluate vortex purity on the ring at this theta (deg)")
    p.add_argument("--oam-lmax", type=int, default=4)
    p.add_argument("--rcs", action="store_true",
                   help="report boresight reduction vs the uniform surface")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_metrics)

    p = sub.add_parser("report", help="render figures and the cut CSV for artifacts")
    p.add_argument("--in", dest="in_dir", required=True, help="artifact directory")
    p.add_argument("--out", required=True, help="report output directory")
    p.add_argument("--cut", default="phi=0")
    _add_grid_flags(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=_cmd_report)

    return parser


def run(argv: list[str]) -> int:
    "Parse argv and dispatch; returns the process exit code."
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.handler(args)
    except (ValueError, OSError, CalibrationError, CodebookConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():  # console entry point
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
