"""Command-line front end.

Verbs: fit-directivity, simulate, compare, sweep-distance, sweep-order,
bench. Exit codes: 0 success, 2 configuration error, 3 numeric or
conditioning error, 4 I/O or format error. Output files carry the config
fingerprint and artifact version and contain no timestamps, so identical
configurations reproduce identical bytes.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import formats, metrics, svgplot
from .baselines import fsrr_spectrum, gism_spectrum, ism_omni_spectrum
from .config import (
    ARTIFACT_VERSION,
    SimulationConfig,
    load_config,
    materialize_directivity,
)
from .directivity import Medium, fit_directivity, rotate_azimuth
from .engine import DeismRequest, deism_spectrum
from .errors import ConfigError, DeismError, NumericError
from .kernels import active_backend
from .parallel import resolve_workers
from .room import RoomSpec, TransducerPose


def _parse_method_list(text):
    methods = [m.strip() for m in text.split(",") if m.strip()]
    if not methods:
        raise ConfigError("--method: expected at least one method name")
    return methods


def _apply_overrides(cfg: SimulationConfig, args) -> SimulationConfig:
    if getattr(args, "method", None):
        methods = tuple(_parse_method_list(args.method))
        from .baselines import METHOD_TAGS

        for m in methods:
            if m not in METHOD_TAGS:
                raise ConfigError(f"--method: unknown method {m!r}")
        cfg = dataclasses.replace(cfg, methods=methods)
    if getattr(args, "seed", None) is not None:
        cfg = dataclasses.replace(
            cfg,
            rng_seed=args.seed,
            fsrr=dataclasses.replace(cfg.fsrr, rng_seed=args.seed),
        )
    return cfg


def _materialized(cfg: SimulationConfig, base_dir: Path):
    c_src = materialize_directivity(
        cfg.source_directivity, cfg.frequencies, cfg.room.medium, "source", base_dir
    )
    c_rcv = materialize_directivity(
        cfg.receiver_directivity, cfg.frequencies, cfg.room.medium, "receiver", base_dir
    )
    override = None
    if cfg.direct_path_override is not None:
        path = Path(cfg.direct_path_override)
        if not path.is_absolute():
            path = base_dir / path
        override = formats.read_spectrum(path)
        if not np.array_equal(override.frequencies, cfg.frequencies):
            raise ConfigError("direct-path override grid does not match the request grid")
    return c_src, c_rcv, override


def _run_method(cfg: SimulationConfig, method: str, c_src, c_rcv, override, workers):
    """One (spectrum, stats-dict) for a configured method."""
    room, src, rcv = cfg.room, cfg.src_pose, cfg.rcv_pose
    if method == "ISM_OMNI":
        spec = ism_omni_spectrum(
            room, src.position, rcv.position, cfg.reflection_order, cfg.frequencies,
            chunk_size=cfg.chunk_size, workers=workers,
        )
        return spec, {}
    if method == "GISM":
        sel = cfg.receiver_directivity
        d_y = sel.offset_m if sel.mode == "point" else 0.0
        spec = gism_spectrum(
            rotate_azimuth(c_src, src.yaw), d_y, sel.theta_rad,
            sel.phi_rad + rcv.yaw, room, src.position, rcv.position,
            cfg.reflection_order, chunk_size=cfg.chunk_size, workers=workers,
        )
        return spec, {}
    if method == "FSRR":
        spec = fsrr_spectrum(
            rotate_azimuth(c_src, src.yaw), rotate_azimuth(c_rcv, rcv.yaw),
            room, src.position, rcv.position, cfg.reflection_order, cfg.fsrr,
            chunk_size=cfg.chunk_size, workers=workers,
        )
        return spec, {}
    req = DeismRequest(
        room=room, src_pose=src, rcv_pose=rcv, c_src=c_src, c_rcv=c_rcv,
        max_reflection_order=cfg.reflection_order, frequencies=cfg.frequencies,
        method="FULL" if method == "DEISM" else "LC",
        direct_path_override=override, adaptive_truncation=cfg.adaptive_truncation,
        chunk_size=cfg.chunk_size, workers=workers,
    )
    spec, stats = deism_spectrum(req)
    return spec, {"n_images": stats.n_images, "coupling_terms": stats.coupling_terms}


def cmd_fit_directivity(args) -> int:
    field = formats.read_sampled_field(args.input)
    medium = Medium(speed_of_sound=args.speed_of_sound)
    d, report = fit_directivity(field, args.order, medium, kind=args.kind)
    formats.write_directivity(args.output, d)
    print(f"condition_number {report.condition_number:.6e}")
    for f, r in zip(field.frequencies, report.residuals):
        print(f"f_hz {f:g} relative_residual {r:.6e}")
    print(f"wrote {args.output}")
    return 0


def cmd_simulate(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    workers = resolve_workers(args.workers)
    base_dir = Path(args.config).resolve().parent
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    c_src, c_rcv, override = _materialized(cfg, base_dir)
    fingerprint = cfg.fingerprint()
    spectra = {}
    for method in cfg.methods:
        spec, stats = _run_method(cfg, method, c_src, c_rcv, override, workers)
        meta = {
            "artifact_version": ARTIFACT_VERSION,
            "config_fingerprint": fingerprint,
        }
        meta.update(stats)
        path = out_dir / f"{method.lower()}.csv"
        formats.write_spectrum(path, spec, meta)
        spectra[method] = spec
        print(f"{method}: wrote {path}")
    if args.plot == "svg":
        svg_path = out_dir / "spectra.svg"
        svg_path.write_text(svgplot.spectrum_svg(spectra))
        print(f"plot: wrote {svg_path}")
    return 0


def cmd_compare(args) -> int:
    h_test = formats.read_spectrum(args.file_a)
    h_ref = formats.read_spectrum(args.file_b)
    report = metrics.compare(h_test, h_ref, with_traces=args.traces is not None)
    for key, val in report.to_dict().items():
        print(f"{key} {val}")
    if args.output:
        formats.write_comparison(args.output, report, traces_csv_path=args.traces)
        print(f"wrote {args.output}")
    return 0


def _lc_vs_full_error(cfg, c_src, c_rcv, override, workers, room=None, src=None, rcv=None,
                      reflection_order=None):
    room = room or cfg.room
    src = src or cfg.src_pose
    rcv = rcv or cfg.rcv_pose
    order = cfg.reflection_order if reflection_order is None else reflection_order
    base = dict(
        room=room, src_pose=src, rcv_pose=rcv, c_src=c_src, c_rcv=c_rcv,
        max_reflection_order=order, frequencies=cfg.frequencies,
        direct_path_override=override, adaptive_truncation=cfg.adaptive_truncation,
        chunk_size=cfg.chunk_size, workers=workers,
    )
    full, _ = deism_spectrum(DeismRequest(method="FULL", **base))
    lc, _ = deism_spectrum(DeismRequest(method="LC", **base))
    return metrics.relative_l2(full, lc)


def cmd_sweep_distance(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    workers = resolve_workers(args.workers)
    base_dir = Path(args.config).resolve().parent
    distances = sorted(float(x) for x in args.distances.split(","))
    if any(d <= 0 for d in distances):
        raise ConfigError("--distances: all distances must be positive")
    rows = []
    for d in distances:
        # free-field layout: both poses on the x axis of a room just large
        # enough, direct path only
        room = RoomSpec(
            dimensions=(d + 2.0, 2.0, 2.0), zeta=cfg.room.zeta, medium=cfg.room.medium
        )
        src = TransducerPose(position=(1.0, 1.0, 1.0), yaw=cfg.src_pose.yaw)
        rcv = TransducerPose(position=(1.0 + d, 1.0, 1.0), yaw=cfg.rcv_pose.yaw)
        c_src = materialize_directivity(cfg.source_directivity, cfg.frequencies,
                                        room.medium, "source", base_dir)
        c_rcv = materialize_directivity(cfg.receiver_directivity, cfg.frequencies,
                                        room.medium, "receiver", base_dir)
        err = _lc_vs_full_error(cfg, c_src, c_rcv, None, workers, room=room, src=src,
                                rcv=rcv, reflection_order=0)
        rows.append((d, err))
        print(f"distance_m {d:g} e_l2 {err:.6e}")
    out = Path(args.output)
    out.write_text(
        "distance_m,e_l2\n"
        + "\n".join(f"{formats.fmt(d)},{formats.fmt(e)}" for d, e in rows)
        + "\n"
    )
    print(f"wrote {out}")
    if args.plot == "svg":
        svg_path = out.with_suffix(".svg")
        svg_path.write_text(
            svgplot.loglog_svg([r[0] for r in rows], [r[1] for r in rows],
                               "distance (m)", "log10 relative l2 error", "LC vs FULL")
        )
        print(f"plot: wrote {svg_path}")
    return 0


def cmd_sweep_order(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    workers = resolve_workers(args.workers)
    base_dir = Path(args.config).resolve().parent
    if ":" in args.orders:
        lo, hi = args.orders.split(":", 1)
        orders = list(range(int(lo), int(hi) + 1))
    else:
        orders = [int(x) for x in args.orders.split(",")]
    if any(o < 0 for o in orders):
        raise ConfigError("--orders: reflection orders must be non-negative")
    c_src, c_rcv, override = _materialized(cfg, base_dir)
    rows = []
    for n_o in orders:
        if n_o == 0 and override is not None:
            print(
                "order 0 skipped: the direct path comes from the override spectrum",
                file=sys.stderr,
            )
            continue
        err = _lc_vs_full_error(cfg, c_src, c_rcv, override, workers, reflection_order=n_o)
        rows.append((n_o, err))
        print(f"order {n_o} e_l2 {err:.6e}")
    out = Path(args.output)
    out.write_text(
        "order,e_l2\n"
        + "\n".join(f"{o},{formats.fmt(e)}" for o, e in rows)
        + "\n"
    )
    print(f"wrote {out}")
    return 0


def cmd_bench(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    workers = resolve_workers(args.workers)
    base_dir = Path(args.config).resolve().parent
    c_src, c_rcv, override = _materialized(cfg, base_dir)
    n_freq = int(cfg.frequencies.size)
    report = {
        "artifact_version": ARTIFACT_VERSION,
        "config_fingerprint": cfg.fingerprint(),
        "backend": active_backend(),
        "n_frequencies": n_freq,
        "n_images": 0,
        "workers": workers,
        "methods": {},
    }
    for method in cfg.methods:
        _run_method(cfg, method, c_src, c_rcv, override, workers)  # warm-up pass
        best = None
        stats = {}
        for _ in range(max(1, args.repeat)):
            t0 = time.perf_counter()
            _, stats = _run_method(cfg, method, c_src, c_rcv, override, workers)
            dt = time.perf_counter() - t0
            best = dt if best is None else min(best, dt)
        entry = {
            "wall_time_s": best,
            "per_frequency_s": best / n_freq,
            "coupling_terms": int(stats.get("coupling_terms", 0)),
        }
        if "n_images" in stats:
            report["n_images"] = int(stats["n_images"])
        report["methods"][method] = entry
        print(f"{method}: {best:.4f} s ({best / n_freq * 1e3:.3f} ms/frequency)")
    if "DEISM" in report["methods"] and "DEISM_LC" in report["methods"]:
        full = report["methods"]["DEISM"]
        lc = report["methods"]["DEISM_LC"]
        report["speedup_full_over_lc"] = full["wall_time_s"] / lc["wall_time_s"]
        if lc["coupling_terms"]:
            report["coupling_term_ratio"] = full["coupling_terms"] / lc["coupling_terms"]
        print(f"speedup FULL/LC: {report['speedup_full_over_lc']:.2f}")
        if "coupling_term_ratio" in report:
            print(f"coupling term ratio: {report['coupling_term_ratio']:.2f}")
    if args.output:
        Path(args.output).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        print(f"wrote {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deism",
        description="Room transfer functions with spherical-harmonic transducer "
                    "directivities",
    )
    parser.add_argument("--version", action="version", version=ARTIFACT_VERSION)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit-directivity", help="fit coefficients from a sampled sphere")
    p.add_argument("--input", required=True, help="sampled sphere field file")
    p.add_argument("--order", type=int, required=True, help="maximum fit order")
    p.add_argument("--output", required=True, help="directivity file to write")
    p.add_argument("--kind", choices=["source", "receiver"], default="source")
    p.add_argument("--speed-of-sound", type=float, default=343.0)
    p.set_defaults(fn=cmd_fit_directivity)

    def common(p, output_required=True):
        p.add_argument("--config", required=True, help="simulation config JSON")
        p.add_argument("--method", help="comma-separated method override")
        p.add_argument("--seed", type=int, help="override the config rng seed")
        p.add_argument("--workers", type=int, default=None,
                       help="worker threads (default: DEISM_WORKERS or host count)")
        if output_required:
            p.add_argument("--output", required=True)

    p = sub.add_parser("simulate", help="compute spectra for the configured methods")
    common(p)
    p.add_argument("--plot", choices=["none", "svg"], default="none")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("compare", help="metric report between two spectrum files")
    p.add_argument("file_a", help="test spectrum CSV")
    p.add_argument("file_b", help="reference spectrum CSV")
    p.add_argument("--output", help="JSON report path")
    p.add_argument("--traces", help="per-frequency trace CSV path")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("sweep-distance",
                       help="free-field LC-vs-FULL error over source-receiver distance")
    common(p)
    p.add_argument("--distances", required=True, help="comma-separated distances in m")
    p.add_argument("--plot", choices=["none", "svg"], default="none")
    p.set_defaults(fn=cmd_sweep_distance)

    p = sub.add_parser("sweep-order", help="LC-vs-FULL error over reflection order")
    common(p)
    p.add_argument("--orders", required=True, help="comma list or lo:hi range")
    p.set_defaults(fn=cmd_sweep_order)

    p = sub.add_parser("bench", help="wall-time and coupling-term report")
    common(p, output_required=False)
    p.add_argument("--output", help="JSON report path")
    p.add_argument("--repeat", type=int, default=1, help="timing repetitions, best-of")
    p.set_defaults(fn=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3
    except DeismError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
