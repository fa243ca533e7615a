"""Versioned on-disk formats for directivities, sampled fields, and spectra.

Directivity and sampled-field files are a single text file: the first line is
a JSON header, the second the CSV column names, then the data rows. Spectrum
outputs are plain CSV with a JSON metadata sidecar. All doubles print with 17
significant digits, so read(write(x)) is bit-exact for finite values.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import sph
from .baselines import METHOD_TAGS, RtfSpectrum
from .directivity import Directivity, SampledSphereField
from .errors import FormatError

FORMAT_VERSION = 1


def fmt(x: float) -> str:
    """One finite double as text, round-trip exact."""
    return format(float(x), ".17g")


def _read_lines(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(str(exc), path=str(path)) from exc
    return text.splitlines()


def _parse_header(path, line, required_keys):
    try:
        header = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON header: {exc}", path=str(path), line=1) from exc
    if not isinstance(header, dict):
        raise FormatError("header must be a JSON object", path=str(path), line=1)
    missing = required_keys - set(header)
    if missing:
        raise FormatError(f"header missing keys {sorted(missing)}", path=str(path), line=1)
    if header.get("version") != FORMAT_VERSION:
        raise FormatError(
            f"unsupported format version {header.get('version')!r}", path=str(path), line=1
        )
    return header


def _parse_float(token, path, lineno, what):
    try:
        return float(token)
    except ValueError as exc:
        raise FormatError(f"bad {what} value {token!r}", path=str(path), line=lineno) from exc


def _parse_int(token, path, lineno, what):
    try:
        return int(token)
    except ValueError as exc:
        raise FormatError(f"bad {what} value {token!r}", path=str(path), line=lineno) from exc


def write_directivity(path, d: Directivity) -> None:
    """Write a coefficient set; rows sorted by (frequency, order, mode)."""
    header = {
        "version": FORMAT_VERSION,
        "kind": d.kind,
        "r0_m": float(d.r0),
        "max_order": int(d.max_order),
        "frequencies_hz": [float(f) for f in d.frequencies],
    }
    lines = [json.dumps(header), "freq_hz,n,m,re,im"]
    for fi, f in enumerate(d.frequencies):
        for n in range(d.max_order + 1):
            for m in range(-n, n + 1):
                c = d.coeffs[fi, sph.sh_index(n, m)]
                lines.append(f"{fmt(f)},{n},{m},{fmt(c.real)},{fmt(c.imag)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_directivity(path) -> Directivity:
    lines = _read_lines(path)
    if len(lines) < 2:
        raise FormatError("file too short for header and column row", path=str(path), line=1)
    header = _parse_header(path, lines[0], {"version", "kind", "r0_m", "max_order",
                                            "frequencies_hz"})
    if lines[1].strip() != "freq_hz,n,m,re,im":
        raise FormatError("unexpected column row", path=str(path), line=2)
    frequencies = np.asarray(header["frequencies_hz"], dtype=np.float64)
    max_order = int(header["max_order"])
    n_coeff = (max_order + 1) ** 2
    coeffs = np.full((frequencies.size, n_coeff), np.nan, dtype=np.complex128)
    freq_index = {fmt(f): i for i, f in enumerate(frequencies)}
    expect = frequencies.size * n_coeff
    rows = 0
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise FormatError(f"expected 5 columns, got {len(parts)}", path=str(path),
                              line=lineno)
        f_tok, n_tok, m_tok, re_tok, im_tok = parts
        fi = freq_index.get(fmt(_parse_float(f_tok, path, lineno, "frequency")))
        if fi is None:
            raise FormatError(f"frequency {f_tok} not in header grid", path=str(path),
                              line=lineno)
        n = _parse_int(n_tok, path, lineno, "order")
        m = _parse_int(m_tok, path, lineno, "mode")
        if n < 0 or n > max_order or abs(m) > n:
            raise FormatError(f"invalid (n, m) = ({n}, {m})", path=str(path), line=lineno)
        re = _parse_float(re_tok, path, lineno, "re")
        im = _parse_float(im_tok, path, lineno, "im")
        coeffs[fi, sph.sh_index(n, m)] = re + 1j * im
        rows += 1
    if rows != expect or np.any(np.isnan(coeffs)):
        raise FormatError(
            f"expected {expect} coefficient rows covering the full grid, got {rows}",
            path=str(path),
        )
    try:
        return Directivity(
            r0=float(header["r0_m"]), max_order=max_order, frequencies=frequencies,
            coeffs=coeffs, kind=str(header["kind"]),
        )
    except (TypeError, ValueError) as exc:
        raise FormatError(f"invalid directivity data: {exc}", path=str(path)) from exc


def write_sampled_field(path, field: SampledSphereField) -> None:
    header = {
        "version": FORMAT_VERSION,
        "r0_m": float(field.r0),
        "frequencies_hz": [float(f) for f in field.frequencies],
    }
    lines = [json.dumps(header), "theta_rad,phi_rad,freq_hz,re,im"]
    for j in range(field.n_samples):
        th, ph = field.directions[j]
        for fi, f in enumerate(field.frequencies):
            p = field.pressure[fi, j]
            lines.append(f"{fmt(th)},{fmt(ph)},{fmt(f)},{fmt(p.real)},{fmt(p.imag)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_sampled_field(path) -> SampledSphereField:
    lines = _read_lines(path)
    if len(lines) < 2:
        raise FormatError("file too short for header and column row", path=str(path), line=1)
    header = _parse_header(path, lines[0], {"version", "r0_m", "frequencies_hz"})
    if lines[1].strip() != "theta_rad,phi_rad,freq_hz,re,im":
        raise FormatError("unexpected column row", path=str(path), line=2)
    frequencies = np.asarray(header["frequencies_hz"], dtype=np.float64)
    freq_index = {fmt(f): i for i, f in enumerate(frequencies)}
    directions: list[tuple[float, float]] = []
    dir_index: dict[tuple[str, str], int] = {}
    entries = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 5:
            raise FormatError(f"expected 5 columns, got {len(parts)}", path=str(path),
                              line=lineno)
        th = _parse_float(parts[0], path, lineno, "theta")
        ph = _parse_float(parts[1], path, lineno, "phi")
        fi = freq_index.get(fmt(_parse_float(parts[2], path, lineno, "frequency")))
        if fi is None:
            raise FormatError(f"frequency {parts[2]} not in header grid", path=str(path),
                              line=lineno)
        re = _parse_float(parts[3], path, lineno, "re")
        im = _parse_float(parts[4], path, lineno, "im")
        key = (fmt(th), fmt(ph))
        if key not in dir_index:
            dir_index[key] = len(directions)
            directions.append((th, ph))
        entries.append((fi, dir_index[key], re + 1j * im))
    if not entries:
        raise FormatError("no samples", path=str(path))
    pressure = np.full((frequencies.size, len(directions)), np.nan, dtype=np.complex128)
    for fi, j, val in entries:
        pressure[fi, j] = val
    if np.any(np.isnan(pressure)):
        raise FormatError("samples do not cover every (direction, frequency) pair",
                          path=str(path))
    try:
        return SampledSphereField(
            r0=float(header["r0_m"]),
            directions=np.asarray(directions),
            frequencies=frequencies,
            pressure=pressure,
        )
    except (TypeError, ValueError) as exc:
        raise FormatError(f"invalid sampled field: {exc}", path=str(path)) from exc


def write_spectrum(csv_path, spectrum: RtfSpectrum, metadata: dict | None = None) -> None:
    """CSV of freq_hz,re,im plus a .json sidecar with tag and metadata."""
    csv_path = Path(csv_path)
    lines = ["freq_hz,re,im"]
    for f, v in zip(spectrum.frequencies, spectrum.values):
        lines.append(f"{fmt(f)},{fmt(v.real)},{fmt(v.imag)}")
    csv_path.write_text("\n".join(lines) + "\n")
    sidecar = {
        "version": FORMAT_VERSION,
        "method": spectrum.method_tag,
        "n_frequencies": int(spectrum.frequencies.size),
    }
    sidecar.update(spectrum.metadata)
    if metadata:
        sidecar.update(metadata)
    csv_path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def read_spectrum(csv_path) -> RtfSpectrum:
    csv_path = Path(csv_path)
    lines = _read_lines(csv_path)
    if not lines or lines[0].strip() != "freq_hz,re,im":
        raise FormatError("expected header 'freq_hz,re,im'", path=str(csv_path), line=1)
    freqs, vals = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise FormatError(f"expected 3 columns, got {len(parts)}", path=str(csv_path),
                              line=lineno)
        freqs.append(_parse_float(parts[0], csv_path, lineno, "frequency"))
        vals.append(
            _parse_float(parts[1], csv_path, lineno, "re")
            + 1j * _parse_float(parts[2], csv_path, lineno, "im")
        )
    method = "DEISM"
    metadata = {}
    sidecar = csv_path.with_suffix(".json")
    if sidecar.exists():
        try:
            meta = json.loads(sidecar.read_text())
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid sidecar JSON: {exc}", path=str(sidecar)) from exc
        if isinstance(meta, dict):
            metadata = meta
            if meta.get("method") in METHOD_TAGS:
                method = meta["method"]
    try:
        return RtfSpectrum(
            frequencies=np.asarray(freqs), values=np.asarray(vals),
            method_tag=method, metadata=metadata,
        )
    except ValueError as exc:
        raise FormatError(f"invalid spectrum: {exc}", path=str(csv_path)) from exc


def write_comparison(path, report, traces_csv_path=None) -> None:
    """Comparison report as JSON, with an optional per-frequency trace CSV."""
    doc = report.to_dict()
    if traces_csv_path is not None and report.traces:
        lines = ["freq_hz,magnitude_ratio_db,phase_difference_rad"]
        for f, mag, ph in zip(
            report.traces["freq_hz"],
            report.traces["magnitude_ratio_db"],
            report.traces["phase_difference_rad"],
        ):
            lines.append(f"{fmt(f)},{fmt(mag)},{fmt(ph)}")
        Path(traces_csv_path).write_text("\n".join(lines) + "\n")
        doc["traces_csv"] = str(traces_csv_path)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
