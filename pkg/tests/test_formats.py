import json

import numpy as np
import pytest

from deism import formats
from deism.baselines import RtfSpectrum
from deism.directivity import Directivity, SampledSphereField, fibonacci_sphere_directions
from deism.errors import FormatError

FREQS = np.array([100.0, 250.0, 707.1067811865476])


def awkward_complex(rng, shape):
    # exercise the 17-digit round trip with full-precision doubles
    return rng.standard_normal(shape) * 1e-7 + 1j * rng.standard_normal(shape) * 1e3


class TestDirectivityFile:
    def test_round_trip_bit_exact(self, tmp_path, rng):
        d = Directivity(r0=0.4321, max_order=3, frequencies=FREQS,
                        coeffs=awkward_complex(rng, (3, 16)), kind="receiver")
        path = tmp_path / "dir.dcsv"
        formats.write_directivity(path, d)
        back = formats.read_directivity(path)
        assert back.kind == d.kind
        assert back.r0 == d.r0
        assert np.array_equal(back.frequencies, d.frequencies)
        assert np.array_equal(back.coeffs, d.coeffs)
        # writing again reproduces the same bytes
        path2 = tmp_path / "dir2.dcsv"
        formats.write_directivity(path2, back)
        assert path.read_bytes() == path2.read_bytes()

    def test_header_errors_carry_line_numbers(self, tmp_path):
        path = tmp_path / "bad.dcsv"
        path.write_text("not json\nfreq_hz,n,m,re,im\n")
        with pytest.raises(FormatError, match="line 1"):
            formats.read_directivity(path)
        header = ('{"version": 99, "kind": "source", "r0_m": 0.1, '
                  '"max_order": 0, "frequencies_hz": [100.0]}')
        path.write_text(header + "\nfreq_hz,n,m,re,im\n100,0,0,1,0\n")
        with pytest.raises(FormatError, match="version"):
            formats.read_directivity(path)

    def test_bad_row_reports_its_line(self, tmp_path, rng):
        d = Directivity(r0=0.1, max_order=0, frequencies=np.array([100.0]),
                        coeffs=np.array([[1 + 2j]]), kind="source")
        path = tmp_path / "dir.dcsv"
        formats.write_directivity(path, d)
        lines = path.read_text().splitlines()
        lines[2] = "100,0,0,abc,0"
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(FormatError, match="line 3"):
            formats.read_directivity(path)

    def test_missing_rows_detected(self, tmp_path):
        d = Directivity(r0=0.1, max_order=1, frequencies=np.array([100.0]),
                        coeffs=np.ones((1, 4), complex), kind="source")
        path = tmp_path / "dir.dcsv"
        formats.write_directivity(path, d)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(FormatError, match="coefficient rows"):
            formats.read_directivity(path)


class TestSampledFieldFile:
    def test_round_trip_bit_exact(self, tmp_path, rng):
        directions = fibonacci_sphere_directions(20)
        field = SampledSphereField(r0=0.55, directions=directions, frequencies=FREQS,
                                   pressure=awkward_complex(rng, (3, 20)))
        path = tmp_path / "field.scsv"
        formats.write_sampled_field(path, field)
        back = formats.read_sampled_field(path)
        assert back.r0 == field.r0
        assert np.array_equal(back.directions, field.directions)
        assert np.array_equal(back.pressure, field.pressure)

    def test_incomplete_coverage_detected(self, tmp_path, rng):
        directions = fibonacci_sphere_directions(8)
        field = SampledSphereField(r0=0.5, directions=directions, frequencies=FREQS,
                                   pressure=awkward_complex(rng, (3, 8)))
        path = tmp_path / "field.scsv"
        formats.write_sampled_field(path, field)
        lines = path.read_text().splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(FormatError, match="cover"):
            formats.read_sampled_field(path)


class TestSpectrumFiles:
    def test_round_trip_with_sidecar(self, tmp_path, rng):
        spec = RtfSpectrum(frequencies=FREQS, values=awkward_complex(rng, 3),
                           method_tag="DEISM_LC", metadata={"rng_seed": 7})
        path = tmp_path / "out.csv"
        formats.write_spectrum(path, spec, {"config_fingerprint": "ab" * 32})
        back = formats.read_spectrum(path)
        assert np.array_equal(back.frequencies, spec.frequencies)
        assert np.array_equal(back.values, spec.values)
        assert back.method_tag == "DEISM_LC"
        sidecar = json.loads((tmp_path / "out.json").read_text())
        assert sidecar["config_fingerprint"] == "ab" * 32
        assert sidecar["rng_seed"] == 7

    def test_csv_without_sidecar_still_reads(self, tmp_path):
        path = tmp_path / "plain.csv"
        path.write_text("freq_hz,re,im\n100,1,0\n200,0,1\n")
        back = formats.read_spectrum(path)
        assert back.values[1] == 1j

    def test_malformed_rows_located(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("freq_hz,re,im\n100,1\n")
        with pytest.raises(FormatError, match="line 2"):
            formats.read_spectrum(path)
        path.write_text("wrong,header\n")
        with pytest.raises(FormatError, match="line 1"):
            formats.read_spectrum(path)


class TestComparisonFile:
    def test_report_and_traces(self, tmp_path, rng):
        from deism import metrics

        a = RtfSpectrum(frequencies=FREQS, values=awkward_complex(rng, 3),
                        method_tag="DEISM")
        b = RtfSpectrum(frequencies=FREQS, values=awkward_complex(rng, 3),
                        method_tag="DEISM_LC")
        report = metrics.compare(a, b, with_traces=True)
        out = tmp_path / "report.json"
        traces = tmp_path / "traces.csv"
        formats.write_comparison(out, report, traces_csv_path=traces)
        doc = json.loads(out.read_text())
        assert doc["e_l2"] == report.e_l2
        assert traces.read_text().startswith("freq_hz,magnitude_ratio_db")
