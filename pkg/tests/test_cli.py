import json
import math
import subprocess
import sys

import numpy as np
import pytest

from deism import cli, formats
from deism.directivity import Medium, fibonacci_sphere_directions, monopole_coefficients
from deism.directivity import SampledSphereField
from deism.metrics import relative_l2


def write_config(tmp_path, name="config.json", **overrides):
    doc = {
        "poses": {"preset": "paper-config-1"},
        "methods": ["ISM_OMNI", "DEISM", "DEISM_LC"],
        "reflection_order": 2,
        "frequencies_hz": [100.0, 300.0, 500.0],
    }
    doc.update(overrides)
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def run(args):
    return cli.main([str(a) for a in args])


class TestSimulate:
    def test_monopole_methods_agree(self, tmp_path, capsys):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        assert run(["simulate", "--config", cfg, "--output", out, "--workers", 1]) == 0
        spectra = {m: formats.read_spectrum(out / f"{m}.csv")
                   for m in ("ism_omni", "deism", "deism_lc")}
        pairs = [("ism_omni", "deism"), ("deism", "deism_lc")]
        for a, b in pairs:
            assert relative_l2(spectra[a], spectra[b]) < 1e-10
        sidecar = json.loads((out / "deism.json").read_text())
        assert len(sidecar["config_fingerprint"]) == 64
        assert sidecar["method"] == "DEISM"

    def test_repeat_runs_are_bit_identical(self, tmp_path):
        cfg = write_config(tmp_path, methods=["DEISM", "FSRR"], rng_seed=3)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run(["simulate", "--config", cfg, "--output", out1, "--workers", 1]) == 0
        assert run(["simulate", "--config", cfg, "--output", out2, "--workers", 4]) == 0
        for name in ("deism.csv", "deism.json", "fsrr.csv", "fsrr.json"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_method_and_seed_overrides(self, tmp_path):
        cfg = write_config(tmp_path, methods=["DEISM"])
        out = tmp_path / "out"
        assert run(["simulate", "--config", cfg, "--output", out,
                    "--method", "FSRR", "--seed", 9, "--workers", 1]) == 0
        sidecar = json.loads((out / "fsrr.json").read_text())
        assert sidecar["rng_seed"] == 9
        assert not (out / "deism.csv").exists()

    def test_overlapping_spheres_is_config_error(self, tmp_path):
        cfg = write_config(
            tmp_path,
            poses={"source": {"position_m": [1.1, 1.1, 1.3]},
                   "receiver": {"position_m": [1.3, 1.1, 1.3]}},
            room={"dimensions_m": [4.0, 3.0, 2.5], "impedance": 18.0},
            source_directivity={"synthetic": {"max_order": 2, "r0_m": 0.4, "seed": 1}},
            receiver_directivity={"synthetic": {"max_order": 2, "r0_m": 0.4, "seed": 2}},
            methods=["DEISM"],
        )
        assert run(["simulate", "--config", cfg, "--output", tmp_path / "x"]) == 2

    def test_svg_plot_emitted(self, tmp_path):
        cfg = write_config(tmp_path, methods=["ISM_OMNI"])
        out = tmp_path / "out"
        assert run(["simulate", "--config", cfg, "--output", out, "--plot", "svg",
                    "--workers", 1]) == 0
        svg = (out / "spectra.svg").read_text()
        assert svg.startswith("<svg") and "polyline" in svg

    def test_gism_with_point_receiver(self, tmp_path):
        cfg = write_config(
            tmp_path,
            methods=["GISM", "DEISM"],
            source_directivity={"synthetic": {"max_order": 2, "r0_m": 0.3, "seed": 1}},
            receiver_directivity={"point": {"offset_m": 0.08, "theta_rad": 1.2,
                                            "phi_rad": 0.5}},
        )
        out = tmp_path / "out"
        assert run(["simulate", "--config", cfg, "--output", out, "--workers", 1]) == 0
        gism = formats.read_spectrum(out / "gism.csv")
        deism = formats.read_spectrum(out / "deism.csv")
        assert relative_l2(deism, gism) < 1e-9


class TestFitDirectivity:
    def _field_file(self, tmp_path, n_points):
        medium = Medium()
        freqs = np.array([200.0, 500.0])
        mono = monopole_coefficients(freqs, medium)
        from deism.directivity import evaluate_exterior_field

        directions = fibonacci_sphere_directions(n_points)
        pressure = np.empty((2, n_points), complex)
        for j, (th, ph) in enumerate(directions):
            pressure[:, j] = evaluate_exterior_field(mono, 0.3, th, ph, medium)
        field = SampledSphereField(r0=0.3, directions=directions, frequencies=freqs,
                                   pressure=pressure)
        path = tmp_path / "field.scsv"
        formats.write_sampled_field(path, field)
        return path

    def test_monopole_field_fits_to_monopole(self, tmp_path, capsys):
        path = self._field_file(tmp_path, 32)
        out = tmp_path / "fit.dcsv"
        assert run(["fit-directivity", "--input", path, "--order", 2,
                    "--output", out]) == 0
        report = capsys.readouterr().out
        assert "condition_number" in report and "relative_residual" in report
        d = formats.read_directivity(out)
        mags = np.abs(d.coeffs)
        assert np.all(mags[:, 1:] < 1e-10 * mags[:, :1])

    def test_refit_of_written_file_is_stable(self, tmp_path):
        path = self._field_file(tmp_path, 40)
        out1 = tmp_path / "fit1.dcsv"
        out2 = tmp_path / "fit2.dcsv"
        assert run(["fit-directivity", "--input", path, "--order", 2,
                    "--output", out1]) == 0
        assert run(["fit-directivity", "--input", path, "--order", 2,
                    "--output", out2]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_too_few_samples_gives_precondition_exit(self, tmp_path):
        path = self._field_file(tmp_path, 8)  # below (2+1)^2
        assert run(["fit-directivity", "--input", path, "--order", 2,
                    "--output", tmp_path / "x.dcsv"]) == 2

    def test_malformed_field_gives_io_exit(self, tmp_path):
        bad = tmp_path / "bad.scsv"
        bad.write_text("garbage\n")
        assert run(["fit-directivity", "--input", bad, "--order", 1,
                    "--output", tmp_path / "x.dcsv"]) == 4


class TestCompare:
    def test_identical_files_give_zeros(self, tmp_path, capsys):
        cfg = write_config(tmp_path, methods=["ISM_OMNI"])
        out = tmp_path / "out"
        run(["simulate", "--config", cfg, "--output", out, "--workers", 1])
        report_path = tmp_path / "report.json"
        assert run(["compare", out / "ism_omni.csv", out / "ism_omni.csv",
                    "--output", report_path]) == 0
        doc = json.loads(report_path.read_text())
        assert doc["e_lsd_db"] == 0.0
        assert doc["e_phase_rad"] == 0.0
        assert doc["e_l2"] == 0.0

    def test_scaled_file_gives_six_db(self, tmp_path, capsys):
        cfg = write_config(tmp_path, methods=["ISM_OMNI"])
        out = tmp_path / "out"
        run(["simulate", "--config", cfg, "--output", out, "--workers", 1])
        spec = formats.read_spectrum(out / "ism_omni.csv")
        from deism.baselines import RtfSpectrum

        doubled = RtfSpectrum(frequencies=spec.frequencies, values=2 * spec.values,
                              method_tag="ISM_OMNI")
        formats.write_spectrum(tmp_path / "doubled.csv", doubled)
        assert run(["compare", tmp_path / "doubled.csv", out / "ism_omni.csv"]) == 0
        printed = capsys.readouterr().out
        lsd = float([l for l in printed.splitlines() if l.startswith("e_lsd_db")][0].split()[1])
        assert lsd == pytest.approx(20 * math.log10(2.0), rel=1e-9)

    def test_grid_mismatch_exit_code(self, tmp_path):
        (tmp_path / "a.csv").write_text("freq_hz,re,im\n100,1,0\n")
        (tmp_path / "b.csv").write_text("freq_hz,re,im\n200,1,0\n")
        assert run(["compare", tmp_path / "a.csv", tmp_path / "b.csv"]) == 2


class TestSweeps:
    def test_distance_sweep_monopoles_near_zero(self, tmp_path):
        cfg = write_config(tmp_path, methods=["DEISM"],
                           frequencies_hz=[500.0])
        out = tmp_path / "sweep.csv"
        assert run(["sweep-distance", "--config", cfg, "--distances", "2,10",
                    "--output", out, "--workers", 1]) == 0
        rows = out.read_text().strip().splitlines()
        assert rows[0] == "distance_m,e_l2"
        errs = [float(r.split(",")[1]) for r in rows[1:]]
        assert len(errs) == 2 and all(e < 1e-12 for e in errs)

    def test_distance_sweep_single_row_and_plot(self, tmp_path):
        cfg = write_config(tmp_path, methods=["DEISM"], frequencies_hz=[500.0],
                           source_directivity={"synthetic": {"max_order": 2,
                                                             "r0_m": 0.3, "seed": 1}})
        out = tmp_path / "sweep.csv"
        assert run(["sweep-distance", "--config", cfg, "--distances", "5",
                    "--output", out, "--plot", "svg", "--workers", 1]) == 0
        assert len(out.read_text().strip().splitlines()) == 2
        assert (tmp_path / "sweep.svg").exists()

    def test_order_sweep_and_override_notice(self, tmp_path, capsys):
        cfg = write_config(tmp_path, methods=["DEISM"], frequencies_hz=[300.0, 500.0],
                           source_directivity={"synthetic": {"max_order": 2,
                                                             "r0_m": 0.3, "seed": 1}})
        out = tmp_path / "orders.csv"
        assert run(["sweep-order", "--config", cfg, "--orders", "1:3",
                    "--output", out, "--workers", 1]) == 0
        assert len(out.read_text().strip().splitlines()) == 4

        # with an override, order zero is skipped with a notice
        sim_out = tmp_path / "sim"
        run(["simulate", "--config", cfg, "--output", sim_out, "--workers", 1])
        cfg2 = write_config(tmp_path, "config2.json", methods=["DEISM"],
                            frequencies_hz=[300.0, 500.0],
                            source_directivity={"synthetic": {"max_order": 2,
                                                              "r0_m": 0.3, "seed": 1}},
                            direct_path_override=str(sim_out / "deism.csv"))
        out2 = tmp_path / "orders2.csv"
        assert run(["sweep-order", "--config", cfg2, "--orders", "0,1",
                    "--output", out2, "--workers", 1]) == 0
        captured = capsys.readouterr()
        assert "order 0 skipped" in captured.err
        assert len(out2.read_text().strip().splitlines()) == 2


class TestBench:
    def test_report_matches_schema_and_degenerate_speedup(self, tmp_path):
        import jsonschema
        from pathlib import Path
        import deism

        cfg = write_config(tmp_path, methods=["DEISM", "DEISM_LC"],
                           reflection_order=8, frequencies_hz=[500.0, 700.0])
        out = tmp_path / "bench.json"
        assert run(["bench", "--config", cfg, "--output", out, "--repeat", 3,
                    "--workers", 1]) == 0
        report = json.loads(out.read_text())
        schema = json.loads(
            (Path(deism.__file__).parent / "schemas" / "bench_report.schema.json")
            .read_text()
        )
        jsonschema.validate(report, schema)
        # order-0 patterns: the two methods do about the same work per path
        assert 0.5 <= report["speedup_full_over_lc"] <= 1.5
        assert report["coupling_term_ratio"] == 1.0


class TestBenchOrderFive:
    def test_reported_speedup_at_order_five(self, tmp_path):
        cfg = write_config(
            tmp_path,
            methods=["DEISM", "DEISM_LC"],
            reflection_order=6,
            frequencies_hz=[300.0, 500.0, 700.0],
            source_directivity={"synthetic": {"max_order": 5, "r0_m": 0.4,
                                              "seed": 2024}},
            receiver_directivity={"synthetic": {"max_order": 5, "r0_m": 0.5,
                                                "seed": 2025}},
        )
        out = tmp_path / "bench.json"
        assert run(["bench", "--config", cfg, "--output", out, "--repeat", 2,
                    "--workers", 1]) == 0
        report = json.loads(out.read_text())
        assert report["speedup_full_over_lc"] >= 3.0
        assert 5.0 <= report["coupling_term_ratio"] <= 15.0


class TestExitCodesViaSubprocess:
    def test_missing_config_file(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "deism.cli", "simulate", "--config",
             str(tmp_path / "missing.json"), "--output", str(tmp_path / "o")],
            capture_output=True, text=True,
        )
        assert proc.returncode == 2
        assert "config" in proc.stderr

    def test_version_flag(self):
        proc = subprocess.run(
            [sys.executable, "-m", "deism.cli", "--version"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert proc.stdout.strip()


class TestWorkerResolution:
    def test_env_fallback_and_explicit_override(self, monkeypatch):
        from deism.parallel import resolve_workers

        monkeypatch.delenv("DEISM_WORKERS", raising=False)
        assert resolve_workers(3) == 3
        monkeypatch.setenv("DEISM_WORKERS", "2")
        assert resolve_workers(None) == 2
        assert resolve_workers(5) == 5
        monkeypatch.setenv("DEISM_WORKERS", "0")
        with pytest.raises(ValueError):
            resolve_workers(None)
