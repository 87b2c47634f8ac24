import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from acutance_bench import DeadLeavesParams, RawImage, generate
from acutance_bench.cli import main, params_from_sidecar
from acutance_bench.fileio import (
    read_image,
    read_manifest,
    read_rawf,
    read_sidecar,
    write_image,
    write_rawf,
)


def run(*argv) -> int:
    return main([str(a) for a in argv])


@pytest.fixture()
def target_png(tmp_path):
    path = tmp_path / "target.png"
    assert run("generate", "--width", 64, "--height", 64, "--seed", 5,
               "--out", path) == 0
    return path


class TestGenerate:
    def test_writes_png_and_sidecar(self, tmp_path):
        out = tmp_path / "dl.png"
        assert run("generate", "--width", 32, "--height", 32, "--out", out) == 0
        img = read_image(out)
        assert img.shape == (32, 32, 3)
        doc = read_sidecar(out)
        assert doc["command"] == "generate"
        assert doc["params"]["seed"] == 0

    def test_same_seed_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        for out in (a, b):
            assert run("generate", "--width", 48, "--height", 48, "--seed", 9,
                       "--out", out) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_sidecar_regenerates_identically(self, tmp_path, target_png):
        params = params_from_sidecar(read_sidecar(target_png))
        regenerated = generate(params)
        out2 = tmp_path / "again.png"
        write_image(out2, regenerated, bit_depth=read_sidecar(target_png)["bit_depth"])
        assert out2.read_bytes() == target_png.read_bytes()

    def test_grey_mode_and_8bit(self, tmp_path):
        out = tmp_path / "grey.png"
        assert run("generate", "--width", 32, "--height", 32, "--color-mode",
                   "grey-uniform", "--bit-depth", 8, "--out", out) == 0
        assert read_image(out).channels == 1

    def test_palette_flag(self, tmp_path):
        out = tmp_path / "pal.png"
        assert run("generate", "--width", 32, "--height", 32, "--color-mode",
                   "palette", "--palette", "1,0,0;0,1,0", "--out", out) == 0
        img = read_image(out)
        assert img.channels == 3

    def test_defaults_produce_512_rgb(self, tmp_path):
        out = tmp_path / "default.png"
        assert run("generate", "--out", out) == 0
        img = read_image(out)
        assert img.shape == (512, 512, 3)
        doc = read_sidecar(out)
        assert doc["params"]["alpha"] == 3.0
        assert doc["params"]["r_max_resolved"] == 128.0
        assert doc["bit_depth"] == 16


class TestDegrade:
    def test_sigma_zero_equals_lossless_reencode(self, tmp_path, target_png):
        out = tmp_path / "same.png"
        assert run("degrade", target_png, "--awgn", 0, "--out", out) == 0
        reencode = tmp_path / "reencode.png"
        write_image(reencode, read_image(target_png))
        assert out.read_bytes() == reencode.read_bytes()

    def test_seed_recorded_and_reproducible(self, tmp_path, target_png):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        for out in (a, b):
            assert run("degrade", target_png, "--awgn", 25, "--seed", 17,
                       "--out", out) == 0
        assert a.read_bytes() == b.read_bytes()
        doc = read_sidecar(a)
        assert doc["operation"] == {"kind": "awgn", "sigma_255": 25.0, "seed": 17}

    def test_blur_and_sharpen(self, tmp_path, target_png):
        for flags in (["--blur", 1.5], ["--sharpen", 1.0, "--sharpen-sigma", 2.0]):
            out = tmp_path / f"x{flags[0][2:]}.png"
            assert run("degrade", target_png, *flags, "--out", out) == 0
            assert read_image(out).shape == (64, 64, 3)

    def test_poisson_gaussian_stays_rawf(self, tmp_path, rng):
        raw_path = tmp_path / "sensor.rawf"
        write_rawf(raw_path, RawImage(rng.random((32, 32)), (2.0, 1.0, 1.5)))
        out = tmp_path / "noisy.rawf"
        assert run("degrade", raw_path, "--poisson-gaussian", "--seed", 3,
                   "--out", out) == 0
        noisy = read_rawf(out)
        assert noisy.data.shape == (32, 32)
        assert noisy.wb_gains == (2.0, 1.0, 1.5)
        assert read_sidecar(out)["operation"]["kind"] == "poisson_gaussian"

    def test_poisson_gaussian_rejects_png(self, tmp_path, target_png, capsys):
        with pytest.raises(SystemExit) as exc:
            run("degrade", target_png, "--poisson-gaussian", "--out", tmp_path / "x.png")
        assert exc.value.code == 2

    def test_requires_exactly_one_operation(self, tmp_path, target_png):
        with pytest.raises(SystemExit) as exc:
            run("degrade", target_png, "--awgn", 25, "--blur", 1.0,
                "--out", tmp_path / "x.png")
        assert exc.value.code == 2


class TestMeasure:
    def test_identity_pair(self, tmp_path, target_png):
        csv_path = tmp_path / "curve.csv"
        json_path = tmp_path / "summary.json"
        assert run("measure", target_png, target_png, "--csv", csv_path,
                   "--json", json_path) == 0
        doc = json.loads(json_path.read_text())
        assert doc["schema"] == "acutance-bench/1"
        assert doc["acutance"] == pytest.approx(1.0, abs=1e-6)
        assert doc["acutance_loss"] <= 1e-6
        assert doc["psnr"] is None  # infinite PSNR marker

    def test_csv_columns_and_reintegration(self, tmp_path, target_png):
        noisy = tmp_path / "noisy.png"
        assert run("degrade", target_png, "--awgn", 25, "--out", noisy) == 0
        csv_path = tmp_path / "curve.csv"
        json_path = tmp_path / "summary.json"
        assert run("measure", target_png, noisy, "--csv", csv_path,
                   "--json", json_path) == 0

        with open(csv_path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["k", "f_digital", "f_angular", "mtf", "csf_weight"]
        body = np.array(rows[1:], dtype=float)
        assert body.shape[0] == 32  # 64-pixel target -> 32 rings
        np.testing.assert_array_equal(body[:, 0], np.arange(1, 33))

        doc = json.loads(json_path.read_text())
        # the CSV is self-sufficient: A is a dot product of its columns
        reintegrated = float(np.dot(body[:, 3], body[:, 4]))
        assert reintegrated == pytest.approx(doc["acutance"], abs=1e-9)
        assert doc["acutance"] > 1.0
        assert doc["psnr"] is not None

    def test_rawf_pair(self, tmp_path, rng):
        img = generate(DeadLeavesParams(width=64, height=64, seed=6))
        from acutance_bench import mosaic_from_rgb

        ref = mosaic_from_rgb(img, (2.0, 1.0, 1.5))
        ref_path = tmp_path / "ref.rawf"
        write_rawf(ref_path, ref)
        noisy_path = tmp_path / "noisy.rawf"
        assert run("degrade", ref_path, "--poisson-gaussian", "--out", noisy_path) == 0
        json_path = tmp_path / "raw.json"
        assert run("measure", ref_path, noisy_path, "--csv", tmp_path / "raw.csv",
                   "--json", json_path) == 0
        doc = json.loads(json_path.read_text())
        assert doc["n"] == 32  # packed grid of a 64-wide mosaic
        assert doc["acutance"] > 1.0

    def test_plot_output(self, tmp_path, target_png):
        plot = tmp_path / "mtf.png"
        assert run("measure", target_png, target_png, "--csv", tmp_path / "c.csv",
                   "--json", tmp_path / "s.json", "--plot", plot) == 0
        assert plot.stat().st_size > 0

    def test_missing_file_exit_code(self, tmp_path, target_png):
        assert run("measure", target_png, tmp_path / "nope.png",
                   "--csv", tmp_path / "c.csv", "--json", tmp_path / "s.json") == 3

    def test_size_mismatch_exit_code(self, tmp_path, target_png):
        other = tmp_path / "other.png"
        assert run("generate", "--width", 32, "--height", 32, "--out", other) == 0
        assert run("measure", target_png, other, "--csv", tmp_path / "c.csv",
                   "--json", tmp_path / "s.json") == 4

    def test_non_square_exit_code(self, tmp_path):
        a = tmp_path / "a.png"
        assert run("generate", "--width", 32, "--height", 16, "--out", a) == 0
        assert run("measure", a, a, "--csv", tmp_path / "c.csv",
                   "--json", tmp_path / "s.json") == 4


class TestReport:
    def _write_manifest(self, tmp_path, lines):
        path = tmp_path / "manifest.txt"
        path.write_text("\n".join(lines) + "\n")
        return path

    def test_identity_manifest(self, tmp_path, target_png):
        manifest = self._write_manifest(
            tmp_path, [f"{target_png},{target_png},1"]
        )
        out_dir = tmp_path / "report"
        assert run("report", manifest, "--out-dir", out_dir,
                   "--lambdas", "0,10") == 0

        with open(out_dir / "mean_mtf.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["k", "f_digital", "f_angular", "mtf_mean"]
        mean_vals = np.array([r[3] for r in rows[1:]], dtype=float)
        np.testing.assert_allclose(mean_vals, 1.0, atol=1e-9)

        summary = json.loads((out_dir / "summary.json").read_text())
        assert summary["partial"] is False
        assert summary["mean_acutance"] == pytest.approx(1.0, abs=1e-6)
        assert (out_dir / "mean_mtf.png").stat().st_size > 0
        assert (out_dir / "lambda_sweep.png").stat().st_size > 0

    def test_lambda_zero_row_is_pure_fidelity(self, tmp_path, target_png):
        noisy = tmp_path / "noisy.png"
        assert run("degrade", target_png, "--awgn", 25, "--out", noisy) == 0
        manifest = self._write_manifest(tmp_path, [f"{target_png},{noisy},1"])
        out_dir = tmp_path / "report"
        assert run("report", manifest, "--out-dir", out_dir,
                   "--lambdas", "0,10,100") == 0
        with open(out_dir / "lambda_sweep.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["lambda", "total", "fidelity_term", "acutance_term"]
        lam0 = [float(v) for v in rows[1]]
        assert lam0[0] == 0.0
        assert lam0[1] == lam0[2]  # total equals fidelity term exactly
        assert lam0[3] == 0.0
        totals = [float(r[1]) for r in rows[1:]]
        assert totals == sorted(totals)

    def test_missing_files_flagged_partial(self, tmp_path, target_png, capsys):
        manifest = self._write_manifest(
            tmp_path,
            [f"{target_png},{target_png},1",
             f"{target_png},{tmp_path / 'gone.png'},1"],
        )
        out_dir = tmp_path / "report"
        assert run("report", manifest, "--out-dir", out_dir) == 3
        err = capsys.readouterr().err
        assert "gone.png" in err
        summary = json.loads((out_dir / "summary.json").read_text())
        assert summary["partial"] is True
        assert len(summary["missing"]) == 1

    def test_noisy_dataset_mean_acutance_above_one(self, tmp_path):
        lines = []
        for seed in range(10):
            clean = tmp_path / f"c{seed}.png"
            noisy = tmp_path / f"n{seed}.png"
            assert run("generate", "--width", 64, "--height", 64,
                       "--seed", seed, "--out", clean) == 0
            assert run("degrade", clean, "--awgn", 25, "--seed", seed,
                       "--out", noisy) == 0
            lines.append(f"{clean},{noisy},1")
        manifest = self._write_manifest(tmp_path, lines)
        out_dir = tmp_path / "report"
        assert run("report", manifest, "--out-dir", out_dir, "--lambdas", "0") == 0
        summary = json.loads((out_dir / "summary.json").read_text())
        assert summary["n_dead_leaves"] == 10
        assert summary["mean_acutance"] > 1.0
        with open(out_dir / "mean_mtf.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        mean_vals = np.array([r[3] for r in rows[1:]], dtype=float)
        assert mean_vals.mean() > 1.0

    def test_mixed_natural_items(self, tmp_path, target_png, rng):
        nat_clean = tmp_path / "nat.png"
        nat_rest = tmp_path / "nat_r.png"
        from acutance_bench import Image

        base = Image(rng.random((20, 30, 3)))
        write_image(nat_clean, base)
        write_image(nat_rest, base)
        manifest = self._write_manifest(
            tmp_path,
            [f"{target_png},{target_png},1", f"{nat_clean},{nat_rest},0"],
        )
        out_dir = tmp_path / "report"
        assert run("report", manifest, "--out-dir", out_dir, "--lambdas", "0,5") == 0
        summary = json.loads((out_dir / "summary.json").read_text())
        assert summary["n_items"] == 2
        assert summary["n_dead_leaves"] == 1


class TestManifestParsing:
    def test_comments_and_blanks_skipped(self, tmp_path):
        p = tmp_path / "m.txt"
        p.write_text("# comment\n\na.png,b.png,1\nc.png,d.png,0\n")
        items = read_manifest(p)
        assert len(items) == 2
        assert items[0].is_dead_leaves is True
        assert items[1].is_dead_leaves is False

    def test_bad_flag_rejected(self, tmp_path):
        p = tmp_path / "m.txt"
        p.write_text("a.png,b.png,2\n")
        with pytest.raises(ValueError):
            read_manifest(p)

    def test_bad_field_count_rejected(self, tmp_path):
        p = tmp_path / "m.txt"
        p.write_text("a.png,b.png\n")
        with pytest.raises(ValueError):
            read_manifest(p)


def test_console_script_runs():
    result = subprocess.run(
        [sys.executable, "-m", "acutance_bench.cli", "--help"],
        capture_output=True, text=True,
    )
    assert result.returncode == 0
    for cmd in ("generate", "degrade", "measure", "report"):
        assert cmd in result.stdout
