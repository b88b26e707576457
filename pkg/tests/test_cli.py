"""Exit codes, config handling, and artifact formats of the CLI."""

import csv
import json
import shutil
import subprocess
import sys

import numpy as np
import pytest

from spectral_pe import load_graph, load_spectrum_csv
from spectral_pe.cli import main


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


class TestArgumentHandling:
    def test_unknown_subcommand_is_hard_error(self, capsys):
        assert main(["frobnicate"]) == 1
        capsys.readouterr()

    def test_missing_subcommand_is_hard_error(self, capsys):
        assert main([]) == 1
        capsys.readouterr()

    def test_help_exits_clean(self, capsys):
        assert main(["--help"]) == 0
        assert "usage: spectral-pe" in capsys.readouterr().out

    def test_unknown_config_key_is_hard_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"nodes": 50})
        assert main(["gen", "--config", cfg]) == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_config_file_is_hard_error(self, capsys):
        assert main(["gen", "--config", "/nonexistent/config.json"]) == 1
        assert "error:" in capsys.readouterr().err


class TestGen:
    def test_writes_loadable_graph(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"n": 40, "avg_degree": 4.0,
                                      "feature_mode": "binary",
                                      "feature_dim": 3})
        out = str(tmp_path / "graph.txt")
        assert main(["gen", "--config", cfg, "--out", out]) == 0
        assert "n=40" in capsys.readouterr().out
        graph = load_graph(out)
        assert graph.n == 40
        assert graph.features.shape == (40, 3)
        assert graph.labels.shape == (40,)

    def test_seed_override_controls_output(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"n": 40, "avg_degree": 4.0})
        a, b, c = (str(tmp_path / name) for name in ("a", "b", "c"))
        for out, seed in ((a, "1"), (b, "1"), (c, "2")):
            assert main(["gen", "--config", cfg, "--out", out,
                         "--seed", seed]) == 0
        capsys.readouterr()
        assert open(a, "rb").read() == open(b, "rb").read()
        assert open(a, "rb").read() != open(c, "rb").read()

    def test_preferential_attachment_family(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"family": "pa", "n": 30, "k": 2,
                                      "m_edges": 2})
        out = str(tmp_path / "pa.txt")
        assert main(["gen", "--config", cfg, "--out", out]) == 0
        capsys.readouterr()
        assert load_graph(out).n == 30


class TestSpectrum:
    def test_round_trips_through_csv(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"n": 30, "avg_degree": 4.0})
        out = str(tmp_path / "spectrum.csv")
        assert main(["spectrum", "--config", cfg, "--out", out]) == 0
        capsys.readouterr()
        dec = load_spectrum_csv(out)
        assert dec.n == 30
        assert dec.eigenvalues.shape == (30,)
        assert (np.diff(dec.eigenvalues) >= -1e-12).all()

    def test_flat_and_sectioned_configs_agree(self, tmp_path, capsys):
        flat = write_config(tmp_path, {"n": 25, "avg_degree": 4.0}, "flat.json")
        sectioned = write_config(
            tmp_path,
            {"spectrum": {"n": 25, "avg_degree": 4.0}, "gen": {"n": 999}},
            "sectioned.json")
        out_a = str(tmp_path / "a.csv")
        out_b = str(tmp_path / "b.csv")
        assert main(["spectrum", "--config", flat, "--out", out_a]) == 0
        assert main(["spectrum", "--config", sectioned, "--out", out_b]) == 0
        capsys.readouterr()
        assert open(out_a).read() == open(out_b).read()


class TestEncode:
    def test_llpe_matrix_with_header(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"n": 30, "avg_degree": 4.0,
                                      "encoding": "llpe:M=8,d=4"})
        out = str(tmp_path / "enc.csv")
        assert main(["encode", "--config", cfg, "--out", out]) == 0
        capsys.readouterr()
        with open(out, newline="", encoding="utf-8") as fh:
            records = list(csv.reader(fh))
        assert records[0] == ["pe0", "pe1", "pe2", "pe3"]
        assert len(records) == 31

    def test_theta_checkpoint_reused(self, tmp_path, capsys):
        theta = tmp_path / "theta.csv"
        np.savetxt(theta, np.zeros((9, 4)), delimiter=",")
        cfg = write_config(tmp_path, {"n": 20, "avg_degree": 3.0,
                                      "encoding": "llpe:M=8,d=4",
                                      "theta": str(theta)})
        out = str(tmp_path / "enc.csv")
        assert main(["encode", "--config", cfg, "--out", out]) == 0
        capsys.readouterr()
        values = np.loadtxt(out, delimiter=",", skiprows=1)
        assert values.shape == (20, 4)
        assert np.all(values == 0.0)


class TestDistanceAndCommunity:
    def test_distance_writes_matrix(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"n": 20, "avg_degree": 4.0,
                                      "kernel": "diffusion", "t": 1.0})
        out = str(tmp_path / "dist.csv")
        assert main(["distance", "--config", cfg, "--out", out]) == 0
        capsys.readouterr()
        values = np.loadtxt(out, delimiter=",")
        assert values.shape == (20, 20)
        assert np.allclose(np.diag(values), 0.0)

    def test_community_reports_accuracy(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"n": 60, "h": 0.9, "avg_degree": 8.0})
        out = str(tmp_path / "labels.csv")
        assert main(["community", "--config", cfg, "--out", out]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["k"] == 2
        assert report["accuracy"] >= 0.8
        labels = [int(line) for line in open(out, encoding="utf-8")]
        assert len(labels) == 60
        assert set(labels) <= {0, 1}


class TestTrain:
    def test_writes_result_json_and_theta(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"n": 120, "avg_degree": 6.0, "h": 1.0,
                                      "encoding": "llpe:M=8,d=4",
                                      "hidden": 8, "epochs": 15,
                                      "patience": 15})
        out = str(tmp_path / "result.json")
        assert main(["train", "--config", cfg, "--out", out]) == 0
        assert "test_accuracy=" in capsys.readouterr().out
        payload = json.load(open(out, encoding="utf-8"))
        assert 0.0 <= payload["test_accuracy"] <= 1.0
        assert len(payload["quintile_accuracy"]) == 5
        theta = np.loadtxt(payload["theta"], delimiter=",", ndmin=2)
        assert theta.shape == (9, 4)


class TestSweepExitCodes:
    def test_clean_sweep_exits_zero(self, tmp_path, capsys):
        out = str(tmp_path / "sweep")
        cfg = write_config(tmp_path, {"sweep": {
            "n": 60, "avg_degree": 6.0, "homophily_grid": [0.5],
            "encodings": ["nope"], "hidden": 4, "epochs": 2, "patience": 2,
            "seeds": [0], "out": out}})
        assert main(["sweep", "--config", cfg]) == 0
        capsys.readouterr()
        with open(out + ".csv", newline="", encoding="utf-8") as fh:
            assert len(list(csv.DictReader(fh))) == 1

    def test_soft_cell_failure_exits_two(self, tmp_path, capsys):
        out = str(tmp_path / "sweep")
        cfg = write_config(tmp_path, {
            "n": 60, "avg_degree": 6.0, "homophily_grid": [0.5],
            "encodings": ["nope", "lpe-fk:k=60"], "hidden": 4, "epochs": 2,
            "patience": 2, "seeds": [0], "out": out})
        assert main(["sweep", "--config", cfg]) == 2
        assert "1 failed" in capsys.readouterr().out
        with open(out + ".csv", newline="", encoding="utf-8") as fh:
            records = list(csv.DictReader(fh))
        assert sum(1 for r in records if r["error"]) == 1

    def test_seed_override_narrows_grid_verbs(self, tmp_path, capsys):
        out = str(tmp_path / "sweep")
        cfg = write_config(tmp_path, {
            "n": 60, "avg_degree": 6.0, "homophily_grid": [0.5],
            "encodings": ["nope"], "hidden": 4, "epochs": 2, "patience": 2,
            "seeds": [0, 1, 2], "out": out})
        assert main(["sweep", "--config", cfg, "--seed", "7"]) == 0
        capsys.readouterr()
        with open(out + ".csv", newline="", encoding="utf-8") as fh:
            records = list(csv.DictReader(fh))
        assert [r["seed"] for r in records] == ["7"]


class TestRademacherCommand:
    def test_single_eigenvalue_closed_form(self, tmp_path, capsys):
        lam = tmp_path / "lambdas.csv"
        lam.write_text("2.0\n", encoding="utf-8")
        cfg = write_config(tmp_path, {"lambdas": str(lam), "radius": 1.0,
                                      "order": 1, "num_sigma": 4})
        out = str(tmp_path / "rad.json")
        assert main(["rademacher", "--config", cfg, "--out", out]) == 0
        printed = json.loads(capsys.readouterr().out)
        payload = json.load(open(out, encoding="utf-8"))
        assert printed == payload
        assert payload["estimate"] == pytest.approx(np.sqrt(2.0), abs=0)
        assert payload["num_eigenvalues"] == 1
        assert payload["contained"] is True

    def test_sbm_default_contained(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"n": 100, "avg_degree": 6.0,
                                      "order": 16, "num_sigma": 400})
        out = str(tmp_path / "rad.json")
        assert main(["rademacher", "--config", cfg, "--out", out]) == 0
        capsys.readouterr()
        assert json.load(open(out, encoding="utf-8"))["contained"] is True


class TestBenchAndSensitivity:
    def test_bench_writes_rows(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"n_grid": [60], "k_grid": [2],
                                      "avg_degree": 6.0, "repeats": 1})
        out = str(tmp_path / "bench")
        assert main(["bench", "--config", cfg, "--out", out]) == 0
        assert "n=60 k=2" in capsys.readouterr().out
        with open(out + ".csv", newline="", encoding="utf-8") as fh:
            assert len(list(csv.DictReader(fh))) == 1

    def test_sensitivity_writes_rows(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {
            "n": 100, "avg_degree": 6.0, "epochs": 3, "patience": 3,
            "hidden": 4, "seeds": [0], "m_grid": [4], "k_grid": [2],
            "llpe_dim": 4, "llpe_order": 8})
        out = str(tmp_path / "sens")
        assert main(["sensitivity", "--config", cfg, "--out", out]) == 0
        capsys.readouterr()
        with open(out + ".csv", newline="", encoding="utf-8") as fh:
            records = list(csv.DictReader(fh))
        assert [r["sweep"] for r in records] == ["M", "k"]


def test_installed_entry_point(tmp_path):
    exe = shutil.which("spectral-pe")
    assert exe is not None
    out = str(tmp_path / "spectrum.csv")
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"n": 20, "avg_degree": 3.0}), encoding="utf-8")
    proc = subprocess.run([exe, "spectrum", "--config", str(cfg),
                           "--out", out],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    assert load_spectrum_csv(out).n == 20


def test_module_invocation():
    proc = subprocess.run([sys.executable, "-m", "spectral_pe.cli", "--help"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "spectral-pe" in proc.stdout
