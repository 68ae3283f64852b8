import csv
import hashlib
import json
import subprocess
import sys
import time

import pytest

from np_spectra import NumericFailureError, cli, experiment
from np_spectra.experiment import ConfigError, load_config, worker_count
from np_spectra.verify import run_checks


def _write(tmp_path, config, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config, indent=2))
    return path


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


CIRCLE = {"geometry": {"type": "circle", "parameters": {"radius": 1.0}}, "grid_sizes": [16],
          "operations": ["spectrum"], "operator": "np"}


def test_circle_spectrum_run(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["run", str(_write(tmp_path, CIRCLE)), "--output-dir", str(out)]) == 0
    rows = _rows(out / "spectrum_N16.csv")
    assert rows[0] == ["j", "re_lambda", "im_lambda", "abs_lambda", "s_j"]
    assert [float(v) for v in rows[1]] == pytest.approx([1, 0.5, 0, 0.5, 0.5], abs=1e-14)
    assert len(rows) == 17
    for row in rows[2:]:
        assert [float(v) for v in row[1:]] == pytest.approx([0, 0, 0, 0], abs=1e-14)


def test_manifest_lists_every_file_with_hashes(tmp_path):
    out = tmp_path / "out"
    cli.main(["run", str(_write(tmp_path, CIRCLE)), "--output-dir", str(out)])
    manifest = json.loads((out / "manifest.json").read_text())
    listed = {e["path"] for e in manifest["files"]}
    on_disk = {p.name for p in out.iterdir()} - {"manifest.json"}
    assert listed == on_disk
    for entry in manifest["files"]:
        data = (out / entry["path"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == entry["sha256"]
        assert len(data) == entry["bytes"]


def test_ellipse_decay_is_flagged_non_power_law(tmp_path):
    config = {"geometry": {"type": "ellipse", "parameters": {"a": 2.0, "b": 1.0}},
              "grid_sizes": [256, 512], "operations": ["decay"], "decay": {"window": [4, 40]}}
    out = tmp_path / "out"
    assert cli.main(["run", str(_write(tmp_path, config)), "--output-dir", str(out)]) == 0
    decay = json.loads((out / "decay.json").read_text())
    assert decay["power_law_plausible"] is False
    assert decay["q_predicted"] is None and decay["consistent"] is None
    assert (out / "spectrum_N256.csv").exists() and (out / "spectrum_N512.csv").exists()


WEIERSTRASS = {
    "geometry": {"type": "weierstrass", "regularity": {"k": 1, "alpha": 0.5}, "levels": 6,
                 "amplitude": 0.2},
    "grid_sizes": [256, 512], "levels": [5, 6], "operations": ["probes"], "seed": 7,
    "probes": {"kernel_singularity": {"pair_sample": 512}},
}


def test_weierstrass_kernel_singularity_run(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["run", str(_write(tmp_path, WEIERSTRASS)), "--output-dir", str(out),
                     "--strict"])
    assert code == 0
    (report,) = json.loads((out / "probes.json").read_text())
    assert report["probe_name"] == "kernel_singularity" and report["pass"] is True
    assert report["predicted_exponent"] == pytest.approx(-0.5)
    assert _rows(out / "probe_kernel_singularity.csv")[0] == ["separation", "measured", "bound"]


def test_runs_are_byte_identical(tmp_path):
    config = dict(WEIERSTRASS, operations=["all"],
                  probes={"kernel_singularity": {"pair_sample": 256},
                          "holder_difference": {"triple_sample": 200}})
    path = _write(tmp_path, config)
    digests = []
    for name in ("a", "b"):
        cli.main(["run", str(path), "--output-dir", str(tmp_path / name)])
        digests.append((tmp_path / name / "manifest.json").read_bytes())
    assert digests[0] == digests[1]


def test_svg_output(tmp_path):
    config = dict(CIRCLE, formats=["csv", "json", "svg"])
    out = tmp_path / "out"
    cli.main(["run", str(_write(tmp_path, config)), "--output-dir", str(out)])
    assert (out / "spectrum.svg").read_text().lstrip().startswith("<?xml")


@pytest.mark.parametrize("text,line", [
    ('{\n  "geometry": {"type": "circle"},\n  "grid_sizes": [16, 8]\n}', 3),
    ('{\n  "geometry": {"type": "circle"},\n  "grid_sizes": [16],\n  "rule": "nope"\n}', 4),
    ('{\n  "geometry": {"type": "circle"},\n  "grid_sizes": [16],\n}', 4),
])
def test_config_errors_are_line_anchored(tmp_path, capsys, text, line):
    path = tmp_path / "bad.json"
    path.write_text(text)
    assert cli.main(["run", str(path)]) == 2
    assert f"line {line}" in capsys.readouterr().err


def test_sampling_probe_requires_seed(tmp_path):
    config = {k: v for k, v in WEIERSTRASS.items() if k != "seed"}
    with pytest.raises(ConfigError, match="seed"):
        load_config(_write(tmp_path, config))


def test_geometry_file_reference(tmp_path):
    (tmp_path / "g.json").write_text(json.dumps({"type": "ellipse",
                                                 "parameters": {"a": 2.0, "b": 1.0}}))
    config = load_config(_write(tmp_path, {"geometry": {"file": "g.json"}, "grid_sizes": [16]}))
    assert config["geometry"]["type"] == "ellipse"


def test_numeric_failure_exit_code(tmp_path, monkeypatch, capsys):
    def broken(matrix):
        raise NumericFailureError("non-finite entries", matrix.metadata)

    monkeypatch.setattr(experiment, "eigen_spectrum", broken)
    assert cli.main(["run", str(_write(tmp_path, CIRCLE)), "--output-dir",
                     str(tmp_path / "o")]) == 3
    assert "numeric failure" in capsys.readouterr().err


def test_strict_mode_exit_code(tmp_path):
    # a decay fit on 8 nodes has too few points; under --strict that is a failure
    config = dict(CIRCLE, grid_sizes=[8], operations=["decay"])
    path = _write(tmp_path, config)
    assert cli.main(["run", str(path), "--output-dir", str(tmp_path / "a")]) == 0
    assert cli.main(["run", str(path), "--strict", "--output-dir", str(tmp_path / "b")]) == 4
    assert "error" in json.loads((tmp_path / "b" / "decay.json").read_text())


def test_verify_quick(tmp_path):
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "np_spectra.cli", "verify", "--quick",
                           "--output-dir", str(tmp_path)], capture_output=True, text=True)
    assert time.perf_counter() - start < 5.0
    assert proc.returncode == 0, proc.stderr
    assert "all checks passed" in proc.stdout
    payload = json.loads((tmp_path / "verify_results.json").read_text())
    assert payload["all_pass"] is True
    assert [c["name"] for c in payload["checks"]] == ["circle"]


def test_corrupted_kernel_sign_fails_the_ellipse_check(monkeypatch):
    import np_spectra.discretize as disc

    monkeypatch.setattr(disc, "sphere_area", lambda d: -2 * 3.141592653589793 * (d / d))
    (result,) = run_checks(["ellipse"])
    assert not result.passed


def test_corrupted_kernel_sign_exits_four(monkeypatch, tmp_path):
    import np_spectra.discretize as disc
    import np_spectra.verify as ver

    monkeypatch.setattr(disc, "sphere_area", lambda d: -2 * 3.141592653589793)
    monkeypatch.setattr(ver, "QUICK_CHECKS", ("ellipse",))
    assert cli.main(["verify", "--quick", "--output-dir", str(tmp_path)]) == 4


def test_geometry_command(tmp_path, capsys):
    spec = tmp_path / "e.json"
    spec.write_text(json.dumps({"type": "ellipse", "parameters": {"a": 2.0, "b": 1.0}}))
    assert cli.main(["geometry", str(spec), "--sample", "4"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "t,x,y,nx,ny"
    assert [float(v) for v in lines[1].split(",")] == pytest.approx([0, 2, 0, 1, 0], abs=1e-15)
    assert [float(v) for v in lines[2].split(",")] == pytest.approx([0.25, 0, 1, 0, 1], abs=1e-15)


def test_geometry_command_on_surface(tmp_path):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"type": "perturbed_sphere", "parameters": {"coeffs": []}}))
    out = tmp_path / "s.csv"
    assert cli.main(["geometry", str(spec), "--sample", "32", "--output", str(out)]) == 0
    rows = _rows(out)
    assert rows[0] == ["u", "v", "x", "y", "z", "nx", "ny", "nz"] and len(rows) == 33
    for row in rows[1:]:
        x = [float(v) for v in row[2:5]]
        assert sum(c * c for c in x) == pytest.approx(1.0, abs=1e-14)


def test_thread_setting(monkeypatch):
    monkeypatch.setenv("NP_SPECTRA_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("NP_SPECTRA_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("NP_SPECTRA_THREADS", "-1")
    with pytest.raises(Exception):
        worker_count()


def test_run_with_thread_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("NP_SPECTRA_THREADS", "1")
    assert cli.main(["run", str(_write(tmp_path, CIRCLE)), "--output-dir", str(tmp_path / "o")]) == 0


def test_shipped_configs_validate():
    from pathlib import Path

    configs = sorted((Path(__file__).parent.parent / "configs").glob("*.json"))
    assert len(configs) >= 4
    for path in configs:
        load_config(path)
