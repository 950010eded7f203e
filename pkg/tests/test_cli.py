import hashlib
import json
import subprocess
import sys

import pytest

from ssfkit import cli

WELL = """\
[potential]
segments =
    constant 0 1 value=-4

[numerics]
tol = 1e-10
"""


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_ssf_zero_potential_all_zero(tmp_path):
    out = tmp_path / "o"
    code = cli.main(["ssf", "--out", str(out), "--set", "experiment.lambda_points=120",
                     "--set", "experiment.r=1,10,100"])
    assert code == 0
    files = sorted(p.name for p in out.glob("*.csv"))
    assert files == ["ssf_box_r100p0.csv", "ssf_box_r10p0.csv", "ssf_box_r1p0.csv", "ssf_halfline.csv"]
    for f in out.glob("*.csv"):
        rows = [ln.split(",") for ln in f.read_text().splitlines() if ln and not ln.startswith("#")][1:]
        assert len(rows) == 120
        assert all(float(r[1]) == 0.0 for r in rows)


def test_spectrum_summary(tmp_path, capsys):
    code = cli.main(["spectrum", "--config", write(tmp_path, WELL), "--out", str(tmp_path / "o")])
    assert code == 0
    out = capsys.readouterr().out
    assert "bound_states: 1" in out
    assert "bargmann_bound: 2.0" in out
    assert "levinson_count: 1" in out
    assert "resonance: NonResonant" in out
    summary = json.loads((tmp_path / "o" / "spectrum.json").read_text())
    assert summary["bound_states"] == 1 and summary["levinson_count"] == 1


def test_negative_tolerance_is_a_line_numbered_config_error(tmp_path, capsys):
    path = write(tmp_path, WELL.replace("tol = 1e-10", "tol = -1e-10"))
    assert cli.main(["spectrum", "--config", path, "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert f"{path}:6:" in err and "tol must be > 0" in err


@pytest.mark.parametrize(
    "text,line,fragment",
    [
        (WELL + "bogus = 3\n", 7, "unknown key"),
        (WELL.replace("constant 0 1 value=-4", "constant 0 1 depth=4"), 3, "unexpected"),
        (WELL.replace("constant 0 1 value=-4", "constant 0 inf value=-4"), 3, "infinite"),
        (WELL + "[extra]\nx = 1\n", 7, "unknown section"),
        ("[numerics]\ntol = 1e-10\ntol = 2e-10\n", 3, "already exists"),
    ],
)
def test_config_errors(tmp_path, capsys, text, line, fragment):
    path = write(tmp_path, text)
    assert cli.main(["phase", "--config", path, "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert f":{line}:" in err and fragment in err


def test_bad_override_is_config_error(tmp_path, capsys):
    assert cli.main(["phase", "--set", "numerics.nope=1", "--out", str(tmp_path)]) == 2
    assert "--set numerics.nope=1" in capsys.readouterr().err


def test_numerical_error_exit_code(tmp_path, capsys):
    slow = "[potential]\nsegments =\n    exponential 0 inf amplitude=-1 rate=1e-4\n"
    code = cli.main(["phase", "--config", write(tmp_path, slow), "--out", str(tmp_path / "o")])
    assert code == 3
    assert "TailTooSlowError" in capsys.readouterr().err


def test_outputs_deterministic_and_manifest(tmp_path):
    path = write(tmp_path, WELL)
    common = ["--config", path, "--set", "experiment.lambda_points=150", "--set", "experiment.r=5"]
    assert cli.main(["ssf", "--out", str(tmp_path / "a")] + common) == 0
    assert cli.main(["ssf", "--out", str(tmp_path / "b"), "--threads", "3"] + common) == 0
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()
    manifest = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert manifest["subcommand"] == "ssf"
    assert manifest["tolerances"]["tol"] == 1e-10
    assert manifest["config"]["experiment"]["r"] == "5"
    for name, digest in manifest["outputs"].items():
        assert hashlib.sha256((tmp_path / "a" / name).read_bytes()).hexdigest() == digest


@pytest.mark.parametrize(
    "sub,sets,expect",
    [
        ("phase", ["experiment.k_points=20"], ["phase_curve.csv"]),
        ("weak", ["experiment.r_list=10,20"], ["weak.csv"]),
        ("cesaro", ["experiment.lambdas=1", "experiment.R_list=20,40"], ["cesaro_lambda1p0.csv"]),
        ("floor-lemma", ["experiment.floor_R=10,100", "experiment.lemma_r=10,20"], ["floor_average.csv"]),
        ("trace-check", ["experiment.n_list=200,400"], ["trace_residual_r10p0.csv"]),
    ],
)
def test_each_subcommand_runs(tmp_path, sub, sets, expect):
    args = [sub, "--config", write(tmp_path, WELL), "--out", str(tmp_path / "o")]
    for s in sets:
        args += ["--set", s]
    assert cli.main(args) == 0
    for name in expect:
        text = (tmp_path / "o" / name).read_text()
        assert text.startswith("#")
    assert (tmp_path / "o" / "manifest.json").exists()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "ssfkit.cli", "spectrum", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "bound_states: 0" in proc.stdout


def test_tabulated_and_power_segments(tmp_path):
    text = ("[potential]\nsegments =\n    tabulated 0 2 xs=0;1;2 values=-1;-2;0\n"
            "    power 2 3 coeff=-0.5 alpha=0.5 side=left\n")
    cfg = cli.RunConfig(write(tmp_path, text))
    V = cfg.potential
    assert V(0.5) == pytest.approx(-1.5)
    assert V(2.25) == pytest.approx(-1.0)
