import json
import subprocess
import sys

import pytest

from dicode.cli import main

BERN = {"family": "bernoulli", "a": 2.0, "k_max": 6}
IDENT = {"inputs": ["a", "b"], "matrix": [[1, 0], [0, 1]]}


@pytest.fixture
def bern_file(tmp_path):
    p = tmp_path / "bern.json"
    p.write_text(json.dumps(BERN))
    return p


def read_outputs(out_dir, skip=("manifest.json",)):
    return {f.name: f.read_bytes() for f in sorted(out_dir.iterdir())
            if f.name not in skip}


def test_channel_check(bern_file, tmp_path, capsys):
    rc = main(["channel", "check", "--channel", str(bern_file),
               "--out", str(tmp_path / "chk")])
    assert rc == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["inputs"] == 8
    assert summary["outputs"] == 2


def test_channel_check_rejects_bad_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"inputs": ["a"], "matrix": [[0.6, 0.5]]}))
    rc = main(["channel", "check", "--channel", str(bad), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "error code=VALIDATION" in capsys.readouterr().err


def test_size_guard_exit_code(tmp_path, capsys):
    big = tmp_path / "big.json"
    import numpy as np
    m = np.full((70, 2), 0.5)
    m[:, 1] = np.linspace(0.01, 0.99, 70)
    m[:, 0] = 1 - m[:, 1]
    big.write_text(json.dumps({"inputs": [str(i) for i in range(70)],
                               "matrix": m.tolist()}))
    rc = main(["geometry", "--channel", str(big), "--task", "packing",
               "--mode", "exact", "--radii", "0.1", "--out", str(tmp_path / "o")])
    assert rc == 3
    assert "error code=SIZE_GUARD" in capsys.readouterr().err


def test_construct_then_evaluate(bern_file, tmp_path, capsys):
    out = tmp_path / "run"
    rc = main(["construct", "--channel", str(bern_file), "--n", "8",
               "--E", "1e-5", "--t", "0.5", "--out", str(out)])
    assert rc == 0
    summary = json.loads((out / "construct_summary.json").read_text())
    assert summary["rate_meets_floor"]
    rc = main(["evaluate", "--channel", str(bern_file), "--code",
               str(out / "code.json"), "--method", "exact",
               "--out", str(tmp_path / "ev")])
    assert rc == 0
    report = json.loads((tmp_path / "ev" / "error_report.json").read_text())
    assert report["method"] == "exact-dp"
    assert report["lambda1"]["hi"] <= 1.0


def test_trivial_regime_warning(bern_file, tmp_path, capsys):
    rc = main(["construct", "--channel", str(bern_file), "--n", "6",
               "--E", "0.01", "--t", "0.5", "--out", str(tmp_path / "run")])
    assert rc == 0
    assert "trivial regime" in capsys.readouterr().err


def test_reruns_byte_identical(bern_file, tmp_path, capsys):
    args_base = ["bounds", "--channel", str(bern_file),
                 "--formula", "thm1_lower", "thm2_upper",
                 "--E-axis", "1e-6:1e-4:6:log", "--n-axis", "1e6:1e6:1",
                 "--t", "0.5", "--svg"]
    outs = []
    for i, jobs in enumerate(("1", "3")):
        out = tmp_path / f"b{i}"
        assert main(args_base + ["--out", str(out), "--jobs", jobs]) == 0
        outs.append(read_outputs(out))
    assert outs[0] == outs[1]

    # evaluate reruns with equal seeds match byte for byte
    run = tmp_path / "code"
    main(["construct", "--channel", str(bern_file), "--n", "6", "--E", "1e-5",
          "--t", "0.5", "--out", str(run)])
    reports = []
    for i in range(2):
        out = tmp_path / f"mc{i}"
        assert main(["evaluate", "--channel", str(bern_file), "--code",
                     str(run / "code.json"), "--method", "mc", "--trials", "400",
                     "--seed", "11", "--out", str(out)]) == 0
        reports.append(read_outputs(out))
    assert reports[0] == reports[1]


def test_seed_env_fallback(bern_file, tmp_path, monkeypatch):
    run = tmp_path / "code"
    main(["construct", "--channel", str(bern_file), "--n", "6", "--E", "1e-5",
          "--t", "0.5", "--out", str(run)])
    monkeypatch.setenv("DIRL_SEED", "11")
    out_env = tmp_path / "env"
    main(["evaluate", "--channel", str(bern_file), "--code", str(run / "code.json"),
          "--method", "mc", "--trials", "400", "--out", str(out_env)])
    monkeypatch.delenv("DIRL_SEED")
    out_flag = tmp_path / "flag"
    main(["evaluate", "--channel", str(bern_file), "--code", str(run / "code.json"),
          "--method", "mc", "--trials", "400", "--seed", "11", "--out", str(out_flag)])
    assert read_outputs(out_env) == read_outputs(out_flag)


def test_fig2_recipe_and_svg_regression(tmp_path, capsys):
    import hashlib

    digests = []
    for i in range(2):
        out = tmp_path / f"fig{i}"
        rc = main(["bounds", "--recipe", "fig2", "--n-axis", "1e3:1e9:7:log",
                   "--svg", "--out", str(out)])
        assert rc == 0
        svg = (out / "bounds.svg").read_text()
        path_data = "".join(line for line in svg.splitlines() if "<path" in line)
        digests.append(hashlib.sha256(path_data.encode()).hexdigest())
        assert "trend_lower" in (out / "bounds.csv").read_text()
    assert digests[0] == digests[1]


def test_geometry_dimension_command(bern_file, tmp_path, capsys):
    rc = main(["geometry", "--channel", str(bern_file), "--task", "dimension",
               "--radii", "0.4,0.2,0.1,0.05,0.025", "--out", str(tmp_path / "g")])
    assert rc == 0
    text = (tmp_path / "g" / "geometry.csv").read_text()
    assert text.startswith("radius,log2_count,slope")


def test_truncation_scale_warning(bern_file, tmp_path, capsys):
    rc = main(["geometry", "--channel", str(bern_file), "--task", "covering",
               "--embedding", "raw", "--radii", "0.001",
               "--out", str(tmp_path / "g")])
    assert rc == 0
    assert "truncation scale" in capsys.readouterr().err


def test_cli_subprocess_smoke(bern_file, tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "dicode.cli", "construct", "--channel",
         str(bern_file), "--n", "6", "--E", "1e-5", "--t", "0.5",
         "--out", str(tmp_path / "sp")],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert (tmp_path / "sp" / "code.json").exists()
    assert (tmp_path / "sp" / "manifest.json").exists()
