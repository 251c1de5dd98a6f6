import json
import os
from pathlib import Path

import numpy as np
import pytest

from granuflow.cli import load_profile, main, save_profile, worker_count
from granuflow.model import State
from granuflow.profiles import Profile


@pytest.fixture()
def prof_file(tmp_path):
    path = tmp_path / "prof.json"
    path.write_text(json.dumps({
        "far_left": [0.02, 1.02],
        "jumps": [[0.0, 0.04, 0.96], [0.5, 0.02, 1.04], [1.0, 0.02, 1.02]]}))
    return str(path)


def test_riemann_subcommand(capsys):
    rc = main(["riemann", "--left", "0.01", "1.1", "--right", "0.02", "0.9"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert {w["family"] for w in out["waves"]} <= {1, 2}
    assert out["compose_residual"] < 1e-10


def test_profile_roundtrip(tmp_path, prof_file):
    prof = load_profile(prof_file)
    out = tmp_path / "copy.json"
    save_profile(prof, out)
    again = load_profile(str(out))
    assert again.states == prof.states
    assert np.all(again.xs == prof.xs)


def test_input_errors(tmp_path, capsys):
    assert main(["simulate", str(tmp_path / "missing.json"),
                 "--out", str(tmp_path / "o")]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"far_left": [0.02, 1.02], "jumps": [[0.5, 0.04, 0.96], [0.5, 0.02, 1.04]]}')
    assert main(["simulate", str(bad), "--out", str(tmp_path / "o")]) == 2
    assert main(["no-such-command"]) == 2


def test_simulate_outputs_and_determinism(tmp_path, prof_file):
    out1, out2 = str(tmp_path / "r1"), str(tmp_path / "r2")
    args = ["simulate", prof_file, "--eps", "0.002", "--horizon", "0.5",
            "--snapshots", "0.25", "--seed", "3"]
    assert main(args + ["--out", out1]) == 0
    assert main(args + ["--out", out2]) == 0
    for name in ("interactions.csv", "functionals.csv", "fronts.csv"):
        a = Path(out1, name).read_bytes()
        b = Path(out2, name).read_bytes()
        assert a == b, f"{name} not byte-identical"
    head = Path(out1, "interactions.csv").read_text().splitlines()[0]
    assert head.startswith("t,x,")
    side = json.loads(Path(out1, "config.json").read_text())
    assert side["version"].startswith("granuflow-")
    snaps = sorted(os.listdir(Path(out1, "snapshots")))
    assert any(s.endswith(".csv") for s in snaps)
    assert any(s.endswith(".json") for s in snaps)


def test_balance_subcommand(tmp_path, prof_file):
    out = str(tmp_path / "bal")
    rc = main(["balance", prof_file, "--eps", "0.002", "--dt", "0.1",
               "--horizon", "0.3", "--out", out])
    assert rc == 0
    steps = Path(out, "steps.csv").read_text().splitlines()
    assert steps[0] == "k,t,G_pre,G_post,V_pre,V_post"
    assert len(steps) == 4


def test_calibrate_subcommand(tmp_path):
    out = str(tmp_path / "cal")
    rc = main(["calibrate", "--samples", "1200", "--m-star", "0.15", "--out", out])
    assert rc == 0
    kap = json.loads(Path(out, "kappas.json").read_text())
    assert kap["kG"] > max(kap["k1a1"], kap["k2a1"])
    cert = json.loads(Path(out, "certificate.json").read_text())
    assert cert["all_green"]


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("GRANUFLOW_THREADS", "4")
    assert worker_count() == 4
    monkeypatch.setenv("GRANUFLOW_THREADS", "junk")
    assert worker_count() == 1


def test_functionals_subcommand(tmp_path, prof_file):
    r1 = str(tmp_path / "a")
    r2 = str(tmp_path / "b")
    base = ["simulate", prof_file, "--eps", "0.002", "--horizon", "0.4",
            "--snapshots", "0.2"]
    assert main(base + ["--out", r1]) == 0
    assert main(base + ["--out", r2]) == 0
    out = str(tmp_path / "func")
    rc = main(["functionals", "--u-series", f"{r1}/snapshots",
               "--v-series", f"{r2}/snapshots", "--eps", "0.002", "--out", out])
    assert rc == 0
    rows = Path(out, "functionals_series.csv").read_text().splitlines()
    assert rows[0] == "t,V_u,Q_u,G_u,V_v,Q_v,G_v,Phi"
    assert len(rows) >= 3


def test_compare_subcommand(tmp_path, prof_file):
    prof_v = tmp_path / "prof_v.json"
    prof_v.write_text(json.dumps({
        "far_left": [0.02, 1.02],
        "jumps": [[0.0, 0.042, 0.965], [0.5, 0.018, 1.035], [1.0, 0.02, 1.02]]}))
    out = str(tmp_path / "cmp")
    rc = main(["compare", prof_file, str(prof_v), "--eps", "0.002",
               "--dt", "0", "--horizon", "0.3", "--m-star", "0.12",
               "--snapshots", "0.15,0.3", "--out", out])
    assert rc == 0
    rows = Path(out, "phi_series.csv").read_text().splitlines()
    assert rows[0] == "t,V_u,Q_u,G_u,V_v,Q_v,G_v,Phi"
    assert len(rows) >= 3


def test_verify_subcommand(tmp_path):
    out = str(tmp_path / "ver")
    rc = main(["verify", "--suite", "appendixB", "--samples", "2000", "--out", out])
    assert rc == 0
    rows = Path(out, "verify.csv").read_text().splitlines()
    assert rows[0] == "estimate,n,sup_ratio,slope,r2,passed"
    blob = json.loads(Path(out, "verify.json").read_text())
    assert "appendixB-derivatives" in blob


def test_verify_subcommand_threaded(tmp_path, monkeypatch):
    monkeypatch.setenv("GRANUFLOW_THREADS", "2")
    out = str(tmp_path / "ver2")
    rc = main(["verify", "--suite", "timestep", "--samples", "3000", "--out", out])
    assert rc == 0
