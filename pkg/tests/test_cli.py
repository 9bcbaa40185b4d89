import json

import numpy as np
import pytest
from click.testing import CliRunner

from weylsim.cli import emit_decay_csv, main, read_decay_csv
from weylsim.wrb import BenchmarkRecord
from weylsim.weyl_core import WeylIndex


def _write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def _run(args, **kw):
    res = CliRunner().invoke(main, args, catch_exceptions=False, **kw)
    return res


def _strip_times(env):
    env = json.loads(json.dumps(env))
    env["provenance"].pop("wall_time")
    env["results"].pop("wall_time", None)
    return env


@pytest.fixture
def files(tmp_path):
    circ = {"d": 2, "n": 2, "layers": [
        {"kind": "builtin", "support": [0], "params": {"name": "rotation_y:0.7"}},
        {"kind": "builtin", "support": [0, 1], "params": {"name": "clifford:CNOT@0,1"}},
        {"kind": "builtin", "support": [1], "params": {"name": "depolarizing", "p": 0.9}},
    ]}
    ident = {"d": 2, "n": 2, "layers": [
        {"kind": "matrix", "support": [0], "params": {"unitary": [[1, 0], [0, 1]]}}]}
    return {
        "circuit": _write(tmp_path / "c.json", circ),
        "identity": _write(tmp_path / "id.json", ident),
        "state": _write(tmp_path / "s.json", {"bits": [0, 0]}),
        "obs": _write(tmp_path / "o.json", {"pauli": "ZZ"}),
        "dir": tmp_path,
    }


def test_norms_identity_circuit(files):
    res = _run(["norms", "--circuit", files["identity"]])
    assert res.exit_code == 0
    out = json.loads(res.output)
    assert out["command"] == "norms"
    assert out["results"]["layer_norms"] == [1.0]
    assert out["results"]["M_B"] == 1.0


def test_simulate_identity_circuit_is_exact(files):
    res = _run(["simulate", "--circuit", files["identity"], "--state", files["state"],
                "--observable", files["obs"], "--eps", "0.1", "--picture", "heisenberg"])
    assert res.exit_code == 0
    out = json.loads(res.output)
    assert out["results"]["mean"] == [1.0, 0.0]
    assert out["results"]["stderr"] == 0.0
    assert set(out["provenance"]) == {"seed", "workers", "version", "backend", "wall_time", "samples"}


def test_simulate_matches_dense(files):
    res = _run(["simulate", "--circuit", files["circuit"], "--state", files["state"],
                "--observable", files["obs"], "--eps", "0.02", "--seed", "4"])
    out = json.loads(res.output)["results"]
    # CNOT maps Ry(0.7)|0>|0> to cos|00> + sin|11>, so <ZZ> = 1 before the 0.9 depolarizing
    assert abs(out["mean"][0] - 0.9) < 5 * out["stderr"]


def test_replay_is_bit_identical_and_flags_override(files, tmp_path):
    out1 = tmp_path / "a.json"
    args = ["simulate", "--circuit", files["circuit"], "--state", files["state"], "--observable", files["obs"],
            "--eps", "0.05", "--seed", "11", "--workers", "2", "--out", str(out1)]
    assert _run(args).exit_code == 0
    env1 = json.loads(out1.read_text())
    out2 = tmp_path / "b.json"
    assert _run(["simulate", "--config", str(out1), "--out", str(out2)]).exit_code == 0
    env2 = json.loads(out2.read_text())
    assert "out" not in env1["config"]
    assert _strip_times(env1) == _strip_times(env2)
    res = _run(["simulate", "--config", str(out1), "--seed", "12"])
    env3 = json.loads(res.output)
    assert env3["config"]["seed"] == 12 and env3["results"]["mean"] != env1["results"]["mean"]


def test_environment_seed(files):
    base = ["simulate", "--circuit", files["circuit"], "--state", files["state"], "--observable", files["obs"],
            "--eps", "0.1"]
    a = json.loads(_run(base, env={"WEYLSIM_SEED": "5"}).output)
    b = json.loads(_run(base + ["--seed", "5"]).output)
    assert a["provenance"]["seed"] == 5 and a["results"]["mean"] == b["results"]["mean"]


def test_parse_error_names_path_and_field(files, tmp_path):
    bad = _write(tmp_path / "bad.json", {"d": 2, "layers": []})
    res = CliRunner().invoke(main, ["norms", "--circuit", bad])
    assert res.exit_code == 2
    err = json.loads(res.stderr if hasattr(res, "stderr") else res.output)
    assert err["path"] == bad and err["field"] == "n"
    res = CliRunner().invoke(main, ["norms", "--circuit", str(tmp_path / "missing.json")])
    assert res.exit_code == 2


def test_validation_error_exit_code(tmp_path, files):
    bad = _write(tmp_path / "p.json", {"d": 2, "n": 1, "layers": [
        {"kind": "builtin", "support": [0], "params": {"name": "depolarizing", "p": 1.5}}]})
    assert CliRunner().invoke(main, ["norms", "--circuit", bad]).exit_code == 3
    res = CliRunner().invoke(main, ["simulate", "--circuit", files["circuit"], "--state", files["state"],
                                    "--observable", files["obs"], "--eps", "-1"])
    assert res.exit_code == 3
    cfg = _write(tmp_path / "cfg.json", {"bogus": 1})
    assert CliRunner().invoke(main, ["norms", "--config", cfg]).exit_code == 3


def test_resource_error_exit_code(tmp_path):
    eye = np.eye(16).tolist()
    bad = _write(tmp_path / "k.json", {"d": 2, "n": 4, "layers": [
        {"kind": "kraus", "support": [0, 1, 2, 3], "params": {"ops": [eye]}}]})
    assert CliRunner().invoke(main, ["norms", "--circuit", bad]).exit_code == 4


def test_decay_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    rec = BenchmarkRecord(WeylIndex.from_string("1|0", 2))
    rec.add(2, rng.normal(size=10) + 1j * rng.normal(size=10))
    rec.add(5, rng.normal(size=7))
    p = tmp_path / "d.csv"
    emit_decay_csv(rec, p)
    rows = read_decay_csv(p)
    assert [r["m"] for r in rows] == [2, 5]
    q = rec.q_hat(2)
    assert rows[0]["re"] == q.real and rows[0]["im"] == q.imag and rows[0]["abs2"] == abs(q) ** 2
    assert rows[1]["runs"] == 7 and rows[1]["stderr"] == rec.stderr(5)
    single = BenchmarkRecord(WeylIndex.from_string("1|0", 2))
    single.add(3, [0.5])
    emit_decay_csv(single, tmp_path / "one.csv")
    assert len((tmp_path / "one.csv").read_text().strip().splitlines()) == 2


def test_wrb_command_with_csv(tmp_path):
    dev = _write(tmp_path / "dev.json", {"d": 2, "n": 1, "T": [
        {"kind": "builtin", "support": [0], "params": {"name": "depolarizing", "p": 0.9}}]})
    csv_path = tmp_path / "decay.csv"
    res = _run(["wrb", "--device", dev, "--label", "1|0", "--mode", "phase", "--m-list", "1,2",
                "--l-phase", "500", "--csv", str(csv_path)])
    assert res.exit_code == 0
    out = json.loads(res.output)["results"]
    assert out["mu_true"] == pytest.approx([0.9, 0.0])
    rows = read_decay_csv(csv_path)
    assert [r["m"] for r in rows] == [1, 2]


@pytest.mark.filterwarnings("ignore:.*underdetermined")
def test_fit_command_recovers_model(tmp_path):
    from weylsim.noisefit import Hypergraph, default_labels, induced_eigenvalue, random_local_model
    g = Hypergraph.path(3)
    model = random_local_model(g, 2, np.random.default_rng(1))
    mu = [{"label": w.to_string(), "value": induced_eigenvalue(model, w).real} for w in default_labels(g, 2)]
    gp = _write(tmp_path / "g.json", {"n": 3, "edges": [[0, 1], [1, 2]]})
    mp = _write(tmp_path / "m.json", {"d": 2, "mu": mu})
    res = _run(["fit", "--hypergraph", gp, "--measurements", mp, "--eps", "0.01"])
    assert res.exit_code == 0
    out = json.loads(res.output)["results"]
    assert out["residual"] < 1e-10 and out["stability_bound"] > 0
    assert CliRunner().invoke(main, ["fit", "--hypergraph", gp, "--measurements", mp,
                                     "--parametrization", "raw"]).exit_code == 3


def test_vqe_command(tmp_path):
    gp = _write(tmp_path / "g.json", {"n": 4, "weights": [[0, 1, 1.0], [1, 2, 1.0], [2, 3, 1.0], [0, 3, 1.0]]})
    tp = _write(tmp_path / "t.json", {"theta": [[0.0], [0.0], [0.0], [0.0]]})
    out = json.loads(_run(["vqe", "--graph", gp, "--theta", tp, "--eps", "0.1"]).output)["results"]
    assert out["energy"] == pytest.approx(4.0)
    assert len(out["terms"]) == 4 and "efficient" in out["complexity"]


def test_lindblad_command(tmp_path):
    model = _write(tmp_path / "l.json", {"d": 2, "n": 1, "layers": [
        {"support": [0], "t": 0.5, "jumps": [[[np.sqrt(0.5), 0], [0, -np.sqrt(0.5)]]]}]})
    st = _write(tmp_path / "s.json", {"factors": [[[0.5, 0.5], [0.5, 0.5]]]})
    ob = _write(tmp_path / "o.json", {"pauli": "X"})
    out = json.loads(_run(["lindblad", "--model", model, "--state", st, "--observable", ob,
                           "--samples", "20000"]).output)["results"]
    assert abs(out["mean"][0] - np.exp(-0.5)) < 5 * out["stderr"]
