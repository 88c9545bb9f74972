import json

import numpy as np
import pytest

from l1rank1.bench import generate_instance
from l1rank1.cli import main, parse_gen_spec
from l1rank1.tensor_core import read_dten, write_dten, write_dten_binary

GEN = "d=4,n=8,terms=10,sr=0.7,seed=1"


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_run_reports_schema(capsys):
    assert main(["run", "--variant", "v2", "--gen", "d=4,n=20,terms=10,sr=0.7,seed=1",
                 "--omega", "default"]) == 0
    out = _json(capsys)
    assert out["schema_version"] == 1
    assert out["lambda"] >= out["bound_ratio"] * out["lower_bound_reference"]
    assert out["lambda"] <= out["vub"] * (1 + 1e-10)


def test_run_wrong_omega_length(capsys):
    assert main(["run", "--gen", GEN, "--omega", "0.1,0.2"]) == 2


def test_run_zero_tensor(tmp_path):
    write_dten(tmp_path / "z.dten", np.zeros((2, 3, 2)))
    assert main(["run", "--input", str(tmp_path / "z.dten")]) == 3


def test_run_missing_file(tmp_path):
    assert main(["run", "--input", str(tmp_path / "nope.dten")]) == 1


def test_run_malformed_file(tmp_path):
    (tmp_path / "bad.dten").write_text("3\n2 2 2\n1\n")
    assert main(["run", "--input", str(tmp_path / "bad.dten")]) == 2


def test_usage_errors():
    assert main([]) == 2
    assert main(["run"]) == 2
    assert main(["run", "--gen", "d=4,bogus=1"]) == 2
    assert main(["experiment", "--kind", "vary-everything"]) == 2


def test_gen_round_trip(tmp_path, capsys):
    assert main(["gen", "--gen", GEN, "--out", str(tmp_path / "t.dten")]) == 0
    assert main(["gen", "--gen", GEN, "--out", str(tmp_path / "t.bin"), "--binary"]) == 0
    assert np.array_equal(read_dten(tmp_path / "t.dten"), generate_instance(parse_gen_spec(GEN)))
    assert main(["run", "--input", str(tmp_path / "t.dten")]) == 0
    a = _json(capsys)
    assert main(["run", "--input", str(tmp_path / "t.bin")]) == 0
    b = _json(capsys)
    assert a["lambda"] == b["lambda"]


def test_amm_rerun_identical(tmp_path, capsys):
    args = ["amm", "--gen", GEN, "--init", "random", "--seed", "5"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert main(args) == 0
    assert capsys.readouterr().out == first
    trace = json.loads(first)
    obj = trace["objective_per_sweep"]
    assert all(b >= a - 1e-12 for a, b in zip(obj, obj[1:]))


def test_experiment_empty_grid(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_grid": []}))
    assert main(["experiment", "--kind", "amm", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "amm.csv").read_text().splitlines()
    assert len(lines) == 1 and lines[0].startswith("variant,d,dims")


def test_experiment_deterministic(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"dims": [5, 5, 5], "sr_grid": [0.3, 0.7], "instances": 2}))
    outs = []
    for k in range(2):
        d = tmp_path / f"o{k}"
        assert main(["experiment", "--kind", "vary-sr", "--config", str(cfg), "--out-dir", str(d),
                     "--no-timing", "--seed", "4"]) == 0
        outs.append((d / "vary_sr.csv").read_bytes())
    assert outs[0] == outs[1]
    header = outs[0].decode().splitlines()[0].split(",")
    assert header[-5:] == ["sparsity_out_1", "sparsity_out_2", "sparsity_out_3", "time_ms", "sweeps"]


def test_experiment_bad_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"colour": "blue"}))
    assert main(["experiment", "--kind", "vary-n", "--config", str(cfg), "--out-dir", str(tmp_path)]) == 2


def test_bounds(capsys):
    assert main(["bounds", "--dims", "4,4,4", "--omega", "0.25"]) == 0
    out = _json(capsys)
    assert out["ratio_v1"] == pytest.approx(0.2109375)
    assert out["ratio_v2"] == pytest.approx(0.2109375 / 2)
    assert main(["bounds", "--dims", "4,4,4", "--omega", "0.6"]) == 0
    out = _json(capsys)
    assert out["valid"] is False and out["ratio_v1"] is None
    assert main(["bounds", "--dims", "4,4"]) == 2


def test_verify_hidden_but_works(capsys):
    assert main(["--help"]) == 0
    assert "verify" not in capsys.readouterr().out
    assert main(["verify", "--gen", "d=3,n=5,sr=0.3,seed=2"]) == 0
    assert _json(capsys)["ok"] is True


def test_parse_gen_spec():
    s = parse_gen_spec("dims=3x4x5,terms=2,sr=0.1,seed=9")
    assert s.shape == (3, 4, 5) and s.num_terms == 2 and s.seed == 9
    with pytest.raises(ValueError):
        parse_gen_spec("d=x")


def test_binary_autodetect(tmp_path, capsys, rng):
    t = rng.standard_normal((3, 3, 3))
    write_dten_binary(tmp_path / "t.dat", t)
    assert main(["run", "--input", str(tmp_path / "t.dat"), "--variant", "v1"]) == 0
    assert _json(capsys)["shape"] == [3, 3, 3]
