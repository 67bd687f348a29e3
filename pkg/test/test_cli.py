import json

import pytest

from quditmub.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()

def test_partition(capsys):
    code, out = run(capsys, "partition", "--dims", "3", "--json")
    assert code == 0
    report = json.loads(out.out)
    assert report["pass"] is True
    assert report["collections"][0]["n_families"] == 4
    assert report["collections"][0]["mub"]["pass"] is True

def test_partition_tensor(capsys):
    code, out = run(capsys, "partition", "--dims", "2,3", "--json")
    assert code == 0
    report = json.loads(out.out)
    assert [c["n_families"] for c in report["collections"]] == [3, 4]

def test_knight_non_prime(capsys):
    code, out = run(capsys, "knight", "--d", "4", "--json")
    # Violations are reported, not treated as failures
    assert code == 0
    report = json.loads(out.out)
    assert report["d_is_prime"] is False and "census" not in report
    first = report["matrices"][0]
    assert first["violation"] is True
    assert first["column_collisions"][0] == {"column": 0, "rows": [0, 2]}

def test_knight_prime(capsys):
    code, out = run(capsys, "knight", "--d", "5", "--json")
    assert code == 0
    report = json.loads(out.out)
    assert report["census"]["diagonal_count"] == 3
    assert all(m["diagonal"]["pass"] and m["unitary"] for m in report["matrices"])
    code, out = run(capsys, "knight", "--d", "5", "--b", "2", "--json")
    assert json.loads(out.out)["matrices"][0]["ones_1based"][1] == [2, 3]

def test_classify(capsys):
    code, out = run(capsys, "classify", "--gate", "random:1", "--dims", "3", "--json")
    assert code == 0
    report = json.loads(out.out)
    assert report["characterizable"] is False and report["degree_histogram"] is None
    code, out = run(capsys, "classify", "--gate", "CSUM", "--dims", "3,3", "--json")
    report = json.loads(out.out)
    assert report["characterizable"] is True
    assert sum(int(k)*v for k, v in report["degree_histogram"].items()) == 80

def test_classify_text(capsys):
    code, out = run(capsys, "classify", "--gate", "F", "--dims", "3")
    assert code == 0
    assert "characterizable: True" in out.out

def test_estimate(capsys):
    argv = ["estimate", "--gate", "F", "--dims", "3", "--channel", "depolarizing:0.1",
            "--samples", "2000", "--seed", "7", "--json"]
    code, out = run(capsys, *argv)
    assert code == 0
    report = json.loads(out.out)
    assert report["n_samples"] == 2000 and report["efficient"] is True
    assert report["exact_reference"] == pytest.approx(0.933333, abs=1e-6)
    assert abs(report["mean"] - 0.933333) <= 4*report["stderr"] + 1e-6
    # Identical invocations give identical output
    _, out2 = run(capsys, *argv)
    assert out2.out == out.out

def test_basis_then_verify(capsys, tmp_path):
    path = tmp_path/"basis.json"
    code, _ = run(capsys, "basis", "--dims", "3", "--json", "--out", str(path))
    assert code == 0
    code, out = run(capsys, "verify", str(path), "--json")
    assert code == 0 and json.loads(out.out)["pass"] is True
    data = json.loads(path.read_text())
    data["elements"][1]["phase"] = [0, 0, 0]
    path.write_text(json.dumps(data))
    code, out = run(capsys, "verify", str(path), "--json")
    assert code == 1 and json.loads(out.out)["pass"] is False

def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["classify", "--dims", "3"])
    assert e.value.code == 2
    assert run(capsys, "classify", "--gate", "H", "--dims", "3")[0] == 2
    assert run(capsys, "partition", "--dims", "3,x")[0] == 2
    assert run(capsys, "partition", "--dims", "1")[0] == 2
    assert run(capsys, "partition", "--dims", "3", "--tol", "2")[0] == 2
    assert run(capsys, "knight", "--d", "5", "--b", "7")[0] == 2
    code, out = run(capsys, "estimate", "--gate", "F", "--dims", "3",
                    "--channel", "depolarizing:0.1", "--samples", "0")
    assert code == 2 and "samples" in out.err
    assert run(capsys, "verify", "does-not-exist.json")[0] == 2

def test_tol_only_where_used(capsys):
    for argv in (["knight", "--d", "5"], ["basis", "--dims", "3"], ["verify", "basis.json"]):
        with pytest.raises(SystemExit) as e:
            main([*argv, "--tol", "0.1"])
        assert e.value.code == 2
    code, out = run(capsys, "estimate", "--gate", "I", "--dims", "2", "--channel",
                    "depolarizing:0.1", "--samples", "200", "--tol", "1e-6", "--json")
    assert code == 0 and json.loads(out.out)["efficient"] is True
