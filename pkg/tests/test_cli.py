import csv
import json

import pytest

from massprod.cli import JobSpec, count_sweep, main, run_job
from massprod.instances import generate_instance, save_instance


def read(path):
    return json.loads(path.read_text())


@pytest.mark.parametrize("command,n", [
    ("synth-diagonal", 3), ("synth-state", 3), ("synth-unitary", 2), ("synth-mux", 2)])
def test_synth_then_verify(tmp_path, command, n):
    out = tmp_path / command
    assert main(["--command", command, "--n", str(n), "--r", "2", "--seed", "3",
                 "--out", str(out), "--qasm-out", str(out / "c.qasm")]) == 0
    assert read(out / "verification.json")["passed"]
    report = read(out / "report.json")
    assert report["cnot_count"] > 0 or command == "synth-unitary"
    assert (out / "c.qasm").read_text().startswith("OPENQASM 2.0;")
    assert main(["--command", "verify", "--in", str(out / "circuit.json"),
                 "--out", str(tmp_path / "v")]) == 0


def test_diagonal_n4_exhaustive(tmp_path):
    assert main(["--command", "synth-diagonal", "--n", "4", "--r", "2", "--seed", "7",
                 "--out", str(tmp_path)]) == 0
    v = read(tmp_path / "verification.json")
    assert v["passed"] and v["checked"] == 2 ** 8


def test_instance_file_input(tmp_path):
    save_instance(generate_instance("multiplexor", 2, 4), tmp_path / "m.json")
    assert main(["--command", "synth-mux", "--in", str(tmp_path / "m.json"), "--r", "2",
                 "--out", str(tmp_path)]) == 0
    assert main(["--command", "synth-diagonal", "--in", str(tmp_path / "m.json"),
                 "--out", str(tmp_path)]) == 2


def test_corrupted_circuit_fails_with_witness(tmp_path):
    run_job(JobSpec("synth-diagonal", n="4", r=2, seed=7, out=str(tmp_path)))
    data = read(tmp_path / "circuit.json")
    slot = [g for g in data["gates"] if g.get("tag") == "g2" and g["kind"] == "Rz"]
    slot[1]["params"][0] += 0.5
    (tmp_path / "bad.json").write_text(json.dumps(data))
    code = main(["--command", "verify", "--in", str(tmp_path / "bad.json"),
                 "--out", str(tmp_path / "v")])
    assert code == 1
    v = read(tmp_path / "v" / "verification.json")
    assert not v["passed"] and v["failures"][0]["input"]


def test_usage_errors(tmp_path):
    assert main(["--command", "synth-diagonal", "--out", str(tmp_path)]) == 2
    assert main(["--command", "verify", "--out", str(tmp_path)]) == 2
    assert main(["--command", "synth-diagonal", "--n", "2", "--r", "8", "--out", str(tmp_path)]) == 2
    assert main(["--command", "synth-diagonal", "--n", "3", "--r", "0", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit):
        main(["--command", "nope"])


def test_sweep_csv(tmp_path):
    assert main(["--command", "count-sweep", "--n", "4..6", "--r", "2", "--format", "csv",
                 "--out", str(tmp_path)]) == 0
    rows = list(csv.DictReader((tmp_path / "sweep.csv").open()))
    assert [r["n"] for r in rows] == ["4", "5", "6"]
    assert list(rows[0]) == ["n", "cnot_mass", "cnot_naive", "ratio"]
    assert int(rows[0]["cnot_naive"]) == 2 * (2 ** 4 - 2)


def test_sweep_is_deterministic():
    assert count_sweep(range(4, 7)) == count_sweep(range(4, 7))
