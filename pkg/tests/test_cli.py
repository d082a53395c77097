import json

import pytest
from click.testing import CliRunner

from qarith import catalog
from qarith.circuit_ir import import_qasm
from qarith.cli import main

CASES = [
    ["mcx", "--k", "5"],
    ["fanout1", "--n", "5"],
    ["fanout2", "--n", "1"],
    ["fanout2", "--n", "3"],
    ["ladder1", "--n", "6"],
    ["ladder2", "--n", "5"],
    ["ladderk", "--n", "2", "--k", "3"],
    ["v2", "--n", "6"],
    ["comparator", "--n", "4"],
    ["comparator", "--n", "3", "--k", "2"],
    ["comparator", "--n", "4", "--mode", "cq", "--c", "0b1011"],
    ["cq-comparator", "--n", "5", "--c", "0x13", "--k", "1"],
    ["incrementer", "--n", "6"],
    ["incrementer", "--n", "4", "--k", "2", "--direction", "decrement"],
    ["cq-adder", "--n", "5", "--c", "21"],
    ["cq-adder", "--n", "3", "--c", "5", "--k", "2"],
    ["modular-adder", "--n", "4", "--N", "13", "--c", "9"],
    ["modular-adder", "--n", "3", "--N", "7", "--c", "3", "--k", "1"],
]


@pytest.fixture
def run():
    runner = CliRunner()
    return lambda *args: runner.invoke(main, list(args))


@pytest.mark.parametrize("args", CASES, ids=lambda a: " ".join(a))
def test_verify_passes(run, args):
    res = run("verify", *args)
    assert res.exit_code == 0, res.output
    assert json.loads(res.output)["status"] == "PASS"


@pytest.mark.parametrize("args", [["cq-adder", "--n", "4", "--c", "11"], ["comparator", "--n", "3"],
                                  ["modular-adder", "--n", "4", "--N", "13", "--c", "9"]])
def test_verify_catches_a_dropped_gate(run, args):
    res = run("verify", *args, "--mutate", "0")
    assert res.exit_code == 1
    doc = json.loads(res.output)
    assert doc["status"] == "FAIL" and doc["equivalence"]["mismatches"]


@pytest.mark.parametrize("args", [
    ["verify", "comparator", "--n", "0"],
    ["verify", "teleporter", "--n", "3"],
    ["verify", "cq-adder", "--n", "3"],
    ["verify", "cq-adder", "--n", "3", "--c", "9"],
    ["verify", "modular-adder", "--n", "3", "--c", "2", "--N", "9"],
    ["verify", "mcx"],
    ["verify", "incrementer", "--n", "3", "--mutate", "999"],
    ["sweep", "teleporter"],
    ["sweep", "comparator", "--sizes", "16,32"],
    ["shor-estimate", "--n", "1"],
])
def test_usage_errors_exit_2(run, args):
    res = run(*args)
    assert res.exit_code == 2
    assert "error" in res.output.lower() or "usage" in res.output.lower()


def test_bad_literal_is_a_usage_error(run):
    assert run("verify", "cq-adder", "--n", "3", "--c", "0xZZ").exit_code == 2


def test_synth_writes_circuit_and_report(run, tmp_path):
    out = tmp_path / "inc.qasm"
    res = run("synth", "incrementer", "--n", "8", "-o", str(out))
    assert res.exit_code == 0
    circuit = import_qasm(out.read_text())
    report = json.loads((tmp_path / "inc.qasm.report.json").read_text())
    assert report["total_gates"] == len(circuit.gates) and report["qubits_dirty"] == 1
    assert f"gates={len(circuit.gates)}" in res.output


def test_synth_json(run, tmp_path):
    out = tmp_path / "cmp.json"
    assert run("synth", "comparator", "--n", "3", "-o", str(out), "--format", "json").exit_code == 0
    doc = json.loads(out.read_text())
    assert doc["num_qubits"] == 7
    assert {r["name"] for r in doc["registers"]} >= {"a", "b", "z"}


def test_export_is_byte_stable(run):
    first = run("export", "cq-adder", "--n", "6", "--c", "0x2b").output
    assert first == run("export", "cq-adder", "--n", "6", "--c", "43").output
    assert import_qasm(first).num_qubits == 7


def test_sweep_cli(run):
    res = run("sweep", "ladder2", "--sizes", "4..16")
    doc = json.loads(res.output)
    assert [p["n"] for p in doc["points"]] == [4, 8, 16]
    assert res.exit_code == (0 if all(v["status"] == "PASS" for v in doc["verdicts"]) else 1)


def test_shor_estimate_cli(run):
    res = run("shor-estimate", "--n", "8")
    assert res.exit_code == 0
    assert json.loads(res.output)["total_qubits"] == 18


def test_every_catalog_entry_has_a_cli_case():
    assert {args[0] for args in CASES} == set(catalog.CONSTRUCTIONS)
