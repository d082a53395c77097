"""qarith command line: synth, verify, sweep, shor-estimate, export.

Exit codes: 0 success, 1 verification failure, 2 usage or precondition error.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import catalog
from .ancilla import AncillaError
from .bench import SWEEPS, estimate_shor, run_sweep
from .circuit_ir import Circuit, CircuitError, export_qasm

USAGE_ERROR = 2
VERIFY_FAILURE = 1


class Number(click.ParamType):
    """Decimal integer, or 0x / 0b literal."""

    name = "integer"

    def convert(self, value, param, ctx):
        if isinstance(value, int):
            return value
        try:
            return int(value, 0)
        except ValueError:
            self.fail(f"{value!r} is not an integer", param, ctx)


NUMBER = Number()


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(USAGE_ERROR)


def _params_options(f):
    options = [
        click.argument("construction"),
        click.option("--n", "n", type=NUMBER, help="Register width (or gate count for ladders and fan-outs)."),
        click.option("--k", "k", type=NUMBER, default=0, show_default=True, help="Number of controls / ladder order."),
        click.option("--constant", "--c", "constant", type=NUMBER, help="Classical constant (a for modular-adder)."),
        click.option("--modulus", "--N", "modulus", type=NUMBER, help="Modulus for modular-adder."),
        click.option("--mode", type=click.Choice(["qq", "cq"]), default="qq", show_default=True),
        click.option("--direction", type=click.Choice(["increment", "decrement"]), default="increment",
                     show_default=True),
    ]
    for opt in reversed(options):
        f = opt(f)
    return f


def _build(construction: str, **kw) -> tuple[catalog.Params, Circuit]:
    try:
        entry = catalog.get(construction)
        params = catalog.Params(**kw)
        return params, entry.build(params)
    except (CircuitError, AncillaError) as exc:
        _fail(str(exc))


def _circuit_json(circuit: Circuit) -> str:
    return json.dumps({
        "num_qubits": circuit.num_qubits,
        "gates": [[g.kind, *g.qubits] for g in circuit.gates],
        "registers": [{"name": e.name, "role": e.role, "qubits": list(e.qubits)} for e in circuit.registers.entries],
    }, sort_keys=True)


def _render(circuit: Circuit, fmt: str) -> str:
    return export_qasm(circuit) if fmt == "qasm" else _circuit_json(circuit) + "\n"


@click.group()
def main():
    """Reversible arithmetic circuits over {X, CX, CCX}."""


@main.command()
@_params_options
@click.option("--out", "-o", "output", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--format", "fmt", type=click.Choice(["qasm", "json"]), default="qasm", show_default=True)
def synth(construction, output, fmt, **kw):
    """Build a construction, write it to OUT and a resource report next to it."""
    params, circuit = _build(construction, **kw)
    rep = circuit.report()
    output.write_text(_render(circuit, fmt))
    output.with_name(output.name + ".report.json").write_text(rep.to_json() + "\n")
    click.echo(f"{construction} n={params.n} k={params.k} gates={rep.total_gates} depth={rep.depth} "
               f"qubits={circuit.num_qubits} clean={rep.qubits_clean} dirty={rep.qubits_dirty}")


@main.command()
@_params_options
@click.option("--seed", type=int, default=0, show_default=True, help="Seed for sampled checks.")
@click.option("--mutate", type=int, default=None, hidden=True, help="Drop the gate at this index (test hook).")
def verify(construction, seed, mutate, **kw):
    """Check a construction against its reference semantics; exit 1 on any mismatch."""
    params, circuit = _build(construction, **kw)
    if mutate is not None:
        if not 0 <= mutate < len(circuit.gates):
            _fail(f"--mutate index {mutate} outside 0..{len(circuit.gates) - 1}")
        gates = list(circuit.gates)
        del gates[mutate]
        circuit = circuit.with_gates(gates)
    result = catalog.verify(construction, params, circuit, seed=seed)
    click.echo(json.dumps(result, sort_keys=True))
    sys.exit(0 if result["status"] == "PASS" else VERIFY_FAILURE)


def _sizes(text: str) -> list[int]:
    text = text.strip()
    if ".." in text:
        lo, hi = (int(v, 0) for v in text.split(".."))
        out = []
        while lo <= hi:
            out.append(lo)
            lo *= 2
        return out
    return [int(v, 0) for v in text.split(",") if v.strip()]


@main.command()
@click.argument("construction")
@click.option("--sizes", default="16..256", show_default=True,
              help="Comma list, or lo..hi for powers of two from lo to hi.")
@click.option("--calibration", type=int, default=2, show_default=True)
def sweep(construction, sizes, calibration):
    """Resource sweep with a scaling fit on the first sizes; exit 1 if a later point breaks the fit."""
    if construction not in SWEEPS:
        _fail(f"unknown construction {construction!r}; sweepable: {', '.join(SWEEPS)}")
    try:
        result = run_sweep(construction, _sizes(sizes), calibration)
    except (CircuitError, ValueError) as exc:
        _fail(str(exc))
    click.echo(result.to_json())
    sys.exit(0 if result.passed else VERIFY_FAILURE)


@main.command("shor-estimate")
@click.option("--n", "n", type=NUMBER, required=True, help="Bits of the modulus.")
def shor_estimate(n):
    """Gate, depth and qubit totals for factoring an n-bit modulus."""
    try:
        est = estimate_shor(n)
    except CircuitError as exc:
        _fail(str(exc))
    click.echo(est.to_json())


@main.command()
@_params_options
@click.option("--format", "fmt", type=click.Choice(["qasm", "json"]), default="qasm", show_default=True)
def export(construction, fmt, **kw):
    """Print a construction to stdout."""
    _, circuit = _build(construction, **kw)
    click.echo(_render(circuit, fmt), nl=False)


if __name__ == "__main__":
    main()
