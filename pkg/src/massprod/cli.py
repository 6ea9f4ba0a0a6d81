"""Command-line driver: synthesize, verify and sweep.

Exit status is 0 on success, 1 when a verification fails and 2 for usage,
domain or I/O errors. Synthesis commands write ``circuit.json`` (the circuit
plus a ``meta`` block naming the instance), ``report.json`` and
``verification.json`` into ``--out``. ``verify`` re-checks a saved circuit
against the instance recorded in its ``meta`` block.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuit import Circuit, CircuitError, expand_macros
from .instances import generate_instance, instance_object, load_instance
from .massprod import (
    DomainError,
    mass_produce_diagonal,
    mass_produce_multiplexor1,
    mass_produce_state,
    mass_produce_unitary,
)
from .qasm import export_qasm
from .simulator import (
    DEFAULT_DENSE_CAP,
    VerificationReport,
    verify_ancilla_restoration,
    verify_phase_function,
    verify_state_power,
    verify_tensor_power,
)
from .toolbox import SynthesisError

COMMANDS = ("synth-diagonal", "synth-state", "synth-unitary", "synth-mux", "verify", "count-sweep")
_KIND = {"synth-diagonal": "phase-function", "synth-state": "state",
         "synth-unitary": "unitary", "synth-mux": "multiplexor"}

EXHAUSTIVE_PHASE_BITS = 14
DEFAULT_PHASE_SAMPLES = 2000
EXHAUSTIVE_OPERATOR_BITS = 8
DEFAULT_OPERATOR_SAMPLES = 64


class UsageError(ValueError):
    pass


@dataclass
class JobSpec:
    command: str
    n: str | None = None
    r: int = 2
    k: int | None = None
    seed: int = 0
    instance: str | None = None
    out: str = "."
    qasm_out: str | None = None
    samples: int | None = None
    dense_cap: int = DEFAULT_DENSE_CAP
    format: str = "json"
    verify: bool = True

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.r < 1:
            raise UsageError("r must be >= 1")
        if self.dense_cap < 1 or (self.samples is not None and self.samples < 1):
            raise UsageError("caps and sample counts must be positive")
        if self.instance is not None and not Path(self.instance).exists():
            raise UsageError(f"no such file: {self.instance}")
        if self.command == "verify" and self.instance is None:
            raise UsageError("verify needs --in <circuit.json>")
        if self.command in _KIND and self.instance is None and self.n is None:
            raise UsageError(f"{self.command} needs --n or --in")


def _synthesize(kind: str, obj, r: int, k: int | None):
    if kind == "phase-function":
        return mass_produce_diagonal(obj, r, k)
    if kind == "state":
        return mass_produce_state(obj, r, k)
    if kind == "unitary":
        return mass_produce_unitary(obj, r, k)
    return mass_produce_multiplexor1(obj, r, k)


def _trials(logical_bits: int, exhaustive_bits: int, default: int, samples: int | None):
    if samples is not None:
        return samples
    return None if logical_bits <= exhaustive_bits else default


def verify_against(circuit: Circuit, inst: dict, copies: int, samples: int | None = None,
                   seed: int = 0, dense_cap: int = DEFAULT_DENSE_CAP) -> VerificationReport:
    """Check a synthesized circuit against ``copies`` copies of the instance."""
    kind = inst["kind"]
    obj = instance_object(inst)
    L = len(circuit.logical_qubits)
    if kind == "phase-function":
        regs = [circuit.qubits_of(f"x{j}") for j in range(copies)]
        weights = 1 << np.arange(obj.n - 1, -1, -1)

        def expected(rows):
            total = np.zeros(len(rows))
            for q in regs:
                total += obj.angles[rows[:, q].astype(np.int64) @ weights]
            return np.exp(1j * total)

        trials = _trials(L, EXHAUSTIVE_PHASE_BITS, DEFAULT_PHASE_SAMPLES, samples)
        report = verify_phase_function(circuit, expected, trials, seed)
        anc = verify_ancilla_restoration(circuit, trials, seed)
        report.failures += anc.failures
        return report
    if kind == "state":
        return verify_state_power(circuit, obj, copies)
    op = obj.matrix() if kind == "multiplexor" else obj
    trials = _trials(L, EXHAUSTIVE_OPERATOR_BITS, DEFAULT_OPERATOR_SAMPLES, samples)
    return verify_tensor_power(circuit, op, copies, trials, seed, dense_cap=dense_cap)


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def _parse_range(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(text)]


def count_sweep(ns, r: int = 2, seed: int = 0, k: int | None = None) -> list[dict]:
    """CNOT counts of mass-produced vs repeated single-copy diagonals."""
    rows = []
    for n in ns:
        f = instance_object(generate_instance("phase-function", n, seed))
        rep = mass_produce_diagonal(f, r, k).report
        rows.append({"n": n, "cnot_mass": rep.cnot_count, "cnot_naive": rep.naive_count,
                     "ratio": rep.cnot_count / rep.naive_count if rep.naive_count else float("inf")})
    return rows


def _run_sweep(job: JobSpec, out: Path) -> int:
    rows = count_sweep(_parse_range(job.n or "4..12"), job.r, job.seed, job.k)
    if job.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["n", "cnot_mass", "cnot_naive", "ratio"])
        w.writeheader()
        w.writerows(rows)
        (out / "sweep.csv").write_text(buf.getvalue())
        sys.stdout.write(buf.getvalue())
    else:
        _write_json(out / "sweep.json", rows)
        print(json.dumps(rows, indent=2))
    return 0


def run_job(job: JobSpec) -> int:
    job.validate()
    out = Path(job.out)
    out.mkdir(parents=True, exist_ok=True)
    if job.command == "count-sweep":
        return _run_sweep(job, out)
    if job.command == "verify":
        data = json.loads(Path(job.instance).read_text())
        meta = data.get("meta")
        if not meta:
            raise UsageError("circuit file has no meta block; cannot rebuild the expected operator")
        circuit = Circuit.from_dict(data)
        report = verify_against(circuit, meta["instance"], meta["copies"], job.samples,
                                job.seed, job.dense_cap)
        _write_json(out / "verification.json", report.to_dict())
        print(json.dumps({"passed": report.passed, "checked": report.checked,
                          "max_phase_error": report.max_phase_error}))
        return 0 if report.passed else 1

    kind = _KIND[job.command]
    if job.instance is not None:
        inst = load_instance(job.instance)
        if inst.get("kind") != kind:
            raise UsageError(f"{job.command} needs a {kind} instance, got {inst.get('kind')!r}")
    else:
        inst = generate_instance(kind, int(job.n), job.seed)
    syn = _synthesize(kind, instance_object(inst), job.r, job.k)
    copies = syn.report.details.get("copies", 1)
    data = syn.circuit.to_dict()
    data["meta"] = {"command": job.command, "instance": inst, "r": job.r, "copies": copies}
    _write_json(out / "circuit.json", data)
    _write_json(out / "report.json", syn.report.to_dict())
    if job.qasm_out:
        Path(job.qasm_out).write_text(export_qasm(expand_macros(syn.circuit)))
    summary = {"cnot_count": syn.report.cnot_count, "naive_count": syn.report.naive_count,
               "qubits": syn.circuit.num_qubits}
    status = 0
    if job.verify:
        report = verify_against(syn.circuit, inst, copies, job.samples, job.seed, job.dense_cap)
        _write_json(out / "verification.json", report.to_dict())
        summary.update(passed=report.passed, checked=report.checked,
                       max_phase_error=report.max_phase_error)
        status = 0 if report.passed else 1
    print(json.dumps(summary))
    return status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="massprod", description=__doc__.splitlines()[0])
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--n", help="instance size; for count-sweep a range like 4..12")
    p.add_argument("--r", type=int, default=2, help="number of copies (rounded up to a power of two)")
    p.add_argument("--k", type=int, default=None, help="prefix width override")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in", dest="instance", help="instance JSON, or circuit JSON for verify")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--qasm-out", help="also write OpenQASM 2.0 here")
    p.add_argument("--samples", type=int, default=None, help="inputs to check (default: auto)")
    p.add_argument("--dense-cap", type=int, default=DEFAULT_DENSE_CAP)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--no-verify", dest="verify", action="store_false")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = JobSpec(**vars(args))
    try:
        return run_job(job)
    except (UsageError, DomainError, SynthesisError, CircuitError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
