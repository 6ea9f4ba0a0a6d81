"""Seeded problem instances and their JSON form.

Formats (complex arrays are split into ``re``/``im`` lists, row-major):

    phase-function  {"kind", "n", "angles": [2**n floats]}
    state           {"kind", "n", "re": [2**n], "im": [2**n]}
    unitary         {"kind", "n", "re": [[2**n]*2**n], "im": [...]}
    multiplexor     {"kind", "n", "blocks": [{"re": [[2]*2], "im": [...]}] * 2**n}

For a multiplexor ``n`` is the number of select qubits.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .toolbox import Multiplexor1, PhaseFunction

KINDS = ("phase-function", "state", "unitary", "multiplexor")


def rng_for(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _split(a: np.ndarray) -> dict:
    return {"re": np.real(a).tolist(), "im": np.imag(a).tolist()}


def _join(d: dict) -> np.ndarray:
    return np.asarray(d["re"], dtype=float) + 1j * np.asarray(d["im"], dtype=float)


def generate_instance(kind: str, n: int, seed: int) -> dict:
    if kind not in KINDS:
        raise ValueError(f"unknown instance kind {kind!r}; expected one of {', '.join(KINDS)}")
    if n < 0 or (n == 0 and kind != "multiplexor"):
        raise ValueError(f"bad size n={n} for {kind}")
    rng = rng_for(seed)
    dim = 2 ** n
    if kind == "phase-function":
        return {"kind": kind, "n": n, "angles": rng.uniform(-np.pi, np.pi, dim).tolist()}
    if kind == "state":
        return {"kind": kind, "n": n, **_split(random_state(dim, rng))}
    if kind == "unitary":
        return {"kind": kind, "n": n, **_split(haar_unitary(dim, rng))}
    return {"kind": kind, "n": n, "blocks": [_split(haar_unitary(2, rng)) for _ in range(dim)]}


def instance_object(inst: dict):
    """PhaseFunction, state vector, unitary matrix or Multiplexor1."""
    kind = inst.get("kind")
    if kind == "phase-function":
        return PhaseFunction(int(inst["n"]), np.asarray(inst["angles"], dtype=float))
    if kind in ("state", "unitary"):
        return _join(inst)
    if kind == "multiplexor":
        return Multiplexor1([_join(b) for b in inst["blocks"]])
    raise ValueError(f"unknown instance kind {kind!r}")


def dumps(inst: dict) -> str:
    return json.dumps(inst, sort_keys=True)


def save_instance(inst: dict, path) -> None:
    Path(path).write_text(dumps(inst) + "\n")


def load_instance(path) -> dict:
    return json.loads(Path(path).read_text())
