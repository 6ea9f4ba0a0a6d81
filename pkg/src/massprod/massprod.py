"""Mass production of diagonals, multiplexors, states and unitaries.

The central construction evaluates f_bar on two inputs at once. Each
restriction f_i (first k bits fixed to i) telescopes over a sequence of
2**k + 1 functions g_l on n - k bits, so that

    f_i = g_0 g_1 ... g_i = conj(g_{i+1} ... g_{2**k}).

After sorting the two inputs into (m, M) with a reversible comparator, the
smaller one collects the prefix product and the larger one the conjugated
suffix product, so every g_l is evaluated once for both inputs. For 2**t
copies, the same layout is used on 2**(t-1) pairs and the evaluation of
each g_l is itself mass-produced recursively for all pairs together.

Register layout of ``build_mass_prod(f, n, k, t)``, in order:

    x0, c0, x1, c1, ...   copy j evaluates f_bar(x_j, c_j)   (2**t copies)
    flag{p}, z{p}, cz{p}, a{p}, b{p}   per pair p = 0 .. 2**(t-1) - 1
    work                  comparator scratch, shared by all pairs
    s_*                   ancillas of the nested circuits (t > 1)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .circuit import (
    ANCILLA,
    HADAMARD,
    LOGICAL,
    PAULI_X,
    Circuit,
    CircuitBuilder,
    SynthesisReport,
    cnot_count,
    gate_cnot_cost,
    report_for,
)
from .reversible import (
    comparator_gates,
    comparator_work_width,
    threshold_gates,
    threshold_work_width,
)
from .toolbox import (
    MultiplexedRotation,
    Multiplexor1,
    PhaseFunction,
    demultiplex_1data,
    diagonal_gates,
    multiplexed_rotation_gates,
    multiplexor1_gates,
    qsd_factors,
    state_prep_angles,
    state_prep_gates,
)

# Plumbing constant of the cost model: a two-input circuit spends at most
# (2**k + 1) * COST_D * n CNOTs outside the g_l evaluations. Measured
# maximum of ``effective_d`` over 2 <= n <= 14, 1 <= k <= min(5, n - 1) is 50.3.
COST_D = 51


class DomainError(ValueError):
    """Parameters outside n > k * t, or too few bits for the requested copies."""


@dataclass(frozen=True)
class MassProdParams:
    n: int
    k: int
    t: int
    d: float = COST_D

    def __post_init__(self):
        if self.k < 1 or self.t < 1:
            raise DomainError(f"need k >= 1 and t >= 1, got k={self.k}, t={self.t}")
        if self.n <= self.k * self.t:
            raise DomainError(f"need n > k*t, got n={self.n}, k={self.k}, t={self.t}")


def cost_bound(params: MassProdParams) -> float:
    """(2^k + 1)^t (2^(n - t k) + 2^t d n)."""
    n, k, t, d = params.n, params.k, params.t, params.d
    return float((2 ** k + 1) ** t * (2 ** (n - t * k) + 2 ** t * d * n))


@dataclass(frozen=True)
class GSequence:
    k: int
    g: tuple[PhaseFunction, ...]


def derive_g_sequence(f: PhaseFunction, k: int) -> GSequence:
    if not 1 <= k < f.n:
        raise DomainError(f"need 1 <= k < n, got k={k}, n={f.n}")
    parts = [f.restriction(k, i).angles for i in range(2 ** k)]
    g = [parts[0]]
    g += [parts[i] - parts[i - 1] for i in range(1, 2 ** k)]
    g.append(-parts[-1])
    return GSequence(k, tuple(PhaseFunction(f.n - k, a) for a in g))


def star_gate(b: CircuitBuilder, delta: float, a: int, bq: int, tag: str = "") -> None:
    """Phase exp(i delta) when both qubits read 0; nothing when delta == 0."""
    if delta != 0:
        b.add("Diag2", (a, bq), (delta, 0.0, 0.0, 0.0), tag)


def build_star_gate(delta: float) -> Circuit:
    b = CircuitBuilder()
    a = b.add_register("a", 1)[0]
    bq = b.add_register("b", 1)[0]
    star_gate(b, delta, a, bq)
    return b.build()


def _mirror(b: CircuitBuilder, start: int, stop: int) -> None:
    for g in reversed(b.gates[start:stop]):
        b.append(g.adjoint())


def _build(f: PhaseFunction, n: int, k: int, t: int, c_role: str) -> Circuit:
    MassProdParams(n, k, t)
    if f.n != n:
        raise DomainError(f"phase function has {f.n} bits, expected {n}")
    pairs = 2 ** (t - 1)
    b = CircuitBuilder()
    xs, cs = [], []
    for j in range(2 * pairs):
        xs.append(b.add_register(f"x{j}", n))
        cs.append(b.add_register(f"c{j}", 1, c_role)[0])
    flag, z, cz, aq, bq = [], [], [], [], []
    for p in range(pairs):
        flag.append(b.add_register(f"flag{p}", 1, ANCILLA)[0])
        z.append(b.add_register(f"z{p}", n - k, ANCILLA))
        cz.append(b.add_register(f"cz{p}", 1, ANCILLA)[0])
        aq.append(b.add_register(f"a{p}", 1, ANCILLA)[0])
        bq.append(b.add_register(f"b{p}", 1, ANCILLA)[0])
    width = max(comparator_work_width(n), threshold_work_width(k))
    work = b.add_register("work", width, ANCILLA) if width else []

    # sort each pair so that x_{2p} holds min and x_{2p+1} holds max
    start = len(b.gates)
    for p in range(pairs):
        lo, hi = xs[2 * p], xs[2 * p + 1]
        comparator_gates(b, lo, hi, flag[p], work)
        for u, v in zip(lo, hi):
            b.cswap(flag[p], u, v)
        b.cswap(flag[p], cs[2 * p], cs[2 * p + 1])
    sort_stop = len(b.gates)

    seq = derive_g_sequence(f, k)
    for level, g in enumerate(seq.g):
        tag = f"g{level}"
        pro = len(b.gates)
        for p in range(pairs):
            m, big = xs[2 * p], xs[2 * p + 1]
            threshold_gates(b, m[:k], big[:k], level, aq[p], bq[p], work)
            for i in range(n - k):
                b.ccx(aq[p], m[k + i], z[p][i])
            for i in range(n - k):
                b.ccx(bq[p], big[k + i], z[p][i])
            b.ccx(aq[p], cs[2 * p], cz[p])
            b.x(cs[2 * p + 1])
            b.ccx(bq[p], cs[2 * p + 1], cz[p])
            b.x(cs[2 * p + 1])
        pro_stop = len(b.gates)
        if t == 1:
            rot = MultiplexedRotation("z", -2 * g.angles)
            multiplexed_rotation_gates(b, rot, z[0], cz[0], tag)
        else:
            sub = _build(g, n - k, k, t - 1, LOGICAL)
            bind = {}
            for p in range(pairs):
                bind[f"x{p}"] = z[p]
                bind[f"c{p}"] = [cz[p]]
            b.embed(sub, bind, prefix="s_", tag=tag)
        for p in range(pairs):
            star_gate(b, -float(g.angles[0]), aq[p], bq[p])
        _mirror(b, pro, pro_stop)
    _mirror(b, start, sort_stop)
    return b.build()


def build_mass_prod(f: PhaseFunction, n: int, k: int, t: int) -> Circuit:
    """Circuit implementing f_bar on 2**t copies (x_j, c_j), all registers logical."""
    return _build(f, n, k, t, LOGICAL)


def build_mass_prod_base(f: PhaseFunction, n: int, k: int) -> Circuit:
    return _build(f, n, k, 1, LOGICAL)


# parameter selection ---------------------------------------------------------


def copies_exponent(r: int) -> int:
    if r < 1:
        raise DomainError(f"need r >= 1, got {r}")
    return (r - 1).bit_length()


def choose_k(n: int, t: int, k: int | None = None) -> int:
    """Prefer k = ceil(log2 n); shrink toward 1 until n > k * t."""
    if k is not None:
        MassProdParams(n, k, t)
        return k
    k = max(1, math.ceil(math.log2(n))) if n > 0 else 1
    while k > 1 and n <= k * t:
        k -= 1
    MassProdParams(n, k, t)
    return k


def plumbing_cnots(n: int, k: int) -> int:
    """CNOTs of one two-input circuit outside the g_l evaluations (star gates included)."""
    f = PhaseFunction(n, np.ones(2 ** n))
    circ = _build(f, n, k, 1, LOGICAL)
    slot = sum(1 for g in circ.gates if g.tag and g.kind == "CNOT")
    return cnot_count(circ) - slot


def effective_d(n: int, k: int) -> float:
    """Smallest d making this (n, k) plumbing fit the (2**k + 1) d n budget."""
    return plumbing_cnots(n, k) / ((2 ** k + 1) * n)


# results -----------------------------------------------------------------------


@dataclass
class Synthesis:
    circuit: Circuit
    report: SynthesisReport


def _naive_diagonal_cnots(n: int) -> int:
    return max(0, 2 ** n - 2)


def mass_produce_diagonal(f: PhaseFunction, r: int, k: int | None = None) -> Synthesis:
    """diag(f) on 2**ceil(log2 r) copies x0, x1, ...; the c registers are ancillas."""
    t = copies_exponent(r)
    if t == 0:
        b = CircuitBuilder()
        diagonal_gates(b, f, b.add_register("x0", f.n))
        circ = b.build()
        return Synthesis(circ, report_for(circ, copies=1, naive_count=cnot_count(circ),
                                          construction="single-copy"))
    k = choose_k(f.n, t, k)
    circ = _build(f, f.n, k, t, ANCILLA)
    params = MassProdParams(f.n, k, t)
    naive = r * _naive_diagonal_cnots(f.n)
    return Synthesis(circ, report_for(circ, params=params, bound_value=cost_bound(params),
                                      copies=2 ** t, requested=r, naive_count=naive,
                                      construction="mass-production"))


_S = np.diag([1, 1j])
# V Rz(t) V^dagger = R_axis(t) under this package's rotation conventions
CONJUGATORS = {"x": HADAMARD @ PAULI_X, "y": _S @ HADAMARD @ PAULI_X}


def mass_produce_multiplexed_rotation(m: MultiplexedRotation, r: int,
                                      k: int | None = None) -> Synthesis:
    """Copies j act on selects x{j} and data qubit c{j}."""
    t = copies_exponent(r)
    s = m.s
    if t == 0:
        b = CircuitBuilder()
        sel = b.add_register("x0", s)
        data = b.add_register("c0", 1)[0]
        multiplexed_rotation_gates(b, m, sel, data)
        circ = b.build()
        return Synthesis(circ, report_for(circ, copies=1, naive_count=cnot_count(circ),
                                          construction="single-copy"))
    k = choose_k(s, t, k)
    # Rz(phi) blocks are f_bar with f = exp(-i phi / 2)
    core = _build(PhaseFunction(s, -m.angles / 2), s, k, t, LOGICAL)
    if m.axis == "z":
        circ = core
    else:
        v = CONJUGATORS[m.axis]
        b = CircuitBuilder(core.registers)
        datas = [b.reg(f"c{j}")[0] for j in range(2 ** t)]
        for q in datas:
            b.u2(q, v.conj().T)
        b.embed(core, {r_.name: b.reg(r_.name) for r_ in core.registers})
        for q in datas:
            b.u2(q, v)
        circ = b.build()
    params = MassProdParams(s, k, t)
    return Synthesis(circ, report_for(circ, params=params, bound_value=cost_bound(params),
                                      copies=2 ** t, requested=r, naive_count=r * 2 ** s,
                                      axis=m.axis, construction="mass-production"))


def _copy_registers(b: CircuitBuilder, copies: int, s: int) -> tuple[list, list]:
    sels, datas = [], []
    for j in range(copies):
        sels.append(b.add_register(f"x{j}", s))
        datas.append(b.add_register(f"c{j}", 1)[0])
    return sels, datas


def _bind_copies(sels: Sequence[Sequence[int]], datas: Sequence[int]) -> dict:
    bind = {}
    for j, (sel, d) in enumerate(zip(sels, datas)):
        bind[f"x{j}"] = list(sel)
        bind[f"c{j}"] = [d]
    return bind


def mass_produce_multiplexor1(m: Multiplexor1, r: int, k: int | None = None) -> Synthesis:
    """Four mass-produced rotations: Rz, Ry, Rz on the data and diag(delta) on the selects."""
    t = copies_exponent(r)
    s = m.s
    b = CircuitBuilder()
    copies = 2 ** t
    sels, datas = _copy_registers(b, copies, s)
    if t == 0:
        multiplexor1_gates(b, m, sels[0], datas[0])
        circ = b.build()
        return Synthesis(circ, report_for(circ, copies=1, naive_count=cnot_count(circ),
                                          construction="single-copy"))
    k = choose_k(s, t, k)
    delta, rz1, ryr, rz2 = demultiplex_1data(m)
    parts = []
    for name, rot in (("rz2", rz2), ("ry", ryr), ("rz1", rz1)):
        sub = mass_produce_multiplexed_rotation(rot, r, k)
        b.embed(sub.circuit, _bind_copies(sels, datas), prefix="mp_")
        parts.append({"name": name, **sub.report.to_dict()})
    sub = mass_produce_diagonal(delta, r, k)
    b.embed(sub.circuit, {f"x{j}": sels[j] for j in range(copies)}, prefix="mp_")
    parts.append({"name": "delta", **sub.report.to_dict()})
    circ = b.build()
    single = _single_multiplexor1_cnots(s)
    return Synthesis(circ, report_for(
        circ, params=MassProdParams(s, k, t), bound_value=sum(p["bound_value"] for p in parts),
        copies=copies, requested=r, naive_count=r * single, rotations=parts,
        construction="mass-production"))


def _single_multiplexor1_cnots(s: int) -> int:
    return 0 if s == 0 else 3 * 2 ** s + _naive_diagonal_cnots(s)


def mass_produce_state(psi: Sequence[complex], r: int, k: int | None = None) -> Synthesis:
    """Prepare psi on each register q{j} from |0...0>.

    Levels l >= ceil(n/2) are mass-produced; lower levels are repeated per copy.
    """
    sched = state_prep_angles(psi)
    n = sched.n
    t = copies_exponent(r)
    copies = 2 ** t
    b = CircuitBuilder()
    regs = [b.add_register(f"q{j}", n) for j in range(copies)]
    threshold = math.ceil(n / 2)
    levels = []
    for level in range(n):
        mass = t > 0 and level >= max(threshold, 1)
        start = len(b.gates)
        rots = (MultiplexedRotation("y", -sched.ry[level]), MultiplexedRotation("z", -sched.rz[level]))
        inner_bound = 0.0
        for rot in rots:
            if mass:
                sub = mass_produce_multiplexed_rotation(rot, r, k)
                bind = _bind_copies([q[:level] for q in regs], [q[level] for q in regs])
                b.embed(sub.circuit, bind, prefix=f"l{level}_")
                inner_bound += sub.report.bound_value
            else:
                for q in regs:
                    multiplexed_rotation_gates(b, rot, q[:level], q[level])
        cnots = sum(gate_cnot_cost(g) for g in b.gates[start:])
        levels.append({"level": level, "mass_produced": mass, "cnot_count": cnots,
                       **({"bound_value": inner_bound} if mass else {})})
    b.global_phase += copies * sched.global_phase
    circ = b.build()
    naive_levels = [lv for lv in levels if not lv["mass_produced"]]
    mass_levels = [lv for lv in levels if lv["mass_produced"]]
    return Synthesis(circ, report_for(
        circ, copies=copies, requested=r, naive_count=r * single_state_prep_cnots(n),
        threshold_level=threshold,
        naive_levels=[lv["level"] for lv in naive_levels],
        mass_levels=[lv["level"] for lv in mass_levels],
        naive_level_cnots=sum(lv["cnot_count"] for lv in naive_levels),
        mass_level_cnots=sum(lv["cnot_count"] for lv in mass_levels),
        levels=levels, construction="mass-production" if t else "single-copy"))


def single_state_prep_cnots(n: int) -> int:
    return max(0, 2 ** (n + 1) - 4)


def mass_produce_unitary(u: np.ndarray, r: int, k: int | None = None) -> Synthesis:
    """U on each register q{j}; factors that are too small fall back to repetition."""
    factors = qsd_factors(u)
    n = int(np.asarray(u).shape[0]).bit_length() - 1
    t = copies_exponent(r)
    copies = 2 ** t
    b = CircuitBuilder()
    regs = [b.add_register(f"q{j}", n) for j in range(copies)]
    details = []
    for i, fac in enumerate(factors):
        sels = [[q[s] for s in fac.selects] for q in regs]
        datas = [q[fac.data] for q in regs]
        start = len(b.gates)
        entry = {"index": i, "kind": fac.kind, "selects": len(fac.selects)}
        try:
            if t == 0:
                raise DomainError("single copy requested")
            if fac.kind == "mux":
                sub = mass_produce_multiplexor1(fac.op, r, k)
            else:
                sub = mass_produce_multiplexed_rotation(fac.op, r, k)
            b.embed(sub.circuit, _bind_copies(sels, datas), prefix="mp_")
            entry.update(mass_produced=True, bound_value=sub.report.bound_value)
        except DomainError as exc:
            for sel, d in zip(sels, datas):
                if fac.kind == "mux":
                    multiplexor1_gates(b, fac.op, sel, d)
                else:
                    multiplexed_rotation_gates(b, fac.op, sel, d)
            entry.update(mass_produced=False, fallback=str(exc))
        entry["cnot_count"] = sum(gate_cnot_cost(g) for g in b.gates[start:])
        if not entry["mass_produced"]:
            entry["bound_value"] = float(entry["cnot_count"])
        details.append(entry)
    circ = b.build()
    single = sum(_single_multiplexor1_cnots(len(f.selects)) if f.kind == "mux"
                 else 2 ** len(f.selects) for f in factors)
    return Synthesis(circ, report_for(
        circ, copies=copies, requested=r, naive_count=r * single,
        leaf_multiplexors=sum(1 for f in factors if f.kind == "mux"),
        ry_multiplexors=sum(1 for f in factors if f.kind == "ry"),
        headline_bound=2.5 * 4 ** n,
        inner_bound_sum=sum(e["bound_value"] for e in details),
        fallbacks=sum(1 for e in details if not e["mass_produced"]),
        factors=details, construction="mass-production" if t else "single-copy"))
