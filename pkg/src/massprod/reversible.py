"""Classical reversible comparison circuits built from X, CNOT and Toffoli.

Integers are read with the first qubit as the highest-order bit. Both
circuits keep two chains of work bits, scanning from the top bit down:

    e_i = 1 iff bits 1..i of the operands are equal
    t_i = e_{i-1} and (bit i differs)

so ``x > y`` is the XOR over i of ``t_i and x_i`` (at most one t_i is set).
Everything except the writes to the output is uncomputed afterwards.
"""

from __future__ import annotations

from typing import Sequence

from .circuit import ANCILLA, Circuit, CircuitBuilder, LOGICAL


def comparator_work_width(n: int) -> int:
    return 2 * (n - 1)


_IMPLIED = None  # x_i = 1 is implied whenever bit i differs
_SKIP = -1  # x_i is the constant 0, so bit i can never decide x > y


def _greater_than(b: CircuitBuilder, diff: Sequence[int], out: int, work: Sequence[int],
                  x_bits: Sequence[int | None]) -> None:
    """Core scan. ``diff[i]`` must already hold x_i XOR y_i.

    ``x_bits[i]`` is the qubit holding x_i, or one of _IMPLIED / _SKIP.
    """
    n = len(diff)
    e, t = work[: n - 1], work[n - 1: 2 * (n - 1)]
    undo: list[tuple] = []

    def emit(kind: str, *qs: int) -> None:
        b.add(kind, qs)
        undo.append((kind, qs))

    def write(i: int, src: int) -> None:
        if x_bits[i] == _SKIP:
            return
        if x_bits[i] is _IMPLIED:
            b.cx(src, out)
        else:
            b.ccx(src, x_bits[i], out)

    write(0, diff[0])
    if n > 1:
        emit("CNOT", diff[0], e[0])
        emit("X", e[0])
    for i in range(1, n):
        ti = t[i - 1]
        emit("Toffoli", e[i - 1], diff[i], ti)
        write(i, ti)
        if i < n - 1:
            emit("CNOT", e[i - 1], e[i])
            emit("CNOT", ti, e[i])
    for kind, qs in reversed(undo):
        b.add(kind, qs)


def comparator_gates(b: CircuitBuilder, x: Sequence[int], y: Sequence[int], flag: int,
                     work: Sequence[int]) -> None:
    """flag ^= [x > y]; x, y and work are restored."""
    for xi, yi in zip(x, y):
        b.cx(xi, yi)
    _greater_than(b, y, flag, work, list(x))
    for xi, yi in zip(x, y):
        b.cx(xi, yi)


def build_comparator(n: int) -> Circuit:
    """A_n: registers x, y (logical, n each), flag and work (ancilla)."""
    if n < 1:
        raise ValueError("comparator needs n >= 1")
    b = CircuitBuilder()
    x = b.add_register("x", n, LOGICAL)
    y = b.add_register("y", n, LOGICAL)
    flag = b.add_register("flag", 1, ANCILLA)[0]
    work = b.add_register("work", comparator_work_width(n), ANCILLA) if n > 1 else []
    comparator_gates(b, x, y, flag, work)
    return b.build()


def _greater_than_const(b: CircuitBuilder, v: Sequence[int], const: int, out: int,
                        work: Sequence[int]) -> None:
    """out ^= [v > const] for a classical constant 0 <= const < 2**len(v)."""
    k = len(v)
    cbits = [(const >> (k - 1 - i)) & 1 for i in range(k)]
    flips = [q for q, c in zip(v, cbits) if c]
    for q in flips:
        b.x(q)
    # after flipping, v_i == const_i iff the qubit reads 0; v > const needs const_i = 0.
    x_bits = [_IMPLIED if c == 0 else _SKIP for c in cbits]
    _greater_than(b, v, out, work, x_bits)
    for q in flips:
        b.x(q)


def threshold_gates(b: CircuitBuilder, m_prefix: Sequence[int], big_prefix: Sequence[int],
                    level: int, a: int, bq: int, work: Sequence[int]) -> None:
    """a ^= [level <= m_prefix], bq ^= [level > big_prefix] with constant folding."""
    k = len(m_prefix)
    top = 1 << k
    if not 0 <= level <= top:
        raise ValueError(f"level {level} outside [0, {top}]")
    if level == 0:
        b.x(a)
    elif level < top:
        # level <= m  <=>  m > level - 1
        _greater_than_const(b, m_prefix, level - 1, a, work)
    if level == top:
        b.x(bq)
    elif level > 0:
        # level > M  <=>  not (M > level - 1)
        _greater_than_const(b, big_prefix, level - 1, bq, work)
        b.x(bq)


def threshold_work_width(k: int) -> int:
    return 2 * (k - 1)


def build_threshold(n: int, k: int, level: int) -> Circuit:
    """B_{n,k,level}: registers a, b (ancilla), m, M (logical, n each), work."""
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    bld = CircuitBuilder()
    a = bld.add_register("a", 1, ANCILLA)[0]
    bq = bld.add_register("b", 1, ANCILLA)[0]
    m = bld.add_register("m", n, LOGICAL)
    big = bld.add_register("M", n, LOGICAL)
    work = bld.add_register("work", threshold_work_width(k), ANCILLA) if k > 1 else []
    threshold_gates(bld, m[:k], big[:k], level, a, bq, work)
    return bld.build()
