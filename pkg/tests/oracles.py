"""Independent reference computations for the test suite.

Nothing here calls the package's synthesis code: matrices are assembled from
first principles and counts are re-derived by hand from the gate budget of
each building block.
"""

from __future__ import annotations

import math

import numpy as np


def rz(t):
    return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])


def ry(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, s], [-s, c]], dtype=complex)


def rx(t):
    c, s = math.cos(t / 2), math.sin(t / 2)
    return np.array([[c, 1j * s], [1j * s, c]], dtype=complex)


ROT = {"x": rx, "y": ry, "z": rz}


def block_diagonal(blocks):
    size = sum(b.shape[0] for b in blocks)
    out = np.zeros((size, size), dtype=complex)
    i = 0
    for b in blocks:
        out[i:i + b.shape[0], i:i + b.shape[0]] = b
        i += b.shape[0]
    return out


def mux_rotation_matrix(axis, angles):
    return block_diagonal([ROT[axis](a) for a in angles])


def toffoli_matrix():
    m = np.eye(8, dtype=complex)
    m[[6, 7]] = m[[7, 6]]
    return m


def same_up_to_phase(a, b, tol):
    a, b = np.asarray(a), np.asarray(b)
    i = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    lam = a[i] / b[i]
    return abs(abs(lam) - 1) < tol and np.max(np.abs(a - lam * b)) < tol


def lifted_angle(angles, x, c):
    """Angle of f(x)^(1 - 2c)."""
    return angles[x] * (1 - 2 * c)


def g_sequence(angles, n, k):
    """Telescoping functions built by complex division, returned as angles."""
    size = 2 ** (n - k)
    f = [np.exp(1j * np.asarray(angles[i * size:(i + 1) * size])) for i in range(2 ** k)]
    g = [f[0]] + [f[i] / f[i - 1] for i in range(1, 2 ** k)] + [1 / f[-1]]
    return [np.angle(v) for v in g]


def bits_of(value, width):
    return [(value >> (width - 1 - i)) & 1 for i in range(width)]


# CNOT counts re-derived from the building blocks -----------------------------

TOFFOLI, FREDKIN = 6, 8


def _scan_cnots(writes):
    n = len(writes)
    total = sum(writes)
    if n > 1:
        total += 2 + 12 * (n - 1) + 4 * max(0, n - 2)
    return total


def comparator_cnots(n):
    return 2 * n + _scan_cnots([TOFFOLI] * n)


def threshold_cnots(k, level):
    if level == 0 or level == 2 ** k:
        return 0
    const = bits_of(level - 1, k)
    return 2 * _scan_cnots([1 if c == 0 else 0 for c in const])


def mass_prod_cnots(angles, n, k, t):
    """Expected CNOT total of the two-input construction on 2**t copies."""
    pairs = 2 ** (t - 1)
    total = 2 * pairs * (comparator_cnots(n) + FREDKIN * (n + 1))
    for level, g in enumerate(g_sequence(angles, n, k)):
        load = TOFFOLI * (2 * (n - k) + 2)
        total += 2 * pairs * (threshold_cnots(k, level) + load)
        if t == 1:
            total += 2 ** (n - k)
        else:
            total += mass_prod_cnots(g, n - k, k, t - 1)
        if abs(math.remainder(g[0], 2 * math.pi)) > 1e-15:
            total += 2 * pairs
    return total


def bound_formula(n, k, t, d):
    """Second, separately written evaluation of the cost formula."""
    blocks = pow(2 ** k + 1, t)
    return blocks * (2.0 ** (n - t * k) + (2 ** t) * d * n)
