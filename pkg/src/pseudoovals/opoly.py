"""Functions GF(q) -> GF(q) with f(0) = 0, stored as value tables.

A table is a ``uint8`` array of length ``q`` with ``table[x] = f(x)``, ``x``
indexed by bit pattern.  ``bytes(table)`` is used as the hash key wherever
sets of functions are needed.  Coefficient vectors only appear at the
interpolation boundary.
"""

from __future__ import annotations

from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .field import Field


class NotAnOPermutation(ValueError):
    pass


def as_table(field: Field, values: Sequence[int] | np.ndarray) -> np.ndarray:
    t = np.asarray(values, dtype=np.int64)
    if t.shape != (field.q,):
        raise ValueError(f"table must have length {field.q}, got shape {t.shape}")
    if t.min() < 0 or t.max() >= field.q:
        raise ValueError("table entries must be field elements")
    return t.astype(np.uint8)


def monomial(field: Field, e: int, coeff: int = 1) -> np.ndarray:
    """Table of ``coeff * x^e`` (``0^e = 0`` for ``e > 0``)."""
    t = np.array([field.mul(coeff, field.pow(x, e)) if x else 0 for x in range(field.q)], dtype=np.uint8)
    if e == 0:
        t[0] = coeff
    return t


def scale(field: Field, f: np.ndarray, lam: int) -> np.ndarray:
    return field.mul_table[lam][f]


def difference_quotient(field: Field, f: np.ndarray, s: int) -> np.ndarray:
    """``x -> (f(x+s) + f(s)) / x`` on nonzero ``x``; entry 0 is set to 0."""
    x = np.arange(field.q)
    out = field.mul_table[f[x ^ s] ^ f[s], field.inv_table[x]]
    out[0] = 0
    return out


def o_permutation_witness(field: Field, f: np.ndarray) -> str | None:
    """``None`` if ``f`` is an o-permutation, else a short reason naming the failing ``s``.

    Scans ``s`` in increasing bit-pattern order and stops at the first
    repeated (or zero) value of the difference quotient.
    """
    q = field.q
    f = [int(v) for v in f]
    if f[0] != 0:
        return "f(0) != 0"
    seen = 0
    for v in f:
        if seen >> v & 1:
            return f"not a permutation: value {v} repeats"
        seen |= 1 << v
    mul, inv = field.mul_table, field.inv_table
    for s in range(q):
        fs = f[s]
        seen = 1  # bit 0 marks the forbidden value 0
        for x in range(1, q):
            v = int(mul[f[x ^ s] ^ fs, inv[x]])
            if seen >> v & 1:
                return f"f_s not a permutation at s={s} (x={x})"
            seen |= 1 << v
    return None


def is_o_permutation(field: Field, f: np.ndarray) -> bool:
    return o_permutation_witness(field, f) is None


def o_permutation_mask(field: Field, tables: np.ndarray) -> np.ndarray:
    """Vectorized ``is_o_permutation`` over the rows of an ``(N, q)`` array.

    Rows are dropped as soon as one ``s`` fails, so the cost is dominated by
    the first few ``s`` when most candidates are bad.
    """
    tables = np.asarray(tables, dtype=np.uint8)
    if tables.ndim != 2 or tables.shape[1] != field.q:
        raise ValueError("expected an (N, q) array of tables")
    q = field.q
    xs = np.arange(1, q)
    invx = field.inv_table[xs].astype(np.intp)
    full = np.uint64((1 << q) - 2)
    one = np.uint64(1)
    alive = np.flatnonzero(tables[:, 0] == 0)
    for s in range(q):
        if not alive.size:
            break
        g = tables[alive]
        d = g[:, xs ^ s] ^ g[:, s : s + 1]
        quot = field.mul_table[d, invx].astype(np.uint64)
        seen = np.bitwise_or.reduce(one << quot, axis=1)
        alive = alive[seen == full]
    out = np.zeros(len(tables), dtype=bool)
    out[alive] = True
    return out


def normalize(field: Field, f: np.ndarray) -> np.ndarray:
    """The o-polynomial ``f / f(1)`` of an o-permutation."""
    why = o_permutation_witness(field, f)
    if why is not None:
        raise NotAnOPermutation(why)
    return scale(field, f, field.inv(int(f[1])))


def normalize_rows(field: Field, tables: np.ndarray) -> np.ndarray:
    """Scale every row so its value at 1 is 1 (rows must be nonzero at 1)."""
    inv1 = field.inv_table[tables[:, 1]]
    return field.mul_table[inv1[:, None], tables]


# interpolation ------------------------------------------------------------


def interpolate(field: Field, f: np.ndarray) -> list[int]:
    """Coefficients ``c[0..q-1]`` of the unique polynomial of degree < q matching ``f``.

    Sums the Lagrange basis ``L_a(X) = 1 + (X + a)^(q-1)``; in
    characteristic 2 every binomial coefficient of ``(X + a)^(q-1)`` is 1, so
    the coefficient of ``X^j`` (j >= 1) is ``sum_a f(a) a^(q-1-j)``.
    """
    q = field.q
    coeffs = [0] * q
    for a in range(q):
        fa = int(f[a])
        if not fa:
            continue
        coeffs[0] ^= fa
        for j in range(q):
            e = q - 1 - j
            term = 1 if e == 0 else field.pow(a, e)
            coeffs[j] ^= field.mul(fa, term)
    return coeffs


def evaluate(field: Field, coeffs: Sequence[int]) -> np.ndarray:
    out = np.zeros(field.q, dtype=np.uint8)
    for x in range(field.q):
        acc = 0
        for c in reversed(coeffs):  # Horner
            acc = field.mul(acc, x) ^ c
        out[x] = acc
    return out


def degree(coeffs: Sequence[int]) -> int:
    nz = [i for i, c in enumerate(coeffs) if c]
    return nz[-1] if nz else -1


# projective plane ----------------------------------------------------------


def oval_points(field: Field, f: np.ndarray) -> list[tuple[int, int, int]]:
    """``D(f) = {(1, t, f(t))} U {(0, 1, 0)}``; its nucleus is ``(0, 0, 1)``."""
    return [(1, t, int(f[t])) for t in range(field.q)] + [(0, 1, 0)]


NUCLEUS = (0, 0, 1)


def det3(field: Field, p: Sequence, r: Sequence, s: Sequence):
    """3x3 determinant over GF(2^k); works elementwise on arrays."""
    m = field.vmul
    return (
        m(p[0], m(r[1], s[2]) ^ m(r[2], s[1]))
        ^ m(p[1], m(r[0], s[2]) ^ m(r[2], s[0]))
        ^ m(p[2], m(r[0], s[1]) ^ m(r[1], s[0]))
    )


def collinear_triple(field: Field, points: Sequence[Sequence[int]], sample: int | None = None, seed: int = 0):
    """First collinear triple (as indices) among ``points``, or ``None``.

    With ``sample`` set, only that many random triples are tested.
    """
    pts = np.asarray(points, dtype=np.intp)
    n = len(pts)
    if sample is None:
        idx = np.array(list(combinations(range(n), 3)), dtype=np.intp).reshape(-1, 3)
    else:
        rng = np.random.default_rng(seed)
        idx = np.sort(np.array([rng.choice(n, 3, replace=False) for _ in range(sample)]), axis=1)
    for lo in range(0, len(idx), 200_000):
        chunk = idx[lo : lo + 200_000]
        a, b, c = (pts[chunk[:, i]].T for i in range(3))
        bad = np.flatnonzero(det3(field, a, b, c) == 0)
        if bad.size:
            return tuple(int(i) for i in chunk[bad[0]])
    return None


def lines_through(field: Field, point: Sequence[int]) -> list[tuple[int, int, int]]:
    """Line coordinates ``[l0, l1, l2]`` (normalized, first nonzero = 1) of the lines on ``point``."""
    out = []
    q = field.q
    for l in [(1, a, b) for a in range(q) for b in range(q)] + [(0, 1, b) for b in range(q)] + [(0, 0, 1)]:
        if field.mul(l[0], point[0]) ^ field.mul(l[1], point[1]) ^ field.mul(l[2], point[2]) == 0:
            out.append(l)
    return out


def on_line(field: Field, line: Sequence[int], point: Sequence[int]) -> bool:
    return (field.mul(line[0], point[0]) ^ field.mul(line[1], point[1]) ^ field.mul(line[2], point[2])) == 0


# brute-force oracle ---------------------------------------------------------

BRUTE_FORCE_MAX_Q = 16


def _search(field: Field, fix_one: bool) -> list[np.ndarray]:
    """Depth-first search over value assignments at x = 1, 2, ..., q-1.

    For each assigned pair ``a, b`` the slope ``(f(a) + f(b)) / (a + b)``
    must be nonzero and must not repeat among the slopes already seen from
    ``a`` or from ``b``.  With every point assigned this is exactly the
    condition that all difference quotients permute the nonzero elements.
    """
    q = field.q
    if q > BRUTE_FORCE_MAX_Q:
        raise ValueError(f"brute force is limited to q <= {BRUTE_FORCE_MAX_Q}")
    mul, inv = field.mul_table, field.inv_table
    slope = [[[0] * q for _ in range(q)] for _ in range(q)]  # slope[a][b][f(a) ^ f(b)]
    for a in range(q):
        for b in range(q):
            if a != b:
                ib = int(inv[a ^ b])
                for d in range(q):
                    slope[a][b][d] = int(mul[d, ib])
    f = [0] * q
    used = [0] * q  # bitmask of slopes seen from each point; bit 0 marks slope 0
    used[0] = 1
    results: list[np.ndarray] = []

    def place(b: int, v: int) -> list[int] | None:
        new_b = 1
        touched = []
        for a in range(b):
            bit = 1 << slope[a][b][f[a] ^ v]
            if used[a] & bit or new_b & bit:
                return None
            touched.append(bit)
            new_b |= bit
        for a, bit in enumerate(touched):
            used[a] |= bit
        used[b] = new_b
        f[b] = v
        return touched

    def unplace(b: int, touched: list[int]) -> None:
        for a, bit in enumerate(touched):
            used[a] ^= bit
        used[b] = 0

    def dfs(b: int) -> None:
        if b == q:
            results.append(np.array(f, dtype=np.uint8))
            return
        values = [1] if (b == 1 and fix_one) else range(1, q)
        for v in values:
            touched = place(b, v)
            if touched is not None:
                dfs(b + 1)
                unplace(b, touched)

    dfs(1)
    return results


def brute_force_opolynomials(field: Field) -> list[np.ndarray]:
    """Every o-polynomial (o-permutation with f(1) = 1) by exhaustive search."""
    return _search(field, fix_one=True)


def brute_force_opermutations(field: Field) -> list[np.ndarray]:
    """Every o-permutation by exhaustive search; f(1) is left free."""
    return _search(field, fix_one=False)


def table_keys(tables: Iterable[np.ndarray]) -> set[bytes]:
    return {bytes(np.asarray(t, dtype=np.uint8)) for t in tables}
