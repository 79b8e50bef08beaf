"""Pseudo-ovals in PG(3n-1, 2): elementary construction, verification, spreads, coordinates.

Vectors of GF(2)^(3n) are ints (bit ``i`` = coordinate ``i``); an element of
a pseudo-oval is a rank-``n`` :class:`GfSubspace`.  Matrices over GF(2) are
``uint8`` arrays acting on column vectors; a subspace "generated by the
columns of M" is the row space of ``M.T``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from itertools import combinations
from pathlib import Path
from typing import Sequence

import numpy as np

from .field import Field
from .gf2 import (
    GfSubspace,
    array_to_bits,
    bits_to_array,
    field_reduce,
    mat_inv,
    mat_mul,
    meet,
    reduce_rows,
    span,
)
from .opoly import NUCLEUS, oval_points


class InvariantViolation(ValueError):
    """A geometric object failed verification; ``witness`` says where."""

    def __init__(self, message: str, witness=None):
        super().__init__(message if witness is None else f"{message}: {witness}")
        self.witness = witness


@dataclass
class PseudoOval:
    n: int
    elements: list[GfSubspace]
    nucleus: GfSubspace | None = None
    source: dict = dc_field(default_factory=dict)

    @property
    def ambient(self) -> int:
        return 3 * self.n

    def tangent(self, i: int) -> GfSubspace:
        if self.nucleus is None:
            raise ValueError("tangents need the nucleus")
        return span(self.elements[i], self.nucleus)

    def tangents(self) -> list[GfSubspace]:
        return [self.tangent(i) for i in range(len(self.elements))]

    def index(self, x: GfSubspace) -> int:
        return self.elements.index(x)

    def to_json(self) -> str:
        d = {
            "n": self.n,
            "q": 1 << self.n,
            "source": self.source,
            "elements": [list(e.basis) for e in self.elements],
            "nucleus": list(self.nucleus.basis) if self.nucleus is not None else None,
        }
        return json.dumps(d, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PseudoOval":
        d = json.loads(text)
        n = int(d["n"])
        try:
            elements = [GfSubspace.from_rows(3 * n, rows) for rows in d["elements"]]
            nucleus = GfSubspace.from_rows(3 * n, d["nucleus"]) if d.get("nucleus") is not None else None
        except (TypeError, ValueError) as exc:
            raise ValueError(f"malformed pseudo-oval record: {exc}") from None
        return cls(n, elements, nucleus, d.get("source", {}))


# construction and verification ----------------------------------------------


def elementary(field: Field, f: np.ndarray, check: bool = True, sample: int | None = None) -> PseudoOval:
    """Field reduction of the oval ``D(f)``, with the reduced oval nucleus as nucleus.

    Elements are ordered as the points of ``D(f)``: ``(1, t, f(t))`` for
    ``t`` in bit order, then ``(0, 1, 0)``.
    """
    elements = [field_reduce(field, p) for p in oval_points(field, f)]
    o = PseudoOval(field.k, elements, field_reduce(field, NUCLEUS),
                   {"k": field.k, "modulus": field.modulus, "table": [int(v) for v in f]})
    if check:
        witness = pseudo_oval_witness(o, sample=sample)
        if witness is not None:
            raise InvariantViolation("elementary construction failed verification", witness)
    return o


def _avoids(space: GfSubspace, other: GfSubspace) -> bool:
    """``space`` and ``other`` meet trivially."""
    red = reduce_rows(space.reduce(r) for r in other.basis)
    return len(red) == other.rank


def pseudo_oval_witness(o: PseudoOval, sample: int | None = None, seed: int = 0):
    """``None`` if ``o`` is a pseudo-oval (with valid nucleus if given), else a witness tuple.

    Checks: ``2^n + 1`` rank-``n`` elements; every triple spans the ambient
    space (exhaustive unless ``sample`` is given, then that many random
    triples plus all pairs); each ``span(X, N)`` has rank ``2n`` and meets no
    other element.
    """
    n, m = o.n, 3 * o.n
    want = (1 << n) + 1
    if len(o.elements) != want:
        return ("count", len(o.elements), want)
    for i, x in enumerate(o.elements):
        if x.ambient != m or x.rank != n:
            return ("rank", i, x.rank)
    pair_span = {}
    for i, j in combinations(range(want), 2):
        s = span(o.elements[i], o.elements[j])
        if s.rank != 2 * n:
            return ("pair", i, j)
        pair_span[i, j] = s
    if sample is None:
        triples = combinations(range(want), 3)
    else:
        rng = np.random.default_rng(seed)
        triples = (tuple(sorted(rng.choice(want, 3, replace=False).tolist())) for _ in range(sample))
    for i, j, k in triples:
        if not _avoids(pair_span[i, j], o.elements[k]):
            return ("triple", i, j, k)
    if o.nucleus is not None:
        nuc = o.nucleus
        if nuc.ambient != m or nuc.rank != n:
            return ("nucleus rank", nuc.rank)
        for i, x in enumerate(o.elements):
            t = span(x, nuc)
            if t.rank != 2 * n:
                return ("tangent rank", i)
            for j, y in enumerate(o.elements):
                if j != i and not _avoids(t, y):
                    return ("tangent", i, j)
    return None


def verify_pseudo_oval(o: PseudoOval, sample: int | None = None) -> None:
    witness = pseudo_oval_witness(o, sample)
    if witness is not None:
        raise InvariantViolation("not a pseudo-oval", witness)


def nucleus_swap(o: PseudoOval, i: int) -> PseudoOval:
    """Replace element ``i`` by the nucleus; the removed element becomes the new nucleus."""
    if o.nucleus is None:
        raise ValueError("nucleus swap needs the nucleus")
    elements = list(o.elements)
    elements[i], nucleus = o.nucleus, elements[i]
    return PseudoOval(o.n, elements, nucleus, dict(o.source, swapped=i))


def canonical_elements(o: PseudoOval) -> list[tuple[int, ...]]:
    """The element set as a sorted list of canonical bases (frame-independent comparison key)."""
    return sorted(e.basis for e in o.elements)


# spreads -----------------------------------------------------------------------


def complement(x: GfSubspace) -> GfSubspace:
    """Coordinate subspace complementary to ``x``: unit vectors not in the pivot set."""
    piv = set(x.pivots)
    return GfSubspace.from_rows(x.ambient, [1 << i for i in range(x.ambient) if i not in piv])


def projection_spread(o: PseudoOval, i: int, onto: GfSubspace | None = None) -> tuple[list[GfSubspace], GfSubspace]:
    """Project the other elements from ``X = elements[i]`` onto ``onto`` (default: a coordinate complement).

    Returns ``(spread, onto)``: the spaces ``<X, Y> meet onto`` for ``Y != X``
    in element order, followed by ``T(X) meet onto``.
    """
    x = o.elements[i]
    s = complement(x) if onto is None else onto
    if s.rank != 2 * o.n or not _avoids(s, x):
        raise ValueError("projection target must be a complement of X")
    out = [meet(span(x, y), s) for j, y in enumerate(o.elements) if j != i]
    out.append(meet(o.tangent(i), s))
    return out, s


def spread_witness(spread: Sequence[GfSubspace], ambient: GfSubspace):
    """``None`` if ``spread`` partitions the nonzero vectors of ``ambient`` into rank-``n`` spaces."""
    n = ambient.rank // 2
    if ambient.rank != 2 * n:
        return ("ambient rank", ambient.rank)
    if len(spread) != (1 << n) + 1:
        return ("count", len(spread))
    for i, e in enumerate(spread):
        if e.rank != n or not ambient.contains(e):
            return ("element", i)
    for i, j in combinations(range(len(spread)), 2):
        if not _avoids(spread[i], spread[j]):
            return ("overlap", i, j)
    return None  # (2^n + 1)(2^n - 1) = 2^(2n) - 1 vectors, pairwise disjoint: a partition


# spread sets -------------------------------------------------------------------


@dataclass
class SpreadSet:
    """Matrices ``g(z)``, ``z`` in GF(2)^n read as an int; ``z`` is the first column of ``g(z)``."""

    n: int
    matrices: np.ndarray  # shape (2^n, n, n)

    def keys(self) -> set[bytes]:
        return {m.tobytes() for m in self.matrices}


def _coords(basis_rows: Sequence[int], width: int) -> np.ndarray:
    return np.array([bits_to_array(r, width) for r in basis_rows], dtype=np.uint8)


def _label(m: np.ndarray) -> int:
    return array_to_bits(m[:, 0])


def spread_set_from_pairs(n: int, mats: Sequence[np.ndarray]) -> SpreadSet:
    """Index matrices by their first column; raises if two share one."""
    out = np.zeros((1 << n, n, n), dtype=np.uint8)
    seen = set()
    for m in mats:
        z = _label(m)
        if z in seen:
            raise InvariantViolation("two matrices share a first column", z)
        seen.add(z)
        out[z] = m
    if len(seen) != 1 << n:
        raise InvariantViolation("spread set is incomplete", len(seen))
    return SpreadSet(n, out)


def spread_set(spread: Sequence[GfSubspace], zero: int, infinity: int, unit: int | None = None) -> SpreadSet:
    """Coordinatize a spread: ``spread[zero] = {(w, 0)}``, ``spread[infinity] = {(0, v)}``.

    In the basis (basis of the zero axis, basis of the infinity axis) every
    other element is ``{(w, M w)}``; ``M`` is recorded (column convention).
    With ``unit`` given, the coordinates on the infinity axis are changed so
    that ``spread[unit]`` gets ``M = I``.
    """
    a0, ainf = spread[zero], spread[infinity]
    n = a0.rank
    width = a0.ambient
    frame = _coords(list(a0.basis) + list(ainf.basis), width)
    # frame rows live in a 2n-dim subspace of GF(2)^width; solve on pivot columns
    piv = [p for p in GfSubspace.from_rows(width, list(a0.basis) + list(ainf.basis)).pivots]
    sq = frame[:, piv]
    inv = mat_inv(sq)
    mats = []
    for j, e in enumerate(spread):
        if j == infinity:
            continue
        c = mat_mul(_coords(e.basis, width)[:, piv], inv)  # rows: (x | y) coordinates
        x, y = c[:, :n], c[:, n:]
        # row vectors (x, y) with y = x M^T in column terms (w -> M w): M^T = x^-1 y
        mats.append(mat_mul(mat_inv(x), y).T.copy() if j != zero else np.zeros((n, n), dtype=np.uint8))
    if unit is not None:
        mu = mats[unit if unit < infinity else unit - 1]
        p = mat_inv(mu)
        mats = [mat_mul(p, m) for m in mats]
    return spread_set_from_pairs(n, mats)


def spread_set_witness(ss: SpreadSet):
    """``None`` if ``g(0) = 0`` and all pairwise differences are invertible."""
    if ss.matrices[0].any():
        return ("g(0) nonzero",)
    n = ss.n
    for z in range(1, 1 << n):
        if int(ss.matrices[z][:, 0].dot(1 << np.arange(n))) != z:
            return ("label", z)
    for z1, z2 in combinations(range(1 << n), 2):
        d = ss.matrices[z1] ^ ss.matrices[z2]
        if len(reduce_rows(array_to_bits(r) for r in d)) != n:
            return ("singular difference", z1, z2)
    return None


def desarguesian_witness(ss: SpreadSet):
    """``None`` if the spread set (scaled to contain ``I``) is a field, else why not.

    A spread set of order 2^n containing 0 and I, closed under addition and
    multiplication and commutative is a field GF(2^n) of matrices, and the
    spread is then regular.
    """
    w = spread_set_witness(ss)
    if w is not None:
        return w
    n = ss.n
    mats = ss.matrices
    eye = np.eye(n, dtype=np.uint8)
    if eye.tobytes() not in ss.keys():
        mats = np.array([mat_mul(mat_inv(mats[1]), m) for m in mats])
    keys = {m.tobytes() for m in mats}
    for i in range(len(mats)):
        for j in range(i, len(mats)):
            if (mats[i] ^ mats[j]).tobytes() not in keys:
                return ("sum", i, j)
            ab = mat_mul(mats[i], mats[j])
            if ab.tobytes() not in keys:
                return ("product", i, j)
            if not np.array_equal(ab, mat_mul(mats[j], mats[i])):
                return ("commutativity", i, j)
    return None


def is_desarguesian(ss: SpreadSet) -> bool:
    return desarguesian_witness(ss) is None


def multiplication_matrix(field: Field, a: int) -> np.ndarray:
    """Matrix of ``x -> a x`` on GF(2^k) in the polynomial basis (column convention)."""
    k = field.k
    return np.array([[field.mul(a, 1 << j) >> i & 1 for j in range(k)] for i in range(k)], dtype=np.uint8)


# Steinke coordinates ------------------------------------------------------------


@dataclass
class SteinkeMap:
    """``D(z) = [h(z); g(z); I]`` for ``z`` in GF(2)^n, ``D(inf) = [I; 0; 0]``.

    ``frame`` is the GF(2) basis (rows) in which the coordinates are taken:
    a basis of ``X_inf``, then of the nucleus ``N``, then of ``X_0``.
    ``index[z]`` is the position of ``X_z`` in the source pseudo-oval.
    """

    n: int
    h: np.ndarray  # (2^n, n, n)
    g: np.ndarray  # (2^n, n, n)
    frame: np.ndarray
    index: list[int]
    infinity: int

    def D(self, z: int | None) -> np.ndarray:
        n = self.n
        if z is None:
            return np.concatenate([np.eye(n, dtype=np.uint8), np.zeros((2 * n, n), dtype=np.uint8)])
        return np.concatenate([self.h[z], self.g[z], np.eye(n, dtype=np.uint8)])

    def spread_set(self) -> SpreadSet:
        return SpreadSet(self.n, self.g.copy())


def steinke_coordinates(o: PseudoOval, infinity: int | None = None, zero: int | None = None) -> SteinkeMap:
    """Coordinates with ``X_inf = [I;0;0]``, ``N = [0;I;0]``, ``X_0 = [0;0;I]``.

    Defaults: ``X_inf`` is the last element, ``X_0`` the first.  Elements
    are labelled by the first column of their ``g``, which runs through
    GF(2)^n because ``{g(z)}`` is a spread set.
    """
    if o.nucleus is None:
        raise ValueError("Steinke coordinates need the nucleus")
    n, m = o.n, 3 * o.n
    infinity = len(o.elements) - 1 if infinity is None else infinity
    zero = 0 if zero is None else zero
    if infinity == zero:
        raise ValueError("X_inf and X_0 must differ")
    frame_rows = list(o.elements[infinity].basis) + list(o.nucleus.basis) + list(o.elements[zero].basis)
    frame = _coords(frame_rows, m)
    try:
        finv = mat_inv(frame)
    except np.linalg.LinAlgError:
        raise InvariantViolation("X_inf, N, X_0 do not span the space") from None
    h = np.zeros((1 << n, n, n), dtype=np.uint8)
    g = np.zeros((1 << n, n, n), dtype=np.uint8)
    index = [-1] * (1 << n)
    for j, e in enumerate(o.elements):
        if j == infinity:
            continue
        c = mat_mul(_coords(e.basis, m), finv)  # rows (a | b | w)
        w = c[:, 2 * n :]
        try:
            winv = mat_inv(w)
        except np.linalg.LinAlgError:
            raise InvariantViolation("element meets X_inf + N nontrivially", j) from None
        rows = mat_mul(winv, c)  # rows (h^T | g^T | I)
        hz, gz = rows[:, :n].T.copy(), rows[:, n : 2 * n].T.copy()
        z = _label(gz)
        if index[z] != -1:
            raise InvariantViolation("two elements share a g-label", (index[z], j))
        index[z], h[z], g[z] = j, hz, gz
    return SteinkeMap(n, h, g, frame, index, infinity)


def steinke_sigma(o: PseudoOval, smap: SteinkeMap) -> GfSubspace:
    """``Sigma = <N, X_0>``, the target of the projection from ``X_inf``."""
    return span(o.nucleus, o.elements[smap.index[0]])


def pseudo_oval_from_file(path: str | Path) -> PseudoOval:
    return PseudoOval.from_json(Path(path).read_text())


def permute_blocks(o: PseudoOval, perm: Sequence[int]) -> PseudoOval:
    """Move coordinate block ``i`` (``n`` bits) to position ``perm[i]`` in every element and the nucleus."""
    n = o.n
    mask = (1 << n) - 1

    def move(v: int) -> int:
        return sum(((v >> (i * n)) & mask) << (perm[i] * n) for i in range(3))

    def sub(x: GfSubspace) -> GfSubspace:
        return GfSubspace.from_rows(x.ambient, [move(r) for r in x.basis])

    return PseudoOval(n, [sub(e) for e in o.elements], sub(o.nucleus) if o.nucleus is not None else None,
                      dict(o.source, blocks=list(perm)))
