"""Subspaces of GF(2)^m as bit-packed canonical bases.

A vector is an int whose bit ``i`` is coordinate ``i``.  Bases are kept in
fully reduced echelon form with the lowest set bit of each row as its pivot,
rows sorted by pivot, which makes the basis a unique key for the subspace.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .field import Field


class DimensionMismatch(ValueError):
    pass


def _lowbit(v: int) -> int:
    return (v & -v).bit_length() - 1


def reduce_rows(rows: Iterable[int]) -> tuple[int, ...]:
    """Canonical reduced echelon basis of the span of ``rows``."""
    basis: dict[int, int] = {}
    for r in rows:
        for p in sorted(basis):
            if r >> p & 1:
                r ^= basis[p]
        if r == 0:
            continue
        p = _lowbit(r)
        for q, b in basis.items():
            if b >> p & 1:
                basis[q] = b ^ r
        basis[p] = r
    return tuple(basis[p] for p in sorted(basis))


def rank(rows: Iterable[int]) -> int:
    return len(reduce_rows(rows))


@dataclass(frozen=True)
class GfSubspace:
    """Subspace of GF(2)^ambient; projective dimension is ``rank - 1``."""

    ambient: int
    basis: tuple[int, ...]

    @classmethod
    def from_rows(cls, ambient: int, rows: Iterable[int]) -> "GfSubspace":
        rows = list(rows)
        limit = 1 << ambient
        for r in rows:
            if not 0 <= r < limit:
                raise DimensionMismatch(f"row {r:#x} does not fit in {ambient} coordinates")
        return cls(ambient, reduce_rows(rows))

    @classmethod
    def zero(cls, ambient: int) -> "GfSubspace":
        return cls(ambient, ())

    @classmethod
    def full(cls, ambient: int) -> "GfSubspace":
        return cls(ambient, tuple(1 << i for i in range(ambient)))

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def pivots(self) -> tuple[int, ...]:
        return tuple(_lowbit(r) for r in self.basis)

    def reduce(self, v: int) -> int:
        """Canonical representative of the coset ``v + self``."""
        for r in self.basis:
            if v >> _lowbit(r) & 1:
                v ^= r
        return v

    def __contains__(self, v: int) -> bool:
        return self.reduce(v) == 0

    def contains(self, other: "GfSubspace") -> bool:
        _check(self, other)
        return all(self.reduce(r) == 0 for r in other.basis)

    def vectors(self) -> np.ndarray:
        """All ``2^rank`` vectors, as an int64 array (index bits pick basis rows)."""
        out = np.zeros(1, dtype=np.int64)
        for r in self.basis:
            out = np.concatenate([out, out ^ r])
        return out

    def __repr__(self) -> str:
        rows = ", ".join(f"{r:#x}" for r in self.basis)
        return f"GfSubspace(ambient={self.ambient}, rank={self.rank}, [{rows}])"


def _check(*spaces: GfSubspace) -> None:
    if len({s.ambient for s in spaces}) > 1:
        raise DimensionMismatch("subspaces live in different ambient spaces")


def span(*spaces: GfSubspace) -> GfSubspace:
    if not spaces:
        raise ValueError("span of nothing needs an ambient dimension")
    _check(*spaces)
    return GfSubspace(spaces[0].ambient, reduce_rows(r for s in spaces for r in s.basis))


def meet(a: GfSubspace, b: GfSubspace) -> GfSubspace:
    """Intersection by the Zassenhaus sum-intersection trick."""
    _check(a, b)
    m = a.ambient
    low = (1 << m) - 1
    rows = [r | (r << m) for r in a.basis] + list(b.basis)
    red = reduce_rows(rows)
    return GfSubspace(m, reduce_rows(r >> m for r in red if r & low == 0))


def vectors_in_block(v: int, block: int, width: int) -> int:
    return v >> (block * width) & ((1 << width) - 1)


def field_reduce(field: Field, point: Sequence[int]) -> GfSubspace:
    """The GF(2)-subspace ``{lam * point : lam in GF(2^k)}`` of GF(2)^(k*len(point)).

    Coordinate ``i`` of ``point`` occupies bits ``[i*k, (i+1)*k)`` in the
    polynomial basis ``1, x, ..., x^(k-1)``.
    """
    if not any(point):
        raise ValueError("the zero vector is not a projective point")
    k = field.k
    rows = []
    for j in range(k):
        lam = 1 << j
        rows.append(sum(field.mul(lam, c) << (i * k) for i, c in enumerate(point)))
    return GfSubspace.from_rows(k * len(point), rows)


# dense matrices over GF(2), used for coordinate changes ------------------


def bits_to_array(v: int, width: int) -> np.ndarray:
    return np.array([(v >> i) & 1 for i in range(width)], dtype=np.uint8)


def array_to_bits(a: Sequence[int]) -> int:
    return sum(int(x) << i for i, x in enumerate(a) if x & 1)


def mat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(np.int64) @ b.astype(np.int64) % 2).astype(np.uint8)


def mat_inv(a: np.ndarray) -> np.ndarray:
    """Inverse over GF(2); raises ``np.linalg.LinAlgError`` if singular."""
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix is not square")
    m = np.concatenate([a.astype(np.uint8) % 2, np.eye(n, dtype=np.uint8)], axis=1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r, col]), None)
        if piv is None:
            raise np.linalg.LinAlgError("singular matrix over GF(2)")
        if piv != col:
            m[[col, piv]] = m[[piv, col]]
        for r in range(n):
            if r != col and m[r, col]:
                m[r] ^= m[col]
    return m[:, n:].copy()


def mat_rank(a: np.ndarray) -> int:
    return rank(array_to_bits(row) for row in np.asarray(a))
