"""Arithmetic in GF(2^k), k <= 6, via log/exp tables.

Elements are plain ints in ``[0, 2^k)``; bit ``i`` is the coefficient of
``x^i`` in the polynomial representation modulo the defining polynomial.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

MAX_DEGREE = 6

DEFAULT_MODULI = {
    1: 0b11,  # x + 1
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
}


class FieldError(ValueError):
    pass


def poly_mulmod(a: int, b: int, modulus: int) -> int:
    """Carry-less product of ``a`` and ``b`` reduced by ``modulus``."""
    deg = modulus.bit_length() - 1
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> deg & 1:
            a ^= modulus
    return r


def poly_mod(a: int, m: int) -> int:
    dm = m.bit_length() - 1
    while a and a.bit_length() - 1 >= dm:
        a ^= m << (a.bit_length() - 1 - dm)
    return a


def is_irreducible(modulus: int) -> bool:
    """Irreducibility over GF(2) by trial division (degree <= 12 is instant)."""
    deg = modulus.bit_length() - 1
    if deg < 1:
        return False
    for d in range(2, 1 << (deg // 2 + 1)):
        if d.bit_length() - 1 > deg // 2:
            break
        if poly_mod(modulus, d) == 0:
            return False
    return True


class Field:
    """GF(2^k) with a fixed modulus; immutable once built.

    ``exp``/``log`` are built from the first generator of the multiplicative
    group found in bit-pattern order, so the modulus need not be primitive.
    ``mul_table`` and ``inv_table`` are numpy arrays intended for vectorized
    callers.
    """

    def __init__(self, k: int, modulus: int | None = None):
        if not 1 <= k <= MAX_DEGREE:
            raise FieldError(f"extension degree must be in 1..{MAX_DEGREE}, got {k}")
        if modulus is None:
            modulus = DEFAULT_MODULI[k]
        if modulus.bit_length() - 1 != k:
            raise FieldError(f"modulus {modulus:#b} does not have degree {k}")
        if not is_irreducible(modulus):
            raise FieldError(f"modulus {modulus:#b} is reducible over GF(2)")
        self.k = k
        self.q = 1 << k
        self.modulus = modulus
        q = self.q

        mul = np.zeros((q, q), dtype=np.uint8)
        for a in range(q):
            for b in range(a, q):
                mul[a, b] = mul[b, a] = poly_mulmod(a, b, modulus)
        self.mul_table = mul
        self.mul_table.setflags(write=False)

        self.generator = self._find_generator()
        self.exp = np.zeros(2 * (q - 1), dtype=np.int64)
        self.log = np.full(q, -1, dtype=np.int64)
        x = 1
        for i in range(q - 1):
            self.exp[i] = self.exp[i + q - 1] = x
            self.log[x] = i
            x = int(mul[x, self.generator])
        for arr in (self.exp, self.log):
            arr.setflags(write=False)

        inv = np.zeros(q, dtype=np.uint8)
        for a in range(1, q):
            inv[a] = self.exp[(q - 1 - self.log[a]) % (q - 1)]
        self.inv_table = inv
        self.inv_table.setflags(write=False)
        sq = mul[np.arange(q), np.arange(q)].copy()
        self.square_table = sq
        self.sqrt_table = np.argsort(sq).astype(np.uint8)
        for arr in (self.square_table, self.sqrt_table):
            arr.setflags(write=False)

    def _find_generator(self) -> int:
        q = self.q
        for g in range(1, q):
            x, order = g, 1
            while x != 1:
                x = int(self.mul_table[x, g])
                order += 1
            if order == q - 1:
                return g
        raise AssertionError("multiplicative group has no generator")

    # scalar operations -------------------------------------------------

    def elements(self) -> range:
        return range(self.q)

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        return int(self.mul_table[a, b])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in GF(2^k)")
        return int(self.inv_table[a])

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            if e < 0:
                raise ZeroDivisionError("0 to a negative power")
            return 1 if e == 0 else 0
        return int(self.exp[(int(self.log[a]) * e) % (self.q - 1)])

    def sqrt(self, a: int) -> int:
        """Unique square root; equals ``a^(q/2)`` in characteristic 2."""
        return int(self.sqrt_table[a])

    def frobenius(self, a: int, e: int = 1) -> int:
        """``a^(2^e)``."""
        for _ in range(e % self.k):
            a = int(self.square_table[a])
        return a

    def trace(self, a: int) -> int:
        t, x = 0, a
        for _ in range(self.k):
            t ^= x
            x = int(self.square_table[x])
        return t

    def primitive(self) -> int:
        return self.generator

    def multiplicative_order(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no multiplicative order")
        x, order = a, 1
        while x != 1:
            x = self.mul(x, a)
            order += 1
        return order

    # subfields ---------------------------------------------------------

    def subfield(self, d: int) -> list[int]:
        """Elements of the degree-``d`` subfield: fixed points of ``x -> x^(2^d)``."""
        if d < 1 or self.k % d:
            raise FieldError(f"{d} does not divide {self.k}")
        return [a for a in range(self.q) if self.frobenius(a, d) == a]

    def subfields(self) -> dict[int, list[int]]:
        return {d: self.subfield(d) for d in range(1, self.k + 1) if self.k % d == 0}

    # vector helpers ----------------------------------------------------

    def vmul(self, a, b):
        """Elementwise product of integer arrays (broadcasting)."""
        return self.mul_table[np.asarray(a, dtype=np.intp), np.asarray(b, dtype=np.intp)]

    def __repr__(self) -> str:
        return f"Field(k={self.k}, modulus={self.modulus:#b})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Field) and (self.k, self.modulus) == (other.k, other.modulus)

    def __hash__(self) -> int:
        return hash((self.k, self.modulus))

    @property
    def decl(self) -> tuple[int, int]:
        """The ``(k, modulus)`` pair used to declare this field in data files."""
        return (self.k, self.modulus)


@lru_cache(maxsize=None)
def make_field(k: int, modulus: int | None = None) -> Field:
    return Field(k, modulus)


def subfield_degrees(k: int) -> list[int]:
    return [d for d in range(1, k + 1) if k % d == 0]
