"""Value tables of the known hyperoval o-polynomial families.

Only used to (re)generate and cross-check the shipped catalog files; the
catalog loader never trusts these and re-validates every entry.
"""

from __future__ import annotations

import numpy as np

from .field import Field, is_irreducible, poly_mulmod
from .opoly import evaluate


def from_terms(field: Field, terms: list[tuple[int, int]]) -> np.ndarray:
    """Table of ``sum coeff * x^exp`` for ``(exp, coeff)`` pairs."""
    coeffs = [0] * field.q
    for e, c in terms:
        if e >= field.q:  # x^q = x on GF(q)
            e = (e - 1) % (field.q - 1) + 1
        coeffs[e] ^= c
    return evaluate(field, coeffs)


def regular(field: Field) -> np.ndarray:
    return from_terms(field, [(2, 1)])


def translation(field: Field, i: int) -> np.ndarray:
    return from_terms(field, [(1 << i, 1)])


def segre(field: Field) -> np.ndarray:
    return from_terms(field, [(6, 1)])


def _exp_mod(num: int, den: int, field: Field) -> int:
    """The exponent ``num/den`` modulo ``q - 1``."""
    return num * pow(den, -1, field.q - 1) % (field.q - 1)


def payne(field: Field) -> np.ndarray:
    """``x^(1/6) + x^(3/6) + x^(5/6)``, q = 2^h with h odd."""
    return from_terms(field, [(_exp_mod(j, 6, field), 1) for j in (1, 3, 5)])


def cherowitzo(field: Field) -> np.ndarray:
    """``x^s + x^(s+2) + x^(3s+4)`` with ``s = 2^((h+1)/2)``, h odd."""
    s = 1 << ((field.k + 1) // 2)
    return from_terms(field, [(s % (field.q - 1), 1), ((s + 2) % (field.q - 1), 1), ((3 * s + 4) % (field.q - 1), 1)])


def okeefe_penttila_32(field: Field) -> np.ndarray:
    """The sporadic GF(32) o-polynomial, written for ``eta^5 = eta^2 + 1``."""
    if field.decl != (5, 0b100101):
        raise ValueError("defined for GF(32) with modulus x^5 + x^2 + 1")
    eta = lambda i: field.pow(0b10, i)
    terms = [(4, 1), (16, 1), (28, 1)]
    terms += [(e, eta(11)) for e in (6, 10, 14, 18, 22, 26)]
    terms += [(8, eta(20)), (20, eta(20)), (12, eta(6)), (24, eta(6))]
    return from_terms(field, terms)


def lunelli_sce(field: Field) -> np.ndarray:
    """The GF(16) o-polynomial, written for ``eta^4 = eta + 1``."""
    if field.decl != (4, 0b10011):
        raise ValueError("defined for GF(16) with modulus x^4 + x + 1")
    eta = lambda i: field.pow(0b10, i)
    return from_terms(field, [(12, 1), (10, 1), (8, eta(11)), (6, 1), (4, eta(2)), (2, eta(9))])


def subiaco(field: Field, d: int) -> np.ndarray:
    """``[d^2(x^4+x) + d^2(1+d+d^2)(x^3+x^2)] / (x^4 + d^2 x^2 + 1) + x^(1/2)``.

    Needs ``Tr(1/d) = 1`` (so the denominator has no roots).
    """
    m = field.mul
    d2 = m(d, d)
    e = m(d2, 1 ^ d ^ d2)
    out = np.zeros(field.q, dtype=np.uint8)
    for x in range(field.q):
        x2 = m(x, x)
        x3 = m(x2, x)
        x4 = m(x2, x2)
        num = m(d2, x4 ^ x) ^ m(e, x3 ^ x2)
        den = x4 ^ m(d2, x2) ^ 1
        out[x] = field.div(num, den) ^ field.sqrt(x)
    return out


def subiaco_parameters(field: Field) -> list[int]:
    """Admissible ``d``: ``Tr(1/d) = 1``, and ``d`` outside GF(4) when h = 2 mod 4."""
    out = []
    gf4 = set(field.subfield(2)) if field.k % 2 == 0 else set()
    for d in range(1, field.q):
        if field.trace(field.inv(d)) != 1:
            continue
        if field.k % 4 == 2 and d in gf4:
            continue
        out.append(d)
    return out


class _Quadratic:
    """GF(2^(2k)) with GF(2^k) embedded, just enough for the Adelaide formula."""

    def __init__(self, field: Field):
        self.base = field
        n = 2 * field.k
        self.n = n
        self.modulus = next(m for m in range(1 << n, 1 << (n + 1)) if is_irreducible(m))
        self.Q = 1 << n
        root = next(y for y in range(2, self.Q) if self._eval_base_modulus(y) == 0)
        self.embed_table = [self._embed(v, root) for v in range(field.q)]
        self.unembed = {w: v for v, w in enumerate(self.embed_table)}

    def mul(self, a: int, b: int) -> int:
        return poly_mulmod(a, b, self.modulus)

    def pow(self, a: int, e: int) -> int:
        e %= self.Q - 1
        r = 1
        while e:
            if e & 1:
                r = self.mul(r, a)
            a = self.mul(a, a)
            e >>= 1
        return r

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError
        return self.pow(a, self.Q - 2)

    def _eval_base_modulus(self, y: int) -> int:
        acc, p = 0, 1
        for i in range(self.base.k + 1):
            if self.base.modulus >> i & 1:
                acc ^= p
            p = self.mul(p, y)
        return acc

    def _embed(self, v: int, root: int) -> int:
        acc, p = 0, 1
        for i in range(self.base.k):
            if v >> i & 1:
                acc ^= p
            p = self.mul(p, root)
        return acc


def adelaide(field: Field, beta_index: int = 0, sign: int = 1) -> np.ndarray:
    """Adelaide o-polynomial for q = 2^h, h even.

    ``beta`` is the ``beta_index``-th element (in bit order) of the norm-1
    group of GF(q^2) other than 1, ``T(x) = x + x^q`` and
    ``m = sign * (q - 1)/3 mod (q + 1)``::

        f(x) = T(beta^m)(x + 1)/T(beta)
               + T((beta x + beta^q)^m) / (T(beta) (x + T(beta) x^(1/2) + 1)^(m-1))
               + x^(1/2)
    """
    if field.k % 2:
        raise ValueError("Adelaide hyperovals need q square")
    ext = _Quadratic(field)
    q = field.q
    T = lambda y: y ^ ext.pow(y, q)
    norm_one = [y for y in range(2, ext.Q) if ext.pow(y, q + 1) == 1]
    beta = norm_one[beta_index]
    m = (sign * ((q - 1) // 3)) % (q + 1)
    tb = T(beta)
    tb_inv = ext.inv(tb)
    c1 = ext.mul(T(ext.pow(beta, m)), tb_inv)
    beta_q = ext.pow(beta, q)
    out = np.zeros(q, dtype=np.uint8)
    for x in range(q):
        X = ext.embed_table[x]
        sx = ext.embed_table[field.sqrt(x)]
        term1 = ext.mul(c1, X ^ 1)
        base = X ^ ext.mul(tb, sx) ^ 1
        num = T(ext.pow(ext.mul(beta, X) ^ beta_q, m))
        den = ext.mul(tb, ext.pow(base, m - 1))
        val = term1 ^ ext.mul(num, ext.inv(den)) ^ sx
        if val not in ext.unembed:
            raise ArithmeticError("Adelaide value fell outside GF(q)")
        out[x] = ext.unembed[val]
    return out


def qclan_partner(field: Field, f: np.ndarray) -> np.ndarray:
    """Some ``y`` with ``y(0) = 0`` making ``[[f(t), t^(1/2)], [0, y(t)]]`` a q-clan.

    The q-clan condition in characteristic 2 is
    ``Tr((f(s)+f(t)) (y(s)+y(t)) / (s+t)) = 1`` for all ``s != t``; each
    pair cuts the candidates for ``y(t)`` to an affine hyperplane, so a plain
    depth-first search returns the bit-order-least solution quickly.
    Raises ``ValueError`` when ``f`` belongs to no q-clan this way.
    """
    q = field.q
    tr = np.array([field.trace(v) for v in range(q)], dtype=np.uint8)
    mul = field.mul_table
    coef = np.zeros((q, q), dtype=np.intp)
    for s in range(q):
        for t in range(q):
            if s != t:
                coef[s, t] = field.div(int(f[s]) ^ int(f[t]), s ^ t)
    y = [0] * q

    def dfs(t: int) -> bool:
        if t == q:
            return True
        cand = np.arange(q)
        for s in range(t):
            cand = cand[tr[mul[coef[s, t], cand ^ y[s]]] == 1]
            if not cand.size:
                return False
        for v in cand:
            y[t] = int(v)
            if dfs(t + 1):
                return True
        return False

    if not dfs(1):
        raise ValueError("no q-clan partner")
    return np.array(y, dtype=np.uint8)


def herd_member(field: Field, f: np.ndarray, y: np.ndarray, s: int) -> np.ndarray:
    """``f(t) + s y(t) + s^(1/2) t^(1/2)``, an oval function of the herd of the q-clan (f, y)."""
    return f ^ field.mul_table[s][y] ^ field.mul_table[field.sqrt(s)][field.sqrt_table]


def subiaco_second(field: Field, d: int = 2, s: int = 2) -> np.ndarray:
    """A herd oval of the Subiaco q-clan lying on the second Subiaco hyperoval (h = 2 mod 4).

    The choice ``d = 2, s = 2`` is verified for GF(64) with the default
    modulus by the class count of the resulting hyperoval.
    """
    f = subiaco(field, d)
    return herd_member(field, f, qclan_partner(field, f), s)
