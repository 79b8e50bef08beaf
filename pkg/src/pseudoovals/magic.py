"""The magic action of PGammaL(2, q) on functions with f(0) = 0, and oval classes.

For ``psi = (A, gamma)`` with ``A = [[a, b], [c, d]]`` and ``gamma: y -> y^(2^e)``::

    psi f(x) = det(A)^(-1/2) * [ (b x + d) f^gamma((a x + c)/(b x + d))
                                 + b x f^gamma(a / b) + d f^gamma(c / d) ]

where ``f^gamma`` applies ``gamma`` to the coefficients of ``f`` (as a table:
``gamma(f(gamma^-1(y)))``).  Terms with ``b = 0``, ``d = 0`` or ``b x + d = 0``
are zero.  The product ``(A, gamma) * (B, delta) = (A B^gamma, gamma delta)``
makes ``apply(psi * phi, f) == apply(psi, apply(phi, f))``.

Orbits are computed on normalized tables (value 1 at 1), i.e. on
o-polynomials; the o-permutation orbit is the set of all nonzero scalar
multiples of that.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .field import Field
from .opoly import normalize, normalize_rows


class SingularMatrix(ValueError):
    pass


@dataclass(frozen=True)
class MagicElement:
    a: int
    b: int
    c: int
    d: int
    e: int = 0

    def det(self, field: Field) -> int:
        return field.mul(self.a, self.d) ^ field.mul(self.b, self.c)

    def compose(self, other: "MagicElement", field: Field) -> "MagicElement":
        """``self * other``: apply ``other`` first."""
        fr = lambda v: field.frobenius(v, self.e)
        a2, b2, c2, d2 = fr(other.a), fr(other.b), fr(other.c), fr(other.d)
        m = field.mul
        return MagicElement(
            m(self.a, a2) ^ m(self.b, c2),
            m(self.a, b2) ^ m(self.b, d2),
            m(self.c, a2) ^ m(self.d, c2),
            m(self.c, b2) ^ m(self.d, d2),
            (self.e + other.e) % field.k,
        )

    @classmethod
    def identity(cls) -> "MagicElement":
        return cls(1, 0, 0, 1, 0)

    @classmethod
    def random(cls, field: Field, rng: np.random.Generator) -> "MagicElement":
        while True:
            a, b, c, d = (int(v) for v in rng.integers(0, field.q, 4))
            psi = cls(a, b, c, d, int(rng.integers(0, field.k)))
            if psi.det(field):
                return psi


def transvection() -> MagicElement:
    return MagicElement(1, 0, 1, 1)


def diagonal(g: int) -> MagicElement:
    return MagicElement(g, 0, 0, 1)


def swap() -> MagicElement:
    return MagicElement(0, 1, 1, 0)


def frobenius() -> MagicElement:
    return MagicElement(1, 0, 0, 1, 1)


def default_generators(field: Field) -> list[MagicElement]:
    """Generators of PGammaL(2, q): lower unitriangular, diagonal, the swap, Frobenius."""
    gens = [transvection(), diagonal(field.primitive()), swap()]
    if field.k > 1:
        gens.append(frobenius())
    return gens


class _Plan:
    """Index arrays for one ``psi``; applying it is then a handful of gathers."""

    def __init__(self, field: Field, psi: MagicElement):
        det = psi.det(field)
        if det == 0:
            raise SingularMatrix(f"{psi} has zero determinant")
        q = field.q
        mul, inv = field.mul_table, field.inv_table
        self.scale = field.sqrt(field.inv(det))
        gam = np.array([field.frobenius(y, psi.e) for y in range(q)], dtype=np.uint8)
        self.gamma = gam
        self.gamma_inv = np.argsort(gam).astype(np.intp)
        x = np.arange(q)
        den = mul[psi.b, x] ^ psi.d
        num = mul[psi.a, x] ^ psi.c
        u = mul[num, inv[den]]
        self.den = np.where(den != 0, den, 0).astype(np.uint8)
        self.u = u.astype(np.intp)
        # b x f(a/b) and d f(c/d)
        self.lin_coef = mul[psi.b, x].astype(np.uint8)
        self.lin_at = int(field.div(psi.a, psi.b)) if psi.b else None
        self.const_coef = psi.d
        self.const_at = int(field.div(psi.c, psi.d)) if psi.d else None
        self.field = field

    def __call__(self, tables: np.ndarray) -> np.ndarray:
        field = self.field
        mul = field.mul_table
        fg = self.gamma[tables[:, self.gamma_inv]]  # f^gamma as tables
        out = mul[self.den[None, :], fg[:, self.u]]
        if self.lin_at is not None:
            out ^= mul[self.lin_coef[None, :], fg[:, self.lin_at : self.lin_at + 1]]
        if self.const_at is not None:
            out ^= mul[self.const_coef, fg[:, self.const_at : self.const_at + 1]]
        return mul[self.scale, out]


def magic_apply(field: Field, psi: MagicElement, f: np.ndarray) -> np.ndarray:
    return _Plan(field, psi)(np.asarray(f, dtype=np.uint8)[None, :])[0]


def magic_apply_rows(field: Field, psi: MagicElement, tables: np.ndarray) -> np.ndarray:
    return _Plan(field, psi)(np.asarray(tables, dtype=np.uint8))


# orbits ---------------------------------------------------------------------


def row_keys(tables: np.ndarray) -> np.ndarray:
    """One opaque ``void`` key per row; keys sort exactly like the rows do lexicographically."""
    t = np.ascontiguousarray(tables, dtype=np.uint8)
    return t.view(f"V{t.shape[1]}").ravel()


def _member(sorted_keys: np.ndarray, keys: np.ndarray) -> np.ndarray:
    if not len(sorted_keys):
        return np.zeros(len(keys), dtype=bool)
    pos = np.searchsorted(sorted_keys, keys)
    pos[pos == len(sorted_keys)] = 0
    return sorted_keys[pos] == keys


def normalized_orbit(
    field: Field, f: np.ndarray, generators: Sequence[MagicElement] | None = None
) -> np.ndarray:
    """All o-polynomials magic-equivalent to ``f``, sorted lexicographically.

    Breadth-first closure over ``generators`` with normalization after every
    step; scalars therefore never need to be applied explicitly.
    """
    if generators is None:
        generators = default_generators(field)
    plans = [_Plan(field, g) for g in generators]
    q = field.q
    start = normalize(field, np.asarray(f, dtype=np.uint8))[None, :]
    seen = start.copy()
    frontier = start
    while len(frontier):
        images = np.concatenate([normalize_rows(field, p(frontier)) for p in plans])
        images = np.unique(row_keys(images))
        fresh = images[~_member(row_keys(seen), images)]
        fresh = np.frombuffer(fresh.tobytes(), dtype=np.uint8).reshape(-1, q)
        seen = np.concatenate([seen, fresh])
        seen = seen[np.argsort(row_keys(seen), kind="stable")]
        frontier = fresh
    return seen


def orbit(field: Field, f: np.ndarray, generators: Sequence[MagicElement] | None = None) -> np.ndarray:
    """The o-permutation orbit: every nonzero scalar multiple of the normalized orbit."""
    base = normalized_orbit(field, f, generators)
    return np.concatenate([field.mul_table[lam][base] for lam in range(1, field.q)])


def class_label(field: Field, f: np.ndarray) -> np.ndarray:
    """Lexicographically smallest o-polynomial in the magic class of ``f``."""
    return normalized_orbit(field, f)[0].copy()


def equivalent(field: Field, f: np.ndarray, g: np.ndarray) -> bool:
    target = normalize(field, np.asarray(g, dtype=np.uint8))
    return bool(_member(row_keys(normalized_orbit(field, f)), row_keys(target[None, :]))[0])


# orbit cache files -----------------------------------------------------------

CACHE_MAGIC = b"PSOVORB"
CACHE_VERSION = 1
_HEADER = struct.Struct("<7sBBHHI")


def default_cache_dir() -> Path:
    return Path(os.environ.get("PSEUDOOVALS_CACHE", Path.home() / ".cache" / "pseudoovals"))


def write_orbit_file(path: Path, field: Field, label: np.ndarray, rows: np.ndarray) -> None:
    """Header (magic, version, k, modulus, q, count), the label, then sorted tables."""
    rows = np.asarray(rows, dtype=np.uint8)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, CACHE_VERSION, field.k, field.modulus, field.q, len(rows)))
        fh.write(np.asarray(label, dtype=np.uint8).tobytes())
        fh.write(rows.tobytes())
    os.replace(tmp, path)


def read_orbit_file(path: Path, field: Field) -> tuple[np.ndarray, np.ndarray]:
    data = Path(path).read_bytes()
    magic, version, k, modulus, q, count = _HEADER.unpack_from(data)
    if magic != CACHE_MAGIC or version != CACHE_VERSION:
        raise ValueError(f"{path}: not an orbit cache file of version {CACHE_VERSION}")
    if (k, modulus) != field.decl:
        raise ValueError(f"{path}: cached for field {(k, modulus)}, wanted {field.decl}")
    off = _HEADER.size
    label = np.frombuffer(data, dtype=np.uint8, count=q, offset=off).copy()
    rows = np.frombuffer(data, dtype=np.uint8, count=q * count, offset=off + q).reshape(count, q).copy()
    return label, rows


def orbit_cache_path(cache_dir: Path, field: Field, label: np.ndarray) -> Path:
    digest = hashlib.sha256(np.asarray(label, dtype=np.uint8).tobytes()).hexdigest()[:16]
    return Path(cache_dir) / f"gf{field.q}-{field.modulus}" / f"orbit-{digest}.bin"


class OvalClassifier:
    """Maps o-permutations of one field to class indices, computing orbits on demand.

    Classes are numbered in order of discovery; ``labels[i]`` is the
    lexicographically least o-polynomial of class ``i`` and ``orbits[i]``
    its sorted normalized orbit.  With ``cache_dir`` set, orbits are read from
    and written to orbit cache files.
    """

    def __init__(self, field: Field, cache_dir: Path | None = None):
        self.field = field
        self.cache_dir = Path(cache_dir) if cache_dir is not None else None
        self.labels: list[np.ndarray] = []
        self.orbits: list[np.ndarray] = []

    def find(self, f: np.ndarray) -> int | None:
        """Index of the registered class containing ``f``, or ``None``."""
        key = row_keys(normalize(self.field, np.asarray(f, dtype=np.uint8))[None, :])
        for idx, rows in enumerate(self.orbits):
            if _member(row_keys(rows), key)[0]:
                return idx
        return None

    def classify(self, f: np.ndarray) -> int:
        idx = self.find(f)
        if idx is not None:
            return idx
        key = normalize(self.field, np.asarray(f, dtype=np.uint8))
        rows = normalized_orbit(self.field, key)
        label = rows[0].copy()
        self._register(label, rows)
        if self.cache_dir is not None:
            path = orbit_cache_path(self.cache_dir, self.field, label)
            if not path.exists():
                write_orbit_file(path, self.field, label, rows)
        return len(self.labels) - 1

    def load_cached(self, label: np.ndarray) -> bool:
        """Register the class of ``label`` from the cache; ``False`` if not cached."""
        if self.cache_dir is None:
            return False
        path = orbit_cache_path(self.cache_dir, self.field, label)
        if not path.exists():
            return False
        stored, rows = read_orbit_file(path, self.field)
        if stored.tobytes() != np.asarray(label, dtype=np.uint8).tobytes():
            raise ValueError(f"{path}: label mismatch")
        if not any(lab.tobytes() == stored.tobytes() for lab in self.labels):
            self._register(stored, rows)
        return True

    def _register(self, label: np.ndarray, rows: np.ndarray) -> None:
        self.labels.append(label)
        self.orbits.append(rows)

    def __len__(self) -> int:
        return len(self.labels)

    def label_of(self, f: np.ndarray) -> np.ndarray:
        return self.labels[self.classify(f)]

    def total_opolynomials(self) -> int:
        return sum(len(o) for o in self.orbits)

    def pool(self) -> np.ndarray:
        """All registered o-polynomials, class-label-major then lexicographic."""
        order = sorted(range(len(self.labels)), key=lambda i: self.labels[i].tobytes())
        if not order:
            return np.zeros((0, self.field.q), dtype=np.uint8)
        return np.concatenate([self.orbits[i] for i in order])

    def sorted_labels(self) -> list[np.ndarray]:
        return sorted(self.labels, key=lambda t: t.tobytes())


def contains_rows(sorted_rows: np.ndarray, tables: np.ndarray) -> np.ndarray:
    """Membership of each row of ``tables`` in the lexicographically sorted ``sorted_rows``."""
    return _member(row_keys(sorted_rows), row_keys(tables))
