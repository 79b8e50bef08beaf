"""Wild subspaces: GF(2)-subspaces of functions whose nonzero members are o-permutations.

A Wild subspace of dimension n lives in the functions on GF(2^n).  The
classification step runs, for a fixed o-polynomial ``f`` and ``a`` outside
GF(2), over every o-polynomial ``h`` and keeps those for which
``(1 + a)^-1 (f + a h)`` is again an o-polynomial.  Since ``h = f`` always
survives, a survivor set of exactly ``{f}`` for every class representative
shows that every Wild subspace is a scalar space ``GF(2^n) f``.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .field import Field, make_field
from .magic import OvalClassifier, contains_rows, row_keys
from .opoly import o_permutation_mask, o_permutation_witness


class SearchInterrupted(RuntimeError):
    """Raised when a candidate budget runs out; the checkpoint holds the progress."""


# subspaces --------------------------------------------------------------------


def additive_closure(field: Field, generators: Sequence[np.ndarray]) -> np.ndarray:
    """All GF(2)-combinations of ``generators``; row ``i`` sums the generators picked by the bits of ``i``."""
    out = np.zeros((1, field.q), dtype=np.uint8)
    for g in generators:
        out = np.concatenate([out, out ^ np.asarray(g, dtype=np.uint8)[None, :]])
    return out


def scalar_space(field: Field, f: np.ndarray) -> np.ndarray:
    """``{lam f : lam in GF(q)}``, ordered by ``lam``."""
    return field.mul_table[:, np.asarray(f, dtype=np.uint8)]


def _is_additively_closed(members: np.ndarray) -> bool:
    keys = np.sort(row_keys(members))
    if len(np.unique(keys)) != len(keys):
        return False
    if not (members == 0).all(axis=1).any():
        return False
    sums = members[:, None, :] ^ members[None, :, :]
    return bool(contains_rows(members[np.argsort(row_keys(members))], sums.reshape(-1, members.shape[1])).all())


def wild_witness(field: Field, members: np.ndarray) -> str | None:
    """``None`` if ``members`` is a Wild subspace, else the first reason it is not."""
    members = np.asarray(members, dtype=np.uint8)
    if not _is_additively_closed(members):
        return "not an additive subgroup"
    nonzero = members[members.any(axis=1)]
    for row in nonzero:
        why = o_permutation_witness(field, row)
        if why is not None:
            return f"member {row.tolist()} is not an o-permutation: {why}"
    if len(np.unique(nonzero[:, 1])) != len(nonzero):
        return "two members agree at 1"
    return None


def is_wild(field: Field, members: np.ndarray) -> bool:
    return wild_witness(field, members) is None


def kernel(field: Field, members: np.ndarray) -> int:
    """Degree ``d`` of the largest subfield GF(2^d) with ``GF(2^d) W`` contained in ``W``.

    ``W`` is additively closed, so closure under multiplication by one
    generator of the subfield already gives closure under all of it.
    """
    members = np.asarray(members, dtype=np.uint8)
    srt = members[np.argsort(row_keys(members))]
    for d in sorted(field.subfields(), reverse=True):
        sub = field.subfield(d)
        gen = next((x for x in sub if x > 1 and field.multiplicative_order(x) == (1 << d) - 1), None)
        if gen is None:
            return d  # GF(2): always a subspace
        if contains_rows(srt, field.mul_table[gen][members]).all():
            return d
    return 1


# candidate search ---------------------------------------------------------------


def combination_tables(field: Field, f: np.ndarray, a: int, candidates: np.ndarray) -> np.ndarray:
    """Rows ``(1 + a)^-1 (f + a h)`` for each candidate ``h``."""
    c = field.inv(1 ^ a)
    mul = field.mul_table
    return mul[c][np.asarray(f, dtype=np.uint8)[None, :] ^ mul[a][candidates]]


def proposition_mask(field: Field, f: np.ndarray, a: int, candidates: np.ndarray,
                     chunk: int = 1 << 16) -> np.ndarray:
    if a in (0, 1):
        raise ValueError("a must lie outside GF(2)")
    candidates = np.asarray(candidates, dtype=np.uint8)
    out = np.zeros(len(candidates), dtype=bool)
    for lo in range(0, len(candidates), chunk):
        rows = combination_tables(field, f, a, candidates[lo : lo + chunk])
        out[lo : lo + chunk] = o_permutation_mask(field, rows)
    return out


def proposition_search(field: Field, f: np.ndarray, a: int, pool: np.ndarray | Iterable[np.ndarray]) -> np.ndarray:
    """Every ``h`` in ``pool`` for which ``(1 + a)^-1 (f + a h)`` is an o-permutation.

    ``pool`` is an ``(N, q)`` array or an iterable of such blocks.
    """
    blocks = [pool] if isinstance(pool, np.ndarray) else list(pool)
    if not blocks or sum(len(b) for b in blocks) == 0:
        raise ValueError("empty pool")
    hits = [b[proposition_mask(field, f, a, b)] for b in blocks]
    return np.concatenate(hits)


# direct enumeration ---------------------------------------------------------------


def enumerate_wild_subspaces(field: Field, opermutations: np.ndarray) -> list[np.ndarray]:
    """All k-dimensional Wild subspaces over GF(2) of the functions on GF(2^k).

    The value at 1 is GF(2)-linear and injective on a Wild subspace, hence a
    bijection onto GF(2^k); so every such subspace has a unique basis
    ``g_0, ..., g_{k-1}`` with ``g_i(1) = 2^i`` (bit pattern).  Basis vectors
    are added one at a time, keeping a candidate only if every new sum lies
    in the given set of o-permutations.
    """
    ops = np.asarray(opermutations, dtype=np.uint8)
    srt = ops[np.argsort(row_keys(ops))]
    by_value = {v: ops[ops[:, 1] == v] for v in range(1, field.q)}
    found: list[np.ndarray] = []

    def extend(span: np.ndarray, i: int) -> None:
        if i == field.k:
            found.append(span)
            return
        cand = by_value[1 << i]
        for g in cand:
            sums = span[1:] ^ g[None, :]
            if len(sums) and not contains_rows(srt, sums).all():
                continue
            extend(np.concatenate([span, span ^ g[None, :]]), i + 1)

    extend(np.zeros((1, field.q), dtype=np.uint8), 0)
    return found


# classification driver ------------------------------------------------------------


@dataclass
class SearchRecord:
    class_index: int
    label: str
    a: int
    pool_size: int
    survivors: list[str]

    @property
    def only_self(self) -> bool:
        return self.survivors == [self.label]


@dataclass
class ClassificationReport:
    n: int
    modulus: int
    catalog_digest: str
    class_count: int
    expected_classes: int | None
    opolynomials: int
    opermutations: int
    records: list[SearchRecord] = dc_field(default_factory=list)

    @property
    def non_elementary(self) -> list[SearchRecord]:
        return [r for r in self.records if not r.only_self]

    @property
    def conclusion(self) -> str:
        if self.non_elementary:
            return "non-elementary candidate found"
        return f"{self.class_count} classes, all kernels GF({1 << self.n})"

    def to_json(self) -> str:
        d = asdict(self)
        d["conclusion"] = self.conclusion
        return json.dumps(d, indent=1, sort_keys=True) + "\n"


def table_hex(t: np.ndarray) -> str:
    return bytes(np.asarray(t, dtype=np.uint8)).hex()


def hex_table(s: str) -> np.ndarray:
    return np.frombuffer(bytes.fromhex(s), dtype=np.uint8).copy()


def default_a_values(field: Field, all_a: bool) -> list[int]:
    """Every ``a`` outside GF(2) when ``all_a``, else just the primitive element."""
    if all_a:
        return list(range(2, field.q))
    return [field.primitive()]


class Checkpoint:
    """JSON progress file: finished (class, a) pairs plus the offset into the running one."""

    def __init__(self, path: Path | None, key: dict):
        self.path = Path(path) if path is not None else None
        self.key = key
        self.state: dict = {"key": key, "done": {}, "partial": {}}
        if self.path is not None and self.path.exists():
            loaded = json.loads(self.path.read_text())
            if loaded.get("key") != key:
                raise ValueError(f"{self.path}: checkpoint belongs to a different run")
            self.state = loaded

    def write(self) -> None:
        if self.path is None:
            return
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(self.path.suffix + ".tmp")
        tmp.write_text(json.dumps(self.state, sort_keys=True))
        os.replace(tmp, self.path)


def _mask_job(args):
    k, modulus, f, a, block = args
    return proposition_mask(make_field(k, modulus), f, a, block)


def classify(
    field: Field,
    classifier: OvalClassifier,
    a_values: Sequence[int],
    *,
    catalog_digest: str = "",
    expected_classes: int | None = None,
    checkpoint: Path | None = None,
    checkpoint_every: int = 1 << 18,
    budget: int | None = None,
    workers: int = 1,
    progress=None,
) -> ClassificationReport:
    """Run ``proposition_search`` for every class label of ``classifier`` and each ``a``.

    The pool is visited class-label-major then lexicographically.  With
    ``checkpoint`` set, progress is saved every ``checkpoint_every``
    candidates and picked up again on the next call.  ``budget`` caps the
    number of candidates tested in this call (raises ``SearchInterrupted``).
    """
    order = sorted(range(len(classifier)), key=lambda i: classifier.labels[i].tobytes())
    labels = [classifier.labels[i] for i in order]
    orbits = [classifier.orbits[i] for i in order]
    pool_size = sum(len(o) for o in orbits)
    key = {"k": field.k, "modulus": field.modulus, "catalog": catalog_digest,
           "a": list(map(int, a_values)), "labels": hashlib.sha256(b"".join(l.tobytes() for l in labels)).hexdigest()}
    ckpt = Checkpoint(checkpoint, key)
    report = ClassificationReport(field.k, field.modulus, catalog_digest, len(labels), expected_classes,
                                  pool_size, pool_size * (field.q - 1))
    tested = 0
    since_save = 0
    executor = ProcessPoolExecutor(workers) if workers > 1 else None
    try:
        for ci, f in enumerate(labels):
            for a in a_values:
                tag = f"{ci}:{a}"
                if tag in ckpt.state["done"]:
                    survivors = ckpt.state["done"][tag]
                else:
                    part = ckpt.state["partial"].get(tag, {"offset": 0, "survivors": []})
                    offset, survivors = part["offset"], list(part["survivors"])
                    for start, block in _blocks(orbits, offset, checkpoint_every):
                        if budget is not None and tested + len(block) > budget:
                            ckpt.state["partial"][tag] = {"offset": start, "survivors": survivors}
                            ckpt.write()
                            raise SearchInterrupted(f"budget of {budget} candidates used up at {tag}, offset {start}")
                        mask = _masks(field, f, a, block, executor, workers)
                        survivors += [table_hex(h) for h in block[mask]]
                        tested += len(block)
                        since_save += len(block)
                        if since_save >= checkpoint_every:
                            ckpt.state["partial"][tag] = {"offset": start + len(block), "survivors": survivors}
                            ckpt.write()
                            since_save = 0
                        if progress is not None:
                            progress(ci, a, start + len(block), pool_size)
                    ckpt.state["partial"].pop(tag, None)
                    ckpt.state["done"][tag] = survivors
                    ckpt.write()
                report.records.append(SearchRecord(ci, table_hex(f), int(a), pool_size, sorted(survivors)))
    finally:
        if executor is not None:
            executor.shutdown()
    return report


def _blocks(orbits: list[np.ndarray], offset: int, size: int) -> Iterator[tuple[int, np.ndarray]]:
    """Consecutive blocks of the concatenated orbits from ``offset`` on, never crossing an orbit."""
    base = 0
    for rows in orbits:
        end = base + len(rows)
        lo = max(offset, base)
        while lo < end:
            hi = min(end, lo + size)
            yield lo, rows[lo - base : hi - base]
            lo = hi
        base = end


def _masks(field: Field, f: np.ndarray, a: int, block: np.ndarray, executor, workers: int) -> np.ndarray:
    if executor is None or len(block) < 4 * workers:
        return proposition_mask(field, f, a, block)
    parts = np.array_split(block, workers)
    jobs = [(field.k, field.modulus, f, a, p) for p in parts]
    return np.concatenate(list(executor.map(_mask_job, jobs)))
