"""Hyperoval catalog files and their expansion into every oval class of a field.

Catalog format, one record per line (``#`` starts a comment)::

    <k> <modulus> | <name> | <c0> <c1> ... <cd> [| <expected oval classes>]

``c_i`` is the coefficient of ``x^i`` in bit-pattern encoding; trailing zero
coefficients may be omitted.  Every record is re-validated at load.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field
from importlib import resources
from pathlib import Path
from typing import Iterable

import numpy as np

from .field import Field, make_field
from .magic import MagicElement, OvalClassifier, magic_apply, orbit_cache_path
from .opoly import (
    NUCLEUS,
    collinear_triple,
    evaluate,
    interpolate,
    o_permutation_witness,
    oval_points,
)

# number of projective classes of ovals in PG(2, 2^k)
EXPECTED_CLASSES = {1: 1, 2: 1, 3: 2, 4: 3, 5: 35, 6: 19}
# totals as printed in the literature.  For GF(8) and GF(16) they count
# o-permutations; the GF(32) and GF(64) figures are not multiples of q - 1
# and agree with the number of o-polynomials instead.
PUBLISHED_TOTALS = {3: 70, 4: 30870, 5: 3537700, 6: 17297346}


def published_total_note(k: int, opolynomials: int, opermutations: int) -> str:
    """How a published total relates to the computed counts."""
    pub = PUBLISHED_TOTALS.get(k)
    if pub is None:
        return "no published total"
    if pub == opermutations:
        return f"published total {pub} equals the o-permutation count"
    if pub == opolynomials:
        return (f"published total {pub} equals the o-polynomial count (f(1) = 1); "
                f"the o-permutation count is {opermutations} = (q - 1) x {opolynomials}")
    return f"published total {pub} matches neither {opolynomials} o-polynomials nor {opermutations} o-permutations"


class CatalogError(ValueError):
    pass


class ClassCountMismatch(CatalogError):
    pass


class CatalogFormatError(CatalogError):
    """The file itself is malformed (as opposed to holding invalid geometry)."""


@dataclass
class CatalogEntry:
    field: Field
    name: str
    coeffs: list[int]
    expected_classes: int | None = None
    line: int = 0

    @property
    def table(self) -> np.ndarray:
        return evaluate(self.field, self.coeffs)

    def record(self) -> str:
        coeffs = list(self.coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        parts = [f"{self.field.k} {self.field.modulus}", self.name, " ".join(map(str, coeffs))]
        if self.expected_classes is not None:
            parts.append(str(self.expected_classes))
        return " | ".join(parts)


@dataclass
class ValidationReport:
    entry: CatalogEntry
    ok: bool
    reason: str | None = None
    witness: object = None


@dataclass
class Catalog:
    entries: list[CatalogEntry]
    digest: str
    source: str = ""

    def for_field(self, field: Field) -> list[CatalogEntry]:
        return [e for e in self.entries if e.field == field]

    def fields(self) -> list[Field]:
        out: list[Field] = []
        for e in self.entries:
            if e.field not in out:
                out.append(e.field)
        return out


def parse_catalog(text: str, source: str = "<string>") -> Catalog:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) not in (3, 4):
            raise CatalogFormatError(f"{source}:{lineno}: expected 3 or 4 '|'-separated fields")
        try:
            k, modulus = (int(v) for v in parts[0].split())
            coeffs = [int(v) for v in parts[2].split()]
            expected = int(parts[3]) if len(parts) == 4 else None
        except ValueError as exc:
            raise CatalogFormatError(f"{source}:{lineno}: {exc}") from None
        try:
            fld = make_field(k, modulus)
        except ValueError as exc:
            raise CatalogFormatError(f"{source}:{lineno}: {exc}") from None
        if len(coeffs) > fld.q or any(not 0 <= c < fld.q for c in coeffs):
            raise CatalogFormatError(f"{source}:{lineno}: coefficients must be < {fld.q}, at most {fld.q} of them")
        entries.append(CatalogEntry(fld, parts[1], coeffs + [0] * (fld.q - len(coeffs)), expected, lineno))
    return Catalog(entries, hashlib.sha256(text.encode()).hexdigest(), source)


def load_catalog(path: str | Path) -> Catalog:
    path = Path(path)
    return parse_catalog(path.read_text(), str(path))


def builtin_catalog_path(k: int) -> Path:
    return Path(str(resources.files("pseudoovals") / "data" / f"gf{1 << k}.cat"))


def builtin_catalog(k: int) -> Catalog:
    return load_catalog(builtin_catalog_path(k))


def write_catalog(entries: Iterable[CatalogEntry], header: str = "") -> str:
    lines = [f"# {h}" if h else "#" for h in header.splitlines()]
    lines += [e.record() for e in entries]
    return "\n".join(lines) + "\n"


# validation -----------------------------------------------------------------


def validate(entry: CatalogEntry) -> ValidationReport:
    """Check that the entry is an o-permutation whose oval plus nucleus is a hyperoval."""
    fld = entry.field
    f = entry.table
    why = o_permutation_witness(fld, f)
    if why is not None:
        return ValidationReport(entry, False, "not an o-permutation", why)
    pts = oval_points(fld, f) + [NUCLEUS]
    triple = collinear_triple(fld, pts)
    if triple is not None:
        return ValidationReport(entry, False, "collinear points", tuple(pts[i] for i in triple))
    return ValidationReport(entry, True)


def validated_entries(catalog: Catalog, field: Field | None = None) -> list[CatalogEntry]:
    entries = catalog.entries if field is None else catalog.for_field(field)
    for e in entries:
        rep = validate(e)
        if not rep.ok:
            raise CatalogError(f"{catalog.source}:{e.line}: {e.name}: {rep.reason}: {rep.witness}")
    return entries


# hyperoval -> ovals ------------------------------------------------------------


def inverse_table(f: np.ndarray) -> np.ndarray:
    inv = np.zeros_like(f)
    inv[f] = np.arange(len(f), dtype=f.dtype)
    return inv


def exchange_first_last(field: Field, g: np.ndarray) -> np.ndarray:
    """O-permutation of the oval obtained by swapping coordinates 0 and 2.

    The point ``(1, 0, 0)`` of the hyperoval ``D(g) + (0,0,1)`` becomes the
    new nucleus; ``(1, s, g(s))`` goes to ``(1, s/g(s), 1/g(s))``.
    """
    k = np.zeros_like(g)
    for s in range(1, field.q):
        gs = int(g[s])
        k[field.div(s, gs)] = field.inv(gs)
    return k


def hyperoval_ovals(field: Field, f: np.ndarray) -> list[np.ndarray]:
    """One o-permutation per point of ``D(f) + (0,0,1)``, describing the oval left after deleting it.

    Deleting the nucleus leaves ``f``; deleting ``(0,1,0)`` is the
    coordinate swap 1<->2, i.e. ``f^-1``; deleting ``(1,t,f(t))`` is a
    magic transvection moving it to ``(1,0,0)`` followed by the 0<->2 swap.
    """
    f = np.asarray(f, dtype=np.uint8)
    out = [f.copy(), inverse_table(f)]
    for t in range(field.q):
        g = magic_apply(field, MagicElement(1, 0, t, 1), f)
        out.append(exchange_first_last(field, g))
    return out


def ovals_from_hyperoval(entry: CatalogEntry, classifier: OvalClassifier | None = None) -> list[np.ndarray]:
    """Distinct class labels of the ovals contained in the entry's hyperoval."""
    if classifier is None:
        classifier = OvalClassifier(entry.field)
    idx = sorted({classifier.classify(g) for g in hyperoval_ovals(entry.field, entry.table)},
                 key=lambda i: classifier.labels[i].tobytes())
    return [classifier.labels[i] for i in idx]


@dataclass
class Expansion:
    """All oval classes and o-polynomials of one field, as produced from a catalog."""

    field: Field
    classifier: OvalClassifier
    per_entry: dict[str, list[int]] = dc_field(default_factory=dict)

    @property
    def class_count(self) -> int:
        return len(self.classifier)

    @property
    def opolynomial_count(self) -> int:
        return self.classifier.total_opolynomials()

    @property
    def opermutation_count(self) -> int:
        return self.opolynomial_count * (self.field.q - 1)

    def pool(self) -> np.ndarray:
        return self.classifier.pool()

    def labels(self) -> list[np.ndarray]:
        return self.classifier.sorted_labels()

    def class_sizes(self) -> list[int]:
        order = sorted(range(self.class_count), key=lambda i: self.classifier.labels[i].tobytes())
        return [len(self.classifier.orbits[i]) for i in order]

    def opermutations(self) -> np.ndarray:
        """Materialized o-permutation set; refuse beyond GF(32) to keep memory sane."""
        if self.field.q > 32:
            raise MemoryError("materializing o-permutations is limited to q <= 32")
        pool = self.pool()
        return np.concatenate([self.field.mul_table[lam][pool] for lam in range(1, self.field.q)])


def all_opermutations(catalog: Catalog, field: Field, cache_dir: Path | None = None,
                      expected: int | None = None) -> Expansion:
    """Expand every catalog hyperoval of ``field`` into its ovals and their magic orbits.

    Raises ``ClassCountMismatch`` when the number of classes differs from
    ``expected`` (default: the known count for the field).
    """
    entries = validated_entries(catalog, field)
    if not entries:
        raise CatalogError(f"catalog has no entries for GF({field.q})")
    classifier = OvalClassifier(field, cache_dir)
    exp = Expansion(field, classifier)
    index = _expansion_index_path(cache_dir, field, catalog) if cache_dir is not None else None
    if index is not None and index.exists():
        _load_expansion(exp, json.loads(index.read_text()))
    if not exp.per_entry:
        for e in entries:
            labels = ovals_from_hyperoval(e, classifier)
            exp.per_entry[e.name] = [classifier.classify(lab) for lab in labels]
        if index is not None:
            index.parent.mkdir(parents=True, exist_ok=True)
            index.write_text(json.dumps({
                "labels": [lab.tobytes().hex() for lab in classifier.labels],
                "per_entry": exp.per_entry,
            }, sort_keys=True))
    for e in entries:
        got = len(exp.per_entry[e.name])
        if e.expected_classes is not None and got != e.expected_classes:
            raise ClassCountMismatch(f"{e.name}: {got} oval classes, catalog expects {e.expected_classes}")
    if expected is None:
        expected = EXPECTED_CLASSES.get(field.k)
    if expected is not None and exp.class_count != expected:
        raise ClassCountMismatch(f"GF({field.q}): {exp.class_count} oval classes, expected {expected}")
    return exp


def _expansion_index_path(cache_dir: Path, field: Field, catalog: Catalog) -> Path:
    return Path(cache_dir) / f"gf{field.q}-{field.modulus}" / f"catalog-{catalog.digest[:16]}.json"


def _load_expansion(exp: Expansion, index: dict) -> None:
    """Register cached orbits in their recorded order; leaves ``exp`` untouched if any file is missing."""
    labels = [np.frombuffer(bytes.fromhex(h), dtype=np.uint8).copy() for h in index["labels"]]
    clf = exp.classifier
    if not all(orbit_cache_path(clf.cache_dir, exp.field, lab).exists() for lab in labels):
        return
    for lab in labels:
        clf.load_cached(lab)
    exp.per_entry = {k: list(v) for k, v in index["per_entry"].items()}


def coefficients_of(field: Field, table: np.ndarray) -> list[int]:
    return interpolate(field, table)
