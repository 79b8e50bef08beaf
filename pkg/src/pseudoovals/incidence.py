"""Explicit incidence structures: the TGQ T(O), Laguerre planes, derived affine planes.

Incidence is a sparse 0/1 matrix (points x blocks).  Axiom checks are
phrased as matrix identities or as uniqueness of point-tuple keys, so each
verifier is a handful of vectorized operations and reports the first
violating configuration as its witness.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field as dc_field
from itertools import combinations
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .gf2 import GfSubspace
from .field import Field
from .pseudo_oval import InvariantViolation, PseudoOval, SteinkeMap


@dataclass
class IncidenceStructure:
    """Points, blocks and a sparse incidence matrix; ``roles`` tags the geometry.

    For Laguerre planes ``generator[p]`` is the generator of point ``p``.
    """

    kind: str
    points: list
    blocks: list
    incidence: sp.csr_matrix
    generator: np.ndarray | None = None
    info: dict = dc_field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, int]:
        return self.incidence.shape

    def block_points(self, b: int) -> np.ndarray:
        return self.incidence[:, b].nonzero()[0]

    def point_blocks(self, p: int) -> np.ndarray:
        return self.incidence[p].nonzero()[1]

    def flipped(self, p: int, b: int) -> "IncidenceStructure":
        """Copy with the incidence of ``(p, b)`` toggled (for mutation tests)."""
        inc = self.incidence.tolil(copy=True)
        inc[p, b] = 0 if inc[p, b] else 1
        return IncidenceStructure(self.kind, self.points, self.blocks, inc.tocsr(),
                                  None if self.generator is None else self.generator.copy(), dict(self.info))

    def edges(self) -> np.ndarray:
        coo = self.incidence.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return np.stack([coo.row[order], coo.col[order]], axis=1)

    def write_edge_list(self, path: str | Path) -> None:
        header = {"kind": self.kind, "points": len(self.points), "blocks": len(self.blocks), **self.info}
        lines = ["# " + json.dumps(header, sort_keys=True)]
        if self.generator is not None:
            lines.append("# generators " + " ".join(map(str, self.generator.tolist())))
        lines += [f"{p} {b}" for p, b in self.edges()]
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def read_edge_list(cls, path: str | Path) -> "IncidenceStructure":
        text = Path(path).read_text().splitlines()
        header = json.loads(text[0][2:])
        generator = None
        body = text[1:]
        if body and body[0].startswith("# generators"):
            generator = np.array([int(v) for v in body[0].split()[2:]], dtype=np.int64)
            body = body[1:]
        pairs = np.array([[int(v) for v in ln.split()] for ln in body if ln.strip()], dtype=np.int64).reshape(-1, 2)
        kind, npts, nblk = header.pop("kind"), header.pop("points"), header.pop("blocks")
        inc = _matrix(pairs[:, 0], pairs[:, 1], npts, nblk)
        return cls(kind, list(range(npts)), list(range(nblk)), inc, generator, header)


def _matrix(rows, cols, npts: int, nblk: int) -> sp.csr_matrix:
    data = np.ones(len(rows), dtype=np.int64)
    m = sp.csr_matrix((data, (np.asarray(rows), np.asarray(cols))), shape=(npts, nblk))
    m.sum_duplicates()
    return m


# translation generalized quadrangles ------------------------------------------------


def _coset_reps(space: GfSubspace, vectors: np.ndarray) -> np.ndarray:
    """``space.reduce`` applied to every vector; reduction is GF(2)-linear."""
    images = np.array([space.reduce(1 << j) for j in range(space.ambient)], dtype=np.int64)
    out = np.zeros(len(vectors), dtype=np.int64)
    for j in range(space.ambient):
        out ^= np.where((vectors >> j) & 1 == 1, images[j], 0)
    return out


def build_tgq(o: PseudoOval) -> IncidenceStructure:
    """The TGQ ``T(O)`` of order ``(2^n, 2^n)``.

    With ``PG(3n-1, 2)`` as the hyperplane at infinity, affine points are
    the vectors ``v`` of GF(2)^(3n); a 2n-space on a tangent ``T(X)`` is the
    coset ``v + T(X)``; an affine line on ``X`` is the coset ``v + X``.
    Point order: affine points by ``v``, then tangent cosets by element and
    representative, then ``(inf)``.  Line order: ``X``-cosets by element and
    representative, then the elements themselves.
    """
    if o.nucleus is None:
        raise ValueError("T(O) needs the tangents, hence the nucleus")
    m = o.ambient
    vs = np.arange(1 << m, dtype=np.int64)
    k = len(o.elements)
    points: list = [("affine", int(v)) for v in vs]
    blocks: list = []
    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    tan_base = len(points)
    tan_index = []
    for i in range(k):
        reps = np.unique(_coset_reps(o.tangent(i), vs))
        tan_index.append({int(r): tan_base + j for j, r in enumerate(reps)})
        points += [("tangent", i, int(r)) for r in reps]
        tan_base += len(reps)
    inf = len(points)
    points.append(("inf",))
    for i, x in enumerate(o.elements):
        reps_of_v = _coset_reps(x, vs)
        reps, inverse = np.unique(reps_of_v, return_inverse=True)
        base = len(blocks)
        blocks += [("coset", i, int(r)) for r in reps]
        rows.append(vs)
        cols.append(base + inverse)
        # each X-coset lies in exactly one T(X)-coset
        t = o.tangent(i)
        tan_pts = np.array([tan_index[i][t.reduce(int(r))] for r in reps], dtype=np.int64)
        rows.append(tan_pts)
        cols.append(base + np.arange(len(reps)))
    for i in range(k):
        b = len(blocks)
        blocks.append(("element", i))
        tp = np.array(sorted(tan_index[i].values()), dtype=np.int64)
        rows.append(np.append(tp, inf))
        cols.append(np.full(len(tp) + 1, b))
    inc = _matrix(np.concatenate(rows), np.concatenate(cols), len(points), len(blocks))
    return IncidenceStructure("GQ", points, blocks, inc, info={"n": o.n})


def gq_witness(s: IncidenceStructure, sample: int | None = None, seed: int = 0):
    """``None`` if ``s`` is a GQ of some order ``(s, t)``, else a witness.

    Exhaustive mode checks uniform degrees, that two lines share at most one
    point, and ``N (N^T N) = J + (s + t) N``: an incident flag ``(x, L)``
    sees ``s + 1 + t`` line-point-line paths, a non-incident one exactly
    the single pair ``(y, M)`` demanded by the axiom.  With ``sample`` set,
    that many random non-incident pairs are checked instead of the product.
    """
    n_mat = s.incidence.tocsr().astype(np.int64)
    if n_mat.data.size and n_mat.data.max() > 1:
        return ("multiple incidence",)
    line_deg = np.asarray(n_mat.sum(axis=0)).ravel()
    point_deg = np.asarray(n_mat.sum(axis=1)).ravel()
    if len(set(line_deg.tolist())) != 1:
        b = int(np.flatnonzero(line_deg != np.bincount(line_deg).argmax())[0])
        return ("line degree", b, int(line_deg[b]))
    if len(set(point_deg.tolist())) != 1:
        p = int(np.flatnonzero(point_deg != np.bincount(point_deg).argmax())[0])
        return ("point degree", p, int(point_deg[p]))
    order_s, order_t = int(line_deg[0]) - 1, int(point_deg[0]) - 1
    if sample is None:
        common = (n_mat.T @ n_mat).tocoo()
        off = (common.row != common.col) & (common.data > 1)
        if off.any():
            j = int(np.flatnonzero(off)[0])
            return ("lines share two points", int(common.row[j]), int(common.col[j]))
        paths = (n_mat @ (n_mat.T @ n_mat)).toarray()
        want = 1 + (order_s + order_t) * n_mat.toarray()
        bad = np.argwhere(paths != want)
        if len(bad):
            x, line = (int(v) for v in bad[0])
            return ("axiom iii", x, line, int(paths[x, line]) - (order_s + order_t) * int(n_mat[x, line]))
        return None
    rng = np.random.default_rng(seed)
    npts, nblk = n_mat.shape
    csc = n_mat.tocsc()
    checked = 0
    while checked < sample:
        x, line = int(rng.integers(npts)), int(rng.integers(nblk))
        if n_mat[x, line]:
            continue
        on_line = set(csc[:, line].nonzero()[0].tolist())
        through_x = n_mat[x].nonzero()[1]
        hits = sum(len(on_line.intersection(csc[:, mm].nonzero()[0].tolist())) for mm in through_x)
        if hits != 1:
            return ("axiom iii", x, line, hits)
        checked += 1
    return None


def verify_gq(s: IncidenceStructure, sample: int | None = None) -> tuple[int, int]:
    """Order ``(s, t)``; raises :class:`InvariantViolation` with the witness on failure."""
    w = gq_witness(s, sample)
    if w is not None:
        raise InvariantViolation("not a generalized quadrangle", w)
    inc = s.incidence
    return int(inc[:, 0].sum()) - 1, int(inc[0].sum()) - 1


def gq_fingerprint(s: IncidenceStructure) -> dict:
    """Isomorphism invariants: sizes, degrees, and for each point the number of regular pairs it lies in.

    A non-collinear pair ``{x, y}`` is regular when ``|{x, y}^perp^perp| = t + 1``.
    Exhaustive over pairs; intended for orders up to 16.
    """
    inc = s.incidence.tocsr().astype(np.int64)
    adj = (inc @ inc.T).toarray() > 0
    npts = adj.shape[0]
    t = int(inc[0].sum()) - 1
    masks = [int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little") for row in adj]
    regular = np.zeros(npts, dtype=np.int64)
    for x in range(npts):
        for y in range(x + 1, npts):
            if masks[x] >> y & 1:
                continue
            perp = masks[x] & masks[y]
            pp = -1
            while perp:
                low = perp & -perp
                pp &= masks[low.bit_length() - 1]
                perp ^= low
            if bin(pp).count("1") == t + 1:
                regular[x] += 1
                regular[y] += 1
    return {
        "points": int(inc.shape[0]),
        "lines": int(inc.shape[1]),
        "point_degrees": sorted(Counter(np.asarray(inc.sum(axis=1)).ravel().tolist()).items()),
        "line_degrees": sorted(Counter(np.asarray(inc.sum(axis=0)).ravel().tolist()).items()),
        "regular_pairs_per_point": sorted(Counter(regular.tolist()).items()),
    }


def fingerprint_digest(fp: dict) -> str:
    return hashlib.sha256(json.dumps(fp, sort_keys=True).encode()).hexdigest()


# Laguerre planes ---------------------------------------------------------------


def _laguerre(points_per_gen: int, ngen: int, values: np.ndarray, info: dict) -> IncidenceStructure:
    """Circle ``c`` meets generator ``i`` at point ``i * q + values[c, i]``."""
    q = points_per_gen
    ncirc = values.shape[0]
    pts = (np.arange(ngen)[None, :] * q + values).ravel()
    circ = np.repeat(np.arange(ncirc), ngen)
    inc = _matrix(pts, circ, ngen * q, ncirc)
    points = [(i, lam) for i in range(ngen) for lam in range(q)]
    generator = np.repeat(np.arange(ngen), q)
    return IncidenceStructure("Laguerre", points, list(range(ncirc)), inc, generator, info)


def build_laguerre_cone(field: Field, f: np.ndarray) -> IncidenceStructure:
    """Ovoidal Laguerre plane of the cone over ``D(f)`` with vertex ``(0, 0, 0, 1)``.

    Point ``(i, lam)`` is ``p_i + lam * V`` for the ``i``-th point ``p_i``
    of ``D(f)``; the plane ``x_3 = u . x`` meets that generator at
    ``lam = u . p_i``.  Circles are indexed by ``u`` (``u0 * q^2 + u1 * q + u2``).
    """
    from .opoly import oval_points

    q = field.q
    pts = np.array(oval_points(field, f), dtype=np.intp)  # (q + 1, 3)
    u = np.array([(a, b, c) for a in range(q) for b in range(q) for c in range(q)], dtype=np.intp)
    mul = field.mul_table
    values = np.zeros((len(u), len(pts)), dtype=np.int64)
    for j in range(3):
        values ^= mul[u[:, j][:, None], pts[:, j][None, :]]
    return _laguerre(q, q + 1, values, {"model": "cone", "q": q})


def build_laguerre_elation(smap: SteinkeMap) -> IncidenceStructure:
    """``L(g, h)``: circles ``K_c = {(z, c D(z))}``, ``c = (c1, c2, c3)`` in GF(2)^(3n).

    Generator ``z`` (``z`` in GF(2)^n as an int, then ``inf`` last) carries
    the points ``(z, y)``.  ``c D(z) = c1 h(z) + c2 g(z) + c3`` with row
    vectors, and ``c D(inf) = c1``.  Circle index ``c1 | c2 << n | c3 << 2n``.
    """
    n = smap.n
    q = 1 << n
    cs = np.arange(1 << (3 * n), dtype=np.int64)
    c1, c2, c3 = cs & (q - 1), (cs >> n) & (q - 1), cs >> (2 * n)

    def row_times(c: np.ndarray, mats: np.ndarray) -> np.ndarray:
        # (c as row bits) @ mats[z] for every z, result as ints: shape (len(c), q)
        rows_as_int = np.array([[int(sum(int(mats[z][i, j]) << j for j in range(n))) for i in range(n)]
                                for z in range(q)], dtype=np.int64)  # (q, n): row i of mats[z]
        out = np.zeros((len(c), q), dtype=np.int64)
        for i in range(n):
            out ^= np.where(((c >> i) & 1)[:, None] == 1, rows_as_int[None, :, i], 0)
        return out

    values = np.zeros((len(cs), q + 1), dtype=np.int64)
    values[:, :q] = row_times(c1, smap.h) ^ row_times(c2, smap.g) ^ c3[:, None]
    values[:, q] = c1
    return _laguerre(q, q + 1, values, {"model": "elation", "q": q, "n": n})


def _triple_keys(s: IncidenceStructure, k: int) -> np.ndarray:
    """For every block, the keys of all ``k``-subsets of its points (points sorted)."""
    inc = s.incidence.tocsc()
    npts = inc.shape[0]
    deg = np.diff(inc.indptr)
    if len(set(deg.tolist())) != 1:
        raise ValueError("blocks of unequal size")
    per = inc.indices.reshape(inc.shape[1], deg[0])
    per = np.sort(per, axis=1)
    combos = np.array(list(combinations(range(deg[0]), k)), dtype=np.intp)
    sel = per[:, combos]  # (blocks, C, k)
    key = np.zeros(sel.shape[:2], dtype=np.int64)
    for j in range(k):
        key = key * npts + sel[:, :, j]
    return key


def laguerre_witness(s: IncidenceStructure):
    """``None`` if ``s`` satisfies the Laguerre axioms, else a witness.

    (i) generators partition the points, all of equal size ``n``;
    (ii) each circle meets each generator exactly once;
    (iii) three points on distinct generators lie on exactly one circle: the
    ``n^3 * C(n+1, 3)`` triples carried by circles must all be distinct and
    their number must equal the number of such point triples.
    """
    if s.generator is None:
        return ("no generators",)
    gen = np.asarray(s.generator)
    npts, ncirc = s.incidence.shape
    if len(gen) != npts:
        return ("generator labels", len(gen))
    sizes = np.bincount(gen)
    if (sizes != sizes[0]).any():
        return ("generator size", int(np.flatnonzero(sizes != sizes[0])[0]))
    order = int(sizes[0])
    ngen = len(sizes)
    inc = s.incidence.tocsc()
    if inc.data.size and inc.data.max() > 1:
        return ("multiple incidence",)
    for c in range(ncirc):
        pts = inc.indices[inc.indptr[c] : inc.indptr[c + 1]]
        hit = np.bincount(gen[pts], minlength=ngen)
        if (hit != 1).any():
            return ("axiom ii", c, int(np.flatnonzero(hit != 1)[0]))
    keys = _triple_keys(s, 3).ravel()
    uniq, counts = np.unique(keys, return_counts=True)
    if (counts > 1).any():
        k = int(uniq[np.flatnonzero(counts > 1)[0]])
        triple = (k // npts**2, k // npts % npts, k % npts)
        return ("axiom iii: two circles", triple)
    expected = (order**3) * len(list(combinations(range(ngen), 3)))
    if len(uniq) != expected:
        return ("axiom iii: triple on no circle", len(uniq), expected)
    return None


def verify_laguerre(s: IncidenceStructure) -> int:
    """Order of the plane; raises :class:`InvariantViolation` with the witness on failure."""
    w = laguerre_witness(s)
    if w is not None:
        raise InvariantViolation("not a Laguerre plane", w)
    return int(np.bincount(s.generator)[0])


def derived_plane(s: IncidenceStructure, p: int) -> IncidenceStructure:
    """Points off the generator of ``p``; lines: circles through ``p`` and the other generators."""
    gen = np.asarray(s.generator)
    keep = np.flatnonzero(gen != gen[p])
    index = -np.ones(len(gen), dtype=np.int64)
    index[keep] = np.arange(len(keep))
    inc = s.incidence.tocsc()
    circles = s.incidence[p].nonzero()[1]
    rows, cols, blocks = [], [], []
    for c in circles:
        pts = inc.indices[inc.indptr[c] : inc.indptr[c + 1]]
        pts = pts[index[pts] >= 0]
        rows.append(index[pts])
        cols.append(np.full(len(pts), len(blocks)))
        blocks.append(("circle", int(c)))
    for g in sorted(set(gen[keep].tolist())):
        pts = np.flatnonzero(gen == g)
        rows.append(index[pts])
        cols.append(np.full(len(pts), len(blocks)))
        blocks.append(("generator", int(g)))
    m = _matrix(np.concatenate(rows), np.concatenate(cols), len(keep), len(blocks))
    return IncidenceStructure("affine", [s.points[i] for i in keep], blocks, m, info={"derived_at": int(p)})


def affine_plane_witness(s: IncidenceStructure):
    """``None`` if ``s`` is an affine plane of order ``n``: n^2 points, n^2 + n lines of size n,
    and every pair of points on exactly one line (pair keys from lines are distinct and exhaust all pairs)."""
    npts, nlines = s.incidence.shape
    order = int(round(npts**0.5))
    if order * order != npts:
        return ("point count", npts)
    if nlines != order * order + order:
        return ("line count", nlines)
    sizes = np.diff(s.incidence.tocsc().indptr)
    if (sizes != order).any():
        return ("line size", int(np.flatnonzero(sizes != order)[0]))
    keys = _triple_keys(s, 2).ravel()
    uniq, counts = np.unique(keys, return_counts=True)
    if (counts > 1).any():
        k = int(uniq[np.flatnonzero(counts > 1)[0]])
        return ("two lines through", (k // npts, k % npts))
    if len(uniq) != npts * (npts - 1) // 2:
        return ("pair on no line", len(uniq))
    return None


def verify_affine_plane(s: IncidenceStructure) -> int:
    w = affine_plane_witness(s)
    if w is not None:
        raise InvariantViolation("not an affine plane", w)
    return int(round(s.incidence.shape[0] ** 0.5))


def laguerre_fingerprint(s: IncidenceStructure) -> dict:
    order = int(np.bincount(s.generator)[0])
    return {
        "points": int(s.incidence.shape[0]),
        "circles": int(s.incidence.shape[1]),
        "generators": int(len(np.bincount(s.generator))),
        "order": order,
        "derived_order": verify_affine_plane(derived_plane(s, 0)),
    }


def derived_slope_maps(smap: SteinkeMap) -> list[np.ndarray] | None:
    """Slope matrices of the derived plane of ``L(g, h)`` at ``(inf, 0)``, or ``None`` if ``g`` is not additive.

    The circles through ``(inf, 0)`` have ``c1 = 0``, i.e. are the graphs
    ``y = c2 g(z) + c3``.  When ``z -> g(z)`` is additive, ``z -> c2 g(z)``
    is GF(2)-linear and its matrix ``S(c2)`` is recorded; the plane is then
    ``{y = S z + b}`` together with the verticals.
    """
    n = smap.n
    q = 1 << n
    for z1 in range(q):
        for z2 in range(q):
            if not np.array_equal(smap.g[z1 ^ z2], smap.g[z1] ^ smap.g[z2]):
                return None
    out = []
    for c2 in range(q):
        row = np.array([(c2 >> i) & 1 for i in range(n)], dtype=np.int64)
        cols = [(row @ smap.g[1 << j]) % 2 for j in range(n)]
        out.append(np.array(cols, dtype=np.uint8).T.copy())
    return out
