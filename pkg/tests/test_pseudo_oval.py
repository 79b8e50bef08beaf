from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest

from pseudoovals.families import lunelli_sce
from pseudoovals.field import make_field
from pseudoovals.gf2 import GfSubspace, bits_to_array, mat_rank, span
from pseudoovals.opoly import monomial
from pseudoovals.pseudo_oval import (
    InvariantViolation,
    PseudoOval,
    SpreadSet,
    canonical_elements,
    desarguesian_witness,
    elementary,
    is_desarguesian,
    multiplication_matrix,
    nucleus_swap,
    permute_blocks,
    projection_spread,
    pseudo_oval_witness,
    spread_set,
    spread_set_witness,
    spread_witness,
    steinke_coordinates,
    steinke_sigma,
    verify_pseudo_oval,
)


def dense_rank(spaces, m):
    rows = [bits_to_array(v, m) for s in spaces for v in s.basis]
    return mat_rank(np.array(rows, dtype=np.uint8))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_elementary_is_pseudo_oval(k):
    F = make_field(k)
    o = elementary(F, monomial(F, 2))
    assert pseudo_oval_witness(o) is None
    assert len(o.elements) == F.q + 1


def test_triples_by_dense_rank(gf8):
    # second route: plain matrix rank of stacked bases
    o = elementary(gf8, monomial(gf8, 6))
    for tri in combinations(o.elements, 3):
        assert dense_rank(tri, 9) == 9
    for x in o.elements:
        assert dense_rank([x, o.nucleus], 9) == 6


def test_sampled_check_gf32(gf32):
    o = elementary(gf32, monomial(gf32, 6), sample=3000)
    assert pseudo_oval_witness(o, sample=3000) is None


def test_non_opermutation_rejected(gf16):
    with pytest.raises(InvariantViolation):
        elementary(gf16, monomial(gf16, 4))


def test_wrong_count():
    F = make_field(3)
    o = elementary(F, monomial(F, 2))
    short = PseudoOval(3, o.elements[:-1], o.nucleus)
    assert pseudo_oval_witness(short)[0] == "count"


def test_every_single_bit_flip_detected(gf8):
    o = elementary(gf8, monomial(gf8, 2))
    for i, x in enumerate(o.elements):
        for r in range(len(x.basis)):
            for bit in range(9):
                rows = list(x.basis)
                rows[r] ^= 1 << bit
                y = GfSubspace.from_rows(9, rows)
                if y == x:
                    continue
                els = list(o.elements)
                els[i] = y
                assert pseudo_oval_witness(PseudoOval(3, els, o.nucleus)) is not None, (i, r, bit)


def test_bad_nucleus_detected(gf8):
    o = elementary(gf8, monomial(gf8, 2))
    assert pseudo_oval_witness(PseudoOval(3, o.elements, o.elements[0])) is not None


def test_json_roundtrip(gf8):
    o = elementary(gf8, monomial(gf8, 2))
    back = PseudoOval.from_json(o.to_json())
    assert canonical_elements(back) == canonical_elements(o)
    assert back.nucleus == o.nucleus


def test_nucleus_swap_gives_pseudo_oval(gf16):
    o = elementary(gf16, lunelli_sce(gf16))
    for i in (0, 5, 16):
        assert pseudo_oval_witness(nucleus_swap(o, i)) is None


def test_nucleus_swap_matches_inverse_oval(gf8):
    # dropping (0,1,0) from the hyperoval of x^4 and exchanging blocks 1, 2 gives x^2
    swapped = nucleus_swap(elementary(gf8, monomial(gf8, 4)), 8)
    assert canonical_elements(permute_blocks(swapped, [0, 2, 1])) == canonical_elements(elementary(gf8, monomial(gf8, 2)))


@pytest.mark.parametrize("k", [2, 3, 4])
def test_projection_is_regular_spread(k):
    F = make_field(k)
    o = elementary(F, monomial(F, 2))
    for i in (0, len(o.elements) - 1):
        spread, s = projection_spread(o, i)
        assert spread_witness(spread, s) is None
        ss = spread_set(spread, 0, len(spread) - 1)
        assert spread_set_witness(ss) is None
        assert is_desarguesian(ss)


def test_projection_regular_for_lunelli_sce(gf16):
    o = elementary(gf16, lunelli_sce(gf16))
    spread, s = projection_spread(o, 3)
    assert spread_witness(spread, s) is None
    assert is_desarguesian(spread_set(spread, 0, len(spread) - 1))


def test_spread_witness_catches_overlap(gf8):
    spread, s = projection_spread(elementary(gf8, monomial(gf8, 2)), 0)
    bad = list(spread)
    bad[2] = bad[1]
    assert spread_witness(bad, s) is not None


def test_spread_set_witness_catches_singular_difference(gf8):
    spread, _ = projection_spread(elementary(gf8, monomial(gf8, 2)), 0)
    ss = spread_set(spread, 0, len(spread) - 1)
    mats = ss.matrices.copy()
    mats[3] = mats[2].copy()
    mats[3][:, 0] = mats[3][:, 0] ^ np.array([1, 0, 0], np.uint8)  # keep label 3, collide elsewhere
    assert spread_set_witness(SpreadSet(3, mats)) is not None


def test_non_field_spread_set_detected():
    # 0, I and two non-commuting-product matrices: not closed under multiplication
    n = 2
    mats = np.zeros((4, n, n), dtype=np.uint8)
    mats[1] = np.eye(2, dtype=np.uint8)
    mats[2] = np.array([[0, 1], [1, 1]], np.uint8)
    mats[3] = np.array([[1, 1], [1, 0]], np.uint8)
    assert desarguesian_witness(SpreadSet(2, mats)) is None  # this one is GF(4)
    mats[3] = np.array([[1, 0], [1, 1]], np.uint8)
    assert desarguesian_witness(SpreadSet(2, mats)) is not None


@pytest.mark.parametrize("k", [3, 4])
def test_steinke_coordinates_of_elementary(k):
    F = make_field(k)
    f = monomial(F, 2) if k == 4 else monomial(F, 6)
    o = elementary(F, f)
    smap = steinke_coordinates(o)
    # X_inf = (0,1,0), N = (0,0,1), X_0 = (1,0,0): (1,t,f(t)) has h = M_t, g = M_f(t)
    for t in range(F.q):
        z = int(f[t])
        assert smap.index[z] == t
        assert np.array_equal(smap.h[z], multiplication_matrix(F, t))
        assert np.array_equal(smap.g[z], multiplication_matrix(F, z))


def test_steinke_columns_span_elements(gf16):
    o = elementary(gf16, lunelli_sce(gf16))
    smap = steinke_coordinates(o, infinity=4, zero=9)
    for z in range(16):
        vecs = (smap.D(z).T @ smap.frame) % 2
        x = GfSubspace.from_rows(12, [int("".join(map(str, v[::-1])), 2) for v in vecs])
        assert x == o.elements[smap.index[z]]


def test_steinke_g_is_projection_spread_set(gf16):
    o = elementary(gf16, lunelli_sce(gf16))
    smap = steinke_coordinates(o)
    spread, sigma = projection_spread(o, smap.infinity, steinke_sigma(o, smap))
    ss = spread_set(spread, smap.index[0], len(spread) - 1)
    assert ss.keys() == smap.spread_set().keys()
    assert spread_set_witness(smap.spread_set()) is None


def test_steinke_needs_nucleus(gf8):
    o = elementary(gf8, monomial(gf8, 2))
    with pytest.raises(ValueError):
        steinke_coordinates(PseudoOval(3, o.elements, None))


def test_verify_raises_with_witness(gf8):
    o = elementary(gf8, monomial(gf8, 2))
    els = list(o.elements)
    els[1] = els[0]
    with pytest.raises(InvariantViolation) as info:
        verify_pseudo_oval(PseudoOval(3, els, o.nucleus))
    assert info.value.witness is not None
