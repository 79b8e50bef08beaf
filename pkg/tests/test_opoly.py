from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pseudoovals.families import lunelli_sce
from pseudoovals.field import make_field
from pseudoovals.opoly import (
    NUCLEUS,
    NotAnOPermutation,
    brute_force_opermutations,
    brute_force_opolynomials,
    collinear_triple,
    degree,
    difference_quotient,
    evaluate,
    interpolate,
    is_o_permutation,
    monomial,
    normalize,
    o_permutation_mask,
    o_permutation_witness,
    oval_points,
    scale,
    table_keys,
)


def hyperoval_oracle(field, f) -> bool:
    """Independent check: no three points of D(f) plus the nucleus are collinear."""
    pts = oval_points(field, f) + [NUCLEUS]
    return collinear_triple(field, pts) is None


@pytest.mark.parametrize("k", range(1, 7))
def test_x_squared_is_opolynomial(k):
    F = make_field(k)
    assert is_o_permutation(F, monomial(F, 2))


def test_gf8_monomials():
    F = make_field(3)
    good = [e for e in range(1, 7) if is_o_permutation(F, monomial(F, e))]
    assert good == [2, 4, 6]


def test_x4_fails_over_gf16():
    F = make_field(4)
    f = monomial(F, 4)
    why = o_permutation_witness(F, f)
    assert why is not None and not hyperoval_oracle(F, f)


def test_non_permutation_rejected(gf8):
    f = np.zeros(8, dtype=np.uint8)
    f[1] = 1
    assert o_permutation_witness(gf8, f) is not None
    with pytest.raises(NotAnOPermutation):
        normalize(gf8, f)


def test_witness_agrees_with_collinearity_gf8(gf8):
    # exhaustive over permutations fixing 0, value 1 at 1
    from itertools import permutations

    for rest in permutations(range(2, 8)):
        f = np.array((0, 1) + rest, dtype=np.uint8)
        assert is_o_permutation(gf8, f) == hyperoval_oracle(gf8, f)


def test_brute_force_counts():
    assert len(brute_force_opermutations(make_field(3))) == 70
    assert len(brute_force_opolynomials(make_field(3))) == 10
    assert len(brute_force_opolynomials(make_field(2))) == 1


def test_brute_force_gf16():
    F = make_field(4)
    polys = brute_force_opolynomials(F)
    assert len(polys) == 2058
    assert all(hyperoval_oracle(F, f) for f in polys[::97])


def test_mask_matches_witness(gf16, rng):
    tables = np.zeros((400, 16), dtype=np.uint8)
    for i in range(len(tables)):
        tables[i, 1:] = rng.permutation(np.arange(1, 16))
    tables[:3] = [monomial(gf16, 2), lunelli_sce(gf16), monomial(gf16, 6)]
    mask = o_permutation_mask(gf16, tables)
    assert mask.tolist() == [o_permutation_witness(gf16, t) is None for t in tables]
    assert mask[0] and mask[1] and not mask[2]


def test_difference_quotient_permutes_nonzero(gf8):
    f = monomial(gf8, 6)
    for s in range(8):
        d = difference_quotient(gf8, f, s)
        vals = [int(d[x]) for x in range(1, 8)]
        assert sorted(vals) == list(range(1, 8))


def test_scaling_preserves_property(gf16):
    f = lunelli_sce(gf16)
    for lam in range(1, 16):
        assert is_o_permutation(gf16, scale(gf16, f, lam))
        assert np.array_equal(normalize(gf16, scale(gf16, f, lam)), f)


@pytest.mark.parametrize("k", [3, 4, 5])
def test_interpolation_of_monomial(k):
    F = make_field(k)
    c = interpolate(F, monomial(F, 6))
    assert degree(c) == 6 and c[6] == 1 and sum(map(bool, c)) == 1


@settings(max_examples=50)
@given(st.integers(1, 6), st.data())
def test_interpolate_roundtrip(k, data):
    F = make_field(k)
    vals = data.draw(st.lists(st.integers(0, F.q - 1), min_size=F.q, max_size=F.q))
    f = np.array(vals, dtype=np.uint8)
    assert np.array_equal(evaluate(F, interpolate(F, f)), f)


def test_table_keys_distinct():
    ops = brute_force_opermutations(make_field(3))
    assert len(table_keys(ops)) == 70


def test_normalized_interpolation_degree(gf16):
    from conftest import expansion

    q = gf16.q
    for f in expansion(4).pool():
        assert degree(interpolate(gf16, f)) <= q - 2


def test_lines_through_nucleus_meet_once(gf16):
    from pseudoovals.opoly import lines_through, on_line

    pts = oval_points(gf16, lunelli_sce(gf16))
    lines = lines_through(gf16, NUCLEUS)
    assert len(lines) == gf16.q + 1
    for line in lines:
        assert sum(on_line(gf16, line, p) for p in pts) == 1


def test_scalar_classes_have_size_q_minus_1(gf8):
    ops = brute_force_opermutations(gf8)
    classes = {normalize(gf8, f).tobytes() for f in ops}
    assert len(classes) * 7 == len(ops)
