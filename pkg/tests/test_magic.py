from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from pseudoovals.families import lunelli_sce
from pseudoovals.field import make_field
from pseudoovals.magic import (
    MagicElement,
    OvalClassifier,
    class_label,
    default_generators,
    diagonal,
    equivalent,
    frobenius,
    magic_apply,
    magic_apply_rows,
    normalized_orbit,
    read_orbit_file,
    swap,
    transvection,
    write_orbit_file,
    orbit_cache_path,
)
from pseudoovals.opoly import brute_force_opolynomials, is_o_permutation, monomial, normalize, table_keys

from conftest import expansion


def random_element(field, data):
    e = st.integers(0, field.q - 1)
    while True:
        a, b, c, d = (data.draw(e) for _ in range(4))
        psi = MagicElement(a, b, c, d, data.draw(st.integers(0, field.k - 1)))
        if psi.det(field):
            return psi


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.large_base_example])
@given(st.integers(2, 5), st.data())
def test_action_preserves_opolynomials(k, data):
    F = make_field(k)
    f = monomial(F, 6 if k % 2 else 2)
    if not is_o_permutation(F, f):
        f = monomial(F, 2)
    g = magic_apply(F, random_element(F, data), f)
    assert is_o_permutation(F, g)


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.large_base_example])
@given(st.integers(2, 5), st.data())
def test_composition_law(k, data):
    F = make_field(k)
    f = monomial(F, 6) if k == 3 else monomial(F, 2)
    psi, phi = random_element(F, data), random_element(F, data)
    lhs = magic_apply(F, psi.compose(phi, F), f)
    rhs = normalize(F, magic_apply(F, psi, magic_apply(F, phi, f)))
    assert np.array_equal(normalize(F, lhs), rhs)


def test_identity_acts_trivially(gf8):
    f = monomial(gf8, 6)
    assert np.array_equal(magic_apply(gf8, MagicElement.identity(), f), f)


def test_singular_rejected(gf8):
    with pytest.raises(ValueError):
        magic_apply(gf8, MagicElement(1, 1, 1, 1), monomial(gf8, 2))


def test_inverse_permutation_in_orbit(gf16):
    f = lunelli_sce(gf16)
    inv = np.zeros_like(f)
    inv[f] = np.arange(16, dtype=np.uint8)
    assert equivalent(gf16, f, inv)


def test_rows_match_single(gf16, rng):
    tables = np.array([monomial(gf16, 2), lunelli_sce(gf16), monomial(gf16, 14)])
    psi = MagicElement(3, 1, 7, 2, 1)
    rows = magic_apply_rows(gf16, psi, tables)
    for t, r in zip(tables, rows):
        assert np.array_equal(magic_apply(gf16, psi, t), r)


def test_gf8_two_classes_cover_brute_force(gf8):
    a = normalized_orbit(gf8, monomial(gf8, 2))
    b = normalized_orbit(gf8, monomial(gf8, 4))
    assert (len(a), len(b)) == (9, 1)
    assert table_keys(a) | table_keys(b) == table_keys(brute_force_opolynomials(gf8))


def test_gf16_orbits_partition_brute_force(gf16):
    brute = table_keys(brute_force_opolynomials(gf16))
    exp = expansion(4)
    assert exp.class_count == 3
    assert table_keys(exp.pool()) == brute


def test_borel_generators_alone_are_incomplete(gf16):
    borel = [transvection(), diagonal(gf16.primitive()), frobenius()]
    small = normalized_orbit(gf16, monomial(gf16, 2), borel)
    full = normalized_orbit(gf16, monomial(gf16, 2), default_generators(gf16))
    assert len(small) == 1 and len(full) == 17
    assert swap() in default_generators(gf16)


def test_label_is_orbit_invariant(gf16):
    f = lunelli_sce(gf16)
    lab = class_label(gf16, f)
    for g in normalized_orbit(gf16, f)[::37]:
        assert np.array_equal(class_label(gf16, g), lab)


def test_orbit_file_roundtrip(tmp_path, gf16):
    f = lunelli_sce(gf16)
    rows = normalized_orbit(gf16, f)
    lab = class_label(gf16, f)
    path = orbit_cache_path(tmp_path, gf16, lab)
    write_orbit_file(path, gf16, lab, rows)
    lab2, rows2 = read_orbit_file(path, gf16)
    assert np.array_equal(lab, lab2) and np.array_equal(rows, rows2)


def test_classifier_uses_cache(tmp_path, gf16):
    c1 = OvalClassifier(gf16, tmp_path)
    i = c1.classify(lunelli_sce(gf16))
    c2 = OvalClassifier(gf16, tmp_path)
    assert c2.load_cached(c1.labels[i])
    assert len(c2) == 1 and c2.find(lunelli_sce(gf16)) == 0


def test_classifier_separates_classes(gf16):
    c = OvalClassifier(gf16)
    assert c.classify(monomial(gf16, 2)) != c.classify(lunelli_sce(gf16))
    assert len(c) == 2
