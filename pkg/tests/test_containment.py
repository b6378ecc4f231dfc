from __future__ import annotations

import random

from cqmine.containment import (
    canonical_key,
    canonicalize,
    find_containment_mapping,
    is_contained,
    is_contained_up_to_head_permutation,
    is_diagonally_contained,
    is_equivalent,
    minimize,
)
from cqmine.queries import Variable, parse_query

import _oracle

Q = parse_query


# ---------------------------------------------------------------------------
# directed containment
# ---------------------------------------------------------------------------


def test_containment_is_reflexive():
    q = Q("Q(x, y) :- likes(x, y), serves(z, y)")
    assert is_contained(q, q)
    assert is_equivalent(q, q)


def test_containment_under_renaming():
    a = Q("Q(x, y) :- likes(x, y)")
    b = Q("Q(u, w) :- likes(u, w)")
    assert is_equivalent(a, b)


def test_selection_is_contained_in_general_query():
    general = Q("Q(x) :- likes(x, y)")
    selected = Q("Q(x) :- likes(x, 'Duvel')")
    assert is_contained(selected, general)
    assert not is_contained(general, selected)


def test_join_is_contained_in_unjoined():
    # Hand-checked: mapping x1->x1, x2->x2, x4->x3, x3->x1 embeds the
    # two-atom cartesian body into the joined one, but not conversely.
    joined = Q("Q(x1, x2, x3) :- likes(x1, x2), likes(x1, x3)")
    unjoined = Q("Q(x1, x2, x4) :- likes(x1, x2), likes(x3, x4)")
    assert is_contained(joined, unjoined)
    assert not is_contained(unjoined, joined)


def test_extension_is_contained_in_shorter():
    short = Q("Q(x, y) :- likes(x, y)")
    long = Q("Q(x, y) :- likes(x, y), serves(z, y)")
    assert is_contained(long, short)
    assert not is_contained(short, long)


def test_arity_mismatch_never_contained():
    a = Q("Q(x) :- likes(x, y)")
    b = Q("Q(x, y) :- likes(x, y)")
    assert not is_contained(a, b)
    assert find_containment_mapping(a, b) is None


def test_symbolic_constant_containment():
    # A placeholder query is contained in the fully general one ...
    general = Q("Q(x) :- likes(x, y)")
    symbolic = Q("Q(x) :- likes(x, $c1)")
    concrete = Q("Q(x) :- likes(x, 'Duvel')")
    assert is_contained(symbolic, general)
    assert not is_contained(general, symbolic)
    # ... and every concrete selection is contained in the placeholder form.
    assert is_contained(concrete, symbolic)
    assert not is_contained(symbolic, concrete)


def test_find_containment_mapping_witness():
    q1 = Q("Q(x) :- likes(x, 'Duvel')")
    q2 = Q("Q(u) :- likes(u, v)")
    mapping = find_containment_mapping(q1, q2)
    assert mapping is not None
    assert mapping[Variable("u")] == Variable("x")
    # The witness really is a homomorphism onto q1's body.
    from cqmine.queries import substitute_terms

    assert substitute_terms(q2.body, mapping) <= q1.body


# ---------------------------------------------------------------------------
# diagonal containment
# ---------------------------------------------------------------------------


def test_projection_is_diagonally_contained():
    wide = Q("Q(x, y) :- likes(x, y)")
    narrow = Q("Q(x) :- likes(x, y)")
    assert is_diagonally_contained(narrow, wide)
    assert not is_diagonally_contained(wide, narrow)


def test_head_permutation_is_diagonal_both_ways():
    a = Q("Q(x, y) :- likes(x, y)")
    b = Q("Q(y, x) :- likes(x, y)")
    assert not is_contained(a, b)
    assert is_diagonally_contained(a, b)
    assert is_diagonally_contained(b, a)
    assert is_contained_up_to_head_permutation(a, b)


def test_plain_containment_implies_diagonal():
    rng = random.Random(411)
    for _ in range(120):
        q1 = _oracle.random_query(rng)
        q2 = _oracle.random_query(rng)
        if is_contained(q1, q2):
            assert is_diagonally_contained(q1, q2)


# ---------------------------------------------------------------------------
# minimization
# ---------------------------------------------------------------------------


def test_minimize_drops_redundant_atom():
    q = Q("Q(x) :- likes(x, y), likes(x, z)")
    assert minimize(q) == Q("Q(x) :- likes(x, y)") or len(minimize(q).body) == 1


def test_minimize_keeps_head_variables_apart():
    q = Q("Q(x, y) :- likes(x, y), likes(x, z)")
    m = minimize(q)
    assert len(m.body) == 1
    assert m.head == q.head


def test_minimize_preserves_distinct_placeholders():
    q = Q("Q(x) :- likes(x, $c1), likes(x, $c2)")
    assert minimize(q) == q


def test_minimize_merges_variable_into_placeholder_atom():
    q = Q("Q(x) :- likes(x, $c1), likes(y, $c1)")
    assert minimize(q) == Q("Q(x) :- likes(x, $c1)")


def test_minimize_irredundant_query_unchanged():
    q = Q("Q(x) :- likes(x, y), visits(x, z), serves(z, y)")
    assert minimize(q) == q


def test_minimize_equivalent_to_input():
    rng = random.Random(751)
    for _ in range(150):
        q = _oracle.random_query(rng, max_atoms=4)
        m = minimize(q)
        assert len(m.body) <= len(q.body)
        assert is_equivalent(m, q)


# ---------------------------------------------------------------------------
# canonical keys
# ---------------------------------------------------------------------------


def test_canonical_key_identifies_equivalent_queries():
    a = Q("Q(x) :- likes(x, y)")
    b = Q("Q(u) :- likes(u, v), likes(u, w)")
    assert canonical_key(a) == canonical_key(b)


def test_canonical_key_modulo_head_permutation():
    a = Q("Q(x, y) :- likes(x, y)")
    b = Q("Q(y, x) :- likes(x, y)")
    assert canonical_key(a) != canonical_key(b)
    assert canonical_key(a, modulo_head_permutation=True) == canonical_key(
        b, modulo_head_permutation=True
    )


def test_canonical_key_separates_placeholder_counts():
    one = Q("Q(x) :- likes(x, $c1)")
    two = Q("Q(x) :- likes(x, $c1), likes(x, $c2)")
    assert canonical_key(one) != canonical_key(two)


def test_canonicalize_round_trip():
    rng = random.Random(902)
    for _ in range(100):
        q = _oracle.random_query(rng, max_atoms=4)
        c = canonicalize(q)
        assert is_equivalent(c, q)
        assert canonical_key(c) == canonical_key(q)
        assert canonicalize(c) == c


# ---------------------------------------------------------------------------
# agreement with the brute-force oracle
# ---------------------------------------------------------------------------


def test_containment_matches_oracle_on_random_pairs():
    rng = random.Random(133001)
    for _ in range(250):
        q1 = _oracle.random_query(rng)
        q2 = _oracle.random_query(rng)
        assert is_contained(q1, q2) == _oracle.family_contained(q1, q2), (
            f"{q1} vs {q2}"
        )


def test_diagonal_matches_oracle_on_random_pairs():
    rng = random.Random(133002)
    for _ in range(150):
        q1 = _oracle.random_query(rng)
        q2 = _oracle.random_query(rng)
        assert is_diagonally_contained(q1, q2) == _oracle.diagonal_contained(q1, q2), (
            f"{q1} vs {q2}"
        )


def test_canonical_key_equality_matches_equivalence_without_placeholders():
    rng = random.Random(133003)
    pairs = 0
    for _ in range(400):
        q1 = _oracle.random_query(rng, allow_symbolics=False)
        q2 = _oracle.random_query(rng, allow_symbolics=False)
        if q1.arity != q2.arity:
            continue
        pairs += 1
        assert (canonical_key(q1) == canonical_key(q2)) == is_equivalent(q1, q2)
    assert pairs > 100


def test_canonical_key_equality_implies_equivalence_with_placeholders():
    rng = random.Random(133004)
    for _ in range(200):
        q1 = _oracle.random_query(rng)
        q2 = _oracle.random_query(rng)
        if canonical_key(q1) == canonical_key(q2):
            assert is_equivalent(q1, q2)
