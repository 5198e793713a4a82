import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isonorm.errors import GroupError
from isonorm.groups import (FiniteGroup, FreeGroup, MatrixGroup, cyclic_group, dihedral_group,
                            direct_product, free_reduce, invert_word, sanov_generators,
                            standard_sl2_generators, symmetric_group)

words = st.text(alphabet="aAbB", max_size=12)


def _assert_group_axioms(G: FiniteGroup):
    e = G.identity
    for a, b, c in itertools.product(G.elements, repeat=3):
        assert G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c))
    for a in G.elements:
        assert G.mul(a, e) == a == G.mul(e, a)
        assert G.mul(a, G.inv(a)) == e


@pytest.mark.parametrize("G,order", [(cyclic_group(1), 1), (cyclic_group(5), 5),
                                     (dihedral_group(4), 8), (symmetric_group(3), 6),
                                     (direct_product(cyclic_group(2), cyclic_group(3)), 6)])
def test_builders(G, order):
    assert G.order == order
    _assert_group_axioms(G)


def test_cyclic_labels_and_generator():
    G = cyclic_group(4)
    assert G.elements == ("0", "1", "2", "3")
    assert G.evaluate("aaa") == "3"
    assert G.evaluate("A") == "3"
    assert G.element_order("2") == 2


def test_permutation_backend_matches_table():
    G = FiniteGroup.from_permutations({"a": [1, 2, 0], "b": [1, 0, 2]})
    assert G.order == 6
    assert G.identity == "e"
    _assert_group_axioms(G)
    # every label is a shortest word realising its permutation
    for lab, perm in G.permutations.items():
        if lab != "e":
            assert list(perm) == [int(i) for i in _word_perm(lab, {"a": [1, 2, 0], "b": [1, 0, 2]})]


def _word_perm(word, gens):
    n = len(next(iter(gens.values())))
    p = np.arange(n)
    for c in reversed(word):
        g = np.asarray(gens[c.lower()])
        if c.isupper():
            g = np.argsort(g)
        p = g[p]  # the rightmost letter acts first
    return p


def test_bad_table_rejected():
    with pytest.raises(GroupError):
        FiniteGroup(["e", "g"], [[0, 1], [1, 1]])
    with pytest.raises(GroupError):
        FiniteGroup(["e", "e"], [[0, 1], [1, 0]])


@given(words)
def test_free_reduction_idempotent(w):
    r = free_reduce(w)
    assert free_reduce(r) == r
    assert all(r[i] != r[i + 1].swapcase() for i in range(len(r) - 1))


@given(words, words)
def test_free_group_laws(u, v):
    F = FreeGroup("ab")
    u, v = free_reduce(u), free_reduce(v)
    assert F.mul(u, F.inv(u)) == ""
    assert F.inv(F.mul(u, v)) == F.mul(F.inv(v), F.inv(u))
    assert invert_word(invert_word(u)) == u


def test_words_up_to_counts():
    F = FreeGroup("ab")
    # 1 + 4 + 12 + 36
    assert len(F.words_up_to(3)) == 53
    assert FreeGroup("a").words_up_to(2) == ["", "a", "A", "aa", "AA"]


@given(st.text(alphabet="sStT", max_size=10))
def test_matrix_backend_determinant_one(w):
    M = MatrixGroup(standard_sl2_generators())
    a, b, c, d = M.evaluate(w)
    assert a * d - b * c == 1
    assert M.mul(M.evaluate(w), M.inv(M.evaluate(w))) == M.identity


def test_sanov_generators_are_exact_integers():
    M = MatrixGroup(sanov_generators())
    assert M.evaluate("a") == (1, 2, 0, 1)
    assert M.evaluate("ab") == (5, 2, 2, 1)
