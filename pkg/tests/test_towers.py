import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from isonorm.errors import CheckFailure, TowerError
from isonorm.groups import FiniteGroup, FreeGroup, cyclic_group
from isonorm.representations import SchreierLevel, quasi_regular_matrix
from isonorm.towers import (FreeBall, QuotientTower, TowerElement, bundle_truncation,
                            cyclic_level, e_norm_estimate, exoticness_verdict, f2_tower,
                            quasi_norm_sequence, reduced_norm_lower_bound, schur_row_sup,
                            schur_upper_bound, z_tower)

from oracles import circulant_eigenvalues

seeds = st.integers(0, 100_000)
ZSUM = TowerElement([("a", 1), ("A", 1)])


def random_self_adjoint(rng, letters="ab", terms=3):
    out = [("", float(rng.standard_normal()))]
    for _ in range(terms):
        w = "".join(rng.choice(list(letters + letters.upper()), size=int(rng.integers(1, 4))))
        c = complex(*rng.standard_normal(2))
        out += [(w, c), (w[::-1].swapcase(), np.conj(c))]
    return TowerElement(out)


def test_tower_element_reduces_and_merges():
    a = TowerElement([("aA", 2), ("", 1), ("b", 1), ("b", -1)])
    assert a.terms == [("", 3)]
    assert TowerElement.generator_sum("ab").terms == [(w, 1) for w in ["A", "B", "a", "b"]]
    assert ZSUM.is_self_adjoint() and not TowerElement([("a", 1)]).is_self_adjoint()
    assert TowerElement([("ab", 1j), ("BA", -1j)]).is_self_adjoint()


def test_z_tower_all_two():
    seq = quasi_norm_sequence(z_tower(3), ZSUM)
    assert seq.dims == [2, 4, 8]
    assert np.allclose(seq.values, 2.0, atol=1e-9) and seq.nondecreasing
    for lev, v in zip(z_tower(3).levels, seq.values):
        row = quasi_regular_matrix(lev, ZSUM.terms)[:, 0]
        assert max(abs(circulant_eigenvalues(row))) == pytest.approx(v, abs=1e-12)


def test_single_trivial_level():
    t = QuotientTower(FreeGroup("a"), [cyclic_level(1)])
    a = TowerElement([("", 0.5), ("a", 1.5), ("A", 1.5)])
    est = e_norm_estimate(t, a)
    assert est.estimate == pytest.approx(3.5) and not est.converged
    v = exoticness_verdict(t, TowerElement.delta_e(), R=3)
    assert v.e_lower == pytest.approx(1) and v.r_upper == pytest.approx(1) and not v.exotic


def test_e_estimates():
    assert e_norm_estimate(z_tower(4), ZSUM).converged
    est = e_norm_estimate(f2_tower((2, 3)), TowerElement.generator_sum("ab"))
    assert est.estimate == pytest.approx(4.0, abs=1e-9) and est.converged


def test_levels_validated():
    with pytest.raises(TowerError):
        QuotientTower(FreeGroup("a"), [SchreierLevel(2, {"a": [0, 1]})])
    with pytest.raises(TowerError):
        QuotientTower(FreeGroup("a"), [cyclic_level(4), cyclic_level(2)])
    with pytest.raises(TowerError):
        QuotientTower(FreeGroup("ab"), [cyclic_level(2)])
    z3 = FiniteGroup.from_permutations({"a": [1, 2, 0]})
    with pytest.raises(TowerError):
        QuotientTower(z3, [cyclic_level(4)])  # a³ = e fails on 4 cosets
    with pytest.raises(TowerError):
        quasi_norm_sequence(z_tower(2), TowerElement([("b", 1)]))


def test_nested_projection():
    assert z_tower(3).nested and f2_tower((2, 3)).nested


def test_dense_and_power_agree():
    t = f2_tower((2, 3))
    a = TowerElement([("", 0.3), ("ab", 1.0), ("BA", 1.0), ("b", 0.5j), ("B", -0.5j)])
    d = quasi_norm_sequence(t, a)
    p = quasi_norm_sequence(t, a, dense_limit=4)
    assert p.methods == ["jacobi", "power"]
    assert abs(d.values[1] - p.values[1]) <= 1e-6
    assert p.values[1] <= d.values[1] + 1e-12  # power iteration never overshoots


def test_non_self_adjoint_sequence():
    t = f2_tower((2, 3))
    a = TowerElement([("a", 1.0), ("b", 1.0)])
    seq = quasi_norm_sequence(t, a)
    for lev, v in zip(t.levels, seq.values):
        assert v == pytest.approx(np.linalg.norm(quasi_regular_matrix(lev, a.terms), 2), abs=1e-9)


@given(seeds)
def test_sequence_monotone_and_bounded(seed):
    rng = np.random.default_rng(seed)
    a = random_self_adjoint(rng)
    seq = quasi_norm_sequence(f2_tower((2, 3)), a)
    l1 = sum(abs(c) for _, c in a.terms)
    assert seq.nondecreasing and seq.values[-1] <= l1 + 1e-9
    assert seq.values[0] >= abs(a.coefficient_sum) - 1e-9 or seq.dims[0] > 1


def test_monotonicity_failure_raises():
    # Z/2 then Z/3 is not a refinement: 1 - 2cos drops from 3 to 2
    t = QuotientTower(FreeGroup("a"), [cyclic_level(2), cyclic_level(3)])
    a = TowerElement([("", 1), ("a", -1), ("A", -1)])
    assert not t.nested
    seq = quasi_norm_sequence(t, a, check=False)
    assert seq.values == pytest.approx([3.0, 2.0]) and not seq.nondecreasing
    with pytest.raises(CheckFailure) as err:
        quasi_norm_sequence(t, a)
    assert err.value.witness == (1, 2)


def test_schur_examples():
    gsum = TowerElement.generator_sum("ab")
    b, r = schur_upper_bound(FreeGroup("ab"), gsum)
    assert b == pytest.approx(2 * np.sqrt(3), abs=1e-4)
    assert r == pytest.approx(1 / np.sqrt(3), abs=1e-2)
    assert schur_row_sup(gsum, "ab", 0.5) == pytest.approx(1 / 0.5 + 3 * 0.5)
    assert schur_upper_bound(FreeGroup("a"), ZSUM)[0] == pytest.approx(2.0, abs=1e-9)
    assert schur_upper_bound(FreeGroup("ab"), TowerElement.delta_e())[0] == pytest.approx(1.0)
    with pytest.raises(TowerError):
        schur_upper_bound(FreeGroup("a"), TowerElement([("a", 1)]))


def test_lower_bound_examples():
    assert reduced_norm_lower_bound(FreeGroup("ab"), TowerElement.delta_e(), 3) == pytest.approx(1)
    # the radius-64 ball of Z is a path on 129 points
    z = reduced_norm_lower_bound(FreeGroup("a"), ZSUM, 64)
    assert z >= 1.995 and z <= 2 * np.cos(np.pi / 130) + 1e-9
    lo = reduced_norm_lower_bound(FreeGroup("ab"), TowerElement.generator_sum("ab"), 6)
    assert 3.0 < lo <= 2 * np.sqrt(3)


def test_free_ball_sizes():
    ball = FreeBall("ab", 3)
    assert ball.size == 1 + 4 + 12 + 36
    inner = np.nonzero(ball.length <= 2)[0]
    img = ball.word_map("a", inner)
    assert np.all(ball.length[img] <= 3)


def test_lower_bound_generic_backend():
    z5 = cyclic_group(5)
    z5 = FiniteGroup(z5.elements, z5.table, "z5", generators={"a": "1"})
    a = TowerElement([("a", 1), ("A", 1)])
    v = exoticness_verdict(QuotientTower(z5, [cyclic_level(5)]), a, R=3)
    assert v.r_upper == pytest.approx(2.0) and v.r_lower == pytest.approx(2.0, abs=1e-6)
    assert not v.exotic


def test_f2_verdict_small():
    v = exoticness_verdict(f2_tower((2, 3)), TowerElement.generator_sum("ab"), R=6)
    assert v.exotic and v.r_lower <= v.r_upper


def test_bundle_truncation():
    tr = bundle_truncation(z_tower(3), 3)
    assert tr.block_sizes == [2, 4, 8]
    assert tr.block_ranks == [4, 16, 64]
    assert len(tr.groupoid) == 4 + 16 + 64
    assert len(bundle_truncation(z_tower(3), 0).groupoid) == 0
    assert bundle_truncation(z_tower(1), 1).block_ranks == [4]
    with pytest.raises(TowerError):
        bundle_truncation(z_tower(2), 3)
