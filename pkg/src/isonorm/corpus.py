"""Seeded generators of small groupoids, elements and bisection families for testing."""

from __future__ import annotations

import numpy as np

from .algebra import AlgebraElement
from .constructions import (GroupAction, PartialAction, canonical_partial_bisections,
                            coset_action, disjoint_union, germ_quotient, group_as_groupoid,
                            linking_groupoid, partial_action_groupoid, semidirect_product,
                            transformation_groupoid)
from .groupoid import FiniteGroupoid
from .groups import FiniteGroup, cyclic_group, dihedral_group, direct_product, symmetric_group

MAX_ELEMENTS = 64


def small_groups() -> list[FiniteGroup]:
    z2 = cyclic_group(2)
    return [cyclic_group(1), z2, cyclic_group(3), cyclic_group(4), cyclic_group(5),
            cyclic_group(6), direct_product(z2, z2), dihedral_group(3), dihedral_group(4),
            symmetric_group(3), cyclic_group(8)]


def _pick(rng, seq):
    return seq[int(rng.integers(len(seq)))]


def random_subgroup(rng, group: FiniteGroup) -> list[str]:
    gens = [g for g in group.elements if rng.random() < 0.35]
    return group.subgroup(gens)


def random_action(rng, group: FiniteGroup, max_points: int) -> GroupAction:
    """Disjoint union of coset spaces group/H for random subgroups H."""
    pts, table = [], {}
    budget = max(max_points, 1)
    block = 0
    while True:
        H = random_subgroup(rng, group)
        ca = coset_action(group, H, prefix=f"{chr(ord('p') + block % 8)}{block}_")
        if pts and len(pts) + len(ca.points) > budget:
            break
        if not pts and len(ca.points) > budget:
            H = group.elements
            ca = coset_action(group, H, prefix=f"p{block}_")
        pts += ca.points
        table.update(ca.table)
        block += 1
        if rng.random() < 0.4 or len(pts) >= budget:
            break
    return GroupAction(group, pts, table)


def random_transformation_groupoid(rng) -> FiniteGroupoid:
    group = _pick(rng, small_groups())
    act = random_action(rng, group, MAX_ELEMENTS // group.order)
    return transformation_groupoid(act, name="transformation")


def restricted_partial_action(action: GroupAction, subset) -> PartialAction:
    """The partial action obtained by restricting a global action to a subset."""
    Y = [p for p in action.points if p in set(subset)]
    maps = {g: {y: action(g, y) for y in Y if action(g, y) in set(Y)}
            for g in action.group.elements}
    return PartialAction(action.group, Y, maps)


def random_partial_action_groupoid(rng) -> FiniteGroupoid:
    group = _pick(rng, small_groups()[1:])
    act = random_action(rng, group, max(2, MAX_ELEMENTS // group.order))
    keep = [p for p in act.points if rng.random() < 0.6] or [act.points[0]]
    return partial_action_groupoid(restricted_partial_action(act, keep), name="partial")


def random_semidirect(rng) -> FiniteGroupoid:
    """Z/k acting on k copies of a group-as-groupoid by cycling the copies.

    For k = 2 and an abelian fibre the generator may also invert inside the copy.
    """
    base = _pick(rng, [cyclic_group(1), cyclic_group(2), cyclic_group(3), cyclic_group(4),
                       direct_product(cyclic_group(2), cyclic_group(2)), symmetric_group(3)])
    options = [k for k in (1, 2, 3, 4) if k * k * base.order <= MAX_ELEMENTS]
    k = _pick(rng, options)
    gamma = cyclic_group(k)
    copies = [group_as_groupoid(base) for _ in range(k)]
    G = disjoint_union(copies, [f"{i}:" for i in range(k)], name="copies")
    abelian = all(base.mul(a, b) == base.mul(b, a) for a in base.elements for b in base.elements)
    twist = k == 2 and abelian and rng.random() < 0.5
    aut = {}
    for c in gamma.elements:
        shift = int(c)
        m = {}
        for gid in G.elements:
            i, h = gid.split(":", 1)
            if twist and shift % 2:
                h = base.inv(h)
            m[gid] = f"{(int(i) + shift) % k}:{h}"
        aut[c] = m
    return semidirect_product(gamma, G, aut, name="semidirect")


def random_germ_groupoid(rng) -> FiniteGroupoid:
    group = _pick(rng, small_groups()[1:])
    act = random_action(rng, group, max(2, MAX_ELEMENTS // group.order))
    return germ_quotient(act, name="germs")


def random_corpus_groupoid(rng, kind: str | None = None) -> FiniteGroupoid:
    kinds = {"transformation": random_transformation_groupoid,
             "partial": random_partial_action_groupoid,
             "semidirect": random_semidirect,
             "germ": random_germ_groupoid}
    kind = kind or _pick(rng, sorted(kinds))
    G = kinds[kind](rng)
    assert len(G) <= MAX_ELEMENTS, (kind, len(G))
    return G


def corpus(n: int, seed: int = 0) -> list[FiniteGroupoid]:
    """n groupoids cycling through the four constructions."""
    rng = np.random.default_rng(seed)
    order = ["transformation", "partial", "semidirect", "germ"]
    return [random_corpus_groupoid(rng, order[k % 4]) for k in range(n)]


def random_unit(rng, G: FiniteGroupoid) -> str:
    return _pick(rng, list(G.units))


def random_isotropy_element(rng, G: FiniteGroupoid, x: str) -> AlgebraElement:
    iso = [G.elements[i] for i in G.isotropy(G.unit_index(x))]
    supp = [g for g in iso if rng.random() < 0.7] or [_pick(rng, iso)]
    return AlgebraElement.random(G, rng, supp)


def random_linking_instance(rng) -> FiniteGroupoid:
    G = random_corpus_groupoid(rng)
    while len(G) > 16:
        G = random_corpus_groupoid(rng)
    return linking_groupoid(G)


def corrupted_families(G: FiniteGroupoid, x: str, canonical: dict, rng, count: int = 1):
    """Bisection families that break the certificate hypotheses, one edit each.

    Returns (family, expected hypothesis) pairs.
    """
    iso = sorted(canonical)
    out = []
    nonunit = [g for g in iso if g != x]
    attempts = 0
    while len(out) < count and attempts < 100 * count:
        attempts += 1
        kind = _pick(rng, ["shrink", "drop", "foreign", "units"])
        fam = {g: list(U) for g, U in canonical.items()}
        if kind == "shrink":
            # an involution's shrunken set can stay closed under inversion
            cands = [g for g in iso if G.inverse(g) != g and len(fam[G.inverse(g)]) > 1]
            if not cands:
                continue
            g = _pick(rng, cands)
            gi = G.inverse(g)
            keep = [u for u in fam[gi] if u != gi]
            fam[gi] = [gi] + keep[:-1]
            expect = "(2)"
        elif kind == "drop":
            g = _pick(rng, iso)
            fam[g] = [u for u in fam[g] if u != g]
            expect = "(1)"
        elif kind == "foreign":
            if not nonunit:
                continue
            g = _pick(rng, nonunit)
            lab = G.grading(g)
            cands = [h for h in G.elements if G.grading(h) != lab and h not in fam[g]
                     and all(G.r[G.index[h]] != G.r[G.index[u]] and
                             G.s[G.index[h]] != G.s[G.index[u]] for u in fam[g])]
            if not cands:
                continue
            fam[g] = fam[g] + [_pick(rng, cands)]
            expect = "(1)"
        else:
            if len(G.units) < 2:
                continue
            drop = _pick(rng, [u for u in G.units if u != x])
            fam[x] = [u for u in fam[x] if u != drop]
            expect = "(2)"
        out.append((fam, expect))
    return out


def canonical_family(G: FiniteGroupoid, x: str) -> dict:
    return canonical_partial_bisections(G, x)


def relation_counterexample():
    """A graded groupoid whose natural bisection family breaks only the relation hypothesis.

    Units p and q; isotropy Z2² at p and Z2³ at q, graded onto Z2² by the
    first two coordinates. Returns (G, x, family).
    """
    from .groupoid import Grading

    z2 = cyclic_group(2)
    V = direct_product(z2, z2)
    W = direct_product(V, z2)
    G = disjoint_union([group_as_groupoid(V), group_as_groupoid(W)], ["p:", "q:"], name="relation")
    labels = {f"p:{v}": v for v in V.elements}
    for w in W.elements:
        labels[f"q:{w}"] = w[1:w.rindex(",")]  # "((a,b),c)" -> "(a,b)"
    G.with_grading(Grading(V, labels))
    x = "p:(0,0)"
    lift = {"(0,0)": "((0,0),0)", "(1,0)": "((1,0),0)", "(0,1)": "((0,1),0)",
            "(1,1)": "((1,1),1)"}
    family = {f"p:{v}": [f"p:{v}", f"q:{lift[v]}"] for v in V.elements}
    return G, x, family
