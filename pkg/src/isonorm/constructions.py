"""Groupoid constructors.

Id conventions: units keep the name of the point (or unit) they sit over,
``"γ.x"`` is the arrow (γ, x) of an action groupoid with source x, ``"y.γ.x"``
is a triple of a graded image groupoid and ``"y~x"`` an arrow of a principal
(germ or pair) groupoid.
"""

from __future__ import annotations

import itertools

from .errors import GroupoidError
from .groupoid import FiniteGroupoid, Grading, orbits
from .groups import FiniteGroup, FreeGroup


class GroupAction:
    """A left action of a finite group on a finite point set, as a lookup table."""

    def __init__(self, group: FiniteGroup, points, table: dict):
        self.group = group
        self.points = [str(p) for p in points]
        self.table = {(str(g), str(x)): str(y) for (g, x), y in table.items()}
        self.validate()

    @classmethod
    def from_function(cls, group: FiniteGroup, points, act) -> "GroupAction":
        return cls(group, points, {(g, x): act(g, x) for g in group.elements for x in points})

    @classmethod
    def from_triples(cls, group: FiniteGroup, points, triples) -> "GroupAction":
        return cls(group, points, {(g, x): y for g, x, y in triples})

    def __call__(self, g: str, x: str) -> str:
        return self.table[(g, x)]

    def validate(self) -> None:
        pts = set(self.points)
        if len(pts) != len(self.points):
            raise GroupoidError("duplicate point names")
        for g in self.group.elements:
            images = []
            for x in self.points:
                y = self.table.get((g, x))
                if y is None:
                    raise GroupoidError(f"action undefined at ({g}, {x})", (g, x))
                if y not in pts:
                    raise GroupoidError(f"action sends {x} outside the point set", (g, x))
                images.append(y)
            if len(set(images)) != len(images):
                raise GroupoidError(f"{g} does not act bijectively", (g,))
        e = self.group.identity
        for x in self.points:
            if self.table[(e, x)] != x:
                raise GroupoidError(f"identity moves {x}", (e, x))
        for g, h in itertools.product(self.group.elements, repeat=2):
            gh = self.group.mul(g, h)
            for x in self.points:
                if self.table[(gh, x)] != self.table[(g, self.table[(h, x)])]:
                    raise GroupoidError(f"action axiom fails at ({g}, {h}, {x})", (g, h, x))

    def stabilizer(self, x: str) -> list[str]:
        return [g for g in self.group.elements if self.table[(g, x)] == x]


def coset_action(group: FiniteGroup, subgroup, prefix: str = "p") -> GroupAction:
    """Left multiplication action of ``group`` on the left cosets of ``subgroup``."""
    sub = list(subgroup)
    cosets: dict[frozenset, str] = {}
    owner = {}
    for g in group.elements:
        c = frozenset(group.mul(g, h) for h in sub)
        if c not in cosets:
            cosets[c] = f"{prefix}{len(cosets)}"
        owner[g] = cosets[c]
    rep = {name: next(g for g in group.elements if owner[g] == name) for name in cosets.values()}
    return GroupAction.from_function(group, list(rep), lambda g, x: owner[group.mul(g, rep[x])])


def group_as_groupoid(group: FiniteGroup, name: str = "") -> FiniteGroupoid:
    ident = group.identity
    G = FiniteGroupoid.from_operations(group.elements, [ident], lambda g: ident, lambda g: ident,
                                       group.mul, name=name or group.name)
    return G.with_grading(Grading(group, {g: g for g in group.elements}))


def unit_groupoid(points, name: str = "") -> FiniteGroupoid:
    points = [str(p) for p in points]
    return FiniteGroupoid.from_operations(points, points, lambda g: g, lambda g: g,
                                          lambda g, h: g, name=name)


def transformation_groupoid(action: GroupAction, name: str = "") -> FiniteGroupoid:
    """The groupoid Γ ⋉ X with r(γ, x) = γx, s(γ, x) = x, graded by (γ, x) ↦ γ."""
    group = action.group
    e = group.identity
    ids, pair_of = [], {}
    for g in group.elements:
        for x in action.points:
            gid = x if g == e else f"{g}.{x}"
            ids.append(gid)
            pair_of[gid] = (g, x)
    if len(set(ids)) != len(ids):
        raise GroupoidError("element ids collide; rename points")
    id_of = {v: k for k, v in pair_of.items()}

    def mul(a, b):
        (g, _), (h, x) = pair_of[a], pair_of[b]
        return id_of[(group.mul(g, h), x)]

    G = FiniteGroupoid.from_operations(
        ids, action.points, lambda a: action(*pair_of[a]), lambda a: pair_of[a][1], mul,
        name=name or f"{group.name}|x|X")
    return G.with_grading(Grading(group, {a: pair_of[a][0] for a in ids}))


def canonical_transformation_bisections(G: FiniteGroupoid, x: str) -> dict[str, list[str]]:
    """U_g = {γ} × X for each isotropy element g = (γ, x) of a transformation groupoid."""
    grading = _require_grading(G)
    iso = [G.elements[i] for i in G.isotropy(G.unit_index(x))]
    return {g: [h for h in G.elements if grading(h) == grading(g)] for g in iso}


def semidirect_product(group: FiniteGroup, G: FiniteGroupoid, automorphisms: dict,
                       name: str = "") -> FiniteGroupoid:
    """Γ ⋉ G for an action of Γ on G given by ``automorphisms[γ][g] = γ(g)``.

    Product (γ₂, g₂)(γ₁, g₁) = (γ₂γ₁, γ₁⁻¹(g₂) g₁); units {e} × G⁽⁰⁾.
    """
    _check_automorphic_action(group, G, automorphisms)
    e = group.identity
    ids, pair_of = [], {}
    for c in group.elements:
        for g in G.elements:
            gid = g if (c == e and G.index[g] in G.unit_set) else f"{c}.{g}"
            ids.append(gid)
            pair_of[gid] = (c, g)
    if len(set(ids)) != len(ids):
        raise GroupoidError("element ids collide in semidirect product")
    id_of = {v: k for k, v in pair_of.items()}

    def rng(a):
        c, g = pair_of[a]
        return G.range_of(automorphisms[c][g])

    def mul(a, b):
        (c2, g2), (c1, g1) = pair_of[a], pair_of[b]
        moved = automorphisms[group.inv(c1)][g2]
        return id_of[(group.mul(c2, c1), G.compose(moved, g1))]

    H = FiniteGroupoid.from_operations(ids, G.units, rng, lambda a: G.source_of(pair_of[a][1]),
                                       mul, name=name or f"{group.name}|x|{G.name}")
    return H.with_grading(Grading(group, {a: pair_of[a][0] for a in ids}))


def _check_automorphic_action(group: FiniteGroup, G: FiniteGroupoid, aut: dict) -> None:
    for c in group.elements:
        m = aut.get(c)
        if m is None or set(m) != set(G.elements) or set(m.values()) != set(G.elements):
            raise GroupoidError(f"{c} does not act by a bijection of the groupoid", (c,))
        for g in G.elements:
            if G.range_of(m[g]) != m[G.range_of(g)] or G.source_of(m[g]) != m[G.source_of(g)]:
                raise GroupoidError(f"{c} does not commute with range/source at {g}", (c, g))
        for i, j in zip(*(a.tolist() for a in (G.comp >= 0).nonzero())):
            g, h = G.elements[i], G.elements[j]
            if m[G.compose(g, h)] != G.compose(m[g], m[h]):
                raise GroupoidError(f"{c} is not multiplicative at ({g}, {h})", (c, g, h))
    for c, d in itertools.product(group.elements, repeat=2):
        cd = group.mul(c, d)
        for g in G.elements:
            if aut[cd][g] != aut[c][aut[d][g]]:
                raise GroupoidError(f"automorphisms do not form an action at ({c}, {d}, {g})",
                                    (c, d, g))


class PartialAction:
    """Partial bijections ``maps[γ] = {x: γx}``; the domain of γ is X_{γ⁻¹}.

    ``group`` is a FiniteGroup or a FreeGroup. For a free group, ``maps`` need only
    list the generators; words up to ``max_length`` are realised by composition.
    """

    def __init__(self, group, points, maps: dict, max_length: int | None = None):
        self.group = group
        self.points = [str(p) for p in points]
        self.max_length = max_length
        if isinstance(group, FreeGroup):
            if max_length is None:
                raise GroupoidError("a free-group partial action needs a word-length cap")
            self.maps = self._realise_free(maps, max_length)
        else:
            self.maps = {str(g): {str(x): str(y) for x, y in m.items()} for g, m in maps.items()}
            for g in group.elements:
                self.maps.setdefault(g, {})
        self.validate()

    def _realise_free(self, gen_maps, cap):
        base = {}
        for gen in self.group.generator_names:
            fwd = {str(x): str(y) for x, y in gen_maps.get(gen, {}).items()}
            base[gen] = fwd
            base[gen.upper()] = {y: x for x, y in fwd.items()}
        maps = {"": {x: x for x in self.points}}
        for word in self.group.words_up_to(cap + 1)[1:]:
            m = {}
            for x in self.points:
                y = x
                for letter in reversed(word):
                    y = base[letter].get(y)
                    if y is None:
                        break
                if y is not None:
                    m[x] = y
            if len(word) > cap:
                if m:
                    raise GroupoidError(
                        f"word {word} longer than the cap {cap} still acts on {sorted(m)[0]}; "
                        "the groupoid would be infinite", (word,))
            elif m:
                maps[word] = m
        return maps

    def validate(self) -> None:
        pts = set(self.points)
        e = self.group.identity
        if self.maps.get(e) != {x: x for x in self.points}:
            raise GroupoidError("the identity must act as the identity on all of X", (e,))
        for g, m in self.maps.items():
            if not set(m) <= pts or not set(m.values()) <= pts:
                raise GroupoidError(f"domain data of {g} leaves the point set", (g,))
            if len(set(m.values())) != len(m):
                raise GroupoidError(f"{g} is not injective", (g,))
            ginv = self.group.inv(g)
            back = self.maps.get(ginv, {})
            if {y: x for x, y in m.items()} != back:
                raise GroupoidError(f"missing domain data: {ginv} is not the inverse of {g}",
                                    (g, ginv))
        for g1, m1 in self.maps.items():
            for g2, m2 in self.maps.items():
                g12 = self.group.mul(g1, g2)
                m12 = self.maps.get(g12, {})
                for x, y in m2.items():
                    if y in m1 and m12.get(x) != m1[y]:
                        raise GroupoidError(
                            f"extension law violated: ({g1}{g2}){x} != {g1}({g2}{x})",
                            (g1, g2, x))


def partial_action_groupoid(pa: PartialAction, name: str = "") -> FiniteGroupoid:
    """Elements (γx, γ, x); product (z, γ₂, y)(y, γ₁, x) = (z, γ₂γ₁, x); graded by γ."""
    e = pa.group.identity
    ids, triple = [], {}
    for g in sorted(pa.maps, key=lambda w: (len(w), w)):
        for x, y in pa.maps[g].items():
            gid = x if g == e else f"{g or 'e'}.{x}"
            ids.append(gid)
            triple[gid] = (y, g, x)
    if len(set(ids)) != len(ids):
        raise GroupoidError("element ids collide in partial action groupoid")
    id_of = {(g, x): k for k, (y, g, x) in triple.items()}

    def mul(a, b):
        (_, g2, _), (_, g1, x) = triple[a], triple[b]
        return id_of[(pa.group.mul(g2, g1), x)]

    G = FiniteGroupoid.from_operations(ids, pa.points, lambda a: triple[a][0],
                                       lambda a: triple[a][2], mul, name=name or "partial")
    return G.with_grading(Grading(pa.group, {a: triple[a][1] for a in ids}))


def canonical_partial_bisections(G: FiniteGroupoid, x: str) -> dict[str, list[str]]:
    """U_g = {(γy, γ, y) : y ∈ X_{γ⁻¹}} for each isotropy element g = (x, γ, x)."""
    return canonical_transformation_bisections(G, x)


def germ_quotient(action: GroupAction, name: str = "") -> FiniteGroupoid:
    """Groupoid of germs of an action on a discrete set: (g, x) ~ (h, x) iff gx = hx."""
    pairs = sorted({(action(g, x), x) for g in action.group.elements for x in action.points})
    ids = {p: (p[1] if p[0] == p[1] else f"{p[0]}~{p[1]}") for p in pairs}
    back = {v: k for k, v in ids.items()}
    return FiniteGroupoid.from_operations(
        list(ids.values()), action.points, lambda a: back[a][0], lambda a: back[a][1],
        lambda a, b: ids[(back[a][0], back[b][1])], name=name or "germs")


def pair_groupoid(points, name: str = "") -> FiniteGroupoid:
    points = [str(p) for p in points]
    pairs = [(y, x) for y in points for x in points]
    ids = {p: (p[1] if p[0] == p[1] else f"{p[0]}~{p[1]}") for p in pairs}
    back = {v: k for k, v in ids.items()}
    return FiniteGroupoid.from_operations(
        list(ids.values()), points, lambda a: back[a][0], lambda a: back[a][1],
        lambda a, b: ids[(back[a][0], back[b][1])], name=name or "pairs")


def graded_image_groupoid(G: FiniteGroupoid, psi: Grading | None = None,
                          name: str = "") -> FiniteGroupoid:
    """G_Ψ: the triples (r(g), Ψ(g), s(g)) with product (z, γ₂, y)(y, γ₁, x) = (z, γ₂γ₁, x).

    The requirement that r = s near kernel elements holds automatically here since
    singletons are open.
    """
    psi = psi or _require_grading(G)
    psi.validate(G)
    group = psi.group
    e = group.identity
    triples = sorted({(G.range_of(g), psi(g), G.source_of(g)) for g in G.elements},
                     key=lambda t: (t[0], str(t[1]), t[2]))
    ids = {}
    for y, c, x in triples:
        ids[(y, c, x)] = x if (c == e and x == y) else f"{y}.{c or 'e'}.{x}"
    back = {v: k for k, v in ids.items()}

    def mul(a, b):
        (z, c2, _), (_, c1, x) = back[a], back[b]
        return ids[(z, group.mul(c2, c1), x)]

    H = FiniteGroupoid.from_operations(list(ids.values()), G.units, lambda a: back[a][0],
                                       lambda a: back[a][2], mul, name=name or f"{G.name}_psi")
    return H.with_grading(Grading(group, {a: back[a][1] for a in ids.values()}))


def reduce_to_units(T: FiniteGroupoid, units, name: str = "") -> FiniteGroupoid:
    """The subgroupoid of arrows with range and source in ``units``."""
    units = sorted({str(u) for u in units})
    if not units:
        raise GroupoidError("cannot reduce to an empty set of units")
    idx = {T.unit_index(u) for u in units}
    keep = [g for g in range(len(T)) if T.r[g] in idx and T.s[g] in idx]
    ids = [T.elements[g] for g in keep]
    H = FiniteGroupoid.from_operations(ids, units, T.range_of, T.source_of, T.compose,
                                       name=name or f"{T.name}|U")
    if T.grading is not None:
        H.with_grading(Grading(T.grading.group, {g: T.grading(g) for g in ids}))
    return H


def isotropy_groupoid(G: FiniteGroupoid, x: str) -> FiniteGroupoid:
    return reduce_to_units(G, [x], name=f"iso({x})")


def disjoint_union(parts, prefixes=None, name: str = "") -> FiniteGroupoid:
    parts = list(parts)
    prefixes = prefixes or [f"{k}:" for k in range(len(parts))]
    ids, where = [], {}
    for p, pre in zip(parts, prefixes):
        for g in p.elements:
            ids.append(pre + g)
            where[pre + g] = (p, pre, g)
    units = [pre + u for p, pre in zip(parts, prefixes) for u in p.units]

    def mul(a, b):
        p, pre, g = where[a]
        return pre + p.compose(g, where[b][2])

    return FiniteGroupoid.from_operations(
        ids, units, lambda a: where[a][1] + where[a][0].range_of(where[a][2]),
        lambda a: where[a][1] + where[a][0].source_of(where[a][2]), mul, name=name or "union")


def product_groupoid(G: FiniteGroupoid, H: FiniteGroupoid, name: str = "") -> FiniteGroupoid:
    """G × H with componentwise structure; ids ``"(g,h)"``."""
    pairs = [(g, h) for g in G.elements for h in H.elements]
    ids = {p: f"({p[0]},{p[1]})" for p in pairs}
    back = {v: k for k, v in ids.items()}
    units = [ids[(u, v)] for u in G.units for v in H.units]
    return FiniteGroupoid.from_operations(
        list(ids.values()), units,
        lambda a: ids[(G.range_of(back[a][0]), H.range_of(back[a][1]))],
        lambda a: ids[(G.source_of(back[a][0]), H.source_of(back[a][1]))],
        lambda a, b: ids[(G.compose(back[a][0], back[b][0]), H.compose(back[a][1], back[b][1]))],
        name=name or f"{G.name}x{H.name}")


def linking_groupoid(G: FiniteGroupoid, copies: int = 2, name: str = "") -> FiniteGroupoid:
    """G × (pair groupoid on ``copies`` points): copies of G linked through every orbit.

    The arrow (g, i, j) has id ``"g@ij"``; its reduction to the units ``"u@11"`` is G.
    """
    labels = [str(k + 1) for k in range(copies)]
    triples = [(g, i, j) for g in G.elements for i in labels for j in labels]
    ids = {t: f"{t[0]}@{t[1]}{t[2]}" for t in triples}
    back = {v: k for k, v in ids.items()}
    units = [ids[(u, i, i)] for u in G.units for i in labels]
    return FiniteGroupoid.from_operations(
        list(ids.values()), units,
        lambda a: ids[(G.range_of(back[a][0]), back[a][1], back[a][1])],
        lambda a: ids[(G.source_of(back[a][0]), back[a][2], back[a][2])],
        lambda a, b: ids[(G.compose(back[a][0], back[b][0]), back[a][1], back[b][2])],
        name=name or f"link({G.name})")


def copy_units(T: FiniteGroupoid, copy: int = 1) -> list[str]:
    return [u for u in T.units if u.endswith(f"@{copy}{copy}")]


def meets_every_orbit(T: FiniteGroupoid, units) -> bool:
    chosen = set(units)
    return all(chosen & set(block) for block in orbits(T))


def _require_grading(G: FiniteGroupoid) -> Grading:
    if G.grading is None:
        raise GroupoidError("this construction needs a graded groupoid")
    return G.grading
