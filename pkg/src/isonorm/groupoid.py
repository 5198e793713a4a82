"""Finite discrete groupoids, gradings, and axiom validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import GroupoidError
from .groups import FiniteGroup

MAX_ISO_ELEMENTS = 512


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    message: str = "ok"
    witness: tuple = ()

    def raise_if_failed(self):
        if not self.ok:
            raise GroupoidError(self.message, self.witness)


@dataclass
class RawGroupoid:
    """Unvalidated description, as read from a groupoid file."""

    elements: list
    units: list
    range: dict
    source: dict
    compose: list  # [g, h, gh] triples
    grading: dict | None = None
    name: str = ""
    extra: dict = field(default_factory=dict)


def validate_groupoid(raw: RawGroupoid) -> ValidationReport:
    """Check the groupoid axioms on a raw description; report the first violation."""
    elements = [str(e) for e in raw.elements]
    if len(set(elements)) != len(elements):
        dup = next(e for e in elements if elements.count(e) > 1)
        return ValidationReport(False, f"duplicate element id {dup}", (dup,))
    eset = set(elements)
    units = [str(u) for u in raw.units]
    for u in units:
        if u not in eset:
            return ValidationReport(False, f"unit {u} is not an element", (u,))
    uset = set(units)
    for name, mapping in (("range", raw.range), ("source", raw.source)):
        for g in elements:
            if g not in mapping:
                return ValidationReport(False, f"{name} undefined at {g}", (g,))
            if str(mapping[g]) not in uset:
                return ValidationReport(False, f"{name}({g}) = {mapping[g]} is not a unit", (g,))
    r = {g: str(raw.range[g]) for g in elements}
    s = {g: str(raw.source[g]) for g in elements}
    for u in units:
        if r[u] != u or s[u] != u:
            return ValidationReport(False, f"unit {u} has range/source different from itself", (u,))

    comp: dict[tuple[str, str], str] = {}
    for triple in raw.compose:
        if len(triple) != 3:
            return ValidationReport(False, f"compose entry {triple} is not a triple", tuple(triple))
        g, h, gh = (str(t) for t in triple)
        for t in (g, h, gh):
            if t not in eset:
                return ValidationReport(False, f"compose mentions unknown element {t}", (g, h, gh))
        if s[g] != r[h]:
            return ValidationReport(False, f"compose defined off the fiber condition at ({g}, {h})",
                                    (g, h))
        if (g, h) in comp and comp[(g, h)] != gh:
            return ValidationReport(False, f"compose({g}, {h}) defined twice", (g, h))
        comp[(g, h)] = gh
    by_range: dict[str, list[str]] = {}
    for h in elements:
        by_range.setdefault(r[h], []).append(h)
    for g in elements:
        for h in by_range.get(s[g], []):
            if (g, h) not in comp:
                return ValidationReport(False, f"compose({g}, {h}) missing although s({g}) = r({h})",
                                        (g, h))
    for (g, h), gh in comp.items():
        if r[gh] != r[g] or s[gh] != s[h]:
            return ValidationReport(False, f"compose({g}, {h}) = {gh} has wrong range/source",
                                    (g, h, gh))
    for g in elements:
        if comp[(g, s[g])] != g or comp[(r[g], g)] != g:
            return ValidationReport(False, f"unit law violated at {g}", (g,))
    for g in elements:
        if g in uset:
            continue
        if not any(comp[(g, h)] == r[g] and comp[(h, g)] == s[g] for h in by_range[s[g]]
                   if s[h] == r[g]):
            return ValidationReport(False, f"inverse law violated at {g}", (g,))
    for (g, h), gh in comp.items():
        for k in by_range.get(s[h], []):
            if comp[(gh, k)] != comp[(g, comp[(h, k)])]:
                return ValidationReport(False, f"associativity fails at ({g}, {h}, {k})", (g, h, k))
    return ValidationReport(True, f"ok: {len(elements)} elements, {len(units)} units")


class FiniteGroupoid:
    """A finite groupoid with the discrete topology.

    Elements are string ids kept in lexicographic order; internally everything is
    indexed by position in ``elements``. ``comp[i, j]`` is the index of the product
    ``elements[i] * elements[j]`` or -1 when ``s(i) != r(j)``.
    """

    def __init__(self, elements, units, r, s, comp, inv, name: str = ""):
        self.elements = tuple(elements)
        self.index = {e: i for i, e in enumerate(self.elements)}
        self.unit_idx = tuple(sorted(units, key=lambda i: self.elements[i]))
        self.r = np.asarray(r, dtype=np.int64)
        self.s = np.asarray(s, dtype=np.int64)
        self.comp = np.asarray(comp, dtype=np.int64)
        self.inv = np.asarray(inv, dtype=np.int64)
        self.name = name
        self.grading: Grading | None = None

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_raw(cls, raw: RawGroupoid) -> "FiniteGroupoid":
        validate_groupoid(raw).raise_if_failed()
        elements = sorted(str(e) for e in raw.elements)
        index = {e: i for i, e in enumerate(elements)}
        n = len(elements)
        comp = np.full((n, n), -1, dtype=np.int64)
        for g, h, gh in raw.compose:
            comp[index[str(g)], index[str(h)]] = index[str(gh)]
        r = [index[str(raw.range[e])] for e in elements]
        s = [index[str(raw.source[e])] for e in elements]
        inv = _inverses(comp, r, s)
        return cls(elements, [index[str(u)] for u in raw.units], r, s, comp, inv, raw.name)

    @classmethod
    def from_operations(cls, elements, units, range_of, source_of, mul,
                        name: str = "") -> "FiniteGroupoid":
        """Build from callables on ids and validate the result.

        ``mul(g, h)`` is only called for composable pairs.
        """
        elements = [str(e) for e in elements]
        units = [str(u) for u in units]
        raw = RawGroupoid(
            elements=elements, units=units,
            range={g: str(range_of(g)) for g in elements},
            source={g: str(source_of(g)) for g in elements},
            compose=[], name=name)
        by_range: dict[str, list[str]] = {}
        for h in elements:
            by_range.setdefault(raw.range[h], []).append(h)
        for g in elements:
            for h in by_range.get(raw.source[g], []):
                raw.compose.append([g, h, str(mul(g, h))])
        return cls.from_raw(raw)

    def to_raw(self) -> RawGroupoid:
        e = self.elements
        triples = [[e[i], e[j], e[k]] for i, j in zip(*np.nonzero(self.comp >= 0))
                   for k in [self.comp[i, j]]]
        raw = RawGroupoid(list(e), [e[u] for u in self.unit_idx],
                          {e[i]: e[self.r[i]] for i in range(len(e))},
                          {e[i]: e[self.s[i]] for i in range(len(e))}, triples, name=self.name)
        if self.grading is not None:
            raw.grading = self.grading.to_json()
        return raw

    def with_grading(self, grading: "Grading") -> "FiniteGroupoid":
        grading.validate(self)
        self.grading = grading
        return self

    # -- basic API ------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"FiniteGroupoid({self.name or '?'}, {len(self)} elements, {len(self.units)} units)"

    @property
    def units(self) -> tuple[str, ...]:
        return tuple(self.elements[i] for i in self.unit_idx)

    @cached_property
    def unit_set(self) -> frozenset[int]:
        return frozenset(self.unit_idx)

    def idx(self, g: str) -> int:
        try:
            return self.index[g]
        except KeyError:
            raise GroupoidError(f"unknown element {g}", (g,)) from None

    def unit_index(self, x: str) -> int:
        i = self.idx(x)
        if i not in self.unit_set:
            raise GroupoidError(f"{x} is not a unit", (x,))
        return i

    def range_of(self, g: str) -> str:
        return self.elements[self.r[self.idx(g)]]

    def source_of(self, g: str) -> str:
        return self.elements[self.s[self.idx(g)]]

    def inverse(self, g: str) -> str:
        return self.elements[self.inv[self.idx(g)]]

    def compose(self, g: str, h: str) -> str | None:
        k = self.comp[self.idx(g), self.idx(h)]
        return None if k < 0 else self.elements[k]

    # -- fibers (index arrays, sorted by id) ----------------------------------

    def source_fiber(self, x: int) -> np.ndarray:
        """Indices of G_x = s^{-1}(x)."""
        return self._source_fibers[x]

    def range_fiber(self, x: int) -> np.ndarray:
        return self._range_fibers[x]

    def isotropy(self, x: int) -> np.ndarray:
        """Indices of the isotropy group at unit index ``x``."""
        return self._isotropy[x]

    def arrows(self, y: int, x: int) -> np.ndarray:
        """Indices of G^y_x (range y, source x)."""
        fib = self._source_fibers[x]
        return fib[self.r[fib] == y]

    @cached_property
    def _source_fibers(self) -> dict[int, np.ndarray]:
        return {u: np.nonzero(self.s == u)[0] for u in self.unit_idx}

    @cached_property
    def _range_fibers(self) -> dict[int, np.ndarray]:
        return {u: np.nonzero(self.r == u)[0] for u in self.unit_idx}

    @cached_property
    def _isotropy(self) -> dict[int, np.ndarray]:
        return {u: np.nonzero((self.s == u) & (self.r == u))[0] for u in self.unit_idx}

    def is_bisection(self, idxs) -> bool:
        idxs = list(idxs)
        return len(set(self.r[idxs].tolist())) == len(idxs) and \
            len(set(self.s[idxs].tolist())) == len(idxs)

    def set_product(self, a, b) -> frozenset[int]:
        """Pairwise products AB of two index sets."""
        out = set()
        for i in a:
            row = self.comp[i]
            for j in b:
                k = row[j]
                if k >= 0:
                    out.add(int(k))
        return frozenset(out)


def _inverses(comp, r, s) -> np.ndarray:
    n = comp.shape[0]
    inv = np.empty(n, dtype=np.int64)
    for g in range(n):
        hits = [h for h in np.nonzero(comp[g] == r[g])[0] if comp[h, g] == s[g]]
        inv[g] = hits[0]
    return inv


class Grading:
    """A homomorphism from a groupoid to a group, stored as labels per element id.

    ``group`` is a :class:`FiniteGroup` or a :class:`~isonorm.groups.FreeGroup`;
    both expose ``mul``, ``inv`` and ``identity`` on labels.
    """

    def __init__(self, group, labels: dict):
        self.group = group
        self.labels = {str(k): v for k, v in labels.items()}

    def __call__(self, g: str):
        return self.labels[g]

    def validate(self, G: FiniteGroupoid) -> None:
        for g in G.elements:
            if g not in self.labels:
                raise GroupoidError(f"grading undefined at {g}", (g,))
            if self.labels[g] not in self.group:
                raise GroupoidError(f"grading label of {g} is not a group element", (g,))
        ident = self.group.identity
        for u in G.units:
            if self.labels[u] != ident:
                raise GroupoidError(f"grading of unit {u} is not the identity", (u,))
        e = G.elements
        for i, j in zip(*np.nonzero(G.comp >= 0)):
            k = G.comp[i, j]
            if self.labels[e[k]] != self.group.mul(self.labels[e[i]], self.labels[e[j]]):
                raise GroupoidError(f"grading is not multiplicative at ({e[i]}, {e[j]})",
                                    (e[i], e[j]))

    def injectivity_witness(self, G: FiniteGroupoid):
        """A pair of distinct isotropy elements with equal labels, or None."""
        for u in G.unit_idx:
            seen = {}
            for i in G.isotropy(u):
                lab = self.labels[G.elements[i]]
                if lab in seen:
                    return seen[lab], G.elements[i]
                seen[lab] = G.elements[i]
        return None

    def is_injective_on_isotropy(self, G: FiniteGroupoid) -> bool:
        return self.injectivity_witness(G) is None

    def to_json(self) -> dict:
        from .io import group_to_json
        return {"group": group_to_json(self.group), "label": dict(self.labels)}


# -- derived structure ---------------------------------------------------------

def isotropy_group(G: FiniteGroupoid, x: str) -> FiniteGroup:
    """The isotropy group at unit ``x`` as a standalone group on element ids."""
    u = G.unit_index(x)
    iso = G.isotropy(u)
    pos = {int(g): k for k, g in enumerate(iso)}
    table = np.array([[pos[int(G.comp[a, b])] for b in iso] for a in iso], dtype=np.int64)
    return FiniteGroup([G.elements[i] for i in iso], table, name=f"iso({x})", validate=False)


def orbits(G: FiniteGroupoid) -> list[list[str]]:
    """Partition of the units into orbits, each block sorted, blocks sorted."""
    parent = {u: u for u in G.unit_idx}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for g in range(len(G)):
        a, b = find(int(G.r[g])), find(int(G.s[g]))
        if a != b:
            parent[max(a, b)] = min(a, b)
    blocks: dict[int, list[str]] = {}
    for u in G.unit_idx:
        blocks.setdefault(find(u), []).append(G.elements[u])
    return sorted(sorted(b) for b in blocks.values())


def is_isomorphic(G: FiniteGroupoid, H: FiniteGroupoid, graded: bool = False) -> bool:
    """Backtracking isomorphism test, optionally preserving grading labels."""
    return find_isomorphism(G, H, graded) is not None


def find_isomorphism(G: FiniteGroupoid, H: FiniteGroupoid, graded: bool = False):
    if len(G) != len(H) or len(G.units) != len(H.units):
        return None
    if len(G) > MAX_ISO_ELEMENTS:
        raise GroupoidError(f"isomorphism check capped at {MAX_ISO_ELEMENTS} elements")
    if graded and (G.grading is None or H.grading is None):
        raise GroupoidError("graded isomorphism needs gradings on both groupoids")

    def signatures(K: FiniteGroupoid):
        n = len(K)
        iso_size = {u: len(K.isotropy(u)) for u in K.unit_idx}
        orbit_size = {}
        for block in orbits(K):
            for u in block:
                orbit_size[K.index[u]] = len(block)
        sig = []
        for g in range(n):
            order, k = 1, g
            if K.r[g] == K.s[g]:
                while k != K.s[g]:
                    k = K.comp[k, g]
                    order += 1
            else:
                order = 0
            lab = K.grading.labels[K.elements[g]] if graded else None
            sig.append((g in K.unit_set, order, iso_size[int(K.s[g])], iso_size[int(K.r[g])],
                        orbit_size[int(K.s[g])], len(K.arrows(int(K.r[g]), int(K.s[g]))),
                        K.r[g] == K.s[g], str(lab)))
        return sig

    sg, sh = signatures(G), signatures(H)
    if sorted(sg) != sorted(sh):
        return None
    candidates = {g: [h for h in range(len(H)) if sh[h] == sg[g]] for g in range(len(G))}
    # each unit is followed by the arrows between already placed units
    order: list[int] = []
    placed: set[int] = set()
    for block in orbits(G):
        for u in block:
            ui = G.index[u]
            placed.add(ui)
            order.append(ui)
            order.extend(g for g in range(len(G)) if g not in G.unit_set and g not in order
                         and int(G.r[g]) in placed and int(G.s[g]) in placed)
    phi: dict[int, int] = {}
    used: set[int] = set()

    def consistent(g, h) -> bool:
        if g in G.unit_set:
            return True
        if phi.get(int(G.r[g])) != H.r[h] or phi.get(int(G.s[g])) != H.s[h]:
            return False
        for a, b in list(phi.items()):
            ga, hb = G.comp[g, a], H.comp[h, b]
            if (ga >= 0) != (hb >= 0):
                return False
            if ga >= 0 and ga in phi and phi[ga] != hb:
                return False
            ag, bh = G.comp[a, g], H.comp[b, h]
            if (ag >= 0) != (bh >= 0):
                return False
            if ag >= 0 and ag in phi and phi[ag] != bh:
                return False
        return True

    def search(k: int) -> bool:
        if k == len(order):
            return True
        g = order[k]
        if g in phi:
            return search(k + 1)
        for h in candidates[g]:
            if h in used or not consistent(g, h):
                continue
            phi[g] = h
            used.add(h)
            if search(k + 1):
                return True
            del phi[g]
            used.discard(h)
        return False

    if not search(0):
        return None
    return {G.elements[g]: H.elements[h] for g, h in phi.items()}
