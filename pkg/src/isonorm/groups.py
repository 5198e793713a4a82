"""Group models: finite multiplication tables, free groups, integer 2x2 matrices.

Words over generators are plain strings. A lowercase letter is a generator,
the matching uppercase letter is its inverse, and ``""`` is the identity.
"""

from __future__ import annotations

import itertools
from collections import deque

import numpy as np

from .errors import GroupError


def invert_word(word: str) -> str:
    return word[::-1].swapcase()


def free_reduce(word: str) -> str:
    out: list[str] = []
    for letter in word:
        if out and out[-1] == letter.swapcase():
            out.pop()
        else:
            out.append(letter)
    return "".join(out)


def word_letters(generators) -> list[str]:
    """Generators followed by their inverses: ``['a', 'b', 'A', 'B']``."""
    gens = list(generators)
    return gens + [g.upper() for g in gens]


def _check_generator_names(names) -> None:
    for name in names:
        if len(name) != 1 or not name.islower():
            raise GroupError(f"generator names must be single lowercase letters, got {name!r}")


class FiniteGroup:
    """Finite group stored as a multiplication table over string labels.

    ``table[i, j]`` is the index of ``elements[i] * elements[j]``.
    """

    def __init__(self, elements, table, name: str = "", generators: dict | None = None,
                 validate: bool = True):
        self.elements = tuple(str(e) for e in elements)
        self.table = np.asarray(table, dtype=np.int64)
        self.name = name
        self.index = {e: i for i, e in enumerate(self.elements)}
        if len(self.index) != len(self.elements):
            raise GroupError("group element labels are not unique")
        n = len(self.elements)
        if self.table.shape != (n, n):
            raise GroupError(f"table shape {self.table.shape} does not match {n} elements")
        if validate:
            self._validate()
        self._identity = self._find_identity()
        self._inverse = np.empty(n, dtype=np.int64)
        for i in range(n):
            hits = np.nonzero(self.table[i] == self._identity)[0]
            if len(hits) != 1:
                raise GroupError(f"element {self.elements[i]} has no unique inverse")
            self._inverse[i] = hits[0]
        # generator name -> element label, used when words are evaluated
        self.generators = dict(generators or {})
        for name_, label in self.generators.items():
            if label not in self.index:
                raise GroupError(f"generator {name_} maps to unknown element {label}")

    def _validate(self) -> None:
        n = len(self.elements)
        t = self.table
        if n == 0:
            raise GroupError("a group needs at least one element")
        if t.min() < 0 or t.max() >= n:
            raise GroupError("multiplication table is not closed")
        # (ab)c == a(bc) for all triples
        lhs = t[t, :]  # lhs[a, b, c] = (ab)c
        rhs = t[:, t]  # rhs[a, b, c] = a(bc)
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            a, b, c = bad[0]
            raise GroupError("associativity fails at "
                             f"({self.elements[a]}, {self.elements[b]}, {self.elements[c]})")
        for row in t:
            if len(np.unique(row)) != n:
                raise GroupError("multiplication table rows are not permutations")

    def _find_identity(self) -> int:
        n = len(self.elements)
        ar = np.arange(n)
        for i in range(n):
            if np.array_equal(self.table[i], ar) and np.array_equal(self.table[:, i], ar):
                return i
        raise GroupError("no identity element")

    # -- element API (labels) -------------------------------------------------

    @property
    def identity(self) -> str:
        return self.elements[self._identity]

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, label) -> bool:
        return label in self.index

    def mul(self, a: str, b: str) -> str:
        return self.elements[self.table[self.index[a], self.index[b]]]

    def inv(self, a: str) -> str:
        return self.elements[self._inverse[self.index[a]]]

    def evaluate(self, word: str) -> str:
        g = self.identity
        for letter in word:
            label = self.generators.get(letter.lower())
            if label is None:
                raise GroupError(f"unknown generator {letter!r}")
            if letter.isupper():
                label = self.inv(label)
            g = self.mul(g, label)
        return g

    def element_order(self, a: str) -> int:
        k, g = 1, a
        while g != self.identity:
            g = self.mul(g, a)
            k += 1
        return k

    def subgroup(self, generators) -> list[str]:
        """Labels of the subgroup generated by ``generators`` (sorted by index)."""
        seen = {self._identity}
        frontier = [self._identity]
        gens = [self.index[g] for g in generators]
        while frontier:
            nxt = []
            for i in frontier:
                for g in gens:
                    j = int(self.table[i, g])
                    if j not in seen:
                        seen.add(j)
                        nxt.append(j)
            frontier = nxt
        return [self.elements[i] for i in sorted(seen)]

    def relabel(self, mapping: dict) -> "FiniteGroup":
        return FiniteGroup([mapping[e] for e in self.elements], self.table, self.name,
                           {k: mapping[v] for k, v in self.generators.items()}, validate=False)

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name or '?'}, order={self.order})"

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_function(cls, elements, mul, name: str = "", generators=None) -> "FiniteGroup":
        elements = list(elements)
        index = {e: i for i, e in enumerate(elements)}
        n = len(elements)
        table = np.empty((n, n), dtype=np.int64)
        for i, a in enumerate(elements):
            for j, b in enumerate(elements):
                c = mul(a, b)
                if c not in index:
                    raise GroupError(f"product {a}*{b} = {c} leaves the element set")
                table[i, j] = index[c]
        return cls([str(e) for e in elements], table, name, generators)

    @classmethod
    def from_permutations(cls, generators: dict, name: str = "") -> "FiniteGroup":
        """Closure of permutation generators; labels are shortest words."""
        _check_generator_names(generators)
        perms = {k: tuple(int(i) for i in v) for k, v in generators.items()}
        degrees = {len(p) for p in perms.values()}
        if len(degrees) > 1:
            raise GroupError("generator permutations have different degrees")
        degree = degrees.pop() if degrees else 0
        for k, p in perms.items():
            if sorted(p) != list(range(degree)):
                raise GroupError(f"generator {k} is not a permutation")
        ident = tuple(range(degree))
        words = {ident: ""}
        order = [ident]
        queue = deque([ident])
        letters = sorted(perms)
        while queue:
            p = queue.popleft()
            for k in letters:
                q = tuple(perms[k][i] for i in p)  # apply p then generator
                if q not in words:
                    words[q] = k + words[p]
                    order.append(q)
                    queue.append(q)
        labels = [words[p] or "e" for p in order]
        index = {p: i for i, p in enumerate(order)}
        n = len(order)
        table = np.empty((n, n), dtype=np.int64)
        for i, a in enumerate(order):
            for j, b in enumerate(order):
                # (a*b)(pt) = a(b(pt))
                table[i, j] = index[tuple(a[b[t]] for t in range(degree))]
        group = cls(labels, table, name, {k: labels[index[perms[k]]] for k in letters},
                    validate=False)
        group.permutations = {labels[i]: p for i, p in enumerate(order)}
        return group


def cyclic_group(n: int) -> FiniteGroup:
    return FiniteGroup.from_function(range(n), lambda a, b: (a + b) % n, name=f"Z{n}",
                                     generators={"a": "1"} if n > 1 else None)


def dihedral_group(n: int) -> FiniteGroup:
    rot = [(i + 1) % n for i in range(n)]
    ref = [(-i) % n for i in range(n)]
    return FiniteGroup.from_permutations({"r": rot, "s": ref}, name=f"D{n}")


def symmetric_group(n: int) -> FiniteGroup:
    if n == 1:
        return FiniteGroup(["e"], [[0]], name="S1")
    gens = {"a": [1, 0] + list(range(2, n))}
    if n > 2:
        gens["b"] = list(range(1, n)) + [0]
    return FiniteGroup.from_permutations(gens, name=f"S{n}")


def direct_product(g: FiniteGroup, h: FiniteGroup) -> FiniteGroup:
    pairs = list(itertools.product(g.elements, h.elements))
    labels = [f"({a},{b})" for a, b in pairs]
    table = np.empty((len(pairs), len(pairs)), dtype=np.int64)
    index = {p: i for i, p in enumerate(pairs)}
    for i, (a1, b1) in enumerate(pairs):
        for j, (a2, b2) in enumerate(pairs):
            table[i, j] = index[(g.mul(a1, a2), h.mul(b1, b2))]
    return FiniteGroup(labels, table, name=f"{g.name}x{h.name}", validate=False)


class FreeGroup:
    """Free group on single-letter generators; elements are reduced words."""

    def __init__(self, generators):
        self.generator_names = tuple(generators)
        _check_generator_names(self.generator_names)
        self.letters = word_letters(self.generator_names)
        self.name = f"F{len(self.generator_names)}"

    identity = ""

    def __contains__(self, word) -> bool:
        return isinstance(word, str) and all(c in self.letters for c in word) \
            and free_reduce(word) == word

    def mul(self, a: str, b: str) -> str:
        return free_reduce(a + b)

    def inv(self, a: str) -> str:
        return invert_word(a)

    def evaluate(self, word: str) -> str:
        for c in word:
            if c not in self.letters:
                raise GroupError(f"unknown generator {c!r}")
        return free_reduce(word)

    def words_up_to(self, length: int) -> list[str]:
        """All reduced words of length <= ``length`` in shortlex order."""
        out = [""]
        layer = [""]
        for _ in range(length):
            nxt = []
            for w in layer:
                for c in self.letters:
                    if not w or w[-1] != c.swapcase():
                        nxt.append(w + c)
            out.extend(nxt)
            layer = nxt
        return out

    def __repr__(self) -> str:
        return f"FreeGroup({''.join(self.generator_names)})"


class MatrixGroup:
    """Subgroup of SL(2, Z) given by integer generator matrices (exact arithmetic)."""

    def __init__(self, generators: dict):
        _check_generator_names(generators)
        self.gens = {}
        for k, m in generators.items():
            a, b, c, d = (int(v) for v in np.asarray(m).reshape(4))
            if a * d - b * c != 1:
                raise GroupError(f"generator {k} does not have determinant 1")
            self.gens[k] = (a, b, c, d)
        self.generator_names = tuple(sorted(self.gens))
        self.letters = word_letters(self.generator_names)
        self.name = "SL2(Z)"

    identity = (1, 0, 0, 1)

    @staticmethod
    def mul(x, y):
        a, b, c, d = x
        e, f, g, h = y
        return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)

    @staticmethod
    def inv(x):
        a, b, c, d = x
        return (d, -b, -c, a)

    def evaluate(self, word: str):
        m = self.identity
        for letter in word:
            g = self.gens.get(letter.lower())
            if g is None:
                raise GroupError(f"unknown generator {letter!r}")
            m = self.mul(m, self.inv(g) if letter.isupper() else g)
        return m

    def __repr__(self) -> str:
        return f"MatrixGroup({', '.join(self.generator_names)})"


def standard_sl2_generators() -> dict:
    return {"s": [[0, -1], [1, 0]], "t": [[1, 1], [0, 1]]}


def sanov_generators() -> dict:
    """Two matrices generating a free subgroup of SL(2, Z) of rank 2."""
    return {"a": [[1, 2], [0, 1]], "b": [[1, 0], [2, 1]]}
