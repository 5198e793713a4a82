"""The convolution *-algebra C_c(G) of a finite groupoid."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GroupoidError, InputError
from .groupoid import FiniteGroupoid


class AlgebraElement:
    """Finitely supported complex function on a groupoid.

    Zero coefficients are dropped (exact comparison with 0.0); everything else
    is kept as given. Instances are treated as immutable.
    """

    __slots__ = ("G", "terms")

    def __init__(self, G: FiniteGroupoid, terms=None):
        self.G = G
        clean = {}
        for g, c in dict(terms or {}).items():
            G.idx(g)
            c = complex(c)
            if c != 0.0:
                clean[g] = clean.get(g, 0.0) + c
        self.terms = {g: c for g, c in sorted(clean.items()) if c != 0.0}

    # -- constructors ---------------------------------------------------------

    @classmethod
    def delta(cls, G, g, coeff=1.0) -> "AlgebraElement":
        return cls(G, {g: coeff})

    @classmethod
    def indicator(cls, G, ids) -> "AlgebraElement":
        return cls(G, {g: 1.0 for g in ids})

    @classmethod
    def from_vector(cls, G, vec) -> "AlgebraElement":
        return cls(G, {G.elements[i]: v for i, v in enumerate(vec) if v != 0})

    @classmethod
    def random(cls, G, rng, support=None, density: float = 1.0) -> "AlgebraElement":
        ids = list(G.elements if support is None else support)
        terms = {}
        for g in ids:
            if density >= 1.0 or rng.random() < density:
                terms[g] = complex(rng.standard_normal(), rng.standard_normal())
        return cls(G, terms)

    # -- basic API ------------------------------------------------------------

    def __call__(self, g: str) -> complex:
        return self.terms.get(g, 0.0)

    @property
    def support(self) -> list[str]:
        return list(self.terms)

    def to_vector(self) -> np.ndarray:
        v = np.zeros(len(self.G), dtype=np.complex128)
        for g, c in self.terms.items():
            v[self.G.index[g]] = c
        return v

    def _same_host(self, other: "AlgebraElement") -> None:
        if other.G is not self.G:
            raise InputError("algebra elements live on different groupoids")

    def __add__(self, other):
        self._same_host(other)
        t = dict(self.terms)
        for g, c in other.terms.items():
            t[g] = t.get(g, 0.0) + c
        return AlgebraElement(self.G, t)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __rmul__(self, scalar):
        return AlgebraElement(self.G, {g: scalar * c for g, c in self.terms.items()})

    def __neg__(self):
        return (-1.0) * self

    def __eq__(self, other):
        return isinstance(other, AlgebraElement) and other.G is self.G and other.terms == self.terms

    __hash__ = None

    def allclose(self, other, atol: float = 1e-12) -> bool:
        self._same_host(other)
        return bool(np.max(np.abs(self.to_vector() - other.to_vector()), initial=0.0) <= atol)

    def sup_norm(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def l1_norm(self) -> float:
        return float(sum(abs(c) for c in self.terms.values()))

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self) -> str:
        body = ", ".join(f"{g}: {c:.4g}" for g, c in self.terms.items())
        return f"AlgebraElement({{{body}}})"


def convolve(f1: AlgebraElement, f2: AlgebraElement) -> AlgebraElement:
    """(f1*f2)(g) = Σ_{h ∈ G^{r(g)}} f1(h) f2(h⁻¹g), summed over composable pairs."""
    f1._same_host(f2)
    G = f1.G
    out: dict[str, complex] = {}
    right = [(G.index[k], c) for k, c in f2.terms.items()]
    for h, a in f1.terms.items():
        row = G.comp[G.index[h]]
        for k, b in right:
            hk = row[k]
            if hk >= 0:
                key = G.elements[hk]
                out[key] = out.get(key, 0.0) + a * b
    return AlgebraElement(G, out)


def involution(f: AlgebraElement) -> AlgebraElement:
    G = f.G
    return AlgebraElement(G, {G.inverse(g): np.conj(c) for g, c in f.terms.items()})


def restrict_to_isotropy(f: AlgebraElement, x: str) -> AlgebraElement:
    """η_x(f): keep the coefficients on G^x_x (still viewed inside C_c(G))."""
    G = f.G
    u = G.unit_index(x)
    iso = {G.elements[i] for i in G.isotropy(u)}
    return AlgebraElement(G, {g: c for g, c in f.terms.items() if g in iso})


def supported_on_isotropy(f: AlgebraElement, x: str) -> bool:
    G = f.G
    u = G.unit_index(x)
    return all(G.r[G.index[g]] == u and G.s[G.index[g]] == u for g in f.terms)


def isotropy_vector(h: AlgebraElement, x: str) -> tuple[list[str], np.ndarray]:
    """Coefficients of an isotropy-supported element, on the sorted isotropy ids."""
    G = h.G
    if not supported_on_isotropy(h, x):
        raise GroupoidError(f"element is not supported on the isotropy group at {x}", (x,))
    ids = [G.elements[i] for i in G.isotropy(G.unit_index(x))]
    return ids, np.array([h(g) for g in ids], dtype=np.complex128)


@dataclass(frozen=True)
class DomainReport:
    applies: bool
    verified: bool
    witness: tuple = ()  # (side, f' description) of the first failure


def multiplicative_domain_check(f: AlgebraElement, x: str, n_random: int = 8,
                                seed: int = 0) -> DomainReport:
    """Is f in the multiplicative domain of η_x?

    ``applies`` is the finite reading of the sufficient condition: every support
    point with range or source x is isotropy at x. ``verified`` tests both module
    identities on every delta function and on a batch of random elements.
    """
    G = f.G
    u = G.unit_index(x)
    applies = True
    for g in f.terms:
        i = G.index[g]
        if (G.r[i] == u or G.s[i] == u) and not (G.r[i] == u and G.s[i] == u):
            applies = False
            break
    eta_f = restrict_to_isotropy(f, x)
    rng = np.random.default_rng(seed)
    probes = [(f"delta {g}", AlgebraElement.delta(G, g)) for g in G.elements]
    probes += [(f"random #{k}", AlgebraElement.random(G, rng)) for k in range(n_random)]
    for label, fp in probes:
        eta_p = restrict_to_isotropy(fp, x)
        if not restrict_to_isotropy(convolve(f, fp), x).allclose(convolve(eta_f, eta_p), 1e-10):
            return DomainReport(applies, False, ("f*f'", label))
        if not restrict_to_isotropy(convolve(fp, f), x).allclose(convolve(eta_p, eta_f), 1e-10):
            return DomainReport(applies, False, ("f'*f", label))
    return DomainReport(applies, True)


def bisection_decomposition(f: AlgebraElement, cover) -> list[AlgebraElement]:
    """Split f into pieces supported in the members of a bisection cover.

    Each support point goes to the first member containing it.
    """
    G = f.G
    cover = [list(b) for b in cover]
    for k, b in enumerate(cover):
        if not G.is_bisection([G.idx(g) for g in b]):
            raise GroupoidError(f"cover member {k} is not a bisection", tuple(b))
    pieces: list[dict] = [{} for _ in cover]
    for g, c in f.terms.items():
        k = next((k for k, b in enumerate(cover) if g in b), None)
        if k is None:
            raise GroupoidError(f"cover does not contain the support point {g}", (g,))
        pieces[k][g] = c
    if f.is_zero():
        return []
    return [AlgebraElement(G, p) for p in pieces]


def exact_sequence_check(G: FiniteGroupoid, x: str) -> dict:
    """Dimension count and homomorphism test for η_x at an invariant unit x."""
    u = G.unit_index(x)
    orbit_pts = {int(G.r[i]) for i in G.source_fiber(u)}
    if orbit_pts != {u}:
        raise GroupoidError(f"{x} is not an invariant unit", (x,))
    iso = [G.elements[i] for i in G.isotropy(u)]
    rest = [g for g in G.elements if g not in set(iso)]
    # η_x is multiplicative on deltas: the ideal part composes away from x
    hom = all(restrict_to_isotropy(convolve(AlgebraElement.delta(G, a), AlgebraElement.delta(G, b)), x)
              == convolve(restrict_to_isotropy(AlgebraElement.delta(G, a), x),
                          restrict_to_isotropy(AlgebraElement.delta(G, b), x))
              for a in G.elements for b in G.elements)
    surjective = all(restrict_to_isotropy(AlgebraElement.delta(G, g), x)
                     == AlgebraElement.delta(G, g) for g in iso)
    return {"dim": len(G), "kernel_dim": len(rest), "image_dim": len(iso),
            "dims_add_up": len(G) == len(rest) + len(iso), "homomorphism": hom,
            "surjective": surjective}
