"""Explicit matrices: regular, quasi-regular and induced representations."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraElement, isotropy_vector, restrict_to_isotropy
from .errors import CheckFailure, GroupoidError, InputError, TowerError
from .groupoid import FiniteGroupoid, Grading, isotropy_group
from .groups import FiniteGroup, free_reduce
from .numerics import gram_factor, hermitian_spectrum, operator_norm, psd_check


@dataclass
class MatrixRep:
    basis: list
    matrix: np.ndarray
    provenance: str = ""

    def __post_init__(self):
        if self.matrix.shape != (len(self.basis), len(self.basis)):
            raise ValueError("matrix size does not match the basis")

    def norm(self, tol: float = 1e-11) -> float:
        return operator_norm(self.matrix, tol)


# -- regular representations ---------------------------------------------------

def regular_matrix(G: FiniteGroupoid, u: int, f: AlgebraElement) -> np.ndarray:
    """ρ_x(f) on ℓ²(G_x) for the unit index u; basis G_x in id order."""
    fib = G.source_fiber(u)
    pos = {int(g): k for k, g in enumerate(fib)}
    n = len(fib)
    M = np.zeros((n, n), dtype=np.complex128)
    terms = [(G.index[h], c) for h, c in f.terms.items()]
    for j, g in enumerate(fib):
        rg = G.r[g]
        for h, c in terms:
            if G.s[h] == rg:
                M[pos[int(G.comp[h, g])], j] += c
    return M


def regular_rep_at(G: FiniteGroupoid, x: str, f: AlgebraElement) -> MatrixRep:
    if f.G is not G:
        raise InputError("element lives on another groupoid")
    u = G.unit_index(x)
    return MatrixRep([G.elements[i] for i in G.source_fiber(u)], regular_matrix(G, u, f),
                     f"rho_{x}")


def reduced_norm_value(f: AlgebraElement, tol: float = 1e-11) -> tuple[float, str]:
    """max over units of ‖ρ_x(f)‖ and the first unit attaining it."""
    G = f.G
    best, where = -1.0, G.units[0] if G.units else ""
    for u in G.unit_idx:
        v = operator_norm(regular_matrix(G, u, f), tol) if f.terms else 0.0
        if v > best + 1e-14:
            best, where = v, G.elements[u]
    return max(best, 0.0), where


def group_regular_matrix(group: FiniteGroup, coeffs: dict) -> np.ndarray:
    """λ(a) on ℓ²(group), basis in element order; coeffs maps labels to scalars."""
    n = group.order
    M = np.zeros((n, n), dtype=np.complex128)
    for lab, c in coeffs.items():
        k = group.index[lab]
        # λ(k)δ_g = δ_{kg}
        M[group.table[k], np.arange(n)] += c
    return M


# -- Schreier data and quasi-regular representations ---------------------------

@dataclass
class SchreierLevel:
    """Generator images as permutations of ``cosets`` points: images[gen][c] = gen·c."""

    cosets: int
    images: dict
    inverse_images: dict = field(init=False)

    def __post_init__(self):
        self.images = {g: np.asarray(p, dtype=np.int64) for g, p in self.images.items()}
        self.inverse_images = {}
        for g, p in self.images.items():
            if p.shape != (self.cosets,) or sorted(p.tolist()) != list(range(self.cosets)):
                raise TowerError(f"image of {g} is not a permutation of {self.cosets} cosets")
            inv = np.empty_like(p)
            inv[p] = np.arange(self.cosets)
            self.inverse_images[g] = inv

    def letter(self, c: str) -> np.ndarray:
        table = self.inverse_images if c.isupper() else self.images
        p = table.get(c.lower())
        if p is None:
            raise TowerError(f"word uses unknown generator {c!r}")
        return p

    def word_permutation(self, word: str) -> np.ndarray:
        """p with p[c] = w·c; letters act right to left."""
        p = np.arange(self.cosets)
        for c in reversed(word):
            p = self.letter(c)[p]
        return p

    def is_transitive(self) -> bool:
        seen = np.zeros(self.cosets, dtype=bool)
        seen[0] = True
        frontier = np.array([0])
        perms = list(self.images.values()) + list(self.inverse_images.values())
        while len(frontier):
            nxt = np.unique(np.concatenate([p[frontier] for p in perms])) if perms else frontier[:0]
            nxt = nxt[~seen[nxt]]
            seen[nxt] = True
            frontier = nxt
        return bool(seen.all())


def quasi_regular_matrix(level: SchreierLevel, terms) -> np.ndarray:
    """Σ a(w) P_w with P_w δ_c = δ_{w·c}."""
    n = level.cosets
    M = np.zeros((n, n), dtype=np.complex128)
    cols = np.arange(n)
    for word, c in terms:
        p = level.word_permutation(word)
        np.add.at(M, (p, cols), c)
    return M


def quasi_regular_rep(level: SchreierLevel, terms) -> MatrixRep:
    return MatrixRep(list(range(level.cosets)), quasi_regular_matrix(level, terms), "quasi-regular")


def quasi_regular_operator(level: SchreierLevel, terms):
    """Matrix-free (matvec, rmatvec) pair for Σ a(w) P_w."""
    perms = [(level.word_permutation(w), complex(c)) for w, c in terms]
    invs = []
    for p, c in perms:
        q = np.empty_like(p)
        q[p] = np.arange(len(p))
        invs.append((q, np.conj(c)))

    def matvec(v):
        out = np.zeros_like(v)
        for p, c in perms:
            # (P_w v)[p[c]] = v[c]
            out[p] += c * v
        return out

    def rmatvec(v):
        out = np.zeros_like(v)
        for q, c in invs:
            out[q] += c * v
        return out

    return matvec, rmatvec


def levels_from_finite_group(group: FiniteGroup, subgroup) -> SchreierLevel:
    """Schreier data of the left action of ``group`` on the cosets of ``subgroup``."""
    sub = list(subgroup)
    owner, reps = {}, []
    for g in group.elements:
        if g in owner:
            continue
        for h in sub:
            owner[group.mul(g, h)] = len(reps)
        reps.append(g)
    images = {name: [owner[group.mul(lab, r)] for r in reps]
              for name, lab in group.generators.items()}
    return SchreierLevel(len(reps), images)


# -- representations of isotropy groups ----------------------------------------

class IsotropyRep:
    """A unitary representation of G^x_x, stored as one matrix per isotropy element."""

    def __init__(self, G: FiniteGroupoid, x: str, matrices: dict, name: str = ""):
        self.G, self.x, self.name = G, x, name
        self.group = isotropy_group(G, x)
        self.matrices = {k: np.asarray(v, dtype=np.complex128) for k, v in matrices.items()}
        self.dim = next(iter(self.matrices.values())).shape[0] if self.matrices else 0
        self.validate()

    def validate(self, tol: float = 1e-10) -> None:
        grp = self.group
        for g in grp.elements:
            m = self.matrices.get(g)
            if m is None or m.shape != (self.dim, self.dim):
                raise InputError(f"representation matrix missing or malformed at {g}")
            if np.max(np.abs(m.conj().T @ m - np.eye(self.dim))) > tol:
                raise InputError(f"representation matrix at {g} is not unitary")
        for a in grp.elements:
            for b in grp.elements:
                lhs = self.matrices[grp.mul(a, b)]
                if np.max(np.abs(lhs - self.matrices[a] @ self.matrices[b])) > tol:
                    raise InputError(f"not a homomorphism at ({a}, {b})")

    def __call__(self, g: str) -> np.ndarray:
        return self.matrices[g]

    @classmethod
    def regular(cls, G, x) -> "IsotropyRep":
        grp = isotropy_group(G, x)
        mats = {g: group_regular_matrix(grp, {g: 1.0}) for g in grp.elements}
        return cls(G, x, mats, "regular")

    @classmethod
    def trivial(cls, G, x) -> "IsotropyRep":
        grp = isotropy_group(G, x)
        return cls(G, x, {g: np.eye(1) for g in grp.elements}, "trivial")

    @classmethod
    def from_character(cls, G, x, chi: dict) -> "IsotropyRep":
        return cls(G, x, {g: np.array([[complex(v)]]) for g, v in chi.items()}, "character")

    @classmethod
    def from_generators(cls, G, x, gens: dict) -> "IsotropyRep":
        """Extend matrices given on generating isotropy elements multiplicatively."""
        grp = isotropy_group(G, x)
        dim = next(iter(gens.values())).shape[0]
        mats = {grp.identity: np.eye(dim, dtype=np.complex128)}
        frontier = [grp.identity]
        while frontier:
            nxt = []
            for a in frontier:
                for g, m in gens.items():
                    b = grp.mul(g, a)
                    if b not in mats:
                        mats[b] = np.asarray(m) @ mats[a]
                        nxt.append(b)
            frontier = nxt
        return cls(G, x, mats, "generated")

    @classmethod
    def random_unitary_character(cls, G, x, rng) -> "IsotropyRep":
        """A 1-dimensional rep when the isotropy is cyclic, else the regular rep."""
        grp = isotropy_group(G, x)
        n = grp.order
        for g in grp.elements:
            if grp.element_order(g) == n:
                k = int(rng.integers(n))
                chi, a = {}, grp.identity
                for j in range(n):
                    chi[a] = np.exp(2j * np.pi * k * j / n)
                    a = grp.mul(g, a)
                return cls.from_character(G, x, chi)
        return cls.regular(G, x)


def coset_representatives(G: FiniteGroupoid, x: str) -> list[int]:
    """Lexicographically least element of each G^y_x, ordered by id."""
    u = G.unit_index(x)
    reps = {}
    for g in G.source_fiber(u):  # already in id order
        reps.setdefault(int(G.r[g]), int(g))
    return sorted(reps.values(), key=lambda g: G.elements[g])


def induced_matrix(G: FiniteGroupoid, x: str, rho: IsotropyRep, f: AlgebraElement):
    """(Ind ρ)(f) on ℓ²(G_x) ⊗_{G^x_x} V with basis (coset representative c, i).

    Block (c', c) = Σ f(h) ρ(c'⁻¹ h c) over h with r(h) = r(c'), s(h) = r(c).
    """
    reps = coset_representatives(G, x)
    by_range = {int(G.r[c]): k for k, c in enumerate(reps)}
    d = rho.dim
    M = np.zeros((len(reps) * d, len(reps) * d), dtype=np.complex128)
    for h, coef in f.terms.items():
        hi = G.index[h]
        j = by_range.get(int(G.s[hi]))
        i = by_range.get(int(G.r[hi]))
        if i is None or j is None:
            continue
        c, cp = reps[j], reps[i]
        k = G.comp[G.inv[cp], G.comp[hi, c]]
        M[i * d:(i + 1) * d, j * d:(j + 1) * d] += coef * rho(G.elements[k])
    basis = [(G.elements[c], i) for c in reps for i in range(d)]
    return basis, M


def induce(G: FiniteGroupoid, x: str, rho: IsotropyRep, f: AlgebraElement) -> MatrixRep:
    basis, M = induced_matrix(G, x, rho, f)
    return MatrixRep(basis, M, f"Ind {rho.name}")


def coisometry(G: FiniteGroupoid, x: str, rho: IsotropyRep) -> np.ndarray:
    """v: induced space → V; v(δ_c ⊗ w) = ρ(c)w on the coset of x, zero elsewhere."""
    reps = coset_representatives(G, x)
    d = rho.dim
    v = np.zeros((d, len(reps) * d), dtype=np.complex128)
    k = next(k for k, c in enumerate(reps) if G.r[c] == G.unit_index(x))
    v[:, k * d:(k + 1) * d] = rho(G.elements[reps[k]])
    return v


def isotropy_image(rho: IsotropyRep, f: AlgebraElement) -> np.ndarray:
    """ρ(η_x(f)) = Σ_{g ∈ G^x_x} f(g) ρ(g)."""
    h = restrict_to_isotropy(f, rho.x)
    M = np.zeros((rho.dim, rho.dim), dtype=np.complex128)
    for g, c in h.terms.items():
        M += c * rho(g)
    return M


def compression_identity_check(G, x, rho: IsotropyRep, f: AlgebraElement) -> float:
    _, ind = induced_matrix(G, x, rho, f)
    v = coisometry(G, x, rho)
    lhs = v @ ind @ v.conj().T
    rhs = isotropy_image(rho, f)
    return float(np.max(np.abs(lhs - rhs), initial=0.0))


def hermitian_square_spectrum(M, tol: float = 1e-11) -> np.ndarray:
    return hermitian_spectrum(M.conj().T @ M, tol).eigenvalues


def induced_regular_spectra(G, x, f: AlgebraElement, tol: float = 1e-11):
    """Sorted spectra of |Ind λ(f)|² and |ρ_x(f)|² (unitary invariants of each)."""
    _, ind = induced_matrix(G, x, IsotropyRep.regular(G, x), f)
    rho_x = regular_matrix(G, G.unit_index(x), f)
    out = []
    for M in (ind, rho_x):
        if hermitian_defect_ok(M):
            out.append(hermitian_spectrum(M, tol).eigenvalues)
        else:
            out.append(hermitian_square_spectrum(M, tol))
    return out[0], out[1]


def hermitian_defect_ok(M) -> bool:
    return M.size == 0 or float(np.max(np.abs(M - M.conj().T))) <= 1e-12


# -- GNS ----------------------------------------------------------------------

def positive_type_gram(group: FiniteGroup, phi: dict) -> np.ndarray:
    """[φ(g⁻¹h)] over group elements in order."""
    els = group.elements
    return np.array([[complex(phi.get(group.mul(group.inv(g), h), 0.0)) for h in els]
                     for g in els], dtype=np.complex128)


class GNSRep:
    """GNS representation of a positive-type function on a finite group."""

    def __init__(self, group: FiniteGroup, phi: dict, cutoff: float = 1e-10):
        self.group = group
        M = positive_type_gram(group, phi)
        if np.max(np.abs(M - M.conj().T), initial=0.0) > 1e-12 or not psd_check(M, 1e-10):
            raise InputError("function is not of positive type")
        B = gram_factor(M, cutoff)  # columns ξ_g
        self.B = B
        self.dim = B.shape[0]
        pinv = np.linalg.pinv(B) if self.dim else B.conj().T
        n = group.order
        self.matrices = {}
        for k in group.elements:
            perm = np.zeros((n, n))
            ki = group.index[k]
            perm[group.table[ki], np.arange(n)] = 1.0
            self.matrices[k] = B @ perm @ pinv
        self.cyclic_vector = B[:, group.index[group.identity]]


def gns_cyclicity_check(G: FiniteGroupoid, x: str, phi: dict) -> tuple[bool, int, int]:
    """Is v*ξ_φ cyclic for Ind π_φ? Returns (cyclic, rank, dimension)."""
    grp = isotropy_group(G, x)
    gns = GNSRep(grp, phi)
    if gns.dim == 0:
        raise InputError("positive-type function vanishes identically")
    rho = IsotropyRep(G, x, gns.matrices, "gns")
    v = coisometry(G, x, rho)
    start = v.conj().T @ gns.cyclic_vector
    vecs = [induced_matrix(G, x, rho, AlgebraElement.delta(G, g))[1] @ start for g in G.elements]
    V = np.array(vecs).T
    dim = V.shape[0]
    s = np.sqrt(np.clip(hermitian_spectrum(V @ V.conj().T).eigenvalues, 0, None))
    rank = int(np.sum(s > 1e-8 * max(1.0, s.max(initial=0.0))))
    return rank == dim, rank, dim


# -- coaction -----------------------------------------------------------------

def coaction_isometry_check(G: FiniteGroupoid, f: AlgebraElement, grading: Grading | None = None,
                            tol: float = 1e-11) -> tuple[float, float]:
    """(‖f‖_r, ‖δ(f)‖_r) with δ(f) = Σ f(g) δ_{(g, Φ(g))} on G × Γ."""
    from .constructions import group_as_groupoid, product_groupoid

    grading = grading or G.grading
    if grading is None:
        raise GroupoidError("the coaction needs a grading")
    if not isinstance(grading.group, FiniteGroup):
        raise InputError("the coaction check needs a finite grading group")
    P = product_groupoid(G, group_as_groupoid(grading.group))
    df = AlgebraElement(P, {f"({g},{grading(g)})": c for g, c in f.terms.items()})
    return reduced_norm_value(f, tol)[0], reduced_norm_value(df, tol)[0]


# -- graded blocks ------------------------------------------------------------

@dataclass
class BlockDecomposition:
    y: str
    classes: list  # lists of ids in G_y
    injective: list  # per class
    block_defect: float  # max |ρ_y(f)| entry across classes
    witness: tuple = ()


def sim_classes(G: FiniteGroupoid, family: dict, y: int) -> list[list[int]]:
    """Classes of ∼_x on G_y: g ∼ h iff h ∈ U_{g1}···U_{gn} g."""
    fib = [int(g) for g in G.source_fiber(y)]
    parent = {g: g for g in fib}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    members = sorted({int(G.index[u]) for U in family.values() for u in U})
    for g in fib:
        for u in members:
            ug = G.comp[u, g]
            if ug >= 0:
                a, b = find(g), find(int(ug))
                if a != b:
                    parent[max(a, b)] = min(a, b)
    out: dict[int, list[int]] = {}
    for g in fib:
        out.setdefault(find(g), []).append(g)
    return sorted(out.values())


def graded_block_decomposition(G: FiniteGroupoid, grading: Grading, family: dict, y: str,
                               f: AlgebraElement | None = None) -> BlockDecomposition:
    """Partition G_y into ∼_x classes, test Φ on each class and the block form of ρ_y(f).

    ``family`` maps isotropy ids to bisections (lists of ids). Every member of a
    U-set moves a class into itself, so the classes are the connected
    components of the single-step relation.
    """
    yu = G.unit_index(y)
    classes = sim_classes(G, family, yu)
    injective, witness = [], ()
    for cls in classes:
        labels = {}
        ok = True
        for g in cls:
            lab = grading(G.elements[g])
            if lab in labels:
                ok = False
                witness = witness or (G.elements[labels[lab]], G.elements[g])
            labels[lab] = g
        injective.append(ok)
    if f is None:
        f = AlgebraElement.indicator(G, {u for U in family.values() for u in U})
    M = regular_matrix(G, yu, f)
    fib = [int(g) for g in G.source_fiber(yu)]
    pos = {g: k for k, g in enumerate(fib)}
    label = np.empty(len(fib), dtype=np.int64)
    for k, cls in enumerate(classes):
        for g in cls:
            label[pos[g]] = k
    off = label[:, None] != label[None, :]
    defect = float(np.max(np.abs(M[off]), initial=0.0))
    return BlockDecomposition(y, [[G.elements[g] for g in c] for c in classes], injective, defect,
                              witness)


def isotropy_regular_norm(h: AlgebraElement, x: str, tol: float = 1e-11) -> float:
    """‖λ_{G^x_x}(h)‖ computed on the isotropy group alone."""
    ids, vec = isotropy_vector(h, x)
    grp = isotropy_group(h.G, x)
    return operator_norm(group_regular_matrix(grp, dict(zip(ids, vec))), tol)


def reduce_word_terms(terms) -> list[tuple[str, complex]]:
    """Merge terms after free reduction, dropping exact zeros."""
    acc: dict[str, complex] = {}
    for w, c in terms:
        w = free_reduce(w)
        acc[w] = acc.get(w, 0.0) + complex(c)
    return [(w, c) for w, c in sorted(acc.items(), key=lambda t: (len(t[0]), t[0])) if c != 0]


def require(cond: bool, prop: str, message: str, witness=()) -> None:
    if not cond:
        raise CheckFailure(prop, message, witness)
