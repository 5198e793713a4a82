"""Reduced and exotic norms on finite groupoids, and norm certificates."""

from __future__ import annotations

from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .algebra import (AlgebraElement, convolve, involution, restrict_to_isotropy,
                      supported_on_isotropy)
from .constructions import meets_every_orbit, reduce_to_units
from .errors import CheckFailure, GroupoidError, InputError
from .groupoid import FiniteGroupoid, Grading, orbits
from .numerics import operator_norm
from .representations import (graded_block_decomposition, isotropy_regular_norm,
                              regular_matrix, sim_classes)

DEFAULT_TOL = 1e-10


@dataclass
class NormReport:
    value: float
    method: str
    witness: tuple = ()
    tol: float = DEFAULT_TOL
    details: dict = field(default_factory=dict)


def _unit_norms(f: AlgebraElement, jobs: int = 1) -> list[float]:
    G = f.G

    def one(u):
        return operator_norm(regular_matrix(G, u, f)) if f.terms else 0.0

    if jobs > 1 and len(G.unit_idx) > 1:
        with ThreadPoolExecutor(jobs) as pool:
            return list(pool.map(one, G.unit_idx))
    return [one(u) for u in G.unit_idx]


def reduced_norm(f: AlgebraElement, tol: float = DEFAULT_TOL, jobs: int = 1) -> NormReport:
    """‖f‖_r = max over units x of ‖ρ_x(f)‖; the first maximizing unit is the witness."""
    G = f.G
    vals = _unit_norms(f, jobs)
    k = int(np.argmax(vals)) if vals else 0
    value = float(vals[k]) if vals else 0.0
    sup = f.sup_norm()
    if value < sup - tol:
        raise CheckFailure("sup-norm bound", f"‖f‖_r = {value} < ‖f‖_∞ = {sup}",
                           (G.units[k],))
    return NormReport(value, "max_x ‖ρ_x(f)‖", (G.units[k],), tol,
                      {"per_unit": dict(zip(G.units, map(float, vals)))})


def exotic_norm_finite(G: FiniteGroupoid, x: str, h: AlgebraElement,
                       tol: float = DEFAULT_TOL, jobs: int = 1) -> NormReport:
    """‖h‖_e for h on G^x_x, as the reduced norm of h inside C_c(G).

    Cross-checked against ‖λ_{G^x_x}(h)‖: every nonempty block G^x_y of ρ_y(h)
    is a single coset of the isotropy group.
    """
    if h.G is not G:
        raise InputError("element lives on another groupoid")
    if not supported_on_isotropy(h, x):
        raise GroupoidError(f"element is not supported on the isotropy group at {x}", (x,))
    red = reduced_norm(h, tol, jobs)
    iso = isotropy_regular_norm(h, x)
    if abs(red.value - iso) > tol:
        raise CheckFailure("exotic = isotropy regular norm",
                           f"{red.value!r} vs {iso!r}", (x, red.witness[0]))
    l1 = h.l1_norm()
    if red.value > l1 + tol:
        raise CheckFailure("‖h‖_e ≤ ‖h‖_1", f"{red.value} > {l1}", (x,))
    return NormReport(red.value, "reduced norm of h in C_c(G)", red.witness, tol,
                      {"isotropy_norm": iso, "l1": l1})


@dataclass
class ProbeReport:
    e_norm: float
    min_extension_norm: float
    zero_extension_norm: float
    samples: int


def extension_infimum_probe(G: FiniteGroupoid, x: str, h: AlgebraElement, n_samples: int = 200,
                            seed: int = 0, support=None, scale: float = 1.0,
                            tol: float = DEFAULT_TOL) -> ProbeReport:
    """Sample extensions f = h + p with p off G^x_x and compare ‖f‖_r to ‖h‖_e."""
    e = exotic_norm_finite(G, x, h, tol).value
    iso = {G.elements[i] for i in G.isotropy(G.unit_index(x))}
    off = [g for g in (support if support is not None else G.elements) if g not in iso]
    rng = np.random.default_rng(seed)
    zero = reduced_norm(h, tol).value
    best = zero
    for _ in range(n_samples):
        if not off or scale == 0:
            p = AlgebraElement(G)
        else:
            p = scale * AlgebraElement.random(G, rng, off, density=0.5)
        f = h + p
        assert restrict_to_isotropy(f, x) == h
        best = min(best, reduced_norm(f, tol).value)
    if best < e - tol:
        raise CheckFailure("infimum formula", f"extension of norm {best} below ‖h‖_e = {e}", (x,))
    if abs(zero - e) > tol:
        raise CheckFailure("zero extension attains the infimum", f"{zero} vs {e}", (x,))
    return ProbeReport(e, best, zero, n_samples)


# -- graded certificate --------------------------------------------------------

@dataclass
class Certificate:
    passed: bool
    hypothesis: str  # "" when all hypotheses hold
    message: str
    witness: tuple = ()
    f: AlgebraElement | None = None
    f_norm: float = float("nan")
    h_reduced: float = float("nan")
    h_exotic: float = float("nan")
    neighbourhood: tuple = ()
    classes: dict = field(default_factory=dict)
    max_factorization_error: float = 0.0


def _normalize_family(G: FiniteGroupoid, family: dict, x: str) -> dict[str, frozenset[int]]:
    iso = [G.elements[i] for i in G.isotropy(G.unit_index(x))]
    out = {}
    for g in iso:
        if g not in family:
            raise GroupoidError(f"no bisection supplied for isotropy element {g}", (g,))
        out[g] = frozenset(G.idx(str(u)) for u in family[g])
    extra = set(family) - set(iso)
    if extra:
        raise GroupoidError(f"bisection supplied for non-isotropy element {sorted(extra)[0]}",
                            (sorted(extra)[0],))
    return out


def check_hypotheses(G: FiniteGroupoid, grading: Grading, family: dict, x: str,
                     max_states: int = 200_000):
    """Return (hypothesis, message, witness) for the first failure, or None."""
    U = _normalize_family(G, family, x)
    for g, S in U.items():
        if not G.is_bisection(sorted(S)):
            return "(1)", f"U_{g} is not a bisection", (g,)
        if G.idx(g) not in S:
            return "(1)", f"{g} is not in U_{g}", (g,)
        for u in sorted(S):
            if grading(G.elements[u]) != grading(g):
                return "(1)", f"Φ is not constant on U_{g}: {G.elements[u]}", (g, G.elements[u])
    units = frozenset(G.unit_idx)
    if U[x] != units:
        return "(2)", f"U_{x} is not the unit space", (x,)
    for g, S in U.items():
        ginv = G.inverse(g)
        if U[ginv] != frozenset(int(G.inv[u]) for u in S):
            return "(2)", f"U_{ginv} differs from U_{g}⁻¹", (g, ginv)
    # (3): walk all words, tracking (product in G^x_x, product set)
    iso_ids = sorted(U)
    xi = G.idx(x)
    start = (xi, units)
    parent = {start: None}
    queue = deque([start])
    while queue:
        state = queue.popleft()
        k, B = state
        if k == xi and not B <= units:
            word, s = [], state
            while parent[s] is not None:
                s, letter = parent[s]
                word.append(letter)
            return "(3)", "a product of U-sets over a relation leaves the unit space", \
                tuple(reversed(word))
        for g in iso_ids:
            gi = G.idx(g)
            nxt = (int(G.comp[k, gi]), G.set_product(B, U[g]))
            if nxt not in parent:
                if len(parent) >= max_states:
                    raise InputError("hypothesis (3) search exceeded its state cap")
                parent[nxt] = (state, g)
                queue.append(nxt)
    return None


def tmred_certificate(G: FiniteGroupoid, family: dict, x: str, h: AlgebraElement,
                      grading: Grading | None = None, neighbourhood=None,
                      tol: float = 1e-12) -> Certificate:
    """Check the bisection hypotheses and verify the block factorization of the extension.

    ``neighbourhood`` is the set V of units on which q = 1 (default {x}); it must
    contain x and lie inside r(U_g) for every g in the support of h. The string
    ``"max"`` picks the largest such V.
    """
    grading = grading or G.grading
    if grading is None:
        raise GroupoidError("the certificate needs a grading")
    if not supported_on_isotropy(h, x):
        raise GroupoidError(f"element is not supported on the isotropy group at {x}", (x,))
    pair = grading.injectivity_witness(G)
    xu = G.unit_index(x)
    iso_ids = {G.elements[i] for i in G.isotropy(xu)}
    if pair is not None and pair[0] in iso_ids:
        return Certificate(False, "injectivity", "Φ is not injective on the isotropy group", pair)
    bad = check_hypotheses(G, grading, family, x)
    if bad is not None:
        return Certificate(False, *bad)
    U = _normalize_family(G, family, x)

    supp = list(h.terms)
    common = set(G.unit_idx)
    for g in supp:
        common &= {int(G.r[u]) for u in U[g]}
    if neighbourhood is None:
        V = {xu}
    elif neighbourhood == "max":
        V = common
    else:
        V = {G.unit_index(str(v)) for v in neighbourhood}
    if xu not in V or not V <= common:
        raise InputError("neighbourhood must contain x and lie in r(U_g) for g in supp h")

    # f = Σ_i h(g_i) 1_{W_i},  W_i = r⁻¹(V) ∩ U_{g_i}
    terms = {}
    for g in supp:
        for u in U[g]:
            if int(G.r[u]) in V:
                terms[G.elements[u]] = h(g)
    f = AlgebraElement(G, terms)
    if restrict_to_isotropy(f, x) != h:
        return Certificate(False, "extension", "η_x(f) differs from h", (x,))

    # h̃ on Γ through Φ
    h_tilde = {grading(g): c for g, c in h.terms.items()}
    grp = grading.group
    worst, classes = 0.0, {}
    for y in G.unit_idx:
        dec = graded_block_decomposition(G, grading, {g: [G.elements[u] for u in S]
                                                       for g, S in U.items()},
                                         G.elements[y], f)
        if not all(dec.injective):
            return Certificate(False, "class injectivity",
                               f"Φ is not injective on a ∼_x class in G_{G.elements[y]}",
                               dec.witness)
        if dec.block_defect > tol:
            return Certificate(False, "block invariance",
                               f"ρ_{G.elements[y]}(f) mixes ∼_x classes", (G.elements[y],))
        classes[G.elements[y]] = dec.classes
        M = regular_matrix(G, y, f)
        fib = [int(g) for g in G.source_fiber(y)]
        pos = {g: k for k, g in enumerate(fib)}
        for cls in dec.classes:
            for gid in cls:
                g = G.index[gid]
                qg = 1.0 if int(G.r[g]) in V else 0.0
                pg = grading(gid)
                for kid in cls:
                    k = G.index[kid]
                    rhs = qg * h_tilde.get(grp.mul(pg, grp.inv(grading(kid))), 0.0)
                    err = abs(M[pos[g], pos[k]] - rhs)
                    if err > worst:
                        worst = err
                    if err > tol:
                        return Certificate(False, "factorization",
                                           f"entry ({gid}, {kid}) of ρ_{G.elements[y]}(f) "
                                           "does not factor through λ_Γ(h̃)", (gid, kid),
                                           max_factorization_error=worst)
    f_norm = reduced_norm(f).value
    h_red = isotropy_regular_norm(h, x)
    h_ex = exotic_norm_finite(G, x, h).value
    if f_norm > h_red + 1e-10:
        return Certificate(False, "conclusion", f"‖f‖_r = {f_norm} exceeds ‖h‖_r = {h_red}",
                           (x,), f, f_norm, h_red, h_ex)
    if abs(h_ex - h_red) > 1e-10:
        return Certificate(False, "conclusion", f"‖h‖_e = {h_ex} differs from ‖h‖_r = {h_red}",
                           (x,), f, f_norm, h_red, h_ex)
    return Certificate(True, "", "hypotheses (1)-(3) hold; ‖h‖_e = ‖h‖_r", (), f, f_norm,
                       h_red, h_ex, tuple(sorted(G.elements[v] for v in V)), classes, worst)


# -- orbit transport and Morita restriction ------------------------------------

@dataclass
class TransportReport:
    element: AlgebraElement
    e_before: float
    e_after: float
    r_before: float
    r_after: float


def orbit_transport(G: FiniteGroupoid, x: str, y: str, g: str, h: AlgebraElement,
                    tol: float = DEFAULT_TOL) -> TransportReport:
    """Move h from G^x_x to G^y_y along g ∈ G^y_x: h'(k) = h(g⁻¹kg)."""
    gi = G.idx(g)
    if G.elements[G.s[gi]] != x or G.elements[G.r[gi]] != y:
        raise GroupoidError(f"{g} is not an arrow from {x} to {y}", (g, x, y))
    ginv = G.inverse(g)
    terms = {G.compose(G.compose(g, k), ginv): c for k, c in h.terms.items()}
    h2 = AlgebraElement(G, terms)
    e1, e2 = exotic_norm_finite(G, x, h, tol).value, exotic_norm_finite(G, y, h2, tol).value
    r1, r2 = isotropy_regular_norm(h, x), isotropy_regular_norm(h2, y)
    if abs(e1 - e2) > tol or abs(r1 - r2) > tol:
        raise CheckFailure("orbit invariance", f"norms moved: e {e1} -> {e2}, r {r1} -> {r2}",
                           (x, y, g))
    return TransportReport(h2, e1, e2, r1, r2)


@dataclass
class MoritaReport:
    units: tuple
    checked: int
    max_deviation: float


def morita_restriction_check(T: FiniteGroupoid, which, n_batch: int = 20, seed: int = 0,
                             tol: float = DEFAULT_TOL) -> MoritaReport:
    """‖f‖_r in T against ‖f‖_r in the reduction T|_U, for f supported on T|_U."""
    which = sorted({str(u) for u in which})
    for u in which:
        T.unit_index(u)
    if not meets_every_orbit(T, which):
        raise GroupoidError("the unit subset misses an orbit", tuple(which))
    rest = [u for u in T.units if u not in set(which)]
    if rest and not meets_every_orbit(T, rest):
        miss = next(b for b in orbits(T) if not set(b) & set(rest))
        raise GroupoidError("the complementary unit subset misses an orbit", tuple(miss))
    R = reduce_to_units(T, which)
    rng = np.random.default_rng(seed)
    batch = [{g: 1.0} for g in R.elements]
    for _ in range(n_batch):
        batch.append({g: complex(rng.standard_normal(), rng.standard_normal())
                      for g in R.elements if rng.random() < 0.6})
    worst = 0.0
    for terms in batch:
        a = reduced_norm(AlgebraElement(T, terms), tol).value
        b = reduced_norm(AlgebraElement(R, terms), tol).value
        worst = max(worst, abs(a - b))
        if abs(a - b) > tol:
            raise CheckFailure("restriction isometry", f"{a} in T vs {b} in the reduction",
                               tuple(sorted(terms)))
    return MoritaReport(tuple(which), len(batch), worst)


def cstar_identity_defect(f: AlgebraElement) -> float:
    a = reduced_norm(convolve(involution(f), f)).value
    b = reduced_norm(f).value
    return abs(a - b * b)


__all__ = ["NormReport", "reduced_norm", "exotic_norm_finite", "extension_infimum_probe",
           "Certificate", "tmred_certificate", "check_hypotheses", "orbit_transport",
           "morita_restriction_check", "sim_classes", "cstar_identity_defect"]
