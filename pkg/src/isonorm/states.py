"""States with the unit functions in their centralizer: assembly, extraction, checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import AlgebraElement, convolve
from .errors import StateError
from .groupoid import FiniteGroupoid, isotropy_group
from .groups import FreeGroup, free_reduce, invert_word
from .numerics import hermitian_spectrum, min_eigenvalue
from .representations import positive_type_gram

MASS_TOL = 1e-12
PSD_TOL = 1e-10


@dataclass
class StateData:
    """A probability vector ``mu`` on units and positive-type ``fields`` on isotropy groups.

    ``fields[x][g]`` is φ_x(u_g) for g in G^x_x; missing entries are 0 and a
    missing unit gets the δ_e-trace.
    """

    mu: dict
    fields: dict = field(default_factory=dict)

    def field_at(self, G: FiniteGroupoid, x: str) -> dict:
        f = self.fields.get(x)
        if f is None:
            return {x: 1.0}
        return {g: complex(v) for g, v in f.items()}

    def validate(self, G: FiniteGroupoid) -> None:
        for x, m in self.mu.items():
            G.unit_index(x)
            if m < 0:
                raise StateError(f"negative mass {m} at {x}")
        total = float(sum(self.mu.values()))
        if abs(total - 1.0) > MASS_TOL:
            raise StateError(f"masses sum to {total!r}, not 1")
        for x in self.fields:
            u = G.unit_index(x)
            iso = {G.elements[i] for i in G.isotropy(u)}
            extra = set(self.fields[x]) - iso
            if extra:
                raise StateError(f"field at {x} mentions non-isotropy element {sorted(extra)[0]}")
        for x in G.units:
            if self.mu.get(x, 0.0) <= 0:
                continue
            phi = self.field_at(G, x)
            if abs(phi.get(x, 0.0) - 1.0) > MASS_TOL:
                raise StateError(f"field at {x} does not take the value 1 at the identity")
            gram = positive_type_gram(isotropy_group(G, x), phi)
            if np.max(np.abs(gram - gram.conj().T), initial=0.0) > 1e-12:
                raise StateError(f"field at {x} is not Hermitian: φ(g⁻¹) ≠ conj φ(g)")
            lo = min_eigenvalue(gram)
            if lo < -PSD_TOL:
                raise StateError(f"field at {x} is not of positive type (min eigenvalue {lo:.3e})")


class StateFunctional:
    """A linear functional on C_c(G), stored by its values on delta functions."""

    def __init__(self, G: FiniteGroupoid, values: dict):
        self.G = G
        self.values = {g: complex(v) for g, v in values.items() if complex(v) != 0}
        for g in self.values:
            G.idx(g)

    def __call__(self, f: AlgebraElement) -> complex:
        return complex(sum(c * self.values.get(g, 0.0) for g, c in f.terms.items()))

    def positivity_gram(self) -> np.ndarray:
        """[φ(δ_g* * δ_h)] over all elements; φ(f* * f) is the quadratic form of it."""
        G = self.G
        n = len(G)
        M = np.zeros((n, n), dtype=np.complex128)
        for i in range(n):
            gi = G.inv[i]
            for j in range(n):
                k = G.comp[gi, j]
                if k >= 0:
                    M[i, j] = self.values.get(G.elements[k], 0.0)
        return M

    def min_positivity_eigenvalue(self) -> float:
        M = self.positivity_gram()
        if np.max(np.abs(M - M.conj().T), initial=0.0) > 1e-12:
            return float("-inf")
        return float(hermitian_spectrum(M).eigenvalues[0]) if len(M) else 0.0


def assemble_state(G: FiniteGroupoid, data: StateData, validate: bool = True) -> StateFunctional:
    """φ(f) = Σ_x μ(x) Σ_{g ∈ G^x_x} f(g) φ_x(u_g)."""
    if validate:
        data.validate(G)
    values = {}
    for x in G.units:
        m = float(data.mu.get(x, 0.0))
        if m == 0:
            continue
        for g, v in data.field_at(G, x).items():
            values[g] = values.get(g, 0.0) + m * v
    return StateFunctional(G, values)


def centralizer_check(phi: StateFunctional) -> tuple[float, tuple]:
    """max |φ(q*f) − φ(f*q)| over unit deltas q and delta functions f, with its witness."""
    G = phi.G
    worst, witness = 0.0, ()
    for u in G.units:
        q = AlgebraElement.delta(G, u)
        for g in G.elements:
            f = AlgebraElement.delta(G, g)
            d = abs(phi(convolve(q, f)) - phi(convolve(f, q)))
            if d > worst:
                worst, witness = d, (u, g)
    return worst, witness


def extract_pair(G: FiniteGroupoid, phi: StateFunctional, tol: float = 1e-12) -> StateData:
    """μ(x) = φ(1_x); φ_x(u_g) = φ(δ_g)/μ(x), or the δ_e-trace where μ(x) = 0."""
    viol, wit = centralizer_check(phi)
    if viol > tol:
        raise StateError(f"functional does not centralize the unit functions (violation "
                         f"{viol:.3e} at {wit})")
    mu, fields = {}, {}
    for x in G.units:
        m = phi(AlgebraElement.delta(G, x))
        if abs(m.imag) > tol or m.real < -tol:
            raise StateError(f"negative or complex extracted mass {m} at {x}")
        mu[x] = max(m.real, 0.0)
        u = G.unit_index(x)
        if mu[x] > 0:
            fields[x] = {G.elements[i]: phi.values.get(G.elements[i], 0.0) / mu[x]
                         for i in G.isotropy(u)}
        else:
            fields[x] = {x: 1.0}
    data = StateData(mu, fields)
    for x in G.units:
        if mu[x] > 0:
            gram = positive_type_gram(isotropy_group(G, x), data.field_at(G, x))
            if np.max(np.abs(gram - gram.conj().T), initial=0.0) > 1e-10 or \
                    min_eigenvalue(gram) < -PSD_TOL:
                raise StateError(f"extracted field at {x} is not of positive type")
    return data


def random_state_data(G: FiniteGroupoid, rng, full_support: bool = False) -> StateData:
    """Random masses and random positive-type fields (normalized Gram-sums of vectors)."""
    units = list(G.units)
    w = rng.random(len(units))
    if not full_support:
        w[rng.random(len(units)) < 0.3] = 0.0
        if w.sum() == 0:
            w[0] = 1.0
    w = w / w.sum()
    mu = dict(zip(units, w.tolist()))
    # fix the rounding so the masses sum to 1 as closely as floats allow
    fields = {}
    for x in units:
        grp = isotropy_group(G, x)
        # φ(g) = <π(g)ξ, ξ> for the regular rep and a random unit vector ξ
        xi = rng.standard_normal(grp.order) + 1j * rng.standard_normal(grp.order)
        xi /= np.linalg.norm(xi)
        phi = {}
        for g in grp.elements:
            row = grp.table[grp.index[g]]
            # (λ(g)ξ)[gh] = ξ[h]
            lam = np.zeros_like(xi)
            lam[row] = xi
            phi[g] = complex(np.vdot(xi, lam))
        phi[grp.identity] = 1.0
        fields[x] = phi
    return StateData(mu, fields)


# -- tower traces ----------------------------------------------------------------

@dataclass
class FactorizationVerdict:
    passed: bool
    condition: str
    message: str
    witness: tuple = ()
    label: str = "one-sided necessary-condition test"


def _trace_value(tau: dict, word: str):
    return tau.get(free_reduce(word))


def trace_gram_check(tau: dict) -> float:
    """Min eigenvalue of [τ(u⁻¹v)] over the largest shortlex-greedy word set with known entries."""
    words = sorted(tau, key=lambda w: (len(w), w))
    chosen: list[str] = []
    for w in words:
        if all(_trace_value(tau, invert_word(u) + w) is not None and
               _trace_value(tau, invert_word(w) + u) is not None for u in chosen + [w]):
            chosen.append(w)
    M = np.array([[_trace_value(tau, invert_word(u) + v) for v in chosen] for u in chosen],
                 dtype=np.complex128)
    if np.max(np.abs(M - M.conj().T), initial=0.0) > 1e-12:
        raise StateError("trace data is not Hermitian: τ(w⁻¹) ≠ conj τ(w)")
    return min_eigenvalue(M)


def reduced_factorization_check(tower, mu: dict, tau: dict, probes, e_values=None,
                                tol: float = 1e-9, jobs: int = 1) -> FactorizationVerdict:
    """Uniformity of μ on each level, and |τ(a)| ≤ e-estimate(a) on probes when μ(∞) > 0.

    ``mu`` maps "1", "2", ... to per-point mass lists (or a scalar level total)
    and "inf" to the mass at infinity. ``tau`` maps reduced words to values.
    """
    from .towers import TowerElement, e_norm_estimate

    tau = {free_reduce(str(w)): complex(v) for w, v in tau.items()}
    if abs(tau.get("", 0.0) - 1.0) > 1e-12:
        raise StateError("trace must take the value 1 at the identity")
    lo = trace_gram_check(tau)
    if lo < -PSD_TOL:
        raise StateError(f"trace data is not of positive type (min eigenvalue {lo:.3e})")
    total = 0.0
    per_level = {}
    for key, val in mu.items():
        if key == "inf":
            continue
        try:
            n = int(key)
        except ValueError:
            raise StateError(f"unknown mass key {key!r}") from None
        if not 1 <= n <= len(tower):
            raise StateError(f"mass given for level {n}, tower has {len(tower)} levels")
        cos = tower.levels[n - 1].cosets
        arr = np.full(cos, float(val) / cos) if np.isscalar(val) else np.asarray(val, dtype=float)
        if arr.shape != (cos,):
            raise StateError(f"level {n} needs {cos} masses, got {arr.shape[0]}")
        if (arr < 0).any():
            raise StateError(f"negative mass on level {n}")
        per_level[n] = arr
        total += float(arr.sum())
    m_inf = float(mu.get("inf", 0.0))
    if m_inf < 0:
        raise StateError("negative mass at infinity")
    total += m_inf
    if abs(total - 1.0) > MASS_TOL:
        raise StateError(f"masses sum to {total!r}, not 1")
    for n in sorted(per_level):
        arr = per_level[n]
        dev = np.abs(arr - arr.mean())
        if dev.max(initial=0.0) > MASS_TOL:
            k = int(np.argmax(dev))
            return FactorizationVerdict(False, "uniform level mass",
                                        f"mass on level {n} is not uniform", (n, k))
    if m_inf <= 0:
        return FactorizationVerdict(True, "", "μ(∞) = 0: the trace is irrelevant")
    for k, a in enumerate(probes):
        a = a if isinstance(a, TowerElement) else TowerElement(a)
        val = 0.0
        for w, c in a.terms:
            t = tau.get(w)
            if t is None:
                raise StateError(f"trace value missing for word {w or 'e'!r}")
            val += c * t
        est = e_values[k] if e_values is not None else e_norm_estimate(tower, a, jobs=jobs).estimate
        if abs(val) > est + tol:
            return FactorizationVerdict(False, "|τ(a)| ≤ ‖a‖_e",
                                        f"|τ(a)| = {abs(val):.9f} exceeds the e-estimate {est:.9f}",
                                        (k, repr(a)))
    return FactorizationVerdict(True, "", "all probes within the e-norm estimate")


def free_group_character_trace(group: FreeGroup, length: int, value=1.0) -> dict:
    """τ(w) = value^{|w|}-style test traces; value 1 gives the trivial character."""
    return {w: complex(value) ** len(w) for w in group.words_up_to(length)}


def regular_trace(group: FreeGroup, length: int) -> dict:
    """The canonical trace δ_e on words up to ``length``."""
    return {w: (1.0 if w == "" else 0.0) for w in group.words_up_to(length)}
