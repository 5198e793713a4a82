"""Quotient towers of finitely generated groups and their quasi-regular norms."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .constructions import GroupAction, disjoint_union, transformation_groupoid
from .errors import CheckFailure, TowerError
from .groupoid import FiniteGroupoid
from .groups import (FiniteGroup, FreeGroup, MatrixGroup, free_reduce, invert_word,
                     sanov_generators, standard_sl2_generators, word_letters)
from .numerics import (DENSE_LIMIT, SEED, hermitian_spectrum, operator_norm, power_norm,
                       scatter_apply)
from .representations import (SchreierLevel, group_regular_matrix, quasi_regular_matrix,
                              quasi_regular_operator)

MONOTONE_TOL = 1e-9
BALL_CAP = 20_000_000
# random restarts on large balls only cross-check the deterministic start
RESTART_ITER = 300


class TowerElement:
    """Element of the group algebra: a list of (word, coefficient), freely reduced."""

    def __init__(self, terms):
        acc: dict[str, complex] = {}
        for w, c in terms:
            w = free_reduce(str(w))
            acc[w] = acc.get(w, 0.0) + complex(c)
        self.terms = [(w, c) for w, c in sorted(acc.items(), key=lambda t: (len(t[0]), t[0]))
                      if c != 0]

    @classmethod
    def generator_sum(cls, generators) -> "TowerElement":
        return cls([(c, 1.0) for c in word_letters(generators)])

    @classmethod
    def delta_e(cls) -> "TowerElement":
        return cls([("", 1.0)])

    @property
    def coefficient_sum(self) -> complex:
        return sum((c for _, c in self.terms), 0.0)

    @property
    def max_length(self) -> int:
        return max((len(w) for w, _ in self.terms), default=0)

    def is_self_adjoint(self, tol: float = 1e-12) -> bool:
        d = dict(self.terms)
        return all(abs(d.get(invert_word(w), 0.0) - np.conj(c)) <= tol for w, c in self.terms)

    def letters(self) -> set[str]:
        return {c.lower() for w, _ in self.terms for c in w}

    def __repr__(self) -> str:
        return "TowerElement(" + " + ".join(f"{c:.3g}*[{w or 'e'}]" for w, c in self.terms) + ")"


def _generator_names(group) -> tuple[str, ...]:
    if isinstance(group, FiniteGroup):
        return tuple(sorted(group.generators))
    return tuple(group.generator_names)


def _identity_words(group, max_length: int):
    """Reduced words of length <= max_length that evaluate to the identity."""
    if isinstance(group, FreeGroup):
        return []
    names = _generator_names(group)
    letters = word_letters(names)
    if isinstance(group, FiniteGroup):
        gen = {c: group.generators[c.lower()] if c.islower() else group.inv(group.generators[c.lower()])
               for c in letters}
    else:
        gen = {c: group.gens[c.lower()] if c.islower() else group.inv(group.gens[c.lower()])
               for c in letters}
    ident = group.identity
    out = []
    stack = [("", ident)]
    while stack:
        w, m = stack.pop()
        if w and m == ident:
            out.append(w)
        if len(w) == max_length:
            continue
        for c in letters:
            if w and w[-1] == c.swapcase():
                continue
            stack.append((w + c, group.mul(m, gen[c])))
    return sorted(out, key=lambda w: (len(w), w))


@dataclass
class QuotientTower:
    group: object  # FiniteGroup, FreeGroup or MatrixGroup
    levels: list
    relation_length: int = 8
    projections: list = field(init=False)

    def __post_init__(self):
        names = set(_generator_names(self.group))
        if not names:
            raise TowerError("group model has no generators")
        prev = 0
        for n, lev in enumerate(self.levels, 1):
            if set(lev.images) != names:
                raise TowerError(f"level {n} gives images for {sorted(lev.images)}, "
                                 f"expected {sorted(names)}")
            if not lev.is_transitive():
                raise TowerError(f"level {n} is not transitive")
            if lev.cosets < prev:
                raise TowerError(f"level {n} has fewer cosets than level {n - 1}")
            prev = lev.cosets
        for w in _identity_words(self.group, self.relation_length):
            for n, lev in enumerate(self.levels, 1):
                if not np.array_equal(lev.word_permutation(w), np.arange(lev.cosets)):
                    raise TowerError(f"level {n} violates the relation {w} = e")
        self.projections = [None] + [_projection(self.levels[k], self.levels[k - 1])
                                     for k in range(1, len(self.levels))]

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def nested(self) -> bool:
        return all(p is not None for p in self.projections[1:])

    def check_element(self, a: TowerElement) -> None:
        unknown = a.letters() - set(_generator_names(self.group))
        if unknown:
            raise TowerError(f"word uses unknown generator {sorted(unknown)[0]!r}")


def _projection(fine: SchreierLevel, coarse: SchreierLevel):
    """Equivariant map fine → coarse with 0 ↦ 0, or None if there is none."""
    pi = np.full(fine.cosets, -1, dtype=np.int64)
    pi[0] = 0
    frontier = [0]
    letters = [c for g in fine.images for c in (g, g.upper())]
    while frontier:
        nxt = []
        for c in frontier:
            for ell in letters:
                d = int(fine.letter(ell)[c])
                e = int(coarse.letter(ell)[pi[c]])
                if pi[d] < 0:
                    pi[d] = e
                    nxt.append(d)
                elif pi[d] != e:
                    return None
        frontier = nxt
    return pi


# -- level constructors ----------------------------------------------------------

def cyclic_level(n: int, name: str = "a") -> SchreierLevel:
    return SchreierLevel(n, {name: [(c + 1) % n for c in range(n)]})


def congruence_level(matrices: dict, modulus: int) -> SchreierLevel:
    """Left multiplication on the image of ⟨matrices⟩ in SL(2, Z/modulus)."""
    gens = {k: tuple(int(v) % modulus for v in np.asarray(m).reshape(4)) for k, m in matrices.items()}

    def mul(x, y):
        a, b, c, d = x
        e, f, g, h = y
        return ((a * e + b * g) % modulus, (a * f + b * h) % modulus,
                (c * e + d * g) % modulus, (c * f + d * h) % modulus)

    ident = (1 % modulus, 0, 0, 1 % modulus)
    index = {ident: 0}
    order = [ident]
    k = 0
    while k < len(order):
        x = order[k]
        for m in gens.values():
            y = mul(m, x)
            if y not in index:
                index[y] = len(order)
                order.append(y)
        k += 1
    images = {name: [index[mul(m, x)] for x in order] for name, m in gens.items()}
    return SchreierLevel(len(order), images)


def z_tower(depth: int = 8) -> QuotientTower:
    return QuotientTower(FreeGroup("a"), [cyclic_level(2 ** n) for n in range(1, depth + 1)])


def f2_tower(exponents=(2, 3, 4)) -> QuotientTower:
    """F₂ through the Sanov embedding, reduced mod 2^n."""
    mats = sanov_generators()
    return QuotientTower(FreeGroup("ab"), [congruence_level(mats, 2 ** n) for n in exponents])


def sl2_tower(exponents=(1, 2, 3, 4)) -> QuotientTower:
    mats = standard_sl2_generators()
    return QuotientTower(MatrixGroup(mats), [congruence_level(mats, 2 ** n) for n in exponents])


# -- norm sequences -------------------------------------------------------------

@dataclass
class SequenceResult:
    values: list
    dims: list
    methods: list
    nondecreasing: bool
    worst_drop: float


def _dense_norm(M):
    """Norm of M and a unit vector attaining it (dense Jacobi)."""
    if np.max(np.abs(M - M.conj().T), initial=0.0) <= 1e-12:
        res = hermitian_spectrum(M, vectors=True)
        k = 0 if abs(res.eigenvalues[0]) > abs(res.eigenvalues[-1]) else len(res.eigenvalues) - 1
        return abs(float(res.eigenvalues[k])), res.vectors[:, k]
    res = hermitian_spectrum(M.conj().T @ M, vectors=True)
    return float(np.sqrt(max(res.eigenvalues[-1], 0.0))), res.vectors[:, -1]


def _power_level(level: SchreierLevel, a: TowerElement, start, seed: int):
    mv, rmv = quasi_regular_operator(level, a.terms)
    self_adj = a.is_self_adjoint()
    starts = [start] if start is not None else []
    res = power_norm(mv, level.cosets, rmatvec=None if self_adj else rmv, seed=seed,
                     starts=starts)
    v = res.vector
    return res.value, v


def quasi_norm_sequence(tower: QuotientTower, a: TowerElement, N: int | None = None,
                        jobs: int = 1, seed: int = SEED, dense_limit: int = DENSE_LIMIT,
                        check: bool = True) -> SequenceResult:
    """‖λ_n(a)‖ for n = 1..N; dense Jacobi up to ``dense_limit``, power iteration above.

    A power-iteration level also tries the pull-back of the previous level's top
    vector as a starting vector when the tower is nested.
    """
    tower.check_element(a)
    N = len(tower) if N is None else N
    if N > len(tower) or N < 0:
        raise TowerError(f"asked for {N} levels, tower has {len(tower)}")
    levels = tower.levels[:N]
    dense = [lev.cosets <= dense_limit for lev in levels]
    need_vec = [k + 1 < N and not dense[k + 1] for k in range(N)]

    def dense_job(k):
        M = quasi_regular_matrix(levels[k], a.terms)
        if need_vec[k]:
            return _dense_norm(M)
        return operator_norm(M), None

    out: list = [None] * N
    idx = [k for k in range(N) if dense[k]]
    if jobs > 1 and len(idx) > 1:
        with ThreadPoolExecutor(jobs) as pool:
            for k, r in zip(idx, pool.map(dense_job, idx)):
                out[k] = r
    else:
        for k in idx:
            out[k] = dense_job(k)
    for k in range(N):
        if dense[k]:
            continue
        start = None
        proj = tower.projections[k]
        if k > 0 and proj is not None and out[k - 1][1] is not None:
            start = out[k - 1][1][proj]
        out[k] = _power_level(levels[k], a, start, seed)
    values = [float(v) for v, _ in out]
    drops = [values[k - 1] - values[k] for k in range(1, N)]
    worst = max(drops, default=0.0)
    ok = worst <= MONOTONE_TOL
    res = SequenceResult(values, [lev.cosets for lev in levels],
                         ["jacobi" if d else "power" for d in dense], ok, worst)
    if check and not ok:
        k = next(k for k in range(1, N) if values[k - 1] - values[k] > MONOTONE_TOL)
        raise CheckFailure("nondecreasing quasi-regular norms",
                           f"‖λ_{k + 1}(a)‖ = {values[k]!r} < ‖λ_{k}(a)‖ = {values[k - 1]!r}",
                           (k, k + 1))
    return res


@dataclass
class ENormEstimate:
    estimate: float
    converged: bool
    values: list
    label: str = "certified lower bound; convergence heuristic"


def e_norm_estimate(tower: QuotientTower, a: TowerElement, N: int | None = None,
                    stall_tol: float = 1e-9, jobs: int = 1, seed: int = SEED) -> ENormEstimate:
    seq = quasi_norm_sequence(tower, a, N, jobs=jobs, seed=seed)
    vals = seq.values
    if not vals:
        raise TowerError("no levels to estimate from")
    conv = len(vals) >= 2 and abs(vals[-1] - vals[-2]) <= stall_tol
    return ENormEstimate(vals[-1], conv, vals)


# -- reduced-norm bounds ----------------------------------------------------------

class FreeBall:
    """Ball of a free group's Cayley tree, with left multiplication by letters.

    Nodes are integers; node 0 is the identity. ``first[v]`` is the first letter
    of the word (as an index into ``letters``), ``suffix[v]`` the word with that
    letter removed and ``child[v, l]`` the node of letter l times the word.
    """

    def __init__(self, generators, radius: int, cap: int = BALL_CAP):
        self.letters = word_letters(generators)
        k = len(self.letters)
        self.inv_letter = np.array([self.letters.index(c.swapcase()) for c in self.letters])
        total = 1 + sum(k * (k - 1) ** (j - 1) for j in range(1, radius + 1))
        if total > cap:
            raise TowerError(f"ball of radius {radius} has {total} nodes, above the cap {cap}")
        self.radius = radius
        self.size = total
        self.first = np.full(total, -1, dtype=np.int64)
        self.suffix = np.full(total, -1, dtype=np.int64)
        self.length = np.zeros(total, dtype=np.int64)
        self.child = np.full((total, k), -1, dtype=np.int64)
        layer = np.array([0])
        nxt_id = 1
        for j in range(1, radius + 1):
            new = []
            for l in range(k):
                ok = layer if j == 1 else layer[self.first[layer] != self.inv_letter[l]]
                ids = np.arange(nxt_id, nxt_id + len(ok))
                nxt_id += len(ok)
                self.child[ok, l] = ids
                self.first[ids] = l
                self.suffix[ids] = ok
                self.length[ids] = j
                new.append(ids)
            layer = np.concatenate(new)

    def left_multiply(self, letter: str, nodes: np.ndarray) -> np.ndarray:
        """Node of letter·g for each g (-1 if outside the ball or if g is -1)."""
        l = self.letters.index(letter)
        out = np.full(len(nodes), -1, dtype=np.int64)
        ok = nodes >= 0
        nd = nodes[ok]
        cancel = self.first[nd] == self.inv_letter[l]
        res = np.where(cancel, self.suffix[nd], self.child[nd, l])
        out[ok] = res
        return out

    def word_map(self, word: str, nodes: np.ndarray) -> np.ndarray:
        out = nodes
        for c in reversed(word):
            out = self.left_multiply(c, out)
        return out


def _ball_operator(a: TowerElement, targets):
    """Matrix-free compression: targets[i] maps ball nodes for term i (-1 = dropped)."""
    src, dst, coef = [], [], []
    for t, (_, c) in zip(targets, a.terms):
        ok = np.nonzero(t >= 0)[0]
        src.append(ok)
        dst.append(t[ok])
        coef.append(np.full(len(ok), c, dtype=np.complex128))
    src, dst, coef = (np.concatenate(x) for x in (src, dst, coef))

    def matvec(v):
        return scatter_apply(src, dst, coef, v, False)

    def rmatvec(w):
        return scatter_apply(src, dst, coef, w, True)

    return matvec, rmatvec


def reduced_norm_lower_bound(group, a: TowerElement, radius: int, seed: int = SEED,
                             cap: int = BALL_CAP) -> float:
    """Norm of the compression of λ(a) to the word-length ball of the given radius.

    The compression of an operator has smaller norm, and power iteration only
    under-estimates, so the value is a lower bound for ‖a‖_r.
    """
    if not a.terms:
        return 0.0
    if isinstance(group, FreeGroup):
        L = max(a.max_length, 1)
        ball = FreeBall(group.generator_names, radius + L - 1, cap)
        inside = np.nonzero(ball.length <= radius)[0]
        pos = np.full(ball.size, -1, dtype=np.int64)
        pos[inside] = np.arange(len(inside))
        targets = []
        for w, _ in a.terms:
            t = ball.word_map(w, inside)
            t = np.where(t >= 0, pos[np.maximum(t, 0)], -1)
            targets.append(t)
        n = len(inside)
    else:
        elements, index = _generic_ball(group, radius, cap)
        n = len(elements)
        targets = []
        for w, _ in a.terms:
            g = group.evaluate(w)
            targets.append(np.array([index.get(_key(group.mul(g, x)), -1) for x in elements],
                                    dtype=np.int64))
    mv, rmv = _ball_operator(a, targets)
    starts = [np.ones(n, dtype=np.complex128)]
    res = power_norm(mv, n, rmatvec=None if a.is_self_adjoint() else rmv, seed=seed,
                     starts=starts, restart_iter=RESTART_ITER)
    return res.value


def _key(x):
    return x


def _generic_ball(group, radius: int, cap: int):
    letters = word_letters(_generator_names(group))
    gens = [group.evaluate(c) for c in letters]
    ident = group.identity
    elements = [ident]
    index = {ident: 0}
    layer = [ident]
    for _ in range(radius):
        nxt = []
        for x in layer:
            for g in gens:
                y = group.mul(g, x)
                if y not in index:
                    index[y] = len(elements)
                    elements.append(y)
                    nxt.append(y)
                    if len(elements) > cap:
                        raise TowerError(f"ball exceeds the cap of {cap} elements")
        layer = nxt
    return elements, index


def _common_prefix(a: str, b: str) -> int:
    k = 0
    for x, y in zip(a, b):
        if x != y:
            break
        k += 1
    return k


def schur_row_sup(a: TowerElement, generators, r: float) -> float:
    """sup_g Σ_w |a(w)| r^{|w⁻¹g| - |g|} over reduced g (weights r^{|g|})."""
    L = a.max_length
    words = FreeGroup(generators).words_up_to(L)
    best = 0.0
    absd = [(w, abs(c)) for w, c in a.terms]
    for g in words:
        s = 0.0
        for w, c in absd:
            s += c * r ** (len(w) - 2 * _common_prefix(w, g))
        best = max(best, s)
    return best


def schur_upper_bound(group, a: TowerElement, grid=None) -> tuple[float, float]:
    """Weighted Schur bound for ‖a‖_r on a free group; returns (bound, minimizing r)."""
    if not isinstance(group, FreeGroup):
        raise TowerError("the Schur bound needs a free group backend")
    if not a.is_self_adjoint():
        raise TowerError("the Schur bound needs a self-adjoint element")
    if not a.terms:
        return 0.0, 1.0
    gens = group.generator_names
    grid = list(grid) if grid is not None else [0.01 * k for k in range(1, 101)]
    vals = [schur_row_sup(a, gens, r) for r in grid]
    k = int(np.argmin(vals))
    step = grid[1] - grid[0] if len(grid) > 1 else 0.01
    lo, hi = max(grid[k] - step, 1e-6), min(grid[k] + step, 1.0)
    fine = np.linspace(lo, hi, 201)
    fvals = [schur_row_sup(a, gens, float(r)) for r in fine]
    j = int(np.argmin(fvals))
    if fvals[j] < vals[k]:
        return float(fvals[j]), float(fine[j])
    return float(vals[k]), float(grid[k])


@dataclass
class Verdict:
    e_lower: float
    r_upper: float | None
    r_lower: float
    exotic: bool | None
    converged: bool
    values: list
    note: str = ""


def exoticness_verdict(tower: QuotientTower, a: TowerElement, N: int | None = None,
                       R: int = 12, jobs: int = 1, seed: int = SEED) -> Verdict:
    est = e_norm_estimate(tower, a, N, jobs=jobs, seed=seed)
    r_lower = reduced_norm_lower_bound(tower.group, a, R, seed=seed)
    if isinstance(tower.group, FreeGroup):
        r_upper, _ = schur_upper_bound(tower.group, a)
        note = "Schur bound"
    elif isinstance(tower.group, FiniteGroup):
        coeffs = {}
        for w, c in a.terms:
            g = tower.group.evaluate(w)
            coeffs[g] = coeffs.get(g, 0.0) + c
        r_upper = operator_norm(group_regular_matrix(tower.group, coeffs))
        note = "exact regular norm of the finite group"
    else:
        return Verdict(est.estimate, None, r_lower, None, est.converged, est.values,
                       "undecidable here: no upper-bound oracle for this backend")
    if r_lower > r_upper + 1e-6:
        raise CheckFailure("two-sided reduced-norm bounds",
                           f"lower bound {r_lower} exceeds upper bound {r_upper}", (R,))
    if est.estimate < r_lower - 1e-6:
        raise CheckFailure("‖a‖_e ≥ ‖a‖_r", f"e-estimate {est.estimate} below r-lower {r_lower}",
                           (len(est.values),))
    return Verdict(est.estimate, r_upper, r_lower, est.estimate > r_upper + 1e-6, est.converged,
                   est.values, note)


# -- bundle truncation -----------------------------------------------------------

@dataclass
class Truncation:
    groupoid: FiniteGroupoid
    block_sizes: list
    block_ranks: list


def bundle_truncation(tower: QuotientTower, N: int) -> Truncation:
    """Disjoint union of (Γ/Γ_n) ⋉ X_n for n ≤ N, with the matrix-block check."""
    if N > len(tower):
        raise TowerError(f"asked for {N} levels, tower has {len(tower)}")
    parts, sizes, ranks = [], [], []
    for n, lev in enumerate(tower.levels[:N], 1):
        names = sorted(lev.images)
        letters = {chr(ord("a") + k): lev.images[g].tolist() for k, g in enumerate(names)}
        quotient = FiniteGroup.from_permutations(letters, name=f"Q{n}")
        pts = [str(c) for c in range(lev.cosets)]
        act = GroupAction.from_function(quotient, pts,
                                        lambda g, x, q=quotient: str(q.permutations[g][int(x)]))
        T = transformation_groupoid(act, name=f"level{n}")
        parts.append(T)
        sizes.append(lev.cosets)
        # span of ρ_x(δ_g) over g: a full matrix algebra when the action is free
        x0 = T.unit_index(T.units[0])
        fib = T.source_fiber(x0)
        pos = {int(g): k for k, g in enumerate(fib)}
        mats = []
        for h in range(len(T)):
            M = np.zeros((len(fib), len(fib)))
            for j, g in enumerate(fib):
                if T.s[h] == T.r[g]:
                    M[pos[int(T.comp[h, g])], j] = 1.0
            mats.append(M.ravel())
        ranks.append(int(np.linalg.matrix_rank(np.array(mats))) if mats else 0)
    G = disjoint_union(parts, [f"L{n}:" for n in range(1, N + 1)], name=f"bundle{N}")
    return Truncation(G, sizes, ranks)
