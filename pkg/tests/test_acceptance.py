"""Acceptance criteria 1-9, one PASS/FAIL line each (shown in the terminal summary)."""

import time

import numpy as np
import pytest

from isonorm.algebra import AlgebraElement
from isonorm.constructions import canonical_partial_bisections, copy_units
from isonorm.corpus import (corpus, corrupted_families, random_corpus_groupoid,
                            random_isotropy_element, random_linking_instance,
                            relation_counterexample)
from isonorm.groups import FreeGroup
from isonorm.norms import (exotic_norm_finite, morita_restriction_check, orbit_transport,
                           tmred_certificate)
from isonorm.representations import compression_identity_check, induced_regular_spectra
from isonorm.states import (assemble_state, centralizer_check, extract_pair,
                            random_state_data)
from isonorm.towers import (TowerElement, exoticness_verdict, f2_tower, quasi_norm_sequence,
                            reduced_norm_lower_bound, schur_upper_bound, sl2_tower, z_tower)

from acceptance_log import record
from reps import random_isotropy_rep

SEED = 20240611
CORPUS_SIZE = 200
GSUM = TowerElement.generator_sum("ab")


@pytest.fixture(scope="module")
def groupoids():
    return corpus(CORPUS_SIZE, seed=SEED)


def isotropy_oracle(h, x):
    G = h.G
    iso = [G.elements[i] for i in G.isotropy(G.unit_index(x))]
    pos = {g: k for k, g in enumerate(iso)}
    M = np.zeros((len(iso), len(iso)), dtype=complex)
    for k, c in h.terms.items():
        for g in iso:
            M[pos[G.compose(k, g)], pos[g]] += c
    return float(np.linalg.norm(M, 2))


def radial_ball_norm(R):
    """Exact norm of the 4-generator sum compressed to the radius-R ball of F₂.

    The top eigenvector is radial; on radial functions the compression is the
    tridiagonal matrix with off-diagonals 2, √3, ..., √3.
    """
    off = [2.0] + [np.sqrt(3.0)] * (R - 1)
    return float(np.linalg.eigvalsh(np.diag(off, 1) + np.diag(off, -1))[-1])


def test_criterion_1_finite_exotic_equals_reduced(groupoids):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst, count = 0.0, 0
    assert len(groupoids) >= 200 and max(map(len, groupoids)) <= 64
    kinds = {G.name for G in groupoids}
    for G in groupoids:
        for _ in range(10):
            x = G.units[int(rng.integers(len(G.units)))]
            h = random_isotropy_element(rng, G, x)
            worst = max(worst, abs(exotic_norm_finite(G, x, h).value - isotropy_oracle(h, x)))
            count += 1
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < 60 and kinds == {"transformation", "partial", "semidirect",
                                                   "germs"}
    record(1, ok, f"{len(groupoids)} groupoids x 10 elements, max |e - iso| = {worst:.2e} "
                  f"(tol 1e-10), {dt:.1f}s (< 60s)")
    assert ok


@pytest.fixture(scope="module")
def f2_run():
    t0 = time.perf_counter()
    tower = f2_tower()
    verdict = exoticness_verdict(tower, GSUM, R=12)
    schur, _ = schur_upper_bound(FreeGroup("ab"), GSUM)
    dt = time.perf_counter() - t0
    exact = radial_ball_norm(12)
    in_window = 3.40 <= verdict.r_lower <= 3.4642
    gap_ok = (len(tower) >= 3 and abs(verdict.e_lower - 4.0) <= 1e-9
              and abs(schur - 3.4641) <= 1e-3 and verdict.exotic is True and dt < 120)
    text = (f"levels {[lev.cosets for lev in tower.levels]}, e = {verdict.e_lower:.9f}, "
            f"Schur = {schur:.9f}, EXOTIC = {verdict.exotic}, {dt:.1f}s (< 120s); "
            f"r_lower(R=12) = {verdict.r_lower:.9f} "
            f"{'in' if in_window else 'NOT in'} [3.40, 3.4642]")
    if not in_window:
        text += (f" -- exact ball-compression norm is {exact:.9f}, so the window "
                 f"is unreachable at radius 12 (first reached at radius 14)")
    record(2, gap_ok and in_window, text)
    return verdict, schur, dt, exact, gap_ok


def test_criterion_2_exoticness_gap(f2_run):
    verdict, schur, dt, exact, gap_ok = f2_run
    assert abs(verdict.e_lower - 4.0) <= 1e-9
    assert abs(schur - 3.4641) <= 1e-3
    assert verdict.exotic is True
    assert dt < 120
    # the power iteration reproduces the exact compression norm from below
    assert exact - 1e-6 <= verdict.r_lower <= exact + 1e-12
    assert gap_ok


@pytest.mark.xfail(strict=True, reason="radius-12 ball compression of the generator sum has "
                                       "exact norm 3.38758 < 3.40; the window needs radius 14")
def test_criterion_2_radius12_window(f2_run):
    verdict = f2_run[0]
    assert 3.40 <= verdict.r_lower <= 3.4642


def test_criterion_2_window_reachable_at_radius_14():
    # not part of the criterion: shows the window itself is consistent with the tree
    assert 3.40 <= radial_ball_norm(14) <= 3.4642
    assert radial_ball_norm(40) <= 2 * np.sqrt(3)


def test_criterion_3_amenable_collapse():
    t0 = time.perf_counter()
    tower = z_tower(8)
    a = TowerElement([("a", 1), ("A", 1)])
    seq = quasi_norm_sequence(tower, a)
    verdict = exoticness_verdict(tower, a, R=64)
    dt = time.perf_counter() - t0
    worst = max(abs(v - 2.0) for v in seq.values)
    ok = worst <= 1e-9 and seq.nondecreasing and verdict.exotic is False and dt < 10
    record(3, ok, f"Z/2^n, n <= 8: max |‖λ_n(a)‖ - 2| = {worst:.2e}, nondecreasing = "
                  f"{seq.nondecreasing}, exotic = {verdict.exotic}, {dt:.1f}s (< 10s)")
    assert ok


def test_criterion_4_sl2_levels():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    letters = "stST"
    terms = []
    for _ in range(3):
        w = "".join(rng.choice(list(letters), size=int(rng.integers(1, 4))))
        c = complex(*rng.standard_normal(2))
        terms += [(w, c), (w[::-1].swapcase(), np.conj(c))]
    a = TowerElement(terms)
    assert a.is_self_adjoint() and len(terms) == 6
    tower = sl2_tower((1, 2, 3, 4))
    seq = quasi_norm_sequence(tower, a)
    dt = time.perf_counter() - t0
    floor = min(v - seq.values[0] for v in seq.values)
    ok = seq.nondecreasing and floor >= -1e-9 and dt < 120
    record(4, ok, f"SL2(Z/2^n), dims {seq.dims}, values "
                  f"{[round(v, 9) for v in seq.values]}, worst drop {seq.worst_drop:.2e} "
                  f"(tol 1e-9), {dt:.1f}s (< 120s)")
    assert ok


def test_criterion_5_compression_identity():
    rng = np.random.default_rng(SEED + 5)
    worst = 0.0
    for _ in range(100):
        G = random_corpus_groupoid(rng)
        x = G.units[int(rng.integers(len(G.units)))]
        rho = random_isotropy_rep(G, x, rng)
        f = AlgebraElement.random(G, rng, density=0.6)
        worst = max(worst, compression_identity_check(G, x, rho, f))
    ok = worst <= 1e-12
    record(5, ok, f"100 random (G, x, ρ, f): max deviation {worst:.2e} (tol 1e-12)")
    assert ok


def test_criterion_6_induced_vs_regular_spectra(groupoids):
    rng = np.random.default_rng(SEED + 6)
    worst = 0.0
    for G in groupoids:
        x = G.units[int(rng.integers(len(G.units)))]
        f = AlgebraElement.random(G, rng, density=0.6)
        a, b = induced_regular_spectra(G, x, f)
        assert len(a) == len(b)
        worst = max(worst, float(np.max(np.abs(a - b), initial=0.0)))
    ok = worst <= 1e-10
    record(6, ok, f"{len(groupoids)} groupoids: max spectral deviation {worst:.2e} (tol 1e-10)")
    assert ok


def test_criterion_7_state_bijection():
    rng = np.random.default_rng(SEED + 7)
    round_trip, min_eig, central = 0.0, np.inf, 0.0
    for _ in range(50):
        G = random_corpus_groupoid(rng)
        while len(G) > 16:
            G = random_corpus_groupoid(rng)
        phi = assemble_state(G, random_state_data(G, rng))
        back = assemble_state(G, extract_pair(G, phi))
        for g in G.elements:
            d = AlgebraElement.delta(G, g)
            round_trip = max(round_trip, abs(back(d) - phi(d)))
        min_eig = min(min_eig, phi.min_positivity_eigenvalue())
        central = max(central, centralizer_check(phi)[0])
    ok = round_trip == 0.0 and min_eig >= -1e-10 and central <= 1e-12
    record(7, ok, f"50 states: round-trip deviation {round_trip:.1e} (exact), min GNS eigenvalue "
                  f"{min_eig:.2e} (>= -1e-10), centralizer {central:.1e} (<= 1e-12)")
    assert ok


def test_criterion_8_graded_certificate(groupoids):
    rng = np.random.default_rng(SEED + 8)
    passed, total, caught = 0, 0, []
    corrupted = []
    for G in groupoids:
        if G.name not in ("partial", "transformation"):
            continue
        for x in G.units:
            fam = canonical_partial_bisections(G, x)
            h = random_isotropy_element(rng, G, x)
            cert = tmred_certificate(G, fam, x, h)
            total += 1
            passed += cert.passed
            if len(corrupted) < 19:
                corrupted += [(G, x, h, f, e) for f, e in corrupted_families(G, x, fam, rng, 1)]
    Gr, xr, famr = relation_counterexample()
    corrupted.append((Gr, xr, AlgebraElement(Gr, {"p:(1,0)": 1.0}), famr, "(3)"))
    for G, x, h, fam, expect in corrupted:
        cert = tmred_certificate(G, fam, x, h)
        if not cert.passed and cert.hypothesis == expect and cert.witness:
            caught.append(expect)
    kinds = sorted(set(caught))
    ok = passed == total and len(corrupted) == 20 and len(caught) == 20
    record(8, ok, f"canonical families pass on {passed}/{total} (G, x) pairs; "
                  f"{len(caught)}/{len(corrupted)} corrupted families rejected with witnesses, "
                  f"hypotheses hit {kinds}")
    assert ok


def test_criterion_9_morita_orbit_invariance():
    rng = np.random.default_rng(SEED + 9)
    morita, transport = 0.0, 0.0
    for k in range(50):
        T = random_linking_instance(rng)
        morita = max(morita, morita_restriction_check(T, copy_units(T, 1), n_batch=5,
                                                      seed=k).max_deviation)
        x = T.units[int(rng.integers(len(T.units)))]
        arrows = [T.elements[i] for i in T.source_fiber(T.unit_index(x))]
        g = arrows[int(rng.integers(len(arrows)))]
        rep = orbit_transport(T, x, T.range_of(g), g, random_isotropy_element(rng, T, x))
        transport = max(transport, abs(rep.e_before - rep.e_after),
                        abs(rep.r_before - rep.r_after))
    ok = morita <= 1e-10 and transport <= 1e-10
    record(9, ok, f"50 linking groupoids: restriction deviation {morita:.2e}, transport "
                  f"deviation {transport:.2e} (tol 1e-10)")
    assert ok


def test_lower_bound_matches_radial_oracle_small_radius():
    for R in (3, 6):
        v = reduced_norm_lower_bound(FreeGroup("ab"), GSUM, R)
        assert abs(v - radial_ball_norm(R)) <= 1e-6
