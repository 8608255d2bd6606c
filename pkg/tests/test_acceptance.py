"""Acceptance criteria, one test per criterion, at the stated tolerances.

Each test also records a one-line verdict that is printed in the
"acceptance criteria" section of the pytest terminal summary.
"""

import math
import time

import numpy as np

from fgeodesics import (
    GreatCircle,
    closed_geodesic_index,
    contradiction_witness,
    count_conjugate_points,
    distortion,
    exact_katok_geodesic,
    find_closed_geodesics,
    forced_index_sequence,
    great_circle_record,
    integrate_geodesic,
    katok_closed_geodesics,
    katok_metric,
    killing_a_invariant,
    morse_inequalities,
    round_index,
    smallest_admissible_prime,
    state_from_velocity,
)
from fgeodesics.dynamics import record_closure_defect, same_orbit
from fgeodesics.sphere import pairwise_coprime, plane_basis
from fgeodesics.topology import admissible_prime_table, betti_quotient, half_gamma_exclusion, morse_counts, quotient_betti_map


def test_criterion_1_katok_lengths(katok13, criterion):
    t0 = time.perf_counter()
    res = find_closed_geodesics(katok13, 10.0, seeds=200, tol=1e-9)
    elapsed = time.perf_counter() - t0
    expected = sorted(2 * math.pi / np.array([1.3, 0.7, 1.1, 0.9]))
    found = sorted(r.length for r in res)
    ok_count = len(found) == 4
    err = max(abs(a - b) for a, b in zip(found, expected)) if ok_count else math.inf
    katok = katok_closed_geodesics(katok13)
    orbits = all(any(same_orbit(katok13, k, r) for r in res) for k in katok)
    closure = max(record_closure_defect(katok13, r) for r in res)
    ok = ok_count and err <= 1e-6 and orbits and closure <= 1e-9 and elapsed < 60
    criterion(1, ok, f"found {len(found)} geodesics, max length error {err:.2e}, "
                     f"closure {closure:.1e}, {elapsed:.1f} s")
    assert ok_count, found
    assert err <= 1e-6
    assert orbits
    assert closure <= 1e-9
    assert elapsed < 60


def test_criterion_2_round_indices(criterion):
    got, want = {}, {}
    for m, weights in ((2, (1, 3)), (3, (1, 2, 3))):
        M = katok_metric(weights, 0.0)
        u, v = plane_basis(m, 1)
        rec = great_circle_record(M, GreatCircle(u, v))
        for k in range(1, 5):
            got[m, k] = count_conjugate_points(M, rec, 2 * math.pi * k - 1e-3)
            want[m, k] = (4 * k - 2) * (m - 1)
            assert round_index(m, k) == want[m, k]
    ok = got == want
    criterion(2, ok, f"conjugate counts {sorted(got.items())}")
    assert ok


def test_criterion_3_katok_s3_indices(katok13, criterion):
    idx = {r.label: closed_geodesic_index(katok13, r) for r in katok_closed_geodesics(katok13)}
    c1p, c2p, c2m = idx["c1+"].index, idx["c2+"].index, idx["c2-"].index
    ok = c1p == 2 and c2p == 4 and c2m in (4, 6)
    criterion(3, ok, f"ind(c1+)={c1p}, ind(c2+)={c2p}, ind(c2-)={c2m}")
    assert c1p == 2
    assert c2p == 4
    assert c2m in (4, 6)


def test_criterion_4_prime_table(criterion):
    t0 = time.perf_counter()
    small = [smallest_admissible_prime(m) for m in (2, 3, 4)]
    tab = admissible_prime_table(10**5)
    ms = np.arange(2, 10**5 + 1)
    in_range = bool(np.all(tab >= 3) and np.all(tab <= ms + 2))
    spot = all(int(tab[m - 2]) == smallest_admissible_prime(m) for m in range(2, 10**5 + 1, 997))
    elapsed = time.perf_counter() - t0
    ok = small == [3, 5, 5] and in_range and spot and elapsed < 5
    criterion(4, ok, f"p_2..p_4={small}, max p_m={int(tab.max())} for m<=1e5, {elapsed:.2f} s")
    assert small == [3, 5, 5]
    assert in_range and spot
    assert elapsed < 5


def test_criterion_5_betti_consistency(criterion):
    top = all(betti_quotient(m, 4 * m - 4) == 2 for m in range(2, 21))
    bad = []
    for m in range(2, 21):
        p = smallest_admissible_prime(m)
        seq = forced_index_sequence(m, p)
        D = 4 * p * (m - 1) + 2
        md = morse_inequalities(morse_counts(seq.values, seq.gamma), quotient_betti_map(m, D), D)
        r = (2 * p - 1) * m
        if not (md.equality and seq[r] == seq[r + 1] == 4 * p * (m - 1)):
            bad.append(m)
    ok = top and not bad
    criterion(5, ok, f"beta_(4m-4)=2 for m=2..20: {top}; sequence failures: {bad}")
    assert top
    assert not bad


def test_criterion_6_half_gamma_exclusion(criterion):
    fails = {m: half_gamma_exclusion(m).failed_at for m in range(2, 21)}
    ok = all(fails[m] == 4 * m - 4 for m in fails)
    criterion(6, ok, "failure degree equals 4m-4 for every m=2..20" if ok else f"failure degrees {fails}")
    assert ok


def test_criterion_7_contradiction(criterion):
    t0 = time.perf_counter()
    bad = []
    for m in range(2, 201):
        rep = contradiction_witness(m, smallest_admissible_prime(m), 1000)
        if not (rep["p-divides-alpha-and-beta"].passed and rep["no-coprime-solution"].passed and rep.passed):
            bad.append(m)
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 30
    criterion(7, ok, f"m=2..200 symbolic+exhaustive (bound 1e3): failures {bad}, {elapsed:.1f} s")
    assert not bad
    assert elapsed < 30


def _random_katok(rng):
    while True:
        m = int(rng.integers(2, 4))
        w = sorted(int(x) for x in rng.choice(np.arange(1, 12), size=m, replace=False))
        if pairwise_coprime(w):
            break
    return katok_metric(w, float(rng.uniform(0.02, 0.95)) / killing_a_invariant(w))


def test_criterion_8_metric_invariants(criterion):
    rng = np.random.default_rng(2024)
    worst, sandwich, formula_shown = 0.0, True, True
    for _ in range(100):
        M = _random_katok(rng)
        inv = distortion(M)
        sandwich &= inv.distortion ** 2 >= inv.reversibility
        worst = max(worst, abs(inv.reversibility - inv.reversibility_closed_form),
                    abs(inv.distortion - inv.distortion_closed_form))
        a = killing_a_invariant(M.field.weights)
        formula_shown &= math.isclose(inv.distortion_a_formula, 1 / (1 - M.field.mu * a), rel_tol=1e-15)
    ok = sandwich and worst <= 1e-6 and formula_shown
    criterion(8, ok, f"100 metrics: D^2>=lambda {sandwich}, closed-form error {worst:.1e}")
    assert sandwich
    assert worst <= 1e-6
    assert formula_shown


def test_criterion_9_dynamics_hygiene(katok13, criterion):
    rng = np.random.default_rng(9)
    energy = 0.0
    for _ in range(5):
        s = state_from_velocity(katok13, rng.normal(size=4), rng.normal(size=4))
        energy = max(energy, integrate_geodesic(katok13, s, 20 * math.pi).energy_defect())
    dev = 0.0
    for rec in katok_closed_geodesics(katok13):
        tr = integrate_geodesic(katok13, rec.initial, rec.length)
        gc = GreatCircle(rec.circle.u, rec.circle.v, 1.0)
        for t in np.linspace(0.0, rec.length, 200):
            dev = max(dev, float(np.linalg.norm(tr.state_at(t).x - exact_katok_geodesic(katok13, gc, t).coords)))
    ok = energy <= 1e-9 and dev <= 1e-6
    criterion(9, ok, f"|F*-1| <= {energy:.1e} over 20 pi; exact vs numeric {dev:.1e}")
    assert energy <= 1e-9
    assert dev <= 1e-6
