import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgeodesics import (
    DegenerateMetric,
    GeodesicState,
    GreatCircle,
    InvalidInput,
    exact_flow,
    exact_katok_geodesic,
    find_closed_geodesics,
    great_circle_record,
    integrate_geodesic,
    iterate_geodesic,
    katok_closed_geodesics,
    katok_metric,
    state_from_covector,
    state_from_velocity,
)
from fgeodesics.dynamics import _Field, dual_norm_value, flow_map, record_closure_defect, same_orbit, velocity
from fgeodesics.sphere import plane_basis
from fgeodesics.zermelo import finsler_norm_array

KATOK_LENGTHS = sorted(2 * math.pi / np.array([1.3, 0.7, 1.1, 0.9]))


def random_state(metric, rng):
    return state_from_velocity(metric, rng.normal(size=metric.dim), rng.normal(size=metric.dim))


def test_rhs_jacobian_matches_finite_differences(katok13, rng):
    fld = _Field(katok13)
    for _ in range(5):
        z = rng.normal(size=8)
        J = fld.jacobian(z)
        eps = 1e-6
        cols = [(fld.rhs(0, z + eps * e) - fld.rhs(0, z - eps * e)) / (2 * eps) for e in np.eye(8)]
        assert np.max(np.abs(J - np.column_stack(cols))) < 1e-7


def test_state_constructors(katok13, rng):
    s = random_state(katok13, rng)
    assert abs(s.x @ s.p) < 1e-14
    assert abs(dual_norm_value(katok13, s) - 1.0) < 1e-14
    v = velocity(katok13, s)
    assert finsler_norm_array(katok13, s.x, v) == pytest.approx(1.0, abs=1e-13)
    t = state_from_covector(katok13, s.x, 7.0 * s.p)
    assert np.allclose(t.p, s.p, atol=1e-14)
    with pytest.raises(InvalidInput):
        state_from_velocity(katok13, s.x, s.x)
    with pytest.raises(InvalidInput):
        GeodesicState([1.0, 0, 0, 0], [0, 1.0, 0])


def test_katok_list(katok13):
    recs = katok_closed_geodesics(katok13)
    assert [r.label for r in recs] == ["c1+", "c1-", "c2+", "c2-"]
    assert sorted(r.length for r in recs) == pytest.approx(KATOK_LENGTHS, abs=1e-12)
    assert np.allclose(sorted(r.length for r in recs), [4.83322, 5.71199, 6.98132, 8.97598], atol=5e-6)
    for r in recs:
        assert (r.length < 2 * math.pi) == r.label.endswith("+")
        assert record_closure_defect(katok13, r) < 1e-9


def test_katok_list_rejects_round():
    with pytest.raises(DegenerateMetric):
        katok_closed_geodesics(katok_metric((1, 3), 0.0))


def test_lengths_tend_to_two_pi():
    recs = katok_closed_geodesics(katok_metric((1, 5), 1e-9))
    assert all(abs(r.length - 2 * math.pi) < 1e-7 for r in recs)


def test_round_flow_is_two_pi_periodic(rng):
    M = katok_metric((1, 3), 0.0)
    s = random_state(M, rng)
    tr = integrate_geodesic(M, s, 2 * math.pi)
    assert tr.closure_defect() <= 1e-10


def test_closure_on_c1_plus(katok13):
    c1 = katok_closed_geodesics(katok13)[0]
    tol = 1e-11
    tr = integrate_geodesic(katok13, c1.initial, 2 * math.pi / 1.3, tol=tol)
    assert tr.closure_defect() <= 10 * tol + 1e-10
    assert tr.t[-1] == pytest.approx(2 * math.pi / 1.3, abs=1e-15)


def test_reversed_state_does_not_close(katok13):
    c1 = katok_closed_geodesics(katok13)[0]
    rev = state_from_covector(katok13, c1.initial.x, -c1.initial.p)
    tr = integrate_geodesic(katok13, rev, c1.length)
    assert tr.closure_defect() > 1e-3


def test_integrate_rejects_off_level(katok13, rng):
    s = random_state(katok13, rng)
    with pytest.raises(InvalidInput):
        integrate_geodesic(katok13, GeodesicState(s.x, 2 * s.p), 1.0)
    with pytest.raises(InvalidInput):
        integrate_geodesic(katok13, s, -1.0)


def test_energy_conservation_long_run(katok13, rng):
    for _ in range(3):
        tr = integrate_geodesic(katok13, random_state(katok13, rng), 20 * math.pi)
        assert tr.energy_defect() <= 1e-9
        assert tr.constraint_defect() <= 1e-9


@settings(max_examples=15, deadline=None)
@given(st.sampled_from([(1, 3), (1, 2), (2, 3), (1, 2, 5)]), st.floats(0, 0.9), st.integers(0, 2**32 - 1))
def test_integrator_matches_closed_form_flow(weights, frac, seed):
    from fgeodesics import killing_a_invariant

    rng = np.random.default_rng(seed)
    M = katok_metric(weights, frac / killing_a_invariant(weights))
    s = random_state(M, rng)
    tr = integrate_geodesic(M, s, 7.0)
    for t in (0.5, 3.0, 7.0):
        ex = exact_flow(M, s, t)
        num = tr.state_at(t)
        assert np.linalg.norm(ex.x - num.x) < 1e-8
        assert np.linalg.norm(ex.p - num.p) < 1e-8


def test_exact_katok_geodesic_round_case():
    M = katok_metric((1, 3), 0.0)
    u, v = plane_basis(2, 1)
    gc = GreatCircle(u, v)
    assert np.allclose(exact_katok_geodesic(M, gc, 1.234).coords, math.cos(1.234) * u + math.sin(1.234) * v)
    with pytest.raises(InvalidInput):
        exact_katok_geodesic(M, GreatCircle(u, v, 2.0), 1.0)


@pytest.mark.parametrize("j,sign", [(1, 1), (1, -1), (2, 1), (2, -1)])
def test_exact_plane_circles_close(katok13, j, sign):
    u, v = plane_basis(2, j)
    gc = GreatCircle(u, sign * v)
    L = 2 * math.pi / (1 + sign * katok13.field.rates[j - 1])
    assert np.allclose(exact_katok_geodesic(katok13, gc, L).coords, u, atol=1e-12)
    assert not np.allclose(exact_katok_geodesic(katok13, gc, 0.5 * L).coords, u, atol=1e-3)


def test_iterate_geodesic(katok13):
    c1 = katok_closed_geodesics(katok13)[0]
    assert iterate_geodesic(c1, 1) is c1
    c2 = iterate_geodesic(c1, 2)
    assert c2.length == pytest.approx(2 * 2 * math.pi / 1.3)
    assert not c2.prime and c2.iteration == 2 and c2.prime_length == pytest.approx(c1.length)
    assert iterate_geodesic(c1, 3).length == pytest.approx(3 * c1.length)
    with pytest.raises(InvalidInput):
        iterate_geodesic(c1, 0)


def test_great_circle_record_requires_round(katok13):
    u, v = plane_basis(2, 1)
    with pytest.raises(InvalidInput):
        great_circle_record(katok13, GreatCircle(u, v))


def test_finder_rejects_round_and_bad_args(katok13):
    with pytest.raises(DegenerateMetric):
        find_closed_geodesics(katok_metric((1, 3), 0.0), 10.0, seeds=5)
    with pytest.raises(InvalidInput):
        find_closed_geodesics(katok13, -1.0)
    with pytest.raises(InvalidInput):
        find_closed_geodesics(katok13, 10.0, seeds=0)


@pytest.mark.slow
def test_finder_short_bound(katok13):
    res = find_closed_geodesics(katok13, 4.9, seeds=200)
    assert len(res) == 1
    assert res[0].length == pytest.approx(2 * math.pi / 1.3, abs=1e-6)
    assert same_orbit(katok13, katok_closed_geodesics(katok13)[0], res[0])
    assert res.dropped == 0 and res.candidates > 0
    for rec in res:
        assert record_closure_defect(katok13, rec) <= 1e-9


def test_same_orbit_detects_shift(katok13):
    c1 = katok_closed_geodesics(katok13)[0]
    sol = flow_map(katok13, c1.initial.z, 1.7)
    from dataclasses import replace

    shifted = replace(c1, initial=GeodesicState.from_z(sol.y[:, -1]))
    assert same_orbit(katok13, c1, shifted)
    other = katok_closed_geodesics(katok13)[2]
    assert not same_orbit(katok13, c1, other)
