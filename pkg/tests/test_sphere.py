import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fgeodesics import (
    GreatCircle,
    InvalidInput,
    SpherePoint,
    TangentVector,
    great_circle_curve,
    killing_a_invariant,
    killing_field,
    killing_flow,
    killing_sup_norm,
)
from fgeodesics.sphere import pairwise_coprime, plane_basis, round_length

WEIGHT_SETS = [(1, 3), (1, 2), (2, 3), (1, 2, 5), (1, 2, 3), (3, 4, 5), (1, 3, 5, 7)]


def unit(rng, n):
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)


def test_sphere_point_validation():
    SpherePoint([1.0, 0, 0, 0])
    with pytest.raises(InvalidInput):
        SpherePoint([1.0, 1e-5, 0, 0])
    with pytest.raises(InvalidInput):
        SpherePoint([1.0, 0, 0])
    p = SpherePoint.normalized([3.0, 4.0, 0, 0])
    assert p.coords[0] == pytest.approx(0.6)
    with pytest.raises(ValueError):
        p.coords[0] = 2.0


def test_tangent_vector_validation():
    x = SpherePoint([1.0, 0, 0, 0])
    TangentVector(x, [0, 1.0, 0, 0])
    with pytest.raises(InvalidInput):
        TangentVector(x, [1e-6, 1.0, 0, 0])
    t = TangentVector.projected(x, [5.0, 2.0, 0, 0])
    assert t.round_norm() == pytest.approx(2.0)


def test_killing_field_rates():
    K = killing_field(2, (1, 3), 0.1)
    assert K.p == 3
    assert np.allclose(K.rates, [0.3, 0.1], atol=1e-15)
    assert np.all(killing_field(2, (1, 3), 0.0)(np.array([1.0, 0, 0, 0])) == 0)
    A = K.generator()
    assert np.array_equal(A, -A.T)


@pytest.mark.parametrize("weights", [(2, 4), (1, 1), (3, 2), (0, 1), (1, 2.5)])
def test_killing_field_rejects_bad_weights(weights):
    with pytest.raises(InvalidInput):
        killing_field(2, weights, 0.01)


def test_killing_field_rejects_inadmissible_mu():
    with pytest.raises(InvalidInput):
        killing_field(2, (1, 3), 1 / math.sqrt(10))
    with pytest.raises(InvalidInput):
        killing_field(2, (1, 3), -0.01)
    with pytest.raises(InvalidInput):
        killing_field(1, (1,), 0.1)


def test_a_invariant_examples():
    assert killing_a_invariant((1, 3)) == pytest.approx(math.sqrt(10), abs=1e-14)
    assert killing_a_invariant((1, 2, 3)) == pytest.approx(7.0, abs=1e-14)
    with pytest.raises(InvalidInput):
        killing_a_invariant((1, 1))


def test_sup_norm_examples():
    assert killing_sup_norm(killing_field(2, (1, 3), 0.1)) == pytest.approx(0.3, abs=1e-15)
    assert killing_sup_norm(killing_field(3, (1, 2, 5), 0.05)) == pytest.approx(0.5, abs=1e-15)
    assert killing_sup_norm(killing_field(2, (1, 3), 0.0)) == 0


@pytest.mark.parametrize("weights", WEIGHT_SETS)
def test_sup_norm_bounded_by_a(weights, rng):
    mu = 0.9 / killing_a_invariant(weights)
    K = killing_field(len(weights), weights, mu)
    assert killing_sup_norm(K) <= mu * killing_a_invariant(weights)
    xs = rng.normal(size=(2000, K.dim))
    xs /= np.linalg.norm(xs, axis=1, keepdims=True)
    assert np.max(np.linalg.norm(K(xs), axis=1)) <= killing_sup_norm(K) + 1e-15


def test_flow_examples():
    K = killing_field(2, (1, 3), 0.1)
    e1 = SpherePoint([1.0, 0, 0, 0])
    assert np.array_equal(killing_flow(K, 0.0, e1).coords, e1.coords)
    y = killing_flow(K, 2 * math.pi / 0.3, e1)
    assert np.allclose(y.coords, e1.coords, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(WEIGHT_SETS), st.floats(0, 0.99), st.floats(-50, 50), st.floats(-50, 50),
       st.integers(0, 2**32 - 1))
def test_flow_group_property_and_isometry(weights, frac, s, t, seed):
    rng = np.random.default_rng(seed)
    K = killing_field(len(weights), weights, frac / killing_a_invariant(weights))
    x = SpherePoint(unit(rng, K.dim))
    lhs = killing_flow(K, s + t, x).coords
    rhs = killing_flow(K, s, killing_flow(K, t, x)).coords
    assert np.linalg.norm(lhs - rhs) <= 1e-10
    assert np.allclose(killing_flow(K, -t, killing_flow(K, t, x)).coords, x.coords, atol=1e-12)
    X = TangentVector.projected(x, rng.normal(size=K.dim))
    dX = K.rotation(t) @ X.dir
    assert abs(np.linalg.norm(dX) - X.round_norm()) <= 1e-10


def test_great_circle_examples():
    e1, e2 = plane_basis(2, 1)
    gc = GreatCircle(e1, e2, 2 * math.pi)
    pt, vel = great_circle_curve(gc, 0.0)
    assert np.array_equal(pt.coords, e1)
    assert np.allclose(vel, 2 * math.pi * e2)
    pt, _ = great_circle_curve(gc, 0.5)
    assert np.allclose(pt.coords, -e1, atol=1e-15)
    assert round_length(GreatCircle(e1, e2)) == pytest.approx(2 * math.pi)


def test_great_circle_validation():
    e1, e2 = plane_basis(2, 1)
    with pytest.raises(InvalidInput):
        GreatCircle(e1, e1)
    with pytest.raises(InvalidInput):
        GreatCircle(e1, e2, 0.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 10), st.floats(-100, 100), st.integers(0, 2**32 - 1))
def test_great_circle_speed(speed, t, seed):
    rng = np.random.default_rng(seed)
    u = unit(rng, 6)
    v = rng.normal(size=6)
    v -= (v @ u) * u
    v /= np.linalg.norm(v)
    pt, vel = great_circle_curve(GreatCircle(u, v, speed), t)
    assert abs(np.linalg.norm(vel) - speed) <= 1e-12 * speed
    assert abs(pt.coords @ vel) <= 1e-10 * speed


def test_pairwise_coprime():
    assert pairwise_coprime((1, 3, 5))
    assert not pairwise_coprime((3, 5, 9))
