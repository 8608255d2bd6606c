import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq, minimize

from fgeodesics import (
    InvalidInput,
    InvalidMetric,
    SpherePoint,
    TangentVector,
    distortion,
    dual_norm,
    finsler_norm,
    katok_metric,
    killing_a_invariant,
    reversibility,
)
from fgeodesics.zermelo import finsler_norm_array

WEIGHT_SETS = [(1, 3), (1, 2), (2, 3), (1, 2, 5), (1, 2, 3)]


def metric_from(weights, frac):
    return katok_metric(weights, frac / killing_a_invariant(weights))


def random_bundle(rng, dim, n):
    x = rng.normal(size=(n, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    y = rng.normal(size=(n, dim))
    y -= np.sum(x * y, axis=1, keepdims=True) * x
    return x, y


def test_round_norm_is_euclidean(rng):
    M = katok_metric((1, 3), 0.0)
    x, y = random_bundle(rng, 4, 100)
    assert np.allclose(finsler_norm_array(M, x, y), np.linalg.norm(y, axis=1), rtol=1e-14)


def test_zero_vector_rejected(katok13):
    x = SpherePoint([1.0, 0, 0, 0])
    with pytest.raises(InvalidInput):
        finsler_norm(katok13, TangentVector(x, np.zeros(4)))


def test_wind_aligned_examples(katok13):
    x = SpherePoint([1.0, 0, 0, 0])
    W = katok13.field(x)
    w = np.linalg.norm(W)
    assert w == pytest.approx(0.3)
    assert finsler_norm(katok13, TangentVector(x, (1 + w) * W / w)) == pytest.approx(1.0, abs=1e-14)
    F = finsler_norm(katok13, TangentVector(x, -W / w))
    assert F == pytest.approx(1 / (1 - w), abs=1e-14)
    # independent oracle: root of f0(y / t - W) = 1 in t
    root = brentq(lambda t: np.linalg.norm(-W / w / t - W) - 1.0, 0.1, 10.0, xtol=1e-15)
    assert F == pytest.approx(root, abs=1e-12)


def test_strong_convexity_guard():
    with pytest.raises(InvalidInput):
        katok_metric((1, 3), 0.32)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(WEIGHT_SETS), st.floats(0, 0.95), st.integers(0, 2**32 - 1))
def test_norm_properties(weights, frac, seed):
    rng = np.random.default_rng(seed)
    M = metric_from(weights, frac)
    x, y = random_bundle(rng, M.dim, 200)
    W = M.field(x)
    F = finsler_norm_array(M, x, y)
    assert np.all(F > 0)
    alpha = rng.uniform(1e-3, 1e3, size=200)
    Fa = finsler_norm_array(M, x, alpha[:, None] * y)
    assert np.max(np.abs(Fa - alpha * F) / (alpha * F)) <= 1e-12
    u = y / F[:, None] - W
    assert np.max(np.abs(np.linalg.norm(u, axis=1) - 1.0)) <= 1e-10
    _, y2 = random_bundle(rng, M.dim, 200)
    y2 -= np.sum(x * y2, axis=1, keepdims=True) * x
    F12 = finsler_norm_array(M, x, y + y2)
    assert np.all(F12 <= F + finsler_norm_array(M, x, y2) + 1e-10)


def test_dual_norm_examples(katok13):
    x = SpherePoint([1.0, 0, 0, 0])
    W = katok13.field(x)
    w = np.linalg.norm(W)
    assert dual_norm(katok13, x, W / w) == pytest.approx(1 + w, abs=1e-15)
    assert dual_norm(katok13, x, [0, 0, 1.0, 0]) == pytest.approx(1.0, abs=1e-15)
    round_ = katok_metric((1, 3), 0.0)
    assert dual_norm(round_, x, [0, 3.0, 4.0, 0]) == pytest.approx(5.0)
    with pytest.raises(InvalidInput):
        dual_norm(katok13, x, [1.0, 0, 0, 0])


@pytest.mark.parametrize("seed", range(5))
def test_dual_norm_is_support_function(katok13, seed):
    """F*(p) = max <p, y> over the F-unit sphere {u + W : |u| = 1, u tangent}."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=4)
    x /= np.linalg.norm(x)
    xp = SpherePoint(x)
    p = rng.normal(size=4)
    p -= (p @ x) * x
    W = katok13.field(x)

    def pairing(v):
        u = v - (v @ x) * x
        u /= np.linalg.norm(u)
        return float(p @ (u + W))

    samples = rng.normal(size=(10_000, 4))
    vals = np.array([pairing(s) for s in samples[:2000]])
    start = samples[int(np.argmax(vals))]
    res = minimize(lambda v: -pairing(v), start, method="BFGS", options={"gtol": 1e-12})
    assert abs(-res.fun - dual_norm(katok13, xp, p)) <= 1e-8


def test_invariant_examples(katok13):
    assert reversibility(katok_metric((1, 3), 0.0)) == 1.0
    inv = distortion(katok13)
    assert inv.reversibility == pytest.approx(1.3 / 0.7, abs=1e-6)
    assert inv.distortion == pytest.approx(1 / 0.7, abs=1e-6)
    # direct evaluation of 1 / (1 - mu a) with a = sqrt(10)
    assert inv.distortion_a_formula == pytest.approx(1 / (1 - 0.1 * math.sqrt(10)), rel=1e-15)
    assert inv.distortion_a_formula == pytest.approx(1.4624753, abs=1e-7)
    assert inv.distortion ** 2 >= inv.reversibility
    round_inv = distortion(katok_metric((1, 3), 0.0))
    assert round_inv.distortion == 1.0 and round_inv.reversible


def test_sandwich_bound(rng):
    M = katok_metric((1, 2, 5), 0.03)
    D = distortion(M).distortion
    x, y = random_bundle(rng, M.dim, 10_000)
    F = finsler_norm_array(M, x, y)
    f0 = np.linalg.norm(y, axis=1)
    assert np.all(f0 / D <= F + 1e-14) and np.all(F <= D * f0 + 1e-14)


def test_metric_dimensions(katok13):
    assert (katok13.m, katok13.n, katok13.dim) == (2, 3, 4)
    assert not katok13.is_round


def test_invalid_metric_at_base_point():
    M = katok_metric((1, 3), 0.1)
    object.__setattr__(M.field, "mu", 1.0)  # simulate a corrupted field
    with pytest.raises(InvalidMetric):
        finsler_norm(M, TangentVector(SpherePoint([1.0, 0, 0, 0]), [0, 1.0, 0, 0]))
