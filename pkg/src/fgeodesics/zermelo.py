"""Zermelo (Katok) deformations of the round metric.

The unit ball of F at x is the round unit ball translated by the Killing
vector W = V_mu(x). Solving |y/F - W| = 1 for F gives the closed form used by
:func:`finsler_norm`; its Legendre dual is |p| + <W, p>.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidInput, InvalidMetric
from .sphere import KillingField, SpherePoint, TangentVector, killing_a_invariant, killing_field, killing_sup_norm


@dataclass(frozen=True)
class ZermeloMetric:
    field: KillingField

    def __post_init__(self):
        if killing_sup_norm(self.field) >= 1.0:
            raise InvalidMetric("Killing field must have sup-norm < 1 for a strongly convex Zermelo norm")

    @property
    def m(self) -> int:
        return self.field.m

    @property
    def n(self) -> int:
        """Dimension 2m - 1 of the sphere."""
        return 2 * self.field.m - 1

    @property
    def dim(self) -> int:
        """Ambient dimension 2m."""
        return 2 * self.field.m

    @property
    def sup_wind(self) -> float:
        """w = sup_x f_0(V_mu(x))."""
        return killing_sup_norm(self.field)

    @property
    def is_round(self) -> bool:
        return self.field.mu == 0.0


def katok_metric(weights, mu: float) -> ZermeloMetric:
    """Convenience constructor: Katok metric on S^{2m-1} with m = len(weights)."""
    weights = tuple(weights)
    return ZermeloMetric(killing_field(len(weights), weights, mu))


@dataclass(frozen=True)
class MetricInvariants:
    reversibility: float
    distortion: float
    distortion_a_formula: float
    reversibility_closed_form: float
    distortion_closed_form: float

    @property
    def reversible(self) -> bool:
        return self.reversibility == 1.0


# --------------------------------------------------------------------------
# pointwise norms (array-level helpers are vectorised over leading axes)


def _norm_from_wind(W: np.ndarray, y: np.ndarray) -> np.ndarray:
    w2 = np.sum(W * W, axis=-1)
    wy = np.sum(W * y, axis=-1)
    yy = np.sum(y * y, axis=-1)
    denom = 1.0 - w2
    return (-wy + np.sqrt(wy * wy + denom * yy)) / denom


def finsler_norm_array(metric: ZermeloMetric, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """F(x, y) for stacked ambient points ``x`` and tangent vectors ``y``."""
    return _norm_from_wind(metric.field(x), y)


def finsler_norm(metric: ZermeloMetric, X: TangentVector) -> float:
    """Zermelo norm of a tangent vector: the positive root of |y - F W|^2 = F^2."""
    if X.base.dim != metric.dim:
        raise InvalidInput("tangent vector lives in the wrong dimension")
    y = X.dir
    if not np.any(y):
        raise InvalidInput("the Finsler norm is only evaluated on nonzero vectors")
    W = metric.field(X.base)
    w = float(np.linalg.norm(W))
    if w >= 1.0:
        raise InvalidMetric(f"field norm {w:.6g} >= 1 at base point")
    return float(_norm_from_wind(W, y))


def dual_norm(metric: ZermeloMetric, x: SpherePoint, covector) -> float:
    """F*(x, p) = |p| + <V_mu(x), p> for a covector orthogonal to x."""
    p = np.asarray(covector, dtype=float)
    if p.shape != (metric.dim,):
        raise InvalidInput("covector has the wrong dimension")
    if abs(float(p @ x.coords)) > 1e-12 * max(1.0, float(np.linalg.norm(p))):
        raise InvalidInput("covector must be orthogonal to the base point")
    W = metric.field(x)
    if np.linalg.norm(W) >= 1.0:
        raise InvalidMetric("field norm >= 1 at base point")
    return float(np.linalg.norm(p) + W @ p)


# --------------------------------------------------------------------------
# numerical sup over the unit round sphere bundle


def _sample_bundle(dim: int, count: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic pseudo-random sample of (x, y) with |x| = |y| = 1, <x, y> = 0."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(count, dim))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    y = rng.normal(size=(count, dim))
    y -= np.sum(x * y, axis=1, keepdims=True) * x
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    return x, y


def _bundle_point(z: np.ndarray, dim: int) -> tuple[np.ndarray, np.ndarray]:
    x = z[:dim] / np.linalg.norm(z[:dim])
    y = z[dim:] - (z[dim:] @ x) * x
    return x, y / np.linalg.norm(y)


def _maximize_over_bundle(metric: ZermeloMetric, objective, resolution: int, seed: int, refine: int = 3) -> float:
    """Max of objective(x, y) over unit (x, y): sampled grid then BFGS refinement of the best samples."""
    dim = metric.dim
    xs, ys = _sample_bundle(dim, max(int(resolution), 16), seed)
    vals = objective(xs, ys)
    best = float(np.max(vals))
    order = np.argsort(vals)[::-1][:refine]

    def neg(z):
        x, y = _bundle_point(z, dim)
        return -float(objective(x, y))

    for i in order:
        res = minimize(neg, np.concatenate([xs[i], ys[i]]), method="BFGS", options={"gtol": 1e-11, "maxiter": 500})
        best = max(best, -float(res.fun))
    return best


def reversibility(metric: ZermeloMetric, resolution: int = 10_000, seed: int = 0) -> float:
    """Numerical max of F(-y) over F(y) = 1.

    Because F is positively homogeneous this equals the max of F(x, -y) / F(x, y)
    over unit round vectors, which is what gets sampled.
    """
    if metric.is_round:
        return 1.0

    def ratio(x, y):
        W = metric.field(x)
        return _norm_from_wind(W, -y) / _norm_from_wind(W, y)

    return max(1.0, _maximize_over_bundle(metric, ratio, resolution, seed))


def distortion(metric: ZermeloMetric, resolution: int = 10_000, seed: int = 0) -> MetricInvariants:
    """Distortion D = max(sup F / f_0, sup f_0 / F), computed numerically.

    The returned record also carries the reversibility, the closed forms
    1/(1-w) and (1+w)/(1-w) with w the sup of the field, and the expression
    1/(1 - mu a) built from the weight invariant a.
    """
    w = metric.sup_wind
    f = metric.field
    a_formula = 1.0 / (1.0 - f.mu * killing_a_invariant(f.weights))
    lam = reversibility(metric, resolution, seed)
    if metric.is_round:
        D = 1.0
    else:
        upper = _maximize_over_bundle(metric, lambda x, y: finsler_norm_array(metric, x, y), resolution, seed + 1)
        lower = _maximize_over_bundle(metric, lambda x, y: 1.0 / finsler_norm_array(metric, x, y), resolution, seed + 2)
        D = max(1.0, upper, lower)
    return MetricInvariants(
        reversibility=lam,
        distortion=D,
        distortion_a_formula=a_formula,
        reversibility_closed_form=(1.0 + w) / (1.0 - w),
        distortion_closed_form=1.0 / (1.0 - w),
    )
