"""Round geometry of odd spheres S^{2m-1} in ambient coordinates.

Points and tangent vectors live in R^{2m}. The ambient space splits into the
coordinate planes V_j = span(e_{2j-1}, e_{2j}); a Killing field of the round
metric rotates each plane V_j at its own rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidInput

ON_SPHERE_TOL = 1e-12


def _as_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1 or arr.size < 4 or arr.size % 2:
        raise InvalidInput(f"{name} must be a real vector of even length >= 4, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpherePoint:
    """A point of the unit sphere in R^{2m}."""

    coords: np.ndarray

    def __post_init__(self):
        coords = _as_vector(self.coords, "coords")
        if abs(np.linalg.norm(coords) - 1.0) > ON_SPHERE_TOL:
            raise InvalidInput(f"point is off the unit sphere: |x| - 1 = {np.linalg.norm(coords) - 1.0:.3e}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def normalized(cls, values) -> "SpherePoint":
        """Project a nonzero vector radially onto the sphere."""
        arr = np.asarray(values, dtype=float)
        nrm = np.linalg.norm(arr)
        if nrm == 0.0:
            raise InvalidInput("cannot normalize the zero vector")
        return cls(arr / nrm)

    @property
    def dim(self) -> int:
        return self.coords.size


@dataclass(frozen=True)
class TangentVector:
    """A tangent vector ``dir`` at ``base``; ``dir`` is orthogonal to the base point."""

    base: SpherePoint
    dir: np.ndarray

    def __post_init__(self):
        d = _as_vector(self.dir, "dir")
        if d.size != self.base.dim:
            raise InvalidInput("tangent vector and base point have different dimensions")
        if abs(float(d @ self.base.coords)) > ON_SPHERE_TOL * max(1.0, float(np.linalg.norm(d))):
            raise InvalidInput("vector is not tangent to the sphere at its base point")
        object.__setattr__(self, "dir", d)

    @classmethod
    def projected(cls, base: SpherePoint, values) -> "TangentVector":
        """Orthogonally project an ambient vector onto the tangent space at ``base``."""
        v = np.asarray(values, dtype=float)
        x = base.coords
        return cls(base, v - (v @ x) * x)

    def round_norm(self) -> float:
        """The round length f_0(X) = sqrt(g_0(X, X))."""
        return float(np.linalg.norm(self.dir))


@dataclass(frozen=True)
class GreatCircle:
    """The curve c(t) = cos(speed t) u + sin(speed t) v."""

    u: np.ndarray
    v: np.ndarray
    speed: float = 1.0

    def __post_init__(self):
        u = _as_vector(self.u, "u")
        v = _as_vector(self.v, "v")
        if u.size != v.size:
            raise InvalidInput("u and v must have the same length")
        if abs(np.linalg.norm(u) - 1) > ON_SPHERE_TOL or abs(np.linalg.norm(v) - 1) > ON_SPHERE_TOL:
            raise InvalidInput("u and v must be unit vectors")
        if abs(float(u @ v)) > ON_SPHERE_TOL:
            raise InvalidInput("u and v must be orthogonal")
        if not self.speed > 0:
            raise InvalidInput("speed must be positive")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "speed", float(self.speed))

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.speed


def great_circle_curve(gc: GreatCircle, t: float) -> tuple[SpherePoint, np.ndarray]:
    """Position and velocity of the great circle at parameter ``t``.

    The position is renormalized so the returned point passes the on-sphere
    check even after many periods of round-off.
    """
    s = gc.speed * t
    c, sn = math.cos(s), math.sin(s)
    pos = c * gc.u + sn * gc.v
    vel = gc.speed * (-sn * gc.u + c * gc.v)
    return SpherePoint(pos / np.linalg.norm(pos)), vel


def round_length(gc: GreatCircle, t0: float = 0.0, t1: float | None = None) -> float:
    """Round length of the arc between ``t0`` and ``t1`` (default: one period)."""
    if t1 is None:
        t1 = t0 + gc.period
    return gc.speed * abs(t1 - t0)


# --------------------------------------------------------------------------
# Killing fields


def _check_weights(weights: Sequence[int]) -> tuple[int, ...]:
    try:
        ws = tuple(int(w) for w in weights)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"weights must be integers: {weights!r}") from exc
    if any(int(w) != w for w in weights):
        raise InvalidInput(f"weights must be integers: {weights!r}")
    if len(ws) < 2:
        raise InvalidInput("need at least two weights (m >= 2)")
    if ws[0] < 1:
        raise InvalidInput("weights must be positive")
    if any(a >= b for a, b in zip(ws, ws[1:])):
        raise InvalidInput(f"weights must be strictly increasing: {ws}")
    for i, a in enumerate(ws):
        for b in ws[i + 1:]:
            if math.gcd(a, b) != 1:
                raise InvalidInput(f"weights {a} and {b} are not coprime")
    return ws


def killing_a_invariant(weights: Sequence[int]) -> float:
    """The constant p * (sum_j p_j^{-2})^{1/2}, p the product of the weights.

    This dominates the pointwise sup of the unscaled field, which is p / p_1.
    """
    ws = _check_weights(weights)
    p = math.prod(ws)
    return p * math.sqrt(sum(1.0 / (w * w) for w in ws))


@dataclass(frozen=True)
class KillingField:
    """Killing field mu * V with V generated by the block rotations R(p t / p_j) on V_j."""

    m: int
    weights: tuple[int, ...]
    mu: float
    p: int = field(init=False)

    def __post_init__(self):
        ws = _check_weights(self.weights)
        if len(ws) != self.m:
            raise InvalidInput(f"expected {self.m} weights, got {len(ws)}")
        mu = float(self.mu)
        if not math.isfinite(mu) or mu < 0:
            raise InvalidInput("mu must be a finite non-negative number")
        bound = 1.0 / killing_a_invariant(ws)
        if mu >= bound:
            raise InvalidInput(f"mu={mu} is not admissible; need mu < 1/a = {bound:.6g}")
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "p", math.prod(ws))

    @property
    def dim(self) -> int:
        """Ambient dimension 2m."""
        return 2 * self.m

    @property
    def rates(self) -> np.ndarray:
        """Rotation rates mu * p / p_j of the planes V_1, ..., V_m."""
        return np.array([self.mu * (self.p // w) for w in self.weights], dtype=float)

    def rate_fractions(self) -> tuple[int, ...]:
        """The integers p / p_j, so that rates == mu * rate_fractions."""
        return tuple(self.p // w for w in self.weights)

    def generator(self) -> np.ndarray:
        """Skew-symmetric, block-diagonal generator matrix of the flow."""
        gen = np.zeros((self.dim, self.dim))
        for j, r in enumerate(self.rates):
            gen[2 * j + 1, 2 * j] = r
            gen[2 * j, 2 * j + 1] = -r
        return gen

    def __call__(self, x) -> np.ndarray:
        """Field vector V_mu(x) at an ambient point (array or SpherePoint)."""
        coords = x.coords if isinstance(x, SpherePoint) else np.asarray(x, dtype=float)
        out = np.empty_like(coords)
        r = self.rates
        out[..., 0::2] = -r * coords[..., 1::2]
        out[..., 1::2] = r * coords[..., 0::2]
        return out

    def rotation(self, t: float) -> np.ndarray:
        """Matrix of the flow psi_t = exp(t * generator)."""
        rot = np.zeros((self.dim, self.dim))
        for j, r in enumerate(self.rates):
            c, s = math.cos(r * t), math.sin(r * t)
            rot[2 * j:2 * j + 2, 2 * j:2 * j + 2] = [[c, -s], [s, c]]
        return rot


def killing_field(m: int, weights: Sequence[int], mu: float) -> KillingField:
    """Validated Killing field on S^{2m-1}; raises InvalidInput for bad weights or mu."""
    if int(m) != m or m < 2:
        raise InvalidInput(f"m must be an integer >= 2, got {m!r}")
    return KillingField(int(m), tuple(weights), mu)


def killing_flow(K: KillingField, t: float, x: SpherePoint) -> SpherePoint:
    """Apply the flow psi_t to ``x``; exact block rotations followed by renormalization."""
    if x.dim != K.dim:
        raise InvalidInput("point dimension does not match the field")
    y = K.rotation(t) @ x.coords
    return SpherePoint(y / np.linalg.norm(y))


def killing_sup_norm(K: KillingField) -> float:
    """sup over the sphere of f_0(V_mu(x)); attained on V_1 and equal to mu * p / p_1."""
    return K.mu * (K.p // K.weights[0])


def pairwise_coprime(values: Sequence[int]) -> bool:
    vals = list(values)
    return all(math.gcd(a, b) == 1 for i, a in enumerate(vals) for b in vals[i + 1:])


def plane_basis(m: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis (u, v) of the plane V_j (1-based), oriented so the field turns u towards v."""
    if not 1 <= j <= m:
        raise InvalidInput(f"plane index j must lie in 1..{m}")
    u = np.zeros(2 * m)
    v = np.zeros(2 * m)
    u[2 * j - 2] = 1.0
    v[2 * j - 1] = 1.0
    return u, v
