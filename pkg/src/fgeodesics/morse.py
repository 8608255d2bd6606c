"""Morse index and nullity of closed geodesics.

Linearized geodesic flow is studied on the reduced transversal

    E = { (dx, dp) : <dx, p> = 0, dH = 0 },

which the linear flow preserves (it preserves both the Hamiltonian vector
field and the fiber-scaling field). With an orthonormal basis e_a of
N = {x, p}^perp the coordinates q_a = <dx, e_a>, eta_a = <dp, e_a> are
Darboux on E. A conjugate point is a time where the Lagrangian frame
started from the vertical subspace has a degenerate q-block. The index of
a closed geodesic is the conjugate count on (0, L) plus the index of the
boundary form of periodic Jacobi fields built from the monodromy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize_scalar

from .dynamics import (
    ClosedGeodesicRecord,
    GeodesicState,
    _Field,
    flow_with_jacobian,
    katok_closed_geodesics,
)
from .errors import BoundaryAmbiguous, InvalidInput, NumericalFailure
from .report import VerificationReport
from .zermelo import ZermeloMetric

KERNEL_RTOL = 1e-7
BOUNDARY_TOL = 1e-8
SYMPLECTIC_TOL = 1e-8


def round_index(m: int, k: int) -> int:
    """(4k - 2)(m - 1): index of the k-th iterate of a great circle on S^{2m-1}."""
    if int(m) != m or m < 2 or int(k) != k or k < 1:
        raise InvalidInput("need integers m >= 2 and k >= 1")
    return (4 * int(k) - 2) * (int(m) - 1)


# --------------------------------------------------------------------------
# transversal frames


def _normal_basis(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Orthonormal basis of {x, p}^perp as columns."""
    return null_space(np.vstack([x, p]))


def _frames(metric: ZermeloMetric, state: GeodesicState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Horizontal and vertical frames of E at ``state`` (each 2 dim x (n-1)), plus the normal basis."""
    fld = _Field(metric)
    x, p = np.asarray(state.x), np.asarray(state.p)
    n = metric.dim
    z = state.z
    g = fld.grad(z)
    dHx, dHp = g[:n], g[n:]
    E = _normal_basis(x, p)
    xp = float(dHp @ p)
    k = E.shape[1]
    horiz = np.zeros((2 * n, k))
    vert = np.zeros((2 * n, k))
    for b in range(k):
        e = E[:, b]
        horiz[:n, b] = e
        horiz[n:, b] = -(dHx @ e) / xp * p
        vert[n:, b] = e - (dHp @ e) / xp * p
    return horiz, vert, E


def _lagrangian_x_block(Y: np.ndarray, n: int) -> np.ndarray:
    """x-block of a frame after orthonormalizing its columns; singular values lie in [0, 1]."""
    Q, _ = np.linalg.qr(Y)
    return Q[:n]


@dataclass(frozen=True)
class LinearizedReturnData:
    """Monodromy on the transversal in Darboux coordinates (q, eta)."""

    monodromy: np.ndarray
    eigen_angles: tuple[float, ...]
    symplectic_defect: float

    @property
    def dim(self) -> int:
        return self.monodromy.shape[0] // 2

    def blocks(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        k = self.dim
        M = self.monodromy
        return M[:k, :k], M[:k, k:], M[k:, :k], M[k:, k:]

    def nullity(self, rtol: float = 1e-6) -> int:
        s = np.linalg.svd(self.monodromy - np.eye(2 * self.dim), compute_uv=False)
        return int(np.sum(s < rtol * max(1.0, np.linalg.norm(self.monodromy, 2))))


def _symplectic_form(k: int) -> np.ndarray:
    J = np.zeros((2 * k, 2 * k))
    J[:k, k:] = np.eye(k)
    J[k:, :k] = -np.eye(k)
    return J


def linearized_return_data(metric: ZermeloMetric, record: ClosedGeodesicRecord, rtol: float = 1e-11) -> LinearizedReturnData:
    """Monodromy of the linearized flow over ``record.length`` in (q, eta) coordinates."""
    horiz, vert, E = _frames(metric, record.initial)
    n = metric.dim
    cols = np.hstack([horiz, vert])
    sol = flow_with_jacobian(metric, record.initial.z, record.length, columns=cols, rtol=rtol, atol=rtol)
    k2 = 2 * n
    Y = sol.y[k2:, -1].reshape(k2, -1)
    M = np.vstack([E.T @ Y[:n], E.T @ Y[n:]])
    k = E.shape[1]
    J = _symplectic_form(k)
    defect = float(np.max(np.abs(M.T @ J @ M - J)))
    angles = np.mod(np.angle(np.linalg.eigvals(M)), 2 * math.pi)
    M.setflags(write=False)
    return LinearizedReturnData(M, tuple(float(a) for a in np.sort(angles)), defect)


# --------------------------------------------------------------------------
# conjugate points


def _vertical_flow(metric: ZermeloMetric, record: ClosedGeodesicRecord, upto: float, rtol: float):
    _, vert, _ = _frames(metric, record.initial)
    return flow_with_jacobian(metric, record.initial.z, upto, columns=vert, rtol=rtol, atol=rtol, dense=True)


def conjugate_points(metric: ZermeloMetric, record: ClosedGeodesicRecord, upto: float,
                     grid_step: float = 0.02, rtol: float = 1e-11) -> list[tuple[float, int]]:
    """Conjugate times in (0, upto) with their multiplicities."""
    if not upto > 0:
        raise InvalidInput("upto must be positive")
    n = metric.dim
    k2 = 2 * n
    sol = _vertical_flow(metric, record, upto, rtol)

    def sigmas(t: float) -> np.ndarray:
        Y = sol.sol(t)[k2:].reshape(k2, -1)
        return np.linalg.svd(_lagrangian_x_block(Y, n), compute_uv=False)

    K = max(int(math.ceil(upto / grid_step)), 8)
    ts = np.linspace(0.0, upto, K + 1)
    smin = np.array([sigmas(t)[-1] if t > 0 else 0.0 for t in ts])
    found: list[tuple[float, int]] = []
    for i in range(1, K + 1):
        if i < K:
            is_min = smin[i] <= smin[i - 1] and smin[i] <= smin[i + 1]
        else:
            is_min = smin[i] < smin[i - 1]
        if not is_min or smin[i] > 0.5:
            continue
        a, b = ts[i - 1], ts[min(i + 1, K)]
        c = ts[i]
        # offset variable keeps the bounded minimizer's relative tolerance small
        res = minimize_scalar(lambda s: sigmas(c + s)[-1] ** 2, bounds=(a - c, b - c), method="bounded",
                              options={"xatol": 1e-13, "maxiter": 200})
        t_star = c + float(res.x)
        sv = sigmas(t_star)
        mult = int(np.sum(sv < KERNEL_RTOL * max(1.0, sv[0])))
        if mult == 0:
            continue
        if abs(t_star - upto) <= BOUNDARY_TOL:
            raise BoundaryAmbiguous(f"conjugate point at t={t_star:.12g} is within {BOUNDARY_TOL} of upto={upto}")
        if t_star < BOUNDARY_TOL or t_star > upto:
            continue
        if found and abs(found[-1][0] - t_star) < 1e-6:
            continue
        found.append((t_star, mult))
    return found


def count_conjugate_points(metric: ZermeloMetric, record: ClosedGeodesicRecord, upto: float) -> int:
    """Number of conjugate points in (0, upto), counted with multiplicity."""
    return sum(mult for _, mult in conjugate_points(metric, record, upto))


# --------------------------------------------------------------------------
# periodic index


@dataclass(frozen=True)
class IndexResult:
    index: int | None
    nullity: int
    conjugate_count: int
    correction: int | None
    index_range: tuple[int, int]
    return_data: LinearizedReturnData

    def __iter__(self):
        yield self.index
        yield self.nullity

    @property
    def degenerate(self) -> bool:
        return self.nullity > 0

    @property
    def ambiguous(self) -> bool:
        return self.index is None


def _boundary_form(data: LinearizedReturnData) -> np.ndarray | None:
    """Quadratic form of periodic Jacobi fields on their common boundary value q_0."""
    Mqq, Mqe, Meq, Mee = data.blocks()
    k = data.dim
    if np.linalg.cond(Mqe) > 1e9:
        return None
    X = np.linalg.solve(Mqe, np.eye(k) - Mqq)
    Q = Meq + Mee @ X - X
    return 0.5 * (Q + Q.T)


def closed_geodesic_index(metric: ZermeloMetric, record: ClosedGeodesicRecord) -> IndexResult:
    """Morse index and nullity of a closed geodesic (iterates included through ``record.length``)."""
    data = linearized_return_data(metric, record)
    if data.symplectic_defect > SYMPLECTIC_TOL:
        raise NumericalFailure(f"monodromy is not symplectic: defect {data.symplectic_defect:.3e}")
    nullity = data.nullity()
    k = data.dim
    L = record.length
    try:
        conj = count_conjugate_points(metric, record, L)
        at_end = False
    except BoundaryAmbiguous:
        conj = count_conjugate_points(metric, record, L - 1e-6)
        at_end = True
    Q = None if at_end else _boundary_form(data)
    if Q is None:
        return IndexResult(None, nullity, conj, None, (conj, conj + k - 1), data)
    ev = np.linalg.eigvalsh(Q)
    scale = max(1.0, float(np.max(np.abs(ev))))
    if np.any(np.abs(ev) < 1e-8 * scale):
        neg = int(np.sum(ev < -1e-8 * scale))
        zero = int(np.sum(np.abs(ev) < 1e-8 * scale))
        return IndexResult(None, nullity, conj, None, (conj + neg, conj + neg + zero), data)
    corr = int(np.sum(ev < 0))
    return IndexResult(conj + corr, nullity, conj, corr, (conj + corr, conj + corr), data)


def katok_index_formula(metric: ZermeloMetric, j: int, sign: int, r: int = 1) -> tuple[int, int]:
    """Closed-form (index, nullity) of the r-th iterate of c_j^sign.

    In the frame rotating with the field the geodesic is a unit great circle
    and each plane V_i (i != j) carries two normal modes turning at the
    angular speeds 1 + w_i and 1 - w_i. A mode turned by the total angle theta
    contributes 2 floor(theta / 2 pi) + 1 to the index (its last crossing at a
    multiple of 2 pi is counted by the nullity instead).
    """
    rates = metric.field.rates
    if not 1 <= j <= metric.m or sign not in (1, -1) or r < 1:
        raise InvalidInput("need 1 <= j <= m, sign = +-1, r >= 1")
    T = r * 2.0 * math.pi / (1.0 + sign * rates[j - 1])
    index = nullity = 0
    for i, w in enumerate(rates, start=1):
        if i == j:
            continue
        for s in (1, -1):
            turns = (1.0 + s * w) * T / (2.0 * math.pi)
            k = round(turns)
            if abs(turns - k) < 1e-9:
                index += 2 * k - 1
                nullity += 2
            else:
                index += 2 * math.floor(turns) + 1
    return index, nullity


def katok_indices(metric: ZermeloMetric, r: int = 1) -> list[tuple[ClosedGeodesicRecord, IndexResult]]:
    """Numerically computed index data for every (iterated) Katok geodesic."""
    from .dynamics import iterate_geodesic

    out = []
    for rec in katok_closed_geodesics(metric):
        it = iterate_geodesic(rec, r)
        out.append((it, closed_geodesic_index(metric, it)))
    return out


# --------------------------------------------------------------------------
# index sequences


def gamma_invariant(ind1: int, ind2: int) -> Fraction:
    """+-1 when ind(c^2) - ind(c) is even, +-1/2 otherwise; positive iff ind(c) is even."""
    if int(ind1) != ind1 or int(ind2) != ind2 or ind1 < 0 or ind2 < 0:
        raise InvalidInput("indices must be non-negative integers")
    mag = Fraction(1) if (ind2 - ind1) % 2 == 0 else Fraction(1, 2)
    return mag if ind1 % 2 == 0 else -mag


@dataclass(frozen=True)
class IndexSequence:
    """ind(c^r), r = 1..R, with the gamma invariant of c."""

    base_index: int
    values: tuple[int, ...]
    gamma: Fraction

    def __post_init__(self):
        vals = tuple(int(v) for v in self.values)
        if not vals:
            raise InvalidInput("an index sequence needs at least one value")
        if any(v < 0 for v in vals):
            raise InvalidInput("indices are non-negative")
        if vals[0] != self.base_index:
            raise InvalidInput("values[0] must equal base_index")
        g = Fraction(self.gamma)
        if g not in (Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(-1, 2)):
            raise InvalidInput("gamma must be one of +-1, +-1/2")
        if (g > 0) != (vals[0] % 2 == 0):
            raise InvalidInput("gamma > 0 iff ind(c) is even")
        if len(vals) > 1 and gamma_invariant(vals[0], vals[1]) != g:
            raise InvalidInput("gamma is inconsistent with the parity of ind(c^2) - ind(c)")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "gamma", g)

    @classmethod
    def from_values(cls, values: Sequence[int], gamma: Fraction | None = None) -> "IndexSequence":
        vals = tuple(int(v) for v in values)
        if gamma is None:
            if len(vals) < 2:
                raise InvalidInput("gamma cannot be inferred from a single index")
            gamma = gamma_invariant(vals[0], vals[1])
        return cls(vals[0], vals, gamma)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, r: int) -> int:
        """ind(c^r) with 1-based r."""
        if not 1 <= r <= len(self.values):
            raise IndexError(r)
        return self.values[r - 1]


def bott_checks(seq: IndexSequence) -> VerificationReport:
    """Bott lower bound ind(c^r) >= ind(c) (hard check) and monotonicity (soft check)."""
    rep = VerificationReport("bott-checks", inputs={"values": list(seq.values), "gamma": seq.gamma})
    vals = seq.values
    low = [r for r, v in enumerate(vals, start=1) if v < vals[0]]
    rep.check("bott-lower-bound", "bott-lower-bound", not low,
              {"violations": low}, {"violations": []})
    drops = [r for r in range(1, len(vals)) if vals[r] < vals[r - 1]]
    rep.check("bott-monotone", "bott-monotone", not drops, {"drops_after": drops}, {"drops_after": []}, soft=True)
    return rep
