"""Geodesic flow of Zermelo metrics and closed-geodesic search.

The flow is the Hamiltonian flow of the dual norm on the unit level set. We
integrate the homogeneous extension

    H(x, p) = |x ^ p| + <A x, p>,   |x ^ p|^2 = |x|^2 |p|^2 - <x, p>^2,

on R^{2m} x R^{2m}. Both terms are rotation invariant, so the flow preserves
|x| and <x, p> exactly and the cotangent bundle of the sphere is invariant.
The two terms Poisson-commute, which is why the geodesics of a Katok metric
are psi_t(c(t)) for round great circles c.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DegenerateMetric, IntegrationFailure, InvalidInput
from .sphere import GreatCircle, SpherePoint, great_circle_curve, plane_basis
from .zermelo import ZermeloMetric

log = logging.getLogger(__name__)

DEFAULT_RTOL = 1e-11
DEFAULT_ATOL = 1e-11


# --------------------------------------------------------------------------
# vector field


class _Field:
    """Right-hand side and Jacobian of the extended Hamiltonian system."""

    def __init__(self, metric: ZermeloMetric):
        self.A = metric.field.generator()
        self.n = metric.dim

    def hamiltonian(self, z: np.ndarray) -> float:
        n = self.n
        x, p = z[:n], z[n:]
        return float(math.sqrt(max((x @ x) * (p @ p) - (x @ p) ** 2, 0.0)) + (self.A @ x) @ p)

    def grad(self, z: np.ndarray) -> np.ndarray:
        n = self.n
        x, p = z[:n], z[n:]
        xx, pp, xp = x @ x, p @ p, x @ p
        h = math.sqrt(max(xx * pp - xp * xp, 1e-300))
        gx = (pp * x - xp * p) / h - self.A @ p
        gp = (xx * p - xp * x) / h + self.A @ x
        return np.concatenate([gx, gp])

    def rhs(self, t, z):
        g = self.grad(z)
        n = self.n
        return np.concatenate([g[n:], -g[:n]])

    def jacobian(self, z: np.ndarray) -> np.ndarray:
        n = self.n
        x, p = z[:n], z[n:]
        xx, pp, xp = x @ x, p @ p, x @ p
        h = math.sqrt(max(xx * pp - xp * xp, 1e-300))
        a = xx * p - xp * x
        b = pp * x - xp * p
        eye = np.eye(n)
        da_dx = 2.0 * np.outer(p, x) - np.outer(x, p) - xp * eye
        da_dp = xx * eye - np.outer(x, x)
        db_dx = pp * eye - np.outer(p, p)
        db_dp = 2.0 * np.outer(x, p) - np.outer(p, x) - xp * eye
        h3 = h ** 3
        J = np.empty((2 * n, 2 * n))
        J[:n, :n] = da_dx / h - np.outer(a, b) / h3 + self.A
        J[:n, n:] = da_dp / h - np.outer(a, a) / h3
        J[n:, :n] = -(db_dx / h - np.outer(b, b) / h3)
        J[n:, n:] = -(db_dp / h - np.outer(b, a) / h3) + self.A
        return J

    def rhs_variational(self, t, y):
        k = 2 * self.n
        z = y[:k]
        Phi = y[k:].reshape(k, -1)
        return np.concatenate([self.rhs(t, z), (self.jacobian(z) @ Phi).ravel()])


def flow_map(metric: ZermeloMetric, z0: np.ndarray, T: float, rtol: float = DEFAULT_RTOL,
             atol: float = DEFAULT_ATOL, dense: bool = False):
    """Integrate the extended system from ``z0`` for time ``T``; returns the scipy solution."""
    fld = _Field(metric)
    sol = solve_ivp(fld.rhs, (0.0, T), np.asarray(z0, dtype=float), method="DOP853",
                    rtol=rtol, atol=atol, dense_output=dense)
    if sol.status != 0:
        raise IntegrationFailure(f"geodesic integration failed at t={sol.t[-1]:.6g}: {sol.message}")
    return sol


def flow_with_jacobian(metric: ZermeloMetric, z0: np.ndarray, T: float, columns: np.ndarray | None = None,
                       rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL, dense: bool = False):
    """Integrate the flow together with its linearization applied to ``columns`` (default: identity).

    Returns the scipy solution whose state vector is [z, vec(Phi @ columns)].
    """
    fld = _Field(metric)
    k = 2 * metric.dim
    cols = np.eye(k) if columns is None else np.asarray(columns, dtype=float)
    y0 = np.concatenate([np.asarray(z0, dtype=float), cols.ravel()])
    sol = solve_ivp(fld.rhs_variational, (0.0, T), y0, method="DOP853", rtol=rtol, atol=atol, dense_output=dense)
    if sol.status != 0:
        raise IntegrationFailure(f"variational integration failed at t={sol.t[-1]:.6g}: {sol.message}")
    return sol


# --------------------------------------------------------------------------
# states and trajectories


@dataclass(frozen=True)
class GeodesicState:
    """Point x, covector p (both ambient) and arc-length time."""

    x: np.ndarray
    p: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        p = np.array(self.p, dtype=float)
        if x.shape != p.shape or x.ndim != 1:
            raise InvalidInput("x and p must be vectors of equal length")
        x.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.p])

    @classmethod
    def from_z(cls, z: np.ndarray, time: float = 0.0) -> "GeodesicState":
        n = len(z) // 2
        return cls(z[:n], z[n:], time)


def dual_norm_value(metric: ZermeloMetric, state: GeodesicState) -> float:
    """F*(x, p) at a state, evaluated through the extended Hamiltonian."""
    return _Field(metric).hamiltonian(state.z)


def velocity(metric: ZermeloMetric, state: GeodesicState) -> np.ndarray:
    """dx/dt along the flow, i.e. the unit-speed geodesic velocity."""
    return _Field(metric).rhs(0.0, state.z)[: metric.dim]


def state_from_velocity(metric: ZermeloMetric, x, direction) -> GeodesicState:
    """Unit-level state whose geodesic leaves ``x`` in the direction ``direction``.

    With W = V_mu(x) and y = direction / F(direction), the round unit vector
    u = y - W gives the covector p = u / (1 + <W, u>).
    """
    x = np.asarray(x, dtype=float)
    x = x / np.linalg.norm(x)
    d = np.asarray(direction, dtype=float)
    d = d - (d @ x) * x
    if np.linalg.norm(d) == 0.0:
        raise InvalidInput("direction must have a nonzero tangential part")
    W = metric.field(x)
    w2, wd, dd = W @ W, W @ d, d @ d
    F = (-wd + math.sqrt(wd * wd + (1.0 - w2) * dd)) / (1.0 - w2)
    u = d / F - W
    u /= np.linalg.norm(u)
    return GeodesicState(x, u / (1.0 + W @ u))


def state_from_covector(metric: ZermeloMetric, x, covector) -> GeodesicState:
    """Rescale a covector at ``x`` onto the unit level F* = 1."""
    x = np.asarray(x, dtype=float)
    x = x / np.linalg.norm(x)
    p = np.asarray(covector, dtype=float)
    p = p - (p @ x) * x
    scale = np.linalg.norm(p) + metric.field(x) @ p
    if scale <= 0:
        raise InvalidInput("covector must be nonzero")
    return GeodesicState(x, p / scale)


def exact_flow(metric: ZermeloMetric, state: GeodesicState, t: float) -> GeodesicState:
    """Closed-form flow: great-circle flow of the round part composed with psi_t."""
    x, p = state.x, state.p
    pn = np.linalg.norm(p)
    u = p / pn
    c, s = math.cos(t), math.sin(t)
    rot = metric.field.rotation(t)
    xt = rot @ (c * x + s * u)
    pt = rot @ (pn * (-s * x + c * u))
    return GeodesicState(xt, pt, state.time + t)


def exact_katok_geodesic(metric: ZermeloMetric, gc: GreatCircle, t: float) -> SpherePoint:
    """psi_t(c(t)) for a unit-speed round great circle c."""
    if abs(gc.speed - 1.0) > 1e-12:
        raise InvalidInput("exact_katok_geodesic expects a unit-speed great circle")
    pt, _ = great_circle_curve(gc, t)
    y = metric.field.rotation(t) @ pt.coords
    return SpherePoint(y / np.linalg.norm(y))


@dataclass
class Trajectory:
    """Integrated geodesic; iterating yields :class:`GeodesicState` samples."""

    metric: ZermeloMetric
    t: np.ndarray
    z: np.ndarray
    sol: object = field(repr=False)

    def __iter__(self) -> Iterator[GeodesicState]:
        for k, tk in enumerate(self.t):
            yield GeodesicState.from_z(self.z[:, k], float(tk))

    def __len__(self) -> int:
        return len(self.t)

    def state_at(self, t: float) -> GeodesicState:
        return GeodesicState.from_z(self.sol.sol(t), float(t))

    def energy_defect(self) -> float:
        """max |F* - 1| over the integrator's own steps."""
        fld = _Field(self.metric)
        return max(abs(fld.hamiltonian(self.z[:, k]) - 1.0) for k in range(self.z.shape[1]))

    def constraint_defect(self) -> float:
        n = self.metric.dim
        x, p = self.z[:n], self.z[n:]
        return float(max(np.max(np.abs(np.sum(x * x, axis=0) - 1.0)), np.max(np.abs(np.sum(x * p, axis=0)))))

    def closure_defect(self) -> float:
        return float(np.linalg.norm(self.z[:, -1] - self.z[:, 0]))


def integrate_geodesic(metric: ZermeloMetric, s0: GeodesicState, T: float, tol: float = DEFAULT_RTOL) -> Trajectory:
    """Adaptive DOP853 integration of the unit-speed geodesic flow from ``s0`` for arc length ``T``."""
    if not T > 0 or not tol > 0:
        raise InvalidInput("T and tol must be positive")
    h = dual_norm_value(metric, s0)
    if abs(h - 1.0) > 1e-10:
        raise InvalidInput(f"initial state is not on the unit level: F* - 1 = {h - 1.0:.3e}")
    sol = flow_map(metric, s0.z, T, rtol=tol, atol=tol, dense=True)
    return Trajectory(metric, sol.t + s0.time, sol.y, sol)


# --------------------------------------------------------------------------
# closed geodesic records


@dataclass(frozen=True)
class ClosedGeodesicRecord:
    label: str
    length: float
    initial: GeodesicState
    circle: GreatCircle | None = None
    index: int | None = None
    nullity: int | None = None
    iteration: int = 1
    closure_defect: float | None = None

    @property
    def prime(self) -> bool:
        return self.iteration == 1

    @property
    def prime_length(self) -> float:
        return self.length / self.iteration


def katok_label(j: int, sign: int) -> str:
    return f"c{j}{'+' if sign > 0 else '-'}"


def katok_closed_geodesics(metric: ZermeloMetric) -> list[ClosedGeodesicRecord]:
    """The 2m closed geodesics c_j^{+-} of a Katok metric: great circles of the planes V_j.

    c_j^+ turns with the field and has length 2 pi / (1 + mu p / p_j); c_j^-
    turns against it and has length 2 pi / (1 - mu p / p_j).
    """
    if metric.is_round:
        raise DegenerateMetric("mu = 0 is the round metric: every great circle is closed")
    records = []
    for j, rate in enumerate(metric.field.rates, start=1):
        u, v = plane_basis(metric.m, j)
        for sign in (+1, -1):
            speed = 1.0 + sign * rate
            circle = GreatCircle(u, sign * v, speed)
            st = state_from_velocity(metric, u, sign * v)
            records.append(ClosedGeodesicRecord(katok_label(j, sign), 2.0 * math.pi / speed, st, circle))
    return records


def great_circle_record(metric: ZermeloMetric, gc: GreatCircle, label: str = "g") -> ClosedGeodesicRecord:
    """Closed-geodesic record for a great circle of the round metric (mu = 0 only)."""
    if not metric.is_round:
        raise InvalidInput("great circles are closed geodesics only for the round metric")
    st = state_from_velocity(metric, gc.u, gc.v)
    return ClosedGeodesicRecord(label, 2.0 * math.pi, st, GreatCircle(gc.u, gc.v, 1.0))


def iterate_geodesic(record: ClosedGeodesicRecord, r: int) -> ClosedGeodesicRecord:
    """The r-fold iterate c^r(t) = c(r t): same orbit, r times the length."""
    if int(r) != r or r < 1:
        raise InvalidInput("iteration count must be a positive integer")
    if r == 1:
        return record
    return replace(record, length=record.length * r, iteration=record.iteration * r, index=None, nullity=None)


def record_closure_defect(metric: ZermeloMetric, record: ClosedGeodesicRecord, tol: float = DEFAULT_RTOL) -> float:
    sol = flow_map(metric, record.initial.z, record.length, rtol=tol, atol=tol)
    return float(np.linalg.norm(sol.y[:, -1] - record.initial.z))


# --------------------------------------------------------------------------
# multi-start shooting


@dataclass
class SearchResult:
    """Outcome of :func:`find_closed_geodesics`."""

    records: list[ClosedGeodesicRecord]
    seeds: int
    candidates: int = 0
    dropped: int = 0
    merged: int = 0
    out_of_bound: int = 0
    hits: dict[str, int] = field(default_factory=dict)

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)

    def __getitem__(self, i):
        return self.records[i]

    @property
    def lengths(self) -> list[float]:
        return [r.length for r in self.records]


@dataclass
class _Orbit:
    z0: np.ndarray
    period: float
    sol: object
    field: _Field
    hits: int = 1

    def distance(self, z: np.ndarray) -> float:
        """Distance from ``z`` to the orbit after the best time shift."""
        ts = np.linspace(0.0, self.period, 257)
        pts = self.sol.sol(ts)
        d = np.linalg.norm(pts - z[:, None], axis=0)
        i = int(np.argmin(d))
        if d[i] > 0.5:
            return float(d[i])
        # Newton projection onto the orbit along the flow direction
        s = ts[i]
        best = float(d[i])
        for _ in range(6):
            y = self.sol.sol(s % self.period)
            f = self.field.rhs(0.0, y)
            s -= float((y - z) @ f) / float(f @ f)
            best = min(best, float(np.linalg.norm(self.sol.sol(s % self.period) - z)))
        return best

    def matches(self, z: np.ndarray, T: float, thr: float, len_tol: float) -> bool:
        ratio = T / self.period
        if abs(ratio - round(ratio)) * self.period > len_tol or round(ratio) < 1:
            return False
        return self.distance(z) <= thr


def _seed_states(metric: ZermeloMetric, seeds: int, seed: int) -> list[tuple[GeodesicState, np.ndarray]]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(seeds):
        u = rng.normal(size=metric.dim)
        u /= np.linalg.norm(u)
        v = rng.normal(size=metric.dim)
        v -= (v @ u) * u
        v /= np.linalg.norm(v)
        out.append((state_from_velocity(metric, u, v), v))
    return out


def _section_candidates(metric, st: GeodesicState, normal: np.ndarray, horizon: float, per_seed: int):
    """Returns of the seed trajectory to the section <x, normal> = 0 (increasing) through the seed."""
    n = metric.dim
    fld = _Field(metric)

    def section(t, z):
        return z[:n] @ normal

    section.direction = 1.0
    sol = solve_ivp(fld.rhs, (0.0, horizon), st.z, method="DOP853", rtol=1e-8, atol=1e-8, events=section)
    if sol.status == -1:
        return []
    z0 = st.z
    cands = [(float(np.linalg.norm(zc - z0)), float(tc))
             for tc, zc in zip(sol.t_events[0], sol.y_events[0]) if tc > 0.1]
    cands.sort()
    return [(t, d) for d, t in cands[:per_seed]]


def _residual(fld: _Field, n: int, z: np.ndarray, zT: np.ndarray) -> np.ndarray:
    x, p = z[:n], z[n:]
    return np.concatenate([zT - z, [x @ x - 1.0, x @ p, fld.hamiltonian(z) - 1.0]])


def _polish(metric, z, T, T_max, tol, known: list[_Orbit], max_iter: int = 60):
    """Damped Gauss-Newton (Levenberg-Marquardt) on the closure defect with a phase condition.

    Returns ("new", z, T), ("merged", orbit) or ("failed", None).
    """
    n = metric.dim
    fld = _Field(metric)
    k = 2 * n
    T_min = 0.05
    lam = 1e-3

    def evaluate(z, T, rtol):
        sol = flow_with_jacobian(metric, z, T, rtol=rtol, atol=rtol)
        y = sol.y[:, -1]
        zT = y[:k]
        return _residual(fld, n, z, zT), zT, y[k:].reshape(k, k)

    rtol = 1e-8
    r, zT, Phi = evaluate(z, T, rtol)
    for it in range(max_iter):
        rn = float(np.linalg.norm(r))
        if rtol > DEFAULT_RTOL and rn < 1e-5:
            rtol = DEFAULT_RTOL
            r, zT, Phi = evaluate(z, T, rtol)
            rn = float(np.linalg.norm(r))
        if rtol == DEFAULT_RTOL and rn <= 0.1 * tol:
            return "new", z, T
        for orb in known:
            if rn < 1e-2 and orb.matches(z, T, 1e-3, 1e-3):
                orb.hits += 1
                return "merged", orb
        x, p = z[:n], z[n:]
        f_end = fld.rhs(0.0, zT)
        J = np.zeros((k + 3, k + 1))
        J[:k, :k] = Phi - np.eye(k)
        J[:k, k] = f_end
        J[k, :n] = 2.0 * x
        J[k + 1, :n] = p
        J[k + 1, n:k] = x
        J[k + 2, :k] = fld.grad(z)
        phase = np.concatenate([fld.rhs(0.0, z), [0.0]])
        JtJ = J.T @ J + np.outer(phase, phase)
        g = J.T @ r
        accepted = False
        for _ in range(12):
            step = np.linalg.solve(JtJ + lam * np.diag(np.diag(JtJ) + 1e-12), -g)
            zt, Tt = z + step[:k], float(np.clip(T + step[k], T_min, T_max))
            try:
                rt, zTt, Phit = evaluate(zt, Tt, rtol)
            except Exception:
                lam *= 4.0
                continue
            if np.linalg.norm(rt) < rn:
                z, T, r, zT, Phi = zt, Tt, rt, zTt, Phit
                lam = max(lam / 3.0, 1e-12)
                accepted = True
                break
            lam *= 4.0
        if not accepted:
            if rtol == DEFAULT_RTOL and rn <= tol:
                return "new", z, T
            return "failed", None
    if rtol == DEFAULT_RTOL and float(np.linalg.norm(r)) <= tol:
        return "new", z, T
    return "failed", None


def _prime_period(metric: ZermeloMetric, z: np.ndarray, T: float, tol: float) -> tuple[float, int]:
    """Detect whether a closed orbit of period T is a k-fold iterate; returns (prime period, k)."""
    # every closed orbit of a Zermelo flow of the round sphere has period >= 2 pi / (1 + w)
    k_max = int(T * (1.0 + metric.sup_wind) / (2.0 * math.pi) + 1e-9)
    for k in range(k_max, 1, -1):
        sol = flow_map(metric, z, T / k)
        if np.linalg.norm(sol.y[:, -1] - z) <= max(10.0 * tol, 1e-8):
            return T / k, k
    return T, 1


def _search_one_seed(args):
    metric, st, normal, horizon, bound, tol, per_seed, known = args
    return _run_seed(metric, st, normal, horizon, bound, tol, per_seed, known)


def _run_seed(metric, st, normal, horizon, bound, tol, per_seed, known):
    events = []
    for T0, _ in _section_candidates(metric, st, normal, horizon, per_seed):
        out = _polish(metric, st.z.copy(), T0, 2.0 * horizon, tol, known)
        events.append(out)
        if out[0] == "merged":
            break
    return events


def find_closed_geodesics(metric: ZermeloMetric, length_bound: float, seeds: int = 200, tol: float = 1e-9,
                          seed: int = 0, per_seed: int = 2, workers: int | None = None) -> SearchResult:
    """Multi-start shooting search for prime closed geodesics of length <= ``length_bound``.

    Each seed is a random unit state; crossings of its own section are
    candidate periods, which are polished by damped Newton on the closure
    defect. Polished orbits are reduced to their prime period and merged when
    they coincide with a known orbit after a time shift (Hausdorff distance
    below ``10 * tol``).

    ``workers`` (default: ``$FG_THREADS`` or 1) runs seeds in a process pool.
    Parallel runs see only orbits found in earlier batches for early merging,
    so the counters (but not the records) can differ from a serial run.
    """
    if metric.is_round:
        raise DegenerateMetric("mu = 0 is the round metric: closed geodesics come in continuous families")
    if not length_bound > 0:
        raise InvalidInput("length_bound must be positive")
    if int(seeds) != seeds or seeds < 1:
        raise InvalidInput("seeds must be a positive integer")
    if not tol > 0:
        raise InvalidInput("tol must be positive")
    if workers is None:
        workers = int(os.environ.get("FG_THREADS", "1") or 1)
    workers = max(1, int(workers))

    horizon = 1.25 * length_bound + 0.5
    result = SearchResult(records=[], seeds=int(seeds))
    known: list[_Orbit] = []
    seed_list = _seed_states(metric, int(seeds), seed)

    def absorb(events):
        for ev in events:
            result.candidates += 1
            if ev[0] == "failed":
                result.dropped += 1
            elif ev[0] == "merged":
                result.merged += 1
            else:
                _, z, T = ev
                T, _k = _prime_period(metric, z, T, tol)
                dup = next((o for o in known if o.matches(z, T, 10.0 * tol, 1e-6)), None)
                if dup is not None:
                    dup.hits += 1
                    result.merged += 1
                    continue
                sol = flow_map(metric, z, T, dense=True)
                known.append(_Orbit(z, T, sol, _Field(metric)))

    if workers == 1:
        for st, normal in seed_list:
            absorb(_run_seed(metric, st, normal, horizon, length_bound, tol, per_seed, known))
    else:
        batch = 4 * workers
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i in range(0, len(seed_list), batch):
                chunk = seed_list[i:i + batch]
                args = [(metric, st, nv, horizon, length_bound, tol, per_seed, list(known)) for st, nv in chunk]
                for events in pool.map(_search_one_seed, args):
                    absorb(events)

    known.sort(key=lambda o: o.period)
    for idx, orb in enumerate(known):
        if orb.period > length_bound:
            result.out_of_bound += 1
            continue
        defect = float(np.linalg.norm(orb.sol.y[:, -1] - orb.z0))
        st = GeodesicState.from_z(orb.z0)
        label = f"g{len(result.records)}"
        result.records.append(ClosedGeodesicRecord(label, orb.period, st, None, closure_defect=defect))
        result.hits[label] = orb.hits
    return result


def same_orbit(metric: ZermeloMetric, a: ClosedGeodesicRecord, b: ClosedGeodesicRecord, tol: float = 1e-7) -> bool:
    """True when two records trace the same oriented orbit with the same length."""
    if abs(a.length - b.length) > max(tol, 1e-6):
        return False
    sol = flow_map(metric, a.initial.z, a.length, dense=True)
    orb = _Orbit(a.initial.z, a.length, sol, _Field(metric))
    return orb.distance(b.initial.z) <= tol
