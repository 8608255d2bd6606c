"""Exact integer bookkeeping for the loop-space argument.

Everything here is Python integers or fractions. The rank tables are the
free ranks of the relevant homology groups in closed form; the Morse
recursion, the forced iterate-index sequence of a hypothetical single closed
geodesic and the final divisibility contradiction are built on top of them.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import InternalInconsistency, InvalidInput
from .morse import IndexSequence, gamma_invariant
from .report import VerificationReport

log = logging.getLogger(__name__)


def _check_m(m) -> int:
    if isinstance(m, bool) or int(m) != m or m < 2:
        raise InvalidInput(f"m must be an integer >= 2, got {m!r}")
    return int(m)


def _check_degree(j) -> int:
    if isinstance(j, bool) or int(j) != j or j < 0:
        raise InvalidInput(f"degree must be a non-negative integer, got {j!r}")
    return int(j)


# --------------------------------------------------------------------------
# primes


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    return all(n % d for d in range(3, math.isqrt(n) + 1, 2))


def smallest_admissible_prime(m: int) -> int:
    """Least prime dividing neither m nor m - 1 (never 2, since m(m - 1) is even)."""
    m = _check_m(m)
    q = 3
    while True:
        if is_prime(q) and m % q and (m - 1) % q:
            return q
        q += 2


def admissible_prime_table(m_max: int) -> np.ndarray:
    """p_m for m = 2..m_max, vectorised over m (entry i belongs to m = i + 2)."""
    if m_max < 2:
        raise InvalidInput("m_max must be >= 2")
    ms = np.arange(2, m_max + 1, dtype=np.int64)
    out = np.zeros_like(ms)
    todo = np.ones(ms.shape, dtype=bool)
    q = 3
    while todo.any():
        if is_prime(q):
            ok = todo & (ms % q != 0) & ((ms - 1) % q != 0)
            out[ok] = q
            todo &= ~ok
        q += 2
    return out


# --------------------------------------------------------------------------
# rank tables


class Space(str, enum.Enum):
    FREE_LOOP = "FreeLoopPair"
    QUOTIENT = "QuotientPair"
    UNIT_TANGENT = "UnitTangent"
    GRASSMANNIAN = "Grassmannian"


def betti_free_loop(m: int, j: int) -> int:
    """Rank of H_j(Lambda, Lambda^0) for S^{2m-1}."""
    m, j = _check_m(m), _check_degree(j)
    d = 2 * (m - 1)
    if j >= d and j % d == 0:
        return 1
    if j % d == 1 and (j - 1) // d >= 2:
        return 1
    return 0


def betti_quotient(m: int, j: int) -> int:
    """Rank of H_j(Lambda/S^1, Lambda^0/S^1) for S^{2m-1}."""
    m, j = _check_m(m), _check_degree(j)
    d = 2 * (m - 1)
    if j % d == 0 and j // d >= 2:
        return 2
    if j % 2 == 0 and j >= d:
        return 1
    return 0


def homology_unit_tangent(m: int, j: int) -> int:
    m, j = _check_m(m), _check_degree(j)
    return int(j in (0, 2 * m - 2, 2 * m - 1, 4 * m - 3))


def homology_grassmannian(m: int, j: int) -> int:
    m, j = _check_m(m), _check_degree(j)
    if j == 2 * m - 2:
        return 2
    return int(j in (0, 4 * m - 4))


_RANKS = {
    Space.FREE_LOOP: betti_free_loop,
    Space.QUOTIENT: betti_quotient,
    Space.UNIT_TANGENT: homology_unit_tangent,
    Space.GRASSMANNIAN: homology_grassmannian,
}


@dataclass(frozen=True)
class BettiTable:
    space: Space
    m: int
    ranks: Mapping[int, int]
    max_degree: int

    def __getitem__(self, j: int) -> int:
        j = _check_degree(j)
        if j > self.max_degree:
            raise KeyError(j)
        return self.ranks.get(j, 0)

    def nonzero(self) -> dict[int, int]:
        return {j: r for j, r in sorted(self.ranks.items()) if r}

    def as_list(self) -> list[int]:
        return [self[j] for j in range(self.max_degree + 1)]


def betti_table(space: Space | str, m: int, max_degree: int) -> BettiTable:
    space = Space(space)
    m = _check_m(m)
    max_degree = _check_degree(max_degree)
    fn = _RANKS[space]
    ranks = {j: r for j in range(max_degree + 1) if (r := fn(m, j))}
    return BettiTable(space, m, ranks, max_degree)


# --------------------------------------------------------------------------
# local critical groups and Morse bookkeeping

READINGS = ("display", "parity")


def _counts(r: int, gamma: Fraction, reading: str) -> bool:
    if reading not in READINGS:
        raise InvalidInput(f"reading must be one of {READINGS}")
    g = Fraction(gamma)
    if reading == "display":
        return r % 2 == 1 or g == 1
    return r % 2 == 1 or abs(g) == 1


def local_betti(r: int, index_r: int, gamma, equivariant: bool, reading: str = "display") -> dict[int, int]:
    """Nonzero local ranks of c^r in the single-geodesic scenario.

    ``reading="display"`` counts even iterates only for gamma = 1;
    ``reading="parity"`` counts them for gamma = +-1.
    """
    if int(r) != r or r < 1 or int(index_r) != index_r or index_r < 0:
        raise InvalidInput("need r >= 1 and index_r >= 0")
    if not _counts(int(r), Fraction(gamma), reading):
        return {}
    if equivariant:
        return {int(index_r): 1}
    return {int(index_r): 1, int(index_r) + 1: 1}


def morse_counts(values: Iterable[int], gamma, equivariant: bool = True, reading: str = "display",
                 max_degree: int | None = None) -> dict[int, int]:
    """v_j = sum over r of the local ranks of c^r (1-based r over ``values``)."""
    v: dict[int, int] = {}
    for r, ind in enumerate(values, start=1):
        for j, b in local_betti(r, ind, gamma, equivariant, reading).items():
            if max_degree is None or j <= max_degree:
                v[j] = v.get(j, 0) + b
    return v


@dataclass(frozen=True)
class MorseData:
    v: dict[int, int]
    beta: dict[int, int]
    q: dict[int, int] | None
    max_degree: int
    failed_at: int | None = None

    @property
    def ok(self) -> bool:
        return self.q is not None

    @property
    def equality(self) -> bool:
        """True when q vanishes identically, i.e. v_j = beta_j for every degree."""
        return self.ok and not any(self.q.values())


def morse_inequalities(v: Mapping[int, int], beta: Mapping[int, int], max_degree: int) -> MorseData:
    """Solve v_j = beta_j + q_j + q_{j-1} for q_j >= 0, degree by degree from q_{-1} = 0.

    On the first degree where q_j < 0 the result has ``q=None`` and ``failed_at=j``.
    """
    max_degree = _check_degree(max_degree)
    for mp in (v, beta):
        if any(int(k) < 0 or int(val) < 0 for k, val in mp.items()):
            raise InvalidInput("counts must be non-negative maps on non-negative degrees")
    vv = {int(k): int(x) for k, x in v.items()}
    bb = {int(k): int(x) for k, x in beta.items()}
    q: dict[int, int] = {}
    prev = 0
    for j in range(max_degree + 1):
        qj = vv.get(j, 0) - bb.get(j, 0) - prev
        if qj < 0:
            return MorseData(vv, bb, None, max_degree, failed_at=j)
        if qj:
            q[j] = qj
        prev = qj
    return MorseData(vv, bb, q, max_degree)


def quotient_betti_map(m: int, max_degree: int) -> dict[int, int]:
    return betti_table(Space.QUOTIENT, m, max_degree).nonzero()


# --------------------------------------------------------------------------
# forced index sequence


@dataclass(frozen=True)
class ForcedIndexSequence(IndexSequence):
    """The unique admissible sequence together with its uniqueness certificate.

    ``certificate[r]`` maps every alternative value of ind(c^r) (within the
    admissible window) to the degree whose Morse equality it would break.
    """

    m: int = 0
    p: int = 0
    max_degree: int = 0
    certificate: tuple[dict[int, int], ...] = field(default=(), repr=False)

    def anchor_positions(self) -> tuple[int, int]:
        r = (2 * self.p - 1) * self.m
        return r, r + 1

    def anchor_values(self) -> tuple[int, int]:
        a, b = self.anchor_positions()
        return self[a], self[b]


def forced_index_sequence(m: int, p: int | None = None) -> ForcedIndexSequence:
    """Greedy construction of the monotone gamma = 1 sequence with v_j = beta_j up to 4p(m - 1) + 2.

    The r-th entry is the smallest value whose degree still has unused rank.
    Any other choice breaks an equality: a smaller or odd value overfills
    its own degree, a larger value leaves the chosen degree short forever
    because later entries cannot decrease.
    """
    m = _check_m(m)
    p0 = smallest_admissible_prime(m)
    if p is None:
        p = p0
    elif p != p0:
        if not is_prime(p) or m % p == 0 or (m - 1) % p == 0:
            raise InvalidInput(f"p={p} must be a prime dividing neither m nor m - 1")
        log.warning("p=%d differs from the smallest admissible prime %d", p, p0)
    D = 4 * p * (m - 1) + 2
    beta = quotient_betti_map(m, D)
    used: dict[int, int] = {}
    values: list[int] = []
    cert: list[dict[int, int]] = []
    cur = 0
    while True:
        while cur <= D and used.get(cur, 0) >= beta.get(cur, 0):
            cur += 1
        if cur > D:
            break
        prev = values[-1] if values else 0
        alt: dict[int, int] = {}
        for a in range(prev, D + 1):
            if a == cur:
                continue
            alt[a] = a if a < cur else cur
        values.append(cur)
        used[cur] = used.get(cur, 0) + 1
        cert.append(alt)
    seq = ForcedIndexSequence(values[0], tuple(values), Fraction(1), m=m, p=p, max_degree=D, certificate=tuple(cert))
    if values[0] != 2 * m - 2:
        raise InternalInconsistency("forced sequence must start at 2m - 2")
    md = morse_inequalities(morse_counts(values, 1), beta, D)
    if not md.equality:
        raise InternalInconsistency("forced sequence does not satisfy the Morse equalities")
    if seq.anchor_values() != (4 * p * (m - 1),) * 2:
        raise InternalInconsistency(f"anchor entries are {seq.anchor_values()}, not 4p(m-1)")
    return seq


def verify_certificate(seq: ForcedIndexSequence) -> bool:
    """Re-check every certificate entry on the perturbed prefix it describes."""
    beta = quotient_betti_map(seq.m, seq.max_degree)
    counts: dict[int, int] = {}
    for r, (chosen, alts) in enumerate(zip(seq.values, seq.certificate), start=1):
        for a, deg in alts.items():
            if a < chosen:
                # prefix with a (instead of chosen) overfills degree a
                if counts.get(a, 0) + 1 <= beta.get(a, 0) or deg != a:
                    return False
            else:
                # later entries are >= a > chosen, so degree chosen stays short
                if counts.get(chosen, 0) >= beta.get(chosen, 0) or deg != chosen:
                    return False
        counts[chosen] = counts.get(chosen, 0) + 1
    return True


def half_gamma_sequence(m: int, length: int) -> IndexSequence:
    """Strictly increasing sequence 2m-2, 2m-1, 2m, ... (gamma = +1/2: ind(c^2) = 2m - 1)."""
    m = _check_m(m)
    if length < 2:
        raise InvalidInput("length must be >= 2")
    vals = tuple(2 * m - 2 + r for r in range(length))
    return IndexSequence(vals[0], vals, gamma_invariant(vals[0], vals[1]))


def half_gamma_exclusion(m: int) -> MorseData:
    """Morse recursion for the strictly increasing gamma = 1/2 scenario; expected to fail at 4m - 4."""
    m = _check_m(m)
    D = 4 * m - 2
    seq = half_gamma_sequence(m, D - (2 * m - 2) + 1)
    v = morse_counts(seq.values, seq.gamma, equivariant=True, max_degree=D)
    return morse_inequalities(v, quotient_betti_map(m, D), D)


# --------------------------------------------------------------------------
# multipliers and the divisibility contradiction


def projection_multiplier(k: int) -> int:
    if int(k) != k or k < 1:
        raise InvalidInput("k must be a positive integer")
    return int(k)


def transfer_multiplier(k: int) -> int:
    return 2 * projection_multiplier(k)


def level_projection_multiplier(r: int) -> int:
    if int(r) != r or r < 1:
        raise InvalidInput("r must be a positive integer")
    return int(r)


@dataclass(frozen=True)
class DiagramWitness:
    m: int
    p: int
    alpha: int
    beta: int
    w: int
    z: int

    @property
    def coprime(self) -> bool:
        return math.gcd(self.alpha, self.beta) == 1

    def satisfies(self) -> bool:
        m, p = self.m, self.p
        return (p * (2 * m * self.alpha - self.w) == (m - 1) * self.alpha
                and p * (2 * m * self.beta - self.z) == m * self.beta)


def _check_witness_prime(m: int, p: int) -> None:
    if int(p) != p or not is_prime(int(p)):
        raise InvalidInput(f"p={p!r} is not a prime")
    if m % p == 0 or (m - 1) % p == 0:
        raise InvalidInput(f"p={p} divides m={m} or m-1={m - 1}")


def divisibility_search(m: int, p: int, bound: int) -> list[DiagramWitness]:
    """All coprime solutions with |alpha|, |beta| <= bound (w, z forced by the equations)."""
    m = _check_m(m)
    _check_witness_prime(m, p)
    if int(bound) != bound or bound < 1:
        raise InvalidInput("bound must be a positive integer")
    rng = np.arange(-bound, bound + 1, dtype=np.int64)
    alphas = rng[((m - 1) * rng) % p == 0]  # w = 2m alpha - (m-1) alpha / p must be an integer
    betas = rng[(m * rng) % p == 0]
    g = np.gcd.outer(alphas, betas)
    hits = np.argwhere(g == 1)
    out = []
    for i, k in hits:
        a, b = int(alphas[i]), int(betas[k])
        wit = DiagramWitness(m, p, a, b, 2 * m * a - (m - 1) * a // p, 2 * m * b - m * b // p)
        if wit.satisfies():
            out.append(wit)
    return out


def contradiction_witness(m: int, p: int, bound: int = 1000) -> VerificationReport:
    """Symbolic and exhaustive check that the divisibility equations have no coprime solution."""
    m = _check_m(m)
    _check_witness_prime(m, p)
    rep = VerificationReport("contradiction-witness", inputs={"m": m, "p": p, "bound": bound})
    # the diagram's diagonal multipliers reduce to the stated equations
    r = (2 * p - 1) * m
    rep.check("diagram-reduction", "divisibility-symbolic",
              2 * m * p - (r + 1) == m - 1 and 2 * m * p - r == m,
              [2 * m * p - (r + 1), 2 * m * p - r], [m - 1, m])
    # p | (m-1) alpha forces alpha = 0 mod p because m - 1 is a unit mod p; same for beta with m
    a_res = [a for a in range(p) if ((m - 1) * a) % p == 0]
    b_res = [b for b in range(p) if (m * b) % p == 0]
    forced = a_res == [0] and b_res == [0]
    rep.check("p-divides-alpha-and-beta", "divisibility-symbolic", forced,
              {"alpha_mod_p": a_res, "beta_mod_p": b_res}, {"alpha_mod_p": [0], "beta_mod_p": [0]})
    sols = divisibility_search(m, p, bound)
    rep.check("no-coprime-solution", "divisibility-search", not sols, len(sols), 0)
    rep.attach("inverse_of_m_minus_1_mod_p", pow(m - 1, -1, p))
    rep.attach("inverse_of_m_mod_p", pow(m, -1, p))
    return rep


# --------------------------------------------------------------------------
# theorem skeleton


def index_bound(m: int, p: int | None = None) -> int:
    m = _check_m(m)
    p = smallest_admissible_prime(m) if p is None else p
    return 4 * p * (m - 1) + 2


def verify_theorem_skeleton(m: int, p: int | None = None, bound: int = 1000) -> VerificationReport:
    """Run every finite step of the single-geodesic contradiction for one m."""
    m = _check_m(m)
    p_min = smallest_admissible_prime(m)
    if p is None:
        p = p_min
    else:
        _check_witness_prime(m, p)
    rep = VerificationReport("theorem", inputs={"m": m, "p": p, "bound": bound})
    rep.check("prime-range", "prime-lemma", 3 <= p_min <= m + 2, p_min, [3, m + 2])
    rep.check("prime-is-least", "prime-lemma", p == p_min, p, p_min, soft=True)

    D = 4 * p * (m - 1) + 2
    rep.check("quotient-rank-4m-4", "quotient-top", betti_quotient(m, 4 * m - 4) == 2,
              betti_quotient(m, 4 * m - 4), 2)

    seq = forced_index_sequence(m, p)
    md = morse_inequalities(morse_counts(seq.values, seq.gamma), quotient_betti_map(m, D), D)
    rep.check("forced-sequence-morse-equalities", "morse-equalities", md.equality,
              {"failed_at": md.failed_at, "q_nonzero": md.q or {}}, {"failed_at": None, "q_nonzero": {}})
    rep.check("forced-sequence-start", "forced-sequence", seq.values[0] == 2 * m - 2, seq.values[0], 2 * m - 2)
    rep.check("forced-sequence-unique", "forced-sequence", verify_certificate(seq), True, True)
    pos = seq.anchor_positions()
    rep.check("forced-sequence-anchor", "forced-sequence-anchor",
              seq.anchor_values() == (4 * p * (m - 1),) * 2,
              {"positions": pos, "values": seq.anchor_values()}, {"positions": pos, "values": [4 * p * (m - 1)] * 2})

    half = half_gamma_exclusion(m)
    rep.check("gamma-half-excluded", "gamma-half-exclusion", half.failed_at == 4 * m - 4,
              half.failed_at, 4 * m - 4)

    rep.check("level-multipliers", "level-multiplier",
              (level_projection_multiplier(pos[1]), level_projection_multiplier(pos[0])) == (pos[1], pos[0]),
              [level_projection_multiplier(pos[1]), level_projection_multiplier(pos[0])], [pos[1], pos[0]])
    rep.check("projection-multiplier", "projection-multiplier", projection_multiplier(p) == p,
              projection_multiplier(p), p)

    rep.merge(contradiction_witness(m, p, bound), prefix="witness:")
    rep.attach("p", p)
    rep.attach("index_bound", D)
    rep.attach("forced_sequence", list(seq.values))
    rep.attach("quotient_ranks", quotient_betti_map(m, D))
    rep.attach("verdict", "the single-closed-geodesic assumption is contradictory for this m"
               if rep.passed else "skeleton check failed")
    return rep
