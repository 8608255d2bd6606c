"""The loop-space side of the two-closed-geodesics argument.

For a given m we print the admissible prime p, the Betti numbers of the
quotient pair, the unique index sequence that balances the Morse
inequalities with equality, why half-integral gamma cannot do so, and the
divisibility contradiction that rules the forced sequence out.

    python3 demos/loop_space_skeleton.py [m]
"""

import sys

from fgeodesics import (
    betti_quotient,
    contradiction_witness,
    forced_index_sequence,
    smallest_admissible_prime,
    verify_theorem_skeleton,
)
from fgeodesics.topology import half_gamma_exclusion

m = int(sys.argv[1]) if len(sys.argv) > 1 else 2
p = smallest_admissible_prime(m)
print(f"m = {m}: smallest prime dividing neither m nor m-1 is p = {p}")
print("quotient Betti numbers up to 6(m-1):", [betti_quotient(m, j) for j in range(6 * (m - 1) + 1)])

seq = forced_index_sequence(m, p)
r = (2 * p - 1) * m
print(f"\nforced sequence (gamma = {seq.gamma}), first 12 of {len(seq)}: {seq.values[:12]}")
print(f"  entries r = {r}, {r + 1} both equal {seq[r]}")

md = half_gamma_exclusion(m)
print(f"\nhalf-integral gamma: Morse inequalities first fail in degree {md.failed_at} (4m-4 = {4 * m - 4})")

rep = contradiction_witness(m, p, 1000)
print(f"\ndivisibility contradiction at bound 1000: {rep.status}")
for c in rep.checks:
    print(f"  {c.id}: {c.status}")

rep = verify_theorem_skeleton(m, p)
print(f"\nfull skeleton: {rep.status}, index bound {rep.data['index_bound']}")
