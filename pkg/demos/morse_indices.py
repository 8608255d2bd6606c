"""Morse indices: the round sphere against the Katok perturbation.

On the round sphere conjugate points sit at multiples of pi with
multiplicity 2(m-1). For the Katok metric the index of each closed
geodesic is computed numerically (conjugate points plus a concavity
correction from the linearized return map) and compared with the
rotating-frame formula.

    python3 demos/morse_indices.py
"""

import math

from fgeodesics import (
    GreatCircle,
    closed_geodesic_index,
    count_conjugate_points,
    great_circle_record,
    katok_closed_geodesics,
    katok_index_formula,
    katok_metric,
    round_index,
)
from fgeodesics.morse import conjugate_points
from fgeodesics.sphere import plane_basis

for m, weights in ((2, (1, 3)), (3, (1, 2, 3))):
    M = katok_metric(weights, 0.0)
    rec = great_circle_record(M, GreatCircle(*plane_basis(m, 1)))
    counts = [count_conjugate_points(M, rec, 2 * math.pi * k - 1e-3) for k in range(1, 5)]
    pts = conjugate_points(M, rec, 2 * math.pi + 0.5)
    print(f"round S^{2 * m - 1}: indices of 1..4 iterates {counts}, expected {[round_index(m, k) for k in range(1, 5)]}")
    print("   conjugate points " + ", ".join(f"{t / math.pi:.6f} pi (x{k})" for t, k in pts))

metric = katok_metric((1, 3), 0.1)
print("\nKatok S^3, weights (1, 3), mu = 0.1")
for rec in katok_closed_geodesics(metric):
    j, sign = int(rec.label[1:-1]), 1 if rec.label.endswith("+") else -1
    res = closed_geodesic_index(metric, rec)
    print(f"  {rec.label:4s} index {res.index} = {res.conjugate_count} conjugate + {res.correction} correction, "
          f"nullity {res.nullity}; formula {katok_index_formula(metric, j, sign)}")
