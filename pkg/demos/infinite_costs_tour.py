"""What changes when the cost can be +inf: connectivity vs path-boundedness.

With finite costs, a monotone support always carries a potential built by
chaining through the support.  Infinite costs can cut those chains.  This
tour shows the three regimes on tiny examples:

  1. chains survive (connecting): the chain formula works as usual;
  2. chains are cut but sums stay bounded: a potential still exists, found
     through the difference-constraint system instead of a chain walk;
  3. a marriage-type obstruction: no finite plan at all.
"""

import math
from fractions import Fraction

from otcert import (
    CostTensor,
    Measure,
    Space,
    check_ccm2,
    check_compatibility,
    check_connecting,
    check_path_bounded,
    eta_from_support,
    gen_shift_circle,
    rockafellar_potential,
    solve_inequality_system,
    verify_subgradient,
)
from otcert.numbers import INF

print("== regime 1: infinite entries that do not cut the support's chains ==")
X = Space([0, 1, 2])
c1 = CostTensor.dense([X, X], [[0, 3, INF], [3, 0, 4], [INF, 4, 0]])
res = check_connecting(
    __import__("otcert").SupportSet([X, X], [(0, 0), (1, 1), (2, 2)]), c1
)
print("diagonal support connecting:", res.outcome)

print("\n== regime 2: the circle grid, where no chain joins distinct points ==")
pf = gen_shift_circle(8, math.sqrt(2) / 4)
G, cost = pf.support, pf.cost
print("monotone:        ", check_ccm2(G, cost).outcome)
pb = check_path_bounded(G, cost)
print("path-bounded:    ", pb.outcome, " (uniform chain-sum bound:", pb.info["uniform_bound"], ")")
conn = check_connecting(G, cost)
print("connecting:      ", conn.outcome, " (strong components:", len(conn.witness.components), ")")

# The chain formula from one base cannot reach the other points, yet the
# difference-constraint system still produces a potential: here it is zero.
f = rockafellar_potential(G, cost, base=(0, 0))
print("system potential:", f.values)
print("covers the support:", verify_subgradient(f, G, cost).outcome)

eta = eta_from_support(G, cost)
print("difference constraints feasible:", solve_inequality_system(eta).feasible)

print("\n== regime 3: a blocked row makes transport impossible ==")
Y = Space([0, 1])
c3 = CostTensor.dense([Y, Y], [[INF, INF], [1, 1]])
mu = Measure(Y, (Fraction(1, 2), Fraction(1, 2)))
verdict = check_compatibility(mu, mu, c3)
print("compatibility verdict:", verdict.outcome)
w = verdict.witness
print(
    f"witness subset A={w.subset_labels}: mu(A)={w.mu_mass} plus blocked "
    f"nu-mass {w.nu_mass} exceeds 1"
)
