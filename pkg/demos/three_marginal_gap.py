"""Three marginals: a certified-monotone plan that is still beaten.

With two marginals over finite spaces, cyclic monotonicity of the support is
the whole story: monotone finite-cost plans are optimal, even with infinite
costs around.  With three marginals that guarantee breaks.  The geometric
chain fixture realizes the failure at desk scale: its 'main' plan survives
every small permutation test, yet an exact solve finds a strictly cheaper
plan with the same marginals, and the gap has a closed form of about 0.175.
"""

from otcert import (
    check_ccm_multi,
    check_finitely_optimal,
    construct_splitting,
    gen_geometric_chain,
    integral_cost,
    solve_multi,
)

K = 6
pf = gen_geometric_chain(K)
main = pf.plans["main"]
shift = pf.plans["shift"]
cost = pf.cost

print(f"chain depth K = {K}; labels 1..{2 * K + 1}; rest state absorbs the tail")
print("main plan atoms :", len(main.atoms))
print("shift plan atoms:", len(shift.atoms))

print("\n== the main plan passes the small-scale optimality certificates ==")
G = main.support()
print("monotone up to 4-point rearrangements:", check_ccm_multi(G, cost, kmax=4).outcome)
print("submeasures of size <= 3 all optimal:  ",
      check_finitely_optimal(main, cost, kmax=3).outcome)

print("\n== and yet it is not optimal ==")
value_main = integral_cost(main, cost)
res = solve_multi(pf.measures, cost)
print("cost of main plan :", value_main, f"(~{float(value_main):.9f})")
print("exact optimum     :", res.value, f"(~{float(res.value):.9f})")
gap = value_main - res.value
print("gap               :", gap, f"(~{float(gap):.9f})")
print("optimum == emitted closed form for the shift plan:",
      str(res.value) == pf.metadata["closed_form_cost_shift"])

print("\n== the dual viewpoint agrees: no splitting tuple exists ==")
# Depth 3 keeps the refutation's subset scan small while showing the same
# structure: the full support ladder is the violating submeasure.
pf3 = gen_geometric_chain(3)
G3 = pf3.plans["main"].support()
out = construct_splitting(G3, pf3.cost, base=min(G3.tuples))
print("construct_splitting returned:", type(out).__name__)
print("reason:", out.info["reason"])
w = out.witness
print(
    "refuting submeasure of", len(w.subset), "support points:",
    w.value, "beaten by", w.better_value,
)
print("""
The refutation needs repeated support points: every rearrangement of
distinct points stays blocked by infinite costs, which is exactly why the
small-k certificates above are clean.  The escape route runs through the
rest state, the finite stand-in for the infinite tail.""")
