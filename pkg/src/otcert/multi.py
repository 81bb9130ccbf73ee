"""Multi-marginal and bottleneck certificates: monotonicity, splitting tuples.

The multi-marginal notion reassigns coordinates 2..N of a k-tuple of support
points by independent permutations and asks that the total (or, for the
bottleneck variant, the maximum) cost never drops.  Splitting tuples are the
dual objects: N per-marginal functions summing to at most the cost everywhere
and exactly to it on the support.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Optional, Sequence

from .core import (
    CostTensor,
    Coupling,
    Measure,
    PermutationWitness,
    Space,
    SplittingViolationWitness,
    SubmeasureWitness,
    SupportSet,
    FarkasWitness,
    Verdict,
    integral_cost,
    linf_cost,
)
from .errors import (
    BudgetExceeded,
    InfiniteCostError,
    InputError,
    PreconditionFailed,
    ShapeError,
)
from .lp import solve_lp
from .monotone import check_ccm2
from .numbers import (
    FLOAT,
    INF,
    NEG_INF,
    RATIONAL,
    TOL,
    Number,
    is_neg_inf,
    is_pos_inf,
    leq,
    numbers_equal,
    require_same_mode,
)
from .potential import PotentialVector, c_transform, verify_subgradient
from .solve import solve_linf, solve_multi

ENUMERATION_BUDGET = 10**8


@dataclass(frozen=True)
class SplittingTuple:
    """Per-marginal value vectors (phi_1, ..., phi_N), each in [-inf, +inf).

    When ``base`` is set the tuple is normalized so that every phi_i is
    bounded by the cost along the base tuple's axis line:
    phi_i(x) <= c(base_1, ..., base_{i-1}, x, base_{i+1}, ..., base_N).
    """

    potentials: tuple
    base: Optional[tuple] = None

    def __post_init__(self):
        for pv in self.potentials:
            if pv.attains_plus_inf:
                raise InputError("splitting tuples cannot contain +inf values")

    @property
    def n_marginals(self) -> int:
        return len(self.potentials)

    def value(self, axis: int, i: int) -> Number:
        return self.potentials[axis].value(i)

    def sum_at(self, idx: tuple) -> Number:
        """Sum of the component values at an index tuple; -inf absorbs."""
        total = None
        for axis, i in enumerate(idx):
            v = self.potentials[axis].value(i)
            if is_neg_inf(v):
                return NEG_INF
            total = v if total is None else total + v
        return total


def _support_cost_check(G: SupportSet, c: CostTensor):
    if G.n_marginals != c.n_marginals or any(
        gs.labels != cs.labels for gs, cs in zip(G.spaces, c.spaces)
    ):
        raise ShapeError("support set and cost tensor live on different spaces")
    for t in G.sorted_tuples():
        if is_pos_inf(c.value(t)):
            raise InfiniteCostError(f"support tuple {t} has infinite cost", offending=t)


def _enumeration_estimate(g: int, kmax: int, n_marginals: int) -> int:
    total = 0
    for k in range(2, kmax + 1):
        if k > g:
            break
        total += comb(g, k) * factorial(k) ** (n_marginals - 1) * k
    return total


def _budget_guard(g: int, kmax: int, n_marginals: int):
    est = _enumeration_estimate(g, kmax, n_marginals)
    if est > ENUMERATION_BUDGET:
        raise BudgetExceeded(
            f"enumeration needs about {est} elementary comparisons, above the "
            f"budget {ENUMERATION_BUDGET}; lower kmax or use the LP-backed "
            "finite-optimality check, which is exact at kmax = |support|",
            estimate=est,
            budget=ENUMERATION_BUDGET,
        )


def check_ccm_multi(G: SupportSet, c: CostTensor, kmax: int, method: str = "bruteforce") -> Verdict:
    """Multi-marginal cyclic monotonicity up to subsets of size ``kmax``.

    bruteforce: all size-k subsets of distinct support points and all
    (N-1)-tuples of permutations of coordinates 2..N; complete over such
    subsets iff kmax >= |G|.  Rearrangements that use a support point several
    times are not enumerated here; they are covered by the solve-backed
    route.  lp: for each subset compare the uniform submeasure against an
    exact solve of its own marginals (the finite-optimality correspondence),
    which sees repeated-point rearrangements of any multiplicity and is much
    cheaper for large k.  Two marginals delegate to the exact negative-cycle
    method, which is complete regardless of kmax (cycles never need repeats).
    """
    _support_cost_check(G, c)
    if kmax < 1:
        raise InputError("kmax must be >= 1")
    if G.n_marginals == 2 and method == "bruteforce":
        v = check_ccm2(G, c, method="exact")
        return Verdict(v.outcome, v.witness, dict(v.info, delegated="check_ccm2"))
    if method == "lp":
        return _subset_solve_scan(G, c, kmax, "integral")
    if method != "bruteforce":
        raise InputError(f"unknown method {method!r}")
    _budget_guard(len(G), kmax, G.n_marginals)
    return _permutation_scan(G, c, kmax, comparison="sum")


def check_icm(G: SupportSet, c: CostTensor, kmax: int) -> Verdict:
    """Bottleneck (max-based) monotonicity up to subsets of size ``kmax``."""
    _support_cost_check(G, c)
    if kmax < 1:
        raise InputError("kmax must be >= 1")
    _budget_guard(len(G), kmax, G.n_marginals)
    return _permutation_scan(G, c, kmax, comparison="max")


def _permutation_scan(G: SupportSet, c: CostTensor, kmax: int, comparison: str) -> Verdict:
    nodes = G.sorted_tuples()
    n_marg = G.n_marginals
    mode = c.mode
    strict_gap = TOL if mode == FLOAT else 0
    value = c.value
    for k in range(2, min(kmax, len(nodes)) + 1):
        identity = tuple(range(k))
        perms = list(itertools.permutations(range(k)))
        for subset in itertools.combinations(nodes, k):
            diag = [value(t) for t in subset]
            if comparison == "sum":
                original = sum(diag)
            else:
                original = max(diag)
            for sigmas in itertools.product(perms, repeat=n_marg - 1):
                if all(s == identity for s in sigmas):
                    continue
                # Normalized costs are >= 0, so a partial sum (or running max)
                # that already reaches the original can never violate.
                reassigned = 0 if comparison == "sum" else NEG_INF
                candidate = True
                for i in range(k):
                    t = (subset[i][0],) + tuple(
                        subset[sigmas[a][i]][a + 1] for a in range(n_marg - 1)
                    )
                    v = value(t)
                    if is_pos_inf(v):
                        candidate = False
                        break
                    if comparison == "sum":
                        reassigned += v
                    elif v > reassigned:
                        reassigned = v
                    if reassigned >= original:
                        candidate = False
                        break
                if not candidate:
                    continue
                gain = original - reassigned
                if gain > strict_gap:
                    off = c.offset * k if comparison == "sum" else c.offset
                    witness = PermutationWitness(
                        subset,
                        sigmas,
                        original + off,
                        reassigned + off,
                        comparison,
                    )
                    return Verdict(False, witness, info={"kmax": kmax})
    complete = kmax >= len(nodes)
    return Verdict(True, info={"kmax": kmax, "complete": complete})


def restricted_problem(c: CostTensor, subset: Sequence[tuple]):
    """Sub-spaces, sub-tensor and index maps spanned by a set of index tuples.

    The competing couplings of a submeasure share its marginals, so they only
    use labels appearing in the subset; restricting the solve to those labels
    is exact and keeps the LPs tiny.
    """
    n_marg = c.n_marginals
    used = [sorted({t[a] for t in subset}) for a in range(n_marg)]
    maps = [{orig: k for k, orig in enumerate(u)} for u in used]
    spaces = [
        Space([c.spaces[a].labels[i] for i in used[a]], name=c.spaces[a].name)
        for a in range(n_marg)
    ]

    def build(shape_pos, prefix):
        a = len(prefix)
        if a == n_marg:
            return c.value(tuple(prefix))
        return [build(shape_pos, prefix + [used[a][k]]) for k in range(len(used[a]))]

    entries = build(None, [])
    sub = CostTensor.dense(spaces, entries, c.mode)
    return sub, used, maps, spaces


def _uniform_submeasure(subset, maps, spaces, mode):
    k = len(subset)
    w = Fraction(1, k) if mode == RATIONAL else 1.0 / k
    atoms = {}
    for t in subset:
        local = tuple(maps[a][t[a]] for a in range(len(t)))
        atoms[local] = atoms.get(local, 0) + w
    return Coupling(spaces, atoms, mode)


def _subset_solve_scan(G: SupportSet, c: CostTensor, kmax: int, objective: str) -> Verdict:
    """Shared engine: uniform submeasures on support subsets vs exact solves."""
    nodes = G.sorted_tuples()
    n_subsets = sum(comb(len(nodes), k) for k in range(1, min(kmax, len(nodes)) + 1))
    if n_subsets > 200_000:
        raise BudgetExceeded(
            f"{n_subsets} support subsets exceed the solve-backed budget; lower kmax",
            estimate=n_subsets,
            budget=200_000,
        )
    mode = c.mode
    solver = solve_multi if objective == "integral" else solve_linf
    coster = integral_cost if objective == "integral" else linf_cost
    for k in range(1, min(kmax, len(nodes)) + 1):
        for subset in itertools.combinations(nodes, k):
            sub, used, maps, spaces = restricted_problem(c, subset)
            alpha = _uniform_submeasure(subset, maps, spaces, mode)
            mus = [
                Measure(
                    spaces[a],
                    _marginal_weights(alpha, a, len(spaces[a])),
                    mode,
                )
                for a in range(len(spaces))
            ]
            res = solver(mus, sub)
            alpha_value = coster(alpha, sub)
            if res.status != "optimal":
                continue  # alpha itself is finite, solver cannot miss it
            gap = alpha_value - res.value
            if (mode == RATIONAL and gap > 0) or (mode == FLOAT and gap > TOL):
                better = tuple(
                    (tuple(used[a][i] for a, i in enumerate(t)), w)
                    for t, w in sorted(res.plan.atoms.items())
                )
                witness = SubmeasureWitness(subset, alpha_value, res.value, better)
                return Verdict(False, witness, info={"kmax": kmax, "objective": objective})
    return Verdict(True, info={"kmax": kmax, "objective": objective,
                               "complete": kmax >= len(nodes)})


def _marginal_weights(g: Coupling, axis: int, n: int):
    zero = Fraction(0) if g.mode == RATIONAL else 0.0
    weights = [zero] * n
    for idx, w in g.atoms.items():
        weights[idx[axis]] += w
    return tuple(weights)


def check_finitely_optimal(g: Coupling, c: CostTensor, kmax: int,
                           objective: str = "integral") -> Verdict:
    """Check that small submeasures of a plan are optimal for their marginals.

    For every support subset of size <= kmax, the uniform submeasure is
    compared against an exact solve of the problem with its own marginals
    (integral or bottleneck objective).  Uniform weights suffice at this
    scale: a cheaper competitor for some submeasure yields one for a uniform
    one by rational approximation of the weights.
    """
    if objective not in ("integral", "linf"):
        raise InputError(f"unknown objective {objective!r}")
    require_same_mode(g, c)
    G = g.support()
    _support_cost_check(G, c)
    if kmax < 1:
        raise InputError("kmax must be >= 1")
    return _subset_solve_scan(G, c, kmax, objective)


def verify_splitting(t: SplittingTuple, c: CostTensor, G: SupportSet) -> Verdict:
    """Check the defining inequalities of a splitting tuple.

    True iff sum_i phi_i(x_i) <= c(x) on every index tuple (tuples where the
    sum is -inf are vacuous) with equality, exact or within tolerance, on
    every tuple of G.  The first violated tuple in lexicographic order is the
    witness, with its slack.
    """
    if t.n_marginals != c.n_marginals:
        raise ShapeError("splitting tuple arity does not match the cost tensor")
    for pv, s in zip(t.potentials, c.spaces):
        if pv.space.labels != s.labels:
            raise ShapeError("splitting tuple lives on different spaces")
    mode = c.mode
    support = G.tuples
    for idx in c.all_indices():
        lhs = t.sum_at(idx)
        cv = c.value(idx)
        on_support = idx in support
        if is_neg_inf(lhs):
            if on_support:
                return Verdict(
                    False, SplittingViolationWitness(idx, lhs, cv, "equality")
                )
            continue
        if not leq(lhs, cv, mode):
            return Verdict(False, SplittingViolationWitness(idx, lhs, cv, "inequality"))
        if on_support and not numbers_equal(lhs, cv, mode):
            return Verdict(False, SplittingViolationWitness(idx, lhs, cv, "equality"))
    return Verdict(True)


def construct_splitting(G: SupportSet, c: CostTensor, base: tuple):
    """Build a splitting tuple for a cyclically monotone support set.

    Solves the linear feasibility problem (inequality everywhere on the box
    spanned by the support's coordinate projections, equality on G) over the
    coordinates appearing in G, extends to all coordinates by the sequential
    infimum improvement, then normalizes at the base tuple so that each
    component is capped by the cost along the base's axis lines.

    Returns the :class:`SplittingTuple`; when no splitting tuple exists the
    return value is a negative :class:`Verdict` instead, carrying either a
    monotonicity violation (the constructive precondition fails) or, for
    supports that are monotone yet unsplittable due to infinite costs, the
    infeasibility multipliers of the linear system.
    """
    base = tuple(base)
    if base not in G.tuples:
        raise InputError(f"base tuple {base} is not in the support set")
    _support_cost_check(G, c)
    mode = c.mode
    n_marg = G.n_marginals
    nodes = G.sorted_tuples()
    coords = [sorted({t[a] for t in nodes}) for a in range(n_marg)]
    var_of = []
    counter = 0
    for a in range(n_marg):
        var_of.append({i: counter + k for k, i in enumerate(coords[a])})
        counter += len(coords[a])
    n_free = counter

    lift = Fraction
    box = list(itertools.product(*coords))
    rows = []
    rhs = []
    slack_tuples = []
    for idx in box:
        cv = c.value(idx)
        if is_pos_inf(cv):
            continue
        row = [Fraction(0)] * n_free
        for a, i in enumerate(idx):
            row[var_of[a][i]] += 1
        rows.append(row)
        rhs.append(lift(cv))
        slack_tuples.append(None if idx in G.tuples else idx)
    n_slack = sum(1 for s in slack_tuples if s is not None)
    # Free variables split into positive and negative parts, then slacks.
    A = []
    slack_col = 0
    for r, row in enumerate(rows):
        full = row + [-v for v in row] + [Fraction(0)] * n_slack
        A.append(full)
    slack_idx = 0
    for r, s in enumerate(slack_tuples):
        if s is not None:
            A[r][2 * n_free + slack_idx] = Fraction(1)
            slack_idx += 1
    zero_obj = [Fraction(0)] * (2 * n_free + n_slack)
    res = solve_lp(A, rhs, zero_obj, phase1_only=True)
    if res.status == "infeasible":
        # Diagnose with the solve-backed check, far cheaper than permutation
        # enumeration on larger supports (two marginals delegate to the exact
        # cycle search).  The subset scan is capped by its budget; when no
        # monotonicity violation is found within it, the refutation stands on
        # the infeasibility multipliers alone.
        if G.n_marginals == 2:
            ccm = check_ccm_multi(G, c, kmax=len(G), method="bruteforce")
        else:
            kmax_diag = len(G)
            while kmax_diag > 1 and sum(
                comb(len(G), k) for k in range(1, kmax_diag + 1)
            ) > 200_000:
                kmax_diag -= 1
            ccm = check_ccm_multi(G, c, kmax=kmax_diag, method="lp")
        if not ccm.outcome:
            return Verdict(False, ccm.witness, info={"reason": "not cyclically monotone"})
        witness = FarkasWitness(
            tuple(res.farkas),
            note="no splitting tuple exists (possible for monotone supports only "
            "with infinite costs); the multipliers refute the linear system",
        )
        return Verdict(False, witness, info={"reason": "system infeasible"})

    vals = [res.x[k] - res.x[n_free + k] for k in range(n_free)]
    partial = []
    for a in range(n_marg):
        d = {i: vals[var_of[a][i]] for i in coords[a]}
        partial.append(d)

    # Sequential infimum improvement: extend axis by axis to every label,
    # using already-extended values on earlier axes and the partial values
    # (interpreted as -inf off their coordinates) on later ones.
    extended = []
    sizes = [len(s) for s in c.spaces]
    for a in range(n_marg):
        values = []
        other_axes = [x for x in range(n_marg) if x != a]
        pools = []
        for x in other_axes:
            if x < a:
                pools.append(range(sizes[x]))
            else:
                pools.append(coords[x])
        for i in range(sizes[a]):
            best = None
            for combo in itertools.product(*pools):
                idx = [0] * n_marg
                idx[a] = i
                ok = True
                total = Fraction(0)
                for x, j in zip(other_axes, combo):
                    idx[x] = j
                    v = extended[x][j] if x < a else partial[x][j]
                    if is_neg_inf(v):
                        ok = False
                        break
                    total += v
                if not ok:
                    continue
                cv = c.value(tuple(idx))
                if is_pos_inf(cv):
                    continue
                term = lift(cv) - total
                if best is None or term < best:
                    best = term
            values.append(NEG_INF if best is None else best)
        extended.append(values)

    # Base normalization: push the base values of axes 2..N into axis 1.
    base_vals = [extended[a][base[a]] for a in range(n_marg)]
    normalized = []
    shift0 = sum(base_vals[1:]) if n_marg > 1 else 0
    for a in range(n_marg):
        vals_a = []
        for v in extended[a]:
            if is_neg_inf(v):
                vals_a.append(NEG_INF)
            elif a == 0:
                vals_a.append(v + shift0)
            else:
                vals_a.append(v - base_vals[a])
        normalized.append(vals_a)

    cast = (lambda v: float(v) if not is_neg_inf(v) else v) if mode == FLOAT else (lambda v: v)
    potentials = tuple(
        PotentialVector(c.spaces[a], tuple(cast(v) for v in normalized[a]), mode)
        for a in range(n_marg)
    )
    return SplittingTuple(potentials, base=base)


def pairwise_sum_tensor(spaces: Sequence[Space], pair_costs: dict, mode: str) -> CostTensor:
    """Dense tensor of a pairwise-decomposable cost c(x) = sum_{i<j} c_ij(x_i, x_j)."""
    n_marg = len(spaces)
    for (i, j), cij in pair_costs.items():
        if not (0 <= i < j < n_marg):
            raise InputError(f"bad pair key {(i, j)}")
        if cij.spaces[0].labels != spaces[i].labels or cij.spaces[1].labels != spaces[j].labels:
            raise ShapeError(f"pair cost {(i, j)} lives on the wrong spaces")

    def entry(idx):
        total = Fraction(0) if mode == RATIONAL else 0.0
        for (i, j), cij in pair_costs.items():
            v = cij.value((idx[i], idx[j]))
            if is_pos_inf(v):
                return INF
            total += v
        return total

    shape = [len(s) for s in spaces]
    flat = [entry(idx) for idx in itertools.product(*(range(n) for n in shape))]

    def nest(vals, sh):
        if len(sh) == 1:
            return list(vals)
        step = 1
        for s in sh[1:]:
            step *= s
        return [nest(vals[i * step : (i + 1) * step], sh[1:]) for i in range(sh[0])]

    return CostTensor.dense(spaces, nest(flat, shape), mode)


def pairwise_splitting(pair_potentials: dict, pair_costs: dict, G: SupportSet) -> SplittingTuple:
    """Assemble a splitting tuple for a pairwise-decomposable cost.

    Given, for each pair i < j, a potential psi_ij on X_i whose subgradient
    contains the (i, j)-projection of G for the pair cost c_ij, the components

        phi_i = sum_{j > i} psi_ij + sum_{j < i} (psi_ji transformed to X_i)

    form a splitting tuple for the summed cost on G.  Preconditions are
    checked with :func:`verify_subgradient`; a failing pair raises
    :class:`PreconditionFailed` carrying the projection's monotonicity cycle
    when there is one, else the violated subgradient triple.

    Transform values of +inf (a coordinate with no finite-cost completion
    against the potential's support) are replaced by the vacuous bound -inf;
    this cannot happen on coordinates used by G.
    """
    n_marg = G.n_marginals
    spaces = G.spaces
    mode = require_same_mode(*pair_costs.values())
    for key in pair_costs:
        if key not in pair_potentials:
            raise InputError(f"missing potential for pair {key}")
    for (i, j), cij in sorted(pair_costs.items()):
        psi = pair_potentials[(i, j)]
        proj = G.project([i, j])
        verdict = verify_subgradient(psi, proj, cij)
        if not verdict.outcome:
            ccm = check_ccm2(proj, cij, method="exact")
            chosen = ccm.witness if not ccm.outcome else verdict.witness
            raise PreconditionFailed(
                f"pair ({i}, {j}): potential does not cover the projection",
                verdict=Verdict(False, chosen, info={"pair": (i, j)}),
            )
    components = []
    for i in range(n_marg):
        terms = []
        for j in range(n_marg):
            if j > i and (i, j) in pair_costs:
                terms.append(pair_potentials[(i, j)].values)
            elif j < i and (j, i) in pair_costs:
                transformed = c_transform(pair_potentials[(j, i)], pair_costs[(j, i)], "x-to-y")
                terms.append(transformed.values)
        values = []
        for k in range(len(spaces[i])):
            has_pos = any(is_pos_inf(t[k]) for t in terms)
            has_neg = any(is_neg_inf(t[k]) for t in terms)
            if has_pos or has_neg:
                values.append(NEG_INF)
            else:
                values.append(sum((t[k] for t in terms), start=Fraction(0) if mode == RATIONAL else 0.0))
        components.append(PotentialVector(spaces[i], tuple(values), mode))
    return SplittingTuple(tuple(components))
