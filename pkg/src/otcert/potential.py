"""Potentials for two-marginal supports: transforms, construction, verification.

A potential for a support set G is a function phi with G inside the
subgradient set

    { (x, y) : c(x, y) < inf and c(x, y) - phi(x) <= c(z, y) - phi(z) for all z }.

For finite supports a potential exists iff the difference-constraint system of
Theorem-style inequalities  c(x_i, y_i) - c(x_j, y_i) <= a_i - a_j  is
feasible, which is again the no-negative-cycle condition of the pair graph.
Potentials are always expressed against the normalized cost (entries shifted
into [0, +inf]); constant shifts change potentials by constants only.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from ._graph import (
    find_negative_cycle,
    potentials_from_virtual_source,
    shortest_paths,
    strongly_connected_components,
)
from .core import (
    CostTensor,
    InfiniteTupleWitness,
    Measure,
    Space,
    SubsetWitness,
    SupportSet,
    TripleWitness,
    Verdict,
    validate_measure,
)
from .errors import BudgetExceeded, InputError, PreconditionFailed, ShapeError
from .monotone import PairGraph, _check_two_marginal
from .numbers import (
    FLOAT,
    INF,
    NEG_INF,
    RATIONAL,
    TOL,
    Number,
    as_number,
    is_finite,
    is_neg_inf,
    is_pos_inf,
    leq,
    require_same_mode,
)

COMPAT_SUPPORT_CAP = 22


@dataclass(frozen=True)
class PotentialVector:
    """Values of a candidate potential over one space, in [-inf, +inf).

    ``+inf`` entries can appear only as flagged output of :func:`c_transform`
    (the transform's natural codomain is [-inf, +inf]); they are rejected
    wherever a genuine potential is required.  When produced by
    :func:`rockafellar_potential` the value at the base tuple's first
    coordinate is exactly 0.
    """

    space: Space
    values: tuple
    mode: str = RATIONAL
    base: Optional[tuple] = None

    def __post_init__(self):
        vals = tuple(as_number(v, self.mode) for v in self.values)
        if len(vals) != len(self.space):
            raise ShapeError("potential vector length does not match its space")
        object.__setattr__(self, "values", vals)

    def value(self, i: int) -> Number:
        return self.values[i]

    @property
    def attains_plus_inf(self) -> bool:
        return any(is_pos_inf(v) for v in self.values)

    @property
    def all_neg_inf(self) -> bool:
        return all(is_neg_inf(v) for v in self.values)


@dataclass(frozen=True)
class InequalitySystemResult:
    """Outcome of a difference-constraint solve: a solution or a positive cycle."""

    feasible: bool
    solution: Optional[tuple] = None
    cycle: Optional[tuple] = None
    cycle_sum: Optional[Number] = None


def c_transform(f: PotentialVector, c: CostTensor, direction: str = "x-to-y") -> PotentialVector:
    """Generalized conjugate  f^c(y) = inf_x ( c(x, y) - f(x) )  (or the mirror).

    Terms with c = +inf or f(x) = -inf contribute +inf and drop out of the
    infimum; if every term drops, the entry is +inf and the result carries the
    ``attains_plus_inf`` flag rather than raising, since the transform's
    codomain legitimately includes +inf.
    """
    if c.n_marginals != 2:
        raise ShapeError("c_transform is a two-marginal operation")
    require_same_mode(f, c)
    if direction == "x-to-y":
        src, dst = 0, 1
        entry = lambda i, j: c.value((i, j))
    elif direction == "y-to-x":
        src, dst = 1, 0
        entry = lambda i, j: c.value((j, i))
    else:
        raise InputError(f"unknown direction {direction!r}")
    if f.space.labels != c.spaces[src].labels:
        raise ShapeError("potential lives on the wrong side for this direction")
    if f.all_neg_inf:
        raise InputError("cannot transform a potential that is -inf everywhere")
    if f.attains_plus_inf:
        raise InputError("cannot transform a potential with +inf entries")
    n_src, n_dst = len(c.spaces[src]), len(c.spaces[dst])
    out = []
    for j in range(n_dst):
        best = INF
        for i in range(n_src):
            v = entry(i, j)
            fi = f.value(i)
            if is_pos_inf(v) or is_neg_inf(fi):
                continue
            term = v - fi
            if is_pos_inf(best) or term < best:
                best = term
        out.append(best)
    return PotentialVector(c.spaces[dst], tuple(out), f.mode)


def verify_subgradient(f: PotentialVector, G: SupportSet, c: CostTensor) -> Verdict:
    """Check that G sits inside the subgradient set of f.

    True iff every (x, y) in G has finite cost, f(x) is finite, and
    c(x, y) - f(x) <= c(z, y) - f(z) for every z in the first space.  Negative
    verdicts carry the lexicographically first violating triple.
    """
    _check_two_marginal(G, c)
    require_same_mode(f, c)
    if f.space.labels != c.spaces[0].labels:
        raise ShapeError("potential must live on the first marginal space")
    if f.attains_plus_inf:
        raise InputError("potentials with +inf entries are outside the subgradient definition")
    mode = c.mode
    n1 = len(c.spaces[0])
    for (x, y) in G.sorted_tuples():
        cxy = c.value((x, y))
        if is_pos_inf(cxy):
            return Verdict(False, InfiniteTupleWitness((x, y)))
        fx = f.value(x)
        if not is_finite(fx):
            return Verdict(
                False,
                TripleWitness(x, y, x, NEG_INF, NEG_INF),
                info={"reason": "potential not finite at a support point"},
            )
        lhs = cxy - fx
        for z in range(n1):
            czy = c.value((z, y))
            fz = f.value(z)
            if is_pos_inf(czy) or is_neg_inf(fz):
                continue  # right side is +inf, vacuous
            rhs = czy - fz
            if not leq(lhs, rhs, mode):
                return Verdict(False, TripleWitness(x, y, z, lhs, rhs))
    return Verdict(True)


def _chain_graph(G: SupportSet, c: CostTensor):
    """Pair graph plus a cyclic-monotonicity gate shared by the constructions."""
    graph = PairGraph(G, c)
    cycle = graph.negative_cycle()
    if cycle is not None:
        witness = graph.cycle_witness(cycle, c)
        raise PreconditionFailed(
            "support set is not cyclically monotone; no potential exists",
            verdict=Verdict(False, witness),
        )
    return graph


def rockafellar_potential(G: SupportSet, c: CostTensor, base: tuple) -> PotentialVector:
    """Build a potential for a cyclically monotone support set by chain sums.

    With D(j) the cheapest chain value from the base pair to pair j (chain
    steps weigh c(x_next, y_cur) - c(x_cur, y_cur)), the potential is

        phi(x) = min_j [ D(j) + c(x, y_j) - c(x_j, y_j) ],

    which is 0 at the base's first coordinate and -inf at points no finite
    chain reaches.  When infinite costs leave some pairs unreachable from the
    base (the support is not connecting), the same formula is fed feasible
    chain potentials from the difference-constraint system instead, shifted
    so the base keeps value 0; on finite supports cyclic monotonicity alone
    guarantees that system is feasible.  The output always satisfies
    :func:`verify_subgradient` on G.
    """
    base = tuple(base)
    if base not in G.tuples:
        raise InputError(f"base tuple {base} is not in the support set")
    graph = _chain_graph(G, c)
    nodes = graph.nodes
    n = len(nodes)
    base_idx = nodes.index(base)
    components = strongly_connected_components(n, graph.adjacency)
    mode = c.mode
    lift = (lambda v: Fraction(v)) if mode == FLOAT else (lambda v: v)
    if len(components) == 1:
        a = shortest_paths(n, graph.edges, base_idx)
    else:
        d = potentials_from_virtual_source(n, graph.edges)
        shift = d[base_idx]
        a = [di - shift for di in d]
    out_cast = (lambda v: float(v)) if mode == FLOAT else (lambda v: v)
    values = []
    for x in range(len(c.spaces[0])):
        best = None
        for j, (xj, yj) in enumerate(nodes):
            if a[j] is None:
                continue
            cxy = c.value((x, yj))
            if is_pos_inf(cxy):
                continue
            term = a[j] + lift(cxy) - lift(graph.diag[j])
            if best is None or term < best:
                best = term
        values.append(NEG_INF if best is None else out_cast(best))
    return PotentialVector(c.spaces[0], tuple(values), mode, base=base)


def solve_inequality_system(eta: Sequence[Sequence]) -> InequalitySystemResult:
    """Solve  eta[i][j] <= a_i - a_j  for all i, j with finite eta, or refute it.

    Entries live in [-inf, +inf) with zero diagonal; -inf rows are vacuous
    constraints (+inf entries are not representable and must be pre-mapped by
    the caller).  Feasibility is decided by shortest-path potentials from a
    virtual source over arcs i -> j of weight -eta[i][j]; infeasibility
    returns a cycle with strictly positive eta-sum, whose replications give
    unbounded chain sums.
    """
    m = len(eta)
    rows = [list(r) for r in eta]
    mode = RATIONAL
    for i, row in enumerate(rows):
        if len(row) != m:
            raise ShapeError("eta must be a square matrix")
        for j, v in enumerate(row):
            if isinstance(v, float) and not is_neg_inf(v):
                mode = FLOAT
            if is_pos_inf(v):
                raise InputError("+inf entries are not representable in the system")
        if rows[i][i] != 0:
            raise InputError("eta must have a zero diagonal")
    lift = (lambda v: Fraction(v)) if mode == FLOAT else (lambda v: v)
    edges = []
    for i in range(m):
        for j in range(m):
            if i != j and not is_neg_inf(rows[i][j]):
                edges.append((i, j, -lift(rows[i][j])))
    if mode == FLOAT:
        pad = Fraction(TOL)
        cycle = find_negative_cycle(m, [(u, v, w + pad) for u, v, w in edges])
    else:
        cycle = find_negative_cycle(m, edges)
    if cycle is not None:
        k = len(cycle)
        total = sum(rows[cycle[i]][cycle[(i + 1) % k]] for i in range(k))
        return InequalitySystemResult(False, cycle=tuple(cycle), cycle_sum=total)
    d = potentials_from_virtual_source(m, edges)
    cast = (lambda v: float(v)) if mode == FLOAT else (lambda v: v)
    return InequalitySystemResult(True, solution=tuple(cast(v) for v in d))


def eta_from_support(G: SupportSet, c: CostTensor) -> list:
    """The difference-constraint matrix of a support set.

    eta[i][j] = c(x_i, y_i) - c(x_j, y_i); a cross cost of +inf yields -inf
    (a vacuous constraint).  Solutions a of the system are potential values
    on the first coordinates: phi(x_i) = a_i.
    """
    graph = PairGraph(G, c)
    nodes = graph.nodes
    n = len(nodes)
    zero = 0 if c.mode == RATIONAL else 0.0
    eta = [[zero] * n for _ in range(n)]
    for i, (xi, yi) in enumerate(nodes):
        for j, (xj, yj) in enumerate(nodes):
            if i == j:
                continue
            cross = c.value((xj, yi))
            eta[i][j] = NEG_INF if is_pos_inf(cross) else graph.diag[i] - cross
    return eta


def potential_from_system(G: SupportSet, c: CostTensor) -> PotentialVector:
    """Potential on the full first space from a feasible support system.

    Solves the support's difference constraints and extends the solution by
    one chain step, phi(x) = min_j [ a_j + c(x, y_j) - c(x_j, y_j) ]; raises
    :class:`PreconditionFailed` with the positive cycle when infeasible.
    """
    res = solve_inequality_system(eta_from_support(G, c))
    nodes = G.sorted_tuples()
    if not res.feasible:
        tuples = tuple(nodes[i] for i in res.cycle)
        raise PreconditionFailed(
            "support difference constraints are infeasible",
            verdict=Verdict(False, {"cycle": tuples, "eta_sum": res.cycle_sum}),
        )
    mode = c.mode
    values = []
    for x in range(len(c.spaces[0])):
        best = None
        for j, (xj, yj) in enumerate(nodes):
            cxy = c.value((x, yj))
            if is_pos_inf(cxy):
                continue
            term = res.solution[j] + cxy - c.value((xj, yj))
            if best is None or term < best:
                best = term
        values.append(NEG_INF if best is None else best)
    return PotentialVector(c.spaces[0], tuple(values), mode)


def check_compatibility(mu: Measure, nu: Measure, c: CostTensor) -> Verdict:
    """Three-way marriage-type test of (mu, nu, c): can mass move at finite cost.

    Over every subset A of supp(mu), with B(A) = { y : c(x, y) = inf for all
    x in A } the set of targets blocked by all of A:

    * incompatible          -- some A has mu(A) + nu(B(A)) > 1 (no finite plan);
    * compatible            -- all A pass, but some A with 0 < mu(A) < 1 has
                               equality (finite plans exist, the surplus
                               condition fails);
    * strongly-compatible   -- the inequality is strict for every such A.

    Subsets are enumerated in binary-counting order (earlier support points
    as higher-order bits); the first violating subset is the witness.  The
    support size is capped at 22; above that, use the solver's feasibility
    check instead.
    """
    require_same_mode(mu, nu, c)
    if c.n_marginals != 2:
        raise ShapeError("compatibility is a two-marginal test")
    if mu.space.labels != c.spaces[0].labels or nu.space.labels != c.spaces[1].labels:
        raise ShapeError("measures do not live on the tensor's spaces")
    for m, name in ((mu, "mu"), (nu, "nu")):
        v = validate_measure(m)
        if not v.outcome:
            raise InputError(f"{name} is not a probability measure: {v.witness}")
    supp = list(mu.support_indices())
    if len(supp) > COMPAT_SUPPORT_CAP:
        raise BudgetExceeded(
            f"supp(mu) has {len(supp)} points, above the enumeration cap "
            f"{COMPAT_SUPPORT_CAP}; use the transport feasibility cross-check instead",
            estimate=2 ** len(supp),
            budget=2**COMPAT_SUPPORT_CAP,
        )
    mode = c.mode
    ny = len(nu.space)
    blocked_rows = []
    for x in supp:
        mask = 0
        for y in range(ny):
            if is_pos_inf(c.value((x, y))):
                mask |= 1 << y
        blocked_rows.append(mask)
    full_mask = (1 << ny) - 1
    nu_w = nu.weights

    def nu_of(mask: int) -> Number:
        total = Fraction(0) if mode == RATIONAL else 0.0
        m = mask
        while m:
            low = m & -m
            total += nu_w[low.bit_length() - 1]
            m ^= low
        return total

    first_strict_blocker = None
    m_count = len(supp)
    # Depth-first include/exclude with exclude first: leaves appear in binary
    # counting order with supp[0] as the most significant bit.
    def dfs(pos: int, mask: int, mu_sum: Number, nu_blocked: Number, size: int):
        nonlocal first_strict_blocker
        if pos == m_count:
            if size == 0:  # the empty subset blocks everything vacuously, never violates
                return None
            total = mu_sum + nu_blocked
            witness = lambda strict: SubsetWitness(
                tuple(mu.space.labels[supp[i]] for i in range(m_count) if chosen[i]),
                mu_sum,
                tuple(nu.space.labels[y] for y in range(ny) if mask >> y & 1),
                nu_blocked,
                strict,
            )
            if mode == RATIONAL:
                hard = total > 1
                tight = total == 1
                interior = 0 < mu_sum < 1
            else:
                hard = total > 1 + TOL
                tight = total > 1 - TOL
                interior = TOL < mu_sum < 1 - TOL
            if hard:
                return witness(False)
            if tight and interior and first_strict_blocker is None:
                first_strict_blocker = witness(True)
            return None
        chosen[pos] = False
        hit = dfs(pos + 1, mask, mu_sum, nu_blocked, size)
        if hit is not None:
            return hit
        chosen[pos] = True
        new_mask = mask & blocked_rows[pos]
        removed = mask & ~new_mask
        hit = dfs(
            pos + 1, new_mask, mu_sum + mu.weights[supp[pos]], nu_blocked - nu_of(removed), size + 1
        )
        chosen[pos] = False
        return hit

    chosen = [False] * m_count
    violation = dfs(0, full_mask, Fraction(0) if mode == RATIONAL else 0.0, nu_of(full_mask), 0)
    if violation is not None:
        return Verdict("incompatible", violation)
    if first_strict_blocker is not None:
        return Verdict("compatible", info={"strictness_blocker": first_strict_blocker})
    return Verdict("strongly-compatible")
