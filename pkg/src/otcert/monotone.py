"""Two-marginal certificates: cyclic monotonicity, connectivity, path-boundedness.

A support set G = {(x_i, y_i)} is cyclically monotone for a cost c when no
finite reassignment of the y's by a permutation lowers the total cost.  Since
every permutation splits into disjoint cycles, it is enough to rule out single
cyclic swaps, and those are exactly the cycles of the pair graph below with
strictly positive savings.  This reduction turns a universally quantified
family of inequalities into one negative-cycle search.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations

from ._graph import find_negative_cycle, shortest_paths, strongly_connected_components
from .core import (
    ComponentsWitness,
    CostTensor,
    CycleWitness,
    InfiniteTupleWitness,
    SupportSet,
    Verdict,
)
from .errors import InfiniteCostError, InputError, ShapeError
from .numbers import FLOAT, NEG_INF, TOL, is_pos_inf


def _check_two_marginal(G: SupportSet, c: CostTensor):
    if G.n_marginals != 2 or c.n_marginals != 2:
        raise ShapeError("this certificate is defined for two marginals")
    if G.spaces[0].labels != c.spaces[0].labels or G.spaces[1].labels != c.spaces[1].labels:
        raise ShapeError("support set and cost tensor live on different spaces")
    if len(G) == 0:
        raise InputError("certificates need a nonempty support set")


class PairGraph:
    """Directed graph on the tuples of a two-marginal support set.

    The chain weight of the arc i -> j is

        w(i -> j) = c(x_j, y_i) - c(x_i, y_i),

    the cost change when x_j takes over y_i from x_j's own pair's viewpoint;
    chains in the Rockafellar potential formula sum exactly these weights.
    The arc exists iff c(x_j, y_i) is finite.  A cyclic reassignment saves
    money iff some cycle has negative total w, so "no negative w-cycle" is
    cyclic monotonicity.  Construction requires every diagonal cost
    c(x_i, y_i) to be finite.

    In float mode the weights are lifted exactly to Fractions; cycle detection
    additionally pads each arc by the tolerance so that a reported violation
    always exceeds it, while sub-tolerance noise cycles are ignored.
    """

    def __init__(self, G: SupportSet, c: CostTensor):
        _check_two_marginal(G, c)
        self.nodes = G.sorted_tuples()
        self.mode = c.mode
        self.diag = []
        for t in self.nodes:
            v = c.value(t)
            if is_pos_inf(v):
                raise InfiniteCostError(
                    f"support tuple {t} has infinite cost; the certificate requires "
                    "finite costs on the support",
                    offending=t,
                )
            self.diag.append(v)
        n = len(self.nodes)
        lift = (lambda v: Fraction(v)) if self.mode == FLOAT else (lambda v: v)
        edges = []
        adjacency = [[] for _ in range(n)]
        for i, (xi, yi) in enumerate(self.nodes):
            cii = self.diag[i]
            for j, (xj, yj) in enumerate(self.nodes):
                if i == j:
                    adjacency[i].append(j)
                    continue
                cross = c.value((xj, yi))
                if is_pos_inf(cross):
                    continue
                edges.append((i, j, lift(cross) - lift(cii)))
                adjacency[i].append(j)
        self.edges = edges
        self.adjacency = adjacency

    def negative_cycle(self):
        """Indices of a cycle with (strictly, beyond tolerance) negative w-sum."""
        n = len(self.nodes)
        if self.mode == FLOAT:
            pad = Fraction(TOL)
            padded = [(u, v, w + pad) for u, v, w in self.edges]
            return find_negative_cycle(n, padded)
        return find_negative_cycle(n, self.edges)

    def cycle_witness(self, cycle, c: CostTensor) -> CycleWitness:
        """Package a node cycle as a reassignment witness with re-derived sums."""
        tuples = tuple(self.nodes[i] for i in cycle)
        k = len(tuples)
        original = sum(c.raw_value(t) for t in tuples)
        reassigned = sum(
            c.raw_value((tuples[(i + 1) % k][0], tuples[i][1])) for i in range(k)
        )
        return CycleWitness(tuples, original, reassigned, original - reassigned)


def check_ccm2(G: SupportSet, c: CostTensor, method: str = "exact", kmax: int | None = None) -> Verdict:
    """Certify cyclic monotonicity of a two-marginal support set.

    method "exact": negative-cycle detection on the pair graph, complete for
    every cycle length.  method "bruteforce": enumerate ordered tuples of up
    to ``kmax`` support points and test the single cyclic shift; complete iff
    ``kmax >= len(G)``, and used as an independent oracle for the exact path.

    A negative verdict carries a :class:`CycleWitness` whose two assignment
    sums can be re-added directly from the tensor.
    """
    if method == "exact":
        graph = PairGraph(G, c)
        cycle = graph.negative_cycle()
        if cycle is None:
            return Verdict(True, info={"method": "exact"})
        return Verdict(False, graph.cycle_witness(cycle, c), info={"method": "exact"})
    if method != "bruteforce":
        raise InputError(f"unknown method {method!r}")
    if kmax is None or kmax < 2:
        raise InputError("bruteforce needs kmax >= 2")
    _check_two_marginal(G, c)
    nodes = G.sorted_tuples()
    for t in nodes:
        if is_pos_inf(c.value(t)):
            raise InfiniteCostError(f"support tuple {t} has infinite cost", offending=t)
    strict_gap = TOL if c.mode == FLOAT else 0
    for k in range(2, min(kmax, len(nodes)) + 1):
        for seq in permutations(nodes, k):
            # Canonical cycle representative: smallest tuple first.
            if seq[0] != min(seq):
                continue
            original = sum(c.value(t) for t in seq)
            reassigned = 0
            blocked = False
            for i in range(k):
                v = c.value((seq[(i + 1) % k][0], seq[i][1]))
                if is_pos_inf(v):
                    blocked = True
                    break
                reassigned += v
            if blocked:
                continue
            if original - reassigned > strict_gap:
                off = c.offset * k
                witness = CycleWitness(
                    tuple(seq), original + off, reassigned + off, original - reassigned
                )
                return Verdict(False, witness, info={"method": "bruteforce", "kmax": kmax})
    return Verdict(True, info={"method": "bruteforce", "kmax": kmax})


def check_connecting(G: SupportSet, c: CostTensor) -> Verdict:
    """Certify that every pair of support points is chained to every other.

    The chain relation follows arcs i -> j with c(x_j, y_i) finite, so the
    set is connecting iff all its own costs are finite and the pair graph is
    strongly connected.  Negative verdicts carry either an infinite-cost
    tuple or the strong-component partition with a split pair.
    """
    _check_two_marginal(G, c)
    nodes = G.sorted_tuples()
    for t in nodes:
        if is_pos_inf(c.value(t)):
            return Verdict(False, InfiniteTupleWitness(t))
    n = len(nodes)
    adjacency = [[] for _ in range(n)]
    for i, (xi, yi) in enumerate(nodes):
        for j, (xj, yj) in enumerate(nodes):
            if i != j and not is_pos_inf(c.value((xj, yi))):
                adjacency[i].append(j)
    components = strongly_connected_components(n, adjacency)
    if len(components) == 1:
        return Verdict(True, info={"components": 1})
    parts = tuple(tuple(nodes[i] for i in comp) for comp in components)
    witness = ComponentsWitness(parts, (parts[0][0], parts[1][0]))
    return Verdict(False, witness, info={"components": len(components)})


def check_path_bounded(G: SupportSet, c: CostTensor) -> Verdict:
    """Certify that all chain sums between any two support points are bounded.

    On a finite set this is decided exactly: boundedness fails iff the pair
    graph has a negative w-cycle (replicating it drives chain sums to +inf in
    the savings convention), which is also exactly failure of cyclic
    monotonicity.  On infinite sets the two notions differ; on finite ones
    they collapse, which this module documents as an implementation theorem.

    A positive verdict reports the exact per-endpoint suprema M(i, j) of the
    chain sums (``-inf`` when no finite chain exists, a vacuous bound), plus
    ``uniform_bound`` = max over endpoint pairs, which is always attained on
    the diagonal and therefore 0 whenever no chain has positive savings.
    """
    graph = PairGraph(G, c)
    cycle = graph.negative_cycle()
    if cycle is None:
        n = len(graph.nodes)
        to_out = (lambda v: float(v)) if c.mode == FLOAT else (lambda v: v)
        bounds = []
        uniform = None
        for i in range(n):
            dist = shortest_paths(n, graph.edges, i)
            row = []
            for j in range(n):
                if dist[j] is None:
                    row.append(NEG_INF)
                else:
                    m = to_out(-dist[j])
                    row.append(m)
                    if uniform is None or m > uniform:
                        uniform = m
            bounds.append(tuple(row))
        return Verdict(
            True,
            info={"nodes": graph.nodes, "bounds": tuple(bounds), "uniform_bound": uniform},
        )
    witness = graph.cycle_witness(cycle, c)
    return Verdict(
        False,
        witness,
        info={"note": "replicating the cycle yields chains with arbitrarily large sums"},
    )
