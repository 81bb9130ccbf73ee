"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the library's algorithmic paths: they
enumerate permutations, polytope bases and chains directly from the raw data,
so that agreement with the library is evidence rather than tautology.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import pytest

from otcert.core import CostTensor, Coupling, Measure, Space
from otcert.numbers import is_pos_inf


def frac(a, b=1):
    return Fraction(a, b)


def make_spaces(*sizes, labels=None):
    if labels is not None:
        return [Space(l) for l in labels]
    return [Space(list(range(n))) for n in sizes]


def uniform(space, mode="rational"):
    n = len(space)
    if mode == "rational":
        return Measure(space, tuple(Fraction(1, n) for _ in range(n)), mode)
    return Measure(space, tuple(1.0 / n for _ in range(n)), mode)


# -- independent oracles -------------------------------------------------------


def assignment_oracle(c: CostTensor):
    """Minimum average cost over the n! permutation couplings (uniform marginals)."""
    n = len(c.spaces[0])
    best = None
    for perm in itertools.permutations(range(n)):
        total = 0
        blocked = False
        for i in range(n):
            v = c.raw_value((i, perm[i]))
            if is_pos_inf(v):
                blocked = True
                break
            total += v
        if blocked:
            continue
        avg = Fraction(total, n) if not isinstance(total, float) else total / n
        if best is None or avg < best:
            best = avg
    return best


def bottleneck_assignment_oracle(c: CostTensor):
    """Minimum over permutations of the largest cost used (uniform marginals)."""
    n = len(c.spaces[0])
    best = None
    for perm in itertools.permutations(range(n)):
        worst = max(c.raw_value((i, perm[i])) for i in range(n))
        if best is None or worst < best:
            best = worst
    return best


def _gauss_solve_unique(A, b):
    """Exact solve of A x = b; returns the solution iff it exists and is unique."""
    m = len(A)
    n = len(A[0]) if m else 0
    M = [[Fraction(v) for v in row] + [Fraction(b[i])] for i, row in enumerate(A)]
    piv_cols = []
    r = 0
    for col in range(n):
        p = None
        for i in range(r, m):
            if M[i][col] != 0:
                p = i
                break
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = Fraction(1) / M[r][col]
        M[r] = [v * inv for v in M[r]]
        for i in range(m):
            if i != r and M[i][col]:
                f = M[i][col]
                M[i] = [a - f * bb for a, bb in zip(M[i], M[r])]
        piv_cols.append(col)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if M[i][n] != 0:
            return None  # inconsistent
    if len(piv_cols) < n:
        return None  # not unique
    x = [Fraction(0)] * n
    for row_idx, col in enumerate(piv_cols):
        x[col] = M[row_idx][n]
    return x


def polytope_vertices_multi(measures, spaces):
    """All vertices of the coupling polytope, by basic-solution enumeration.

    Columns are all index tuples; every vertex is the unique solution of the
    marginal equations restricted to some column subset of size equal to the
    system rank.  Tiny instances only.
    """
    sizes = [len(s) for s in spaces]
    columns = list(itertools.product(*(range(n) for n in sizes)))
    row_offset = [0]
    for n in sizes[:-1]:
        row_offset.append(row_offset[-1] + n)
    n_rows = sum(sizes)
    A_full = [[Fraction(0)] * len(columns) for _ in range(n_rows)]
    for j, t in enumerate(columns):
        for a, idx in enumerate(t):
            A_full[row_offset[a] + idx][j] = Fraction(1)
    b = []
    for m in measures:
        b.extend(Fraction(w) for w in m.weights)
    rank = sum(sizes) - (len(sizes) - 1)
    seen = set()
    vertices = []
    for subset in itertools.combinations(range(len(columns)), rank):
        A_sub = [[A_full[i][j] for j in subset] for i in range(n_rows)]
        x = _gauss_solve_unique(A_sub, b)
        if x is None or any(v < 0 for v in x):
            continue
        atoms = {columns[j]: x[k] for k, j in enumerate(subset) if x[k] > 0}
        key = tuple(sorted(atoms.items()))
        if key in seen:
            continue
        seen.add(key)
        vertices.append(Coupling(spaces, atoms, "rational"))
    return vertices


def chain_potential_oracle(G, c, base):
    """Rockafellar potential by exhaustive chain enumeration.

    Minimizes the chain sum over all simple chains from the base pair
    (cycles never help on a cyclically monotone set), then attaches the final
    hop to each target point; unreachable points get None (standing for the
    blocked value).
    """
    nodes = sorted(G.tuples)
    n = len(nodes)
    base_i = nodes.index(base)
    best_d = {base_i: 0}

    def step_weight(i, j):
        v = c.value((nodes[j][0], nodes[i][1]))
        if is_pos_inf(v):
            return None
        return v - c.value(nodes[i])

    def dfs(i, used, acc):
        for j in range(n):
            if j in used:
                continue
            w = step_weight(i, j)
            if w is None:
                continue
            nd = acc + w
            if j not in best_d or nd < best_d[j]:
                best_d[j] = nd
            dfs(j, used | {j}, nd)

    dfs(base_i, {base_i}, 0)
    values = []
    for x in range(len(c.spaces[0])):
        best = None
        for j, d in best_d.items():
            v = c.value((x, nodes[j][1]))
            if is_pos_inf(v):
                continue
            term = d + v - c.value(nodes[j])
            if best is None or term < best:
                best = term
        values.append(best)
    return values


@pytest.fixture
def rng():
    import random

    return random.Random(20240817)
