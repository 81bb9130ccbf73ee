"""Exact two-phase primal simplex over rationals.

Solves  min c.x  subject to  A x = b, x >= 0  entirely in Fraction
arithmetic, so optima, vertices and dual multipliers are exact and can back
combinatorial certificates.  Bland's rule is used throughout, which makes the
method deterministic and immune to cycling; problem sizes here are desk scale
(at most a few thousand columns), where exactness matters more than speed.

Duals are recovered at the end by solving B^T y = c_B against the original
constraint matrix.  Redundant rows detected in phase 1 (their artificial stays
basic on an all-zero row) are dropped and get dual multiplier 0, which keeps
complementary slackness valid for the full original system.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded"
    x: Optional[list] = None
    value: Optional[Fraction] = None
    duals: Optional[list] = None
    farkas: Optional[list] = None


def solve_lp(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction], c: Sequence[Fraction],
             phase1_only: bool = False) -> LPResult:
    m = len(A)
    n = len(c)
    A0 = [[Fraction(v) for v in row] for row in A]
    b0 = [Fraction(v) for v in b]
    c0 = [Fraction(v) for v in c]

    # Standardize to b >= 0.
    rows = []
    rhs = []
    for i in range(m):
        if b0[i] < 0:
            rows.append([-v for v in A0[i]])
            rhs.append(-b0[i])
        else:
            rows.append(list(A0[i]))
            rhs.append(b0[i])

    width = n + m  # real columns then one artificial per row
    tab = []
    for i in range(m):
        row = rows[i] + [Fraction(0)] * m + [rhs[i]]
        row[n + i] = Fraction(1)
        tab.append(row)
    basis = [n + i for i in range(m)]

    # Reduced-cost rows r[j] = cost_j - y.A_j, with the negated objective in
    # the rhs cell; both phases are maintained through every pivot.
    r1 = [Fraction(0)] * (width + 1)
    for j in range(n):
        r1[j] = -sum(rows[i][j] for i in range(m))
    r1[width] = -sum(rhs)
    r2 = [Fraction(0)] * (width + 1)
    for j in range(n):
        r2[j] = c0[j]

    def pivot(prow_idx: int, pcol: int):
        prow = tab[prow_idx]
        piv = prow[pcol]
        if piv != 1:
            inv = Fraction(1) / piv
            for k in range(width + 1):
                if prow[k]:
                    prow[k] *= inv
        for row in tab:
            if row is prow:
                continue
            f = row[pcol]
            if f:
                for k in range(width + 1):
                    if prow[k]:
                        row[k] -= f * prow[k]
        for row in (r1, r2):
            f = row[pcol]
            if f:
                for k in range(width + 1):
                    if prow[k]:
                        row[k] -= f * prow[k]
        basis[prow_idx] = pcol

    def ratio_row(col: int) -> Optional[int]:
        best = None
        best_ratio = None
        for i in range(len(tab)):
            a = tab[i][col]
            if a > 0:
                ratio = tab[i][width] / a
                if best_ratio is None or ratio < best_ratio or (
                    ratio == best_ratio and basis[i] < basis[best]
                ):
                    best = i
                    best_ratio = ratio
        return best

    # ---- phase 1 ----
    while True:
        enter = None
        for j in range(width):
            if r1[j] < 0:
                enter = j
                break
        if enter is None:
            break
        leave = ratio_row(enter)
        if leave is None:  # phase-1 objective is bounded below by 0
            break
        pivot(leave, enter)

    phase1_obj = -r1[width]
    if phase1_obj > 0:
        farkas = [Fraction(1) - r1[n + i] for i in range(m)]
        # Undo the row sign flips so the certificate refers to the caller's rows.
        for i in range(m):
            if b0[i] < 0:
                farkas[i] = -farkas[i]
        return LPResult("infeasible", farkas=farkas)

    # Drive artificials out of the basis; rows that cannot pivot to a real
    # column are redundant and get dropped.
    redundant = []
    for i in range(len(tab)):
        if basis[i] >= n:
            pivot_col = None
            for j in range(n):
                if tab[i][j] != 0:
                    pivot_col = j
                    break
            if pivot_col is None:
                redundant.append(i)
            else:
                pivot(i, pivot_col)

    kept = [i for i in range(len(tab)) if i not in redundant]
    if redundant:
        tab = [tab[i] for i in kept]
        basis = [basis[i] for i in kept]
    # Artificial columns are no longer needed.
    tab = [row[:n] + [row[width]] for row in tab]
    r2 = r2[:n] + [r2[width]]
    mm = len(tab)

    def ratio_row2(col: int) -> Optional[int]:
        best = None
        best_ratio = None
        for i in range(mm):
            a = tab[i][col]
            if a > 0:
                ratio = tab[i][n] / a
                if best_ratio is None or ratio < best_ratio or (
                    ratio == best_ratio and basis[i] < basis[best]
                ):
                    best = i
                    best_ratio = ratio
        return best

    def pivot2(prow_idx: int, pcol: int):
        prow = tab[prow_idx]
        piv = prow[pcol]
        if piv != 1:
            inv = Fraction(1) / piv
            for k in range(n + 1):
                if prow[k]:
                    prow[k] *= inv
        for row in tab:
            if row is prow:
                continue
            f = row[pcol]
            if f:
                for k in range(n + 1):
                    if prow[k]:
                        row[k] -= f * prow[k]
        f = r2[pcol]
        if f:
            for k in range(n + 1):
                if prow[k]:
                    r2[k] -= f * prow[k]
        basis[prow_idx] = pcol

    if not phase1_only:
        while True:
            enter = None
            for j in range(n):
                if r2[j] < 0:
                    enter = j
                    break
            if enter is None:
                break
            leave = ratio_row2(enter)
            if leave is None:
                return LPResult("unbounded")
            pivot2(leave, enter)

    x = [Fraction(0)] * n
    for i in range(mm):
        x[basis[i]] = tab[i][n]
    value = sum(ci * xi for ci, xi in zip(c0, x))

    # Dual multipliers for the original rows: solve B^T y = c_B on the kept
    # rows, 0 on dropped redundant rows.
    duals = [Fraction(0)] * m
    if mm and not phase1_only:
        bt = [[A0[kept[i]][basis[jj]] for i in range(mm)] for jj in range(mm)]
        target = [c0[basis[jj]] for jj in range(mm)]
        y = _solve_square(bt, target)
        for i in range(mm):
            duals[kept[i]] = y[i]
    return LPResult("optimal", x=x, value=value, duals=duals)


def _solve_square(M: list, v: list) -> list:
    """Gaussian elimination with partial (first-nonzero) pivoting, exact."""
    k = len(M)
    M = [row[:] + [v[i]] for i, row in enumerate(M)]
    for col in range(k):
        p = None
        for i in range(col, k):
            if M[i][col] != 0:
                p = i
                break
        if p is None:
            raise ArithmeticError("basis matrix is singular; duals unavailable")
        M[col], M[p] = M[p], M[col]
        piv = M[col][col]
        if piv != 1:
            inv = Fraction(1) / piv
            M[col] = [val * inv for val in M[col]]
        for i in range(k):
            if i != col and M[i][col]:
                f = M[i][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[col])]
    return [M[i][k] for i in range(k)]


def lp_feasible(A, b) -> bool:
    """Phase-1 feasibility of {A x = b, x >= 0}."""
    res = solve_lp(A, b, [Fraction(0)] * (len(A[0]) if A else 0), phase1_only=True)
    return res.status != "infeasible"
