"""Exact solvers: two-marginal transport, multi-marginal LP, bottleneck, p-powers.

All pivoting is exact: float-mode instances are lifted to rationals (every
finite float is a dyadic rational), solved exactly, and converted back on
output.  Reported optimal values refer to the raw cost (the nonnegativity
offset is added back); dual potentials certify the normalized cost, so the
zero-gap identity reads  sum phi dmu_i = value - offset.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .core import (
    CostTensor,
    Coupling,
    Measure,
    linf_cost,
    product_coupling,
    validate_measure,
)
from .errors import InputError, ShapeError
from .lp import solve_lp
from .numbers import (
    FLOAT,
    INF,
    Number,
    is_pos_inf,
    require_same_mode,
)
from .potential import PotentialVector

MULTI_SIZE_CAP = 10**6


@dataclass
class SolveResult:
    """Outcome of a transport solve.

    ``status`` is "optimal" or "no-finite-plan"; in the second case the plan
    is the product of the marginals (any plan is optimal when every plan has
    infinite cost) and the value is +inf.  ``dual`` is a (phi, psi) pair of
    :class:`PotentialVector` for two-marginal solves and a
    :class:`~otcert.multi.SplittingTuple` for multi-marginal ones; duals have
    zero duality gap against the normalized cost in rational mode.
    """

    plan: Coupling
    value: Number
    status: str
    dual: object = None
    extra: dict = field(default_factory=dict)


def _validated(measures: Sequence[Measure], c: CostTensor):
    mode = require_same_mode(*measures, c)
    if len(measures) != c.n_marginals:
        raise ShapeError(f"{len(measures)} measures for a {c.n_marginals}-marginal cost")
    for m, s in zip(measures, c.spaces):
        if m.space.labels != s.labels:
            raise ShapeError("measure space does not match the cost tensor")
        v = validate_measure(m)
        if not v.outcome:
            raise InputError(f"invalid marginal: {v.witness}")
    if c.size() > MULTI_SIZE_CAP:
        raise InputError(
            f"cost tensor has {c.size()} entries, above the dense LP cap {MULTI_SIZE_CAP}"
        )
    return mode


def _lift(v, mode):
    return Fraction(v) if mode == FLOAT else v


def _transport_lp(measures, c, columns, objective=None):
    """Equality system of the transport polytope restricted to given columns.

    Rows are one per (marginal, label); column t has a 1 in row (i, t[i]).
    """
    sizes = [len(m.space) for m in measures]
    row_offset = [0] * len(sizes)
    for i in range(1, len(sizes)):
        row_offset[i] = row_offset[i - 1] + sizes[i - 1]
    n_rows = sum(sizes)
    mode = measures[0].mode
    A = [[Fraction(0)] * len(columns) for _ in range(n_rows)]
    for jcol, t in enumerate(columns):
        for axis, idx in enumerate(t):
            A[row_offset[axis] + idx][jcol] = Fraction(1)
    b = []
    for m in measures:
        b.extend(_lift(w, mode) for w in m.weights)
    if objective is None:
        objective = [_lift(c.value(t), mode) for t in columns]
    return A, b, objective, row_offset


def _solve_transport(measures, c, phase1_only=False, objective=None):
    columns = sorted(c.finite_indices())
    if not columns:
        return None, columns
    A, b, obj, row_offset = _transport_lp(measures, c, columns, objective)
    res = solve_lp(A, b, obj, phase1_only=phase1_only)
    if res.status == "infeasible":
        return None, columns
    return (res, columns, row_offset), columns


def _no_finite_plan(measures) -> SolveResult:
    return SolveResult(product_coupling(measures), INF, "no-finite-plan", None)


def _plan_from_lp(measures, columns, x, mode):
    spaces = [m.space for m in measures]
    cast = (lambda v: float(v)) if mode == FLOAT else (lambda v: v)
    atoms = {t: cast(v) for t, v in zip(columns, x) if v > 0}
    return Coupling(spaces, atoms, mode)


def _duals_per_axis(measures, duals, row_offset, mode):
    cast = (lambda v: float(v)) if mode == FLOAT else (lambda v: v)
    out = []
    for axis, m in enumerate(measures):
        vals = tuple(cast(duals[row_offset[axis] + i]) for i in range(len(m.space)))
        out.append(PotentialVector(m.space, vals, mode))
    return out


def solve_multi(mus: Sequence[Measure], c: CostTensor) -> SolveResult:
    """Exact minimum of the integral cost over couplings of the given marginals.

    Index tuples with infinite cost are excluded from the LP; if that makes
    the polytope empty the result is the no-finite-plan convention.  The dual
    is a splitting tuple that is tight on the optimal plan's support.
    """
    from .multi import SplittingTuple  # local import to avoid a cycle

    mode = _validated(mus, c)
    solved, _ = _solve_transport(mus, c)
    if solved is None:
        return _no_finite_plan(mus)
    res, columns, row_offset = solved
    plan = _plan_from_lp(mus, columns, res.x, mode)
    value_norm = res.value
    cast = (lambda v: float(v)) if mode == FLOAT else (lambda v: v)
    value = cast(value_norm) + c.offset
    dual = SplittingTuple(tuple(_duals_per_axis(mus, res.duals, row_offset, mode)))
    return SolveResult(plan, value, "optimal", dual, extra={"normalized_value": cast(value_norm)})


def solve_ot2(mu: Measure, nu: Measure, c: CostTensor) -> SolveResult:
    """Two-marginal Kantorovich problem; dual is a (phi, psi) potential pair."""
    if c.n_marginals != 2:
        raise ShapeError("solve_ot2 needs a two-marginal cost")
    res = solve_multi([mu, nu], c)
    if res.status == "optimal":
        res.dual = tuple(res.dual.potentials)
    return res


def solve_linf(mus: Sequence[Measure], c: CostTensor) -> SolveResult:
    """Bottleneck transport: minimize the largest cost used by the plan.

    The optimal value is the smallest finite cost threshold t for which the
    polytope restricted to entries <= t is nonempty (binary search over the
    sorted distinct finite entries, feasibility by phase-1 LP).  Among the
    plans feasible at the optimal threshold the returned representative
    minimizes the integral cost; this refinement is a documented choice and
    is not claimed to be infinitely cyclically monotone.
    """
    mode = _validated(mus, c)
    thresholds = sorted(set(c.finite_values()))
    if not thresholds:
        return _no_finite_plan(mus)

    def feasible_at(t) -> bool:
        columns = sorted(idx for idx in c.finite_indices() if c.value(idx) <= t)
        if not columns:
            return False
        A, b, obj, _ = _transport_lp(mus, c, columns)
        return solve_lp(A, b, obj, phase1_only=True).status != "infeasible"

    lo, hi = 0, len(thresholds) - 1
    if not feasible_at(thresholds[hi]):
        return _no_finite_plan(mus)
    while lo < hi:
        mid = (lo + hi) // 2
        if feasible_at(thresholds[mid]):
            hi = mid
        else:
            lo = mid + 1
    t = thresholds[lo]
    restricted = _threshold_tensor(c, t)
    refined = solve_multi(mus, restricted)
    value = t + c.offset
    achieved = linf_cost(refined.plan, c)
    if achieved != value:
        raise AssertionError("threshold search inconsistency")  # pragma: no cover
    return SolveResult(
        refined.plan,
        value,
        "optimal",
        None,
        extra={"integral_refinement": refined.value, "thresholds": len(thresholds)},
    )


def _threshold_tensor(c: CostTensor, t) -> CostTensor:
    entries = _reshape(
        [c.value(idx) if (not is_pos_inf(c.value(idx)) and c.value(idx) <= t) else INF
         for idx in c.all_indices()],
        c.shape,
    )
    out = CostTensor.dense(c.spaces, entries, c.mode)
    return out


def _reshape(flat, shape):
    if len(shape) == 1:
        return list(flat)
    step = 1
    for s in shape[1:]:
        step *= s
    return [_reshape(flat[i * step : (i + 1) * step], shape[1:]) for i in range(shape[0])]


def solve_p(mus: Sequence[Measure], c: CostTensor, p: int) -> SolveResult:
    """Minimize the p-th power mean of the cost: value = (min int c^p dgamma)^(1/p).

    Runs :func:`solve_multi` on the entrywise p-th power.  For p = 1 the value
    is exact; for p > 1 the root is reported as a float while the exact power
    optimum is kept in ``extra["power_value"]``.  Requires a cost that is
    nonnegative as given (no normalization offset).
    """
    if not isinstance(p, int) or p < 1:
        raise InputError("p must be an integer >= 1")
    if c.offset != 0:
        raise InputError("p-power costs must be nonnegative as given")
    mode = _validated(mus, c)
    entries = _reshape(
        [INF if is_pos_inf(c.value(idx)) else c.value(idx) ** p for idx in c.all_indices()],
        c.shape,
    )
    powered = CostTensor.dense(c.spaces, entries, mode)
    res = solve_multi(mus, powered)
    if res.status != "optimal":
        return res
    power_value = res.value
    if p == 1:
        value = power_value
    else:
        value = float(power_value) ** (1.0 / p)
    return SolveResult(
        res.plan, value, "optimal", res.dual, extra={"power_value": power_value, "p": p}
    )


# -- vertex sampling (used by tests and the random generator) ----------------


def sample_vertex(mus: Sequence[Measure], c: CostTensor, rng) -> Optional[Coupling]:
    """A uniformly-random-objective vertex of the finite-cost transport polytope.

    Returns None when no finite-cost plan exists.  Vertices of the finite-cost
    face are vertices of the full polytope, so the sample is a genuine basic
    feasible plan.
    """
    mode = _validated(mus, c)
    columns = sorted(c.finite_indices())
    if not columns:
        return None
    objective = [Fraction(rng.randrange(0, 10_000)) for _ in columns]
    A, b, _, _ = _transport_lp(mus, c, columns)
    res = solve_lp(A, b, objective)
    if res.status != "optimal":
        return None
    return _plan_from_lp(mus, columns, res.x, mode)


def sample_vertex_nw(mu: Measure, nu: Measure, rng) -> Coupling:
    """Random northwest-corner vertex of the full two-marginal polytope.

    Greedy filling along shuffled row and column orders yields a basic
    feasible solution; costs play no role.
    """
    mode = require_same_mode(mu, nu)
    rows = [i for i in range(len(mu.space)) if mu.weight(i) > 0]
    cols = [j for j in range(len(nu.space)) if nu.weight(j) > 0]
    rng.shuffle(rows)
    rng.shuffle(cols)
    remaining_mu = {i: mu.weight(i) for i in rows}
    remaining_nu = {j: nu.weight(j) for j in cols}
    atoms = {}
    ri, cj = 0, 0
    while ri < len(rows) and cj < len(cols):
        i, j = rows[ri], cols[cj]
        w = min(remaining_mu[i], remaining_nu[j])
        if w > 0:
            atoms[(i, j)] = atoms.get((i, j), 0) + w
        remaining_mu[i] -= w
        remaining_nu[j] -= w
        if remaining_mu[i] == 0:
            ri += 1
        if remaining_nu[j] == 0:
            cj += 1
    return Coupling([mu.space, nu.space], atoms, mode)
