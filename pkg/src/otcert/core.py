"""Domain types and the two cost functionals.

The toolkit works over finite labeled spaces.  A problem instance consists of
spaces, probability measures on them, an extended-real cost tensor in
``[0, +inf]`` (negative inputs are accepted and shifted, see
:class:`CostTensor`), and either a coupling (a sparse transport plan) or a bare
support set to be certified.

All types are immutable after construction and every operation is pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterator, Optional, Sequence

import numpy as np

from .errors import InputError, ShapeError
from .numbers import (
    FLOAT,
    INF,
    RATIONAL,
    Number,
    as_number,
    check_mode,
    ext_mul_weight,
    is_finite,
    is_neg_inf,
    is_pos_inf,
    numbers_equal,
    require_same_mode,
)

DENSE_ENTRY_CAP = 10**7


class Space:
    """An ordered finite set of distinct point labels.

    The label <-> index bijection is stable for a given instance; all sparse
    structures (couplings, support sets) speak in indices.
    """

    __slots__ = ("labels", "_index", "name")

    def __init__(self, labels: Sequence[Any], name: str = ""):
        labels = tuple(labels)
        if len(labels) == 0:
            raise InputError("a space needs at least one point")
        index = {}
        for i, lab in enumerate(labels):
            if lab in index:
                raise InputError(f"duplicate label {lab!r} in space")
            index[lab] = i
        self.labels = labels
        self._index = index
        self.name = name

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise InputError(f"label {label!r} not in space") from None

    def __repr__(self):
        nm = f" {self.name}" if self.name else ""
        return f"Space{nm}(n={len(self.labels)})"


@dataclass(frozen=True)
class Measure:
    """Nonnegative weight vector on a space.

    The constructor checks shape and nonnegativity only; unit total mass is
    the job of :func:`validate_measure` so that invalid vectors can still be
    inspected and reported.
    """

    space: Space
    weights: tuple
    mode: str = RATIONAL

    def __post_init__(self):
        check_mode(self.mode)
        weights = tuple(as_number(w, self.mode) for w in self.weights)
        if len(weights) != len(self.space):
            raise ShapeError(
                f"measure has {len(weights)} weights for a space of size {len(self.space)}"
            )
        for w in weights:
            if not is_finite(w):
                raise InputError("measure weights must be finite")
        object.__setattr__(self, "weights", weights)

    def mass(self) -> Number:
        return sum(self.weights, start=Fraction(0) if self.mode == RATIONAL else 0.0)

    def weight(self, i: int) -> Number:
        return self.weights[i]

    def support_indices(self) -> tuple:
        return tuple(i for i, w in enumerate(self.weights) if w > 0)


def uniform_measure(space: Space, mode: str = RATIONAL) -> Measure:
    n = len(space)
    if mode == RATIONAL:
        return Measure(space, tuple(Fraction(1, n) for _ in range(n)), mode)
    return Measure(space, tuple(1.0 / n for _ in range(n)), mode)


class CostTensor:
    """N-dimensional extended-real cost array, N >= 2, entries in ``[0, +inf]``.

    Dense tensors are normalized at construction: if the finite minimum of the
    raw entries is negative, every entry is shifted by that minimum and the
    shift is recorded in :attr:`offset` (``raw = stored + offset``).  Constant
    shifts are "non-mixing" tilts, so every certificate is unaffected; solvers
    add the offset back when reporting values.

    Rule-backed tensors (``from_rule``) evaluate a callback on label tuples and
    must already be nonnegative; they are required above ``10**7`` entries.
    """

    __slots__ = ("spaces", "mode", "offset", "_flat", "_rule", "rule_name")

    def __init__(self, spaces, mode, offset, flat, rule, rule_name):
        self.spaces = tuple(spaces)
        self.mode = mode
        self.offset = offset
        self._flat = flat
        self._rule = rule
        self.rule_name = rule_name

    # -- constructors -------------------------------------------------------

    @classmethod
    def dense(cls, spaces: Sequence[Space], entries, mode: str = RATIONAL) -> "CostTensor":
        spaces = tuple(spaces)
        check_mode(mode)
        if len(spaces) < 2:
            raise ShapeError("a cost tensor needs at least two marginals")
        shape = tuple(len(s) for s in spaces)
        total = 1
        for n in shape:
            total *= n
        if total > DENSE_ENTRY_CAP:
            raise InputError(
                f"dense tensor with {total} entries exceeds the cap {DENSE_ENTRY_CAP}; "
                "use a rule-backed cost"
            )
        flat = [None] * total
        it = _iter_nested(entries, shape)
        min_finite = None
        for pos, v in enumerate(it):
            v = as_number(v, mode)
            if is_neg_inf(v):
                raise InputError("-inf is not a valid cost entry")
            flat[pos] = v
            if is_finite(v) and (min_finite is None or v < min_finite):
                min_finite = v
        offset: Number = 0 if mode == RATIONAL else 0.0
        if min_finite is not None and min_finite < 0:
            offset = min_finite
            flat = [v if is_pos_inf(v) else v - offset for v in flat]
        return cls(spaces, mode, offset, flat, None, None)

    @classmethod
    def from_rule(
        cls,
        spaces: Sequence[Space],
        rule: Callable[..., Number],
        mode: str = RATIONAL,
        name: Optional[str] = None,
    ) -> "CostTensor":
        spaces = tuple(spaces)
        check_mode(mode)
        if len(spaces) < 2:
            raise ShapeError("a cost tensor needs at least two marginals")
        zero: Number = 0 if mode == RATIONAL else 0.0
        return cls(spaces, mode, zero, None, rule, name)

    # -- access -------------------------------------------------------------

    @property
    def shape(self) -> tuple:
        return tuple(len(s) for s in self.spaces)

    @property
    def n_marginals(self) -> int:
        return len(self.spaces)

    def size(self) -> int:
        total = 1
        for n in self.shape:
            total *= n
        return total

    def _flat_index(self, idx: tuple) -> int:
        pos = 0
        for i, s in zip(idx, self.spaces):
            pos = pos * len(s) + i
        return pos

    def value(self, idx: tuple) -> Number:
        """Normalized entry (in ``[0, +inf]``) at an index tuple."""
        if len(idx) != len(self.spaces):
            raise ShapeError(f"index tuple {idx} does not match tensor arity {len(self.spaces)}")
        if self._flat is not None:
            return self._flat[self._flat_index(idx)]
        labels = tuple(s.labels[i] for s, i in zip(self.spaces, idx))
        v = as_number(self._rule(*labels), self.mode)
        if is_neg_inf(v) or (is_finite(v) and v < 0):
            raise InputError(f"rule-backed cost produced a negative value at {labels!r}")
        return v

    def raw_value(self, idx: tuple) -> Number:
        """Entry before the nonnegativity shift (what the user supplied)."""
        v = self.value(idx)
        if is_pos_inf(v):
            return INF
        return v + self.offset

    def all_indices(self) -> Iterator[tuple]:
        return itertools.product(*(range(len(s)) for s in self.spaces))

    def finite_indices(self) -> Iterator[tuple]:
        for idx in self.all_indices():
            if is_finite(self.value(idx)):
                yield idx

    def finite_values(self) -> Iterator[Number]:
        for idx in self.finite_indices():
            yield self.value(idx)

    def materialize(self) -> "CostTensor":
        """Dense copy of a rule-backed tensor (respecting the entry cap)."""
        if self._flat is not None:
            return self
        nested = _nest([self.value(idx) for idx in self.all_indices()], self.shape)
        return CostTensor.dense(self.spaces, nested, self.mode)

    def as_numpy(self) -> np.ndarray:
        """Raw entries as a float ndarray (+inf preserved); lossy in rational mode."""
        flat = [float(self.raw_value(idx)) for idx in self.all_indices()]
        return np.array(flat, dtype=float).reshape(self.shape)

    def __repr__(self):
        kind = self.rule_name or ("dense" if self._flat is not None else "rule")
        return f"CostTensor({kind}, shape={self.shape}, mode={self.mode})"


def _iter_nested(entries, shape):
    """Yield entries of a nested sequence of the given shape in row-major order."""
    if len(shape) == 1:
        if len(entries) != shape[0]:
            raise ShapeError(f"expected {shape[0]} entries, got {len(entries)}")
        yield from entries
        return
    if len(entries) != shape[0]:
        raise ShapeError(f"expected {shape[0]} slices, got {len(entries)}")
    for sub in entries:
        yield from _iter_nested(sub, shape[1:])


def _nest(flat, shape):
    if len(shape) == 1:
        return list(flat)
    step = 1
    for n in shape[1:]:
        step *= n
    return [_nest(flat[i * step : (i + 1) * step], shape[1:]) for i in range(shape[0])]


@dataclass(frozen=True)
class SupportSet:
    """A finite set of index tuples (no weights)."""

    spaces: tuple
    tuples: frozenset

    def __init__(self, spaces: Sequence[Space], tuples):
        object.__setattr__(self, "spaces", tuple(spaces))
        tups = frozenset(tuple(t) for t in tuples)
        for t in tups:
            if len(t) != len(self.spaces):
                raise ShapeError(f"support tuple {t} does not match arity {len(self.spaces)}")
            for i, s in zip(t, self.spaces):
                if not 0 <= i < len(s):
                    raise ShapeError(f"index {i} out of range in support tuple {t}")
        object.__setattr__(self, "tuples", tups)

    def __len__(self):
        return len(self.tuples)

    def sorted_tuples(self) -> tuple:
        """Canonical (lexicographic) enumeration used for deterministic witnesses."""
        return tuple(sorted(self.tuples))

    @property
    def n_marginals(self) -> int:
        return len(self.spaces)

    def project(self, axes: Sequence[int]) -> "SupportSet":
        """Projection onto a subset of coordinates (order preserved)."""
        spaces = [self.spaces[a] for a in axes]
        tups = {tuple(t[a] for a in axes) for t in self.tuples}
        return SupportSet(spaces, tups)


class Coupling:
    """Sparse probability measure on a product space: index tuple -> weight > 0.

    Zero-weight atoms are dropped at construction; total mass must be 1 (exact
    in rational mode, within tolerance in float mode).
    """

    __slots__ = ("spaces", "atoms", "mode")

    def __init__(self, spaces: Sequence[Space], atoms: dict, mode: str = RATIONAL):
        check_mode(mode)
        self.spaces = tuple(spaces)
        clean = {}
        for idx, w in atoms.items():
            idx = tuple(idx)
            if len(idx) != len(self.spaces):
                raise ShapeError(f"atom {idx} does not match arity {len(self.spaces)}")
            for i, s in zip(idx, self.spaces):
                if not 0 <= i < len(s):
                    raise ShapeError(f"index {i} out of range in atom {idx}")
            w = as_number(w, mode)
            if not is_finite(w):
                raise InputError("atom weights must be finite")
            if w < 0:
                raise InputError(f"atom {idx} has negative weight {w}")
            if w == 0:
                continue
            if idx in clean:
                raise InputError(f"duplicate atom {idx}")
            clean[idx] = w
        self.atoms = clean
        self.mode = mode
        total = self.mass()
        if not numbers_equal(total, 1, mode):
            raise InputError(f"coupling mass is {total}, expected 1")

    def mass(self) -> Number:
        return sum(self.atoms.values(), start=Fraction(0) if self.mode == RATIONAL else 0.0)

    def support(self) -> SupportSet:
        return SupportSet(self.spaces, self.atoms.keys())

    def sorted_atoms(self) -> list:
        return sorted(self.atoms.items())

    @property
    def n_marginals(self) -> int:
        return len(self.spaces)

    def __repr__(self):
        return f"Coupling({len(self.atoms)} atoms, mode={self.mode})"


def product_coupling(measures: Sequence[Measure]) -> Coupling:
    """The independent coupling mu_1 x ... x mu_N (atoms on positive-weight tuples)."""
    mode = require_same_mode(*measures)
    atoms = {}
    supports = [m.support_indices() for m in measures]
    for idx in itertools.product(*supports):
        w = 1 if mode == RATIONAL else 1.0
        for m, i in zip(measures, idx):
            w = w * m.weight(i)
        atoms[idx] = w
    return Coupling([m.space for m in measures], atoms, mode)


# -- verdicts and witnesses --------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    """Outcome of a certificate check plus a machine-checkable witness.

    ``outcome`` is a bool for binary checks or a string for three-way checks
    (compatibility).  A negative outcome always carries a witness that an
    independent evaluator can recheck in time linear in the witness size.
    ``info`` holds auxiliary exact data such as path bounds or components.
    """

    outcome: Any
    witness: Any = None
    info: dict = field(default_factory=dict)

    @property
    def is_positive(self) -> bool:
        if isinstance(self.outcome, bool):
            return self.outcome
        return self.outcome in ("compatible", "strongly-compatible")


@dataclass(frozen=True)
class CycleWitness:
    """A cyclic reassignment on support pairs that strictly lowers total cost.

    ``nodes`` is a cycle (t_1, ..., t_k) of support tuples; the reassignment
    pairs x of t_{i+1} with y of t_i.  ``gain = original - reassigned > 0``.
    """

    nodes: tuple
    original: Number
    reassigned: Number
    gain: Number


@dataclass(frozen=True)
class InfiniteTupleWitness:
    """A support tuple whose own cost is +inf, violating a finiteness hypothesis."""

    node: tuple


@dataclass(frozen=True)
class ComponentsWitness:
    """Partition of the support graph into strong components, with a split pair."""

    components: tuple
    pair: tuple


@dataclass(frozen=True)
class TripleWitness:
    """A violated subgradient inequality c(x,y) - f(x) <= c(z,y) - f(z)."""

    x: int
    y: int
    z: int
    lhs: Number
    rhs: Number


@dataclass(frozen=True)
class PermutationWitness:
    """A subset of support tuples plus reassigning permutations lowering the cost.

    ``sigmas[m]`` permutes coordinate m+2 (coordinate 1 stays fixed).  For the
    bottleneck variant the comparison is between maxima instead of sums.
    """

    subset: tuple
    sigmas: tuple
    original: Number
    reassigned: Number
    comparison: str = "sum"


@dataclass(frozen=True)
class SubsetWitness:
    """A subset A of supp(mu) violating a marriage-type compatibility condition."""

    subset_labels: tuple
    mu_mass: Number
    blocked_labels: tuple
    nu_mass: Number
    strict_required: bool


@dataclass(frozen=True)
class SplittingViolationWitness:
    """An index tuple where a splitting tuple breaks inequality or tightness."""

    idx: tuple
    lhs: Number
    cost: Number
    kind: str  # "inequality" or "equality"


@dataclass(frozen=True)
class SubmeasureWitness:
    """A finitely-supported submeasure that is not optimal for its own marginals."""

    subset: tuple
    value: Number
    better_value: Number
    better_atoms: tuple


@dataclass(frozen=True)
class FarkasWitness:
    """Infeasibility certificate for a linear system (row multipliers)."""

    row_multipliers: tuple
    note: str = ""


# -- core operations ---------------------------------------------------------


def validate_measure(m: Measure) -> Verdict:
    """Accept iff all weights are >= 0 and the total mass is 1 (mode tolerance)."""
    for i, w in enumerate(m.weights):
        if w < 0:
            return Verdict(False, witness={"negative_index": i, "weight": w})
    total = m.mass()
    if not numbers_equal(total, 1, m.mode):
        return Verdict(False, witness={"deficit": total - 1})
    return Verdict(True)


def marginal(g: Coupling, axis: int) -> Measure:
    """Push a coupling to its ``axis``-th marginal (axes are 1-based)."""
    if not 1 <= axis <= g.n_marginals:
        raise InputError(f"axis {axis} out of range 1..{g.n_marginals}")
    a = axis - 1
    n = len(g.spaces[a])
    zero = Fraction(0) if g.mode == RATIONAL else 0.0
    weights = [zero] * n
    for idx, w in g.atoms.items():
        weights[idx[a]] += w
    return Measure(g.spaces[a], tuple(weights), g.mode)


def _check_plan_tensor(g: Coupling, c: CostTensor):
    require_same_mode(g, c)
    if g.n_marginals != c.n_marginals or any(
        len(sg) != len(sc) for sg, sc in zip(g.spaces, c.spaces)
    ):
        raise ShapeError("coupling and cost tensor shapes do not match")


def integral_cost(g: Coupling, c: CostTensor) -> Number:
    """Total cost sum w_i * c(atom_i); +inf iff some atom sits on a +inf entry.

    Reported against the raw (un-shifted) cost: the normalization offset is
    added back, weighted by the total mass 1.
    """
    _check_plan_tensor(g, c)
    total = Fraction(0) if g.mode == RATIONAL else 0.0
    for idx, w in g.atoms.items():
        v = c.value(idx)
        if is_pos_inf(v):
            return INF
        total += ext_mul_weight(w, v)
    return total + c.offset


def linf_cost(g: Coupling, c: CostTensor) -> Number:
    """Essential supremum of the cost under the plan = max over support atoms."""
    _check_plan_tensor(g, c)
    best = None
    for idx in g.atoms:
        v = c.value(idx)
        if is_pos_inf(v):
            return INF
        if best is None or v > best:
            best = v
    if best is None:
        raise InputError("coupling has no atoms")
    return best + c.offset


def tilt_cost(c: CostTensor, p: Sequence, q: Sequence) -> CostTensor:
    """Add non-mixing terms: c~(x, y) = c(x, y) + p(x) + q(y)  (two marginals).

    +inf entries stay +inf.  The result is re-normalized like any dense tensor,
    which is again a non-mixing shift and therefore certificate-neutral.
    """
    if c.n_marginals != 2:
        raise ShapeError("tilt_cost is a two-marginal operation")
    n1, n2 = c.shape
    p = [as_number(v, c.mode) for v in p]
    q = [as_number(v, c.mode) for v in q]
    if len(p) != n1 or len(q) != n2:
        raise ShapeError("tilt vectors must match the two space sizes")
    for v in itertools.chain(p, q):
        if not is_finite(v):
            raise InputError("tilt vectors must be finite")
    entries = [
        [
            INF if is_pos_inf(c.value((i, j))) else c.raw_value((i, j)) + p[i] + q[j]
            for j in range(n2)
        ]
        for i in range(n1)
    ]
    return CostTensor.dense(c.spaces, entries, c.mode)
