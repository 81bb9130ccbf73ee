"""Instance generators: reference fixtures and seeded random problems.

``gen_geometric_chain`` builds the finite window of the classical
three-marginal chain construction in which a certified-monotone plan is
strictly beaten; ``gen_shift_circle`` builds the circle-grid fixture
separating path-boundedness from connectivity.  Both emit exact plans,
closed-form costs and expected verdicts in the file metadata, so acceptance
tests can compare against values derived independently of the solvers.
"""

from __future__ import annotations

import itertools
import random
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .core import CostTensor, Coupling, Measure, Space, SupportSet
from .errors import InputError
from .numbers import FLOAT, INF, RATIONAL, format_number
from .problemfile import ProblemFile


def default_chain_rate(a: int) -> Fraction:
    """Default per-level finite cost of the chain fixture: 1, 1/4, 1/8, 1/16, ..."""
    if a == 1:
        return Fraction(1)
    return Fraction(1, 2**a)


def gen_geometric_chain(K: int, f: Optional[Callable[[int], Fraction]] = None,
                        mode: str = RATIONAL) -> ProblemFile:
    """Finite window of the three-marginal chain counterexample, depth ``K``.

    Three equal marginals with geometric weights 2^-j on labels 1..2K and the
    lumped tail 4^-K on the rest label 2K+1.  The cost is symmetric under
    coordinate permutations: 1 on (1,1,1), f(a) on permutations of
    (a, a, a+1), 0 on the rest label's diagonal atom, +inf elsewhere.  The
    zero-cost rest atom stands for the truncated infinite tail; without it the
    finite window admits exactly one plan (the marginal equations are
    triangular) and nothing could beat anything.

    Two plans with identical marginals are emitted: ``main`` pairs levels as
    (2k-1, 2k-1, 2k) and is cyclically monotone, ``shift`` parks half the
    mass on (1,1,1) and pairs (2k, 2k, 2k+1).  Their exact costs obey

        cost(main)  = 3 * sum_{k<=K} 4^-k f(2k-1)
        cost(shift) = 1/2 + 3/2 * sum_{k<=K} 4^-k f(2k)

    and the gate  sum_{k<=K} 4^-k (f(2k-1) - f(2k)) > 1/6  guarantees
    cost(main) > cost(shift): the monotone plan is not optimal.
    """
    if K < 2:
        raise InputError("the chain fixture needs depth K >= 2")
    rate = f or default_chain_rate
    values = {}
    for a in range(1, 2 * K + 1):
        v = Fraction(rate(a))
        if not 0 < v <= 1:
            raise InputError(f"f({a}) = {v} is outside (0, 1]")
        values[a] = v
    for a in range(1, 2 * K):
        if values[a] < values[a + 1]:
            raise InputError(f"f must be non-increasing; f({a}) < f({a + 1})")
    condition_sum = sum(
        Fraction(1, 4**k) * (values[2 * k - 1] - values[2 * k]) for k in range(1, K + 1)
    )
    if condition_sum <= Fraction(1, 6):
        raise InputError(
            f"truncated gap condition fails: sum 4^-k (f(2k-1) - f(2k)) = "
            f"{condition_sum} <= 1/6"
        )

    n = 2 * K + 1
    rest = n  # label of the lumped tail
    labels = list(range(1, n + 1))
    space = Space(labels, name="levels")
    spaces = [space, space, space]

    def conv(v):
        return float(v) if mode == FLOAT else v

    entries = [[[INF] * n for _ in range(n)] for _ in range(n)]
    entries[0][0][0] = conv(Fraction(1))
    for a in range(1, 2 * K + 1):
        i, j = a - 1, a  # zero-based indices of labels a and a+1
        v = conv(values[a])
        entries[i][i][j] = v
        entries[i][j][i] = v
        entries[j][i][i] = v
    entries[rest - 1][rest - 1][rest - 1] = conv(Fraction(0))
    cost = CostTensor.dense(spaces, entries, mode)

    weights = [Fraction(1, 2**j) for j in range(1, 2 * K + 1)] + [Fraction(1, 4**K)]
    mu = Measure(space, tuple(conv(w) for w in weights), mode)

    main_atoms = {}
    for k in range(1, K + 1):
        w = conv(Fraction(1, 4**k))
        a, b = 2 * k - 2, 2 * k - 1  # indices of labels 2k-1 and 2k
        main_atoms[(a, a, b)] = w
        main_atoms[(a, b, a)] = w
        main_atoms[(b, a, a)] = w
    main_atoms[(rest - 1, rest - 1, rest - 1)] = conv(Fraction(1, 4**K))
    main = Coupling(spaces, main_atoms, mode)

    shift_atoms = {(0, 0, 0): conv(Fraction(1, 2))}
    for k in range(1, K + 1):
        w = conv(Fraction(1, 2 * 4**k))
        a, b = 2 * k - 1, 2 * k  # indices of labels 2k and 2k+1
        shift_atoms[(a, a, b)] = w
        shift_atoms[(a, b, a)] = w
        shift_atoms[(b, a, a)] = w
    shift_atoms[(rest - 1, rest - 1, rest - 1)] = conv(Fraction(1, 2 * 4**K))
    shift = Coupling(spaces, shift_atoms, mode)

    cost_main = 3 * sum(Fraction(1, 4**k) * values[2 * k - 1] for k in range(1, K + 1))
    cost_shift = Fraction(1, 2) + Fraction(3, 2) * sum(
        Fraction(1, 4**k) * values[2 * k] for k in range(1, K + 1)
    )

    pf = ProblemFile(
        mode=mode,
        spaces=spaces,
        measures=[mu, mu, mu],
        cost=cost,
        plan=main,
        plans={"main": main, "shift": shift},
        support=main.support(),
        metadata={
            "generator": "geometric-chain",
            "depth": K,
            "rest_label": rest,
            "residual_mass": format_number(Fraction(1, 4**K)),
            "condition_sum": format_number(condition_sum),
            "closed_form_cost_main": format_number(cost_main),
            "closed_form_cost_shift": format_number(cost_shift),
            "closed_form_gap": format_number(cost_main - cost_shift),
            "note": (
                "the zero-cost rest atom closes the truncated tail; the finite "
                "window is otherwise rigid (exactly one feasible plan)"
            ),
        },
    )
    return pf


def gen_shift_circle(n: int, shift, mode: str = RATIONAL) -> ProblemFile:
    """Circle grid {0, 1/n, ..., (n-1)/n} with diagonal support.

    The cost rule is 1 on the diagonal, 2 on pairs x = y + shift (mod 1) and
    +inf otherwise.  The generator requires the shift to be off-grid
    (shift * n is not an integer), so the middle branch never fires on grid
    points and the emitted tensor has the diagonal as its only finite
    entries.  The diagonal support is then cyclically monotone and
    path-bounded with uniform bound 0, yet not connecting for n > 1: no
    finite chain joins distinct grid points.
    """
    if n < 1:
        raise InputError("grid size must be >= 1")
    s = float(shift)
    if not 0 < s < 1:
        raise InputError("shift must lie strictly between 0 and 1")
    if abs(s * n - round(s * n)) <= 1e-9:
        raise InputError(f"shift {shift} is on-grid for n = {n}; the fixture needs an off-grid shift")
    if mode == RATIONAL:
        labels = [Fraction(k, n) for k in range(n)]
        one, two = Fraction(1), Fraction(2)
    else:
        labels = [k / n for k in range(n)]
        one, two = 1.0, 2.0
    space = Space(labels, name="circle")
    entries = [[one if i == j else INF for j in range(n)] for i in range(n)]
    cost = CostTensor.dense([space, space], entries, mode)
    support = SupportSet([space, space], [(i, i) for i in range(n)])
    if mode == RATIONAL:
        w = [Fraction(1, n)] * n
    else:
        w = [1.0 / n] * n
    mu = Measure(space, tuple(w), mode)
    return ProblemFile(
        mode=mode,
        spaces=[space, space],
        measures=[mu, mu],
        cost=cost,
        support=support,
        metadata={
            "generator": "shift-circle",
            "n": n,
            "shift": s,
            "off_grid_margin": abs(s * n - round(s * n)),
            "shift_branch_cost": float(two),
            "note": "the shift branch of the rule never fires on grid points",
            "expected": {
                "ccm": True,
                "path_bounded": True,
                "uniform_bound": 0,
                "connecting": n == 1,
            },
        },
    )


# -- seeded random instances --------------------------------------------------


def random_measure(rng: random.Random, space: Space, mode: str = RATIONAL) -> Measure:
    """Strictly positive random weights with small denominators, summing to 1."""
    n = len(space)
    raw = [rng.randint(1, 9) for _ in range(n)]
    total = sum(raw)
    if mode == RATIONAL:
        return Measure(space, tuple(Fraction(r, total) for r in raw), mode)
    return Measure(space, tuple(r / total for r in raw), mode)


def _random_cost_value(rng: random.Random, mode: str, denominator: int = 12, top: int = 60):
    v = Fraction(rng.randint(0, top), denominator)
    return float(v) if mode == FLOAT else v


def gen_random_two_marginal(
    rng: random.Random,
    n1: int,
    n2: int,
    mode: str = RATIONAL,
    inf_density: float = 0.0,
    ensure_feasible: bool = True,
) -> ProblemFile:
    """Random two-marginal instance with optional +inf entries.

    With ``ensure_feasible`` a random staircase assignment is kept finite on
    square instances and the instance is rejection-sampled (up to 50 draws)
    until a finite-cost plan exists; feasibility is certified by the
    compatibility check.
    """
    from .potential import check_compatibility  # local import, cycles

    sx = Space(list(range(n1)), name="X")
    sy = Space(list(range(n2)), name="Y")
    for attempt in range(50):
        entries = [
            [_random_cost_value(rng, mode) for _ in range(n2)] for _ in range(n1)
        ]
        if inf_density > 0:
            protected = set()
            if ensure_feasible and n1 == n2:
                perm = list(range(n1))
                rng.shuffle(perm)
                protected = {(i, perm[i]) for i in range(n1)}
            for i in range(n1):
                for j in range(n2):
                    if (i, j) not in protected and rng.random() < inf_density:
                        entries[i][j] = INF
        cost = CostTensor.dense([sx, sy], entries, mode)
        mu = random_measure(rng, sx, mode)
        nu = random_measure(rng, sy, mode)
        pf = ProblemFile(
            mode=mode,
            spaces=[sx, sy],
            measures=[mu, nu],
            cost=cost,
            metadata={"generator": "random", "seeded": True, "inf_density": inf_density},
        )
        if not ensure_feasible or inf_density == 0:
            return pf
        if check_compatibility(mu, nu, cost).is_positive:
            return pf
    raise InputError("could not sample a feasible instance in 50 draws; lower inf_density")


def gen_random_multi(
    rng: random.Random,
    sizes: Sequence[int],
    mode: str = RATIONAL,
    inf_density: float = 0.0,
    ensure_feasible: bool = True,
) -> ProblemFile:
    """Random N-marginal instance; feasibility via a protected random diagonal."""
    from .lp import solve_lp
    from .solve import _transport_lp  # shared LP assembly

    spaces = [Space(list(range(n)), name=f"X{a + 1}") for a, n in enumerate(sizes)]
    for attempt in range(50):
        shape = list(sizes)
        flat = {}
        protected = set()
        if ensure_feasible and inf_density > 0:
            m = max(sizes)
            for r in range(m):
                protected.add(tuple(r % n for n in sizes))
        for idx in itertools.product(*(range(n) for n in sizes)):
            if idx not in protected and rng.random() < inf_density:
                flat[idx] = INF
            else:
                flat[idx] = _random_cost_value(rng, mode)

        def nest(prefix):
            a = len(prefix)
            if a == len(sizes):
                return flat[tuple(prefix)]
            return [nest(prefix + [i]) for i in range(sizes[a])]

        cost = CostTensor.dense(spaces, nest([]), mode)
        mus = [random_measure(rng, s, mode) for s in spaces]
        pf = ProblemFile(
            mode=mode,
            spaces=spaces,
            measures=mus,
            cost=cost,
            metadata={"generator": "random-multi", "inf_density": inf_density},
        )
        if not ensure_feasible or inf_density == 0:
            return pf
        columns = sorted(cost.finite_indices())
        if columns:
            A, b, obj, _ = _transport_lp(mus, cost, columns)
            if solve_lp(A, b, obj, phase1_only=True).status != "infeasible":
                return pf
    raise InputError("could not sample a feasible instance in 50 draws; lower inf_density")
