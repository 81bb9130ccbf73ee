"""Potentials: transforms, Rockafellar construction, inequality systems, compatibility."""

from fractions import Fraction

import pytest

from otcert.core import CostTensor, Measure, SupportSet
from otcert.errors import BudgetExceeded, InputError, PreconditionFailed
from otcert.monotone import check_path_bounded
from otcert.numbers import INF, NEG_INF
from otcert.potential import (
    PotentialVector,
    c_transform,
    check_compatibility,
    eta_from_support,
    potential_from_system,
    rockafellar_potential,
    solve_inequality_system,
    verify_subgradient,
)
from otcert.solve import solve_ot2

from conftest import chain_potential_oracle, make_spaces, uniform


def random_finite_cost(rng, n1, n2):
    X, Y = make_spaces(n1, n2)
    entries = [[Fraction(rng.randint(0, 12)) for _ in range(n2)] for _ in range(n1)]
    return X, Y, CostTensor.dense([X, Y], entries)


def random_ccm_support(rng, n1, n2):
    """Support of an exactly optimal plan: monotone by optimality."""
    X, Y, c = random_finite_cost(rng, n1, n2)
    mu = uniform(X)
    nu = uniform(Y)
    res = solve_ot2(mu, nu, c)
    return res.plan.support(), c


class TestCTransform:
    def test_order_reversing(self, rng):
        for _ in range(30):
            X, Y, c = random_finite_cost(rng, 4, 3)
            f1_vals = [Fraction(rng.randint(-5, 5)) for _ in range(4)]
            f2_vals = [v + Fraction(rng.randint(0, 4)) for v in f1_vals]
            f1 = PotentialVector(X, tuple(f1_vals))
            f2 = PotentialVector(X, tuple(f2_vals))
            t1 = c_transform(f1, c)
            t2 = c_transform(f2, c)
            assert all(a >= b for a, b in zip(t1.values, t2.values))

    def test_triple_transform_is_single_transform(self, rng):
        for _ in range(50):
            X, Y, c = random_finite_cost(rng, rng.randint(1, 4), rng.randint(1, 4))
            f = PotentialVector(X, tuple(Fraction(rng.randint(-6, 6)) for _ in range(len(X))))
            once = c_transform(f, c, "x-to-y")
            back = c_transform(once, c, "y-to-x")
            thrice = c_transform(back, c, "x-to-y")
            assert once.values == thrice.values

    def test_constant_shift(self, rng):
        X, Y, c = random_finite_cost(rng, 3, 3)
        f = PotentialVector(X, (Fraction(1), Fraction(0), Fraction(2)))
        t = Fraction(7, 3)
        shifted = PotentialVector(X, tuple(v + t for v in f.values))
        assert c_transform(shifted, c).values == tuple(v - t for v in c_transform(f, c).values)

    def test_blocked_column_is_flagged_plus_inf(self):
        X, Y = make_spaces(2, 2)
        c = CostTensor.dense([X, Y], [[0, INF], [0, INF]])
        f = PotentialVector(X, (Fraction(0), Fraction(0)))
        out = c_transform(f, c)
        assert out.values[1] == INF
        assert out.attains_plus_inf

    def test_all_neg_inf_rejected(self):
        X, Y = make_spaces(2, 2)
        c = CostTensor.dense([X, Y], [[0, 1], [1, 0]])
        f = PotentialVector(X, (NEG_INF, NEG_INF))
        with pytest.raises(InputError):
            c_transform(f, c)


class TestRockafellar:
    def test_base_value_is_zero(self, rng):
        for _ in range(20):
            G, c = random_ccm_support(rng, rng.randint(2, 5), rng.randint(2, 5))
            base = min(G.tuples)
            f = rockafellar_potential(G, c, base)
            assert f.values[base[0]] == 0
            assert f.base == base

    def test_singleton_support_is_one_chain(self):
        X, Y = make_spaces(3, 3)
        entries = [[Fraction((i + 2 * j) % 5) for j in range(3)] for i in range(3)]
        c = CostTensor.dense([X, Y], entries)
        G = SupportSet([X, Y], [(1, 2)])
        f = rockafellar_potential(G, c, (1, 2))
        for x in range(3):
            assert f.values[x] == c.value((x, 2)) - c.value((1, 2))

    def test_matches_exhaustive_chain_oracle(self, rng):
        for _ in range(25):
            G, c = random_ccm_support(rng, rng.randint(2, 4), rng.randint(2, 4))
            base = min(G.tuples)
            f = rockafellar_potential(G, c, base)
            oracle = chain_potential_oracle(G, c, base)
            for x in range(len(c.spaces[0])):
                expected = oracle[x] if oracle[x] is not None else NEG_INF
                assert f.values[x] == expected

    def test_output_passes_subgradient_check(self, rng):
        for _ in range(30):
            G, c = random_ccm_support(rng, rng.randint(2, 5), rng.randint(2, 5))
            f = rockafellar_potential(G, c, min(G.tuples))
            assert verify_subgradient(f, G, c).outcome

    def test_non_monotone_support_raises_with_witness(self):
        X, Y = make_spaces(2, 2)
        c = CostTensor.dense([X, Y], [[0, 1], [1, 0]])
        G = SupportSet([X, Y], [(0, 1), (1, 0)])
        with pytest.raises(PreconditionFailed) as exc:
            rockafellar_potential(G, c, (0, 1))
        assert exc.value.verdict.witness.gain == 2

    def test_blocked_off_support_points_get_neg_inf(self):
        X, Y = make_spaces(2, 1)
        c = CostTensor.dense([X, Y], [[1], [INF]])
        G = SupportSet([X, Y], [(0, 0)])
        f = rockafellar_potential(G, c, (0, 0))
        assert f.values == (0, NEG_INF)

    def test_base_must_be_in_support(self):
        X, Y = make_spaces(2, 2)
        c = CostTensor.dense([X, Y], [[0, 1], [1, 0]])
        G = SupportSet([X, Y], [(0, 0)])
        with pytest.raises(InputError):
            rockafellar_potential(G, c, (1, 1))


class TestVerifySubgradient:
    def test_perturbed_potential_fails_with_witness(self):
        X, Y = make_spaces(2, 2)
        c = CostTensor.dense([X, Y], [[0, 1], [1, 0]])
        G = SupportSet([X, Y], [(0, 0), (1, 1)])
        f = rockafellar_potential(G, c, (0, 0))
        bumped = list(f.values)
        bumped[1] += 1
        bad = PotentialVector(X, tuple(bumped))
        v = verify_subgradient(bad, G, c)
        assert not v.outcome
        w = v.witness
        assert (w.x, w.y) in G.tuples
        assert w.lhs > w.rhs

    def test_infinite_support_cost_fails(self):
        X, Y = make_spaces(2, 2)
        c = CostTensor.dense([X, Y], [[INF, 0], [0, 0]])
        G = SupportSet([X, Y], [(0, 0)])
        f = PotentialVector(X, (Fraction(0), Fraction(0)))
        v = verify_subgradient(f, G, c)
        assert not v.outcome
        assert v.witness.node == (0, 0)


class TestInequalitySystem:
    def test_vacuous_constraints_give_zero(self):
        eta = [[0, NEG_INF], [NEG_INF, 0]]
        res = solve_inequality_system(eta)
        assert res.feasible and res.solution == (0, 0)

    def test_two_index_contradiction(self):
        # needs a1 - a2 >= 1 and a2 - a1 >= 0: the cycle sums to 1 > 0.
        eta = [[0, 1], [0, 0]]
        res = solve_inequality_system(eta)
        assert not res.feasible
        assert res.cycle_sum == 1

    def test_solution_satisfies_all_constraints(self, rng):
        for _ in range(50):
            m = rng.randint(2, 6)
            eta = [[0 if i == j else (NEG_INF if rng.random() < 0.3 else Fraction(rng.randint(-5, 5)))
                    for j in range(m)] for i in range(m)]
            res = solve_inequality_system(eta)
            if not res.feasible:
                k = len(res.cycle)
                s = sum(eta[res.cycle[i]][res.cycle[(i + 1) % k]] for i in range(k))
                assert s == res.cycle_sum and s > 0
            else:
                a = res.solution
                for i in range(m):
                    for j in range(m):
                        if eta[i][j] != NEG_INF:
                            assert eta[i][j] <= a[i] - a[j]

    def test_plus_inf_entry_rejected(self):
        with pytest.raises(InputError):
            solve_inequality_system([[0, INF], [0, 0]])

    def test_nonzero_diagonal_rejected(self):
        with pytest.raises(InputError):
            solve_inequality_system([[1]])

    def test_feasible_iff_path_bounded(self, rng):
        for _ in range(80):
            n = rng.randint(2, 4)
            X, Y = make_spaces(n, n)
            entries = [
                [INF if rng.random() < 0.3 else Fraction(rng.randint(0, 8))
                 for _ in range(n)]
                for _ in range(n)
            ]
            c = CostTensor.dense([X, Y], entries)
            tuples = {(i, j) for i in range(n) for j in range(n)
                      if c.value((i, j)) != INF and rng.random() < 0.5}
            if not tuples:
                continue
            G = SupportSet([X, Y], tuples)
            res = solve_inequality_system(eta_from_support(G, c))
            assert res.feasible == check_path_bounded(G, c).outcome

    def test_system_route_gives_working_potential(self, rng):
        # Support-system solutions extend to potentials on the whole space.
        for _ in range(40):
            G, c = random_ccm_support(rng, rng.randint(2, 4), rng.randint(2, 4))
            f = potential_from_system(G, c)
            assert verify_subgradient(f, G, c).outcome
            # The support values solve the restricted inequalities directly.
            nodes = G.sorted_tuples()
            res = solve_inequality_system(eta_from_support(G, c))
            for i, (xi, yi) in enumerate(nodes):
                assert f.values[xi] == res.solution[i]


class TestAlternativeSubgradient:
    def test_equality_form_agrees_under_finiteness_hypothesis(self, rng):
        # Documented equality check, not a separate certificate: whenever some
        # x' has both c(x', y) and f(x') finite, membership of (x, y) in the
        # subgradient (inequality form) coincides with the tight-transform
        # form f(x) + f^c(y) = c(x, y) < inf.
        for _ in range(40):
            n1, n2 = rng.randint(2, 4), rng.randint(2, 4)
            X, Y = make_spaces(n1, n2)
            entries = [
                [INF if rng.random() < 0.25 else Fraction(rng.randint(0, 9))
                 for _ in range(n2)]
                for _ in range(n1)
            ]
            c = CostTensor.dense([X, Y], entries)
            f = PotentialVector(
                X,
                tuple(
                    NEG_INF if rng.random() < 0.15 else Fraction(rng.randint(-4, 4))
                    for _ in range(n1)
                ),
            )
            if f.all_neg_inf:
                continue
            fc = c_transform(f, c)
            for x in range(n1):
                for y in range(n2):
                    hypothesis = any(
                        c.value((z, y)) != INF and f.values[z] != NEG_INF
                        for z in range(n1)
                    )
                    if not hypothesis:
                        continue
                    cxy = c.value((x, y))
                    in_inequality_form = (
                        cxy != INF
                        and f.values[x] != NEG_INF
                        and all(
                            c.value((z, y)) == INF
                            or f.values[z] == NEG_INF
                            or cxy - f.values[x] <= c.value((z, y)) - f.values[z]
                            for z in range(n1)
                        )
                    )
                    in_equality_form = (
                        cxy != INF
                        and f.values[x] != NEG_INF
                        and fc.values[y] != INF
                        and f.values[x] + fc.values[y] == cxy
                    )
                    assert in_inequality_form == in_equality_form


class TestCompatibility:
    def test_all_finite_is_strong(self, rng):
        X, Y = make_spaces(3, 3)
        entries = [[Fraction(rng.randint(0, 9)) for _ in range(3)] for _ in range(3)]
        c = CostTensor.dense([X, Y], entries)
        v = check_compatibility(uniform(X), uniform(Y), c)
        assert v.outcome == "strongly-compatible"

    def test_single_blocked_arc_is_compatible_not_strong(self):
        X, Y = make_spaces(2, 2)
        c = CostTensor.dense([X, Y], [[1, INF], [1, 1]])
        v = check_compatibility(uniform(X), uniform(Y), c)
        assert v.outcome == "compatible"
        blocker = v.info["strictness_blocker"]
        assert blocker.mu_mass + blocker.nu_mass == 1

    def test_fully_blocked_row_is_incompatible(self):
        X, Y = make_spaces(2, 2)
        c = CostTensor.dense([X, Y], [[INF, INF], [1, 1]])
        v = check_compatibility(uniform(X), uniform(Y), c)
        assert v.outcome == "incompatible"
        w = v.witness
        assert w.mu_mass == Fraction(1, 2) and w.nu_mass == 1
        assert w.mu_mass + w.nu_mass == Fraction(3, 2)

    def test_compatible_iff_finite_plan_exists(self, rng):
        for _ in range(60):
            n1, n2 = rng.randint(2, 4), rng.randint(2, 4)
            X, Y = make_spaces(n1, n2)
            entries = [
                [INF if rng.random() < 0.35 else Fraction(rng.randint(0, 9))
                 for _ in range(n2)]
                for _ in range(n1)
            ]
            c = CostTensor.dense([X, Y], entries)
            mu, nu = uniform(X), uniform(Y)
            compat = check_compatibility(mu, nu, c).is_positive
            feasible = solve_ot2(mu, nu, c).status == "optimal"
            assert compat == feasible

    def test_support_cap(self):
        X, Y = make_spaces(23, 2)
        c = CostTensor.dense([X, Y], [[1, 1]] * 23)
        with pytest.raises(BudgetExceeded):
            check_compatibility(uniform(X), uniform(Y), c)

    def test_non_probability_measure_rejected(self):
        X, Y = make_spaces(2, 2)
        c = CostTensor.dense([X, Y], [[1, 1], [1, 1]])
        bad = Measure(X, (Fraction(1, 2), Fraction(1, 4)))
        with pytest.raises(InputError):
            check_compatibility(bad, uniform(Y), c)
