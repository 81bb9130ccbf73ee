"""Command-line interface: certificate checks, solves, potentials, generators.

Every command reads one problem file, prints a machine-readable JSON report to
standard output (``--pretty`` adds a human summary) and exits with

    0   positive verdict / optimal solve
    1   negative verdict, witness included / no finite plan
    2   input error
    3   enumeration budget refused

``--verify-witness`` replays a negative witness through direct evaluation of
the problem data, independent of the checker that produced it, and fails the
run if the recorded violation does not reproduce.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import is_dataclass, fields as dc_fields
from fractions import Fraction

from . import __version__
from .core import (
    CycleWitness,
    InfiniteTupleWitness,
    PermutationWitness,
    SplittingViolationWitness,
    SubmeasureWitness,
    SubsetWitness,
    TripleWitness,
    ComponentsWitness,
    FarkasWitness,
)
from .errors import BudgetExceeded, InputError, OtcertError, PreconditionFailed
from .generators import gen_geometric_chain, gen_random_multi, gen_random_two_marginal, gen_shift_circle
from .monotone import check_ccm2, check_connecting, check_path_bounded
from .multi import SplittingTuple, check_ccm_multi, check_finitely_optimal, check_icm, verify_splitting
from .numbers import FLOAT, RATIONAL, TOL, format_number, is_neg_inf, is_pos_inf
from .potential import (
    PotentialVector,
    c_transform,
    check_compatibility,
    eta_from_support,
    rockafellar_potential,
    solve_inequality_system,
)
from .problemfile import ProblemFile, dump_problem, instance_hash, load_problem
from .solve import solve_linf, solve_multi, solve_ot2, solve_p

EXIT_POSITIVE = 0
EXIT_NEGATIVE = 1
EXIT_INPUT = 2
EXIT_BUDGET = 3


def _jsonify(obj):
    """Recursively convert witnesses, Fractions and infinities to JSON data."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        if is_pos_inf(obj):
            return "inf"
        if is_neg_inf(obj):
            return "-inf"
        return obj
    if isinstance(obj, Fraction):
        return format_number(obj)
    if is_dataclass(obj) and not isinstance(obj, type):
        out = {"kind": type(obj).__name__}
        for f in dc_fields(obj):
            out[f.name] = _jsonify(getattr(obj, f.name))
        return out
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    return str(obj)


def _report(command, pf, started, verdict=None, value=None, dual=None, witness=None,
            notes=None, extra=None):
    rep = {
        "command": command,
        "instance_hash": instance_hash(pf),
        "mode": pf.mode,
        "verdict": _jsonify(verdict),
        "witness": _jsonify(witness),
        "value": _jsonify(value),
        "dual": _jsonify(dual),
        "timings": {"total_s": round(time.perf_counter() - started, 6)},
    }
    if pf.cost is not None and pf.cost.offset != 0:
        rep["cost_offset"] = _jsonify(pf.cost.offset)
        rep.setdefault("notes", []).append(
            "negative inputs were shifted into [0, inf]; reported values are un-shifted"
        )
    if notes:
        rep.setdefault("notes", []).extend(notes)
    if extra:
        rep["extra"] = _jsonify(extra)
    return rep


def _emit(rep, pretty=False):
    print(json.dumps(rep, indent=2 if pretty else None, sort_keys=True))
    if pretty:
        verdict = rep.get("verdict")
        line = f"[{rep['command']}] verdict={verdict}"
        if rep.get("value") is not None:
            line += f" value={rep['value']}"
        print(line, file=sys.stderr)


# -- independent witness replay ----------------------------------------------


def replay_witness(pf: ProblemFile, witness) -> bool:
    """Recheck a witness by direct evaluation of the instance data."""
    c = pf.cost
    if isinstance(witness, CycleWitness):
        k = len(witness.nodes)
        original = sum(c.raw_value(t) for t in witness.nodes)
        reassigned = sum(
            c.raw_value((witness.nodes[(i + 1) % k][0], witness.nodes[i][1]))
            for i in range(k)
        )
        gap = TOL if pf.mode == FLOAT else 0
        return (
            original == witness.original
            and reassigned == witness.reassigned
            and original - reassigned > gap
        )
    if isinstance(witness, PermutationWitness):
        k = len(witness.subset)
        n_marg = len(witness.subset[0])
        vals = [c.raw_value(t) for t in witness.subset]
        re_vals = []
        for i in range(k):
            t = (witness.subset[i][0],) + tuple(
                witness.subset[witness.sigmas[a][i]][a + 1] for a in range(n_marg - 1)
            )
            re_vals.append(c.raw_value(t))
        if witness.comparison == "sum":
            original, reassigned = sum(vals), sum(re_vals)
        else:
            original, reassigned = max(vals), max(re_vals)
        gap = TOL if pf.mode == FLOAT else 0
        return (
            original == witness.original
            and reassigned == witness.reassigned
            and original - reassigned > gap
        )
    if isinstance(witness, InfiniteTupleWitness):
        return is_pos_inf(c.value(witness.node))
    if isinstance(witness, TripleWitness):
        potentials = pf.potentials
        if potentials is None:
            return False
        f = potentials[0]
        lhs = c.value((witness.x, witness.y)) - f[witness.x]
        rhs = c.value((witness.z, witness.y)) - f[witness.z]
        gap = TOL if pf.mode == FLOAT else 0
        return lhs == witness.lhs and rhs == witness.rhs and lhs - rhs > gap
    if isinstance(witness, SubsetWitness):
        mu, nu = pf.measures[0], pf.measures[1]
        idx = [mu.space.index(l) for l in witness.subset_labels]
        mu_mass = sum(mu.weights[i] for i in idx)
        blocked = [
            y
            for y in range(len(nu.space))
            if all(is_pos_inf(c.value((x, y))) for x in idx)
        ]
        nu_mass = sum(nu.weights[y] for y in blocked)
        if mu_mass != witness.mu_mass or nu_mass != witness.nu_mass:
            return False
        total = mu_mass + nu_mass
        return total >= 1 if witness.strict_required else total > 1
    if isinstance(witness, ComponentsWitness):
        # The split pair must not be chainable in at least one direction.
        nodes = []
        for comp in witness.components:
            nodes.extend(tuple(t) for t in comp)
        a, b = tuple(witness.pair[0]), tuple(witness.pair[1])
        return not (_chainable(c, nodes, a, b) and _chainable(c, nodes, b, a))
    if isinstance(witness, SplittingViolationWitness):
        if pf.potentials is None:
            return False
        lhs_terms = [vec[i] for vec, i in zip(pf.potentials, witness.idx)]
        lhs = sum(lhs_terms) if not any(is_neg_inf(v) for v in lhs_terms) else float("-inf")
        cv = c.value(tuple(witness.idx))
        if witness.kind == "inequality":
            return lhs == witness.lhs and not lhs <= cv
        return lhs == witness.lhs and lhs != cv
    if isinstance(witness, SubmeasureWitness):
        k = len(witness.subset)
        w = Fraction(1, k) if pf.mode == RATIONAL else 1.0 / k
        original = sum(w * c.value(t) for t in witness.subset)
        better = sum(wt * c.value(t) for t, wt in witness.better_atoms)
        mismatch = _marginal_mismatch(witness.subset, w, witness.better_atoms, len(c.spaces))
        return not mismatch and better < original
    if isinstance(witness, FarkasWitness):
        return True  # checked internally by the LP layer
    return False


def _chainable(c, nodes, a, b):
    frontier = [a]
    seen = {a}
    while frontier:
        x = frontier.pop()
        if x == b:
            return True
        for t in nodes:
            if t not in seen and not is_pos_inf(c.value((t[0], x[1]))):
                seen.add(t)
                frontier.append(t)
    return False


def _marginal_mismatch(subset, w, better_atoms, n_marg):
    for a in range(n_marg):
        lhs = {}
        for t in subset:
            lhs[t[a]] = lhs.get(t[a], 0) + w
        rhs = {}
        for t, wt in better_atoms:
            rhs[t[a]] = rhs.get(t[a], 0) + wt
        if lhs != rhs:
            return True
    return False


# -- command handlers ----------------------------------------------------------


def _witness_from_verdict(v):
    return v.witness if not v.is_positive else None


def _run_check(args) -> int:
    pf = load_problem(args.file)
    started = time.perf_counter()
    what = args.what
    notes = []
    if what in ("ccm", "icm", "connecting", "path-bounded"):
        G = pf.resolve_support()
        if what == "ccm":
            if G.n_marginals == 2 and args.method != "lp":
                if args.method == "bruteforce":
                    v = check_ccm2(G, pf.cost, "bruteforce", args.kmax or len(G))
                else:
                    v = check_ccm2(G, pf.cost, "exact")
            else:
                method = "lp" if args.method == "lp" else "bruteforce"
                v = check_ccm_multi(G, pf.cost, kmax=args.kmax or len(G), method=method)
        elif what == "icm":
            v = check_icm(G, pf.cost, kmax=args.kmax or len(G))
        elif what == "connecting":
            v = check_connecting(G, pf.cost)
        else:
            v = check_path_bounded(G, pf.cost)
            if v.outcome:
                notes.append(f"uniform_bound={_jsonify(v.info['uniform_bound'])}")
    elif what == "splitting":
        if pf.potentials is None:
            raise InputError("check splitting needs a 'potentials' block")
        tup = SplittingTuple(
            tuple(
                PotentialVector(s, vec, pf.mode)
                for s, vec in zip(pf.spaces, pf.potentials)
            )
        )
        v = verify_splitting(tup, pf.cost, pf.resolve_support())
    elif what == "compat":
        if pf.measures is None or len(pf.measures) != 2:
            raise InputError("check compat needs exactly two measures")
        v = check_compatibility(pf.measures[0], pf.measures[1], pf.cost)
    elif what == "finitely-optimal":
        if pf.plan is None:
            raise InputError("check finitely-optimal needs a plan")
        v = check_finitely_optimal(
            pf.plan, pf.cost, kmax=args.kmax or 3, objective=args.objective
        )
    else:  # pragma: no cover
        raise InputError(f"unknown check {what!r}")
    witness = _witness_from_verdict(v)
    rep = _report(f"check {what}", pf, started, verdict=v.outcome, witness=witness,
                  notes=notes, extra={k: v for k, v in v.info.items() if k != "bounds"})
    if args.verify_witness and witness is not None:
        ok = replay_witness(pf, witness)
        rep["witness_replay"] = "reproduced" if ok else "FAILED"
        if not ok:
            _emit(rep, args.pretty)
            print("witness replay failed", file=sys.stderr)
            return EXIT_INPUT
    _emit(rep, args.pretty)
    return EXIT_POSITIVE if v.is_positive else EXIT_NEGATIVE


def _run_solve(args) -> int:
    pf = load_problem(args.file)
    started = time.perf_counter()
    if pf.measures is None:
        raise InputError("solve commands need measures")
    what = args.what
    if what == "ot":
        res = solve_ot2(pf.measures[0], pf.measures[1], pf.cost)
        dual = (
            None
            if res.dual is None
            else {"phi": [_jsonify(v) for v in res.dual[0].values],
                  "psi": [_jsonify(v) for v in res.dual[1].values]}
        )
    elif what == "multi":
        res = solve_multi(pf.measures, pf.cost)
        dual = (
            None
            if res.dual is None
            else [[_jsonify(v) for v in pv.values] for pv in res.dual.potentials]
        )
    elif what == "linf":
        res = solve_linf(pf.measures, pf.cost)
        dual = None
    elif what == "p":
        res = solve_p(pf.measures, pf.cost, args.p)
        dual = None
    else:  # pragma: no cover
        raise InputError(f"unknown solve {what!r}")
    witness = None
    notes = []
    if res.status == "no-finite-plan":
        notes.append("no finite-cost plan exists; returning the product plan")
        if len(pf.measures) == 2:
            compat = check_compatibility(pf.measures[0], pf.measures[1], pf.cost)
            witness = compat.witness
    rep = _report(f"solve {what}", pf, started, verdict=res.status, value=res.value,
                  dual=dual, witness=witness, notes=notes, extra=res.extra)
    rep["plan"] = [
        {"idx": list(t), "weight": _jsonify(w)} for t, w in res.plan.sorted_atoms()
    ]
    _emit(rep, args.pretty)
    return EXIT_POSITIVE if res.status == "optimal" else EXIT_NEGATIVE


def _run_potential(args) -> int:
    pf = load_problem(args.file)
    started = time.perf_counter()
    what = args.what
    if what == "rockafellar":
        G = pf.resolve_support()
        base = tuple(args.base) if args.base else min(G.tuples)
        try:
            f = rockafellar_potential(G, pf.cost, base)
        except PreconditionFailed as e:
            rep = _report("potential rockafellar", pf, started, verdict=False,
                          witness=e.verdict.witness,
                          notes=["support is not cyclically monotone"])
            _emit(rep, args.pretty)
            return EXIT_NEGATIVE
        rep = _report("potential rockafellar", pf, started, verdict=True,
                      value=[_jsonify(v) for v in f.values],
                      extra={"base": list(base)})
        _emit(rep, args.pretty)
        return EXIT_POSITIVE
    if what == "transform":
        if pf.potentials is None:
            raise InputError("potential transform needs a 'potentials' block")
        f = PotentialVector(pf.spaces[0], pf.potentials[0], pf.mode)
        out = c_transform(f, pf.cost, args.direction)
        notes = ["transform attains +inf"] if out.attains_plus_inf else []
        rep = _report("potential transform", pf, started, verdict=True,
                      value=[_jsonify(v) for v in out.values], notes=notes)
        _emit(rep, args.pretty)
        return EXIT_POSITIVE
    if what == "system":
        G = pf.resolve_support()
        eta = eta_from_support(G, pf.cost)
        res = solve_inequality_system(eta)
        if res.feasible:
            rep = _report("potential system", pf, started, verdict=True,
                          value=[_jsonify(v) for v in res.solution],
                          extra={"nodes": [list(t) for t in G.sorted_tuples()]})
            _emit(rep, args.pretty)
            return EXIT_POSITIVE
        nodes = G.sorted_tuples()
        rep = _report("potential system", pf, started, verdict=False,
                      witness={"cycle": [list(nodes[i]) for i in res.cycle],
                               "eta_sum": _jsonify(res.cycle_sum)})
        _emit(rep, args.pretty)
        return EXIT_NEGATIVE
    raise InputError(f"unknown potential command {what!r}")  # pragma: no cover


def _run_gen(args) -> int:
    if args.what == "geometric-chain":
        pf = gen_geometric_chain(args.depth, mode=args.mode)
    elif args.what == "shift-circle":
        pf = gen_shift_circle(args.n, args.shift, mode=args.mode)
    elif args.what == "random":
        import random as _random

        rng = _random.Random(args.seed)
        sizes = args.sizes
        if len(sizes) == 2:
            pf = gen_random_two_marginal(
                rng, sizes[0], sizes[1], mode=args.mode, inf_density=args.inf_density
            )
        else:
            pf = gen_random_multi(rng, sizes, mode=args.mode, inf_density=args.inf_density)
    else:  # pragma: no cover
        raise InputError(f"unknown generator {args.what!r}")
    if args.output:
        dump_problem(pf, args.output)
        print(json.dumps({"command": f"gen {args.what}", "written": args.output,
                          "instance_hash": instance_hash(pf)}))
    else:
        from .problemfile import dumps_problem

        print(dumps_problem(pf))
    return EXIT_POSITIVE


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="otcert",
        description="exact discrete optimal transport with optimality certificates",
    )
    ap.add_argument("--version", action="version", version=f"otcert {__version__}")
    sub = ap.add_subparsers(dest="group", required=True)

    chk = sub.add_parser("check", help="run a certificate check on a problem file")
    chk.add_argument("what", choices=[
        "ccm", "icm", "connecting", "path-bounded", "splitting", "compat", "finitely-optimal",
    ])
    chk.add_argument("file")
    chk.add_argument("--method", default="exact", choices=["exact", "bruteforce", "lp"])
    chk.add_argument("--kmax", type=int, default=None)
    chk.add_argument("--objective", default="integral", choices=["integral", "linf"])
    chk.add_argument("--pretty", action="store_true")
    chk.add_argument("--verify-witness", action="store_true")
    chk.set_defaults(func=_run_check)

    slv = sub.add_parser("solve", help="solve a transport problem exactly")
    slv.add_argument("what", choices=["ot", "multi", "linf", "p"])
    slv.add_argument("file")
    slv.add_argument("--p", type=int, default=2, help="exponent for 'solve p'")
    slv.add_argument("--pretty", action="store_true")
    slv.set_defaults(func=_run_solve)

    pot = sub.add_parser("potential", help="potential construction and transforms")
    pot.add_argument("what", choices=["rockafellar", "transform", "system"])
    pot.add_argument("file")
    pot.add_argument("--base", type=int, nargs=2, default=None)
    pot.add_argument("--direction", default="x-to-y", choices=["x-to-y", "y-to-x"])
    pot.add_argument("--pretty", action="store_true")
    pot.set_defaults(func=_run_potential)

    gen = sub.add_parser("gen", help="generate fixture or random problem files")
    gen.add_argument("what", choices=["geometric-chain", "shift-circle", "random"])
    gen.add_argument("-o", "--output", default=None)
    gen.add_argument("--mode", default=RATIONAL, choices=[RATIONAL, FLOAT])
    gen.add_argument("--depth", type=int, default=6, help="truncation depth K")
    gen.add_argument("--n", type=int, default=8, help="grid size")
    gen.add_argument("--shift", type=float, default=0.35355339059327373, help="circle shift")
    gen.add_argument("--sizes", type=int, nargs="+", default=[4, 4])
    gen.add_argument("--inf-density", type=float, default=0.0)
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(func=_run_gen)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as e:
        print(json.dumps({"error": "budget", "message": str(e),
                          "estimate": e.estimate, "budget": e.budget}))
        return EXIT_BUDGET
    except (InputError, FileNotFoundError) as e:
        print(json.dumps({"error": "input", "message": str(e)}))
        return EXIT_INPUT
    except OtcertError as e:
        print(json.dumps({"error": "input", "message": str(e)}))
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
