"""Command-line interface: exit codes, report schema, witness replay."""

import json
from fractions import Fraction

import pytest

from otcert.cli import main, replay_witness
from otcert.core import CostTensor, Measure, Space, SupportSet
from otcert.generators import gen_geometric_chain, gen_shift_circle
from otcert.numbers import INF
from otcert.problemfile import ProblemFile, dump_problem, load_problem


@pytest.fixture
def circle_file(tmp_path):
    path = tmp_path / "circle.json"
    dump_problem(gen_shift_circle(4, 0.3), str(path))
    return str(path)


@pytest.fixture
def chain_file(tmp_path):
    path = tmp_path / "chain.json"
    dump_problem(gen_geometric_chain(2), str(path))
    return str(path)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out.strip().splitlines()
    return code, json.loads(out[-1])


REPORT_KEYS = {"command", "instance_hash", "mode", "verdict", "witness", "value", "dual", "timings"}


class TestExitCodesAndSchema:
    def test_positive_check_exits_zero(self, capsys, circle_file):
        code, rep = run_cli(capsys, "check", "ccm", circle_file)
        assert code == 0
        assert REPORT_KEYS <= set(rep)
        assert rep["verdict"] is True and rep["witness"] is None
        assert rep["timings"]["total_s"] >= 0

    def test_negative_check_exits_one_with_witness(self, capsys, circle_file):
        code, rep = run_cli(capsys, "check", "connecting", circle_file)
        assert code == 1
        assert rep["verdict"] is False
        assert rep["witness"]["kind"] == "ComponentsWitness"

    def test_input_error_exits_two(self, capsys, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        code = main(["check", "ccm", str(bad)])
        out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert code == 2 and out["error"] == "input"

    def test_missing_file_exits_two(self, capsys):
        code = main(["solve", "ot", "/nonexistent/file.json"])
        assert code == 2

    def test_budget_refusal_exits_three(self, capsys, tmp_path):
        X = Space(list(range(14)))
        c = CostTensor.dense([X, X, X], [[[0] * 14] * 14] * 14)
        G = SupportSet([X, X, X], [(i, i, i) for i in range(14)])
        pf = ProblemFile(mode="rational", spaces=[X, X, X], cost=c, support=G)
        path = tmp_path / "big.json"
        dump_problem(pf, str(path))
        code, rep = run_cli(capsys, "check", "ccm", str(path), "--kmax", "14")
        assert code == 3
        assert rep["error"] == "budget" and rep["estimate"] > rep["budget"]


class TestChecks:
    def test_bruteforce_method(self, capsys, circle_file):
        code, rep = run_cli(capsys, "check", "ccm", circle_file, "--method", "bruteforce", "--kmax", "4")
        assert code == 0

    def test_path_bounded_reports_uniform_bound(self, capsys, circle_file):
        code, rep = run_cli(capsys, "check", "path-bounded", circle_file)
        assert code == 0
        assert "uniform_bound=0" in rep["notes"][0]

    def test_compat(self, capsys, circle_file):
        code, rep = run_cli(capsys, "check", "compat", circle_file)
        # Only the diagonal is finite, so masses must match exactly: the
        # uniform instance is compatible but not strongly so.
        assert code == 0 and rep["verdict"] == "compatible"

    def test_icm_and_finitely_optimal(self, capsys, chain_file):
        code, rep = run_cli(capsys, "check", "icm", chain_file, "--kmax", "3")
        assert code == 0
        code, rep = run_cli(capsys, "check", "finitely-optimal", chain_file, "--kmax", "2")
        assert code == 0

    def test_splitting_check_from_potentials_block(self, capsys, tmp_path):
        X = Space([0, 1])
        c = CostTensor.dense([X, X], [[0, 2], [3, 0]])
        pf = ProblemFile(
            mode="rational",
            spaces=[X, X],
            cost=c,
            support=SupportSet([X, X], [(0, 0), (1, 1)]),
            potentials=[(Fraction(0), Fraction(0)), (Fraction(0), Fraction(0))],
        )
        path = tmp_path / "split.json"
        dump_problem(pf, str(path))
        code, rep = run_cli(capsys, "check", "splitting", str(path))
        assert code == 0 and rep["verdict"] is True


class TestWitnessReplay:
    def test_cycle_witness_replays(self, capsys, tmp_path):
        X = Space([0, 1])
        c = CostTensor.dense([X, X], [[0, 1], [1, 0]])
        pf = ProblemFile(
            mode="rational", spaces=[X, X], cost=c,
            support=SupportSet([X, X], [(0, 1), (1, 0)]),
        )
        path = tmp_path / "anti.json"
        dump_problem(pf, str(path))
        code, rep = run_cli(capsys, "check", "ccm", str(path), "--verify-witness")
        assert code == 1
        assert rep["witness_replay"] == "reproduced"

    def test_replay_functions_directly(self):
        from otcert.core import CycleWitness

        X = Space([0, 1])
        c = CostTensor.dense([X, X], [[0, 1], [1, 0]])
        pf = ProblemFile(mode="rational", spaces=[X, X], cost=c)
        good = CycleWitness(((0, 1), (1, 0)), Fraction(2), Fraction(0), Fraction(2))
        assert replay_witness(pf, good)
        tampered = CycleWitness(((0, 1), (1, 0)), Fraction(3), Fraction(0), Fraction(3))
        assert not replay_witness(pf, tampered)

    def test_connecting_witness_replays(self, capsys, circle_file):
        code, rep = run_cli(capsys, "check", "connecting", circle_file, "--verify-witness")
        assert code == 1 and rep["witness_replay"] == "reproduced"


class TestSolveCommands:
    def test_solve_ot_reports_plan_and_dual(self, capsys, circle_file):
        code, rep = run_cli(capsys, "solve", "ot", circle_file)
        assert code == 0
        assert rep["verdict"] == "optimal" and rep["value"] == "1"
        assert {"idx": [0, 0], "weight": "1/4"} in rep["plan"]
        assert "phi" in rep["dual"]

    def test_solve_multi_gap_matches_fixture(self, capsys, chain_file):
        code, rep = run_cli(capsys, "solve", "multi", chain_file)
        assert code == 0
        pf = load_problem(chain_file)
        assert rep["value"] == pf.metadata["closed_form_cost_shift"]

    def test_solve_linf_and_p(self, capsys, circle_file):
        code, rep = run_cli(capsys, "solve", "linf", circle_file)
        assert code == 0 and rep["value"] == "1"
        code, rep = run_cli(capsys, "solve", "p", circle_file, "--p", "3")
        assert code == 0 and rep["value"] == 1.0

    def test_no_finite_plan_exits_one_with_subset_witness(self, capsys, tmp_path):
        X = Space([0, 1])
        c = CostTensor.dense([X, X], [[INF, INF], [1, 1]])
        mu = Measure(X, (Fraction(1, 2), Fraction(1, 2)))
        pf = ProblemFile(mode="rational", spaces=[X, X], measures=[mu, mu], cost=c)
        path = tmp_path / "blocked.json"
        dump_problem(pf, str(path))
        code, rep = run_cli(capsys, "solve", "ot", str(path))
        assert code == 1
        assert rep["verdict"] == "no-finite-plan"
        assert rep["witness"]["kind"] == "SubsetWitness"


class TestPotentialCommands:
    def test_rockafellar_default_base(self, capsys, circle_file):
        code, rep = run_cli(capsys, "potential", "rockafellar", circle_file)
        assert code == 0
        assert rep["value"] == ["0", "0", "0", "0"]

    def test_rockafellar_failure_carries_witness(self, capsys, tmp_path):
        X = Space([0, 1])
        c = CostTensor.dense([X, X], [[0, 1], [1, 0]])
        pf = ProblemFile(
            mode="rational", spaces=[X, X], cost=c,
            support=SupportSet([X, X], [(0, 1), (1, 0)]),
        )
        path = tmp_path / "anti.json"
        dump_problem(pf, str(path))
        code, rep = run_cli(capsys, "potential", "rockafellar", str(path))
        assert code == 1 and rep["witness"]["kind"] == "CycleWitness"

    def test_transform(self, capsys, tmp_path):
        X = Space([0, 1])
        c = CostTensor.dense([X, X], [[0, 1], [1, 0]])
        pf = ProblemFile(
            mode="rational", spaces=[X, X], cost=c,
            potentials=[(Fraction(0), Fraction(0))],
        )
        path = tmp_path / "pot.json"
        dump_problem(pf, str(path))
        code, rep = run_cli(capsys, "potential", "transform", str(path))
        assert code == 0 and rep["value"] == ["0", "0"]

    def test_system(self, capsys, circle_file):
        code, rep = run_cli(capsys, "potential", "system", circle_file)
        assert code == 0
        assert rep["value"] == [0, 0, 0, 0]  # exact integers serialize as numbers


class TestGenCommands:
    def test_gen_writes_loadable_files(self, capsys, tmp_path):
        out = tmp_path / "g.json"
        code = main(["gen", "geometric-chain", "--depth", "2", "-o", str(out)])
        assert code == 0
        pf = load_problem(str(out))
        assert pf.metadata["generator"] == "geometric-chain"
        capsys.readouterr()

    def test_gen_random_two_and_multi(self, capsys, tmp_path):
        out = tmp_path / "r.json"
        assert main(["gen", "random", "--sizes", "3", "3", "--seed", "5", "-o", str(out)]) == 0
        pf = load_problem(str(out))
        assert len(pf.spaces) == 2
        assert main(["gen", "random", "--sizes", "2", "2", "2", "--seed", "5", "-o", str(out)]) == 0
        assert len(load_problem(str(out)).spaces) == 3
        capsys.readouterr()

    def test_gen_to_stdout(self, capsys):
        code = main(["gen", "shift-circle", "--n", "3", "--shift", "0.4"])
        assert code == 0
        text = capsys.readouterr().out
        assert '"mode"' in text
