import json

import pytest

from conftest import load_text, problem_path
from folip.cli import EXIT_INFEASIBLE, EXIT_INPUT, EXIT_LIMIT, EXIT_OK, EXIT_VIOLATION, RunConfig, build_parser, run
from folip.config import Config
from folip.parser import load_problem
from folip.solver import solve


def test_solve_prints_the_text_report(capsys):
    assert run(["solve", problem_path("hooker.fol")]) == EXIT_OK
    out = capsys.readouterr().out
    assert "status: optimal" in out
    assert "objective: 2.0" in out


def test_contradiction_exits_with_no_model(capsys):
    assert run(["solve", problem_path("contradiction.fol")]) == EXIT_INFEASIBLE
    assert "status: no Herbrand model" in capsys.readouterr().out


def test_cut_round_limit_exits_with_limit(capsys):
    assert run(["solve", problem_path("father.fol"), "--cut-rounds", "1"]) == EXIT_LIMIT
    assert "status: limit reached" in capsys.readouterr().out


def test_structured_matches_text(capsys):
    assert run(["solve", problem_path("ancestor.fol"), "--format", "structured"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert run(["solve", problem_path("ancestor.fol")]) == EXIT_OK
    text = capsys.readouterr().out
    assert report["status"] == "optimal"
    assert f"objective: {report['objective']!r}" in text
    assert len(report["model"]) == 5


def test_check_reports_the_violated_clause(capsys):
    code = run(["check", problem_path("father.fol"), "--model", problem_path("father-model.txt")])
    assert code == EXIT_VIOLATION
    out = capsys.readouterr().out
    assert "clause: father" in out
    assert "grounding: {X/bob, Y/alice}" in out


def test_check_accepts_a_model(tmp_path, capsys):
    model = tmp_path / "model.txt"
    model.write_text(load_text("father-model.txt") + "father(bob,alice)\n")
    assert run(["check", problem_path("father.fol"), "--model", str(model)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "status: ok"


def test_mln_reports_satisfied_weight(capsys):
    assert run(["mln", problem_path("smokers.mln"), "--format", "structured"]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["objective"] == pytest.approx(1.5)
    assert report["satisfied_weight"] == pytest.approx(15.9 - 1.5)
    assert report["penalty_atoms"] > 0


def test_mln_compile_only_writes_a_solvable_problem(tmp_path):
    output = tmp_path / "smokers.fol"
    assert run(["mln", problem_path("smokers.mln"), "--compile-only", "--output", str(output)]) == EXIT_OK
    problem = load_problem(str(output))
    assert problem.ground_mode
    assert solve(problem).objective == pytest.approx(1.5, abs=1e-6)


@pytest.mark.parametrize("argv", [
    ["solve"],
    ["frobnicate", "x.fol"],
    ["check", "x.fol"],
    ["solve", "x.fol", "--compile-only"],
    ["solve", "x.fol", "--time-limit", "0"],
    ["solve", "x.fol", "--node-limit", "-3"],
    ["solve", "x.fol", "--format", "xml"],
])
def test_bad_arguments_are_input_errors(argv):
    assert run(argv) == EXIT_INPUT


def test_help_exits_cleanly(capsys):
    assert run(["--help"]) == EXIT_OK
    assert "branch-price-and-cut" in capsys.readouterr().out


def test_missing_file_is_an_input_error():
    assert run(["solve", "does-not-exist.fol"]) == EXIT_INPUT


def test_parse_error_is_an_input_error(tmp_path):
    bad = tmp_path / "bad.fol"
    bad.write_text('clause "c": p(a).\n')
    assert run(["solve", str(bad)]) == EXIT_INPUT


def test_flags_override_the_environment(monkeypatch):
    monkeypatch.setenv("FOLIP_GAP", "0.5")
    monkeypatch.setenv("FOLIP_IFF", "false")
    config = Config()
    args = build_parser(config).parse_args(["mln", "x.mln", "--iff"])
    run_config = RunConfig.from_args(args, config)
    assert run_config.iff is True
    assert run_config.gap == 0.5
    assert run_config.solver_config()["lp_config"]["pivot_tol"] == 1e-9


def test_invalid_environment_is_an_input_error(monkeypatch):
    monkeypatch.setenv("FOLIP_GAP", "-1")
    assert run(["solve", problem_path("hooker.fol")]) == EXIT_INPUT


def test_unparseable_environment_is_an_input_error(monkeypatch, caplog):
    monkeypatch.setenv("FOLIP_GAP", "abc")
    assert run(["solve", problem_path("hooker.fol")]) == EXIT_INPUT
    assert "FOLIP_" in caplog.text


def test_dump_lp_writes_the_root_relaxation(tmp_path):
    listing = tmp_path / "root.lp"
    assert run(["solve", problem_path("hooker.fol"), "--dump-lp", str(listing)]) == EXIT_OK
    text = listing.read_text()
    assert text.startswith("minimize\n")
    assert "  c14: x1 + x4 >= 1" in text
    assert text.endswith("end\n")
