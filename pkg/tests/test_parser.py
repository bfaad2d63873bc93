import pytest

from conftest import load_text
from folip.errors import ParseError
from folip.parser import parse_problem
from folip.problem import Compare, GuardCall, NegLit, PosLit, format_problem
from folip.syntax import parse_atom, tokenize
from folip.terms import Arith, Var

WALLS = """
type position(int, int, int).
guard wall_between(I, X, Y, X+1, Y) :- I mod 3 = 0.
clause "walls": !position(I, X1, Y1), !position(I+1, X2, Y2), guard{wall_between(I, X1, Y1, X2, Y2)}.
"""


def test_walls_clause_shape():
    problem = parse_problem(WALLS)
    clause = problem.clause("walls")
    assert len(clause.neg_literals) == 2
    assert all(lit.generator for lit in clause.neg_literals)
    assert len(clause.guards) == 1
    assert clause.pos_literals == []


def test_head_arithmetic_moves_into_the_body():
    problem = parse_problem(WALLS)
    rule = problem.guards[("wall_between", 5)].rules[0]
    assert rule.head.args[3] == Var("_H3")
    assert rule.body[0] == Compare("=", Var("_H3"), Arith("+", Var("X"), 1))


def test_cost_rule_with_float_coercion():
    problem = parse_problem("type cb(int, list).\ncost cb(X, L) = 1.0/float(X).\n")
    rule = problem.cost_rules[0]
    assert rule.pattern.key == ("cb", 2)
    assert problem.cost_of(parse_atom("cb(4,[7])")) == 0.25


def test_ungrounded_positive_literal():
    text = 'type p(sym).\ntype q(sym).\nclause "bad": !p(X), q(Y).\n'
    with pytest.raises(ParseError) as info:
        parse_problem(text)
    assert any("ungrounded positive literal" in m for m in info.value.messages())
    assert info.value.diagnostics[0].line == 3


def test_positive_before_negative():
    text = 'type p(sym).\ntype q(sym).\nclause "bad": q(a), !p(a).\n'
    with pytest.raises(ParseError, match="positive literal before negative literal"):
        parse_problem(text)


def test_recursive_guard():
    text = "guard a(X) :- b(X).\nguard b(X) :- a(X).\n"
    with pytest.raises(ParseError, match="recursive guard"):
        parse_problem(text)


def test_undeclared_predicate():
    with pytest.raises(ParseError, match="undeclared predicate p/1"):
        parse_problem('clause "c": p(a).\n')


def test_int_argument_type_is_checked():
    with pytest.raises(ParseError, match="expects int"):
        parse_problem('type p(int).\nclause "c": p(a).\n')


def test_all_diagnostics_are_collected():
    text = 'type p(sym).\nclause "a" p(a).\nclause "b": q(b).\n'
    with pytest.raises(ParseError) as info:
        parse_problem(text)
    assert [d.line for d in info.value.diagnostics] == [2, 3]


def test_unknown_character_reports_position():
    with pytest.raises(ParseError) as info:
        tokenize("type p.\n  $")
    assert (info.value.diagnostics[0].line, info.value.diagnostics[0].column) == (2, 3)


def test_test_literal_after_generator():
    problem = parse_problem(load_text("father.fol"))
    clause = problem.clause("father")
    assert [lit.generator for lit in clause.neg_literals] == [True, True]
    ancestor = parse_problem(load_text("ancestor.fol"))
    step = ancestor.clause("step")
    assert isinstance(step.body[1], NegLit)
    assert isinstance(step.body[2], PosLit)


def test_ground_mode_only_for_variable_free_problems():
    assert parse_problem(load_text("hooker.fol")).ground_mode
    assert not parse_problem(load_text("father.fol")).ground_mode


def test_guard_item_in_clause():
    problem = parse_problem(load_text("maze.fol"))
    move = problem.clause("move")
    assert isinstance(move.body[1], GuardCall)
    assert len(move.pos_literals) == 4


def test_unbounded_guard_output_rejected():
    text = "mode next(in, out).\nguard next(X, Y) :- X > 0.\n"
    with pytest.raises(ParseError, match="unbounded guard output"):
        parse_problem(text)


def test_offset_statements_add_up():
    assert parse_problem("offset 1.5.\noffset -0.5.\n").offset == 1.0


@pytest.mark.parametrize("name", ["hooker.fol", "contradiction.fol", "ancestor.fol", "father.fol", "maze.fol"])
def test_parse_of_printed_problem_is_idempotent(name):
    problem = parse_problem(load_text(name))
    printed = format_problem(problem)
    again = parse_problem(printed)
    assert again == problem
    assert format_problem(again) == printed


def test_out_of_range_literal_in_a_clause():
    text = 'type p(int).\nclause "big": p(99999999999999999999999).\n'
    with pytest.raises(ParseError, match="out of range") as info:
        parse_problem(text)
    assert info.value.diagnostics[0].line == 2


def test_computed_head_position_defaults_to_out():
    problem = parse_problem(WALLS + "guard open(I, X) :- I > X.\nguard same(X, Y) :- X = Y.\n")
    assert problem.guards[("wall_between", 5)].effective_modes() == ("in", "in", "in", "out", "in")
    assert problem.guards[("open", 2)].effective_modes() == ("in", "in")
    assert problem.guards[("same", 2)].effective_modes() == ("in", "in")


def test_mode_statement_overrides_the_inferred_modes():
    problem = parse_problem(WALLS + "mode wall_between(in, in, in, in, in).\n")
    assert problem.guards[("wall_between", 5)].effective_modes() == ("in",) * 5
