import random

import pytest

from folip.errors import ParseError, TermError
from folip.syntax import parse_atom, parse_term
from folip.terms import (
    INT_MAX,
    INT_MIN,
    Arith,
    Atom,
    AtomTable,
    Fn,
    Var,
    apply_eval,
    format_atom,
    format_substitution,
    format_term,
    make_list,
    match,
)

bob, jim, alice = Fn("bob"), Fn("jim"), Fn("alice")


def test_intern_is_idempotent():
    table = AtomTable()
    first = table.intern(Atom("male", (bob,)))
    assert table.intern(Atom("male", (bob,))) == first
    assert len(table) == 1


def test_intern_reverse_lookup_prints_canonical_form():
    table = AtomTable()
    atom_id = table.intern(Atom("f", (3, make_list([2, 4]))))
    assert table.text(atom_id) == "f(3,[2,4])"


def test_intern_is_injective_and_dense():
    table = AtomTable()
    a = table.intern(Atom("parent", (bob, jim)))
    b = table.intern(Atom("parent", (jim, bob)))
    assert (a, b) == (0, 1)
    assert table.atom(b) == Atom("parent", (jim, bob))


def test_intern_rejects_non_ground_atom():
    with pytest.raises(TermError, match="non-ground atom"):
        AtomTable().intern(Atom("male", (Var("X"),)))


def test_match_binds_variables():
    assert match(Atom("parent", (Var("X"), Var("Y"))), Atom("parent", (bob, jim))) == {"X": bob, "Y": jim}


def test_match_repeated_variable_must_agree():
    assert match(Atom("parent", (Var("X"), Var("X"))), Atom("parent", (bob, jim))) is None


def test_match_predicate_mismatch_fails():
    assert match(Atom("male", (Var("X"),)), Atom("parent", (bob, jim))) is None


def test_match_extends_without_mutating():
    s = {"X": bob}
    assert match(Atom("parent", (Var("X"), Var("Y"))), Atom("parent", (bob, jim)), s) == {"X": bob, "Y": jim}
    assert s == {"X": bob}
    assert match(Atom("parent", (Var("X"), Var("Y"))), Atom("parent", (jim, bob)), s) is None


def test_match_rejects_arithmetic_pattern():
    pattern = Atom("f", (Arith("+", Var("N"), 1),))
    with pytest.raises(TermError, match="non-matchable pattern"):
        match(pattern, Atom("f", (3,)))


def test_apply_eval_folds_arithmetic_in_lists():
    n_plus_1 = Arith("+", Var("N"), 1)
    term = Atom("f", (n_plus_1, Fn(".", (n_plus_1, Var("L")))))
    result = apply_eval(term, {"N": 2, "L": make_list([5])})
    assert format_atom(result) == "f(3,[3,5])"


def test_apply_eval_plain_substitution():
    result = apply_eval(Atom("cb", (Var("N"), Var("L"))), {"N": 4, "L": make_list([7])})
    assert format_atom(result) == "cb(4,[7])"


def test_apply_eval_mod():
    assert apply_eval(Atom("g", (Arith("mod", Var("X"), 3),)), {"X": 9}) == Atom("g", (0,))


def test_apply_eval_unbound_variable():
    with pytest.raises(TermError, match="unbound variable"):
        apply_eval(Atom("g", (Var("X"),)), {})


def test_apply_eval_division_by_zero():
    with pytest.raises(TermError, match="arithmetic fault"):
        apply_eval(Atom("g", (Arith("//", Var("X"), 0),)), {"X": 1})


def test_apply_eval_overflow_is_a_fault():
    with pytest.raises(TermError, match="arithmetic fault"):
        apply_eval(Atom("g", (Arith("+", Var("X"), 1),)), {"X": INT_MAX})


def test_integer_literals_outside_64_bits_are_rejected():
    with pytest.raises(ParseError, match="out of range"):
        parse_term("f(99999999999999999999999)")
    with pytest.raises(ParseError, match="out of range"):
        parse_term("f(-9223372036854775809)")
    assert parse_term("f(-9223372036854775808)") == Fn("f", (INT_MIN,))
    assert parse_term("f(9223372036854775807)") == Fn("f", (INT_MAX,))


def test_apply_eval_underflow_is_a_fault():
    with pytest.raises(TermError, match="arithmetic fault"):
        apply_eval(Arith("*", Var("X"), 2), {"X": INT_MIN})


def test_integer_division_truncates():
    assert apply_eval(Arith("//", -7, 2), {}) == -3


def test_format_substitution_sorted_by_name():
    assert format_substitution({"Y": alice, "X": bob}) == "{X/bob, Y/alice}"


def test_format_list_with_tail():
    assert format_term(make_list([1, 2], Var("T"))) == "[1,2|T]"
    assert format_term(make_list([])) == "[]"


def _random_term(rng, depth=0):
    choice = rng.randrange(4 if depth < 3 else 2)
    if choice == 0:
        return rng.randint(-50, 50)
    if choice == 1:
        return Fn(rng.choice(("a", "b", "nil_x", "zz9")))
    if choice == 2:
        return Fn(rng.choice(("f", "g")), tuple(_random_term(rng, depth + 1) for _ in range(rng.randint(1, 3))))
    return make_list([_random_term(rng, depth + 1) for _ in range(rng.randint(0, 3))])


def test_ground_terms_survive_print_and_parse():
    rng = random.Random(7)
    for _ in range(200):
        term = _random_term(rng)
        assert parse_term(format_term(term)) == term


def test_match_then_apply_eval_reproduces_the_atom():
    rng = random.Random(11)
    for _ in range(100):
        ground = Atom("p", tuple(_random_term(rng) for _ in range(3)))
        pattern = Atom("p", (Var("X"), ground.args[1], Var("Z")))
        s = match(pattern, ground)
        assert s is not None
        assert apply_eval(pattern, s) == ground


def test_table_size_counts_distinct_atoms():
    table = AtomTable()
    atoms = [parse_atom(text) for text in ("p(a)", "p(b)", "p(a)", "q(a)", "p(b)")]
    for atom in atoms:
        table.intern(atom)
    assert len(table) == 3
    assert list(table)[2] == (2, parse_atom("q(a)"))
