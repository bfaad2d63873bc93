"""
Problem parser module.
Reads the .fol problem format into a validated Problem.

Validation covers literal order, binding coverage of positive literals and
guard inputs, guard recursion, declared signatures and cost rule patterns.
Every problem found is reported as a Diagnostic with line and column.
"""

import logging
from dataclasses import dataclass

from folip.errors import Diagnostic, ParseError
from folip.problem import (
    IN,
    OUT,
    Call,
    Compare,
    ContextPredicate,
    CostRule,
    FoClause,
    GuardCall,
    GuardRule,
    NegLit,
    PosLit,
    Problem,
)
from folip.syntax import (
    COMPARISONS,
    TokenStream,
    describe,
    parse_atom_tokens,
    parse_cost_expr,
    parse_expr,
    tokenize,
)
from folip.terms import CONS, NIL, Arith, Atom, Fn, Var, has_arith, is_ground, is_int, term_vars

logger = logging.getLogger(__name__)

KEYWORDS = ("type", "mode", "guard", "cost", "clause", "offset")


@dataclass
class _Located:
    """A parsed statement together with where it started."""

    value: object
    line: int
    column: int


def parse_problem(text):
    """
    Parse and validate a problem file.

    Args:
        text: contents of a .fol file

    Returns:
        Problem

    Raises:
        ParseError: with every diagnostic found
    """
    ts = TokenStream(tokenize(text))
    diagnostics = []
    types, modes, guards, costs, clauses, offsets = [], [], [], [], [], []
    buckets = {
        "type": types,
        "mode": modes,
        "guard": guards,
        "cost": costs,
        "clause": clauses,
        "offset": offsets,
    }
    readers = {
        "type": _read_type,
        "mode": _read_mode,
        "guard": _read_guard,
        "cost": _read_cost,
        "clause": _read_clause,
        "offset": _read_offset,
    }
    while not ts.at_end():
        tok = ts.peek()
        try:
            if tok.kind != "SYM" or tok.text not in KEYWORDS:
                ts.error(f"expected a statement keyword ({', '.join(KEYWORDS)}) but found {describe(tok)}", tok)
            ts.next()
            value = readers[tok.text](ts)
            ts.expect(".")
            buckets[tok.text].append(_Located(value, tok.line, tok.column))
        except ParseError as e:
            diagnostics.extend(e.diagnostics)
            while not ts.at_end() and not ts.at("."):
                ts.next()
            ts.accept(".")

    problem = _build(types, modes, guards, costs, clauses, offsets, diagnostics)
    if diagnostics:
        diagnostics.sort(key=lambda d: (d.line, d.column))
        raise ParseError(diagnostics)
    logger.debug(
        f"Parsed problem: {len(problem.clauses)} clauses, {len(problem.guards)} guards, "
        f"{len(problem.cost_rules)} cost rules"
    )
    return problem


def _read_type(ts):
    name = ts.expect_kind("SYM", "a predicate symbol").text
    typenames = []
    if ts.accept("("):
        typenames.append(ts.expect_kind("SYM", "a type name").text)
        while ts.accept(","):
            typenames.append(ts.expect_kind("SYM", "a type name").text)
        ts.expect(")")
    return name, tuple(typenames)


def _read_mode(ts):
    name = ts.expect_kind("SYM", "a guard predicate symbol").text
    ts.expect("(")
    modes = [_read_one_mode(ts)]
    while ts.accept(","):
        modes.append(_read_one_mode(ts))
    ts.expect(")")
    return name, tuple(modes)


def _read_one_mode(ts):
    tok = ts.peek()
    if tok.kind != "SYM" or tok.text not in (IN, OUT):
        ts.error(f"expected 'in' or 'out' but found {describe(tok)}", tok)
    return ts.next().text


def _read_guard(ts):
    head = parse_atom_tokens(ts)
    body = []
    if ts.accept(":-"):
        body.append(read_goal(ts))
        while ts.accept(","):
            body.append(read_goal(ts))
    return head, tuple(body)


def _read_cost(ts):
    pattern = parse_atom_tokens(ts)
    ts.expect("=")
    return CostRule(pattern, parse_cost_expr(ts))


def _read_offset(ts):
    sign = -1.0 if ts.accept("-") else 1.0
    tok = ts.peek()
    if tok.kind not in ("INT", "FLOAT"):
        ts.error(f"expected a number but found {describe(tok)}", tok)
    ts.next()
    return sign * float(tok.text)


def _read_clause(ts):
    name_tok = ts.expect_kind("STRING", "a quoted clause name")
    name = name_tok.text[1:-1].replace('\\"', '"').replace("\\\\", "\\")
    ts.expect(":")
    items = []
    if not ts.at("."):
        items.append(_read_item(ts))
        while ts.accept(","):
            items.append(_read_item(ts))
    return name, items


def _read_item(ts):
    tok = ts.peek()
    if tok.kind == "PUNCT" and tok.text in ("!", "~", "¬"):
        ts.next()
        return (parse_atom_tokens(ts), "neg", tok)
    if ts.at("guard", "SYM") and ts.peek(1).text == "{":
        ts.next()
        ts.next()
        goals = [read_goal(ts)]
        while ts.accept(","):
            goals.append(read_goal(ts))
        ts.expect("}")
        return (tuple(goals), "guard", tok)
    return (parse_atom_tokens(ts), "pos", tok)


def read_goal(ts):
    """Read a guard goal: a comparison or a context predicate call."""
    tok = ts.peek()
    left = parse_expr(ts)
    nxt = ts.peek()
    if nxt.kind == "PUNCT" and nxt.text in COMPARISONS:
        ts.next()
        return Compare(nxt.text, left, parse_expr(ts))
    if isinstance(left, Fn):
        return Call(Atom(left.name, left.args))
    ts.error(f"expected a guard call or comparison at {describe(tok)}", tok)


def _rewrite_head(head, body):
    """Move arithmetic out of a rule head into leading body equalities."""
    args = []
    extra = []
    for index, arg in enumerate(head.args):
        if has_arith(arg):
            var = Var(f"_H{index}")
            args.append(var)
            extra.append(Compare("=", var, arg))
        else:
            args.append(arg)
    return Atom(head.pred, tuple(args)), tuple(extra) + tuple(body)


def _build(types, modes, guards, costs, clauses, offsets, diagnostics):
    def report(located, message):
        diagnostics.append(Diagnostic(located.line, located.column, message))

    signatures = {}
    for located in types:
        name, typenames = located.value
        key = (name, len(typenames))
        if key in signatures:
            report(located, f"duplicate type declaration {name}/{len(typenames)}")
        signatures[key] = typenames

    predicates = {}
    for located in guards:
        head, body = located.value
        predicate = predicates.setdefault(head.key, ContextPredicate(head.pred, head.arity))
        if not body and is_ground(head) and not has_arith(head):
            predicate.facts.append(head.args)
        else:
            new_head, new_body = _rewrite_head(head, body)
            predicate.rules.append(GuardRule(new_head, new_body))
    rule_lines = {located.value[0].key: located for located in guards}

    for located in modes:
        name, mode_tuple = located.value
        predicate = predicates.get((name, len(mode_tuple)))
        if predicate is None:
            report(located, f"mode for undefined guard {name}/{len(mode_tuple)}")
        else:
            predicate.modes = mode_tuple

    for key, predicate in predicates.items():
        for rule in predicate.rules:
            _check_rule(predicate, rule, predicates, lambda m, k=key: report(rule_lines[k], m))
    for key in _recursive_guards(predicates):
        report(rule_lines[key], f"recursive guard {key[0]}/{key[1]}")

    cost_rules = []
    for located in costs:
        rule = located.value
        if has_arith(rule.pattern):
            report(located, f"non-matchable pattern in cost rule for {rule.pattern.pred}")
        _check_signature(rule.pattern, signatures, lambda m: report(located, m))
        missing = [v for v in term_vars(rule.expr) if v not in term_vars(rule.pattern)]
        if missing:
            report(located, f"unbound variable {missing[0]} in cost rule")
        cost_rules.append(rule)

    fo_clauses = []
    names = set()
    for located in clauses:
        name, items = located.value
        if name in names:
            report(located, f"duplicate clause name \"{name}\"")
        names.add(name)
        clause = _check_clause(name, items, located, predicates, signatures, diagnostics)
        fo_clauses.append(clause)

    offset = sum(located.value for located in offsets)
    return Problem(
        clauses=fo_clauses,
        guards=predicates,
        cost_rules=cost_rules,
        signatures=signatures,
        ground_mode=all(c.is_ground() for c in fo_clauses),
        offset=offset,
    )


def _check_signature(atom, signatures, report):
    typenames = signatures.get(atom.key)
    if typenames is None:
        report(f"undeclared predicate {atom.pred}/{atom.arity}")
        return
    for arg, typename in zip(atom.args, typenames):
        if isinstance(arg, Var):
            continue
        if typename == "int" and not (is_int(arg) or isinstance(arg, Arith)):
            report(f"type error: {atom.pred} expects int, got {arg}")
        elif typename == "list" and not (isinstance(arg, Fn) and arg.name in (CONS, NIL)):
            report(f"type error: {atom.pred} expects list, got {arg}")
        elif typename == "sym" and not (isinstance(arg, Fn) and not arg.args):
            report(f"type error: {atom.pred} expects a symbol, got {arg}")


def _goal_flow(goal, bound, predicates, report):
    """
    Check one guard goal against the set of bound variables and extend it.

    Returns:
        set: the variables bound after the goal succeeds
    """
    if isinstance(goal, Call):
        predicate = predicates.get(goal.atom.key)
        if predicate is None:
            report(f"undefined guard {goal.atom.pred}/{goal.atom.arity}")
            return bound | set(term_vars(goal.atom))
        for arg, mode in zip(goal.atom.args, predicate.effective_modes()):
            needed = set(term_vars(arg))
            if (mode == IN or has_arith(arg)) and not needed <= bound:
                report(f"insufficiently instantiated guard {goal.atom.pred}/{goal.atom.arity}")
                break
        return bound | set(term_vars(goal.atom))
    left = set(term_vars(goal.left))
    right = set(term_vars(goal.right))
    if goal.op == "=":
        if left <= bound and (right <= bound or not has_arith(goal.right)):
            return bound | right
        if right <= bound and not has_arith(goal.left):
            return bound | left
        report(f"insufficiently instantiated guard {goal.left} = {goal.right}")
        return bound | left | right
    if not (left | right) <= bound:
        report(f"insufficiently instantiated guard {goal.left} {goal.op} {goal.right}")
    return bound | left | right


def _check_rule(predicate, rule, predicates, report):
    modes = predicate.effective_modes()
    bound = set()
    for arg, mode in zip(rule.head.args, modes):
        if mode == IN:
            bound |= set(term_vars(arg))
    for goal in rule.body:
        bound = _goal_flow(goal, bound, predicates, report)
    for arg, mode in zip(rule.head.args, modes):
        if mode == OUT and not set(term_vars(arg)) <= bound:
            report(f"unbounded guard output in {predicate.name}/{predicate.arity}")
            return


def _recursive_guards(predicates):
    """Return the keys of guard predicates that lie on a call cycle."""
    graph = {}
    for key, predicate in predicates.items():
        callees = set()
        for rule in predicate.rules:
            for goal in rule.body:
                if isinstance(goal, Call) and goal.atom.key in predicates:
                    callees.add(goal.atom.key)
        graph[key] = callees

    cyclic = set()
    state = {}

    def visit(key, stack):
        state[key] = "active"
        stack.append(key)
        for callee in sorted(graph[key]):
            if state.get(callee) == "active":
                cyclic.update(stack[stack.index(callee):])
            elif callee not in state:
                visit(callee, stack)
        stack.pop()
        state[key] = "done"

    for key in sorted(graph):
        if key not in state:
            visit(key, [])
    return sorted(cyclic)


def _check_clause(name, items, located, predicates, signatures, diagnostics):
    body = []
    bound = set()
    seen_positive = False

    def report_at(tok, message):
        diagnostics.append(Diagnostic(tok.line, tok.column, f"clause \"{name}\": {message}"))

    for value, kind, tok in items:
        if kind == "guard":
            for goal in value:
                bound = _goal_flow(goal, bound, predicates, lambda m, t=tok: report_at(t, m))
            body.append(GuardCall(value))
            continue
        _check_signature(value, signatures, lambda m, t=tok: report_at(t, m))
        variables = set(term_vars(value))
        if kind == "neg":
            if seen_positive:
                report_at(tok, "positive literal before negative literal")
            for sub in _arith_subterms(value):
                if not set(term_vars(sub)) <= bound:
                    report_at(tok, f"non-matchable pattern {value}")
                    break
            generator = not variables <= bound
            bound |= variables
            body.append(NegLit(value, generator))
        else:
            seen_positive = True
            if not variables <= bound:
                report_at(tok, f"ungrounded positive literal {value}")
            body.append(PosLit(value))
    return FoClause(name, tuple(body), located.line)


def _arith_subterms(t):
    if isinstance(t, Arith):
        return [t]
    if isinstance(t, (Fn, Atom)):
        found = []
        for arg in t.args:
            found.extend(_arith_subterms(arg))
        return found
    return []


def load_problem(path):
    """Read and parse a .fol file."""
    with open(path, encoding="utf-8") as handle:
        return parse_problem(handle.read())
