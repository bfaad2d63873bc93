"""
Problem definition module.
First-order clauses, context predicates, cost rules, and their evaluation:
the cost function over ground atoms and guard (context predicate) calls.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from folip.errors import CostError, GuardError, TermError
from folip.terms import (
    Arith,
    Atom,
    Fn,
    Var,
    format_atom,
    format_term,
    has_arith,
    is_ground,
    is_int,
    match,
    resolve,
    term_vars,
)

logger = logging.getLogger(__name__)

IN = "in"
OUT = "out"


@dataclass(frozen=True)
class NegLit:
    """A negative literal. Generators bind new variables from the LP support."""

    atom: Atom
    generator: bool = True


@dataclass(frozen=True)
class PosLit:
    atom: Atom


@dataclass(frozen=True)
class Call:
    """A call to a context predicate."""

    atom: Atom


@dataclass(frozen=True)
class Compare:
    """A builtin comparison; '=' can also bind a variable to an evaluable right side."""

    op: str
    left: object
    right: object


@dataclass(frozen=True)
class GuardCall:
    """A guard item in a clause body: a conjunction of calls and comparisons."""

    goals: tuple


@dataclass(frozen=True)
class FoClause:
    """A first-order clause with ordered body items."""

    name: str
    body: tuple
    line: int = field(default=0, compare=False)

    @property
    def neg_literals(self):
        return [item for item in self.body if isinstance(item, NegLit)]

    @property
    def pos_literals(self):
        return [item for item in self.body if isinstance(item, PosLit)]

    @property
    def guards(self):
        return [item for item in self.body if isinstance(item, GuardCall)]

    def variables(self):
        names = []
        for item in self.body:
            if isinstance(item, GuardCall):
                for goal in item.goals:
                    _goal_vars(goal, names)
            else:
                term_vars(item.atom, names)
        return names

    def is_ground(self):
        return not self.variables()


@dataclass(frozen=True)
class GuardRule:
    """A non-recursive rule 'head :- body' of a context predicate."""

    head: Atom
    body: tuple = ()


@dataclass
class ContextPredicate:
    """A context predicate: fact table, rules, or both (a disjunction)."""

    name: str
    arity: int
    facts: List[tuple] = field(default_factory=list)
    rules: List[GuardRule] = field(default_factory=list)
    modes: Optional[tuple] = None

    def default_modes(self):
        if not self.rules:
            return (OUT,) * self.arity
        computed = set.intersection(*(_computed_positions(rule) for rule in self.rules))
        return tuple(OUT if index in computed else IN for index in range(self.arity))

    def effective_modes(self):
        return self.modes if self.modes is not None else self.default_modes()


@dataclass(frozen=True)
class CostRule:
    pattern: Atom
    expr: object


@dataclass
class Problem:
    """
    A problem instance: clauses, context predicates, cost rules and signatures.

    Treated as immutable once built; the cost cache is internal.
    """

    clauses: List[FoClause] = field(default_factory=list)
    guards: Dict[Tuple[str, int], ContextPredicate] = field(default_factory=dict)
    cost_rules: List[CostRule] = field(default_factory=list)
    signatures: Dict[Tuple[str, int], tuple] = field(default_factory=dict)
    ground_mode: bool = False
    offset: float = 0.0
    _cost_cache: Dict[Atom, float] = field(default_factory=dict, compare=False, repr=False)

    def clause(self, name):
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    def cost_of(self, atom):
        return cost_of(self, atom)

    def eval_guard(self, call, s):
        return eval_guard(self, call, s)


def _goal_vars(goal, acc):
    if isinstance(goal, Call):
        term_vars(goal.atom, acc)
    else:
        term_vars(goal.left, acc)
        term_vars(goal.right, acc)
    return acc


def _equality_sources(rule):
    """Map each variable that a body equality defines on its own side to the other side."""
    sources = {}
    for goal in rule.body:
        if not (isinstance(goal, Compare) and goal.op == "="):
            continue
        for var, other in ((goal.left, goal.right), (goal.right, goal.left)):
            if isinstance(var, Var) and var.name not in sources:
                sources[var.name] = other
    return sources


def _computed_positions(rule):
    """Head positions whose variable occurs once in the head and is computed from the input positions."""
    names = [arg.name if isinstance(arg, Var) else None for arg in rule.head.args]
    sources = _equality_sources(rule)
    candidates = {
        index for index, name in enumerate(names)
        if name is not None and names.count(name) == 1 and name in sources
    }
    inputs = []
    for index, arg in enumerate(rule.head.args):
        if index not in candidates:
            term_vars(arg, inputs)
    return {index for index in candidates if set(term_vars(sources[names[index]])) <= set(inputs)}


def evaluate_cost_expr(expr, s):
    """
    Evaluate a real-valued cost expression under a substitution.

    Args:
        expr: float, Var, Arith (+ - * /) or Fn('float', (e,))
        s: Substitution binding the expression's variables to integers

    Returns:
        float
    """
    if isinstance(expr, float):
        return expr
    if is_int(expr):
        return float(expr)
    if isinstance(expr, Var):
        if expr.name not in s:
            raise TermError(f"unbound variable {expr.name}")
        value = s[expr.name]
        if not is_int(value):
            raise TermError(f"arithmetic fault: {expr.name}/{format_term(value)} is not a number")
        return float(value)
    if isinstance(expr, Fn) and expr.name == "float" and len(expr.args) == 1:
        return float(evaluate_cost_expr(expr.args[0], s))
    if isinstance(expr, Arith):
        a = evaluate_cost_expr(expr.left, s)
        b = evaluate_cost_expr(expr.right, s)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        if expr.op == "/":
            if b == 0.0:
                raise TermError("arithmetic fault: division by zero")
            return a / b
    raise TermError(f"arithmetic fault: cannot evaluate {format_term(expr)}")


def cost_of(problem, atom):
    """
    Cost of a ground atom: the first matching cost rule in file order, else 0.0.

    Raises:
        CostError: "negative cost" when the matching rule evaluates below zero
    """
    cached = problem._cost_cache.get(atom)
    if cached is not None:
        return cached
    value = 0.0
    for rule in problem.cost_rules:
        s = match(rule.pattern, atom)
        if s is None:
            continue
        value = evaluate_cost_expr(rule.expr, s)
        if math.isnan(value) or value < 0:
            raise CostError(f"negative cost {value} for {format_atom(atom)}")
        break
    problem._cost_cache[atom] = value
    return value


def eval_guard(problem, call, s):
    """
    Evaluate a guard call under a substitution.

    Args:
        problem: Problem holding the context predicate definitions
        call: GuardCall, Call or Compare
        s: Substitution; input-mode positions must be ground under it

    Yields:
        Extended substitutions, each satisfying the guard, without duplicates
    """
    goals = call.goals if isinstance(call, GuardCall) else (call,)
    seen = set()
    for result in _solve_goals(problem, goals, s):
        key = frozenset(result.items())
        if key in seen:
            continue
        seen.add(key)
        yield result


def _solve_goals(problem, goals, s):
    if not goals:
        yield s
        return
    for s1 in _solve_goal(problem, goals[0], s):
        yield from _solve_goals(problem, goals[1:], s1)


def _insufficient(goal):
    return GuardError(f"insufficiently instantiated guard: {format_goal(goal)}")


def _solve_goal(problem, goal, s):
    if isinstance(goal, Compare):
        yield from _solve_compare(goal, s)
        return
    atom = goal.atom
    predicate = problem.guards.get(atom.key)
    if predicate is None:
        raise GuardError(f"undefined guard {atom.pred}/{atom.arity}")
    args = tuple(resolve(a, s) for a in atom.args)
    for arg, mode in zip(args, predicate.effective_modes()):
        if has_arith(arg) or (mode == IN and not is_ground(arg)):
            raise _insufficient(goal)
    call_atom = Atom(atom.pred, args)
    for fact in predicate.facts:
        extended = match(call_atom, Atom(atom.pred, fact), s)
        if extended is not None:
            yield extended
    for rule in predicate.rules:
        yield from _solve_rule(problem, goal, rule, args, s)


def _solve_rule(problem, goal, rule, args, s):
    # rule variables live in their own substitution, so no renaming is needed
    local = {}
    deferred = []
    for arg, head_arg in zip(args, rule.head.args):
        if is_ground(arg):
            local = match(head_arg, arg, local)
            if local is None:
                return
        else:
            deferred.append((arg, head_arg))
    for solved in _solve_goals(problem, rule.body, local):
        extended = s
        for arg, head_arg in deferred:
            value = resolve(head_arg, solved)
            if not is_ground(value):
                raise _insufficient(goal)
            extended = match(arg, value, extended)
            if extended is None:
                break
        if extended is not None:
            yield extended


def _solve_compare(goal, s):
    left = resolve(goal.left, s)
    right = resolve(goal.right, s)
    left_ground = is_ground(left)
    right_ground = is_ground(right)
    if goal.op == "=":
        if left_ground and right_ground:
            if left == right:
                yield s
        elif right_ground and not has_arith(left):
            extended = match(left, right, s)
            if extended is not None:
                yield extended
        elif left_ground and not has_arith(right):
            extended = match(right, left, s)
            if extended is not None:
                yield extended
        else:
            raise _insufficient(goal)
        return
    if not (left_ground and right_ground):
        raise _insufficient(goal)
    if goal.op in ("\\=", "!="):
        if left != right:
            yield s
        return
    if not (is_int(left) and is_int(right)):
        raise TermError(f"arithmetic fault: comparison of non-integers in {format_goal(goal)}")
    holds = {
        "<": left < right,
        "=<": left <= right,
        "<=": left <= right,
        ">": left > right,
        ">=": left >= right,
    }[goal.op]
    if holds:
        yield s


def format_goal(goal):
    if isinstance(goal, Call):
        return format_atom(goal.atom)
    return f"{format_term(goal.left)} {goal.op} {format_term(goal.right)}"


def format_item(item):
    if isinstance(item, NegLit):
        return "!" + format_atom(item.atom)
    if isinstance(item, PosLit):
        return format_atom(item.atom)
    return "guard{" + ", ".join(format_goal(g) for g in item.goals) + "}"


def format_clause(clause):
    body = ", ".join(format_item(item) for item in clause.body)
    name = clause.name.replace("\\", "\\\\").replace('"', '\\"')
    return f'clause "{name}": {body}.' if body else f'clause "{name}": .'


def format_problem(problem):
    """
    Render a Problem in the .fol format; parsing the result yields an equal Problem.

    Returns:
        str: problem file text
    """
    lines = ["% types"]
    for (name, arity), types in sorted(problem.signatures.items()):
        if arity == 0:
            lines.append(f"type {name}.")
        else:
            lines.append(f"type {name}({','.join(types)}).")
    if problem.guards:
        lines.append("% guards")
    for (name, arity), predicate in sorted(problem.guards.items()):
        if predicate.modes is not None:
            lines.append(f"mode {name}({','.join(predicate.modes)}).")
        for fact in predicate.facts:
            lines.append(f"guard {format_atom(Atom(name, fact))}.")
        for rule in predicate.rules:
            if rule.body:
                body = ", ".join(format_goal(g) for g in rule.body)
                lines.append(f"guard {format_atom(rule.head)} :- {body}.")
            else:
                lines.append(f"guard {format_atom(rule.head)}.")
    if problem.cost_rules:
        lines.append("% costs")
    for rule in problem.cost_rules:
        lines.append(f"cost {format_atom(rule.pattern)} = {format_term(rule.expr)}.")
    if problem.offset:
        lines.append(f"offset {problem.offset!r}.")
    lines.append("% clauses")
    for clause in problem.clauses:
        lines.append(format_clause(clause))
    return "\n".join(lines) + "\n"
