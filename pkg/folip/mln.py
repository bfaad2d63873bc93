"""
MLN frontend module.
Parses function-free Markov logic networks with evidence and compiles MAP
inference into a ground Problem: penalty ("clause broken") atoms, grounding
counts as costs, and folding of single negative literals into atom costs.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set

from folip.errors import MlnError
from folip.problem import CostRule, FoClause, NegLit, PosLit, Problem
from folip.syntax import TokenStream, describe, parse_atom_tokens, tokenize
from folip.terms import Atom, Fn, Var, format_atom, is_int, match, resolve

logger = logging.getLogger(__name__)

QUERY = "query"
EVIDENCE = "evidence"
EQUALITY = "equality"

PENALTY = "cb"

DECLARATION_KINDS = {"predicate": QUERY, "evidence": EVIDENCE, "equality": EQUALITY}


@dataclass(frozen=True)
class MlnPredicate:
    name: str
    types: tuple
    kind: str = QUERY


@dataclass(frozen=True)
class MlnLiteral:
    positive: bool
    atom: Atom

    def __str__(self):
        return format_atom(self.atom) if self.positive else "!" + format_atom(self.atom)


@dataclass(frozen=True)
class MlnClause:
    """A weighted clause; weight None marks a HARD clause."""

    index: int
    weight: Optional[float]
    literals: tuple
    line: int = field(default=0, compare=False)

    @property
    def hard(self):
        return self.weight is None

    def variables(self):
        names = []
        for literal in self.literals:
            for arg in literal.atom.args:
                if isinstance(arg, Var) and arg.name not in names:
                    names.append(arg.name)
        return names

    def __str__(self):
        weight = "HARD" if self.hard else repr(self.weight)
        return f"{weight}: " + " v ".join(str(lit) for lit in self.literals)


@dataclass
class MlnProgram:
    domains: Dict[str, list] = field(default_factory=dict)
    predicates: Dict[str, MlnPredicate] = field(default_factory=dict)
    evidence: Dict[str, Set[tuple]] = field(default_factory=dict)
    clauses: List[MlnClause] = field(default_factory=list)

    @property
    def query_predicates(self):
        return [p for p in self.predicates.values() if p.kind == QUERY]

    def is_closed(self, pred):
        return self.predicates[pred].kind in (EVIDENCE, EQUALITY)

    def holds(self, atom):
        """Truth value of a ground evidence or equality atom (closed world)."""
        if self.predicates[atom.pred].kind == EQUALITY:
            return atom.args[0] == atom.args[1]
        return atom.args in self.evidence.get(atom.pred, set())

    def var_types(self, clause):
        """
        Map each clause variable to its domain name.

        Raises:
            MlnError: when a variable is used at positions of two different types
        """
        types = {}
        for literal in clause.literals:
            decl = self.predicates[literal.atom.pred]
            for arg, typename in zip(literal.atom.args, decl.types):
                if not isinstance(arg, Var):
                    continue
                known = types.setdefault(arg.name, typename)
                if known != typename:
                    raise MlnError(
                        f"line {clause.line}: variable {arg.name} used with types {known} and {typename}"
                    )
        return types


@dataclass(frozen=True)
class GroundGroup:
    """Groundings of one clause that share their residual literals."""

    index: int
    key: tuple
    residual: tuple
    multiplicity: int
    weight: Optional[float]

    @property
    def hard(self):
        return self.weight is None


@dataclass
class MlnCompilation:
    """Encoded problem plus the figures reported next to it."""

    problem: Problem
    groups: List[GroundGroup]
    penalty_atoms: int
    folded_costs: int
    constant: float
    groundings: int

    @property
    def offset(self):
        return self.problem.offset


def _constant(tok):
    if tok.kind == "INT":
        return int(tok.text)
    return Fn(tok.text)


def _check_function_free(atom, line):
    for arg in atom.args:
        if isinstance(arg, Var) or is_int(arg):
            continue
        if isinstance(arg, Fn) and not arg.args:
            continue
        raise MlnError(f"line {line}: not function-free: {format_atom(atom)}")


def parse_mln(text):
    """
    Parse an MLN program.

    Returns:
        MlnProgram with domains extended by the constants of facts and clauses

    Raises:
        ParseError: on syntax errors
        MlnError: "not function-free", "unsupported weight", undeclared predicates
    """
    program = MlnProgram()
    facts = []
    for number, raw in enumerate(text.splitlines(), start=1):
        ts = TokenStream(tokenize(raw, number))
        if ts.at_end():
            continue
        first, second = ts.peek(), ts.peek(1)
        if first.kind == "SYM" and second.text == "=":
            _read_domain(ts, program)
        elif first.kind == "SYM" and first.text in DECLARATION_KINDS and second.kind == "SYM":
            ts.next()
            _read_declaration(ts, program, DECLARATION_KINDS[first.text])
        elif first.kind in ("INT", "FLOAT") or first.text in ("HARD", "-"):
            program.clauses.append(_read_clause(ts, len(program.clauses) + 1, number))
        else:
            atom = parse_atom_tokens(ts)
            if not ts.at_end():
                ts.error(f"unexpected {describe(ts.peek())} after fact")
            facts.append((atom, number))

    for atom, line in facts:
        decl = program.predicates.get(atom.pred)
        if decl is None:
            raise MlnError(f"line {line}: fact for undeclared predicate {atom.pred}")
        if decl.kind != EVIDENCE:
            raise MlnError(f"line {line}: fact {format_atom(atom)} for non-evidence predicate")
        _check_atom(program, atom, line)
        if not atom.is_ground():
            raise MlnError(f"line {line}: evidence fact {format_atom(atom)} is not ground")
        program.evidence.setdefault(atom.pred, set()).add(atom.args)
        _extend_domains(program, atom)

    for clause in program.clauses:
        for literal in clause.literals:
            _check_atom(program, literal.atom, clause.line)
            _extend_domains(program, literal.atom)
        program.var_types(clause)
    logger.info(
        f"Parsed MLN: {len(program.predicates)} predicates, {len(program.clauses)} clauses, "
        f"{sum(len(f) for f in program.evidence.values())} evidence facts"
    )
    return program


def _read_domain(ts, program):
    name = ts.next().text
    ts.expect("=")
    ts.expect("{")
    values = program.domains.setdefault(name, [])
    if not ts.at("}"):
        while True:
            tok = ts.next()
            if tok.kind not in ("SYM", "INT"):
                ts.error(f"expected a constant but found {describe(tok)}", tok)
            value = _constant(tok)
            if value not in values:
                values.append(value)
            if not ts.accept(","):
                break
    ts.expect("}")
    if not ts.at_end():
        ts.error(f"unexpected {describe(ts.peek())} after domain")


def _read_declaration(ts, program, kind):
    name = ts.expect_kind("SYM", "a predicate name").text
    types = []
    if ts.accept("("):
        types.append(ts.expect_kind("SYM", "a domain name").text)
        while ts.accept(","):
            types.append(ts.expect_kind("SYM", "a domain name").text)
        ts.expect(")")
    if not ts.at_end():
        ts.error(f"unexpected {describe(ts.peek())} after declaration")
    if name == PENALTY:
        raise MlnError(f"predicate name {PENALTY} is reserved for penalty atoms")
    if name in program.predicates:
        raise MlnError(f"duplicate declaration of predicate {name}")
    if kind == EQUALITY and len(types) != 2:
        raise MlnError(f"equality predicate {name} must have two arguments")
    for typename in types:
        program.domains.setdefault(typename, [])
    program.predicates[name] = MlnPredicate(name, tuple(types), kind)


def _read_clause(ts, index, line):
    tok = ts.next()
    if tok.text == "-" or (tok.kind in ("INT", "FLOAT") and float(tok.text) <= 0):
        raise MlnError(f"line {line}: unsupported weight (soft weights must be positive)")
    weight = None if tok.text == "HARD" else float(tok.text)
    if weight is not None and not math.isfinite(weight):
        raise MlnError(f"line {line}: unsupported weight {tok.text}")
    ts.expect(":")
    literals = [_read_literal(ts, line)]
    while ts.at("v", "SYM") or ts.at("∨"):
        ts.next()
        literals.append(_read_literal(ts, line))
    if not ts.at_end():
        ts.error(f"expected 'v' or end of line but found {describe(ts.peek())}")
    return MlnClause(index, weight, tuple(literals), line)


def _read_literal(ts, line):
    positive = True
    while ts.at("!") or ts.at("¬") or ts.at("~"):
        ts.next()
        positive = not positive
    atom = parse_atom_tokens(ts)
    _check_function_free(atom, line)
    return MlnLiteral(positive, atom)


def _check_atom(program, atom, line):
    decl = program.predicates.get(atom.pred)
    if decl is None:
        raise MlnError(f"line {line}: undeclared predicate {atom.pred}")
    if len(decl.types) != atom.arity:
        raise MlnError(f"line {line}: {atom.pred} expects {len(decl.types)} arguments, got {atom.arity}")


def _extend_domains(program, atom):
    for arg, typename in zip(atom.args, program.predicates[atom.pred].types):
        if isinstance(arg, Var):
            continue
        values = program.domains.setdefault(typename, [])
        if arg not in values:
            values.append(arg)


def _groundings(program, clause, types):
    """Yield substitutions for the clause that no evidence literal satisfies."""
    closed = [lit for lit in clause.literals if program.is_closed(lit.atom.pred)]
    # false evidence makes a negative literal true, so only facts can ground them
    generators = [lit for lit in closed if not lit.positive and program.predicates[lit.atom.pred].kind == EVIDENCE]
    order = clause.variables()

    def satisfied(theta):
        for literal in closed:
            atom = resolve(literal.atom, theta)
            if atom.is_ground() and program.holds(atom) == literal.positive:
                return True
        return False

    def join(k, theta):
        if k == len(generators):
            yield from enumerate_rest(theta)
            return
        pattern = resolve(generators[k].atom, theta)
        for fact in sorted(program.evidence.get(pattern.pred, ()), key=str):
            extended = match(pattern, Atom(pattern.pred, fact), theta)
            if extended is not None:
                yield from join(k + 1, extended)

    def enumerate_rest(theta):
        if satisfied(theta):
            return
        remaining = [name for name in order if name not in theta]
        if not remaining:
            yield theta
            return
        name = remaining[0]
        for value in program.domains.get(types[name], []):
            yield from enumerate_rest({**theta, name: value})

    yield from join(0, {})


def ground_and_simplify(program):
    """
    Ground every clause against the evidence and group the survivors.

    Groundings satisfied by an evidence literal are dropped; falsified
    evidence literals are removed; tautologies (p and !p) are dropped. The
    rest are grouped by the constants of their open literals.

    Returns:
        list of GroundGroup in clause order, then first-grounding order
    """
    groups = []
    for clause in program.clauses:
        types = program.var_types(clause)
        open_literals = [lit for lit in clause.literals if not program.is_closed(lit.atom.pred)]
        key_vars = []
        for literal in open_literals:
            for arg in literal.atom.args:
                if isinstance(arg, Var) and arg.name not in key_vars:
                    key_vars.append(arg.name)
        counts: Dict[tuple, int] = {}
        residuals: Dict[tuple, tuple] = {}
        for theta in _groundings(program, clause, types):
            key = tuple(theta[name] for name in key_vars)
            if key not in residuals:
                residual = []
                for literal in open_literals:
                    ground = (literal.positive, resolve(literal.atom, theta))
                    if ground not in residual:
                        residual.append(ground)
                atoms_by_sign = {(positive, atom) for positive, atom in residual}
                if any((not positive, atom) in atoms_by_sign for positive, atom in residual):
                    residuals[key] = None
                else:
                    residuals[key] = tuple(residual)
            counts[key] = counts.get(key, 0) + 1
        for key, residual in residuals.items():
            if residual is None:
                continue
            groups.append(GroundGroup(clause.index, key, residual, counts[key], clause.weight))
    logger.info(f"Grounding left {len(groups)} groups")
    return groups


def penalty_atom(index, key):
    return Atom(PENALTY, (index,) + tuple(key))


def encode_map(groups, iff=True, signatures=None):
    """
    Encode grouped groundings as a ground-mode Problem minimizing falsification cost.

    Args:
        groups: output of ground_and_simplify
        iff: also emit cb -> (every residual literal false) clauses
        signatures: optional (name, arity) -> type names for the emitted atoms

    Returns:
        Problem whose optimum equals the minimum total weight of falsified groundings

    Raises:
        MlnError: "hard clause unsatisfiable given evidence"
    """
    clauses = []
    costs: Dict[Atom, float] = {}
    offset = 0.0
    sigs = dict(signatures or {})
    for n, group in enumerate(groups, start=1):
        if not group.residual:
            if group.hard:
                raise MlnError(f"hard clause unsatisfiable given evidence (clause {group.index})")
            offset += group.weight * group.multiplicity
            continue
        negatives = [NegLit(atom, generator=False) for positive, atom in group.residual if not positive]
        positives = [PosLit(atom) for positive, atom in group.residual if positive]
        for item in negatives + positives:
            sigs.setdefault(item.atom.key, ("term",) * item.atom.arity)
        if group.hard:
            clauses.append(FoClause(f"h{group.index}_{n}", tuple(negatives + positives)))
            continue
        cost = group.weight * group.multiplicity
        if len(group.residual) == 1 and negatives:
            atom = negatives[0].atom
            costs[atom] = costs.get(atom, 0.0) + cost
            continue
        cb = penalty_atom(group.index, group.key)
        sigs.setdefault(cb.key, ("int",) + ("term",) * len(group.key))
        costs[cb] = costs.get(cb, 0.0) + cost
        name = f"c{group.index}_{n}"
        clauses.append(FoClause(name, tuple(negatives + positives + [PosLit(cb)])))
        if iff:
            for k, (positive, atom) in enumerate(group.residual, start=1):
                complement = NegLit(atom, generator=False) if positive else PosLit(atom)
                clauses.append(FoClause(f"{name}_r{k}", (NegLit(cb, generator=False), complement)))
    cost_rules = [CostRule(atom, value) for atom, value in costs.items()]
    return Problem(
        clauses=clauses,
        cost_rules=cost_rules,
        signatures=sigs,
        ground_mode=True,
        offset=offset,
    )


def compile_mln(program, iff=True):
    """
    Ground, simplify and encode an MLN program.

    Returns:
        MlnCompilation; constant is the total weight of all soft groundings,
        so maximum satisfied weight = constant - optimal objective
    """
    groups = ground_and_simplify(program)
    signatures = {(p.name, len(p.types)): p.types for p in program.predicates.values() if p.kind == QUERY}
    problem = encode_map(groups, iff=iff, signatures=signatures)
    constant = 0.0
    groundings = 0
    for clause in program.clauses:
        types = program.var_types(clause)
        count = 1
        for name in clause.variables():
            count *= len(program.domains.get(types[name], []))
        groundings += count
        if not clause.hard:
            constant += clause.weight * count
    penalty_atoms = sum(1 for rule in problem.cost_rules if rule.pattern.pred == PENALTY)
    folded = len(problem.cost_rules) - penalty_atoms
    logger.info(
        f"Encoded MLN: {len(problem.clauses)} ground clauses, {penalty_atoms} penalty atoms, "
        f"{folded} folded costs, offset {problem.offset:.6g}"
    )
    return MlnCompilation(problem, groups, penalty_atoms, folded, constant, groundings)


def load_mln(path):
    with open(path, encoding="utf-8") as handle:
        return parse_mln(handle.read())
