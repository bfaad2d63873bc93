"""
Separation module.
Depth-first search for ground clause instances violated by an LP solution
(cuts), with deferred interning of positive-literal atoms, and the
integral-model check built on the same search.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from folip.problem import GuardCall, PosLit
from folip.terms import Atom, apply_eval, format_substitution, is_ground, match, resolve

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SepState:
    """A search state: substitution, activity and the literals grounded so far."""

    theta: dict
    z: float = 0.0
    neg: tuple = ()
    pos: tuple = ()


@dataclass(frozen=True)
class Cut:
    """A violated ground clause instance and its clausal inequality."""

    clause: str
    neg_ids: tuple
    pos_ids: tuple
    violation: float
    theta: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def key(self):
        return (frozenset(self.neg_ids), frozenset(self.pos_ids))

    def row(self):
        """Return (coefs, rhs) of sum(pos) - sum(neg) >= 1 - |neg|."""
        coefs = {atom_id: 1.0 for atom_id in self.pos_ids}
        for atom_id in self.neg_ids:
            coefs[atom_id] = coefs.get(atom_id, 0.0) - 1.0
        return {atom_id: coef for atom_id, coef in coefs.items() if coef}, 1.0 - len(self.neg_ids)


@dataclass(frozen=True)
class Violation:
    """A ground instance of a clause falsified by a candidate model."""

    clause: str
    theta: dict
    neg: tuple = ()
    pos: tuple = ()

    def __str__(self):
        return f'clause "{self.clause}" violated at {format_substitution(self.theta)}'


class SolutionView:
    """
    Read-only view of atom values for the search.

    Atoms without a value read as 0. The support (atoms with value above a
    threshold) is indexed by predicate and by first argument, each list in
    descending value order with ties by id.
    """

    def __init__(self, values, order=None, threshold=0.0):
        """
        Initialize the view.

        Args:
            values: mapping Atom -> value in [0, 1]
            order: optional mapping Atom -> id used to break ties
            threshold: atoms at or below this value are left out of the support
        """
        self.values = values
        self._by_pred: Dict[tuple, List[Tuple[Atom, float]]] = {}
        self._by_first: Dict[tuple, List[Tuple[Atom, float]]] = {}
        order = order or {}
        support = [(atom, v) for atom, v in values.items() if v > threshold]
        support.sort(key=lambda item: (-item[1], order.get(item[0], 0)))
        for atom, v in support:
            self._by_pred.setdefault(atom.key, []).append((atom, v))
            if atom.args:
                self._by_first.setdefault((atom.key, atom.args[0]), []).append((atom, v))

    @classmethod
    def from_lp(cls, table, x, threshold=0.0):
        """Build a view from an AtomTable and an LP primal vector indexed by atom id."""
        values = {}
        order = {}
        for atom_id, atom in table:
            order[atom] = atom_id
            if atom_id < len(x) and x[atom_id] > 0.0:
                values[atom] = float(x[atom_id])
        return cls(values, order, threshold)

    @classmethod
    def from_model(cls, atoms, table=None):
        """Indicator view of a finite set of true atoms."""
        order = {}
        if table is not None:
            order = {atom: table.lookup(atom) or 0 for atom in atoms}
        return cls({atom: 1.0 for atom in atoms}, order)

    def value(self, atom):
        return self.values.get(atom, 0.0)

    def candidates(self, pattern):
        """Support atoms of the pattern's predicate, narrowed by a ground first argument."""
        if pattern.args and is_ground(pattern.args[0]):
            return self._by_first.get((pattern.key, pattern.args[0]), [])
        return self._by_pred.get(pattern.key, [])


def search(problem, clause, view, eps, limit=None, prune=True):
    """
    Enumerate goal states of the grounding search for one clause.

    Args:
        problem: Problem (for guard evaluation)
        clause: FoClause
        view: SolutionView giving x* values
        eps: violation tolerance; goal states satisfy z < 1 - eps
        limit: stop after this many goal states (None for all)
        prune: when False, no activity pruning (used for eager loading of ground clauses)

    Returns:
        list of SepState, each a distinct ground instance
    """
    found = []
    seen = set()
    threshold = 1.0 - eps
    body = clause.body

    def visit(k, state):
        if limit is not None and len(found) >= limit:
            return
        if k == len(body):
            if prune and state.z >= threshold:
                return
            key = (frozenset(state.neg), frozenset(state.pos))
            if key not in seen:
                seen.add(key)
                found.append(state)
            return
        item = body[k]
        if isinstance(item, GuardCall):
            for theta in problem.eval_guard(item, state.theta):
                visit(k + 1, SepState(theta, state.z, state.neg, state.pos))
                if limit is not None and len(found) >= limit:
                    return
            return
        if isinstance(item, PosLit):
            atom = apply_eval(item.atom, state.theta)
            if atom in state.pos:
                visit(k + 1, state)
                return
            z = state.z + view.value(atom)
            if prune and z >= threshold:
                return
            visit(k + 1, SepState(state.theta, z, state.neg, state.pos + (atom,)))
            return
        pattern = resolve(item.atom, state.theta)
        if pattern.is_ground():
            _ground_neg(k, state, apply_eval(pattern, state.theta))
            return
        for atom, v in view.candidates(pattern):
            if prune and state.z + 1.0 - v >= threshold:
                # support is sorted by descending value, the rest only gets worse
                break
            theta = match(pattern, atom, state.theta)
            if theta is None:
                continue
            _ground_neg(k, SepState(theta, state.z, state.neg, state.pos), atom)
            if limit is not None and len(found) >= limit:
                return

    def _ground_neg(k, state, atom):
        if atom in state.neg:
            visit(k + 1, state)
            return
        z = state.z + 1.0 - view.value(atom)
        if prune and z >= threshold:
            return
        visit(k + 1, SepState(state.theta, z, state.neg + (atom,), state.pos))

    visit(0, SepState({}))
    return found


class ClauseSeparator:
    """Separates clause instances against LP solutions, interning positive atoms of emitted cuts."""

    def __init__(self, problem, table, eps=1e-6, trace=False):
        """
        Initialize the separator.

        Args:
            problem: Problem
            table: AtomTable shared with the solver
            eps: violation tolerance
            trace: log every goal state as 'cut <clause> θ z'
        """
        self.problem = problem
        self.table = table
        self.eps = eps
        self.trace = trace

    def separate(self, clause, view, limit=None):
        """
        Find ground instances of a clause violated by the view.

        Returns:
            list of (Cut, new_ids): new_ids are atoms interned for this cut,
            which still need LP columns
        """
        results = []
        for state in search(self.problem, clause, view, self.eps, limit):
            if self.trace:
                logger.info(f"cut {clause.name} {format_substitution(state.theta)} {state.z:.6g}")
            before = len(self.table)
            neg_ids = tuple(self.table.intern(atom) for atom in state.neg)
            pos_ids = tuple(self.table.intern(atom) for atom in state.pos)
            new_ids = list(range(before, len(self.table)))
            violation = 1.0 - state.z
            if violation <= self.eps:
                raise AssertionError(f"separation emitted a non-violated cut for {clause.name}")
            results.append((Cut(clause.name, neg_ids, pos_ids, violation, state.theta), new_ids))
        return results

    def ground_rows(self, clause):
        """All ground instances of a variable-free clause, as cuts regardless of violation."""
        results = []
        for state in search(self.problem, clause, SolutionView({}), 0.0, prune=False):
            if set(state.neg) & set(state.pos):
                continue
            before = len(self.table)
            neg_ids = tuple(self.table.intern(atom) for atom in state.neg)
            pos_ids = tuple(self.table.intern(atom) for atom in state.pos)
            cut = Cut(clause.name, neg_ids, pos_ids, 1.0 - state.z, state.theta)
            results.append((cut, list(range(before, len(self.table)))))
        return results


def check_model(problem, model_atoms, table=None):
    """
    Check that the interpretation true exactly on model_atoms satisfies every clause.

    Args:
        problem: Problem
        model_atoms: iterable of ground Atom
        table: optional AtomTable for a deterministic search order

    Returns:
        None when the model is ok, else the first Violation found
    """
    view = SolutionView.from_model(set(model_atoms), table)
    for clause in problem.clauses:
        states = search(problem, clause, view, 0.0, limit=1)
        if states:
            state = states[0]
            return Violation(clause.name, state.theta, state.neg, state.pos)
    return None


class CutPool:
    """
    Rows ever generated, keyed by their atom sets.

    A key is active while its row is in the LP; removed rows stay seen and are
    re-added when separation finds them again.
    """

    def __init__(self):
        self._active: Dict[tuple, int] = {}
        self._by_row: Dict[int, tuple] = {}
        self._seen = set()
        self.readded = 0

    def __len__(self):
        return len(self._seen)

    def is_active(self, cut):
        return cut.key in self._active

    def activate(self, cut, row_id):
        if cut.key in self._seen:
            self.readded += 1
        self._seen.add(cut.key)
        self._active[cut.key] = row_id
        self._by_row[row_id] = cut.key

    def deactivate(self, row_id):
        key = self._by_row.pop(row_id, None)
        if key is not None:
            self._active.pop(key, None)

    def active_rows(self):
        return list(self._by_row)


def format_cut(cut, table):
    neg = " + ".join(f"[1 - x({table.text(i)})]" for i in cut.neg_ids)
    pos = " + ".join(f"x({table.text(i)})" for i in cut.pos_ids)
    lhs = " + ".join(part for part in (neg, pos) if part) or "0"
    return f"{cut.clause} {format_substitution(cut.theta)}: {lhs} >= 1"
