"""
Herbrand terms module.
Terms, atoms, substitutions, one-sided matching, grounding-time arithmetic
and the atom interning table.

Integers are plain Python ints restricted to the signed 64-bit range.
Constructor applications are Fn, atoms are Atom, variables are Var and
arithmetic nodes are Arith. Lists are sugar over the binary constructor
'.' and the constant '[]'.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Tuple, Union

from folip.errors import TermError

logger = logging.getLogger(__name__)

INT_MIN = -(2 ** 63)
INT_MAX = 2 ** 63 - 1

CONS = "."
NIL = "[]"

ARITH_OPS = ("+", "-", "*", "//", "mod")


@dataclass(frozen=True)
class Var:
    """A logic variable (only in non-ground contexts)."""

    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Fn:
    """A constructor application; constants have no arguments."""

    name: str
    args: tuple = ()

    def __str__(self):
        return format_term(self)


@dataclass(frozen=True)
class Arith:
    """An integer arithmetic node. Only ever appears in output positions."""

    op: str
    left: "Term"
    right: "Term"

    def __str__(self):
        return format_term(self)


Term = Union[int, Var, Fn, Arith]
Substitution = Dict[str, Term]


@dataclass(frozen=True)
class Atom:
    """A predicate applied to arguments. Ground atoms are what gets interned."""

    pred: str
    args: tuple = ()

    @property
    def arity(self):
        return len(self.args)

    @property
    def key(self):
        """The (predicate, arity) pair identifying the predicate."""
        return (self.pred, len(self.args))

    def is_ground(self):
        return all(is_ground(a) for a in self.args)

    def __str__(self):
        return format_atom(self)


def make_list(items, tail=None):
    """Build a list term from a sequence of items and an optional tail."""
    result = tail if tail is not None else Fn(NIL)
    for item in reversed(list(items)):
        result = Fn(CONS, (item, result))
    return result


def is_int(t):
    return isinstance(t, int) and not isinstance(t, bool)


def is_ground(t):
    """A term is ground iff it contains no variable and no unevaluated arithmetic."""
    if is_int(t):
        return True
    if isinstance(t, Fn):
        return all(is_ground(a) for a in t.args)
    if isinstance(t, Atom):
        return t.is_ground()
    return False


def has_arith(t):
    if isinstance(t, Arith):
        return True
    if isinstance(t, (Fn, Atom)):
        return any(has_arith(a) for a in t.args)
    return False


def term_vars(t, acc=None):
    """
    Collect the variable names of a term, atom or arithmetic node.

    Args:
        t: Term or Atom
        acc: optional list to append to (order of first occurrence is kept)

    Returns:
        list: variable names in order of first occurrence
    """
    if acc is None:
        acc = []
    if isinstance(t, Var):
        if t.name not in acc:
            acc.append(t.name)
    elif isinstance(t, (Fn, Atom)):
        for a in t.args:
            term_vars(a, acc)
    elif isinstance(t, Arith):
        term_vars(t.left, acc)
        term_vars(t.right, acc)
    return acc


def _check_range(value):
    if value < INT_MIN or value > INT_MAX:
        raise TermError(f"arithmetic fault: integer overflow ({value})")
    return value


def arith(op, a, b):
    """Apply an integer operator to two evaluated integers."""
    if not (is_int(a) and is_int(b)):
        raise TermError(f"arithmetic fault: non-integer operand in {format_term(a)} {op} {format_term(b)}")
    if op == "+":
        return _check_range(a + b)
    if op == "-":
        return _check_range(a - b)
    if op == "*":
        return _check_range(a * b)
    if op == "//":
        if b == 0:
            raise TermError("arithmetic fault: division by zero")
        # truncating division, as in Prolog and Mercury
        q = abs(a) // abs(b)
        return _check_range(q if (a >= 0) == (b >= 0) else -q)
    if op == "mod":
        if b == 0:
            raise TermError("arithmetic fault: mod by zero")
        return _check_range(a % b)
    raise TermError(f"arithmetic fault: unknown operator {op}")


def apply_eval(t, s):
    """
    Apply a substitution and fold every arithmetic node.

    Args:
        t: Term or Atom with variables
        s: Substitution binding every variable of t

    Returns:
        The ground Term or Atom

    Raises:
        TermError: "unbound variable" or "arithmetic fault"
    """
    if is_int(t):
        return t
    if isinstance(t, Var):
        if t.name not in s:
            raise TermError(f"unbound variable {t.name}")
        return s[t.name]
    if isinstance(t, Fn):
        if not t.args:
            return t
        return Fn(t.name, tuple(apply_eval(a, s) for a in t.args))
    if isinstance(t, Arith):
        return arith(t.op, apply_eval(t.left, s), apply_eval(t.right, s))
    if isinstance(t, Atom):
        if not t.args:
            return t
        return Atom(t.pred, tuple(apply_eval(a, s) for a in t.args))
    raise TermError(f"not a term: {t!r}")


def resolve(t, s):
    """
    Partially apply a substitution: bound variables are replaced and
    arithmetic whose operands become integers is folded. Unbound variables
    are left in place.
    """
    if is_int(t):
        return t
    if isinstance(t, Var):
        return s.get(t.name, t)
    if isinstance(t, Fn):
        if not t.args:
            return t
        return Fn(t.name, tuple(resolve(a, s) for a in t.args))
    if isinstance(t, Arith):
        left = resolve(t.left, s)
        right = resolve(t.right, s)
        if is_int(left) and is_int(right):
            return arith(t.op, left, right)
        return Arith(t.op, left, right)
    if isinstance(t, Atom):
        if not t.args:
            return t
        return Atom(t.pred, tuple(resolve(a, s) for a in t.args))
    raise TermError(f"not a term: {t!r}")


def _match_term(p, g, s):
    if isinstance(p, Var):
        bound = s.get(p.name)
        if bound is None:
            s[p.name] = g
            return True
        return bound == g
    if is_int(p):
        return p == g
    if isinstance(p, Fn):
        if not isinstance(g, Fn) or g.name != p.name or len(g.args) != len(p.args):
            return False
        return all(_match_term(pa, ga, s) for pa, ga in zip(p.args, g.args))
    if isinstance(p, Arith):
        raise TermError(f"non-matchable pattern: {format_term(p)}")
    return False


def match(pattern, ground, s=None):
    """
    One-sided matching of a pattern against a ground term or atom.

    Args:
        pattern: Term or Atom possibly containing variables (no arithmetic)
        ground: ground Term or Atom
        s: optional Substitution to extend (not mutated)

    Returns:
        The extended Substitution, or None when matching fails

    Raises:
        TermError: "non-matchable pattern" if the pattern contains arithmetic
    """
    result = dict(s) if s else {}
    if isinstance(pattern, Atom):
        if not isinstance(ground, Atom) or pattern.pred != ground.pred or len(pattern.args) != len(ground.args):
            return None
        for pa, ga in zip(pattern.args, ground.args):
            if not _match_term(pa, ga, result):
                return None
        return result
    if _match_term(pattern, ground, result):
        return result
    return None


def _list_items(t):
    """Split a list term into (items, tail) where tail is NIL or a non-list term."""
    items = []
    while isinstance(t, Fn) and t.name == CONS and len(t.args) == 2:
        items.append(t.args[0])
        t = t.args[1]
    return items, t


def format_term(t):
    """Canonical textual form: lowercase symbols, comma-separated args, list sugar."""
    if is_int(t):
        return str(t)
    if isinstance(t, float):
        return repr(t)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Fn):
        if t.name == NIL and not t.args:
            return "[]"
        if t.name == CONS and len(t.args) == 2:
            items, tail = _list_items(t)
            body = ",".join(format_term(i) for i in items)
            if isinstance(tail, Fn) and tail.name == NIL and not tail.args:
                return f"[{body}]"
            return f"[{body}|{format_term(tail)}]"
        if not t.args:
            return t.name
        return f"{t.name}({','.join(format_term(a) for a in t.args)})"
    if isinstance(t, Arith):
        op = " mod " if t.op == "mod" else t.op
        return f"{_format_operand(t.left)}{op}{_format_operand(t.right)}"
    if isinstance(t, Atom):
        return format_atom(t)
    return str(t)


def _format_operand(t):
    if isinstance(t, Arith) or (is_int(t) and t < 0):
        return f"({format_term(t)})"
    return format_term(t)


def format_atom(a):
    if not a.args:
        return a.pred
    return f"{a.pred}({','.join(format_term(x) for x in a.args)})"


def format_substitution(s):
    """Render a substitution as {X/bob, Y/alice} with variables sorted by name."""
    body = ", ".join(f"{name}/{format_term(value)}" for name, value in sorted(s.items()))
    return "{" + body + "}"


class AtomTable:
    """
    Interning table for ground atoms.

    Ids are dense, start at 0 and are assigned in creation order.
    """

    def __init__(self):
        self._ids: Dict[Atom, int] = {}
        self._atoms: List[Atom] = []

    def intern(self, atom):
        """
        Return the id of a ground atom, creating it on first sight.

        Raises:
            TermError: "non-ground atom" when any argument is not ground
        """
        atom_id = self._ids.get(atom)
        if atom_id is not None:
            return atom_id
        if not atom.is_ground():
            raise TermError(f"non-ground atom {format_atom(atom)}")
        atom_id = len(self._atoms)
        self._ids[atom] = atom_id
        self._atoms.append(atom)
        logger.debug(f"Interned atom {atom_id}: {format_atom(atom)}")
        return atom_id

    def lookup(self, atom) -> Optional[int]:
        """Return the id of an atom if it was interned, else None."""
        return self._ids.get(atom)

    def atom(self, atom_id) -> Atom:
        return self._atoms[atom_id]

    def text(self, atom_id) -> str:
        return format_atom(self._atoms[atom_id])

    def __len__(self):
        return len(self._atoms)

    def __contains__(self, atom):
        return atom in self._ids

    def __iter__(self) -> Iterator[Tuple[int, Atom]]:
        return iter(enumerate(self._atoms))
