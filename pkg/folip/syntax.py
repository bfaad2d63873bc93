"""
Syntax module.
Tokenizer and recursive-descent readers for terms, atoms and cost
expressions, shared by the .fol and .mln parsers and by model files.
"""

import re
from dataclasses import dataclass

from folip.errors import Diagnostic, ParseError
from folip.terms import INT_MAX, INT_MIN, Arith, Atom, Fn, Var, make_list

TOKEN_SPEC = [
    ("WS", r"[ \t\r\n]+"),
    ("COMMENT", r"%[^\n]*"),
    ("FLOAT", r"\d+\.\d+(?:[eE][-+]?\d+)?|\d+[eE][-+]?\d+"),
    ("INT", r"\d+"),
    ("STRING", r'"(?:[^"\\\n]|\\.)*"'),
    ("VAR", r"[A-Z_][A-Za-z0-9_]*"),
    ("SYM", r"[a-z][A-Za-z0-9_]*"),
    ("PUNCT", r":-|=<|>=|<=|\\=|!=|//|[=<>+\-*/()\[\]|{},!:.~¬∨]"),
]
TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in TOKEN_SPEC))

COMPARISONS = ("=", "\\=", "!=", "<", "=<", "<=", ">", ">=")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text, first_line=1):
    """
    Split source text into tokens, dropping whitespace and '%' comments.

    Args:
        text: source text
        first_line: line number of the first line (for per-line readers)

    Returns:
        list of Token, terminated by an EOF token

    Raises:
        ParseError: on a character no token starts with
    """
    tokens = []
    line, line_start, pos = first_line, 0, 0
    while pos < len(text):
        m = TOKEN_RE.match(text, pos)
        if m is None:
            column = pos - line_start + 1
            raise ParseError([Diagnostic(line, column, f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        value = m.group()
        if kind not in ("WS", "COMMENT"):
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    """Cursor over a token list with the small helpers a recursive-descent parser needs."""

    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0
        self._fresh = 0

    def peek(self, offset=0):
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def next(self):
        tok = self.peek()
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def at(self, text, kind=None):
        tok = self.peek()
        if kind is not None and tok.kind != kind:
            return False
        return tok.text == text and tok.kind != "STRING"

    def accept(self, text):
        if self.at(text):
            return self.next()
        return None

    def expect(self, text):
        tok = self.peek()
        if tok.text != text or tok.kind == "STRING":
            self.error(f"expected '{text}' but found {describe(tok)}", tok)
        return self.next()

    def expect_kind(self, kind, what):
        tok = self.peek()
        if tok.kind != kind:
            self.error(f"expected {what} but found {describe(tok)}", tok)
        return self.next()

    def at_end(self):
        return self.peek().kind == "EOF"

    def fresh_var(self):
        self._fresh += 1
        return Var(f"_G{self._fresh}")

    def error(self, message, tok=None):
        tok = tok or self.peek()
        raise ParseError([Diagnostic(tok.line, tok.column, message)])


def describe(tok):
    if tok.kind == "EOF":
        return "end of input"
    return f"'{tok.text}'"


def parse_expr(ts):
    """Read an integer term expression: + and - over products."""
    left = parse_product(ts)
    while ts.peek().kind == "PUNCT" and ts.peek().text in ("+", "-"):
        op = ts.next().text
        left = Arith(op, left, parse_product(ts))
    return left


def parse_product(ts):
    left = parse_unary(ts)
    while (ts.peek().kind == "PUNCT" and ts.peek().text in ("*", "//")) or ts.at("mod", "SYM"):
        op = ts.next().text
        left = Arith(op, left, parse_unary(ts))
    return left


def _int_literal(ts, tok, sign=1):
    value = sign * int(tok.text)
    if value < INT_MIN or value > INT_MAX:
        ts.error(f"integer literal {value} out of range", tok)
    return value


def parse_unary(ts):
    if ts.at("-", "PUNCT"):
        ts.next()
        if ts.peek().kind == "INT":
            return _int_literal(ts, ts.next(), -1)
        return Arith("-", 0, parse_unary(ts))
    return parse_primary(ts)


def parse_primary(ts):
    tok = ts.peek()
    if tok.kind == "INT":
        ts.next()
        return _int_literal(ts, tok)
    if tok.kind == "VAR":
        ts.next()
        if tok.text == "_":
            return ts.fresh_var()
        return Var(tok.text)
    if tok.kind == "SYM":
        ts.next()
        return Fn(tok.text, parse_args(ts))
    if ts.accept("["):
        return parse_list_tail(ts)
    if ts.accept("("):
        inner = parse_expr(ts)
        ts.expect(")")
        return inner
    ts.error(f"expected a term but found {describe(tok)}", tok)


def parse_args(ts):
    """Read an optional parenthesized argument list."""
    if not ts.accept("("):
        return ()
    args = [parse_expr(ts)]
    while ts.accept(","):
        args.append(parse_expr(ts))
    ts.expect(")")
    return tuple(args)


def parse_list_tail(ts):
    """Read the rest of a list after '['."""
    if ts.accept("]"):
        return make_list([])
    items = [parse_expr(ts)]
    while ts.accept(","):
        items.append(parse_expr(ts))
    tail = None
    if ts.accept("|"):
        tail = parse_expr(ts)
    ts.expect("]")
    return make_list(items, tail)


def parse_atom_tokens(ts):
    """Read an atom: a lowercase predicate symbol with optional arguments."""
    tok = ts.expect_kind("SYM", "a predicate symbol")
    return Atom(tok.text, parse_args(ts))


def parse_cost_expr(ts):
    """Read a real-valued cost expression: + - * / over numbers, variables and float()."""
    left = _parse_cost_product(ts)
    while ts.peek().kind == "PUNCT" and ts.peek().text in ("+", "-"):
        op = ts.next().text
        left = Arith(op, left, _parse_cost_product(ts))
    return left


def _parse_cost_product(ts):
    left = _parse_cost_unary(ts)
    while ts.peek().kind == "PUNCT" and ts.peek().text in ("*", "/"):
        op = ts.next().text
        left = Arith(op, left, _parse_cost_unary(ts))
    return left


def _parse_cost_unary(ts):
    if ts.accept("-"):
        operand = _parse_cost_unary(ts)
        if isinstance(operand, float):
            return -operand
        return Arith("-", 0.0, operand)
    tok = ts.peek()
    if tok.kind in ("INT", "FLOAT"):
        ts.next()
        return float(tok.text)
    if tok.kind == "VAR":
        ts.next()
        return Var(tok.text)
    if tok.kind == "SYM" and tok.text == "float":
        ts.next()
        ts.expect("(")
        inner = parse_cost_expr(ts)
        ts.expect(")")
        return Fn("float", (inner,))
    if ts.accept("("):
        inner = parse_cost_expr(ts)
        ts.expect(")")
        return inner
    ts.error(f"expected a cost expression but found {describe(tok)}", tok)


def parse_term(text):
    """Parse a single term from text (used by tests and model files)."""
    ts = TokenStream(tokenize(text))
    term = parse_expr(ts)
    if not ts.at_end():
        ts.error(f"unexpected {describe(ts.peek())} after term")
    return term


def parse_atom(text, first_line=1):
    """Parse a single atom from text, e.g. 'f(3,[2,4])'."""
    ts = TokenStream(tokenize(text, first_line))
    atom = parse_atom_tokens(ts)
    if not ts.at_end():
        ts.error(f"unexpected {describe(ts.peek())} after atom")
    return atom
