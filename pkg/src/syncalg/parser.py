"""Recursive-descent parser for the command DSL.

Grammar (``;`` binds tightest, ``|`` loosest; ``||`` and ``cap`` sit in
between and may not be mixed without parentheses)::

    cmd    := choice
    choice := syncl ("|" syncl)*
    syncl  := seq (("||" seq)* | ("cap" seq)*)
    seq    := prim (";" prim)*
    prim   := "abort" | "magic" | "nil" | "test" set | "assert" set
            | "pi" rel | "eps" rel | "step" rel
            | "guar" rel | "rely" rel | "term" | "fair" | "idle"
            | "evolve" rel | "inv" set | "iota"
            | "fin(" cmd ")" | "om(" cmd ")" | "inf(" cmd ")"
            | "pow(" cmd "," nat ")" | "(" cmd ")" | "$" name

    set    := "{" names "}" | "comp(" set ")" | "meet(" set "," set ")"
            | "join(" set "," set ")" | "$" name
    rel    := "{" pairs "}" | "id" | "univ" | "comp(" rel ")"
            | "meet(" rel "," rel ")" | "join(" rel "," rel ")"
            | "prer(" set ")" | "postr(" set ")" | "$" name

Derived forms elaborate at parse time to their definitional expansions.
``iota`` requires an ambient synchronisation operator (``sync_op``).
``$name`` placeholders splice values from ``bindings``; the expected
type is determined by position.
"""

from __future__ import annotations

import re

from . import terms as t
from .errors import ParseError
from .space import StateRel, StateSet, prer, postr

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<barbar>\|\|)
  | (?P<sym>[{}(),;|])
  | (?P<dollar>\$[A-Za-z_][A-Za-z0-9_]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, space, sync_op=None, bindings=None):
        self.tokens = _tokenize(text)
        self.i = 0
        self.space = space
        self.sync_op = sync_op
        self.bindings = bindings or {}

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text):
        kind, value, pos = self.next()
        if value != text:
            raise ParseError(f"expected {text!r}, found {value!r}", pos)

    def fail(self, msg):
        raise ParseError(msg, self.peek()[2])

    def binding(self, name, want, pos):
        if name not in self.bindings:
            raise ParseError(f"unbound placeholder ${name}", pos)
        value = self.bindings[name]
        if not isinstance(value, want):
            raise ParseError(
                f"placeholder ${name} is bound to {type(value).__name__}, "
                f"expected {want.__name__}", pos)
        return value

    # -- command layers ----------------------------------------------------

    def command(self):
        items = [self.syncl()]
        while self.peek()[1] == "|":
            self.next()
            items.append(self.syncl())
        return items[0] if len(items) == 1 else t.choice(items)

    def syncl(self):
        left = self.seq()
        kind, value, pos = self.peek()
        if kind == "barbar":
            while self.peek()[0] == "barbar":
                self.next()
                left = t.par(left, self.seq())
            if self.peek()[1] == "cap":
                self.fail("mixing || and cap requires parentheses")
        elif value == "cap":
            while self.peek()[1] == "cap":
                self.next()
                left = t.conj(left, self.seq())
            if self.peek()[0] == "barbar":
                self.fail("mixing || and cap requires parentheses")
        return left

    def seq(self):
        parts = [self.prim()]
        while self.peek()[1] == ";":
            self.next()
            parts.append(self.prim())
        return t.seq_all(parts, self.space)

    def prim(self):
        kind, value, pos = self.next()
        space = self.space
        if kind == "dollar":
            return self.binding(value[1:], t.Command, pos)
        if value == "(":
            inner = self.command()
            self.expect(")")
            return inner
        if kind != "ident":
            raise ParseError(f"expected a command, found {value!r}", pos)
        if value == "abort":
            return t.abort(space)
        if value == "magic":
            return t.magic(space)
        if value == "nil":
            return t.nil(space)
        if value == "test":
            return t.test(space, self.set_value().mask)
        if value == "assert":
            return t.assert_cmd(self.set_value())
        if value == "pi":
            return t.pi_step(self.rel_value())
        if value == "eps":
            return t.eps_step(self.rel_value())
        if value == "step":
            return t.any_step(self.rel_value())
        if value == "guar":
            return t.guar(self.rel_value())
        if value == "rely":
            return t.rely(self.rel_value())
        if value == "evolve":
            return t.evolve(self.rel_value())
        if value == "inv":
            return t.inv_cmd(self.set_value())
        if value == "term":
            return t.term_cmd(space)
        if value == "fair":
            return t.fair_cmd(space)
        if value == "idle":
            return t.idle_cmd(space)
        if value == "iota":
            if self.sync_op is None:
                raise ParseError("iota needs an ambient operator (pass --op)", pos)
            return t.iota(space, self.sync_op)
        if value in ("fin", "om", "inf"):
            self.expect("(")
            inner = self.command()
            self.expect(")")
            return {"fin": t.fin, "om": t.om, "inf": t.inf}[value](inner)
        if value == "pow":
            self.expect("(")
            inner = self.command()
            self.expect(",")
            n = self.nat_value()
            self.expect(")")
            return t.pow_(inner, n)
        raise ParseError(f"expected a command, found {value!r}", pos)

    def nat_value(self):
        kind, value, pos = self.next()
        if kind == "num":
            return int(value)
        if kind == "dollar":
            return self.binding(value[1:], int, pos)
        raise ParseError(f"expected a natural number, found {value!r}", pos)

    # -- set and relation expressions ---------------------------------------

    def set_value(self):
        kind, value, pos = self.next()
        space = self.space
        if kind == "dollar":
            return self.binding(value[1:], StateSet, pos)
        if value == "{":
            mask = 0
            while self.peek()[1] != "}":
                k, name, p = self.next()
                if k != "ident":
                    raise ParseError(f"expected a state name, found {name!r}", p)
                mask |= space.state_bit(name)
                if self.peek()[1] == ",":
                    self.next()
            self.expect("}")
            return StateSet(space, mask)
        if value == "comp":
            self.expect("(")
            inner = self.set_value()
            self.expect(")")
            return inner.complement()
        if value in ("meet", "join"):
            self.expect("(")
            a = self.set_value()
            self.expect(",")
            b = self.set_value()
            self.expect(")")
            return a.intersection(b) if value == "meet" else a.union(b)
        raise ParseError(f"expected a state set, found {value!r}", pos)

    def rel_value(self):
        kind, value, pos = self.next()
        space = self.space
        if kind == "dollar":
            return self.binding(value[1:], StateRel, pos)
        if value == "{":
            mask = 0
            while self.peek()[1] != "}":
                self.expect("(")
                k1, frm, p1 = self.next()
                self.expect(",")
                k2, to, p2 = self.next()
                self.expect(")")
                if k1 != "ident" or k2 != "ident":
                    raise ParseError("expected a state pair", p1)
                if frm not in space.index or to not in space.index:
                    raise ParseError(f"unknown state in pair ({frm},{to})", p1)
                mask |= space.pair_bit(frm, to)
                if self.peek()[1] == ",":
                    self.next()
            self.expect("}")
            return StateRel(space, mask)
        if value == "id":
            return StateRel(space, space.id_rel_mask())
        if value == "univ":
            return StateRel(space, space.full_rel_mask)
        if value == "comp":
            self.expect("(")
            inner = self.rel_value()
            self.expect(")")
            return inner.complement()
        if value in ("meet", "join"):
            self.expect("(")
            a = self.rel_value()
            self.expect(",")
            b = self.rel_value()
            self.expect(")")
            return a.intersection(b) if value == "meet" else a.union(b)
        if value == "prer":
            self.expect("(")
            inner = self.set_value()
            self.expect(")")
            return prer(inner)
        if value == "postr":
            self.expect("(")
            inner = self.set_value()
            self.expect(")")
            return postr(inner)
        raise ParseError(f"expected a relation, found {value!r}", pos)


def parse_command(text, space, sync_op=None, bindings=None):
    """Parse DSL ``text`` over ``space`` into a raw command tree."""
    p = _Parser(text, space, sync_op=sync_op, bindings=bindings)
    cmd = p.command()
    kind, value, pos = p.peek()
    if kind != "eof":
        raise ParseError(f"trailing input starting at {value!r}", pos)
    return cmd
