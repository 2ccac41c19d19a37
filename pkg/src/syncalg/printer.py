"""Render commands back to DSL text.

``parse(command_to_dsl(c))`` normalizes to ``normalize(c)``: an atomic
with both relations enabled has no single-primitive spelling, so it is
printed as ``pi R | eps R'`` and the normalizer's atomic-merge folds it
back together.
"""

from __future__ import annotations

from . import terms as t

_PREC_CHOICE = 0
_PREC_SYNC = 1
_PREC_SEQ = 2
_PREC_PRIM = 3


def set_to_dsl(space, mask):
    return "{%s}" % ",".join(space.set_names(mask))


def rel_to_dsl(space, mask):
    if mask == space.full_rel_mask:
        return "univ"
    if mask == space.id_rel_mask():
        return "id"
    return "{%s}" % ",".join("(%s,%s)" % p for p in space.rel_pairs(mask))


def command_to_dsl(c):
    return _render(c, _PREC_CHOICE)


def _paren(text, prec, need):
    return f"({text})" if prec < need else text


def _render(c, need):
    space = c.space
    kind = c.kind
    if kind == t.ABORT:
        return "abort"
    if kind == t.TEST:
        mask = c.args[0]
        if mask == 0:
            return "magic"
        if mask == space.full_set_mask:
            return "nil"
        return f"test {set_to_dsl(space, mask)}"
    if kind == t.ATOM:
        p, e = c.args
        if p == e and p != 0:
            return f"step {rel_to_dsl(space, p)}"
        if e == 0:
            return f"pi {rel_to_dsl(space, p)}"
        if p == 0:
            return f"eps {rel_to_dsl(space, e)}"
        both = f"pi {rel_to_dsl(space, p)} | eps {rel_to_dsl(space, e)}"
        return _paren(both, _PREC_CHOICE, need)
    if kind == t.CHOICE:
        text = " | ".join(_render(k, _PREC_SYNC) for k in c.args)
        return _paren(text, _PREC_CHOICE, need)
    if kind == t.SEQ:
        parts = []
        node = c
        while node.kind == t.SEQ:
            parts.append(node.args[0])
            node = node.args[1]
        parts.append(node)
        text = " ; ".join(_render(k, _PREC_PRIM) for k in parts)
        return _paren(text, _PREC_SEQ, need)
    if kind in (t.PAR, t.CONJ):
        opname = " || " if kind == t.PAR else " cap "
        text = opname.join(_render(k, _PREC_SEQ) for k in c.args)
        return _paren(text, _PREC_SYNC, need)
    if kind == t.FIN:
        return f"fin({_render(c.args[0], _PREC_CHOICE)})"
    if kind == t.OM:
        return f"om({_render(c.args[0], _PREC_CHOICE)})"
    if kind == t.INF:
        return f"inf({_render(c.args[0], _PREC_CHOICE)})"
    if kind == t.POW:
        return f"pow({_render(c.args[0], _PREC_CHOICE)}, {c.args[1]})"
    raise AssertionError(f"unknown node kind {kind}")  # pragma: no cover
