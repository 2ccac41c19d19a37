"""Expanded form of commands and the atomic synchronisation tables.

Every command decomposes into (non-abort states, immediate-termination
states, step branches): ``c = assert(pn) ; (test(pt) | OR_a a ; c')``.
``expand`` computes that decomposition by structural recursion,
unfolding each iteration node exactly once.  Branches remember whether
a least-fixed-point (``fin``/``pow``) or greatest-fixed-point
(``om``/``inf``) unfold produced them; the automaton backend uses the
flags as edge polarity metadata.

The two concrete operators differ only in their atomic tables:

* parallel: a program transition of one side synchronises with a
  matching environment transition of the other, and two matching
  environment transitions synchronise to an environment transition;
* weak conjunction: transitions synchronise only when both sides agree
  on kind and state change.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import terms as t
from .errors import UnguardedIterationError
from .printer import command_to_dsl
from .terms import OP_CONJ, OP_PAR, PseudoAtomic, normalize


@dataclass(frozen=True)
class Branch:
    """One step alternative: an atomic (as two relation masks) plus its
    continuation; ``lfp``/``gfp`` record which iteration unfolds fed it."""

    pmask: int
    emask: int
    cont: object
    lfp: bool = False
    gfp: bool = False


@dataclass(frozen=True)
class ExpandedForm:
    space: object
    pn_mask: int
    pt_mask: int
    branches: tuple

    def pn_set(self):
        from .space import StateSet

        return StateSet(self.space, self.pn_mask)

    def pt_set(self):
        from .space import StateSet

        return StateSet(self.space, self.pt_mask)


def sync_masks(op, p1, e1, p2, e2):
    if op == OP_PAR:
        return (p1 & e2) | (e1 & p2), e1 & e2
    if op == OP_CONJ:
        return p1 & p2, e1 & e2
    raise ValueError(f"unknown synchronisation operator {op!r}")


def sync_atomic(op, a1, a2):
    """Synchronise two atomic commands under an operator's table."""
    if a1.kind != t.ATOM or a2.kind != t.ATOM:
        raise ValueError("sync_atomic expects atomic commands")
    p, e = sync_masks(op, a1.args[0], a1.args[1], a2.args[0], a2.args[1])
    return t.atom(a1.space, p, e)


def sync_pseudo(op, x1, x2):
    """Synchronise two pseudo-atomics; abort absorbs the mixed cases."""
    np, ne = sync_masks(op, x1.np, x1.ne, x2.np, x2.ne)
    bp1, be1 = sync_masks(op, x1.np, x1.ne, x2.bp, x2.be)
    bp2, be2 = sync_masks(op, x1.bp, x1.be, x2.np, x2.ne)
    bp3, be3 = sync_masks(op, x1.bp, x1.be, x2.bp, x2.be)
    return PseudoAtomic(x1.space, np, ne, bp1 | bp2 | bp3, be1 | be2 | be3)


_EXPAND_MEMO = {}

_OP_OF_KIND = {t.PAR: OP_PAR, t.CONJ: OP_CONJ}


def expand(c, op=None):
    """Expanded form of ``c``.

    ``op`` is accepted for interface symmetry; parallel and weak
    conjunction nodes each carry their own operator, so the result does
    not depend on it.
    """
    c = normalize(c)
    hit = _EXPAND_MEMO.get(c)
    if hit is not None:
        return hit
    out = _expand_node(c)
    _EXPAND_MEMO[c] = out
    return out


def _merge_branches(branches):
    by_cont = {}
    order = []
    for b in branches:
        if b.pmask == 0 and b.emask == 0:
            continue
        prev = by_cont.get(b.cont)
        if prev is None:
            by_cont[b.cont] = b
            order.append(b.cont)
        else:
            by_cont[b.cont] = Branch(
                prev.pmask | b.pmask, prev.emask | b.emask, b.cont,
                prev.lfp or b.lfp, prev.gfp or b.gfp)
    merged = [by_cont[cont] for cont in order]
    merged.sort(key=lambda b: (b.cont.skey, b.pmask, b.emask))
    return tuple(merged)


def _expand_node(c):
    space = c.space
    full = space.full_set_mask
    kind = c.kind

    if kind == t.ABORT:
        return ExpandedForm(space, 0, 0, ())
    if kind == t.TEST:
        return ExpandedForm(space, full, c.args[0], ())
    if kind == t.ATOM:
        br = Branch(c.args[0], c.args[1], t.nil(space))
        return ExpandedForm(space, full, 0, (br,))
    if kind == t.CHOICE:
        pn, pt = full, 0
        branches = []
        for k in c.args:
            e = expand(k)
            pn &= e.pn_mask
            pt |= e.pt_mask
            branches.extend(e.branches)
        return ExpandedForm(space, pn, pt, _merge_branches(branches))
    if kind == t.SEQ:
        a, b = c.args
        e1, e2 = expand(a), expand(b)
        pn = e1.pn_mask & ((e1.pt_mask ^ full) | e2.pn_mask)
        pt = e1.pt_mask & e2.pt_mask
        branches = [
            Branch(br.pmask, br.emask, t.normalize(t.seq(br.cont, b)), br.lfp, br.gfp)
            for br in e1.branches
        ]
        if e1.pt_mask:
            gate = space.prer_mask(e1.pt_mask)
            for br in e2.branches:
                branches.append(Branch(br.pmask & gate, br.emask & gate, br.cont, br.lfp, br.gfp))
        return ExpandedForm(space, pn, pt, _merge_branches(branches))
    if kind in (t.PAR, t.CONJ):
        op = _OP_OF_KIND[kind]
        a, b = c.args
        e1, e2 = expand(a), expand(b)
        pn = e1.pn_mask & e2.pn_mask
        pt = e1.pt_mask & e2.pt_mask
        branches = []
        for b1 in e1.branches:
            for b2 in e2.branches:
                p, e = sync_masks(op, b1.pmask, b1.emask, b2.pmask, b2.emask)
                if p == 0 and e == 0:
                    continue
                cont = t.normalize(t.sync(op, b1.cont, b2.cont))
                branches.append(Branch(p, e, cont, b1.lfp or b2.lfp, b1.gfp or b2.gfp))
        return ExpandedForm(space, pn, pt, _merge_branches(branches))
    if kind in (t.FIN, t.OM, t.INF):
        body = c.args[0]
        eb = expand(body)
        is_lfp = kind == t.FIN
        pt = 0 if kind == t.INF else full
        branches = [
            Branch(br.pmask, br.emask, t.normalize(t.seq(br.cont, c)),
                   br.lfp or is_lfp, br.gfp or not is_lfp)
            for br in eb.branches
        ]
        return ExpandedForm(space, eb.pn_mask, pt, _merge_branches(branches))
    raise AssertionError(f"expand needs a normalized command, got kind {kind}")


def nil_sync(c, op=None):
    """The command ``c (x) nil``: keeps only the stepless part of ``c``."""
    e = expand(c)
    space = c.space
    from .space import StateSet

    return normalize(t.seq(t.assert_cmd(StateSet(space, e.pn_mask)), t.test(space, e.pt_mask)))


def iter_bodies(c, _seen=None):
    """All om/inf iteration bodies occurring in ``c`` (normalized)."""
    if _seen is None:
        _seen = set()
    if c.uid in _seen:
        return ()
    _seen.add(c.uid)
    found = []
    if c.kind in (t.OM, t.INF):
        found.append(c)
    for k in c.children():
        found.extend(iter_bodies(k, _seen))
    return tuple(found)


def check_guarded(c):
    """Reject om/inf bodies that can terminate without taking a step.

    The automaton backend calls this; the bounded backend accepts such
    terms and merges the two fixed-point readings observationally.
    """
    c = normalize(c)
    for node in iter_bodies(c):
        body = node.args[0]
        if expand(body).pt_mask:
            raise UnguardedIterationError(
                f"iteration body can terminate without a step: {command_to_dsl(node)}")
    return c
