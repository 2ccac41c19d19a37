"""The command term language: constructors, normal form, derived commands.

Commands are immutable, hash-consed trees.  Construction (``test``,
``seq``, ``choice``, ...) is purely structural: no rewriting happens
until :func:`normalize` is called, so symbolic forms such as
``pow(c, i)`` survive parsing and printing.  ``normalize`` rewrites a
tree to a canonical form, and two normalized commands are structurally
equal exactly when they are the same object.

The rewrite set: choices are flattened, sorted, deduplicated, stripped
of magic, and their atomic members are merged pointwise (a choice of
atomics is the atomic of the unioned relations, and likewise for the
``atomic ; abort`` members); ``abort`` and magic left-annihilate
sequential composition, ``nil`` is its identity and adjacent tests
fuse; fixed iterations unfold per their inductive definition; an atomic
that enables no transition collapses to magic.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ExponentCapError, SpaceMismatchError
from .space import StateRel, StateSet, StateSpace

# Node kinds, in canonical sort order.
ABORT = 0
TEST = 1
ATOM = 2
CHOICE = 3
SEQ = 4
PAR = 5
CONJ = 6
FIN = 7
OM = 8
INF = 9
POW = 10

_KIND_NAMES = {
    ABORT: "abort", TEST: "test", ATOM: "atom", CHOICE: "choice",
    SEQ: "seq", PAR: "par", CONJ: "conj", FIN: "fin", OM: "om",
    INF: "inf", POW: "pow",
}

# The two concrete synchronisation operators.
OP_PAR = "par"
OP_CONJ = "cap"
SYNC_OPS = (OP_PAR, OP_CONJ)

DEFAULT_EXPONENT_CAP = 32


class Command:
    """One hash-consed node of a command tree.

    ``args`` holds the payload: masks for tests/atomics, child nodes
    for the operators, ``(child, exponent)`` for ``pow``.  ``skey`` is a
    session-independent structural key used for canonical ordering.
    """

    __slots__ = ("kind", "space", "args", "skey", "uid", "__weakref__")

    def __init__(self, kind, space, args, skey, uid):
        self.kind = kind
        self.space = space
        self.args = args
        self.skey = skey
        self.uid = uid

    @property
    def is_magic(self):
        return self.kind == TEST and self.args[0] == 0

    @property
    def is_nil(self):
        return self.kind == TEST and self.args[0] == self.space.full_set_mask

    def children(self):
        if self.kind in (CHOICE,):
            return self.args
        if self.kind in (SEQ, PAR, CONJ):
            return self.args
        if self.kind in (FIN, OM, INF):
            return (self.args[0],)
        if self.kind == POW:
            return (self.args[0],)
        return ()

    def __repr__(self):
        from .printer import command_to_dsl

        return f"<cmd {command_to_dsl(self)}>"


_TABLE = {}
_NEXT_UID = 0


def _intern(kind, space, args, skey):
    global _NEXT_UID
    key = (space, kind) + tuple(a.uid if isinstance(a, Command) else a for a in args)
    node = _TABLE.get(key)
    if node is None:
        node = Command(kind, space, args, skey, _NEXT_UID)
        _NEXT_UID += 1
        _TABLE[key] = node
    return node


def _same_space(space, parts):
    for c in parts:
        if c.space != space:
            raise SpaceMismatchError(f"command over {c.space!r} used in space {space!r}")


# --- raw constructors ----------------------------------------------------

def abort(space):
    return _intern(ABORT, space, (), (ABORT,))


def test(space, members):
    """Instantaneous test over a state set (``StateSet`` or raw mask)."""
    mask = members.mask if isinstance(members, StateSet) else members
    return _intern(TEST, space, (mask,), (TEST, mask))


def magic(space):
    return test(space, 0)


def nil(space):
    return test(space, space.full_set_mask)


def atom(space, prel, erel):
    """Atomic step command from its program/environment relations."""
    p = prel.mask if isinstance(prel, StateRel) else prel
    e = erel.mask if isinstance(erel, StateRel) else erel
    return _intern(ATOM, space, (p, e), (ATOM, p, e))


def choice(*items):
    if len(items) == 1 and isinstance(items[0], (list, tuple)):
        items = tuple(items[0])
    if not items:
        raise ValueError("choice over an empty set has no space; use magic(space)")
    space = items[0].space
    _same_space(space, items)
    if len(items) == 1:
        return items[0]
    skey = (CHOICE,) + tuple(c.skey for c in items)
    return _intern(CHOICE, space, tuple(items), skey)


def seq(a, b):
    _same_space(a.space, (b,))
    return _intern(SEQ, a.space, (a, b), (SEQ, a.skey, b.skey))


def par(a, b):
    _same_space(a.space, (b,))
    return _intern(PAR, a.space, (a, b), (PAR, a.skey, b.skey))


def conj(a, b):
    _same_space(a.space, (b,))
    return _intern(CONJ, a.space, (a, b), (CONJ, a.skey, b.skey))


def sync(op, a, b):
    if op == OP_PAR:
        return par(a, b)
    if op == OP_CONJ:
        return conj(a, b)
    raise ValueError(f"unknown synchronisation operator {op!r}")


def fin(c):
    return _intern(FIN, c.space, (c,), (FIN, c.skey))


def om(c):
    return _intern(OM, c.space, (c,), (OM, c.skey))


def inf(c):
    return _intern(INF, c.space, (c,), (INF, c.skey))


def pow_(c, i):
    if i < 0:
        raise ValueError("fixed iteration exponent must be a natural number")
    return _intern(POW, c.space, (c, i), (POW, c.skey, i))


def seq_all(parts, space=None):
    """Right-nested sequence of ``parts`` (``nil`` when empty)."""
    if not parts:
        return nil(space)
    out = parts[-1]
    for c in reversed(parts[:-1]):
        out = seq(c, out)
    return out


# --- normalization -------------------------------------------------------

_NORM_MEMO = {}


def normalize(c, exponent_cap=DEFAULT_EXPONENT_CAP):
    """Canonical form of ``c``; idempotent and deterministic."""
    hit = _NORM_MEMO.get(c)
    if hit is not None:
        return hit
    kind = c.kind
    if kind in (ABORT, TEST):
        out = c
    elif kind == ATOM:
        p, e = c.args
        out = magic(c.space) if p == 0 and e == 0 else c
    elif kind == CHOICE:
        out = _norm_choice([normalize(k, exponent_cap) for k in c.args], c.space)
    elif kind == SEQ:
        out = _norm_seq(normalize(c.args[0], exponent_cap), normalize(c.args[1], exponent_cap))
    elif kind in (PAR, CONJ):
        a = normalize(c.args[0], exponent_cap)
        b = normalize(c.args[1], exponent_cap)
        out = _intern(kind, c.space, (a, b), (kind, a.skey, b.skey))
    elif kind == FIN:
        body = normalize(c.args[0], exponent_cap)
        out = nil(c.space) if body.is_magic or body.is_nil else fin(body)
    elif kind == OM:
        body = normalize(c.args[0], exponent_cap)
        out = nil(c.space) if body.is_magic else om(body)
    elif kind == INF:
        body = normalize(c.args[0], exponent_cap)
        out = magic(c.space) if body.is_magic else inf(body)
    elif kind == POW:
        body, i = normalize(c.args[0], exponent_cap), c.args[1]
        if i > exponent_cap:
            raise ExponentCapError(f"pow exponent {i} exceeds unfold cap {exponent_cap}")
        out = nil(c.space)
        for _ in range(i):
            out = _norm_seq(body, out)
    else:  # pragma: no cover
        raise AssertionError(f"unknown node kind {kind}")
    _NORM_MEMO[c] = out
    _NORM_MEMO[out] = out
    return out


def _norm_choice(items, space):
    flat = []
    stack = list(reversed(items))
    while stack:
        it = stack.pop()
        if it.kind == CHOICE:
            stack.extend(reversed(it.args))
        else:
            flat.append(it)

    # Merge the atomic members pointwise: a1 | a2 enables the union of
    # their transitions, and (b1;abort | b2;abort) = (b1|b2);abort.
    ap = ae = bp = be = 0
    tmask = 0
    has_test = False
    rest = []
    for it in flat:
        if it.kind == ATOM:
            ap |= it.args[0]
            ae |= it.args[1]
        elif it.kind == TEST:
            tmask |= it.args[0]
            has_test = True
        elif it.kind == SEQ and it.args[0].kind == ATOM and it.args[1].kind == ABORT:
            bp |= it.args[0].args[0]
            be |= it.args[0].args[1]
        else:
            rest.append(it)
    if ap or ae:
        rest.append(atom(space, ap, ae))
    if bp or be:
        rest.append(seq(atom(space, bp, be), abort(space)))
    if has_test and tmask:  # magic members drop out
        rest.append(test(space, tmask))

    seen = set()
    uniq = []
    for it in rest:
        if it.uid not in seen:
            seen.add(it.uid)
            uniq.append(it)
    uniq.sort(key=lambda n: n.skey)
    if not uniq:
        return magic(space)
    if len(uniq) == 1:
        return uniq[0]
    return _intern(CHOICE, space, tuple(uniq), (CHOICE,) + tuple(n.skey for n in uniq))


def _norm_seq(a, b):
    if a.kind == SEQ:
        return _norm_seq(a.args[0], _norm_seq(a.args[1], b))
    if a.kind == ABORT:
        return a
    if a.kind == TEST:
        if a.args[0] == 0:
            return a
        if a.is_nil:
            return b
        if b.kind == TEST:
            return test(a.space, a.args[0] & b.args[0])
        if b.kind == SEQ and b.args[0].kind == TEST:
            return _norm_seq(test(a.space, a.args[0] & b.args[0].args[0]), b.args[1])
    if b.is_nil:
        return a
    return _intern(SEQ, a.space, (a, b), (SEQ, a.skey, b.skey))


# --- pseudo-atomic recognition -------------------------------------------

@dataclass(frozen=True)
class PseudoAtomic:
    """A command of shape ``a | b ; abort`` for atomics ``a`` and ``b``.

    ``np``/``ne`` are the relations of the terminate part, ``bp``/``be``
    of the abort part.  Plain atomics have an empty abort part.
    """

    space: StateSpace
    np: int
    ne: int
    bp: int
    be: int

    @property
    def is_atomic(self):
        return self.bp == 0 and self.be == 0

    def to_command(self):
        parts = []
        if self.np or self.ne:
            parts.append(atom(self.space, self.np, self.ne))
        if self.bp or self.be:
            parts.append(seq(atom(self.space, self.bp, self.be), abort(self.space)))
        if not parts:
            return magic(self.space)
        return normalize(choice(parts))


def as_pseudo_atomic(c):
    """Recognize a normalized command as pseudo-atomic, else ``None``.

    Magic counts as the degenerate atomic with no transitions.
    """
    if c.is_magic:
        return PseudoAtomic(c.space, 0, 0, 0, 0)
    items = c.args if c.kind == CHOICE else (c,)
    np = ne = bp = be = 0
    for it in items:
        if it.kind == ATOM:
            np |= it.args[0]
            ne |= it.args[1]
        elif it.kind == SEQ and it.args[0].kind == ATOM and it.args[1].kind == ABORT:
            bp |= it.args[0].args[0]
            be |= it.args[0].args[1]
        else:
            return None
    return PseudoAtomic(c.space, np, ne, bp, be)


# --- derived command forms -----------------------------------------------

def pi_step(rel):
    """Single program transition satisfying ``rel``."""
    return atom(rel.space, rel.mask, 0)


def eps_step(rel):
    """Single environment transition satisfying ``rel``."""
    return atom(rel.space, 0, rel.mask)


def any_step(rel):
    """Single transition of either kind satisfying ``rel``."""
    return atom(rel.space, rel.mask, rel.mask)


def assert_cmd(p):
    """No-op on ``p``, irrecoverable abort off ``p``."""
    space = p.space
    pbar = p.mask ^ space.full_set_mask
    return choice(nil(space), seq(test(space, pbar), abort(space)))


def guar(g):
    """Every program transition satisfies ``g``; environment is free."""
    space = g.space
    return om(atom(space, g.mask, space.full_rel_mask))


def rely(r):
    """Any transitions, aborting on an environment transition off ``r``."""
    space = r.space
    u = space.full_rel_mask
    body = choice(atom(space, u, u), seq(atom(space, 0, r.mask ^ u), abort(space)))
    return om(body)


def rely_alt(r):
    """The alternative unfolded form of :func:`rely` (a corpus law)."""
    space = r.space
    u = space.full_rel_mask
    body = choice(
        atom(space, u, 0),
        atom(space, 0, r.mask),
        seq(atom(space, 0, r.mask ^ u), abort(space)),
    )
    return om(body)


def term_cmd(space):
    """Finitely many transitions, then environment transitions forever."""
    u = space.full_rel_mask
    return seq(fin(atom(space, u, u)), om(atom(space, 0, u)))


def fair_cmd(space):
    """Disallows preemption by the environment forever."""
    u = space.full_rel_mask
    eps_fin = fin(atom(space, 0, u))
    return seq(eps_fin, om(seq(atom(space, u, 0), eps_fin)))


def idle_cmd(space):
    """Finitely many stuttering program transitions; environment free."""
    return conj(guar(StateRel(space, space.id_rel_mask())), term_cmd(space))


def evolve(r):
    """Guarantee ``r`` of program transitions and rely on it of the environment."""
    return conj(guar(r), rely(r))


def evolve_alt(r):
    """The single-iteration form of :func:`evolve` (a corpus law)."""
    space = r.space
    rbar = r.mask ^ space.full_rel_mask
    body = choice(atom(space, r.mask, r.mask), seq(atom(space, 0, rbar), abort(space)))
    return om(body)


def inv_cmd(p):
    """Generalised invariant: assume ``p`` initially, maintain it throughout."""
    from .space import postr

    return seq(assert_cmd(p), evolve(postr(p)))


def iota(space, op):
    """The atomic identity of a synchronisation operator."""
    u = space.full_rel_mask
    if op == OP_PAR:
        return atom(space, 0, u)
    if op == OP_CONJ:
        return atom(space, u, u)
    raise ValueError(f"unknown synchronisation operator {op!r}")
