"""Depth-bounded trace semantics: enumeration, refinement, equality.

A behavior is a start state, a contiguous run of labeled steps and an
outcome: ``term`` (reached an immediate-termination state), ``abort``
(reached a state outside the non-abort set) or ``cut`` (the fuel bound
hit while a transition was still enabled).  Trace sets are
abort-normalized: once a point can abort, nothing beyond it is
recorded, matching abort subsuming all behaviour.

Refinement ``c1 >= c2`` is abort-closed containment: every behavior of
``c2`` must be a behavior of ``c1`` unless it extends a point where
``c1`` can abort.  The subset walk the engines implement decides it;
witnesses are reconstructed here, shortest first with lexicographic
ties (program before environment steps, then target state order).

At finite depth the least and greatest iteration readings coincide, so
``fin``/``om`` pairs are indistinguishable here by design; divergence
is the automaton backend's job.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import terms as t
from ._kernel import make_engine, make_pure_engine
from .errors import StateExplosionError
from .expand import expand
from .terms import normalize

DEFAULT_FUEL = 5
DEFAULT_RESIDUAL_CAP = 10_000

PI = 0
EPS = 1
_KIND_NAMES = {PI: "pi", EPS: "eps"}


@dataclass(frozen=True, order=True)
class Step:
    kind: int
    frm: str
    to: str

    def __str__(self):
        return f"{_KIND_NAMES[self.kind]}({self.frm}->{self.to})"


@dataclass(frozen=True)
class Behavior:
    start: str
    steps: tuple
    outcome: str  # 'term' | 'abort' | 'cut' | 'diverge' (witnesses only)

    def sort_key(self):
        return (len(self.steps), self.steps, self.outcome, self.start)

    def __str__(self):
        trail = " ".join(str(s) for s in self.steps)
        body = f"{self.start}: {trail}" if trail else f"{self.start}:"
        return f"{body} [{self.outcome}]"


@dataclass(frozen=True)
class TraceSet:
    space: object
    fuel: int
    behaviors: tuple

    def __iter__(self):
        return iter(self.behaviors)

    def __len__(self):
        return len(self.behaviors)

    def __str__(self):
        return "\n".join(str(b) for b in self.behaviors)


@dataclass(frozen=True)
class Verdict:
    holds: bool
    witness: Behavior | None = None
    direction: str | None = None

    def __bool__(self):
        return self.holds


class Session:
    """Lowered step tables plus the containment engine for one space.

    Rows are appended as the residual closure of each queried command
    is discovered; the closure of any command is finite, and ``cap``
    bounds it against synchronisation blow-ups.
    """

    def __init__(self, space, cap=DEFAULT_RESIDUAL_CAP, force_pure=False):
        self.space = space
        self.cap = cap
        maker = make_pure_engine if force_pure else make_engine
        self.engine = maker(space.n)
        self.ids = {}

    def lower(self, c):
        c = normalize(c)
        rid = self.ids.get(c)
        if rid is not None:
            return rid
        queue = [c]
        pending = []
        while queue:
            node = queue.pop()
            if node in self.ids:
                continue
            self.ids[node] = len(self.ids)
            if len(self.ids) > self.cap:
                raise StateExplosionError(self.cap)
            e = expand(node)
            pending.append(e)
            for br in e.branches:
                if br.cont not in self.ids:
                    queue.append(br.cont)
        for e in pending:
            self.engine.add_row(
                e.pn_mask, e.pt_mask,
                [(br.pmask, br.emask, self.ids[br.cont]) for br in e.branches])
        return self.ids[c]

    def refines(self, c1, c2, fuel):
        r1 = self.lower(c1)
        r2 = self.lower(c2)
        return self.engine.refines(r1, r2, fuel)

    def clear_memo(self):
        self.engine.clear_memo()


def bounded_traces(c, start, fuel=DEFAULT_FUEL, op=None, cap=DEFAULT_RESIDUAL_CAP):
    """All behaviors of ``c`` from ``start``, truncated at ``fuel`` steps."""
    c = normalize(c)
    space = c.space
    sigma0 = space.index[start]
    states = space.states
    out = []

    def go(nodes, sigma, fuel_left, steps):
        pn = space.full_set_mask
        pt = 0
        for node in nodes:
            e = expand(node)
            pn &= e.pn_mask
            pt |= e.pt_mask
        bit = 1 << sigma
        if not pn & bit:
            out.append(Behavior(start, steps, "abort"))
            return
        if pt & bit:
            out.append(Behavior(start, steps, "term"))
        succ = _successor_map(nodes, sigma, space)
        if not succ:
            return
        if fuel_left == 0:
            out.append(Behavior(start, steps, "cut"))
            return
        for (kind, to), conts in sorted(succ.items()):
            step = Step(kind, states[sigma], states[to])
            go(conts, to, fuel_left - 1, steps + (step,))

    go(frozenset((c,)), sigma0, fuel, ())
    return TraceSet(space, fuel, tuple(sorted(out, key=Behavior.sort_key)))


def _successor_map(nodes, sigma, space):
    n = space.n
    nmask = space.full_set_mask
    shift = sigma * n
    raw = {}
    for node in nodes:
        for br in expand(node).branches:
            pm = br.pmask >> shift & nmask
            em = br.emask >> shift & nmask
            to = 0
            while pm or em:
                if pm & 1:
                    raw.setdefault((PI, to), set()).add(br.cont)
                if em & 1:
                    raw.setdefault((EPS, to), set()).add(br.cont)
                pm >>= 1
                em >>= 1
                to += 1
    return {step: frozenset(members) for step, members in raw.items()}


def refines_at_depth(c1, c2, fuel=DEFAULT_FUEL, op=None, session=None,
                     cap=DEFAULT_RESIDUAL_CAP):
    """Does ``c1 >= c2`` hold on all behaviors up to ``fuel`` steps?"""
    c1 = normalize(c1)
    c2 = normalize(c2)
    if c1.space != c2.space:
        from .errors import SpaceMismatchError

        raise SpaceMismatchError("refinement operands over different spaces")
    if session is None:
        session = Session(c1.space, cap=cap)
    failing = session.refines(c1, c2, fuel)
    if failing < 0:
        return Verdict(True)
    witness = _witness_search(c1, c2, fuel)
    assert witness is not None, "engine reported failure but no witness found"
    return Verdict(False, witness=witness)


def equal_at_depth(c1, c2, fuel=DEFAULT_FUEL, op=None, session=None,
                   cap=DEFAULT_RESIDUAL_CAP):
    """Two-way refinement at one depth."""
    if session is None:
        session = Session(normalize(c1).space, cap=cap)
    fwd = refines_at_depth(c1, c2, fuel, session=session)
    if not fwd.holds:
        return Verdict(False, witness=fwd.witness, direction="lhs >= rhs")
    bwd = refines_at_depth(c2, c1, fuel, session=session)
    if not bwd.holds:
        return Verdict(False, witness=bwd.witness, direction="rhs >= lhs")
    return Verdict(True)


def _witness_search(c1, c2, fuel):
    """Shortest behavior of ``c2`` not covered by ``c1``, lexicographic ties.

    Level-synchronized BFS over determinized subset pairs, seeded with
    every start state in enumeration order.
    """
    space = c1.space
    states = space.states
    full = space.full_set_mask

    def flags(nodes, sigma):
        pn = full
        pt = 0
        for node in nodes:
            e = expand(node)
            pn &= e.pn_mask
            pt |= e.pt_mask
        bit = 1 << sigma
        return bool(pn & bit), bool(pt & bit)

    level = []
    seen = set()
    for sigma, name in enumerate(states):
        entry = ((), name, frozenset((c1,)), frozenset((c2,)), sigma)
        level.append(entry)
        seen.add((entry[2], entry[3], sigma))
    for depth in range(fuel + 1):
        next_level = []
        for steps, start, s1, s2, sigma in level:
            ok1, term1 = flags(s1, sigma)
            ok2, term2 = flags(s2, sigma)
            if not ok1:
                continue  # c1 aborts here: subtree covered
            if not ok2:
                return Behavior(start, steps, "abort")
            if term2 and not term1:
                return Behavior(start, steps, "term")
            succ2 = _successor_map(s2, sigma, space)
            if not succ2:
                continue
            if depth == fuel:
                if not _successor_map(s1, sigma, space):
                    return Behavior(start, steps, "cut")
                continue
            succ1 = _successor_map(s1, sigma, space)
            for (kind, to), conts2 in sorted(succ2.items()):
                conts1 = succ1.get((kind, to), frozenset())
                key = (conts1, conts2, to)
                step = Step(kind, states[sigma], states[to])
                entry = (steps + (step,), start, conts1, conts2, to)
                if key not in seen:
                    seen.add(key)
                    next_level.append(entry)
        level = next_level
    return None
