"""Residual-configuration automaton backend with divergence tracking.

Repeatedly expanding a command yields a finite graph of configurations
``(residual command, state)``.  Three observation languages live on it:

* terminating traces (paths into termination exits),
* abort-closed aborting prefixes (paths into abort exits),
* divergence prefixes (paths into configurations that admit an allowed
  infinite run).

``full_equal`` compares all three via determinized subset pairs; abort
on both sides closes a subtree, abort on one side alone separates the
commands.

Whether a configuration admits an allowed infinite run cannot be read
off a single inductive/coinductive bit per edge: synchronisations join
iteration unfolds from both operands, and an outer greatest fixed point
over a body that itself unfolds a least fixed point produces edges
carrying both marks whose cycles are genuinely divergent, while the
mirror-image term produces the same marks with no divergence.  The
``_DivergenceGraph`` below therefore instruments runs structurally:
iteration completions become accepting markers (greatest fixed points
only), sequencing chains run phases, and synchronisation takes a
fairness product requiring both operands to accept infinitely often.
A configuration diverges exactly when it reaches a cycle through an
accepting marker with at least one real step on it.  Edge polarity is
still reported (least-fixed-point unfolds dominate) as metadata.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import terms as t
from .bounded import EPS, PI, Behavior, Step, Verdict
from .errors import SpaceMismatchError, StateExplosionError
from .expand import check_guarded, expand
from .terms import OP_CONJ, OP_PAR, normalize

DEFAULT_CONFIG_CAP = 10_000
_DIV_NODE_CAP = 400_000

INDUCTIVE = "inductive"
COINDUCTIVE = "coinductive"


def _polarity(branch):
    if branch.gfp and not branch.lfp:
        return COINDUCTIVE
    return INDUCTIVE


@dataclass(frozen=True)
class Edge:
    src: tuple
    step: Step
    polarity: str
    dst: tuple


class ResidualAutomaton:
    """Reachable configurations of one command, with exit and divergence sets.

    Configurations are ``(normalized command, state name)`` pairs.
    """

    def __init__(self, space, root, configs, edges, term_exits, abort_exits, div_set):
        self.space = space
        self.root = root
        self.configs = configs
        self.edges = edges
        self.term_exits = term_exits
        self.abort_exits = abort_exits
        self.div_set = div_set

    def summary(self):
        return (f"configs={len(self.configs)} edges={len(self.edges)} "
                f"term_exits={len(self.term_exits)} abort_exits={len(self.abort_exits)} "
                f"diverging={len(self.div_set)}")


def _residual_closure(roots, cap):
    seen = []
    marks = set()
    queue = list(roots)
    while queue:
        node = queue.pop()
        if node in marks:
            continue
        marks.add(node)
        seen.append(node)
        if len(seen) > cap:
            raise StateExplosionError(cap)
        for br in expand(node).branches:
            if br.cont not in marks:
                queue.append(br.cont)
    return seen


def build_automaton(c, op=None, start=None, cap=DEFAULT_CONFIG_CAP):
    """Configuration graph of ``c`` from ``start`` (default: every state)."""
    c = check_guarded(c)
    space = c.space
    states = space.states
    starts = [space.index[start]] if start is not None else list(range(space.n))

    div = _DivergenceGraph(space, cap=_DIV_NODE_CAP)
    configs = set()
    edges = []
    term_exits = set()
    abort_exits = set()
    queue = [(c, sigma) for sigma in starts]
    while queue:
        node, sigma = queue.pop()
        cfg = (node, states[sigma])
        if cfg in configs:
            continue
        configs.add(cfg)
        if len(configs) > cap:
            raise StateExplosionError(cap)
        e = expand(node)
        bit = 1 << sigma
        if not e.pn_mask & bit:
            abort_exits.add(cfg)
            continue  # abort subsumes everything beyond this configuration
        if e.pt_mask & bit:
            term_exits.add(cfg)
        for br in e.branches:
            for kind, mask in ((PI, br.pmask), (EPS, br.emask)):
                row = mask >> (sigma * space.n) & space.full_set_mask
                to = 0
                while row:
                    if row & 1:
                        step = Step(kind, states[sigma], states[to])
                        edges.append(Edge(cfg, step, _polarity(br), (br.cont, states[to])))
                        queue.append((br.cont, to))
                    row >>= 1
                    to += 1
    div_set = {cfg for cfg in configs
               if cfg not in abort_exits and div.diverges(cfg[0], space.index[cfg[1]])}
    return ResidualAutomaton(space, c, configs, tuple(edges), term_exits, abort_exits, div_set)


# --- allowed-infinite-run analysis ----------------------------------------

def _sync_kind(op, k1, k2):
    if op == OP_CONJ:
        return k1 if k1 == k2 else None
    if k1 == k2:
        return EPS if k1 == EPS else None
    return PI


class _DivergenceGraph:
    """Instrumented run graph deciding "an allowed infinite run exists".

    Nodes (interned to ids):

    * ``('s', term, sigma)`` - entry: some allowed infinite run of term;
    * ``('p', resid, ctx, sigma)`` - a run in progress, ``ctx`` saying
      what a completed run continues as;
    * ``('a', iter_node, sigma)`` - accepting marker, one per completed
      body run of an om/inf iteration;
    * ``('x', u1, u2, op, phase)`` - fairness product for par/conj.

    An entry node diverges iff it reaches a strongly connected component
    containing an accepting node and a labeled edge.
    """

    def __init__(self, space, cap=_DIV_NODE_CAP):
        self.space = space
        self.cap = cap
        self.ids = {}
        self.keys = []
        self.out = []        # node id -> tuple of (dst id, label or None)
        self.accepting = []
        self._built = 0
        self._good = None
        self._div_memo = {}

    def diverges(self, term, sigma):
        key = (term, sigma)
        hit = self._div_memo.get(key)
        if hit is not None:
            return hit
        if not _has_gfp(term):
            self._div_memo[key] = False
            return False
        entry = self._node(("s", term, sigma))
        self._build_from(entry)
        result = entry in self._good_reach()
        self._div_memo[key] = result
        return result

    def _node(self, key):
        nid = self.ids.get(key)
        if nid is None:
            nid = len(self.keys)
            if nid >= self.cap:
                raise StateExplosionError(self.cap)
            self.ids[key] = nid
            self.keys.append(key)
            self.out.append(None)
            if key[0] == "a":
                acc = True
            elif key[0] == "x":
                # Sides are created before any product that references
                # them, so their acceptance is already final here.
                acc = key[4] == 2 and self.accepting[key[2]]
            else:
                acc = False
            self.accepting.append(acc)
        return nid

    def _build_from(self, start_id):
        stack = [start_id]
        while stack:
            nid = stack.pop()
            if self.out[nid] is not None:
                continue
            edges = tuple(self._expand_node(self.keys[nid]))
            self.out[nid] = edges
            for dst, _label in edges:
                if self.out[dst] is None:
                    stack.append(dst)

    def _expand_node(self, key):
        tag = key[0]
        if tag == "s":
            _, term, sigma = key
            yield from self._entry_edges(term, sigma)
        elif tag == "p":
            _, resid, ctx, sigma = key
            e = expand(resid)
            n = self.space.n
            full = self.space.full_set_mask
            for br in e.branches:
                for kind, mask in ((PI, br.pmask), (EPS, br.emask)):
                    row = mask >> (sigma * n) & full
                    to = 0
                    while row:
                        if row & 1:
                            yield (self._node(("p", br.cont, ctx, to)), (kind, sigma, to))
                        row >>= 1
                        to += 1
            if e.pt_mask >> sigma & 1:
                yield from self._resolve(ctx, sigma)
        elif tag == "a":
            _, it, sigma = key
            yield (self._node(("p", it.args[0], ("loop", it), sigma)), None)
            yield (self._node(("s", it.args[0], sigma)), None)
        elif tag == "x":
            yield from self._product_edges(key)
        else:  # pragma: no cover
            raise AssertionError(key)

    def _entry_edges(self, term, sigma):
        kind = term.kind
        if kind in (t.ABORT, t.TEST, t.ATOM):
            return
        if kind == t.CHOICE:
            for child in term.args:
                yield (self._node(("s", child, sigma)), None)
        elif kind == t.SEQ:
            a, b = term.args
            yield (self._node(("s", a, sigma)), None)
            yield (self._node(("p", a, ("seq", b), sigma)), None)
        elif kind in (t.FIN, t.OM, t.INF):
            body = term.args[0]
            yield (self._node(("s", body, sigma)), None)
            yield (self._node(("p", body, ("loop", term), sigma)), None)
        elif kind in (t.PAR, t.CONJ):
            a, b = term.args
            op = OP_PAR if kind == t.PAR else OP_CONJ
            u1 = self._node(("s", a, sigma))
            u2 = self._node(("s", b, sigma))
            yield (self._node(("x", u1, u2, op, 1)), None)
        else:  # pragma: no cover
            raise AssertionError(term)

    def _resolve(self, ctx, sigma):
        what, payload = ctx
        if what == "seq":
            yield (self._node(("s", payload, sigma)), None)
        else:
            it = payload
            if it.kind == t.FIN:
                yield (self._node(("p", it.args[0], ctx, sigma)), None)
                yield (self._node(("s", it.args[0], sigma)), None)
            else:
                yield (self._node(("a", it, sigma)), None)

    def _product_edges(self, key):
        _, u1, u2, op, phase = key
        self._build_from(u1)
        self._build_from(u2)
        acc1 = self.accepting[u1]
        acc2 = self.accepting[u2]
        if phase == 1:
            nxt = 2 if acc1 else 1
        else:
            nxt = 1 if acc2 else 2
        for d1, label in self.out[u1]:
            if label is None:
                yield (self._node(("x", d1, u2, op, nxt)), None)
        for d2, label in self.out[u2]:
            if label is None:
                yield (self._node(("x", u1, d2, op, nxt)), None)
        for d1, l1 in self.out[u1]:
            if l1 is None:
                continue
            for d2, l2 in self.out[u2]:
                if l2 is None:
                    continue
                joint = _sync_kind(op, l1[0], l2[0])
                if joint is None or l1[1:] != l2[1:]:
                    continue
                yield (self._node(("x", d1, d2, op, nxt)), (joint, l1[1], l1[2]))

    def _good_reach(self):
        """Ids that can reach an SCC holding an accepting node and a step."""
        n = len(self.keys)
        for nid in range(n):
            if self.out[nid] is None:
                self._build_from(nid)
        n = len(self.keys)
        if self._built == n and self._good is not None:
            return self._good
        index = [0] * n
        low = [0] * n
        onstack = [False] * n
        comp = [-1] * n
        counter = 1
        comps = []
        stack = []
        for root in range(n):
            if index[root]:
                continue
            work = [(root, 0)]
            while work:
                node, pos = work[-1]
                if pos == 0:
                    index[node] = low[node] = counter
                    counter += 1
                    stack.append(node)
                    onstack[node] = True
                advanced = False
                edges = self.out[node]
                for k in range(pos, len(edges)):
                    dst = edges[k][0]
                    if not index[dst]:
                        work[-1] = (node, k + 1)
                        work.append((dst, 0))
                        advanced = True
                        break
                    if onstack[dst]:
                        low[node] = min(low[node], index[dst])
                if advanced:
                    continue
                work.pop()
                if low[node] == index[node]:
                    members = []
                    while True:
                        m = stack.pop()
                        onstack[m] = False
                        comp[m] = len(comps)
                        members.append(m)
                        if m == node:
                            break
                    comps.append(members)
                if work:
                    parent = work[-1][0]
                    low[parent] = min(low[parent], low[node])

        good = set()
        for members in comps:
            mset = set(members)
            if not any(self.accepting[m] for m in members):
                continue
            # Any labeled intra-component edge lies on a cycle through
            # the accepting node, giving a genuine infinite run.
            if any(dst in mset and label is not None
                   for m in members for dst, label in self.out[m]):
                good.update(members)

        rev = [[] for _ in range(n)]
        for src in range(n):
            for dst, _label in self.out[src]:
                rev[dst].append(src)
        frontier = list(good)
        while frontier:
            dst = frontier.pop()
            for src in rev[dst]:
                if src not in good:
                    good.add(src)
                    frontier.append(src)
        self._built = n
        self._good = good
        return good


_GFP_MEMO = {}


def _has_gfp(term):
    hit = _GFP_MEMO.get(term)
    if hit is None:
        hit = term.kind in (t.OM, t.INF) or any(_has_gfp(k) for k in term.children())
        _GFP_MEMO[term] = hit
    return hit


# --- full equality over the three observation languages -------------------

def full_equal(c1, c2, op=None, cap=DEFAULT_CONFIG_CAP):
    """Language equality: terminating traces, abort prefixes, divergence
    prefixes; deterministic shortest witness on failure."""
    c1 = check_guarded(c1)
    c2 = check_guarded(c2)
    if c1.space != c2.space:
        raise SpaceMismatchError("equality operands over different spaces")
    space = c1.space
    _residual_closure([c1, c2], cap)

    div = _DivergenceGraph(space, cap=_DIV_NODE_CAP)
    states = space.states
    full = space.full_set_mask

    def flags(nodes, sigma):
        pn = full
        pt = 0
        diverging = False
        for node in nodes:
            e = expand(node)
            pn &= e.pn_mask
            pt |= e.pt_mask
        aborts = not pn >> sigma & 1
        if not aborts:
            diverging = any(div.diverges(node, sigma) for node in nodes)
        return aborts, bool(pt >> sigma & 1), diverging

    from .bounded import _successor_map

    level = []
    seen = set()
    for sigma, name in enumerate(states):
        entry = ((), name, frozenset((c1,)), frozenset((c2,)), sigma)
        level.append(entry)
        seen.add((entry[2], entry[3], sigma))
    while level:
        next_level = []
        for steps, start, s1, s2, sigma in level:
            abort1, term1, div1 = flags(s1, sigma)
            abort2, term2, div2 = flags(s2, sigma)
            if abort1 and abort2:
                continue  # both allow everything from here on
            if abort1 != abort2:
                side = "lhs" if abort1 else "rhs"
                return Verdict(False, Behavior(start, steps, "abort"),
                               f"aborting prefix allowed by {side} only")
            if term1 != term2:
                side = "lhs" if term1 else "rhs"
                return Verdict(False, Behavior(start, steps, "term"),
                               f"terminating trace allowed by {side} only")
            if div1 != div2:
                side = "lhs" if div1 else "rhs"
                return Verdict(False, Behavior(start, steps, "diverge"),
                               f"divergence prefix allowed by {side} only")
            succ1 = _successor_map(s1, sigma, space)
            succ2 = _successor_map(s2, sigma, space)
            for (kind, to) in sorted(set(succ1) | set(succ2)):
                n1 = succ1.get((kind, to), frozenset())
                n2 = succ2.get((kind, to), frozenset())
                key = (n1, n2, to)
                if key in seen:
                    continue
                seen.add(key)
                step = Step(kind, states[sigma], states[to])
                next_level.append((steps + (step,), start, n1, n2, to))
        level = next_level
    return Verdict(True)
