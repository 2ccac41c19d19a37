"""Finite state spaces, state sets and binary state relations.

Everything downstream (tests, atomic steps, the expansion engine) is
built on the three types here.  Sets and relations are stored as bit
masks over a fixed enumeration of the space's states, so the sweeps the
law harness performs stay cheap: a set over ``n`` states is an ``n``-bit
integer and a relation is an ``n*n``-bit integer with bit ``i*n + j``
standing for the pair ``(state_i, state_j)``.

All values are immutable after construction and safe to share between
concurrent checks.
"""

from __future__ import annotations

from .errors import SpaceMismatchError, UnknownStateError


class StateSpace:
    """An ordered, non-empty collection of opaque state names.

    The construction order of ``states`` is the canonical enumeration
    order used everywhere (printing, witness search, report output), so
    a space built from the same names twice behaves identically.
    """

    __slots__ = ("states", "index", "n", "full_set_mask", "full_rel_mask")

    def __init__(self, states):
        states = tuple(states)
        if not states:
            raise ValueError("a state space needs at least one state")
        if len(set(states)) != len(states):
            raise ValueError(f"duplicate state names in {states!r}")
        self.states = states
        self.index = {name: i for i, name in enumerate(states)}
        self.n = len(states)
        self.full_set_mask = (1 << self.n) - 1
        self.full_rel_mask = (1 << (self.n * self.n)) - 1

    @classmethod
    def of_size(cls, n):
        """The default space ``s0 .. s{n-1}``."""
        return cls(tuple(f"s{i}" for i in range(n)))

    def state_bit(self, name):
        try:
            return 1 << self.index[name]
        except KeyError:
            raise UnknownStateError(f"unknown state {name!r}; space has {self.states}") from None

    def pair_bit(self, frm, to):
        return 1 << (self.index[frm] * self.n + self.index[to])

    def set_of(self, names):
        mask = 0
        for name in names:
            mask |= self.state_bit(name)
        return StateSet(self, mask)

    def rel_of(self, pairs):
        mask = 0
        for frm, to in pairs:
            if frm not in self.index:
                raise UnknownStateError(f"unknown state {frm!r}; space has {self.states}")
            mask |= self.pair_bit(frm, to)
        return StateRel(self, mask)

    # Mask-level helpers.  Semantic code works on raw masks for speed and
    # wraps results only at API boundaries.

    def id_rel_mask(self):
        mask = 0
        for i in range(self.n):
            mask |= 1 << (i * self.n + i)
        return mask

    def set_names(self, mask):
        return tuple(s for i, s in enumerate(self.states) if mask >> i & 1)

    def rel_pairs(self, mask):
        n = self.n
        out = []
        for i in range(n):
            for j in range(n):
                if mask >> (i * n + j) & 1:
                    out.append((self.states[i], self.states[j]))
        return tuple(out)

    def prer_mask(self, set_mask):
        """Relation mask of all pairs whose first component is in the set."""
        n = self.n
        row = (1 << n) - 1
        mask = 0
        for i in range(n):
            if set_mask >> i & 1:
                mask |= row << (i * n)
        return mask

    def postr_mask(self, set_mask):
        """Relation mask of all pairs whose second component is in the set."""
        n = self.n
        col = 0
        for i in range(n):
            col |= set_mask << (i * n)
        return col

    def image_mask(self, rel_mask, state_idx):
        """Set mask of successors of one state under a relation."""
        return rel_mask >> (state_idx * self.n) & self.full_set_mask

    def domain_restrict_mask(self, rel_mask, set_mask):
        return rel_mask & self.prer_mask(set_mask)

    def compose_mask(self, r1, r2):
        n = self.n
        out = 0
        for i in range(n):
            mid = r1 >> (i * n) & self.full_set_mask
            row = 0
            j = 0
            while mid:
                if mid & 1:
                    row |= r2 >> (j * n) & self.full_set_mask
                mid >>= 1
                j += 1
            out |= row << (i * n)
        return out

    def __repr__(self):
        return f"StateSpace({list(self.states)!r})"

    def __eq__(self, other):
        return isinstance(other, StateSpace) and self.states == other.states

    def __hash__(self):
        return hash(self.states)


def _require_same_space(a, b):
    if a.space != b.space:
        raise SpaceMismatchError(f"operands live in different spaces: {a.space!r} vs {b.space!r}")


class StateSet:
    """A subset of a space's states, as a bit mask plus its space."""

    __slots__ = ("space", "mask")

    def __init__(self, space, mask):
        if mask & ~space.full_set_mask:
            raise ValueError("set mask has bits outside the space")
        self.space = space
        self.mask = mask

    def members(self):
        return self.space.set_names(self.mask)

    def complement(self):
        return StateSet(self.space, self.mask ^ self.space.full_set_mask)

    def union(self, other):
        _require_same_space(self, other)
        return StateSet(self.space, self.mask | other.mask)

    def intersection(self, other):
        _require_same_space(self, other)
        return StateSet(self.space, self.mask & other.mask)

    def __contains__(self, name):
        return bool(self.mask & self.space.state_bit(name))

    def __le__(self, other):
        _require_same_space(self, other)
        return self.mask & ~other.mask == 0

    def __eq__(self, other):
        return isinstance(other, StateSet) and self.space == other.space and self.mask == other.mask

    def __hash__(self):
        return hash((self.space, self.mask))

    def __repr__(self):
        return "{%s}" % ",".join(self.members())


class StateRel:
    """A binary relation between a space's states, as a bit mask."""

    __slots__ = ("space", "mask")

    def __init__(self, space, mask):
        if mask & ~space.full_rel_mask:
            raise ValueError("relation mask has bits outside the space")
        self.space = space
        self.mask = mask

    def pairs(self):
        return self.space.rel_pairs(self.mask)

    def complement(self):
        return StateRel(self.space, self.mask ^ self.space.full_rel_mask)

    def union(self, other):
        _require_same_space(self, other)
        return StateRel(self.space, self.mask | other.mask)

    def intersection(self, other):
        _require_same_space(self, other)
        return StateRel(self.space, self.mask & other.mask)

    def compose(self, other):
        _require_same_space(self, other)
        return StateRel(self.space, self.space.compose_mask(self.mask, other.mask))

    def domain_restrict(self, pset):
        _require_same_space(self, pset)
        return StateRel(self.space, self.space.domain_restrict_mask(self.mask, pset.mask))

    def image_of(self, name):
        return StateSet(self.space, self.space.image_mask(self.mask, self.space.index[name]))

    def __contains__(self, pair):
        frm, to = pair
        return bool(self.mask & self.space.pair_bit(frm, to))

    def __le__(self, other):
        _require_same_space(self, other)
        return self.mask & ~other.mask == 0

    def __eq__(self, other):
        return isinstance(other, StateRel) and self.space == other.space and self.mask == other.mask

    def __hash__(self):
        return hash((self.space, self.mask))

    def __repr__(self):
        return "{%s}" % ",".join("(%s,%s)" % p for p in self.pairs())


def id_rel(space):
    return StateRel(space, space.id_rel_mask())


def univ_rel(space):
    return StateRel(space, space.full_rel_mask)


def empty_rel(space):
    return StateRel(space, 0)


def empty_set(space):
    return StateSet(space, 0)


def full_set(space):
    return StateSet(space, space.full_set_mask)


def prer(pset):
    """All pairs starting inside ``pset``."""
    return StateRel(pset.space, pset.space.prer_mask(pset.mask))


def postr(pset):
    """All pairs ending inside ``pset``."""
    return StateRel(pset.space, pset.space.postr_mask(pset.mask))
