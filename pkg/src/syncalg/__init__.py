"""Workbench for a synchronous refinement algebra over finite state spaces.

A small command language (tests, atomic program/environment steps,
choice, sequencing, parallel composition, weak conjunction, three
iteration forms and the usual rely/guarantee derived commands) with two
executable semantics backends and a law corpus that checks the
algebra's equations against them.
"""

from .bounded import (Behavior, Session, Step, TraceSet, Verdict,
                      bounded_traces, equal_at_depth, refines_at_depth)
from .errors import (ExponentCapError, ParseError, SpaceMismatchError,
                     StateExplosionError, SyncAlgError,
                     UnguardedIterationError, UnknownStateError)
from .expand import (Branch, ExpandedForm, check_guarded, expand, nil_sync,
                     sync_atomic, sync_masks, sync_pseudo)
from .parser import parse_command
from .printer import command_to_dsl, rel_to_dsl, set_to_dsl
from .space import (StateRel, StateSet, StateSpace, empty_rel, empty_set,
                    full_set, id_rel, postr, prer, univ_rel)
from .terms import (OP_CONJ, OP_PAR, SYNC_OPS, Command, PseudoAtomic, abort,
                    any_step, as_pseudo_atomic, assert_cmd, atom, choice,
                    conj, eps_step, evolve, evolve_alt, fair_cmd, fin, guar,
                    idle_cmd, inf, inv_cmd, iota, magic, nil, normalize, om,
                    par, pi_step, pow_, rely, rely_alt, seq, seq_all, sync,
                    term_cmd, test)

__version__ = "0.1.0"
