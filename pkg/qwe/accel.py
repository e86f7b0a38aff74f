"""Acceleration of 1-variable-reducing cycles and the flat decision procedure.

Around a cycle that only ever lowers counter ``y``, every other counter is
constant, so one turn lowers ``y`` by the same amount ``M``. Any number of
turns is therefore captured by ``M | (y - y')``, which turns a flat counter
system into one divisibility formula per skeleton.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Tuple

from qwe.counters import GuardKind
from qwe.flatness import cycle_check, is_flat, skeletons
from qwe.pad import (
    TRUE, LinTerm, Sat, bounded_sat, conj, disj, div, eq, exists, ge, le, term,
)

logger = logging.getLogger(__name__)


def vector(counters, tag=None):
    """Variable names of one counter vector: plain names, primes, or ``x@tag``."""
    if tag is None:
        return {c: c for c in counters}
    if tag == "'":
        return {c: f"{c}'" for c in counters}
    return {c: f"{c}@{tag}" for c in counters}


@dataclass(frozen=True)
class DropExpression:
    """``a0 + sum(a[z] * z)``: how much ``reduced`` drops per turn."""
    a0: int
    coeffs: Tuple[Tuple[str, int], ...]
    reduced: str

    @property
    def a(self):
        return dict(self.coeffs)

    def to_term(self, names=None):
        names = names or {}
        return LinTerm.of(self.a0, {names.get(z, z): c for z, c in self.coeffs})

    def evaluate(self, values):
        return self.a0 + sum(c * values[z] for z, c in self.coeffs)

    def to_json(self):
        return {
            'reduced': self.reduced,
            'a0': bin(self.a0)[2:],
            'a': {z: bin(c)[2:] for z, c in self.coeffs},
        }

    def __str__(self):
        parts = [str(self.a0)] if self.a0 or not self.coeffs else []
        parts += [z if c == 1 else f"{c}*{z}" for z, c in self.coeffs]
        return ' + '.join(parts)


def _drop_of(transitions, reduced):
    a0 = 0
    coeffs = {}
    for t in transitions:
        if t.guard.kind is GuardKind.DEC:
            a0 += 1
        else:
            coeffs[t.guard.z] = coeffs.get(t.guard.z, 0) + 1
    return DropExpression(a0, tuple(sorted(coeffs.items())), reduced)


def drop_expression(cycle):
    reduced = cycle_check(cycle)
    if reduced is None:
        raise ValueError(f"cycle {cycle} is not 1-variable-reducing")
    return _drop_of(cycle.transitions, reduced)


def _unchanged(counters, pre, post, skip=()):
    return [eq(post[c], pre[c]) for c in counters if c not in skip]


def guard_formula(guard, counters, pre, post):
    """Exact update relation of one guarded transition between two vectors."""
    if guard.kind is GuardKind.ID:
        return conj(*_unchanged(counters, pre, post))
    y = guard.y
    if guard.kind is GuardKind.ZERO:
        return conj(eq(pre[y], 0), *_unchanged(counters, pre, post))
    if guard.kind is GuardKind.DEC:
        return conj(ge(pre[y], 1), eq(post[y], term(pre[y]) - 1),
                    *_unchanged(counters, pre, post, skip=(y,)))
    z = guard.z
    return conj(ge(pre[z], 1), le(pre[z], pre[y]), eq(post[y], term(pre[y]) - term(pre[z])),
                *_unchanged(counters, pre, post, skip=(y,)))


def _positivity(drop, names):
    return [ge(names[z], 1) for z, c in drop.coeffs if c > 0]


def loop_formula(cycle, counters, pre, post):
    """Any number of turns around ``cycle``, from and back to the same state."""
    drop = drop_expression(cycle)
    y = drop.reduced
    turns = conj(
        div(drop.to_term(pre), term(pre[y]) - term(post[y])),
        le(post[y], pre[y]),
        *_positivity(drop, pre),
    )
    return conj(disj(eq(post[y], pre[y]), turns), *_unchanged(counters, pre, post, skip=(y,)))


def _path_formula(transitions, counters, pre, post, tag):
    """Guards along ``transitions`` with fresh intermediate vectors."""
    if not transitions:
        return conj(*_unchanged(counters, pre, post)), []
    names = []
    vectors = [pre]
    for k in range(1, len(transitions)):
        middle = vector(counters, f"{tag}.{k}")
        names.extend(middle[c] for c in counters)
        vectors.append(middle)
    vectors.append(post)
    parts = [guard_formula(t.guard, counters, vectors[k], vectors[k + 1])
             for k, t in enumerate(transitions)]
    return conj(*parts), names


def _compact_path(transitions, reduced, counters, pre, post):
    """The path ``p -> q`` as a single drop ``y' = y - M'``."""
    if not transitions:
        return conj(*_unchanged(counters, pre, post))
    drop = _drop_of(transitions, reduced)
    return conj(
        eq(post[reduced], term(pre[reduced]) - drop.to_term(pre)),
        *_positivity(drop, pre),
        *_unchanged(counters, pre, post, skip=(reduced,)),
    )


def accelerate(cycle, p, q, pre=None, post=None, compact=False, tag='acc'):
    """Formula over ``(pre, post)`` holding iff ``(p, pre)`` reaches ``(q, post)`` on ``cycle``.

    Args:
        cycle: a 1-variable-reducing CycleInfo
        p, q: states on the cycle
        pre, post: counter -> variable name maps (default: ``x`` and ``x'``)
        compact: encode the ``p -> q`` suffix by its drop expression instead
            of one vector per step
        tag: prefix for the names of intermediate vectors

    Raises:
        ValueError: p or q is not on the cycle, or the cycle is not reducing
    """
    counters = cycle.counters
    pre = pre or vector(counters)
    post = post or vector(counters, "'")
    suffix = cycle.path(p, q)
    if not suffix:
        return loop_formula(cycle, counters, pre, post)
    at_p = vector(counters, f"{tag}.0")
    names = [at_p[c] for c in counters]
    loop = loop_formula(cycle, counters, pre, at_p)
    if compact:
        path = _compact_path(suffix, drop_expression(cycle).reduced, counters, at_p, post)
    else:
        path, inner = _path_formula(suffix, counters, at_p, post, tag)
        names.extend(inner)
    return exists(names, conj(loop, path))


def cycle_reachable(cycle, p, q, values, index):
    """Value vectors reachable from ``(p, values)`` at ``q`` without leaving the cycle."""
    transitions = cycle.loop_from(p)
    states = cycle.states_from(p)
    reached = set()
    current = tuple(values)
    while True:
        for state, t in zip(states, transitions):
            if state == q:
                reached.add(current)
            current = t.guard.apply(current, index)
            if current is None:
                return reached


def skeleton_formula(sk, psi, counters, long_cycle=32):
    """Runs along ``sk`` from the vector ``x`` to the vector ``x'``, conjoined with ``psi``."""
    names = []
    parts = []
    last = len(sk.segments) - 1
    entry = vector(counters)
    for i, segment in enumerate(sk.segments):
        leave = vector(counters, "'") if i == last else vector(counters, f"{i}")
        if i < last:
            names.extend(leave[c] for c in counters)
        if segment.cycle is None:
            parts.append(conj(*_unchanged(counters, entry, leave)))
        else:
            if cycle_check(segment.cycle) is None:
                raise ValueError(f"cycle {segment.cycle} is not 1-variable-reducing")
            compact = len(segment.cycle) >= long_cycle
            phi = accelerate(segment.cycle, segment.entry, segment.exit, entry, leave,
                             compact=compact, tag=f"s{i}")
            parts.append(phi)
        if i < last:
            bridge = sk.bridges[i]
            nxt = vector(counters, f"{i}^")
            names.extend(nxt[c] for c in counters)
            parts.append(guard_formula(bridge.guard, counters, leave, nxt))
            entry = nxt
    return exists(names, conj(*parts, psi))


def membership_formula(initial_sets):
    """Length sets of the initial configuration as a conjunction of progressions."""
    if not initial_sets:
        return TRUE
    return conj(*(s.to_formula(v) for v, s in sorted(initial_sets.items())))


@dataclass(frozen=True)
class FlatSat:
    model: Dict[str, int]
    skeleton: object = None
    examined: int = 0

    @property
    def satisfiable(self):
        return True


@dataclass(frozen=True)
class NoModelFound:
    """No skeleton produced a model within the bound.

    ``exhaustive`` holds when every skeleton was examined and every search
    covered its whole domain. ``undecided`` keeps the skeleton queries whose
    search was cut by the bound.
    """
    bound: int
    examined: int
    partial: bool = False
    exhaustive: bool = False
    undecided: Tuple = field(default=(), compare=False)

    @property
    def satisfiable(self):
        return False


@dataclass(frozen=True)
class Unsupported:
    reason: str

    @property
    def satisfiable(self):
        return False


def decide_flat(cs, source, target, psi=TRUE, initial_sets=None, bound=64,
                skeleton_limit=10**4, report=None, long_cycle=32):
    """Search a run of the flat system ``cs`` from ``source`` to ``target``.

    ``psi`` constrains the initial vector ``x`` and the final vector ``x'``.
    Returns FlatSat with the initial counter values, NoModelFound, or
    Unsupported when the system is not flat or has a non-reducing cycle.
    """
    report = report or is_flat(cs)
    if not report.flat:
        return Unsupported(f"counter system is {report.status.value}")
    if not report.reducing:
        return Unsupported("a simple cycle is not 1-variable-reducing")
    search = skeletons(cs, source, target, skeleton_limit, report)
    logger.info("%d skeletons from %s to %s%s", len(search), source, target,
                ' (truncated)' if search.truncated else '')
    eta = membership_formula(initial_sets)
    exhaustive = not search.truncated
    undecided = []
    for examined, sk in enumerate(search, start=1):
        phi = conj(skeleton_formula(sk, psi, cs.counters, long_cycle), eta)
        result = bounded_sat(phi, bound, order=cs.counters)
        if isinstance(result, Sat):
            model = {c: result.model.get(c, 0) for c in cs.counters}
            logger.debug("skeleton %s satisfiable with %s", sk, model)
            return FlatSat(model, sk, examined)
        if not result.exhaustive:
            exhaustive = False
            undecided.append((sk, phi))
    return NoModelFound(bound, len(search), search.truncated, exhaustive, tuple(undecided))
