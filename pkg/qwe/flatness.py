"""Control-structure analysis of counter systems.

A counter system is flat when every state lies on at most one simple
cycle. Runs of a flat system follow a skeleton: a simple path through the
DAG of strongly connected components, possibly looping on the unique cycle
of each component it visits.
"""
import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import networkx as nx

from qwe.counters import GuardKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CycleInfo:
    """``states[i]`` goes to ``states[i+1]`` (cyclically) via ``transitions[i]``."""
    states: Tuple[object, ...]
    transitions: Tuple[object, ...]
    counters: Tuple[str, ...] = ()

    @property
    def guards(self):
        return tuple(t.guard for t in self.transitions)

    @property
    def reduced_counter(self):
        return cycle_check(self)

    def __len__(self):
        return len(self.transitions)

    def __contains__(self, state):
        return state in self.states

    def position(self, state):
        try:
            return self.states.index(state)
        except ValueError:
            raise ValueError(f"{state} is not on the cycle") from None

    def states_from(self, state):
        i = self.position(state)
        return self.states[i:] + self.states[:i]

    def loop_from(self, state):
        """Transitions of one full turn starting at ``state``."""
        i = self.position(state)
        return self.transitions[i:] + self.transitions[:i]

    def path(self, p, q):
        """Transitions of the simple path from ``p`` forward to ``q``."""
        i, j = self.position(p), self.position(q)
        n = len(self.transitions)
        return tuple(self.transitions[(i + k) % n] for k in range((j - i) % n))

    def __str__(self):
        return ' -> '.join(f"{s} [{t.guard}]" for s, t in zip(self.states, self.transitions))


def cycle_check(cycle):
    """The counter reduced by every guard of ``cycle``, if there is one."""
    reduced = set()
    for guard in cycle.guards:
        if guard.kind not in (GuardKind.DEC, GuardKind.SUB):
            return None
        reduced.add(guard.y)
    return reduced.pop() if len(reduced) == 1 else None


def _state_graph(cs):
    graph = nx.DiGraph()
    graph.add_nodes_from(range(len(cs.states)))
    parallel = {}
    for t in cs.transitions:
        u, v = cs.state_id(t.source), cs.state_id(t.target)
        graph.add_edge(u, v)
        parallel.setdefault((u, v), []).append(t)
    return graph, parallel


def iter_simple_cycles(cs):
    """Simple cycles with parallel transitions told apart, in a stable order."""
    graph, parallel = _state_graph(cs)
    for ids in nx.simple_cycles(graph):
        start = ids.index(min(ids))
        ids = ids[start:] + ids[:start]
        hops = list(zip(ids, ids[1:] + ids[:1]))
        for choice in itertools.product(*(parallel[h] for h in hops)):
            yield CycleInfo(tuple(cs.states[i] for i in ids), tuple(choice), cs.counters)


def simple_cycles(cs, cap=10**4):
    """Up to ``cap`` simple cycles and whether the cap cut the enumeration."""
    cycles = list(itertools.islice(iter_simple_cycles(cs), cap + 1))
    capped = len(cycles) > cap
    return cycles[:cap], capped


class Flatness(Enum):
    FLAT = 'flat'
    NOT_FLAT = 'not flat'
    UNKNOWN = 'not provably flat'


@dataclass(frozen=True)
class FlatnessReport:
    status: Flatness
    cycles: Tuple[CycleInfo, ...] = ()
    witness: Optional[object] = None
    witness_cycles: Tuple[CycleInfo, ...] = ()

    @property
    def flat(self):
        return self.status is Flatness.FLAT

    def cycle_of(self, state):
        for cycle in self.cycles:
            if state in cycle:
                return cycle
        return None

    @property
    def reducing(self):
        """Whether every simple cycle is 1-variable-reducing."""
        return all(cycle_check(c) is not None for c in self.cycles)

    def to_dict(self):
        return {
            'status': self.status.value,
            'cycles': len(self.cycles),
            'reducing': self.reducing,
            'witness': str(self.witness) if self.witness is not None else None,
        }


def is_flat(cs, cycle_cap=10**4):
    seen = {}
    cycles = []
    for cycle in iter_simple_cycles(cs):
        if len(cycles) >= cycle_cap:
            logger.warning("cycle enumeration stopped at cap %d", cycle_cap)
            return FlatnessReport(Flatness.UNKNOWN, tuple(cycles))
        cycles.append(cycle)
        for state in cycle.states:
            if state in seen:
                return FlatnessReport(Flatness.NOT_FLAT, tuple(cycles), state, (seen[state], cycle))
            seen[state] = cycle
    return FlatnessReport(Flatness.FLAT, tuple(cycles))


@dataclass(frozen=True)
class Segment:
    """Stay inside one component from ``entry`` to ``exit``, looping on ``cycle``."""
    entry: object
    exit: object
    cycle: Optional[CycleInfo] = None

    @property
    def path(self):
        return self.cycle.path(self.entry, self.exit) if self.cycle is not None else ()


@dataclass(frozen=True)
class Skeleton:
    segments: Tuple[Segment, ...]
    bridges: Tuple[object, ...] = ()

    @property
    def cycles(self):
        return tuple(s.cycle for s in self.segments if s.cycle is not None)

    @property
    def length(self):
        """Number of transitions on the underlying simple path."""
        return sum(len(s.path) for s in self.segments) + len(self.bridges)

    def __str__(self):
        parts = []
        for i, segment in enumerate(self.segments):
            loop = f" ⟲{len(segment.cycle)}" if segment.cycle is not None else ''
            if segment.entry == segment.exit:
                parts.append(f"{segment.entry}{loop}")
            else:
                parts.append(f"{segment.entry}{loop} ~> {segment.exit}")
            if i < len(self.bridges):
                parts.append(f"-{self.bridges[i].guard}->")
        return ' '.join(parts)


@dataclass(frozen=True)
class SkeletonSearch:
    skeletons: Tuple[Skeleton, ...]
    truncated: bool = False

    def __iter__(self):
        return iter(self.skeletons)

    def __len__(self):
        return len(self.skeletons)


def iter_skeletons(cs, source, target, report=None):
    """Skeletons from ``source`` to ``target`` in depth-first order."""
    report = report or is_flat(cs)
    if not report.flat:
        raise ValueError("skeletons are defined for flat counter systems")
    graph, _ = _state_graph(cs)
    condensation = nx.condensation(graph)
    component = condensation.graph['mapping']
    if source not in cs.states or target not in cs.states:
        return
    goal = component[cs.state_id(target)]
    useful = nx.ancestors(condensation, goal) | {goal}

    def walk(entry, segments, bridges):
        here = component[cs.state_id(entry)]
        cycle = report.cycle_of(entry)
        exits = cycle.states_from(entry) if cycle is not None else (entry,)
        for exit in exits:
            segment = Segment(entry, exit, cycle)
            if exit == target:
                yield Skeleton(segments + (segment,), bridges)
            for t in cs.outgoing(exit):
                there = component[cs.state_id(t.target)]
                if there != here and there in useful:
                    yield from walk(t.target, segments + (segment,), bridges + (t,))

    if component[cs.state_id(source)] in useful:
        yield from walk(source, (), ())


def skeletons(cs, source, target, limit=10**4, report=None):
    found = list(itertools.islice(iter_skeletons(cs, source, target, report), limit + 1))
    truncated = len(found) > limit
    if truncated:
        logger.warning("skeleton enumeration stopped at limit %d", limit)
    return SkeletonSearch(tuple(found[:limit]), truncated)
