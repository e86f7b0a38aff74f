"""Counter systems compiled from proof graphs.

Each variable becomes a counter holding its length. Rewrites turn into
guarded updates: erasing ``y`` needs ``y = 0``, a constant absorbed by ``y``
decrements it, and a variable ``z`` absorbed by ``y`` subtracts ``z`` from
``y``. Solution lengths are exactly the counter vectors from which the
trivial equation is reachable.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import networkx as nx

from qwe.nielsen import TRIVIAL, Rule, proof_graph
from qwe.regnielsen import FINAL, reg_graph

logger = logging.getLogger(__name__)


class GuardKind(Enum):
    ID = 'ID'
    ZERO = 'ZERO'
    DEC = 'DEC'
    SUB = 'SUB'


@dataclass(frozen=True)
class Guard:
    kind: GuardKind
    y: Optional[str] = None
    z: Optional[str] = None

    def __post_init__(self):
        if self.kind is not GuardKind.ID and self.y is None:
            raise ValueError(f"{self.kind.value} needs a counter")
        if self.kind is GuardKind.SUB and (self.z is None or self.z == self.y):
            raise ValueError("SUB subtracts a different counter")

    @classmethod
    def identity(cls):
        return cls(GuardKind.ID)

    @classmethod
    def zero(cls, y):
        return cls(GuardKind.ZERO, y)

    @classmethod
    def dec(cls, y):
        return cls(GuardKind.DEC, y)

    @classmethod
    def sub(cls, y, z):
        return cls(GuardKind.SUB, y, z)

    @property
    def reduces(self):
        return self.kind in (GuardKind.DEC, GuardKind.SUB)

    def apply(self, values, index):
        """Successor values, or None when the guard blocks."""
        if self.kind is GuardKind.ID:
            return values
        y = index[self.y]
        if self.kind is GuardKind.ZERO:
            return values if values[y] == 0 else None
        if self.kind is GuardKind.DEC:
            amount = 1
        else:
            amount = values[index[self.z]]
            if amount == 0:
                return None
        if values[y] < amount:
            return None
        updated = list(values)
        updated[y] -= amount
        return tuple(updated)

    def __str__(self):
        if self.kind is GuardKind.ID:
            return 'ID'
        if self.kind is GuardKind.SUB:
            return f"SUB({self.y},{self.z})"
        return f"{self.kind.value}({self.y})"


def guard_for(step):
    if step.rule is Rule.EMPTY:
        return Guard.zero(step.erased)
    if step.rule is Rule.P1:
        return Guard.identity()
    if step.rule in (Rule.P2, Rule.P3):
        return Guard.dec(step.extended)
    return Guard.sub(step.extended, step.prefix.name)


@dataclass(frozen=True)
class Transition:
    source: object
    guard: Guard
    target: object
    step: object = field(default=None, compare=False)


@dataclass(frozen=True)
class Config:
    state: object
    values: Tuple[int, ...]

    def __post_init__(self):
        if any(v < 0 for v in self.values):
            raise ValueError("counter values are natural numbers")


@dataclass(frozen=True)
class CounterSystem:
    counters: Tuple[str, ...]
    states: Tuple[object, ...]
    transitions: Tuple[Transition, ...]
    final: object = TRIVIAL
    overflow: bool = False
    _cache: Dict = field(default_factory=dict, compare=False, repr=False)

    def _cached(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def index(self):
        """Counter name -> position in value vectors."""
        return self._cached('index', lambda: {c: i for i, c in enumerate(self.counters)})

    def state_id(self, state):
        return self._cached('ids', lambda: {s: i for i, s in enumerate(self.states)})[state]

    def outgoing(self, state):
        def build():
            table = {}
            for t in self.transitions:
                table.setdefault(t.source, []).append(t)
            return table
        return self._cached('out', build).get(state, [])

    def config(self, state, lengths):
        """Config from a mapping counter -> value (missing counters are 0)."""
        return Config(state, tuple(lengths.get(c, 0) for c in self.counters))

    def to_networkx(self):
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(range(len(self.states)))
        for key, t in enumerate(self.transitions):
            graph.add_edge(self.state_id(t.source), self.state_id(t.target), key=key, guard=str(t.guard))
        return graph

    def to_json(self):
        return {
            'counters': list(self.counters),
            'states': [str(s) for s in self.states],
            'final': self.state_id(self.final) if self.final in self.states else None,
            'transitions': [
                {'source': self.state_id(t.source), 'guard': str(t.guard), 'target': self.state_id(t.target)}
                for t in self.transitions
            ],
            'overflow': self.overflow,
        }


def build_ca(eq, counters=None, node_budget=10**6):
    """Counter system whose states are the proof-graph nodes of ``eq``."""
    graph = proof_graph(eq, node_budget)
    counters = tuple(counters) if counters is not None else eq.variables()
    transitions = tuple(Transition(s.source, guard_for(s), s.target, s) for s in graph.edges)
    return CounterSystem(counters, graph.nodes, transitions, TRIVIAL, graph.overflow)


@dataclass(frozen=True)
class RegCounterSystem:
    system: CounterSystem
    initials: Tuple[object, ...]
    context: object = field(compare=False, default=None)


def build_ca_reg(problem, monoid_cap=4096, node_budget=10**6):
    """Counter system over (equation, monoid map) states with the initial
    length sets of every consistent assignment.

    Raises:
        BudgetExceeded: the monoid closure hit ``monoid_cap``
    """
    graph = reg_graph(problem, monoid_cap, node_budget)
    transitions = tuple(Transition(s, guard_for(step), t, step) for s, step, t in graph.edges)
    system = CounterSystem(problem.variables, graph.nodes, transitions, FINAL, graph.overflow)
    logger.info("CA(E,S) has %d states and %d transitions", len(graph.nodes), len(transitions))
    return RegCounterSystem(system, graph.initials, graph.context)


def step(cs, c):
    """Configurations reachable from ``c`` in one transition."""
    result = []
    for t in cs.outgoing(c.state):
        values = t.guard.apply(c.values, cs.index)
        if values is not None:
            result.append(Config(t.target, values))
    return result


class Reachability:
    """Memoized test whether a configuration can reach the final state.

    Runs terminate from every configuration, so the configuration graph is
    acyclic and a post-order search is exhaustive.
    """

    def __init__(self, cs):
        self.cs = cs
        self.memo = {}

    def reaches_final(self, start):
        memo = self.memo
        stack = [start]
        while stack:
            current = stack[-1]
            if current in memo:
                stack.pop()
                continue
            if current.state == self.cs.final:
                memo[current] = True
                stack.pop()
                continue
            successors = step(self.cs, current)
            if any(memo.get(s) for s in successors):
                memo[current] = True
                stack.pop()
                continue
            pending = [s for s in successors if s not in memo]
            if pending:
                stack.extend(pending)
                continue
            memo[current] = False
            stack.pop()
        return memo[start]


def reach_eps(cs, c0):
    return Reachability(cs).reaches_final(c0)
