"""Nielsen transformation: prefix rewriting of quadratic word equations.

An equation ``αw1 = βw2`` is rewritten by erasing a leading variable, by
cancelling equal leading symbols (P1), or by letting one leading symbol
become a prefix of the other side's leading variable (P2, P3, P4). The
reachable equations form a finite proof graph; the equation is solvable iff
the graph contains ``ε=ε``.
"""
import logging
from collections import Counter, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import networkx as nx

from qwe.errors import Indeterminate, NotQuadraticError
from qwe.terms import Equation, Symbol

logger = logging.getLogger(__name__)

TRIVIAL = Equation()


class Rule(Enum):
    EMPTY = 'empty'
    P1 = 'P1'
    P2 = 'P2'
    P3 = 'P3'
    P4 = 'P4'


@dataclass(frozen=True)
class RewriteStep:
    """One rewrite ``source => target``.

    ``erased`` names the variable substituted by ε (EMPTY). For P2-P4,
    ``extended`` is the variable that absorbs ``prefix``: it is replaced by
    ``prefix extended`` throughout the equation.
    """
    rule: Rule
    source: Equation
    target: Equation
    erased: Optional[str] = None
    side: Optional[str] = None
    prefix: Optional[Symbol] = None
    extended: Optional[str] = None

    @property
    def tag(self):
        if self.rule is Rule.EMPTY:
            return f"ε:{self.erased}"
        if self.rule is Rule.P1:
            return 'P1'
        if self.rule is Rule.P2:
            return f"P2({self.prefix},{self.extended})"
        if self.rule is Rule.P3:
            return f"P3({self.extended},{self.prefix})"
        return f"P4({self.prefix}≼{self.extended})"

    def __repr__(self):
        return f"<RewriteStep {self.source} -{self.tag}-> {self.target}>"


def is_quadratic(eq):
    counts = Counter(s.name for s in eq.lhs + eq.rhs if s.is_var)
    return all(n <= 2 for n in counts.values())


def _require_quadratic(eq):
    if not is_quadratic(eq):
        raise NotQuadraticError(f"{eq} is not quadratic")


def _erase(eq, variable, side):
    return RewriteStep(Rule.EMPTY, eq, eq.substitute(variable, ()), erased=variable, side=side)


def _absorb(eq, rule, prefix, extended, keep_on):
    """Substitute ``extended -> prefix extended`` in the tails; ``keep_on``
    is the side whose tail gets the leading ``extended`` back."""
    tails = Equation(eq.lhs[1:], eq.rhs[1:]).substitute(extended, (prefix, Symbol.var(extended)))
    if keep_on == 'rhs':
        target = Equation(tails.lhs, (Symbol.var(extended),) + tails.rhs)
    else:
        target = Equation((Symbol.var(extended),) + tails.lhs, tails.rhs)
    return RewriteStep(rule, eq, target, prefix=prefix, extended=extended)


def successors(eq):
    """All one-step rewrites of a quadratic equation."""
    _require_quadratic(eq)
    lhs, rhs = eq.lhs, eq.rhs
    if not lhs and not rhs:
        return []
    if not lhs or not rhs:
        side, first = ('lhs', lhs[0]) if lhs else ('rhs', rhs[0])
        return [_erase(eq, first.name, side)] if first.is_var else []

    alpha, beta = lhs[0], rhs[0]
    steps = []
    if alpha.is_var:
        steps.append(_erase(eq, alpha.name, 'lhs'))
    if beta.is_var and beta != alpha:
        steps.append(_erase(eq, beta.name, 'rhs'))
    if alpha == beta:
        steps.append(RewriteStep(Rule.P1, eq, Equation(lhs[1:], rhs[1:]), prefix=alpha))
    elif not alpha.is_var and beta.is_var:
        steps.append(_absorb(eq, Rule.P2, alpha, beta.name, 'rhs'))
    elif alpha.is_var and not beta.is_var:
        steps.append(_absorb(eq, Rule.P3, beta, alpha.name, 'lhs'))
    elif alpha.is_var and beta.is_var:
        steps.append(_absorb(eq, Rule.P4, alpha, beta.name, 'rhs'))
        steps.append(_absorb(eq, Rule.P4, beta, alpha.name, 'lhs'))
    return steps


def explore(roots, expand, node_budget):
    """Breadth-first closure of ``roots`` under ``expand``.

    ``expand(node)`` yields ``(label, target)`` pairs. Returns the nodes in
    discovery order, the edges ``(source, label, target)`` and whether the
    budget stopped the exploration.
    """
    nodes = {}
    queue = deque()
    for root in roots:
        if root not in nodes:
            if len(nodes) >= node_budget:
                return list(nodes), [], True
            nodes[root] = len(nodes)
            queue.append(root)
    edges = []
    while queue:
        node = queue.popleft()
        for label, target in expand(node):
            if target not in nodes:
                if len(nodes) >= node_budget:
                    logger.warning("exploration stopped at node budget %d", node_budget)
                    return list(nodes), edges, True
                nodes[target] = len(nodes)
                queue.append(target)
            edges.append((node, label, target))
    return list(nodes), edges, False


@dataclass(frozen=True)
class ProofGraph:
    root: Equation
    nodes: Tuple[Equation, ...]
    edges: Tuple[RewriteStep, ...]
    overflow: bool = False
    _out: Dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def complete(self):
        return not self.overflow

    def __contains__(self, eq):
        return eq in self.nodes_set

    @property
    def nodes_set(self):
        if 'nodes' not in self._out:
            self._out['nodes'] = frozenset(self.nodes)
        return self._out['nodes']

    def steps_from(self, eq):
        if 'adjacency' not in self._out:
            adjacency = {}
            for step in self.edges:
                adjacency.setdefault(step.source, []).append(step)
            self._out['adjacency'] = adjacency
        return self._out['adjacency'].get(eq, [])

    def to_networkx(self):
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(self.nodes)
        for step in self.edges:
            graph.add_edge(step.source, step.target, tag=step.tag)
        return graph


def proof_graph(root, node_budget=10**6):
    _require_quadratic(root)
    nodes, edges, overflow = explore(
        [root], lambda eq: [(step, step.target) for step in successors(eq)], node_budget
    )
    logger.info("proof graph of %s: %d nodes, %d edges", root, len(nodes), len(edges))
    return ProofGraph(root, tuple(nodes), tuple(step for _, step, _ in edges), overflow)


def is_satisfiable(root, node_budget=10**6):
    """True iff ``ε=ε`` is reachable from ``root``.

    Raises:
        Indeterminate: the node budget stopped the search before ε=ε was found
    """
    graph = proof_graph(root, node_budget)
    if TRIVIAL in graph:
        return True
    if graph.overflow:
        raise Indeterminate(f"proof graph of {root} exceeds {node_budget} nodes")
    return False


def check_solution(eq, sigma):
    """True iff ``sigma`` maps both sides of ``eq`` to the same word."""
    missing = [v for v in eq.variables() if v not in sigma]
    if missing:
        raise ValueError(f"solution does not assign {', '.join(missing)}")
    left, right = eq.image(sigma)
    return left == right


def annotate(step, sigma):
    """Carry a solution of ``step.source`` over to ``step.target``.

    Returns the transported solution, or None when ``sigma`` does not follow
    this step (e.g. it erases a variable whose value is nonempty).
    """
    sigma = dict(sigma)
    if step.rule is Rule.EMPTY:
        if sigma.get(step.erased, '') != '':
            return None
        sigma.pop(step.erased, None)
        return sigma
    if step.rule is Rule.P1:
        if step.prefix.is_var:
            sigma.pop(step.prefix.name, None)
        return sigma
    head = sigma[step.prefix.name] if step.prefix.is_var else step.prefix.name
    value = sigma[step.extended]
    if not head or not value.startswith(head):
        return None
    sigma[step.extended] = value[len(head):]
    return sigma


def _follows(step, eq, sigma):
    """Whether ``step`` is the rewrite selected by ``sigma`` at ``eq``."""
    lhs, rhs = eq.lhs, eq.rhs
    if not lhs or not rhs:
        return step.rule is Rule.EMPTY
    alpha, beta = lhs[0], rhs[0]
    if alpha.is_var and sigma[alpha.name] == '':
        return step.rule is Rule.EMPTY and step.erased == alpha.name
    if beta.is_var and sigma[beta.name] == '':
        return step.rule is Rule.EMPTY and step.erased == beta.name
    if step.rule is Rule.EMPTY:
        return False
    if alpha == beta or not (alpha.is_var and beta.is_var):
        return True
    shorter = alpha if len(sigma[alpha.name]) <= len(sigma[beta.name]) else beta
    return step.prefix == shorter


def trace_solution(eq, sigma):
    """Follow the rewrites selected by the solution ``sigma`` down to ``ε=ε``.

    Returns the list of (step, solution of step.target) pairs; every
    solution produces such a path.
    """
    if not check_solution(eq, sigma):
        raise ValueError(f"{sigma} is not a solution of {eq}")
    path = []
    current = dict(sigma)
    while not eq.is_trivial:
        for step in successors(eq):
            if _follows(step, eq, current):
                current = annotate(step, current)
                break
        else:
            raise AssertionError(f"no rewrite of {eq} follows {current}")
        path.append((step, current))
        eq = step.target
    return path
