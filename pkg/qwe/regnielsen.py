"""Nielsen rewriting over pairs (equation, monoid map) for regular constraints.

A configuration carries a characteristic matrix per variable of its
equation. Rewrites that let a symbol become a prefix of a variable guess
the matrix of the remaining suffix, so a path to ``(ε=ε, ∅)`` exists iff
the problem has a solution satisfying its regular constraints.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, List, Tuple

from qwe.automata import (
    BoolMatrix, ProgressionSet, is_consistent, matrix_language_length_set,
    realizable_matrices, union_nfa,
)
from qwe.errors import BudgetExceeded, Indeterminate
from qwe.nielsen import TRIVIAL, Rule, explore, successors

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RegConfig:
    equation: object
    f: Tuple[Tuple[str, BoolMatrix], ...] = ()

    @classmethod
    def of(cls, equation, mapping):
        """Build a configuration, restricting ``mapping`` to the equation's variables."""
        names = equation.variables()
        return cls(equation, tuple(sorted((v, mapping[v]) for v in names)))

    @property
    def mapping(self):
        return dict(self.f)

    @property
    def is_final(self):
        return self.equation.is_trivial

    def __str__(self):
        if not self.f:
            return f"({self.equation}, ∅)"
        matrices = ', '.join(f"{v}:{'|'.join(m.rows())}" for v, m in self.f)
        return f"({self.equation}, {matrices})"


FINAL = RegConfig(TRIVIAL, ())


class MonoidContext:
    """Union automaton, realizable monoid and consistent choices of a problem."""

    def __init__(self, problem, monoid_cap=4096):
        self.problem = problem
        self.monoid_cap = monoid_cap
        nfas = [nfa for _, nfa in problem.regular_constraints]
        self.union, components = union_nfa(nfas, problem.alphabet)
        self.constraints = [(x, c) for (x, _), c in zip(problem.regular_constraints, components)]
        self.monoid = realizable_matrices(self.union, monoid_cap)
        self._choices = {}

    @property
    def overflow(self):
        return self.monoid.overflow

    def choices(self, variable):
        """Realizable matrices consistent with the constraints on ``variable``."""
        if variable not in self._choices:
            own = [(x, c) for x, c in self.constraints if x == variable]
            self._choices[variable] = tuple(
                m for m in self.monoid if is_consistent({variable: m}, own)
            )
        return self._choices[variable]

    def assignments(self, variables):
        """Every consistent assignment of matrices to ``variables``."""
        for matrices in itertools.product(*(self.choices(v) for v in variables)):
            yield dict(zip(variables, matrices))

    def length_set(self, matrix):
        return matrix_language_length_set(self.union, matrix, self.monoid_cap)

    def free_length_set(self, variable):
        """Lengths allowed for a variable absent from the equation: the union
        over its consistent matrices."""
        result = ProgressionSet()
        for matrix in self.choices(variable):
            result = result.union(self.length_set(matrix))
        return result


def successors_reg(cfg, monoid, letter_matrices=None):
    """All ``(step, config)`` pairs with ``cfg => config``."""
    letters = letter_matrices if letter_matrices is not None else monoid.letters
    f = cfg.mapping
    result = []
    for step in successors(cfg.equation):
        if step.rule is Rule.EMPTY:
            if f[step.erased] == monoid.identity:
                result.append((step, RegConfig.of(step.target, f)))
        elif step.rule is Rule.P1:
            result.append((step, RegConfig.of(step.target, f)))
        else:
            prefix = step.prefix
            left = f[prefix.name] if prefix.is_var else letters[prefix.name]
            for suffix in monoid.right_factors(left, f[step.extended]):
                guess = dict(f)
                guess[step.extended] = suffix
                result.append((step, RegConfig.of(step.target, guess)))
    return result


@dataclass(frozen=True)
class InitialChoice:
    """A consistent assignment on the equation's variables and its initial length sets."""
    config: RegConfig
    length_sets: Tuple[Tuple[str, ProgressionSet], ...]

    @property
    def sets(self):
        return dict(self.length_sets)


@dataclass(frozen=True)
class RegGraph:
    context: MonoidContext
    initials: Tuple[InitialChoice, ...]
    nodes: Tuple[RegConfig, ...]
    edges: Tuple[Tuple[RegConfig, object, RegConfig], ...]
    overflow: bool = False


def initial_choices(context):
    """Consistent initial configurations with the length sets of every variable."""
    problem = context.problem
    in_equation = problem.equation.variables()
    absent = [v for v in problem.variables if v not in in_equation]
    absent_sets = {v: context.free_length_set(v) for v in absent}
    if any(s.is_empty() for s in absent_sets.values()):
        return ()
    choices = []
    for f in context.assignments(in_equation):
        sets = {v: context.length_set(m) for v, m in f.items()}
        sets.update(absent_sets)
        ordered = tuple((v, sets[v]) for v in problem.variables)
        choices.append(InitialChoice(RegConfig.of(problem.equation, f), ordered))
    return tuple(choices)


def reg_graph(problem, monoid_cap=4096, node_budget=10**6):
    context = MonoidContext(problem, monoid_cap)
    if context.overflow:
        raise BudgetExceeded('monoid closure', monoid_cap, partial=context.monoid)
    initials = initial_choices(context)
    logger.info("%d consistent initial assignments over a monoid of %d matrices",
                len(initials), len(context.monoid))
    nodes, edges, overflow = explore(
        [c.config for c in initials],
        lambda cfg: successors_reg(cfg, context.monoid),
        node_budget,
    )
    return RegGraph(context, initials, tuple(nodes), tuple(edges), overflow)


def is_satisfiable_reg(problem, monoid_cap=4096, node_budget=10**6):
    """Satisfiability of the equation under its regular constraints
    (the length constraint is not consulted)."""
    try:
        graph = reg_graph(problem, monoid_cap, node_budget)
    except BudgetExceeded as e:
        raise Indeterminate(str(e)) from e
    if FINAL in graph.nodes:
        return True
    if graph.overflow:
        raise Indeterminate(f"(E, f) graph exceeds {node_budget} nodes")
    return False
