"""Brute-force ground truth for small problems.

Solutions are enumerated by length tuple. For a fixed tuple every position
of both sides is a cell; aligning the two sides merges cells into classes,
and only classes not pinned to a constant are filled in by enumeration.
"""
import csv
import io
import itertools
import json
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Tuple

from networkx.utils import UnionFind

from qwe.pad import conj, disj, div, eq, evaluate, exists, ge, gt, term

logger = logging.getLogger(__name__)


def _cells(side, lengths):
    for symbol in side:
        if symbol.is_var:
            for k in range(lengths[symbol.name]):
                yield ('var', symbol.name, k)
        else:
            yield ('const', symbol.name)


def _solutions_for(problem, lengths):
    """Solutions with ``|sigma(x)| = lengths[x]``, in lexicographic order.

    Cells are filled variable by variable while every regular constraint on
    the current variable is tracked, so dead prefixes are cut early.
    """
    eq_ = problem.equation
    left = list(_cells(eq_.lhs, lengths))
    right = list(_cells(eq_.rhs, lengths))
    if len(left) != len(right):
        return
    classes = UnionFind()
    for v in problem.variables:
        for k in range(lengths[v]):
            classes[('var', v, k)]
    for a, b in zip(left, right):
        classes.union(a, b)

    pinned = {}
    for a in left + right:
        if a[0] == 'const':
            root = classes[a]
            if pinned.setdefault(root, a[1]) != a[1]:
                return

    for v in problem.variables:
        if lengths[v] == 0 and not problem.constraint_holds(v, ''):
            return
    checks = {v: [(_moves(nfa), nfa.finals, frozenset({nfa.initial}) if nfa.size else frozenset())
                  for x, nfa in problem.regular_constraints if x == v]
              for v in problem.variables}
    order = [(v, k) for v in problem.variables for k in range(lengths[v])]
    alphabet = sorted(problem.alphabet)

    def fill(i, chosen, states):
        if i == len(order):
            yield {v: ''.join(chosen[classes[('var', v, k)]] for k in range(lengths[v]))
                   for v in problem.variables}
            return
        v, k = order[i]
        if k == 0:
            states = [initial for _, _, initial in checks[v]]
        root = classes[('var', v, k)]
        fixed = root in chosen
        for letter in ([chosen[root]] if fixed else alphabet):
            advanced = [frozenset(q for p in s for q in moves.get((p, letter), ()))
                        for (moves, _, _), s in zip(checks[v], states)]
            if not all(advanced):
                continue
            if k == lengths[v] - 1 and not all(s & finals for (_, finals, _), s in zip(checks[v], advanced)):
                continue
            yield from fill(i + 1, chosen if fixed else {**chosen, root: letter}, advanced)

    yield from fill(0, pinned, [])


def _moves(nfa):
    table = {}
    for p, a, q in nfa.transitions:
        table.setdefault((p, a), set()).add(q)
    return table


def _length_tuples(problem, bound):
    phi = problem.length_formula()
    for values in itertools.product(range(bound + 1), repeat=len(problem.variables)):
        lengths = dict(zip(problem.variables, values))
        if evaluate(phi, lengths):
            yield values, lengths


def enumerate_solutions(problem, len_bound):
    """Every solution with all word lengths at most ``len_bound``.

    Ordered by length tuple, then lexicographically by content.
    """
    for _, lengths in _length_tuples(problem, len_bound):
        yield from _solutions_for(problem, lengths)


def find_solution(problem, lengths):
    """First solution with the given lengths, or None."""
    missing = [v for v in problem.variables if v not in lengths]
    if missing:
        raise ValueError(f"no length given for {', '.join(missing)}")
    return next(_solutions_for(problem, lengths), None)


@dataclass(frozen=True)
class LenAbsSample:
    bound: int
    variables: Tuple[str, ...]
    tuples: FrozenSet[Tuple[int, ...]]
    witnesses: Dict[Tuple[int, ...], Dict[str, str]] = field(default_factory=dict, compare=False)

    def __contains__(self, item):
        return tuple(item) in self.tuples

    def __len__(self):
        return len(self.tuples)

    def to_csv(self):
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(list(self.variables) + ['witness'])
        for values in sorted(self.tuples):
            witness = self.witnesses.get(values, {})
            writer.writerow(list(values) + [json.dumps(witness, sort_keys=True)])
        return buffer.getvalue()

    def to_json(self):
        return {
            'bound': self.bound,
            'variables': list(self.variables),
            'tuples': [list(t) for t in sorted(self.tuples)],
        }


def length_abstraction(problem, bound):
    """Length tuples of solutions with every length at most ``bound``."""
    witnesses = {}
    for values, lengths in _length_tuples(problem, bound):
        sigma = next(_solutions_for(problem, lengths), None)
        if sigma is not None:
            witnesses[values] = sigma
    logger.info("length abstraction of %s at bound %d: %d tuples", problem, bound, len(witnesses))
    return LenAbsSample(bound, problem.variables, frozenset(witnesses), witnesses)


@dataclass(frozen=True)
class MismatchReport:
    """``missing``: allowed by the formula, no solution; ``spurious``: solution the formula rejects."""
    missing: Tuple[Tuple[int, ...], ...] = ()
    spurious: Tuple[Tuple[int, ...], ...] = ()

    @property
    def empty(self):
        return not self.missing and not self.spurious

    def __bool__(self):
        return not self.empty


def check_characterization(problem, phi, bound, sample=None):
    """Compare ``phi`` over the length variables with the sampled abstraction.

    The free variables of ``phi`` are the problem's variable names, standing
    for their lengths.
    """
    if sample is None:
        sample = length_abstraction(problem, bound)
    missing, spurious = [], []
    for values in itertools.product(range(bound + 1), repeat=len(problem.variables)):
        mu = dict(zip(problem.variables, values))
        expected = evaluate(phi, mu, witness_bound=2 * bound + 4)
        if expected and values not in sample.tuples:
            missing.append(values)
        elif not expected and values in sample.tuples:
            spurious.append(values)
    return MismatchReport(tuple(missing), tuple(spurious))


def _gcd_disjuncts(x, y):
    return {
        'equal': eq(x, y),
        'left-empty': conj(eq(x, 0), div(2, y)),
        'right-empty': conj(eq(y, 0), div(2, x)),
    }


def gcd_characterization(x='x', y='y'):
    """Length abstraction of ``x a b y = y a b x`` over a two-letter alphabet.

    The last disjunct states ``gcd(|x|+2, |y|+2) > 1`` with an explicit
    common divisor ``d``.
    """
    common = exists(['d'], conj(ge('d', 2), div('d', term(x) + 2), div('d', term(y) + 2)))
    return disj(*_gcd_disjuncts(x, y).values(), conj(gt(x, 0), gt(y, 0), common))


def conjugacy_formula(x='x', y='y', z='z'):
    """``|x| = |y| > 0`` and ``|x|`` divides ``|z|``."""
    return conj(eq(x, y), gt(x, 0), div(x, z))


def presburger_candidates(x='x', y='y'):
    """Every disjunction of the divisor-free disjuncts of the gcd characterization."""
    parts = _gcd_disjuncts(x, y)
    candidates = {}
    for size in range(1, len(parts) + 1):
        for names in itertools.combinations(parts, size):
            candidates[' | '.join(names)] = disj(*(parts[n] for n in names))
    return candidates


def separating_tuples(sample, candidates):
    """For each candidate, the first tuple on which it disagrees with ``sample``."""
    separation = {}
    for name, phi in candidates.items():
        separation[name] = None
        for values in itertools.product(range(sample.bound + 1), repeat=len(sample.variables)):
            mu = dict(zip(sample.variables, values))
            if evaluate(phi, mu) != (values in sample.tuples):
                separation[name] = values
                break
    return separation
