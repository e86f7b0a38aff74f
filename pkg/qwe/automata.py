"""Automata over the constant alphabet.

Regular constraints are compiled to epsilon-free NFAs. Words are abstracted
by their characteristic matrices over the disjoint union of all constraint
automata: entry (i, j) is set when the word labels a path from i to j.
"""
import functools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Tuple

import numpy as np

from qwe.errors import BudgetExceeded
from qwe.pad import FALSE, TRUE, disj, conj, div, eq, ge, term

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Nfa:
    size: int
    alphabet: FrozenSet[str]
    transitions: FrozenSet[Tuple[int, str, int]]
    initial: int = 0
    finals: FrozenSet[int] = frozenset()

    def __post_init__(self):
        for p, a, q in self.transitions:
            if not (0 <= p < self.size and 0 <= q < self.size):
                raise ValueError(f"transition ({p}, {a}, {q}) leaves the state range")
            if a not in self.alphabet:
                raise ValueError(f"transition letter {a!r} is not in the alphabet")
        if self.size and not 0 <= self.initial < self.size:
            raise ValueError(f"initial state {self.initial} out of range")
        if any(not 0 <= q < self.size for q in self.finals):
            raise ValueError("final state out of range")

    def letter_bits(self, letter):
        if letter not in self.alphabet:
            raise ValueError(f"letter {letter!r} is not in the alphabet {sorted(self.alphabet)}")
        bits = np.zeros((self.size, self.size), dtype=bool)
        for p, a, q in self.transitions:
            if a == letter:
                bits[p, q] = True
        return bits

    def adjacency(self):
        bits = np.zeros((self.size, self.size), dtype=bool)
        for p, _, q in self.transitions:
            bits[p, q] = True
        return bits

    def accepts(self, word):
        if not self.size:
            return False
        current = {self.initial}
        for letter in word:
            current = {q for p, a, q in self.transitions if p in current and a == letter}
            if not current:
                return False
        return bool(current & self.finals)

    def to_json(self):
        return {
            'states': self.size,
            'alphabet': sorted(self.alphabet),
            'transitions': [list(t) for t in sorted(self.transitions)],
            'initial': self.initial,
            'finals': sorted(self.finals),
        }


def union_nfa(nfas, alphabet):
    """Disjoint union of constraint automata over a common alphabet.

    Returns the union automaton (initial state 0, all finals) and the
    components re-expressed in union coordinates; a component's size in
    union coordinates is the size of the whole union so matrices line up.
    """
    alphabet = frozenset(alphabet)
    offsets = []
    total = 0
    for nfa in nfas:
        offsets.append(total)
        total += nfa.size
    transitions = set()
    finals = set()
    for nfa, offset in zip(nfas, offsets):
        transitions |= {(p + offset, a, q + offset) for p, a, q in nfa.transitions}
        finals |= {q + offset for q in nfa.finals}
    union = Nfa(total, alphabet, frozenset(transitions), 0, frozenset(finals))
    components = [
        Nfa(total, alphabet, union.transitions, nfa.initial + offset,
            frozenset(q + offset for q in nfa.finals))
        for nfa, offset in zip(nfas, offsets)
    ]
    return union, components


class _RegexParser:
    """Recursive descent over ``|``, ``*``, ``+``, ``?``, parentheses and concatenation."""
    SPECIAL = set('|*+?()')

    def __init__(self, pattern):
        self.pattern = pattern
        self.pos = 0
        self.edges = []
        self.count = 0

    def state(self):
        self.count += 1
        return self.count - 1

    def peek(self):
        while self.pos < len(self.pattern) and self.pattern[self.pos].isspace():
            self.pos += 1
        return self.pattern[self.pos] if self.pos < len(self.pattern) else None

    def fail(self, message):
        error = ValueError(f"{message} at offset {self.pos} in regex {self.pattern!r}")
        error.offset = self.pos
        raise error

    def parse(self):
        fragment = self.alternation()
        if self.peek() is not None:
            self.fail(f"unexpected {self.peek()!r}")
        return fragment

    def alternation(self):
        fragments = [self.concatenation()]
        while self.peek() == '|':
            self.pos += 1
            fragments.append(self.concatenation())
        if len(fragments) == 1:
            return fragments[0]
        start, end = self.state(), self.state()
        for s, t in fragments:
            self.edges.append((start, None, s))
            self.edges.append((t, None, end))
        return start, end

    def concatenation(self):
        fragments = []
        while self.peek() not in (None, '|', ')'):
            fragments.append(self.repetition())
        if not fragments:
            s = self.state()
            return s, s
        for (_, t), (s, _) in zip(fragments, fragments[1:]):
            self.edges.append((t, None, s))
        return fragments[0][0], fragments[-1][1]

    def repetition(self):
        s, t = self.atom()
        while self.peek() in ('*', '+', '?'):
            op = self.pattern[self.pos]
            self.pos += 1
            start, end = self.state(), self.state()
            self.edges.append((start, None, s))
            self.edges.append((t, None, end))
            if op in '*?':
                self.edges.append((start, None, end))
            if op in '*+':
                self.edges.append((t, None, s))
            s, t = start, end
        return s, t

    def atom(self):
        c = self.peek()
        if c == '(':
            self.pos += 1
            fragment = self.alternation()
            if self.peek() != ')':
                self.fail("missing ')'")
            self.pos += 1
            return fragment
        if c is None or c in self.SPECIAL:
            self.fail(f"unexpected {c!r}" if c else "unexpected end")
        self.pos += 1
        s, t = self.state(), self.state()
        self.edges.append((s, c, t))
        return s, t


def compile_regex(pattern, alphabet=None):
    """Compile a regular expression to a trimmed epsilon-free NFA.

    Args:
        pattern: regex over single-character constants
        alphabet: alphabet of the resulting NFA; defaults to the letters used

    Returns:
        An Nfa whose states are numbered in breadth-first order
    """
    parser = _RegexParser(pattern)
    start, end = parser.parse()
    letters = {a for _, a, _ in parser.edges if a is not None}
    if alphabet is None:
        alphabet = letters
    elif not letters <= set(alphabet):
        raise ValueError(f"regex {pattern!r} uses letters outside the alphabet")

    epsilon = {}
    labelled = {}
    for p, a, q in parser.edges:
        if a is None:
            epsilon.setdefault(p, []).append(q)
        else:
            labelled.setdefault(p, []).append((a, q))

    @functools.lru_cache(maxsize=None)
    def closure(p):
        seen = {p}
        stack = [p]
        while stack:
            for q in epsilon.get(stack.pop(), ()):
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        return frozenset(seen)

    numbering = {start: 0}
    queue = deque([start])
    transitions = set()
    finals = set()
    while queue:
        p = queue.popleft()
        reach = closure(p)
        if end in reach:
            finals.add(numbering[p])
        moves = sorted((a, q) for r in reach for a, q in labelled.get(r, ()))
        for a, q in moves:
            if q not in numbering:
                numbering[q] = len(numbering)
                queue.append(q)
            transitions.add((numbering[p], a, numbering[q]))
    return Nfa(len(numbering), frozenset(alphabet), frozenset(transitions), 0, frozenset(finals))


class BoolMatrix:
    """Square boolean matrix with boolean (or-and) multiplication."""
    __slots__ = ('bits', '_key')

    def __init__(self, bits):
        bits = np.array(bits, dtype=bool)
        if bits.size == 0:
            bits = bits.reshape((0, 0)) if bits.ndim != 2 else bits
        if bits.ndim != 2 or bits.shape[0] != bits.shape[1]:
            raise ValueError(f"characteristic matrices are square, got shape {bits.shape}")
        bits.setflags(write=False)
        self.bits = bits
        self._key = (bits.shape[0], np.packbits(bits, axis=None).tobytes())

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim, dtype=bool))

    @property
    def dim(self):
        return self.bits.shape[0]

    def __matmul__(self, other):
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch {self.dim} vs {other.dim}")
        product = self.bits.astype(np.int64) @ other.bits.astype(np.int64)
        return BoolMatrix(product > 0)

    def __getitem__(self, index):
        return bool(self.bits[index])

    def __eq__(self, other):
        return isinstance(other, BoolMatrix) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def rows(self):
        return [''.join('1' if b else '0' for b in row) for row in self.bits]

    def __repr__(self):
        return f"<BoolMatrix {'|'.join(self.rows()) or 'ε'}>"


def letter_matrices(nfa):
    return {a: BoolMatrix(nfa.letter_bits(a)) for a in sorted(nfa.alphabet)}


def char_matrix(nfa, word):
    """Characteristic matrix of ``word`` over ``nfa``."""
    result = BoolMatrix.identity(nfa.size)
    for letter in word:
        result = result @ BoolMatrix(nfa.letter_bits(letter))
    return result


@dataclass(frozen=True)
class MonoidClosure:
    """Realizable characteristic matrices, each with a shortest witness word."""
    elements: Tuple[BoolMatrix, ...]
    witnesses: Dict[BoolMatrix, str] = field(compare=False)
    letters: Dict[str, BoolMatrix] = field(compare=False)
    overflow: bool = False
    products: Dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def identity(self):
        return self.elements[0]

    def right_factors(self, left, target):
        """All realizable M with left @ M == target (memoized)."""
        key = (left, target)
        if key not in self.products:
            self.products[key] = tuple(m for m in self.elements if left @ m == target)
        return self.products[key]

    def __contains__(self, matrix):
        return matrix in self.witnesses

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def index(self, matrix):
        return self.elements.index(matrix)


@functools.lru_cache(maxsize=64)
def realizable_matrices(nfa, cap):
    """Close the letter matrices of ``nfa`` under product, starting from the identity."""
    if cap <= 0:
        raise ValueError("monoid cap must be positive")
    letters = letter_matrices(nfa)
    identity = BoolMatrix.identity(nfa.size)
    witnesses = {identity: ''}
    elements = [identity]
    queue = deque([identity])
    overflow = False
    while queue and not overflow:
        current = queue.popleft()
        for letter, matrix in letters.items():
            product = current @ matrix
            if product in witnesses:
                continue
            if len(elements) >= cap:
                overflow = True
                break
            witnesses[product] = witnesses[current] + letter
            elements.append(product)
            queue.append(product)
    if overflow:
        logger.warning("monoid closure stopped at cap %d", cap)
    else:
        logger.info("monoid closure has %d elements over %d states", len(elements), nfa.size)
    return MonoidClosure(tuple(elements), witnesses, letters, overflow)


def is_consistent(f, constraints):
    """Check f against regular constraints given in union coordinates.

    Args:
        f: mapping variable -> BoolMatrix
        constraints: pairs (variable, component Nfa in union coordinates)

    Returns:
        True iff every constrained variable's matrix reaches a final state
        of its component from the component's initial state
    """
    for variable, nfa in constraints:
        if variable not in f:
            raise ValueError(f"no matrix assigned to constrained variable {variable}")
        matrix = f[variable]
        if not any(matrix[nfa.initial, q] for q in nfa.finals):
            return False
    return True


@dataclass(frozen=True)
class ProgressionSet:
    """Finite union of arithmetic progressions ``offset + period * N``.

    Period 0 denotes the singleton ``{offset}``.
    """
    progressions: FrozenSet[Tuple[int, int]] = frozenset()

    @classmethod
    def naturals(cls):
        return cls(frozenset({(0, 1)}))

    @classmethod
    def singleton(cls, value):
        return cls(frozenset({(value, 0)}))

    def __contains__(self, n):
        for offset, period in self.progressions:
            if period == 0:
                if n == offset:
                    return True
            elif n >= offset and (n - offset) % period == 0:
                return True
        return False

    def is_empty(self):
        return not self.progressions

    def union(self, other):
        return ProgressionSet(self.progressions | other.progressions)

    def members(self, upto):
        return [n for n in range(upto + 1) if n in self]

    def to_formula(self, variable):
        """Membership of ``variable`` as a divisibility formula.

        ``(o, p)`` becomes ``x >= o && p | (x - o)``, the quantifier-free form
        of ``exists k. x = o + p*k`` over the naturals.
        """
        x = term(variable)
        options = []
        for offset, period in sorted(self.progressions):
            if period == 0:
                options.append(eq(x, offset))
            elif period == 1:
                options.append(ge(x, offset) if offset else TRUE)
            else:
                options.append(conj(ge(x, offset), div(period, x - offset)))
        if not options:
            return FALSE
        return disj(*options)

    def __str__(self):
        if not self.progressions:
            return '{}'
        return '{' + ', '.join(f"({o},{p})" for o, p in sorted(self.progressions)) + '}'


def _from_lasso(accepted, start, period):
    cycle = accepted[start:]
    for d in range(1, period + 1):
        if period % d == 0 and all(cycle[i] == cycle[i % d] for i in range(period)):
            period, cycle = d, cycle[:d]
            break
    while start > 0 and accepted[start - 1] == cycle[-1]:
        start -= 1
        cycle = [cycle[-1]] + cycle[:-1]
    progressions = {(n, 0) for n in range(start) if accepted[n]}
    progressions |= {(start + i, period) for i in range(period) if cycle[i]}
    return ProgressionSet(frozenset(progressions))


def length_set(nfa):
    """Lengths of the words accepted by ``nfa`` as a ProgressionSet.

    The sets of states reachable by words of length 0, 1, 2, ... form a
    deterministic sequence, so it is eventually periodic; the accepted
    lengths are read off its first repetition.
    """
    if not nfa.size:
        return ProgressionSet()
    step = nfa.adjacency().astype(np.int64)
    finals = np.zeros(nfa.size, dtype=bool)
    finals[sorted(nfa.finals)] = True
    current = np.zeros(nfa.size, dtype=bool)
    current[nfa.initial] = True
    seen = {}
    accepted = []
    while True:
        key = current.tobytes()
        if key in seen:
            break
        seen[key] = len(accepted)
        accepted.append(bool((current & finals).any()))
        current = (current.astype(np.int64) @ step) > 0
    start = seen[key]
    return _from_lasso(accepted, start, len(accepted) - start)


def monoid_automaton(closure, matrix):
    """Deterministic automaton over the realizable monoid accepting phi^-1(matrix)."""
    index = {m: i for i, m in enumerate(closure.elements)}
    transitions = set()
    for m, i in index.items():
        for letter, step in closure.letters.items():
            transitions.add((i, letter, index[m @ step]))
    finals = frozenset({index[matrix]}) if matrix in index else frozenset()
    return Nfa(len(index), frozenset(closure.letters), frozenset(transitions), 0, finals)


@functools.lru_cache(maxsize=4096)
def matrix_language_length_set(nfa, matrix, cap):
    """Length set of ``{w : char_matrix(nfa, w) = matrix}``."""
    closure = realizable_matrices(nfa, cap)
    if closure.overflow:
        raise BudgetExceeded('monoid closure', cap, partial=closure)
    if matrix not in closure:
        return ProgressionSet()
    return length_set(monoid_automaton(closure, matrix))
