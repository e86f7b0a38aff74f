"""Existential Presburger arithmetic with divisibility (PAD) over the naturals.

Formulas are immutable trees of linear atoms (``<=``, ``=``, divisibility)
closed under conjunction, disjunction and existential quantification. There
is no negation, which keeps every formula monotone and lets existential
variables be lifted to the top level.

The module offers direct evaluation, a bounded model finder with constraint
propagation, SMT-LIB export and ingestion of external models.
"""
import itertools
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Tuple

from qwe.errors import WitnessBoundExhausted
from qwe.utils import render_template

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinTerm:
    """Linear term ``constant + sum(coeff * var)`` with integer coefficients."""
    constant: int = 0
    coeffs: Tuple[Tuple[str, int], ...] = ()

    @classmethod
    def of(cls, constant=0, coeffs=None):
        items = tuple(sorted((v, c) for v, c in (coeffs or {}).items() if c != 0))
        return cls(constant, items)

    @classmethod
    def var(cls, name, coeff=1):
        return cls.of(0, {name: coeff})

    @classmethod
    def const(cls, value):
        return cls(value, ())

    def as_dict(self):
        return dict(self.coeffs)

    def coeff(self, name):
        return self.as_dict().get(name, 0)

    @property
    def variables(self):
        return frozenset(v for v, _ in self.coeffs)

    def evaluate(self, mu):
        return self.constant + sum(c * mu[v] for v, c in self.coeffs)

    def rename(self, mapping):
        merged = {}
        for v, c in self.coeffs:
            target = mapping.get(v, v)
            merged[target] = merged.get(target, 0) + c
        return LinTerm.of(self.constant, merged)

    def __add__(self, other):
        other = term(other)
        merged = self.as_dict()
        for v, c in other.coeffs:
            merged[v] = merged.get(v, 0) + c
        return LinTerm.of(self.constant + other.constant, merged)

    __radd__ = __add__

    def __neg__(self):
        return LinTerm.of(-self.constant, {v: -c for v, c in self.coeffs})

    def __sub__(self, other):
        return self + (-term(other))

    def __rsub__(self, other):
        return term(other) - self

    def __mul__(self, factor):
        if not isinstance(factor, int):
            return NotImplemented
        return LinTerm.of(self.constant * factor, {v: c * factor for v, c in self.coeffs})

    __rmul__ = __mul__

    def __str__(self):
        parts = []
        for v, c in self.coeffs:
            if c == 1:
                parts.append(v)
            elif c == -1:
                parts.append(f"-{v}")
            else:
                parts.append(f"{c}*{v}")
        if self.constant or not parts:
            parts.append(str(self.constant))
        return ' + '.join(parts).replace('+ -', '- ')


def term(value):
    """Coerce an int, a variable name or a LinTerm to a LinTerm."""
    if isinstance(value, LinTerm):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not terms")
    if isinstance(value, int):
        return LinTerm.const(value)
    if isinstance(value, str):
        return LinTerm.var(value)
    raise TypeError(f"cannot build a linear term from {value!r}")


class Formula:
    """Base class of PAD formulas."""

    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def free_variables(self) -> FrozenSet[str]:
        raise NotImplementedError

    def rename(self, mapping):
        raise NotImplementedError


@dataclass(frozen=True)
class Le(Formula):
    lhs: LinTerm
    rhs: LinTerm

    def free_variables(self):
        return self.lhs.variables | self.rhs.variables

    def rename(self, mapping):
        return Le(self.lhs.rename(mapping), self.rhs.rename(mapping))

    def __str__(self):
        return f"{self.lhs} <= {self.rhs}"


@dataclass(frozen=True)
class Eq(Formula):
    lhs: LinTerm
    rhs: LinTerm

    def free_variables(self):
        return self.lhs.variables | self.rhs.variables

    def rename(self, mapping):
        return Eq(self.lhs.rename(mapping), self.rhs.rename(mapping))

    def __str__(self):
        return f"{self.lhs} = {self.rhs}"


@dataclass(frozen=True)
class Div(Formula):
    """``divisor | dividend``; ``0 | g`` holds exactly when ``g = 0``."""
    divisor: LinTerm
    dividend: LinTerm

    def free_variables(self):
        return self.divisor.variables | self.dividend.variables

    def rename(self, mapping):
        return Div(self.divisor.rename(mapping), self.dividend.rename(mapping))

    def __str__(self):
        return f"({self.divisor}) | ({self.dividend})"


@dataclass(frozen=True)
class And(Formula):
    parts: Tuple[Formula, ...] = ()

    def free_variables(self):
        return frozenset().union(*(p.free_variables() for p in self.parts))

    def rename(self, mapping):
        return And(tuple(p.rename(mapping) for p in self.parts))

    def __str__(self):
        if not self.parts:
            return 'true'
        return ' && '.join(f"({p})" if isinstance(p, Or) else str(p) for p in self.parts)


@dataclass(frozen=True)
class Or(Formula):
    parts: Tuple[Formula, ...] = ()

    def free_variables(self):
        return frozenset().union(*(p.free_variables() for p in self.parts))

    def rename(self, mapping):
        return Or(tuple(p.rename(mapping) for p in self.parts))

    def __str__(self):
        if not self.parts:
            return 'false'
        return ' || '.join(f"({p})" if isinstance(p, And) else str(p) for p in self.parts)


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula

    def free_variables(self):
        return self.body.free_variables() - {self.var}

    def rename(self, mapping):
        inner = {k: v for k, v in mapping.items() if k != self.var}
        return Exists(self.var, self.body.rename(inner))

    def __str__(self):
        return f"exists {self.var}. ({self.body})"


TRUE = And(())
FALSE = Or(())


def le(lhs, rhs):
    return Le(term(lhs), term(rhs))


def ge(lhs, rhs):
    return Le(term(rhs), term(lhs))


def lt(lhs, rhs):
    return Le(term(lhs) + 1, term(rhs))


def gt(lhs, rhs):
    return Le(term(rhs) + 1, term(lhs))


def eq(lhs, rhs):
    return Eq(term(lhs), term(rhs))


def div(divisor, dividend):
    return Div(term(divisor), term(dividend))


def conj(*parts):
    flat = []
    for part in parts:
        if isinstance(part, And):
            flat.extend(part.parts)
        elif part == FALSE:
            return FALSE
        else:
            flat.append(part)
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts):
    flat = []
    for part in parts:
        if isinstance(part, Or):
            flat.extend(part.parts)
        elif part == TRUE:
            return TRUE
        else:
            flat.append(part)
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def exists(names, body):
    for name in reversed(list(names)):
        body = Exists(name, body)
    return body


def has_quantifier(phi):
    if isinstance(phi, Exists):
        return True
    if isinstance(phi, (And, Or)):
        return any(has_quantifier(p) for p in phi.parts)
    return False


def _holds(phi, mu):
    """Quantifier-free evaluation."""
    if isinstance(phi, Le):
        return phi.lhs.evaluate(mu) <= phi.rhs.evaluate(mu)
    if isinstance(phi, Eq):
        return phi.lhs.evaluate(mu) == phi.rhs.evaluate(mu)
    if isinstance(phi, Div):
        d = phi.divisor.evaluate(mu)
        g = phi.dividend.evaluate(mu)
        return g == 0 if d == 0 else g % d == 0
    if isinstance(phi, And):
        return all(_holds(p, mu) for p in phi.parts)
    if isinstance(phi, Or):
        return any(_holds(p, mu) for p in phi.parts)
    raise TypeError(f"unexpected formula node {phi!r}")


def prenex(phi):
    """Rename every bound variable apart and strip the quantifiers.

    Returns the quantifier-free body and the list of fresh existential names.
    Sound because formulas contain no negation.
    """
    counter = itertools.count()
    bound = []

    def walk(node):
        if isinstance(node, Exists):
            fresh = f"{node.var}#{next(counter)}"
            bound.append(fresh)
            return walk(node.body.rename({node.var: fresh}))
        if isinstance(node, And):
            return And(tuple(walk(p) for p in node.parts))
        if isinstance(node, Or):
            return Or(tuple(walk(p) for p in node.parts))
        return node

    return walk(phi), bound


def _expand(phi):
    if isinstance(phi, And):
        items = []
        for part in phi.parts:
            items.extend(_expand(part))
        return items
    return [phi]


def _status(phi, assign):
    """True/False when decided by the partial assignment, None otherwise."""
    if isinstance(phi, (Le, Eq, Div)):
        if phi.free_variables() <= assign.keys():
            return _holds(phi, assign)
        return None
    if isinstance(phi, And):
        unknown = False
        for part in phi.parts:
            s = _status(part, assign)
            if s is False:
                return False
            if s is None:
                unknown = True
        return None if unknown else True
    if isinstance(phi, Or):
        unknown = False
        for part in phi.parts:
            s = _status(part, assign)
            if s is True:
                return True
            if s is None:
                unknown = True
        return None if unknown else False
    raise TypeError(f"unexpected formula node {phi!r}")


_CONFLICT = object()


def _floordiv(a, b):
    return a // b


def _ceildiv(a, b):
    return -((-a) // b)


class _Search:
    """Backtracking model search with equality solving and interval propagation.

    Every variable ranges over ``[0, bound]`` unless an atom forces a value.
    ``cut`` records whether some branch had to truncate a domain at the bound;
    a failed search without a cut is exhaustive.
    """

    def __init__(self, phi, bound, fixed=None, order=()):
        body, self.existentials = prenex(phi)
        self.body = body
        self.bound = bound
        self.fixed = dict(fixed or {})
        self.cut = False
        self.nodes = 0
        names = list(order) + sorted(body.free_variables(), key=str)
        self.order = {}
        for name in names:
            self.order.setdefault(name, len(self.order))

    def run(self):
        return self._solve(_expand(self.body), dict(self.fixed), {}, {})

    def box(self):
        """Upper bounds learned by propagating the top-level linear atoms.

        Returns a dict mapping each variable to its upper bound (None when
        unbounded), or None when propagation alone finds a conflict.
        """
        atoms = [p for p in _expand(self.body) if isinstance(p, (Le, Eq))]
        assign, lo, hi = dict(self.fixed), {}, {}
        changed = True
        while changed:
            changed = False
            kept = []
            for item in atoms:
                outcome = self._propagate(item, assign, lo, hi)
                if outcome is False:
                    return None
                if outcome is True:
                    changed = True
                    continue
                kept.append(item)
                if outcome == 'tightened':
                    changed = True
            atoms = kept
        return {v: assign[v] if v in assign else hi.get(v) for v in self.order}

    def _solve(self, pending, assign, lo, hi):
        self.nodes += 1
        pending = list(pending)
        assign, lo, hi = dict(assign), dict(lo), dict(hi)
        changed = True
        while changed:
            changed = False
            kept = []
            for item in pending:
                outcome = self._propagate(item, assign, lo, hi)
                if outcome is False:
                    return None
                if outcome is True:
                    changed = True
                    continue
                if isinstance(outcome, list):
                    kept.extend(outcome)
                    changed = True
                    continue
                kept.append(item)
                if outcome == 'tightened':
                    changed = True
            pending = kept
            for name in list(lo):
                if name not in assign and hi.get(name) is not None and lo[name] == hi[name]:
                    assign[name] = lo[name]
                    changed = True

        if not pending:
            return self._finish(assign, lo, hi)

        for index, item in enumerate(pending):
            if isinstance(item, Or):
                rest = pending[:index] + pending[index + 1:]
                for option in item.parts:
                    model = self._solve(rest + _expand(option), assign, lo, hi)
                    if model is not None:
                        return model
                return None

        candidates = set()
        for item in pending:
            candidates |= item.free_variables() - assign.keys()
        name = min(candidates, key=lambda v: (self._width(v, lo, hi), self.order.get(v, len(self.order)), v))
        low = lo.get(name, 0)
        high = hi.get(name)
        if high is None or high > self.bound:
            self.cut = True
            high = self.bound
        for value in range(low, high + 1):
            branch = dict(assign)
            branch[name] = value
            model = self._solve(pending, branch, dict(lo), dict(hi))
            if model is not None:
                return model
        return None

    def _width(self, name, lo, hi):
        high = hi.get(name)
        if high is None:
            return self.bound + 1
        return high - lo.get(name, 0)

    def _finish(self, assign, lo, hi):
        model = dict(assign)
        for name in self.order:
            if name not in model:
                low = lo.get(name, 0)
                if low > self.bound:
                    self.cut = True
                    return None
                model[name] = low
        return model

    def _propagate(self, item, assign, lo, hi):
        """Returns True (discharged), False (conflict), a list (replacement items),
        'tightened' (bounds changed) or None (nothing learned)."""
        if isinstance(item, Or):
            alive = []
            for option in item.parts:
                s = _status(option, assign)
                if s is True:
                    return True
                if s is None:
                    alive.append(option)
            if not alive:
                return False
            if len(alive) == 1:
                return _expand(alive[0])
            if len(alive) < len(item.parts):
                return [Or(tuple(alive))]
            return None
        if isinstance(item, Div):
            if item.free_variables() <= assign.keys():
                return _holds(item, assign)
            if item.divisor.variables <= assign.keys() and item.divisor.evaluate(assign) == 0:
                return [Eq(item.dividend, LinTerm.const(0))]
            return None

        t = item.lhs - item.rhs
        known = t.constant
        unknown = []
        for v, c in t.coeffs:
            if v in assign:
                known += c * assign[v]
            else:
                unknown.append((v, c))
        if not unknown:
            return known <= 0 if isinstance(item, Le) else known == 0
        if isinstance(item, Eq) and len(unknown) == 1:
            v, c = unknown[0]
            if known % c != 0:
                return False
            value = -known // c
            if value < lo.get(v, 0) or value < 0:
                return False
            if hi.get(v) is not None and value > hi[v]:
                return False
            assign[v] = value
            return True

        tightened = self._tighten(unknown, known, lo, hi)
        if tightened is _CONFLICT:
            return False
        if isinstance(item, Eq):
            again = self._tighten([(v, -c) for v, c in unknown], -known, lo, hi)
            if again is _CONFLICT:
                return False
            tightened = tightened or again
        return 'tightened' if tightened else None

    def _tighten(self, unknown, known, lo, hi):
        """Interval propagation for ``known + sum(c*v) <= 0``.

        Returns whether a bound changed, or ``_CONFLICT`` when the domains are empty.
        """
        changed = False
        for v, c in unknown:
            rest = known
            for w, d in unknown:
                if w == v:
                    continue
                if d > 0:
                    rest += d * lo.get(w, 0)
                elif hi.get(w) is None:
                    rest = None
                    break
                else:
                    rest += d * hi[w]
            if rest is None:
                continue
            if c > 0:
                limit = _floordiv(-rest, c)
                if limit < 0:
                    return _CONFLICT
                if hi.get(v) is None or limit < hi[v]:
                    hi[v] = limit
                    changed = True
            else:
                limit = _ceildiv(rest, -c)
                if limit > lo.get(v, 0):
                    lo[v] = limit
                    changed = True
                    if limit > self.bound and (hi.get(v) is None or hi[v] > self.bound):
                        self.cut = True
                        return _CONFLICT
            if hi.get(v) is not None and lo.get(v, 0) > hi[v]:
                return _CONFLICT
        return changed


@dataclass(frozen=True)
class Sat:
    model: Dict[str, int] = field(default_factory=dict)

    @property
    def satisfiable(self):
        return True


@dataclass(frozen=True)
class NoModelUpTo:
    bound: int
    exhaustive: bool = False

    @property
    def satisfiable(self):
        return False


def evaluate(phi, mu, witness_bound=64, strict=False):
    """Evaluate ``phi`` under ``mu``.

    Existential witnesses are searched up to ``witness_bound`` unless an
    equality determines them. With ``strict`` a False caused by an exhausted
    witness bound raises WitnessBoundExhausted instead.
    """
    missing = phi.free_variables() - set(mu)
    if missing:
        raise KeyError(f"unassigned variables: {', '.join(sorted(missing))}")
    if not has_quantifier(phi):
        return _holds(phi, mu)
    fixed = {v: mu[v] for v in phi.free_variables()}
    search = _Search(phi, max([witness_bound, *fixed.values()]), fixed=fixed)
    model = search.run()
    if model is None and search.cut and strict:
        raise WitnessBoundExhausted(f"no witness up to {witness_bound} for {phi}")
    return model is not None


def bounded_sat(phi, bound, order=()):
    """Search a model of ``phi`` with free and existential variables in ``[0, bound]``.

    Returns Sat(model) restricted to the free variables, or NoModelUpTo whose
    ``exhaustive`` flag is set when no domain was truncated by the bound (the
    formula is then unsatisfiable).
    """
    search = _Search(phi, bound, order=order)
    model = search.run()
    logger.debug("bounded search visited %d nodes (bound %d)", search.nodes, bound)
    if model is None:
        return NoModelUpTo(bound, exhaustive=not search.cut)
    free = phi.free_variables()
    return Sat({v: model.get(v, 0) for v in sorted(free)})


def upper_bounds(phi, order=()):
    """Per-variable upper bounds implied by the conjunctive linear part of ``phi``.

    Variables left unbounded map to None. Returns None when the bounds alone
    are contradictory.
    """
    return _Search(phi, float('inf'), order=order).box()


_SIMPLE_SYMBOL = re.compile(r'[A-Za-z_][A-Za-z0-9_.]*$')


def smt_symbol(name):
    if _SIMPLE_SYMBOL.match(name):
        return name
    return f"|{name}|"


def _smt_int(value):
    return str(value) if value >= 0 else f"(- {-value})"


def _smt_term(t):
    summands = []
    for v, c in t.coeffs:
        summands.append(smt_symbol(v) if c == 1 else f"(* {_smt_int(c)} {smt_symbol(v)})")
    if t.constant or not summands:
        summands.append(_smt_int(t.constant))
    if len(summands) == 1:
        return summands[0]
    return f"(+ {' '.join(summands)})"


def export_smtlib(phi, comment=None):
    """Render ``phi`` as an SMT-LIB v2 script over nonlinear integer arithmetic.

    Existential variables are declared as top-level constants. Each
    divisibility atom gets its own multiplier ``k`` with ``g = k * f``, which
    also encodes ``0 | g`` iff ``g = 0``.
    """
    body, lifted = prenex(phi)
    multipliers = []

    def render(node):
        if isinstance(node, Le):
            return f"(<= {_smt_term(node.lhs)} {_smt_term(node.rhs)})"
        if isinstance(node, Eq):
            return f"(= {_smt_term(node.lhs)} {_smt_term(node.rhs)})"
        if isinstance(node, Div):
            k = f"k!{len(multipliers)}"
            multipliers.append(k)
            return f"(= {_smt_term(node.dividend)} (* {k} {_smt_term(node.divisor)}))"
        if isinstance(node, And):
            return f"(and {' '.join(render(p) for p in node.parts)})" if node.parts else 'true'
        if isinstance(node, Or):
            return f"(or {' '.join(render(p) for p in node.parts)})" if node.parts else 'false'
        raise TypeError(f"unexpected formula node {node!r}")

    assertion = render(body)
    variables = sorted(phi.free_variables()) + lifted
    return render_template(
        'script.smt2.j2',
        comment=comment,
        variables=[smt_symbol(v) for v in variables],
        multipliers=multipliers,
        assertion=assertion,
    )


_DEFINE_FUN = re.compile(
    r'\(define-fun\s+(\|[^|]*\||[^\s()]+)\s+\(\)\s+Int\s+(\(\s*-\s*\d+\s*\)|-?\d+)\s*\)'
)


def parse_smtlib_model(text):
    """Read ``(define-fun name () Int n)`` entries of a solver model."""
    model = {}
    for name, value in _DEFINE_FUN.findall(text):
        name = name[1:-1] if name.startswith('|') else name
        digits = re.sub(r'[()\s-]', '', value)
        model[name] = -int(digits) if '-' in value else int(digits)
    return model


def render_model(model):
    lines = ['(']
    for name in sorted(model):
        lines.append(f"  (define-fun {smt_symbol(name)} () Int {_smt_int(model[name])})")
    lines.append(')')
    return '\n'.join(lines) + '\n'
