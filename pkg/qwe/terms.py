"""Words, equations and problems, plus the problem-source parser."""
import dataclasses
import logging
import re
from dataclasses import dataclass
from typing import FrozenSet, Optional, Tuple

import networkx as nx

from qwe.automata import Nfa, compile_regex
from qwe.errors import ParseError
from qwe.pad import FALSE, TRUE, Formula, conj, disj, eq, ge, gt, le, lt, term

logger = logging.getLogger(__name__)

CONSTANT = 'const'
VARIABLE = 'var'


@dataclass(frozen=True, order=True)
class Symbol:
    kind: str
    name: str

    @classmethod
    def const(cls, name):
        return cls(CONSTANT, name)

    @classmethod
    def var(cls, name):
        return cls(VARIABLE, name)

    @property
    def is_var(self):
        return self.kind == VARIABLE

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"<{'Var' if self.is_var else 'Const'} {self.name}>"


def _render(side):
    if not side:
        return 'ε'
    if all(len(s.name) == 1 for s in side):
        return ''.join(s.name for s in side)
    return ' '.join(s.name for s in side)


@dataclass(frozen=True)
class Equation:
    lhs: Tuple[Symbol, ...] = ()
    rhs: Tuple[Symbol, ...] = ()

    @property
    def length(self):
        return len(self.lhs) + len(self.rhs)

    @property
    def is_trivial(self):
        return not self.lhs and not self.rhs

    def variables(self):
        """Variables in order of first occurrence, left side first."""
        seen = []
        for s in self.lhs + self.rhs:
            if s.is_var and s.name not in seen:
                seen.append(s.name)
        return tuple(seen)

    def constants(self):
        return frozenset(s.name for s in self.lhs + self.rhs if not s.is_var)

    def occurrences(self, variable):
        count = lambda side: sum(1 for s in side if s.is_var and s.name == variable)
        return count(self.lhs), count(self.rhs)

    def substitute(self, variable, replacement):
        """Replace every occurrence of ``variable`` by the symbol sequence ``replacement``."""
        def apply(side):
            out = []
            for s in side:
                if s.is_var and s.name == variable:
                    out.extend(replacement)
                else:
                    out.append(s)
            return tuple(out)
        return Equation(apply(self.lhs), apply(self.rhs))

    def image(self, sigma):
        """Both sides under the substitution ``sigma`` (variable -> word)."""
        expand = lambda side: ''.join(sigma[s.name] if s.is_var else s.name for s in side)
        return expand(self.lhs), expand(self.rhs)

    def length_balance(self):
        """Linear term that vanishes on the lengths of every solution."""
        balance = term(0)
        for sign, side in ((1, self.lhs), (-1, self.rhs)):
            for s in side:
                balance = balance + (sign * term(s.name) if s.is_var else sign)
        return balance

    def __str__(self):
        return f"{_render(self.lhs)}={_render(self.rhs)}"

    def __repr__(self):
        return f"<Equation {self}>"


def make_equation(text, variables):
    """Build an equation from ``"x a b = a b x"`` (or compact ``"xab=abx"``
    when every name is a single character)."""
    if text.count('=') != 1:
        raise ValueError(f"equation {text!r} needs exactly one '='")
    variables = set(variables)

    def side(part):
        tokens = part.split() if ' ' in part.strip() else list(part.strip())
        return tuple(Symbol.var(t) if t in variables else Symbol.const(t) for t in tokens)

    left, right = text.split('=')
    return Equation(side(left), side(right))


@dataclass(frozen=True)
class Classification:
    quadratic: bool
    regular: bool
    oriented: bool

    @property
    def regular_oriented(self):
        return self.regular and self.oriented

    def to_dict(self):
        return {'quadratic': self.quadratic, 'regular': self.regular, 'oriented': self.oriented}


def precedence_graph(eq):
    """Edges a -> b whenever a occurs before b on one side."""
    graph = nx.DiGraph()
    graph.add_nodes_from(eq.variables())
    for side in (eq.lhs, eq.rhs):
        names = [s.name for s in side if s.is_var]
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                graph.add_edge(a, b)
    return graph


def classify(eq):
    quadratic = True
    regular = True
    for variable in eq.variables():
        left, right = eq.occurrences(variable)
        quadratic = quadratic and left + right <= 2
        regular = regular and left <= 1 and right <= 1
    oriented = nx.is_directed_acyclic_graph(precedence_graph(eq))
    return Classification(quadratic, regular, oriented)


@dataclass(frozen=True)
class Problem:
    alphabet: FrozenSet[str]
    variables: Tuple[str, ...]
    equation: Equation
    regular_constraints: Tuple[Tuple[str, Nfa], ...] = ()
    length_constraint: Optional[Formula] = None
    regex_sources: Tuple[Tuple[str, str], ...] = ()

    def __post_init__(self):
        declared = set(self.variables)
        for variable in self.equation.variables():
            if variable not in declared:
                raise ValueError(f"equation variable {variable} is not declared")
        clash = declared & set(self.alphabet)
        if clash:
            raise ValueError(f"names used both as variables and constants: {sorted(clash)}")
        for variable, _ in self.regular_constraints:
            if variable not in declared:
                raise ValueError(f"regular constraint on undeclared variable {variable}")
        if self.length_constraint is not None:
            unknown = self.length_constraint.free_variables() - declared
            if unknown:
                raise ValueError(f"length constraint mentions undeclared {sorted(unknown)}")

    @property
    def has_regular_constraints(self):
        return bool(self.regular_constraints)

    def constraint_holds(self, variable, word):
        return all(nfa.accepts(word) for x, nfa in self.regular_constraints if x == variable)

    def length_formula(self):
        return self.length_constraint if self.length_constraint is not None else TRUE

    def to_source(self):
        lines = [f"vars: {' '.join(self.variables)};"]
        extra = set(self.alphabet) - self.equation.constants()
        if extra:
            lines.append(f"alpha: {' '.join(sorted(extra))};")
        lhs = ' '.join(s.name for s in self.equation.lhs)
        rhs = ' '.join(s.name for s in self.equation.rhs)
        lines.append(f"eq: {lhs} = {rhs};")
        for variable, pattern in self.regex_sources:
            lines.append(f"re: {variable} in /{pattern}/;")
        if self.length_constraint is not None:
            lines.append(f"len: {_length_source(self.length_constraint)};")
        return '\n'.join(lines) + '\n'

    def __str__(self):
        return str(self.equation)


def _length_source(phi):
    """Render a length formula back into input syntax."""
    def lin(t):
        parts = [(c, f"|{v}|" if abs(c) == 1 else f"{abs(c)}*|{v}|") for v, c in t.coeffs]
        if t.constant or not parts:
            parts.append((t.constant, str(abs(t.constant))))
        text = ''
        for i, (c, body) in enumerate(parts):
            if i == 0:
                text = f"-{body}" if c < 0 else body
            else:
                text += f" - {body}" if c < 0 else f" + {body}"
        return text

    kind = type(phi).__name__
    if kind == 'Le':
        return f"{lin(phi.lhs)} <= {lin(phi.rhs)}"
    if kind == 'Eq':
        return f"{lin(phi.lhs)} = {lin(phi.rhs)}"
    if kind == 'And':
        return ' && '.join(f"({_length_source(p)})" for p in phi.parts) if phi.parts else 'true'
    if kind == 'Or':
        return ' || '.join(f"({_length_source(p)})" for p in phi.parts) if phi.parts else 'false'
    raise ValueError(f"length constraints cannot contain {kind}")


def _position(text, offset):
    line = text.count('\n', 0, offset) + 1
    column = offset - (text.rfind('\n', 0, offset) + 1) + 1
    return line, column


def _clauses(text):
    """Split the source into (keyword, body, body offset) at top-level ';'."""
    clauses = []
    start = 0
    in_regex = False
    for i, c in enumerate(text):
        if c == '/':
            in_regex = not in_regex
        elif c == ';' and not in_regex:
            clauses.append((start, i))
            start = i + 1
    if text[start:].strip():
        clauses.append((start, len(text)))
    for begin, end in clauses:
        chunk = text[begin:end]
        if not chunk.strip():
            continue
        match = re.match(r'\s*([A-Za-z]+)\s*:', chunk)
        if not match:
            line, column = _position(text, begin + len(chunk) - len(chunk.lstrip()))
            raise ParseError("expected '<keyword>:'", line, column)
        yield match.group(1), chunk[match.end():], begin + match.end()


_LEN_TOKEN = re.compile(
    r'\s*(\|[A-Za-z_][A-Za-z0-9_]*\||\|\||&&|<=|>=|[()*+\-=<>]|\d+|true|false)'
)


class _LengthParser:
    """Recursive descent for Presburger length constraints over ``|x|``."""

    def __init__(self, body, variables):
        self.body = body
        self.variables = variables
        self.tokens = []
        pos = 0
        while pos < len(body):
            if body[pos:].strip() == '':
                break
            match = _LEN_TOKEN.match(body, pos)
            if not match:
                self.offset = pos + len(body[pos:]) - len(body[pos:].lstrip())
                raise self.error("unexpected character", self.offset)
            self.tokens.append((match.group(1), match.start(1)))
            pos = match.end()
        self.index = 0

    def error(self, message, offset=None):
        if offset is None:
            offset = self.tokens[self.index][1] if self.index < len(self.tokens) else len(self.body)
        error = ValueError(message)
        error.offset = offset
        return error

    def peek(self):
        return self.tokens[self.index][0] if self.index < len(self.tokens) else None

    def take(self, expected=None):
        token = self.peek()
        if token is None or (expected is not None and token != expected):
            raise self.error(f"expected {expected!r}" if expected else "unexpected end")
        self.index += 1
        return token

    def parse(self):
        phi = self.disjunction()
        if self.peek() is not None:
            raise self.error(f"unexpected {self.peek()!r}")
        return phi

    def disjunction(self):
        parts = [self.conjunction()]
        while self.peek() == '||':
            self.take()
            parts.append(self.conjunction())
        return disj(*parts)

    def conjunction(self):
        parts = [self.atom()]
        while self.peek() == '&&':
            self.take()
            parts.append(self.atom())
        return conj(*parts)

    def atom(self):
        token = self.peek()
        if token == 'true':
            self.take()
            return TRUE
        if token == 'false':
            self.take()
            return FALSE
        if token == '(':
            saved = self.index
            try:
                self.take('(')
                phi = self.disjunction()
                self.take(')')
                if self.peek() not in ('<=', '>=', '=', '<', '>', '+', '-', '*'):
                    return phi
            except ValueError:
                pass
            self.index = saved
        left = self.sum()
        op = self.peek()
        builders = {'=': eq, '<=': le, '>=': ge, '<': lt, '>': gt}
        if op not in builders:
            raise self.error("expected a comparison")
        self.take()
        return builders[op](left, self.sum())

    def sum(self):
        sign = 1
        if self.peek() == '-':
            self.take()
            sign = -1
        total = sign * self.product()
        while self.peek() in ('+', '-'):
            op = self.take()
            total = total + self.product() if op == '+' else total - self.product()
        return total

    def product(self):
        result = self.factor()
        while self.peek() == '*':
            self.take()
            other = self.factor()
            if result.coeffs and other.coeffs:
                raise self.error("length constraints must be linear")
            result = result * other.constant if other.coeffs == () else other * result.constant
        return result

    def factor(self):
        token = self.peek()
        if token is None:
            raise self.error("unexpected end")
        if token.isdigit():
            self.take()
            return term(int(token))
        if token.startswith('|') and len(token) > 2 and token != '||':
            name = token[1:-1]
            if name not in self.variables:
                raise self.error(f"undeclared variable {name}")
            self.take()
            return term(name)
        if token == '(':
            self.take()
            inner = self.sum()
            self.take(')')
            return inner
        raise self.error(f"unexpected {token!r}")


def parse_problem(text):
    """Parse a problem source.

    Clauses are ``vars:``, ``alpha:`` (optional extra constants), ``eq:``,
    ``re: x in /regex/`` and ``len:``, each terminated by ``;``.

    Raises:
        ParseError: on syntax errors, undeclared symbols or constraints on
            undeclared variables, with line and column
    """
    variables = None
    extra_alphabet = set()
    equation_text = None
    regexes = []
    lengths = []
    for keyword, body, offset in _clauses(text):
        where = _position(text, offset)
        if keyword == 'vars':
            if variables is not None:
                raise ParseError("duplicate vars clause", *where)
            variables = tuple(body.split())
            bad = [v for v in variables if not re.fullmatch(r'[A-Za-z_][A-Za-z0-9_]*', v)]
            if bad:
                raise ParseError(f"invalid variable name {bad[0]!r}", *where)
            if len(set(variables)) != len(variables):
                raise ParseError("variable declared twice", *where)
        elif keyword == 'alpha':
            for token in body.split():
                if len(token) != 1:
                    raise ParseError(f"constants are single characters, got {token!r}", *where)
                extra_alphabet.add(token)
        elif keyword == 'eq':
            if equation_text is not None:
                raise ParseError("only a single equation is supported", *where)
            equation_text = (body, offset)
        elif keyword == 're':
            regexes.append((body, offset))
        elif keyword == 'len':
            lengths.append((body, offset))
        else:
            raise ParseError(f"unknown clause {keyword!r}", *_position(text, offset - len(keyword) - 1))

    if variables is None:
        variables = ()
    if equation_text is None:
        raise ParseError("missing eq clause", *_position(text, len(text)))

    body, offset = equation_text
    if body.count('=') != 1:
        raise ParseError("equation needs exactly one '='", *_position(text, offset))
    sides = []
    cursor = offset
    for part in body.split('='):
        symbols = []
        for match in re.finditer(r'\S+', part):
            token = match.group()
            if token in variables:
                symbols.append(Symbol.var(token))
            elif len(token) == 1:
                symbols.append(Symbol.const(token))
            else:
                raise ParseError(f"undeclared symbol {token!r}", *_position(text, cursor + match.start()))
        sides.append(tuple(symbols))
        cursor += len(part) + 1
    equation = Equation(*sides)

    patterns = []
    for body, offset in regexes:
        match = re.fullmatch(r'\s*(\S+)\s+in\s+/(.*)/\s*', body, re.S)
        if not match:
            raise ParseError("expected 're: <var> in /<regex>/'", *_position(text, offset))
        variable, pattern = match.groups()
        if variable not in variables:
            raise ParseError(f"constraint on undeclared variable {variable!r}", *_position(text, offset + match.start(1)))
        patterns.append((variable, pattern, offset + match.start(2)))

    compiled = []
    for variable, pattern, offset in patterns:
        try:
            compiled.append((variable, compile_regex(pattern)))
        except ValueError as e:
            raise ParseError(str(e), *_position(text, offset + getattr(e, 'offset', 0)))

    alphabet = set(equation.constants()) | extra_alphabet
    for _, nfa in compiled:
        alphabet |= nfa.alphabet
    clash = alphabet & set(variables)
    if clash:
        raise ParseError(f"variables used as constants: {sorted(clash)}", *_position(text, 0))
    alphabet = frozenset(alphabet)
    constraints = tuple((v, dataclasses.replace(nfa, alphabet=alphabet)) for v, nfa in compiled)

    length_constraint = None
    for body, offset in lengths:
        try:
            phi = _LengthParser(body, set(variables)).parse()
        except ValueError as e:
            raise ParseError(str(e), *_position(text, offset + getattr(e, 'offset', 0)))
        length_constraint = phi if length_constraint is None else conj(length_constraint, phi)

    problem = Problem(
        alphabet=alphabet,
        variables=variables,
        equation=equation,
        regular_constraints=constraints,
        length_constraint=length_constraint,
        regex_sources=tuple((v, p) for v, p, _ in patterns),
    )
    logger.debug("parsed problem %s over alphabet %s", equation, sorted(alphabet))
    return problem


def load_problem(path):
    with open(path, encoding='utf-8') as handle:
        return parse_problem(handle.read())
