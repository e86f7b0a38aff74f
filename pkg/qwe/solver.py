"""The decision pipeline: from a parsed problem to a SAT / UNSAT / UNKNOWN verdict.

UNSAT is only reported when it is certain:

* no consistent initial configuration exists, or ε=ε is unreachable in a
  fully explored graph;
* the length-balance condition together with the length constraint has no
  model in an exhaustive bounded search;
* the system is flat, every skeleton was examined and every skeleton search
  was exhaustive (or refuted by the external solver);
* the length constraint bounds every variable and the exhaustive word search
  over that box finds no solution.
"""
import itertools
import json
import logging
import shlex
import subprocess
import time
from dataclasses import dataclass, field
from typing import Dict, Optional

from qwe import create_app
from qwe.accel import FlatSat, NoModelFound, decide_flat
from qwe.counters import Reachability, build_ca, build_ca_reg
from qwe.errors import BudgetExceeded, ModelCheckError, NotQuadraticError
from qwe.export import dump_queries
from qwe.flatness import is_flat
from qwe.nielsen import TRIVIAL, check_solution
from qwe.oracle import find_solution
from qwe.pad import (
    And, Div, Eq, Le, Or, Exists, bounded_sat, conj, eq, evaluate, export_smtlib,
    parse_smtlib_model, upper_bounds,
)
from qwe.regnielsen import FINAL
from qwe.terms import classify

logger = logging.getLogger(__name__)

SAT = 'SAT'
UNSAT = 'UNSAT'
UNKNOWN = 'UNKNOWN'


@dataclass
class Verdict:
    status: str
    model: Optional[Dict[str, int]] = None
    witness: Optional[Dict[str, str]] = None
    diagnostics: Dict = field(default_factory=dict)

    def to_json(self, reproducible=False):
        diagnostics = dict(self.diagnostics)
        if reproducible:
            diagnostics.pop('timings', None)
        return {
            'status': self.status,
            'model': self.model,
            'witness': self.witness,
            'diagnostics': diagnostics,
        }


def _constants(phi):
    if isinstance(phi, (Le, Eq)):
        return abs(phi.lhs.constant) + abs(phi.rhs.constant)
    if isinstance(phi, Div):
        return abs(phi.divisor.constant) + abs(phi.dividend.constant)
    if isinstance(phi, (And, Or)):
        return sum(_constants(p) for p in phi.parts)
    if isinstance(phi, Exists):
        return _constants(phi.body)
    return 0


def default_bound(problem):
    """Search box derived from the equation length and the length constraint."""
    size = problem.equation.length + _constants(problem.length_formula())
    return max(2 * size, 64)


def length_constraint(problem):
    """The length constraint, forcing empty words over an empty alphabet."""
    theta = problem.length_formula()
    if not problem.alphabet:
        theta = conj(theta, *(eq(v, 0) for v in problem.variables))
    return theta


def verify_witness(problem, sigma):
    """Reasons why ``sigma`` is not a solution of ``problem``; empty if it is."""
    errors = []
    missing = [v for v in problem.variables if v not in sigma]
    if missing:
        return [f"no word given for {', '.join(missing)}"]
    stray = sorted({c for w in sigma.values() for c in w} - set(problem.alphabet))
    if stray:
        errors.append(f"letters outside the alphabet: {' '.join(stray)}")
    if not check_solution(problem.equation, sigma):
        left, right = problem.equation.image(sigma)
        errors.append(f"sides differ: {left!r} != {right!r}")
    for variable, _ in problem.regular_constraints:
        if not problem.constraint_holds(variable, sigma[variable]):
            errors.append(f"{variable} = {sigma[variable]!r} violates its regular constraint")
    lengths = {v: len(w) for v, w in sigma.items() if v in problem.variables}
    if not evaluate(problem.length_formula(), lengths):
        errors.append(f"lengths {lengths} violate the length constraint")
    return errors


def run_external_solver(script, command, timeout=60):
    """Pipe an SMT-LIB script to an external solver.

    Returns:
        {'success': True, 'status': 'sat'|'unsat'|'unknown', 'model': {...}}
        or {'success': False, 'error': ...}
    """
    try:
        process = subprocess.run(
            shlex.split(command),
            input=script,
            capture_output=True,
            text=True,
            timeout=timeout,
        )
    except subprocess.TimeoutExpired:
        logger.warning("external solver timed out after %ds", timeout)
        return {'success': False, 'error': 'solver timed out'}
    except OSError as e:
        return {'success': False, 'error': str(e)}

    if process.returncode != 0 and not process.stdout.strip():
        logger.warning("external solver failed: %s", process.stderr[:200])
        return {'success': False, 'error': process.stderr.strip() or 'solver failed'}

    lines = process.stdout.strip().splitlines()
    status = lines[0].strip() if lines else 'unknown'
    if status not in ('sat', 'unsat', 'unknown'):
        return {'success': False, 'error': f"unexpected solver answer {status!r}"}
    model = parse_smtlib_model(process.stdout) if status == 'sat' else {}
    return {'success': True, 'status': status, 'model': model}


class _Pipeline:
    def __init__(self, problem, settings):
        self.problem = problem
        self.settings = settings
        self.diagnostics = {}
        self.bound = settings.SEARCH_BOUND or default_bound(problem)
        self.theta = length_constraint(problem)
        # every solution satisfies the length balance, so searches may assume it
        self.psi = conj(self.theta, eq(problem.equation.length_balance(), 0))

    def verdict(self, status, reason, model=None):
        self.diagnostics['reason'] = reason
        witness = None
        if model is not None:
            witness = self.reconstruct(model)
            if witness is False:
                self.diagnostics['reason'] = 'witness reconstruction failed for ' + reason
                return Verdict(UNKNOWN, None, None, self.diagnostics)
            # CA(E,S) only bounds lengths at its initial states
            if witness is None and self.problem.has_regular_constraints:
                self.diagnostics['reason'] = 'unwitnessed lengths for ' + reason
                return Verdict(UNKNOWN, None, None, self.diagnostics)
        return Verdict(status, model, witness, self.diagnostics)

    def reconstruct(self, model):
        """A verified solution with the found lengths, None above the witness
        budget, False when none exists."""
        if sum(model.values()) > self.settings.WITNESS_BUDGET:
            self.diagnostics['witness'] = 'skipped: lengths exceed the witness budget'
            return None
        sigma = find_solution(self.problem, model)
        if sigma is None or verify_witness(self.problem, sigma):
            logger.error("no witness with lengths %s", model)
            return False
        return sigma

    def balance_refutes(self):
        balance = conj(eq(self.problem.equation.length_balance(), 0), self.theta)
        result = bounded_sat(balance, self.bound, order=self.problem.variables)
        return not result.satisfiable and result.exhaustive

    def build(self):
        """Counter system, its (state, initial length sets) sources and target."""
        problem = self.problem
        budget = self.settings.NODE_BUDGET
        if not problem.has_regular_constraints:
            cs = build_ca(problem.equation, problem.variables, budget)
            return cs, [(problem.equation, None)], TRIVIAL
        rcs = build_ca_reg(problem, self.settings.MONOID_CAP, budget)
        self.diagnostics['monoid'] = len(rcs.context.monoid)
        self.diagnostics['initial_configurations'] = len(rcs.initials)
        return rcs.system, [(c.config, c.sets) for c in rcs.initials], FINAL

    def run(self):
        verdict = self.decide()
        if verdict.status == UNKNOWN:
            boxed = self.box()
            if boxed is not None:
                return boxed
        return verdict

    def decide(self):
        problem = self.problem
        classification = classify(problem.equation)
        self.diagnostics['classification'] = classification.to_dict()
        self.diagnostics['bound'] = self.bound
        if not classification.quadratic:
            raise NotQuadraticError(f"{problem.equation} is not quadratic")

        if self.balance_refutes():
            return self.verdict(UNSAT, 'length balance contradicts the length constraint')

        try:
            cs, sources, target = self.build()
        except BudgetExceeded as e:
            self.diagnostics['budget'] = str(e)
            return self.verdict(UNKNOWN, 'monoid closure exceeded its cap')
        self.diagnostics['states'] = len(cs.states)
        self.diagnostics['transitions'] = len(cs.transitions)
        complete = not cs.overflow
        if cs.overflow:
            self.diagnostics['budget'] = f"node budget {self.settings.NODE_BUDGET} exhausted"
        if not sources:
            return self.verdict(UNSAT, 'no consistent initial configuration')
        if target not in cs.states and complete:
            return self.verdict(UNSAT, 'ε=ε is unreachable')

        report = is_flat(cs, self.settings.CYCLE_CAP)
        self.diagnostics['flatness'] = report.to_dict()
        if report.flat and report.reducing:
            return self.flat(cs, sources, target, report, complete)
        if self.problem.has_regular_constraints:
            verdict = self.abstraction(sources)
            if verdict is not None:
                return verdict
        logger.info("falling back to concrete search: %s", report.status.value)
        return self.concrete(cs, sources)

    def flat(self, cs, sources, target, report, complete):
        examined = 0
        exhaustive = complete
        undecided = []
        for source, sets in sources:
            result = decide_flat(cs, source, target, self.psi, sets, self.bound,
                                 self.settings.SKELETON_LIMIT, report, self.settings.LONG_CYCLE)
            if isinstance(result, FlatSat):
                examined += result.examined
                self.diagnostics['skeletons_examined'] = examined
                self.diagnostics['skeleton'] = str(result.skeleton)
                return self.verdict(SAT, 'skeleton formula satisfiable', result.model)
            examined += result.examined
            if isinstance(result, NoModelFound):
                exhaustive = exhaustive and result.exhaustive
                undecided.extend(result.undecided)
                if result.partial:
                    self.diagnostics['skeletons_truncated'] = True
        self.diagnostics['skeletons_examined'] = examined
        if exhaustive:
            return self.verdict(UNSAT, 'every skeleton formula is unsatisfiable')
        return self.undecided(cs, undecided, complete)

    def undecided(self, cs, queries, complete):
        self.diagnostics['undecided_skeletons'] = len(queries)
        settings = self.settings
        if settings.ARTIFACT_DIR:
            result = dump_queries(settings.ARTIFACT_DIR, queries, comment=str(self.problem))
            self.diagnostics['artifacts'] = result.get('paths', result.get('error'))
        if not settings.SMT_SOLVER:
            return self.verdict(UNKNOWN, f"no model up to bound {self.bound}")

        refuted = 0
        for sk, phi in queries:
            answer = run_external_solver(export_smtlib(phi, comment=str(sk)),
                                         settings.SMT_SOLVER, settings.SMT_TIMEOUT)
            if not answer['success']:
                continue
            if answer['status'] == 'unsat':
                refuted += 1
            elif answer['status'] == 'sat':
                model = answer['model']
                free = {v: model[v] for v in phi.free_variables() if v in model}
                if len(free) == len(phi.free_variables()) and evaluate(phi, free, settings.WITNESS_BOUND):
                    lengths = {c: free[c] for c in cs.counters}
                    return self.verdict(SAT, 'external solver model', lengths)
                logger.warning("external model for %s does not check", sk)
        self.diagnostics['externally_refuted'] = refuted
        if refuted == len(queries) and complete and not self.diagnostics.get('skeletons_truncated'):
            return self.verdict(UNSAT, 'external solver refuted every undecided skeleton')
        return self.verdict(UNKNOWN, f"no model up to bound {self.bound}")

    def abstraction(self, sources):
        """Decide through CA(E), whose runs include the projections of all
        runs of the regular counter system."""
        problem = self.problem
        cs = build_ca(problem.equation, problem.variables, self.settings.NODE_BUDGET)
        if cs.overflow:
            return None
        report = is_flat(cs, self.settings.CYCLE_CAP)
        if not (report.flat and report.reducing):
            return None
        distinct = {tuple(sorted(sets.items())): sets for _, sets in sources}
        for sets in distinct.values():
            result = decide_flat(cs, problem.equation, TRIVIAL, self.psi, sets, self.bound,
                                 self.settings.SKELETON_LIMIT, report, self.settings.LONG_CYCLE)
            if isinstance(result, FlatSat):
                if sum(result.model.values()) > self.settings.WITNESS_BUDGET:
                    return None
                sigma = find_solution(problem, result.model)
                if sigma is None:
                    return None
                self.diagnostics['abstraction'] = 'solution found from CA(E) lengths'
                return self.verdict(SAT, 'length abstraction model', result.model)
            if not (isinstance(result, NoModelFound) and result.exhaustive):
                return None
        self.diagnostics['abstraction'] = 'CA(E) refutes every initial length set'
        return self.verdict(UNSAT, 'every skeleton formula of CA(E) is unsatisfiable')

    def box(self):
        """Decide every length tuple of a bounded box with the exhaustive oracle."""
        bounds = upper_bounds(self.psi, order=self.problem.variables)
        if bounds is None:
            return None
        limits = [bounds.get(v) for v in self.problem.variables]
        if any(limit is None for limit in limits) or sum(limits) > self.settings.BOX_BUDGET:
            return None
        self.diagnostics['undecided'] = self.diagnostics.get('reason')
        self.diagnostics['length_box'] = dict(zip(self.problem.variables, limits))
        vectors = sorted(itertools.product(*(range(limit + 1) for limit in limits)),
                         key=lambda v: (sum(v), v))
        for values in vectors:
            lengths = dict(zip(self.problem.variables, values))
            if not evaluate(self.psi, lengths, self.settings.WITNESS_BOUND):
                continue
            sigma = find_solution(self.problem, lengths)
            if sigma is not None and not verify_witness(self.problem, sigma):
                self.diagnostics['reason'] = 'solution found in the bounded length box'
                return Verdict(SAT, lengths, sigma, self.diagnostics)
        self.diagnostics['reason'] = 'no solution in the bounded length box'
        return Verdict(UNSAT, None, None, self.diagnostics)

    def concrete(self, cs, sources):
        """Reachability from every initial vector in a small box."""
        box = self.settings.FALLBACK_BOUND
        reach = Reachability(cs)
        variables = cs.counters
        vectors = sorted(itertools.product(range(box + 1), repeat=len(variables)), key=lambda v: (sum(v), v))
        for values in vectors:
            lengths = dict(zip(variables, values))
            if not evaluate(self.theta, lengths):
                continue
            for state, sets in sources:
                if sets is not None and any(lengths[v] not in s for v, s in sets.items()):
                    continue
                if reach.reaches_final(cs.config(state, lengths)):
                    self.diagnostics['fallback_box'] = box
                    return self.verdict(SAT, 'concrete run found', lengths)
        self.diagnostics['fallback_box'] = box
        return self.verdict(UNKNOWN, f"not flat and no run from vectors up to {box}")


def solve(problem, settings=None):
    """Decide ``problem`` and return a Verdict.

    Raises:
        NotQuadraticError: a variable occurs more than twice
    """
    settings = settings or create_app()
    started = time.perf_counter()
    pipeline = _Pipeline(problem, settings)
    verdict = pipeline.run()
    verdict.diagnostics['timings'] = {'total': round(time.perf_counter() - started, 6)}
    logger.info("%s: %s (%s)", problem, verdict.status, verdict.diagnostics.get('reason'))
    return verdict


def check_model(problem, text, settings=None):
    """Check a model given as a JSON word assignment or an SMT-LIB length model.

    Raises:
        ModelCheckError: the model is not a solution, with the reasons
    """
    settings = settings or create_app()
    try:
        data = json.loads(text)
    except json.JSONDecodeError:
        data = None
    if isinstance(data, dict):
        if not all(isinstance(w, str) for w in data.values()):
            raise ModelCheckError("a JSON model maps variables to words")
        errors = verify_witness(problem, data)
        if errors:
            raise ModelCheckError('; '.join(errors))
        return {'success': True, 'kind': 'words'}

    lengths = parse_smtlib_model(text)
    missing = [v for v in problem.variables if v not in lengths]
    if missing:
        raise ModelCheckError(f"model does not assign {', '.join(missing)}")
    lengths = {v: lengths[v] for v in problem.variables}
    if any(n < 0 for n in lengths.values()):
        raise ModelCheckError("lengths are natural numbers")
    if not evaluate(length_constraint(problem), lengths, settings.WITNESS_BOUND):
        raise ModelCheckError(f"lengths {lengths} violate the length constraint")
    pipeline = _Pipeline(problem, settings)
    cs, sources, _ = pipeline.build()
    reach = Reachability(cs)
    for state, sets in sources:
        if sets is not None and any(lengths[v] not in s for v, s in sets.items()):
            continue
        if reach.reaches_final(cs.config(state, lengths)):
            return {'success': True, 'kind': 'lengths'}
    raise ModelCheckError(f"no solution has lengths {lengths}")
