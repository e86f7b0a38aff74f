import random
import subprocess
import tempfile
import unittest
from unittest.mock import patch, MagicMock

from config import Config
from qwe import create_app
from qwe.corpus import WORKED, problem
from qwe.errors import ModelCheckError, NotQuadraticError
from qwe.oracle import enumerate_solutions
from qwe.pad import render_model
from qwe.solver import (
    SAT, UNSAT, Verdict, check_model, default_bound, length_constraint, run_external_solver,
    solve, verify_witness,
)
from qwe.terms import load_problem, parse_problem


def random_bounded_problem(rng):
    """Source of a regular-oriented problem whose length constraint bounds every variable."""
    variables = 'uvwxyz'[:rng.randint(1, 6)]
    sides = [[], []]
    for v in variables:
        for i in rng.sample((0, 1), rng.randint(1, 2)):
            sides[i].append(v)
    for side in sides:
        for _ in range(rng.randint(0 if side else 1, 2)):
            side.insert(rng.randint(0, len(side)), rng.choice('ab'))
    bounds = ' && '.join(f"|{v}| <= {rng.randint(0, 3)}" for v in variables)
    return (f"vars: {' '.join(variables)}; alpha: a b; "
            f"eq: {' '.join(sides[0])} = {' '.join(sides[1])}; len: {bounds};")


class TestConfig(Config):
    """Test configuration."""
    LOG_LEVEL = 'ERROR'
    ARTIFACT_DIR = None
    SMT_SOLVER = None
    SEARCH_BOUND = None


class TestSolve(unittest.TestCase):
    """Test cases for the decision pipeline."""

    def setUp(self):
        """Set up test environment."""
        self.settings = create_app(TestConfig)

    def test_worked_examples(self):
        """Test the expected verdict of every worked example."""
        for name, (_, expected) in WORKED.items():
            with self.subTest(name=name):
                verdict = solve(problem(name), self.settings)
                self.assertEqual(verdict.status, expected, verdict.diagnostics)
                self.assertIn('reason', verdict.diagnostics)
                if verdict.witness is not None:
                    self.assertEqual(verify_witness(problem(name), verdict.witness), [])

    def test_periodic_witness(self):
        """Test that the periodic example comes with a checked witness."""
        verdict = solve(problem('periodic'), self.settings)
        self.assertEqual(verdict.status, SAT)
        self.assertIsNotNone(verdict.witness)
        self.assertEqual(len(verdict.witness['x']) % 2, 0)

    def test_balance_refutation(self):
        """Test that |x| = |z| contradicts the length balance of xaby=yz."""
        verdict = solve(problem('shifted-unsat'), self.settings)
        self.assertEqual(verdict.status, UNSAT)
        self.assertEqual(verdict.diagnostics['reason'], 'length balance contradicts the length constraint')

    def test_unreachable_trivial_equation(self):
        """Test that xa=yb is refuted by its proof graph."""
        verdict = solve(problem('no-solution'), self.settings)
        self.assertEqual(verdict.status, UNSAT)
        self.assertEqual(verdict.diagnostics['reason'], 'ε=ε is unreachable')

    def test_regular_constraints(self):
        """Test the conjugacy problem with marked words."""
        p = parse_problem(
            "vars: x y z; eq: x z = z y; re: x in /#(a|b)*/; re: y in /#(a|b)*/; "
            "len: |x| = 3 && |z| = 6;"
        )
        verdict = solve(p, self.settings)
        self.assertEqual(verdict.status, SAT, verdict.diagnostics)
        self.assertEqual(verdict.model, {'x': 3, 'y': 3, 'z': 6})
        self.assertIsNotNone(verdict.witness)
        self.assertEqual(verify_witness(p, verdict.witness), [])
        self.assertIn('monoid', verdict.diagnostics)

    def test_not_flat_fallback(self):
        """Test that xy=yx is decided by the concrete search."""
        p = parse_problem("vars: x y; alpha: a b; eq: x y = y x; len: |x| = 2 && |y| = 3;")
        verdict = solve(p, self.settings)
        self.assertEqual(verdict.status, SAT)
        self.assertEqual(verdict.model, {'x': 2, 'y': 3})
        self.assertEqual(verify_witness(p, verdict.witness), [])
        self.assertEqual(verdict.diagnostics['fallback_box'], TestConfig.FALLBACK_BOUND)
        self.assertEqual(verdict.diagnostics['flatness']['status'], 'not flat')

    def test_shifted_lengths(self):
        """Test that |z| = |x| + 2 with a bounded x is satisfiable."""
        verdict = solve(problem('shifted-sat'), self.settings)
        self.assertEqual(verdict.status, SAT, verdict.diagnostics)
        self.assertEqual(verdict.model['z'], verdict.model['x'] + 2)
        self.assertLessEqual(verdict.model['x'], 3)

    def test_marked_periodic(self):
        """Test xab=abx under aba* and under b(a|b)*."""
        verdict = solve(problem('marked-periodic'), self.settings)
        self.assertEqual(verdict.status, SAT, verdict.diagnostics)
        self.assertEqual(verdict.witness, {'x': 'ab'})
        verdict = solve(problem('marked-periodic-unsat'), self.settings)
        self.assertEqual(verdict.status, UNSAT, verdict.diagnostics)

    def test_conjugacy_lengths(self):
        """Test that |z| must be a multiple of |x| for marked conjugates."""
        verdict = solve(problem('conjugacy-sat'), self.settings)
        self.assertEqual(verdict.status, SAT, verdict.diagnostics)
        self.assertEqual(verdict.model, {'x': 3, 'y': 3, 'z': 9})
        self.assertEqual(verify_witness(problem('conjugacy-sat'), verdict.witness), [])
        verdict = solve(problem('conjugacy-unsat'), self.settings)
        self.assertEqual(verdict.status, UNSAT, verdict.diagnostics)
        self.assertIsNone(verdict.witness)

    def test_unrealizable_lengths_decided_in_box(self):
        """Test that lengths without a word solution fall back to the length box."""
        verdict = solve(problem('conjugacy-unsat'), self.settings)
        self.assertEqual(verdict.diagnostics['length_box'], {'x': 3, 'y': 3, 'z': 7})
        self.assertEqual(verdict.diagnostics['reason'], 'no solution in the bounded length box')

    def test_length_box_search(self):
        """Test the exhaustive search over a bounded length box."""
        p = parse_problem("vars: x y; alpha: a b; eq: x y = y x; len: |x| = 2 && |y| = 3;")
        verdict = solve(p, create_app(TestConfig, fallback_bound=0))
        self.assertEqual(verdict.status, SAT)
        self.assertEqual(verdict.witness, {'x': 'aa', 'y': 'aaa'})
        self.assertEqual(verdict.diagnostics['reason'], 'solution found in the bounded length box')
        self.assertTrue(verdict.diagnostics['undecided'].startswith('not flat'))
        verdict = solve(p, create_app(TestConfig, fallback_bound=0, box_budget=4))
        self.assertEqual(verdict.status, 'UNKNOWN')
        self.assertNotIn('length_box', verdict.diagnostics)

    def test_random_bounded_problems(self):
        """Test random regular-oriented problems with bounded lengths against word search."""
        rng = random.Random(5)
        for _ in range(50):
            p = parse_problem(random_bounded_problem(rng))
            with self.subTest(problem=p.to_source()):
                verdict = solve(p, self.settings)
                expected = next(enumerate_solutions(p, 3), None) is not None
                self.assertEqual(verdict.status, SAT if expected else UNSAT, verdict.diagnostics)
                if verdict.witness is not None:
                    self.assertEqual(verify_witness(p, verdict.witness), [])

    def test_empty_alphabet(self):
        """Test that an empty alphabet only admits empty words."""
        p = parse_problem("vars: x y; eq: x y = y x;")
        self.assertEqual(p.alphabet, frozenset())
        verdict = solve(p, self.settings)
        self.assertEqual(verdict.status, SAT)
        self.assertEqual(verdict.witness, {'x': '', 'y': ''})
        p = parse_problem("vars: x y; eq: x y = y x; len: |x| >= 1;")
        self.assertEqual(solve(p, self.settings).status, UNSAT)

    def test_not_quadratic(self):
        """Test that a variable occurring three times is rejected."""
        p = parse_problem("vars: x; eq: x x x = a;")
        with self.assertRaises(NotQuadraticError):
            solve(p, self.settings)

    def test_load_problem_file(self):
        """Test solving a problem read from disk."""
        with tempfile.NamedTemporaryFile('w', suffix='.qwe', delete=False, encoding='utf-8') as f:
            f.write("vars: x; eq: x a b = a b x; len: |x| = 4;\n")
        verdict = solve(load_problem(f.name), self.settings)
        self.assertEqual(verdict.status, SAT)
        self.assertEqual(verdict.witness, {'x': 'abab'})

    def test_default_bound(self):
        """Test the search box derived from the problem size."""
        self.assertEqual(default_bound(problem('periodic')), 64)
        big = parse_problem("vars: x; eq: x a b = a b x; len: |x| = 100;")
        self.assertEqual(default_bound(big), 2 * (6 + 100))

    def test_length_constraint(self):
        """Test the length constraint of an empty alphabet."""
        theta = length_constraint(parse_problem("vars: x; eq: x = x;"))
        self.assertEqual(theta.free_variables(), frozenset({'x'}))


class TestVerdict(unittest.TestCase):
    """Test cases for verdict serialization."""

    def test_reproducible_json(self):
        """Test that reproducible output drops timings."""
        verdict = Verdict(SAT, {'x': 0}, {'x': ''}, {'reason': 'r', 'timings': {'total': 0.5}})
        self.assertIn('timings', verdict.to_json()['diagnostics'])
        data = verdict.to_json(reproducible=True)
        self.assertNotIn('timings', data['diagnostics'])
        self.assertEqual(data['status'], 'SAT')
        self.assertIn('timings', verdict.diagnostics)

    def test_solve_records_timings(self):
        """Test that solving records its running time."""
        verdict = solve(problem('periodic'), create_app(TestConfig))
        self.assertIn('total', verdict.diagnostics['timings'])


class TestWitnessChecks(unittest.TestCase):
    """Test cases for witness verification and model checking."""

    def setUp(self):
        """Set up test environment."""
        self.settings = create_app(TestConfig)
        self.periodic = problem('periodic')

    def test_verify_witness(self):
        """Test the reasons a word assignment is rejected."""
        self.assertEqual(verify_witness(self.periodic, {'x': 'ab'}), [])
        self.assertEqual(verify_witness(self.periodic, {}), ['no word given for x'])
        errors = verify_witness(self.periodic, {'x': 'c'})
        self.assertTrue(any(e.startswith('letters outside the alphabet') for e in errors))
        self.assertTrue(any(e.startswith('sides differ') for e in errors))
        marked = problem('marked-xz=zy')
        errors = verify_witness(marked, {'x': 'ab', 'y': 'ab', 'z': ''})
        self.assertIn("x = 'ab' violates its regular constraint", errors)
        bounded = parse_problem("vars: x; eq: x a b = a b x; len: |x| <= 2;")
        errors = verify_witness(bounded, {'x': 'abab'})
        self.assertEqual(errors, ["lengths {'x': 4} violate the length constraint"])

    def test_check_word_model(self):
        """Test checking a JSON word assignment."""
        self.assertEqual(check_model(self.periodic, '{"x": "abab"}', self.settings),
                         {'success': True, 'kind': 'words'})
        with self.assertRaises(ModelCheckError):
            check_model(self.periodic, '{"x": "aba"}', self.settings)
        with self.assertRaises(ModelCheckError):
            check_model(self.periodic, '{"x": 3}', self.settings)

    def test_check_length_model(self):
        """Test checking an SMT-LIB length model."""
        self.assertEqual(check_model(self.periodic, render_model({'x': 4}), self.settings),
                         {'success': True, 'kind': 'lengths'})
        with self.assertRaises(ModelCheckError):
            check_model(self.periodic, render_model({'x': 3}), self.settings)
        with self.assertRaises(ModelCheckError):
            check_model(self.periodic, render_model({'y': 2}), self.settings)
        with self.assertRaises(ModelCheckError):
            check_model(self.periodic, render_model({'x': -2}), self.settings)

    def test_check_length_model_constraint(self):
        """Test that length models must satisfy the length constraint."""
        bounded = parse_problem("vars: x; eq: x a b = a b x; len: |x| <= 2;")
        with self.assertRaises(ModelCheckError):
            check_model(bounded, render_model({'x': 4}), self.settings)


class TestExternalSolver(unittest.TestCase):
    """Test cases for piping queries to an external solver."""

    @patch('qwe.solver.subprocess.run')
    def test_unsat_answer(self, mock_run):
        """Test reading an unsat answer."""
        mock_run.return_value = MagicMock(stdout='unsat\n', stderr='', returncode=0)
        result = run_external_solver('(check-sat)\n', 'z3 -in', timeout=5)
        self.assertEqual(result, {'success': True, 'status': 'unsat', 'model': {}})
        args, kwargs = mock_run.call_args
        self.assertEqual(args[0], ['z3', '-in'])
        self.assertEqual(kwargs['input'], '(check-sat)\n')
        self.assertEqual(kwargs['timeout'], 5)

    @patch('qwe.solver.subprocess.run')
    def test_sat_answer(self, mock_run):
        """Test reading a model."""
        mock_run.return_value = MagicMock(
            stdout='sat\n(\n  (define-fun x () Int 3)\n  (define-fun |x@0| () Int 1)\n)\n',
            stderr='', returncode=0,
        )
        result = run_external_solver('(check-sat)\n', 'z3 -in')
        self.assertTrue(result['success'])
        self.assertEqual(result['status'], 'sat')
        self.assertEqual(result['model'], {'x': 3, 'x@0': 1})

    @patch('qwe.solver.subprocess.run')
    def test_timeout(self, mock_run):
        """Test a solver that does not answer in time."""
        mock_run.side_effect = subprocess.TimeoutExpired(cmd='z3', timeout=1)
        result = run_external_solver('(check-sat)\n', 'z3 -in', timeout=1)
        self.assertEqual(result, {'success': False, 'error': 'solver timed out'})

    @patch('qwe.solver.subprocess.run')
    def test_failures(self, mock_run):
        """Test crashes, missing executables and unexpected answers."""
        mock_run.return_value = MagicMock(stdout='', stderr='boom\n', returncode=1)
        self.assertEqual(run_external_solver('', 'z3 -in'), {'success': False, 'error': 'boom'})
        mock_run.return_value = MagicMock(stdout='garbage\n', stderr='', returncode=0)
        result = run_external_solver('', 'z3 -in')
        self.assertFalse(result['success'])
        self.assertIn('unexpected solver answer', result['error'])
        mock_run.side_effect = FileNotFoundError('no such file: z3')
        result = run_external_solver('', 'z3 -in')
        self.assertFalse(result['success'])


if __name__ == '__main__':
    unittest.main()
