import itertools
import unittest

from qwe.corpus import regular_oriented
from qwe.errors import Indeterminate, NotQuadraticError
from qwe.nielsen import (
    TRIVIAL, Rule, annotate, check_solution, is_satisfiable, proof_graph, successors,
    trace_solution,
)
from qwe.oracle import enumerate_solutions
from qwe.terms import Problem, classify, make_equation


def canonical(lhs, rhs):
    """Smallest rendering of ``lhs=rhs`` under side swap, a/b swap and variable renaming."""
    variants = []
    for left, right in ((lhs, rhs), (rhs, lhs)):
        for swap in ({}, {'a': 'b', 'b': 'a'}):
            names = {}
            out = []
            for s in left + ('=',) + right:
                if s in ('a', 'b', '='):
                    out.append(swap.get(s, s))
                else:
                    if s not in names:
                        names[s] = 'xyz'[len(names)]
                    out.append(names[s])
            variants.append(''.join(out))
    return min(variants)


def quadratic_equations(variables, max_length):
    """Quadratic equations over a, b and ``variables`` up to ``max_length`` symbols, one per symmetry class."""
    seen = set()
    for n in range(max_length + 1):
        for word in itertools.product('ab' + variables, repeat=n):
            if any(word.count(v) > 2 for v in variables):
                continue
            for cut in range(n + 1):
                key = canonical(word[:cut], word[cut:])
                if key not in seen:
                    seen.add(key)
                    yield make_equation(key, 'xyz')


class TestRewriting(unittest.TestCase):
    """Test cases for single rewrite steps."""

    def test_two_leading_variables(self):
        """Test the rewrites of xy=yz."""
        eq = make_equation('xy=yz', 'xyz')
        steps = {step.tag: step for step in successors(eq)}
        self.assertEqual(set(steps), {'ε:x', 'ε:y', 'P4(x≼y)', 'P4(y≼x)'})
        self.assertEqual(steps['ε:x'].target, make_equation('y=yz', 'yz'))
        self.assertEqual(steps['P4(x≼y)'].target, eq)
        self.assertEqual(str(steps['P4(y≼x)'].target), 'xy=z')
        self.assertEqual(steps['P4(x≼y)'].rule, Rule.P4)

    def test_variable_against_constant(self):
        """Test the rewrites of xab=abx."""
        eq = make_equation('xab=abx', 'x')
        steps = {step.tag: step for step in successors(eq)}
        self.assertEqual(set(steps), {'ε:x', 'P3(x,a)'})
        self.assertEqual(str(steps['ε:x'].target), 'ab=ab')
        self.assertEqual(str(steps['P3(x,a)'].target), 'xab=bax')

    def test_constant_against_variable(self):
        """Test P2 and the erasure of the right variable."""
        eq = make_equation('ax=xa', 'x')
        steps = {step.tag: step for step in successors(eq)}
        self.assertEqual(set(steps), {'ε:x', 'P2(a,x)'})
        self.assertEqual(steps['P2(a,x)'].target, eq)

    def test_equal_heads(self):
        """Test P1 on equal leading constants."""
        eq = make_equation('ab=ab', '')
        (step,) = successors(eq)
        self.assertEqual(step.rule, Rule.P1)
        self.assertEqual(str(step.target), 'b=b')

    def test_dead_end(self):
        """Test different leading constants and a constant against nothing."""
        self.assertEqual(successors(make_equation('a=b', '')), [])
        self.assertEqual(successors(make_equation('a=', '')), [])
        self.assertEqual(successors(TRIVIAL), [])
        (step,) = successors(make_equation('x=', 'x'))
        self.assertEqual(step.target, TRIVIAL)

    def test_not_quadratic(self):
        """Test that a variable occurring three times is rejected."""
        with self.assertRaises(NotQuadraticError):
            successors(make_equation('xxx=a', 'x'))


class TestProofGraph(unittest.TestCase):
    """Test cases for proof graphs."""

    def test_solvable(self):
        """Test that xab=abx reaches the trivial equation."""
        eq = make_equation('xab=abx', 'x')
        graph = proof_graph(eq)
        self.assertIn(TRIVIAL, graph)
        self.assertTrue(graph.complete)
        self.assertEqual(graph.nodes[0], eq)
        self.assertTrue(is_satisfiable(eq))

    def test_unsolvable(self):
        """Test that xa=yb has no solution."""
        eq = make_equation('xa=yb', 'xy')
        self.assertNotIn(TRIVIAL, proof_graph(eq))
        self.assertFalse(is_satisfiable(eq))

    def test_node_budget(self):
        """Test the node budget."""
        eq = make_equation('xa=yb', 'xy')
        graph = proof_graph(eq, node_budget=2)
        self.assertTrue(graph.overflow)
        self.assertEqual(len(graph.nodes), 2)
        with self.assertRaises(Indeterminate):
            is_satisfiable(eq, node_budget=2)

    def test_networkx_export(self):
        """Test the networkx view of a proof graph."""
        graph = proof_graph(make_equation('xy=yx', 'xy'))
        nx_graph = graph.to_networkx()
        self.assertEqual(nx_graph.number_of_nodes(), len(graph.nodes))
        self.assertEqual(nx_graph.number_of_edges(), len(graph.edges))
        self.assertTrue(all(step.source == graph.root for step in graph.steps_from(graph.root)))

    def test_nonquadratic_graph(self):
        """Test that proof graphs need quadratic equations."""
        with self.assertRaises(NotQuadraticError):
            proof_graph(make_equation('xxx=xa', 'x'))


class TestSolutions(unittest.TestCase):
    """Test cases for solution checking and tracing."""

    def test_check_solution(self):
        """Test solutions and non-solutions."""
        eq = make_equation('xab=abx', 'x')
        self.assertTrue(check_solution(eq, {'x': 'abab'}))
        self.assertFalse(check_solution(eq, {'x': 'aba'}))
        with self.assertRaises(ValueError):
            check_solution(eq, {})

    def test_annotate(self):
        """Test carrying a solution across a rewrite."""
        eq = make_equation('xab=abx', 'x')
        steps = {step.tag: step for step in successors(eq)}
        self.assertEqual(annotate(steps['P3(x,a)'], {'x': 'abab'}), {'x': 'bab'})
        self.assertIsNone(annotate(steps['ε:x'], {'x': 'abab'}))
        self.assertEqual(annotate(steps['ε:x'], {'x': ''}), {})
        self.assertIsNone(annotate(steps['P3(x,a)'], {'x': 'bab'}))

    def test_trace(self):
        """Test that a solution leads to the trivial equation."""
        eq = make_equation('xab=abx', 'x')
        path = trace_solution(eq, {'x': 'abab'})
        self.assertEqual(path[-1][0].target, TRIVIAL)
        for step, sigma in path:
            self.assertTrue(check_solution(step.target, sigma))

    def test_trace_commuting(self):
        """Test tracing a solution of xy=yx."""
        eq = make_equation('xy=yx', 'xy')
        path = trace_solution(eq, {'x': 'ab', 'y': 'abab'})
        self.assertEqual(path[-1][0].target, TRIVIAL)
        self.assertEqual(path[0][0].tag, 'P4(x≼y)')

    def test_trace_rejects_non_solution(self):
        """Test tracing a non-solution."""
        with self.assertRaises(ValueError):
            trace_solution(make_equation('xab=abx', 'x'), {'x': 'a'})


class TestOracleAgreement(unittest.TestCase):
    """Proof-graph satisfiability against exhaustive word search."""

    def assert_agrees(self, variables, max_length):
        count = 0
        for eq in quadratic_equations(variables, max_length):
            count += 1
            problem = Problem(frozenset({'a', 'b'}), eq.variables(), eq)
            satisfiable = is_satisfiable(eq)
            found = next(enumerate_solutions(problem, 6), None)
            if satisfiable and found is None:
                found = next(enumerate_solutions(problem, 10), None)
            self.assertEqual(satisfiable, found is not None, str(eq))
            if found is not None:
                self.assertTrue(check_solution(eq, found), (str(eq), found))
        return count

    def test_two_variables(self):
        """Test every equation in x, y with at most six symbols."""
        self.assertGreater(self.assert_agrees('xy', 6), 100)

    def test_three_variables(self):
        """Test every equation in x, y, z with at most five symbols."""
        self.assertGreater(self.assert_agrees('xyz', 5), 100)

    def test_regular_oriented_preserved(self):
        """Test that rewriting keeps every node regular-oriented."""
        for name, p in regular_oriented().items():
            with self.subTest(name=name):
                for step in proof_graph(p.equation).edges:
                    self.assertTrue(
                        classify(step.target).regular_oriented, f"{step.source} => {step.target}")



if __name__ == '__main__':
    unittest.main()
