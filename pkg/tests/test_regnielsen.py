import unittest

from qwe.automata import char_matrix
from qwe.corpus import problem
from qwe.errors import BudgetExceeded, Indeterminate
from qwe.nielsen import TRIVIAL
from qwe.regnielsen import (
    FINAL, MonoidContext, RegConfig, initial_choices, is_satisfiable_reg, reg_graph,
    successors_reg,
)
from qwe.terms import make_equation, parse_problem


class TestRegularConfigurations(unittest.TestCase):
    """Test cases for (equation, monoid map) configurations."""

    def setUp(self):
        """Set up test environment."""
        self.problem = problem('marked-xz=zy')
        self.context = MonoidContext(self.problem)

    def test_restriction(self):
        """Test that configurations only keep the equation's variables."""
        m = self.context.monoid.identity
        cfg = RegConfig.of(make_equation('x=y', 'xy'), {'x': m, 'y': m, 'z': m})
        self.assertEqual(set(cfg.mapping), {'x', 'y'})
        self.assertFalse(cfg.is_final)
        self.assertTrue(FINAL.is_final)
        self.assertEqual(FINAL.equation, TRIVIAL)

    def test_choices(self):
        """Test the consistent matrices of constrained and free variables."""
        union = self.context.union
        marked = char_matrix(union, '#ab')
        self.assertIn(marked, self.context.choices('x'))
        self.assertNotIn(char_matrix(union, 'ab'), self.context.choices('x'))
        self.assertIn(char_matrix(union, 'ab'), self.context.choices('z'))
        self.assertEqual(len(self.context.choices('z')), len(self.context.monoid))

    def test_initial_choices(self):
        """Test initial length sets of consistent assignments."""
        choices = initial_choices(self.context)
        self.assertTrue(choices)
        for choice in choices:
            self.assertEqual(set(choice.sets), {'x', 'y', 'z'})
            self.assertNotIn(0, choice.sets['x'])
            self.assertNotIn(0, choice.sets['y'])

    def test_successors_keep_products(self):
        """Test that suffix guesses multiply back to the original matrix."""
        choice = initial_choices(self.context)[0]
        monoid = self.context.monoid
        for step, cfg in successors_reg(choice.config, monoid):
            if step.rule.value in ('P2', 'P3', 'P4'):
                before = choice.config.mapping
                prefix = step.prefix
                left = before[prefix.name] if prefix.is_var else monoid.letters[prefix.name]
                self.assertEqual(left @ cfg.mapping[step.extended], before[step.extended])


class TestRegularSatisfiability(unittest.TestCase):
    """Test cases for satisfiability under regular constraints."""

    def test_conjugacy(self):
        """Test that xz=zy has solutions with marked x and y."""
        self.assertTrue(is_satisfiable_reg(problem('marked-xz=zy')))
        graph = reg_graph(problem('marked-xz=zy'))
        self.assertIn(FINAL, graph.nodes)
        self.assertFalse(graph.overflow)

    def test_incompatible_constraint(self):
        """Test that x commuting with a cannot consist of b's."""
        unsat = parse_problem("vars: x; eq: a x = x a; re: x in /b+/;")
        self.assertFalse(is_satisfiable_reg(unsat))
        sat = parse_problem("vars: x; eq: a x = x a; re: x in /(aa)+/;")
        self.assertTrue(is_satisfiable_reg(sat))

    def test_monoid_cap(self):
        """Test that a tiny monoid cap is reported."""
        with self.assertRaises(BudgetExceeded):
            reg_graph(problem('marked-xz=zy'), monoid_cap=2)
        with self.assertRaises(Indeterminate):
            is_satisfiable_reg(problem('marked-xz=zy'), monoid_cap=2)


if __name__ == '__main__':
    unittest.main()
