import itertools
import unittest

from qwe.corpus import problem, quadratic, regular_oriented
from qwe.counters import (
    Config, Guard, GuardKind, Reachability, build_ca, build_ca_reg, guard_for, reach_eps, step,
)
from qwe.nielsen import TRIVIAL, successors
from qwe.oracle import length_abstraction
from qwe.regnielsen import FINAL
from qwe.terms import make_equation, parse_problem


class TestGuards(unittest.TestCase):
    """Test cases for guarded counter updates."""

    def setUp(self):
        """Set up test environment."""
        self.index = {'x': 0, 'y': 1}

    def test_identity(self):
        """Test the identity guard."""
        self.assertEqual(Guard.identity().apply((3, 4), self.index), (3, 4))
        self.assertEqual(str(Guard.identity()), 'ID')

    def test_zero(self):
        """Test the zero test."""
        guard = Guard.zero('x')
        self.assertEqual(guard.apply((0, 4), self.index), (0, 4))
        self.assertIsNone(guard.apply((1, 4), self.index))
        self.assertEqual(str(guard), 'ZERO(x)')

    def test_decrement(self):
        """Test the decrement."""
        guard = Guard.dec('y')
        self.assertEqual(guard.apply((0, 4), self.index), (0, 3))
        self.assertIsNone(guard.apply((0, 0), self.index))
        self.assertTrue(guard.reduces)

    def test_subtract(self):
        """Test subtracting one counter from another."""
        guard = Guard.sub('y', 'x')
        self.assertEqual(guard.apply((2, 5), self.index), (2, 3))
        self.assertEqual(guard.apply((5, 5), self.index), (5, 0))
        self.assertIsNone(guard.apply((6, 5), self.index))
        self.assertIsNone(guard.apply((0, 5), self.index))
        self.assertEqual(str(guard), 'SUB(y,x)')

    def test_invalid_guards(self):
        """Test guards without counters."""
        with self.assertRaises(ValueError):
            Guard(GuardKind.DEC)
        with self.assertRaises(ValueError):
            Guard.sub('x', 'x')

    def test_guard_for_steps(self):
        """Test the guard of each rewrite rule."""
        guards = {s.tag: guard_for(s) for s in successors(make_equation('xy=yz', 'xyz'))}
        self.assertEqual(guards['ε:x'], Guard.zero('x'))
        self.assertEqual(guards['P4(x≼y)'], Guard.sub('y', 'x'))
        self.assertEqual(guards['P4(y≼x)'], Guard.sub('x', 'y'))
        guards = {s.tag: guard_for(s) for s in successors(make_equation('xab=abx', 'x'))}
        self.assertEqual(guards['P3(x,a)'], Guard.dec('x'))
        (p1,) = successors(make_equation('ab=ab', ''))
        self.assertEqual(guard_for(p1), Guard.identity())

    def test_negative_config(self):
        """Test that counter values are natural numbers."""
        with self.assertRaises(ValueError):
            Config(TRIVIAL, (-1,))


class TestCounterSystems(unittest.TestCase):
    """Test cases for counter systems built from proof graphs."""

    def test_self_loop(self):
        """Test the subtracting self-loop of xy=yz."""
        eq = make_equation('xy=yz', 'xyz')
        cs = build_ca(eq)
        self.assertEqual(cs.counters, ('x', 'y', 'z'))
        self.assertEqual(cs.final, TRIVIAL)
        loops = [t for t in cs.outgoing(eq) if t.target == eq]
        self.assertEqual(len(loops), 1)
        self.assertEqual(loops[0].guard, Guard.sub('y', 'x'))

    def test_config_and_step(self):
        """Test configurations and one-step successors."""
        eq = make_equation('xab=abx', 'x')
        cs = build_ca(eq)
        start = cs.config(eq, {'x': 2})
        self.assertEqual(start.values, (2,))
        targets = {(c.state, c.values) for c in step(cs, start)}
        self.assertIn((make_equation('xab=bax', 'x'), (1,)), targets)
        # erasing x is blocked while x is nonzero
        self.assertNotIn(make_equation('ab=ab', ''), {state for state, _ in targets})

    def test_reachability(self):
        """Test reaching the trivial equation."""
        eq = make_equation('xab=abx', 'x')
        cs = build_ca(eq)
        reach = Reachability(cs)
        for n in range(9):
            self.assertEqual(reach.reaches_final(cs.config(eq, {'x': n})), n % 2 == 0, n)
        self.assertTrue(reach_eps(cs, cs.config(eq, {'x': 4})))

    def test_unreachable(self):
        """Test that xa=yb never reaches the trivial equation."""
        cs = build_ca(make_equation('xa=yb', 'xy'))
        self.assertNotIn(TRIVIAL, cs.states)
        self.assertFalse(reach_eps(cs, cs.config(cs.states[0], {'x': 1, 'y': 1})))

    def test_extra_counters(self):
        """Test declared variables absent from the equation."""
        p = problem('xab=abx')
        cs = build_ca(p.equation, ('x', 'w'))
        self.assertEqual(cs.index, {'x': 0, 'w': 1})
        self.assertTrue(reach_eps(cs, cs.config(p.equation, {'x': 2, 'w': 7})))

    def test_json(self):
        """Test the JSON export."""
        cs = build_ca(make_equation('xy=yz', 'xyz'))
        data = cs.to_json()
        self.assertEqual(data['counters'], ['x', 'y', 'z'])
        self.assertEqual(len(data['transitions']), len(cs.transitions))
        self.assertEqual(data['states'][data['final']], 'ε=ε')
        self.assertIn('SUB(y,x)', {t['guard'] for t in data['transitions']})
        graph = cs.to_networkx()
        self.assertEqual(graph.number_of_edges(), len(cs.transitions))

    def test_regular_system(self):
        """Test the counter system over (equation, matrix) states."""
        rcs = build_ca_reg(problem('marked-xz=zy'))
        self.assertEqual(rcs.system.final, FINAL)
        self.assertIn(FINAL, rcs.system.states)
        self.assertTrue(rcs.initials)
        sets = rcs.initials[0].sets
        self.assertEqual(set(sets), {'x', 'y', 'z'})


class TestLengthAbstraction(unittest.TestCase):
    """Reachability of ε=ε agrees with brute-force solution lengths."""

    def assert_agrees(self, p, bound):
        cs = build_ca(p.equation, p.variables)
        sample = length_abstraction(p, bound)
        reach = Reachability(cs)
        for values in itertools.product(range(bound + 1), repeat=len(p.variables)):
            lengths = dict(zip(p.variables, values))
            self.assertEqual(reach.reaches_final(cs.config(p.equation, lengths)), values in sample,
                             f"{p}: {lengths}")

    def test_regular_oriented(self):
        """Test the regular-oriented corpus."""
        for name, p in regular_oriented().items():
            with self.subTest(name=name):
                self.assert_agrees(p, {1: 8, 2: 8, 3: 6}.get(len(p.variables), 4))

    def test_quadratic(self):
        """Test quadratic equations beyond the regular-oriented class."""
        for name, p in quadratic().items():
            with self.subTest(name=name):
                self.assert_agrees(p, 8 if len(p.variables) < 3 else 5)


class TestRegularLengthAbstraction(unittest.TestCase):
    """Reachability in CA(E,S) against brute-force solution lengths under regular constraints."""

    def reachable_lengths(self, p, bound):
        rcs = build_ca_reg(p)
        reach = Reachability(rcs.system)
        found = set()
        for values in itertools.product(range(bound + 1), repeat=len(p.variables)):
            lengths = dict(zip(p.variables, values))
            for choice in rcs.initials:
                sets = choice.sets
                if all(lengths[v] in sets[v] for v in p.variables) and \
                        reach.reaches_final(rcs.system.config(choice.config, lengths)):
                    found.add(values)
                    break
        return found

    def test_single_variable(self):
        """Test problems whose reachable lengths are exactly the solution lengths."""
        for name in ('marked-periodic', 'marked-periodic-unsat'):
            with self.subTest(name=name):
                p = problem(name)
                sample = length_abstraction(p, 8)
                self.assertEqual(self.reachable_lengths(p, 8), set(sample.tuples))
        p = parse_problem("vars: x; eq: a x = x a; re: x in /(aa)+/;")
        self.assertEqual(self.reachable_lengths(p, 8), {(2,), (4,), (6,), (8,)})

    def test_marked_conjugacy(self):
        """Test that every solution length is reachable for the marked conjugacy problems."""
        for name in ('marked-xz=zy', 'marked-xy=yz'):
            with self.subTest(name=name):
                p = problem(name)
                sample = length_abstraction(p, 5)
                self.assertLessEqual(set(sample.tuples), self.reachable_lengths(p, 5))



if __name__ == '__main__':
    unittest.main()
