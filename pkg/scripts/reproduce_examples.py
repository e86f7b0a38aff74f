#!/usr/bin/env python3
"""
Worked Examples Reproduction Script

Runs the worked examples end to end and prints a colored report:
1. The periodic equation xab = abx is solvable and its proof graph reaches ε=ε
2. The length abstraction of xaby = yz is |z| = |x| + 2
3. The length abstraction of xaby = yabx is the gcd characterization
4. Which reading of the conjugacy example (xz = zy or xy = yz) matches
   |x| = |y| > 0 and |x| divides |z|
5. The counter system of xy = yx is not flat
6. No divisor-free formula of the gcd family matches xaby = yabx

Usage: python scripts/reproduce_examples.py [--bound N] [--report FILE]
"""

import argparse
import json
import os
import sys
import time

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from qwe import create_app  # noqa: E402
from qwe.corpus import problem  # noqa: E402
from qwe.counters import build_ca  # noqa: E402
from qwe.flatness import is_flat  # noqa: E402
from qwe.nielsen import TRIVIAL, proof_graph  # noqa: E402
from qwe.oracle import (  # noqa: E402
    check_characterization, conjugacy_formula, gcd_characterization, length_abstraction,
    presburger_candidates, separating_tuples,
)
from qwe.pad import eq, term  # noqa: E402
from qwe.solver import SAT, solve  # noqa: E402


# Colors for terminal output
class Colors:
    HEADER = '\033[95m'
    BLUE = '\033[94m'
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    RED = '\033[91m'
    BOLD = '\033[1m'
    END = '\033[0m'

def print_header(text):
    """Print a formatted header"""
    print(f"\n{Colors.HEADER}{Colors.BOLD}=== {text} ==={Colors.END}\n")

def print_step(number, text):
    """Print a formatted step"""
    print(f"{Colors.BLUE}{Colors.BOLD}Step {number}:{Colors.END} {text}")

def print_success(text):
    """Print a success message"""
    print(f"{Colors.GREEN}{Colors.BOLD}✓ {text}{Colors.END}")

def print_error(text):
    """Print an error message"""
    print(f"{Colors.RED}{Colors.BOLD}✗ Error: {text}{Colors.END}")

def print_warning(text):
    """Print a warning message"""
    print(f"{Colors.YELLOW}{Colors.BOLD}! {text}{Colors.END}")

def print_mismatch(report):
    if report.missing:
        print_warning(f"allowed by the formula but unsolvable: {list(report.missing)[:5]}")
    if report.spurious:
        print_warning(f"solvable but rejected by the formula: {list(report.spurious)[:5]}")

def periodic_example(settings):
    verdict = solve(problem('periodic'), settings)
    graph = proof_graph(problem('periodic').equation, settings.NODE_BUDGET)
    ok = verdict.status == SAT and TRIVIAL in graph
    if ok:
        print_success(f"SAT with witness {verdict.witness}; proof graph has {len(graph.nodes)} nodes including ε=ε")
    else:
        print_error(f"expected SAT, got {verdict.status}")
    return ok

def shifted_example(bound):
    phi = eq('z', term('x') + 2)
    report = check_characterization(problem('xaby=yz'), phi, bound)
    if report.empty:
        print_success(f"|z| = |x| + 2 matches at bound {bound}")
    else:
        print_error("length abstraction differs from |z| = |x| + 2")
        print_mismatch(report)
    return report.empty

def gcd_example(bound):
    report = check_characterization(problem('xaby=yabx'), gcd_characterization(), bound)
    if report.empty:
        print_success(f"gcd characterization matches at bound {bound}")
    else:
        print_error("gcd characterization does not match")
        print_mismatch(report)
    return report.empty

def conjugacy_example(bound):
    matching = []
    for name in ('xz=zy', 'xy=yz'):
        report = check_characterization(problem('marked-' + name), conjugacy_formula(), bound)
        if report.empty:
            print_success(f"{name}: matches |x| = |y| > 0 and |x| | |z|")
            matching.append(name)
        else:
            print_warning(f"{name}: {len(report.missing)} missing, {len(report.spurious)} spurious")
    if matching != ['xz=zy']:
        print_error(f"expected only xz=zy to match, got {matching}")
    return matching

def flatness_example(settings):
    cs = build_ca(problem('xy=yx').equation, node_budget=settings.NODE_BUDGET)
    report = is_flat(cs, settings.CYCLE_CAP)
    if report.status.value == 'not flat':
        print_success(f"xy=yx is not flat: state {report.witness} lies on two simple cycles")
        return True
    print_error(f"expected a non-flat system, got {report.status.value}")
    return False

def definability_example(bound):
    sample = length_abstraction(problem('xaby=yabx'), bound)
    separation = separating_tuples(sample, presburger_candidates())
    for name, values in separation.items():
        if values is None:
            print_error(f"{name} is not separated up to {bound}")
        else:
            print_success(f"{name} separated by {values}")
    return all(v is not None for v in separation.values())

def main():
    parser = argparse.ArgumentParser(description='Reproduce the worked examples')
    parser.add_argument('--bound', type=int, default=8, help='oracle bound for length abstractions')
    parser.add_argument('--report', help='write a JSON summary to this file')
    args = parser.parse_args()

    settings = create_app()
    print_header("Worked Examples")
    results = {}
    started = time.time()

    steps = [
        ('periodic', "Solving xab = abx", lambda: periodic_example(settings)),
        ('shifted', "Length abstraction of xaby = yz", lambda: shifted_example(min(args.bound, 6))),
        ('gcd', "Length abstraction of xaby = yabx", lambda: gcd_example(args.bound)),
        ('conjugacy', "Conjugacy under x, y in #(a+b)*", lambda: conjugacy_example(args.bound)),
        ('flatness', "Flatness of xy = yx", lambda: flatness_example(settings)),
        ('definability', "Divisor-free candidates for xaby = yabx", lambda: definability_example(args.bound)),
    ]
    for number, (key, title, run) in enumerate(steps, start=1):
        print_step(number, title)
        results[key] = run()

    elapsed = time.time() - started
    success = all(bool(v) for v in results.values()) and results['conjugacy'] == ['xz=zy']
    if success:
        print_header("All examples reproduced")
    else:
        print_header("Some examples failed")
    print(f"Elapsed: {elapsed:.1f}s")

    if args.report:
        with open(args.report, 'w', encoding='utf-8') as f:
            json.dump({'bound': args.bound, 'results': results, 'success': success}, f, indent=2)
        print(f"Report saved to {args.report}")
    return 0 if success else 1

if __name__ == "__main__":
    sys.exit(main())
