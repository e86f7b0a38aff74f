"""Command-line interface.

Exit codes: 0 SAT (or success), 2 UNSAT, 3 UNKNOWN, 10 input error,
11 failed model check, 12 exceeded budget.
"""
import json
import logging

import click

from config import Config
from qwe import create_app
from qwe.accel import membership_formula, skeleton_formula
from qwe.counters import build_ca, build_ca_reg
from qwe.errors import BudgetExceeded, ModelCheckError, NotQuadraticError
from qwe.export import (
    counter_system_dot, dump_queries, proof_graph_dot, reg_graph_dot, write_json, write_text,
)
from qwe.flatness import is_flat, skeletons
from qwe.nielsen import TRIVIAL, proof_graph
from qwe.oracle import length_abstraction
from qwe.pad import conj
from qwe.regnielsen import FINAL, reg_graph
from qwe.solver import SAT, UNSAT, check_model, length_constraint, solve
from qwe.terms import load_problem

logger = logging.getLogger(__name__)

EXIT_SAT = 0
EXIT_UNSAT = 2
EXIT_UNKNOWN = 3
EXIT_INPUT = 10
EXIT_CHECK = 11
EXIT_BUDGET = 12

_STATUS_EXIT = {SAT: EXIT_SAT, UNSAT: EXIT_UNSAT}


def _load(ctx, path):
    try:
        return load_problem(path)
    except (OSError, ValueError) as e:
        click.echo(f"{path}: {e}", err=True)
    ctx.exit(EXIT_INPUT)


def _counter_system(problem, settings):
    """Counter system with its initial (state, length sets) pairs and target state."""
    if problem.has_regular_constraints:
        rcs = build_ca_reg(problem, settings.MONOID_CAP, settings.NODE_BUDGET)
        return rcs.system, [(c.config, c.sets) for c in rcs.initials], FINAL
    cs = build_ca(problem.equation, problem.variables, settings.NODE_BUDGET)
    return cs, [(problem.equation, None)], TRIVIAL


def _emit(ctx, data, text):
    if ctx.obj['json']:
        click.echo(json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False))
    else:
        click.echo(text)


@click.group()
@click.option('--bound', type=click.IntRange(min=0), help='Box of the bounded model search.')
@click.option('--node-budget', type=click.IntRange(min=1), help='Largest number of graph nodes to explore.')
@click.option('--monoid-cap', type=click.IntRange(min=1), help='Largest realizable monoid.')
@click.option('--skeleton-limit', type=click.IntRange(min=1), help='Largest number of skeletons per initial state.')
@click.option('--reproducible', is_flag=True, help='Omit timings from the output.')
@click.option('--json', 'as_json', is_flag=True, help='Print JSON.')
@click.option('-v', '--verbose', count=True, help='-v for progress, -vv for details.')
@click.pass_context
def cli(ctx, bound, node_budget, monoid_cap, skeleton_limit, reproducible, as_json, verbose):
    """Decide quadratic word equations with regular and length constraints."""
    level = {0: None, 1: 'INFO'}.get(verbose, 'DEBUG')
    settings = create_app(
        Config,
        search_bound=bound,
        node_budget=node_budget,
        monoid_cap=monoid_cap,
        skeleton_limit=skeleton_limit,
        reproducible=reproducible or None,
        log_level=level,
    )
    ctx.obj = {'settings': settings, 'json': as_json}


@cli.command('solve')
@click.argument('path', type=click.Path(dir_okay=False))
@click.pass_context
def solve_command(ctx, path):
    """Decide satisfiability of a problem file."""
    settings = ctx.obj['settings']
    problem = _load(ctx, path)
    try:
        verdict = solve(problem, settings)
    except NotQuadraticError as e:
        click.echo(str(e), err=True)
        ctx.exit(EXIT_INPUT)
    data = verdict.to_json(settings.REPRODUCIBLE)
    lines = [verdict.status]
    if verdict.model is not None:
        lines.append('lengths: ' + ', '.join(f"|{v}|={n}" for v, n in verdict.model.items()))
    if verdict.witness is not None:
        lines.append('witness: ' + ', '.join(f"{v}={w!r}" for v, w in verdict.witness.items()))
    if verdict.diagnostics.get('reason'):
        lines.append(f"reason: {verdict.diagnostics['reason']}")
    _emit(ctx, data, '\n'.join(lines))
    ctx.exit(_STATUS_EXIT.get(verdict.status, EXIT_UNKNOWN))


@cli.command('graph')
@click.argument('path', type=click.Path(dir_okay=False))
@click.option('--dot', 'dot_path', required=True, type=click.Path(dir_okay=False), help='DOT output file.')
@click.option('--regular', is_flag=True, help='Draw the (E, f) graph of the regular constraints.')
@click.pass_context
def graph_command(ctx, path, dot_path, regular):
    """Write the proof graph of a problem as DOT."""
    settings = ctx.obj['settings']
    problem = _load(ctx, path)
    try:
        if regular:
            graph = reg_graph(problem, settings.MONOID_CAP, settings.NODE_BUDGET)
            text = reg_graph_dot(graph)
        else:
            graph = proof_graph(problem.equation, settings.NODE_BUDGET)
            text = proof_graph_dot(graph)
    except NotQuadraticError as e:
        click.echo(str(e), err=True)
        ctx.exit(EXIT_INPUT)
    except BudgetExceeded as e:
        click.echo(str(e), err=True)
        ctx.exit(EXIT_BUDGET)
    result = write_text(dot_path, text)
    if not result['success']:
        click.echo(result['error'], err=True)
        ctx.exit(EXIT_INPUT)
    data = {'nodes': len(graph.nodes), 'edges': len(graph.edges), 'overflow': graph.overflow, 'dot': dot_path}
    _emit(ctx, data, f"{len(graph.nodes)} nodes, {len(graph.edges)} edges -> {dot_path}")
    if graph.overflow:
        ctx.exit(EXIT_BUDGET)


@cli.command('ca')
@click.argument('path', type=click.Path(dir_okay=False))
@click.option('--dot', 'dot_path', type=click.Path(dir_okay=False), help='DOT output file.')
@click.option('--json', 'json_path', type=click.Path(dir_okay=False), help='JSON output file.')
@click.pass_context
def ca_command(ctx, path, dot_path, json_path):
    """Build the counter system of a problem and report its flatness."""
    settings = ctx.obj['settings']
    problem = _load(ctx, path)
    try:
        cs, _, _ = _counter_system(problem, settings)
    except NotQuadraticError as e:
        click.echo(str(e), err=True)
        ctx.exit(EXIT_INPUT)
    except BudgetExceeded as e:
        click.echo(str(e), err=True)
        ctx.exit(EXIT_BUDGET)
    report = is_flat(cs, settings.CYCLE_CAP)
    for target, write in ((dot_path, lambda p: write_text(p, counter_system_dot(cs, report))),
                          (json_path, lambda p: write_json(p, cs.to_json()))):
        if target:
            result = write(target)
            if not result['success']:
                click.echo(result['error'], err=True)
                ctx.exit(EXIT_INPUT)
    data = {'states': len(cs.states), 'transitions': len(cs.transitions), 'flatness': report.to_dict()}
    text = f"{len(cs.states)} states, {len(cs.transitions)} transitions, {report.status.value}"
    if report.witness is not None:
        text += f" (state {report.witness} lies on two cycles)"
    _emit(ctx, data, text)
    if cs.overflow:
        ctx.exit(EXIT_BUDGET)


@cli.command('lenabs')
@click.argument('path', type=click.Path(dir_okay=False))
@click.option('--bound', 'bound', type=click.IntRange(min=0), default=6, show_default=True)
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), help='CSV (or .json) output file.')
@click.pass_context
def lenabs_command(ctx, path, bound, out_path):
    """Sample the length abstraction of a problem by brute force."""
    problem = _load(ctx, path)
    sample = length_abstraction(problem, bound)
    if out_path:
        if out_path.endswith('.json'):
            result = write_json(out_path, sample.to_json())
        else:
            result = write_text(out_path, sample.to_csv())
        if not result['success']:
            click.echo(result['error'], err=True)
            ctx.exit(EXIT_INPUT)
    _emit(ctx, sample.to_json(), f"{len(sample)} length tuples up to {bound}")


@cli.command('accelerate')
@click.argument('path', type=click.Path(dir_okay=False))
@click.option('--skeletons', 'directory', required=True, type=click.Path(file_okay=False),
              help='Directory receiving one SMT-LIB script per skeleton.')
@click.pass_context
def accelerate_command(ctx, path, directory):
    """Dump the skeleton formulas of a flat counter system as SMT-LIB."""
    settings = ctx.obj['settings']
    problem = _load(ctx, path)
    try:
        cs, sources, target = _counter_system(problem, settings)
    except NotQuadraticError as e:
        click.echo(str(e), err=True)
        ctx.exit(EXIT_INPUT)
    except BudgetExceeded as e:
        click.echo(str(e), err=True)
        ctx.exit(EXIT_BUDGET)
    report = is_flat(cs, settings.CYCLE_CAP)
    if not report.flat or not report.reducing:
        click.echo(f"counter system is {report.status.value}; nothing to accelerate", err=True)
        ctx.exit(EXIT_UNKNOWN)
    theta = length_constraint(problem)
    queries = []
    truncated = False
    for source, sets in sources:
        search = skeletons(cs, source, target, settings.SKELETON_LIMIT, report)
        truncated = truncated or search.truncated
        eta = membership_formula(sets)
        for sk in search:
            queries.append((sk, conj(skeleton_formula(sk, theta, cs.counters, settings.LONG_CYCLE), eta)))
    result = dump_queries(directory, queries, comment=str(problem))
    if not result['success']:
        click.echo(result['error'], err=True)
        ctx.exit(EXIT_INPUT)
    _emit(ctx, {'skeletons': len(queries), 'truncated': truncated, 'paths': result['paths']},
          f"{len(queries)} skeleton formulas -> {directory}")
    if truncated:
        ctx.exit(EXIT_BUDGET)


@cli.command('check')
@click.argument('path', type=click.Path(dir_okay=False))
@click.option('--model', 'model_path', required=True, type=click.Path(dir_okay=False),
              help='JSON word assignment or SMT-LIB length model.')
@click.pass_context
def check_command(ctx, path, model_path):
    """Check a model against a problem."""
    settings = ctx.obj['settings']
    problem = _load(ctx, path)
    try:
        with open(model_path, encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        click.echo(str(e), err=True)
        ctx.exit(EXIT_INPUT)
    try:
        result = check_model(problem, text, settings)
    except ModelCheckError as e:
        click.echo(f"model rejected: {e}", err=True)
        ctx.exit(EXIT_CHECK)
    except NotQuadraticError as e:
        click.echo(str(e), err=True)
        ctx.exit(EXIT_INPUT)
    except BudgetExceeded as e:
        click.echo(str(e), err=True)
        ctx.exit(EXIT_BUDGET)
    _emit(ctx, result, f"model accepted ({result['kind']})")
