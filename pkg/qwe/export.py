"""File exports: DOT graphs, JSON and CSV dumps, SMT-LIB query directories."""
import json
import logging
import os
import re

import networkx as nx

from qwe.nielsen import TRIVIAL
from qwe.pad import export_smtlib
from qwe.utils import ensure_directory, generate_safe_filename, render_template

logger = logging.getLogger(__name__)

_PALETTE = ('#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b')


def dot_escape(text):
    """Escape a label for a double-quoted DOT string"""
    if text is None:
        return ""
    conv = {'\\': r'\\', '"': r'\"', '\n': r'\n'}
    regex = re.compile('|'.join(re.escape(key) for key in conv))
    return regex.sub(lambda match: conv[match.group()], str(text))


def _node(node_id, label, **attrs):
    return {'id': node_id, 'label': dot_escape(label), 'attrs': sorted(attrs.items())}


def _edge(source, target, label, **attrs):
    return {'source': source, 'target': target, 'label': dot_escape(label), 'attrs': sorted(attrs.items())}


def proof_graph_dot(graph):
    ids = {eq: i for i, eq in enumerate(graph.nodes)}
    nodes = []
    for eq, i in ids.items():
        if eq == TRIVIAL:
            nodes.append(_node(i, eq, shape='doubleoctagon', color='#2ca02c'))
        elif eq == graph.root:
            nodes.append(_node(i, eq, style='bold'))
        else:
            nodes.append(_node(i, eq))
    edges = [_edge(ids[s.source], ids[s.target], s.tag) for s in graph.edges]
    return render_template('graph.dot.j2', name='proof', nodes=nodes, edges=edges, clusters=[])


def reg_graph_dot(graph):
    ids = {cfg: i for i, cfg in enumerate(graph.nodes)}
    initial = {c.config for c in graph.initials}
    nodes = []
    for cfg, i in ids.items():
        if cfg.is_final:
            nodes.append(_node(i, cfg, shape='doubleoctagon', color='#2ca02c'))
        elif cfg in initial:
            nodes.append(_node(i, cfg, style='bold'))
        else:
            nodes.append(_node(i, cfg))
    edges = [_edge(ids[s], ids[t], step.tag) for s, step, t in graph.edges]
    return render_template('graph.dot.j2', name='regular', nodes=nodes, edges=edges, clusters=[])


def counter_system_dot(cs, report=None):
    """Counter system with one dashed cluster per nontrivial strongly connected component.

    When a flatness report is given, transitions on its cycles are drawn in
    the colour of their component.
    """
    graph = cs.to_networkx()
    clusters = []
    colour_of = {}
    components = [c for c in nx.strongly_connected_components(graph)
                  if len(c) > 1 or any(graph.has_edge(n, n) for n in c)]
    for k, component in enumerate(sorted(components, key=min)):
        colour = _PALETTE[k % len(_PALETTE)]
        for n in component:
            colour_of[n] = colour
        clusters.append({'color': colour, 'label': f"SCC {k}", 'nodes': sorted(component)})

    on_cycle = set()
    if report is not None:
        for cycle in report.cycles:
            on_cycle.update(id(t) for t in cycle.transitions)

    nodes = []
    for i, state in enumerate(cs.states):
        if state == cs.final:
            nodes.append(_node(i, state, shape='doubleoctagon'))
        else:
            nodes.append(_node(i, state))
    edges = []
    for t in cs.transitions:
        source, target = cs.state_id(t.source), cs.state_id(t.target)
        if id(t) in on_cycle:
            edges.append(_edge(source, target, t.guard, color=colour_of.get(source, 'black'), penwidth='2'))
        else:
            edges.append(_edge(source, target, t.guard))
    return render_template('graph.dot.j2', name='counters', nodes=nodes, edges=edges, clusters=clusters)


def write_text(path, text):
    """Write text to ``path``, creating parent directories"""
    try:
        directory = os.path.dirname(os.path.abspath(path))
        ensure_directory(directory)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
        logger.info("wrote %s (%d characters)", path, len(text))
        return {'success': True, 'path': path}
    except OSError as e:
        logger.error("could not write %s: %s", path, e)
        return {'success': False, 'error': str(e)}


def write_json(path, data):
    return write_text(path, json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + '\n')


def dump_queries(directory, queries, comment=None):
    """Write one SMT-LIB script per ``(label, formula)`` query.

    Returns:
        A result dictionary with the written paths in order
    """
    try:
        ensure_directory(directory)
    except OSError as e:
        return {'success': False, 'error': str(e)}
    paths = []
    for index, (label, phi) in enumerate(queries):
        header = f"{comment}\n{label}" if comment else str(label)
        path = os.path.join(directory, generate_safe_filename(str(label), '.smt2', index))
        result = write_text(path, export_smtlib(phi, comment=header))
        if not result['success']:
            return result
        paths.append(path)
    return {'success': True, 'paths': paths}
