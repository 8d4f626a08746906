"""Dependency DAG: construction, transitive closure, topological order,
cycle diagnostics, and DOT export.

Edges point dependent -> dependency. All orderings break ties
lexicographically by module name so output is deterministic.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Mapping


class UnknownModule(KeyError):
    """A referenced module is not a node of the graph."""


class DependencyCycle(Exception):
    """The dependency relation contains a directed cycle."""

    def __init__(self, path: list[str]):
        self.path = list(path)
        super().__init__(" -> ".join(self.path))


@dataclass(frozen=True)
class DepGraph:
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def deps_of(self, name: str) -> list[str]:
        return sorted(v for (u, v) in self.edges if u == name)


def build_graph(deps: Mapping[str, Iterable[str]]) -> DepGraph:
    """Build a validated DAG from a name -> deps mapping.

    Raises DependencyCycle (with one concrete cycle path) if the relation
    is cyclic; edge endpoints must all be declared names.
    """
    nodes = tuple(sorted(deps))
    node_set = set(nodes)
    edges = []
    for name in nodes:
        for dep in deps[name]:
            if dep not in node_set:
                raise UnknownModule(dep)
            edges.append((name, dep))
    adj = {n: sorted(d for (u, d) in edges if u == n) for n in nodes}
    _reject_cycles(nodes, adj)
    return DepGraph(nodes, tuple(sorted(set(edges))))


def _reject_cycles(nodes: tuple[str, ...], adj: dict[str, list[str]]) -> None:
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in nodes}
    for root in nodes:
        if color[root] != WHITE:
            continue
        # Iterative DFS keeping the gray path for cycle reporting.
        stack: list[tuple[str, int]] = [(root, 0)]
        path = [root]
        color[root] = GRAY
        while stack:
            node, i = stack[-1]
            if i < len(adj[node]):
                stack[-1] = (node, i + 1)
                nxt = adj[node][i]
                if color[nxt] == GRAY:
                    cycle = path[path.index(nxt) :] + [nxt]
                    raise DependencyCycle(cycle)
                if color[nxt] == WHITE:
                    color[nxt] = GRAY
                    stack.append((nxt, 0))
                    path.append(nxt)
            else:
                color[node] = BLACK
                stack.pop()
                path.pop()


def closure(graph: DepGraph, roots: Iterable[str]) -> list[str]:
    """Roots plus everything transitively reachable, dependency-first.

    The result is a topological order of the induced subgraph: every
    dependency precedes its dependents. Ties break lexicographically.
    """
    node_set = set(graph.nodes)
    root_list = list(roots)
    for r in root_list:
        if r not in node_set:
            raise UnknownModule(r)
    adj: dict[str, list[str]] = {n: [] for n in graph.nodes}
    for u, v in graph.edges:
        adj[u].append(v)
    reachable: set[str] = set()
    frontier = list(root_list)
    while frontier:
        n = frontier.pop()
        if n in reachable:
            continue
        reachable.add(n)
        frontier.extend(adj[n])
    # Kahn's algorithm over the induced subgraph, emitting nodes whose
    # dependencies are already emitted; min-heap gives lexicographic ties.
    pending = {n: sum(1 for v in adj[n] if v in reachable) for n in reachable}
    dependents: dict[str, list[str]] = {n: [] for n in reachable}
    for u, v in graph.edges:
        if u in reachable and v in reachable:
            dependents[v].append(u)
    ready = [n for n, k in pending.items() if k == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        n = heapq.heappop(ready)
        order.append(n)
        for w in dependents[n]:
            pending[w] -= 1
            if pending[w] == 0:
                heapq.heappush(ready, w)
    return order


def to_dot(graph: DepGraph, labels: Mapping[str, str] | None = None) -> str:
    """Emit a deterministic Graphviz digraph.

    `labels` optionally maps node name -> display label (e.g.
    "name@version"). Node statements come first, then edge statements,
    each sorted lexicographically.
    """
    lines = ["digraph deps {"]
    for n in sorted(graph.nodes):
        if labels and n in labels:
            lines.append(f'  "{n}" [label="{labels[n]}"];')
        else:
            lines.append(f'  "{n}";')
    for u, v in sorted(graph.edges):
        lines.append(f'  "{u}" -> "{v}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
