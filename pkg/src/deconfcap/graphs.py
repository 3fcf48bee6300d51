"""Graph-level causal reasoning on DAGs.

Junction classification, backdoor-path enumeration, path blocking, and
d-separation.  Everything here is purely graphical; the probabilistic
counterparts live in :mod:`deconfcap.scm` and :mod:`deconfcap.adjust`.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable


class GraphError(ValueError):
    """Malformed graph: cycle, unknown node, or non-adjacent triple."""


class JunctionKind(Enum):
    CHAIN = "chain"
    CONFOUNDER = "confounder"
    COLLIDER = "collider"


@dataclass(frozen=True)
class CausalDag:
    """Directed acyclic graph over named nodes."""

    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]]

    def __post_init__(self) -> None:
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise GraphError("duplicate node names")
        for parent, child in self.edges:
            if parent not in node_set or child not in node_set:
                raise GraphError(f"edge ({parent}, {child}) references unknown node")
            if parent == child:
                raise GraphError(f"self loop on {parent}")
        self.topological_order()  # raises on cycles

    @staticmethod
    def create(nodes: Iterable[str], edges: Iterable[tuple[str, str]]) -> "CausalDag":
        return CausalDag(tuple(nodes), frozenset((p, c) for p, c in edges))

    def parents(self, node: str) -> tuple[str, ...]:
        return tuple(sorted(p for p, c in self.edges if c == node))

    def children(self, node: str) -> tuple[str, ...]:
        return tuple(sorted(c for p, c in self.edges if p == node))

    def neighbors(self, node: str) -> tuple[str, ...]:
        return tuple(sorted(set(self.parents(node)) | set(self.children(node))))

    def has_edge(self, parent: str, child: str) -> bool:
        return (parent, child) in self.edges

    def topological_order(self) -> tuple[str, ...]:
        indeg = {n: 0 for n in self.nodes}
        for _, child in self.edges:
            indeg[child] += 1
        ready = sorted(n for n, d in indeg.items() if d == 0)
        order: list[str] = []
        while ready:
            node = ready.pop(0)
            order.append(node)
            for child in self.children(node):
                indeg[child] -= 1
                if indeg[child] == 0:
                    ready.append(child)
            ready.sort()
        if len(order) != len(self.nodes):
            raise GraphError("graph contains a cycle")
        return tuple(order)

    def descendants(self, node: str) -> frozenset[str]:
        """All nodes reachable from ``node`` by directed edges (excluding it)."""
        seen: set[str] = set()
        stack = list(self.children(node))
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(self.children(cur))
        return frozenset(seen)

    def ancestors(self, node: str) -> frozenset[str]:
        seen: set[str] = set()
        stack = list(self.parents(node))
        while stack:
            cur = stack.pop()
            if cur in seen:
                continue
            seen.add(cur)
            stack.extend(self.parents(cur))
        return frozenset(seen)

    def without_node(self, node: str) -> "CausalDag":
        return CausalDag(
            tuple(n for n in self.nodes if n != node),
            frozenset(e for e in self.edges if node not in e),
        )

    def without_edges_into(self, node: str) -> "CausalDag":
        return CausalDag(self.nodes, frozenset((p, c) for p, c in self.edges if c != node))


@dataclass(frozen=True)
class PathDescriptor:
    """An undirected simple path with its interior-junction classification."""

    nodes: tuple[str, ...]
    junctions: tuple[JunctionKind, ...]
    blocked: bool = field(default=False)

    def __post_init__(self) -> None:
        if len(self.nodes) < 2 or self.nodes[0] == self.nodes[-1]:
            raise GraphError("path endpoints must be two distinct nodes")
        if len(self.junctions) != max(0, len(self.nodes) - 2):
            raise GraphError("one junction kind per interior node required")


def classify_junction(a: str, b: str, c: str, dag: CausalDag) -> JunctionKind:
    """Kind of the a-b-c junction: chain, confounder, or collider."""
    into_b = int(dag.has_edge(a, b)) + int(dag.has_edge(c, b))
    out_of_b = int(dag.has_edge(b, a)) + int(dag.has_edge(b, c))
    if into_b + out_of_b < 2:
        raise GraphError(f"nodes {a}-{b}-{c} are not a connected triple")
    if into_b == 2:
        return JunctionKind.COLLIDER
    if out_of_b == 2:
        return JunctionKind.CONFOUNDER
    return JunctionKind.CHAIN


def _simple_paths(dag: CausalDag, x: str, y: str) -> list[tuple[str, ...]]:
    """All simple undirected paths from x to y, lexicographic by node sequence."""
    paths: list[tuple[str, ...]] = []
    stack: list[tuple[str, ...]] = [(x,)]
    while stack:
        path = stack.pop()
        tail = path[-1]
        if tail == y:
            paths.append(path)
            continue
        for nxt in reversed(dag.neighbors(tail)):
            if nxt not in path:
                stack.append(path + (nxt,))
    return sorted(paths)


def _describe(dag: CausalDag, nodes: tuple[str, ...], conditioning: frozenset[str]) -> PathDescriptor:
    junctions = tuple(
        classify_junction(nodes[i - 1], nodes[i], nodes[i + 1], dag)
        for i in range(1, len(nodes) - 1)
    )
    desc = PathDescriptor(nodes, junctions)
    return PathDescriptor(nodes, junctions, blocked=is_blocked(desc, conditioning, dag))


def backdoor_paths(
    dag: CausalDag, x: str, y: str, conditioning: frozenset[str] = frozenset()
) -> list[PathDescriptor]:
    """All simple paths x..y whose first edge points into x.

    The ``blocked`` field of each descriptor is evaluated against
    ``conditioning`` (empty set by default).
    """
    if x == y:
        raise GraphError("endpoints must differ")
    out = []
    for nodes in _simple_paths(dag, x, y):
        if dag.has_edge(nodes[1], nodes[0]):
            out.append(_describe(dag, nodes, conditioning))
    return out


def is_blocked(path: PathDescriptor, conditioning: frozenset[str], dag: CausalDag) -> bool:
    """True iff some junction on the path stops the information flow.

    Chain and confounder junctions block when their middle node is
    conditioned on; a collider blocks unless it or one of its descendants is
    conditioned on.
    """
    conditioning = frozenset(conditioning)
    for i, kind in enumerate(path.junctions):
        mid = path.nodes[i + 1]
        if kind is JunctionKind.COLLIDER:
            opened = mid in conditioning or bool(dag.descendants(mid) & conditioning)
            if not opened:
                return True
        elif mid in conditioning:
            return True
    return False


def d_separated(dag: CausalDag, x: str, y: str, conditioning: frozenset[str] = frozenset()) -> bool:
    """True iff every path between x and y is blocked given ``conditioning``."""
    if x == y:
        raise GraphError("endpoints must differ")
    conditioning = frozenset(conditioning)
    if x in conditioning or y in conditioning:
        raise GraphError("endpoints may not be part of the conditioning set")
    for nodes in _simple_paths(dag, x, y):
        if not is_blocked(_describe(dag, nodes, conditioning), conditioning, dag):
            return False
    return True


def find_backdoor_set(
    dag: CausalDag, x: str, y: str, observable: frozenset[str]
) -> frozenset[str] | None:
    """Minimal observable set blocking every backdoor path from x to y.

    Candidate sets exclude x, y, and descendants of x.  Ties between sets of
    equal size are broken lexicographically; returns None when no subset of
    the observables works.
    """
    if x == y:
        raise GraphError("endpoints must differ")
    paths = backdoor_paths(dag, x, y)
    candidates = sorted(frozenset(observable) - dag.descendants(x) - {x, y})
    for size in range(len(candidates) + 1):
        for combo in itertools.combinations(candidates, size):
            cond = frozenset(combo)
            if all(is_blocked(p, cond, dag) for p in paths):
                return cond
    return None
