"""Directed labeled multigraph over a theory's predicates.

One node per predicate (with arity). Each rule contributes one edge per
body atom pointing at the head's predicate; assertions hang off a TRUE
sentinel, goal clauses point at a FALSE sentinel. Edge labels carry the
axiom id plus the body and head argument tuples, so the clause set is
recoverable from the graph.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

from .core import Atom, Clause, Term, Theory

TRUE_NODE = "TRUE"
FALSE_NODE = "FALSE"
SENTINELS = (TRUE_NODE, FALSE_NODE)


@dataclass(frozen=True)
class GraphEdge:
    src: str
    dst: str
    clause_id: str
    src_args: tuple[str, ...]
    dst_args: tuple[str, ...]

    @property
    def label(self) -> str:
        return f"{self.clause_id}:({','.join(self.src_args)})->({','.join(self.dst_args)})"


@dataclass(frozen=True)
class TheoryGraph:
    predicates: tuple[tuple[str, int], ...]  # sorted (name, arity)
    edges: tuple[GraphEdge, ...]             # clause order, body position order

    @property
    def nodes(self) -> tuple[str, ...]:
        """Predicate node names plus whichever sentinels carry edges."""
        names = [f"{p}/{n}" for p, n in self.predicates]
        used = {e.src for e in self.edges} | {e.dst for e in self.edges}
        for sentinel in SENTINELS:
            if sentinel in used:
                names.append(sentinel)
        return tuple(sorted(names))

    def predicate_names(self) -> frozenset[str]:
        return frozenset(p for p, _ in self.predicates)

    def arity(self, pred: str) -> int:
        for p, n in self.predicates:
            if p == pred:
                return n
        raise KeyError(pred)

    def successors(self, pred: str) -> list[str]:
        out = sorted({e.dst for e in self.edges if e.src == pred and e.dst not in SENTINELS})
        return out


def build_graph(theory: Theory) -> TheoryGraph:
    predicates = tuple(sorted(theory.signature.predicates.items()))
    edges: list[GraphEdge] = []
    for c in theory.clauses:
        if c.is_assertion:
            head = c.head
            edges.append(GraphEdge(TRUE_NODE, head.pred, c.cid, (),
                                   tuple(t.name for t in head.args)))
        elif c.is_rule:
            head = c.head
            for b in c.body:
                edges.append(GraphEdge(b.pred, head.pred, c.cid,
                                       tuple(t.name for t in b.args),
                                       tuple(t.name for t in head.args)))
        else:  # goal clause
            for b in c.body:
                edges.append(GraphEdge(b.pred, FALSE_NODE, c.cid,
                                       tuple(t.name for t in b.args), ()))
    return TheoryGraph(predicates, tuple(edges))


def confidence_distances(graph: TheoryGraph,
                         protected: frozenset[str] | set[str]) -> dict[str, Optional[int]]:
    """Edge count of the shortest directed path to any protected predicate.

    Protected predicates sit at distance 0; None marks isolation (no path).
    Paths never pass through the TRUE/FALSE sentinels.
    """
    preds = graph.predicate_names()
    unknown = set(protected) - preds
    if unknown:
        raise ValueError(f"protected predicates not in graph: {sorted(unknown)}")
    # multi-source BFS over reversed edges
    reverse: dict[str, set[str]] = {p: set() for p in preds}
    for e in graph.edges:
        if e.src in SENTINELS or e.dst in SENTINELS:
            continue
        reverse[e.dst].add(e.src)
    dist: dict[str, Optional[int]] = {p: None for p in preds}
    queue: deque[str] = deque()
    for p in sorted(protected):
        dist[p] = 0
        queue.append(p)
    while queue:
        node = queue.popleft()
        for prev in sorted(reverse[node]):
            if dist[prev] is None:
                dist[prev] = dist[node] + 1  # type: ignore[operator]
                queue.append(prev)
    return dist


def reachable(graph: TheoryGraph, src: str, dst: str) -> bool:
    """Directed reachability between predicate nodes (sentinels excluded).
    A predicate reaches itself trivially."""
    if src == dst:
        return True
    forward: dict[str, set[str]] = {p: set() for p in graph.predicate_names()}
    for e in graph.edges:
        if e.src in SENTINELS or e.dst in SENTINELS:
            continue
        forward[e.src].add(e.dst)
    seen = {src}
    queue = deque([src])
    while queue:
        node = queue.popleft()
        for nxt in forward.get(node, ()):
            if nxt == dst:
                return True
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False


def to_dot(graph: TheoryGraph, annotations: Optional[dict[str, str]] = None) -> str:
    """Deterministic DOT rendering; `annotations` adds a second label line
    per predicate (e.g. entrenchment and distance)."""
    annotations = annotations or {}
    lines = ["digraph {"]
    node_names = {f"{p}/{n}": p for p, n in graph.predicates}
    used = {e.src for e in graph.edges} | {e.dst for e in graph.edges}
    rendered: list[str] = []
    for sentinel in SENTINELS:
        if sentinel in used:
            rendered.append(f'  "{sentinel}" [shape=box];')
    for name in sorted(node_names):
        pred = node_names[name]
        label = name
        if pred in annotations:
            label += f"\\n{annotations[pred]}"
        rendered.append(f'  "{name}" [label="{label}"];')
    lines.extend(sorted(rendered))
    arities = dict(graph.predicates)

    def node_of(end: str, args_len: int) -> str:
        if end in SENTINELS:
            return end
        return f"{end}/{arities[end]}"

    edge_lines = [
        f'  "{node_of(e.src, len(e.src_args))}" -> "{node_of(e.dst, len(e.dst_args))}"'
        f' [label="{e.label}"];'
        for e in graph.edges
    ]
    lines.extend(sorted(edge_lines))
    lines.append("}")
    return "\n".join(lines) + "\n"


def clauses_from_graph(graph: TheoryGraph) -> list[Clause]:
    """Rebuild the clause set from edge labels (order: sorted by clause id)."""
    grouped: dict[str, list[GraphEdge]] = {}
    for e in graph.edges:
        grouped.setdefault(e.clause_id, []).append(e)
    clauses = []
    for cid in sorted(grouped):
        edges = grouped[cid]
        first = edges[0]
        if first.src == TRUE_NODE:
            head = Atom(first.dst, tuple(Term(a) for a in first.dst_args))
            clauses.append(Clause(cid, (), head))
        elif first.dst == FALSE_NODE:
            body = tuple(Atom(e.src, tuple(Term(a) for a in e.src_args)) for e in edges)
            clauses.append(Clause(cid, body, None))
        else:
            body = tuple(Atom(e.src, tuple(Term(a) for a in e.src_args)) for e in edges)
            head = Atom(first.dst, tuple(Term(a) for a in first.dst_args))
            clauses.append(Clause(cid, body, head))
    return clauses
