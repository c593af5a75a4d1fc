"""Directed exploit graphs and the attacker's action set they induce.

A topological vulnerability scan yields nodes (exploit or condition
predicates) and directed edges; every simple path from the entry node to the
target asset is one way the intrusion can unfold, and the list of those paths
is the attacker's strategy space.  Graph distance to the goal maps onto
qualitative risk levels.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ParseError


@dataclass(frozen=True)
class GraphNode:
    id: str
    label: str

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        object.__setattr__(self, "label", str(self.label))


@dataclass(frozen=True)
class AttackGraph:
    """Exploit graph with a designated entry (root) and target (goal)."""

    nodes: tuple[GraphNode, ...]
    edges: tuple[tuple[str, str], ...]
    root: str
    goal: str

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(
            self, "edges", tuple((str(u), str(v)) for u, v in self.edges)
        )
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate node ids")
        known = set(ids)
        for u, v in self.edges:
            if u not in known or v not in known:
                raise ValueError(f"edge ({u!r}, {v!r}) references an unknown node")
            if u == v:
                raise ValueError(f"self-loop on {u!r}")
        if self.root not in known:
            raise ValueError(f"root {self.root!r} is not a node")
        if self.goal not in known:
            raise ValueError(f"goal {self.goal!r} is not a node")

    def label_of(self, node_id: str) -> str:
        for node in self.nodes:
            if node.id == node_id:
                return node.label
        raise KeyError(node_id)

    def successors(self, node_id: str) -> tuple[str, ...]:
        """Outgoing neighbors ordered by label (then id) for deterministic walks."""
        labels = {n.id: n.label for n in self.nodes}
        outs = [v for u, v in self.edges if u == node_id]
        return tuple(sorted(set(outs), key=lambda v: (labels[v], v)))

    def has_edge(self, u: str, v: str) -> bool:
        return (u, v) in set(self.edges)


@dataclass(frozen=True)
class AttackPath:
    """One intrusion scenario: a simple node sequence from root to goal."""

    nodes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(str(n) for n in self.nodes))
        if len(self.nodes) < 1:
            raise ValueError("empty path")
        if len(set(self.nodes)) != len(self.nodes):
            raise ValueError("path revisits a node")

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True)
class PathEnumeration:
    paths: tuple[AttackPath, ...]
    truncated: bool

    def __len__(self):
        return len(self.paths)


def enumerate_paths(graph: AttackGraph, cap: int = 10_000) -> PathEnumeration:
    """All simple root-to-goal paths, depth-first with neighbors in label
    order, truncated at ``cap`` (the flag says whether more exist).

    An unreachable goal yields an empty enumeration, not an error.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    succ = {n.id: graph.successors(n.id) for n in graph.nodes}
    paths: list[AttackPath] = []
    truncated = False
    stack: list[str] = []
    on_path: set[str] = set()

    def walk(node: str) -> bool:
        # returns False once the cap is hit and one more path was seen
        nonlocal truncated
        stack.append(node)
        on_path.add(node)
        try:
            if node == graph.goal:
                if len(paths) >= cap:
                    truncated = True
                    return False
                paths.append(AttackPath(nodes=tuple(stack)))
                return True
            for child in succ[node]:
                if child in on_path:
                    continue
                if not walk(child):
                    return False
            return True
        finally:
            stack.pop()
            on_path.discard(node)

    walk(graph.root)
    return PathEnumeration(paths=tuple(paths), truncated=truncated)


@dataclass(frozen=True)
class DistanceRiskMap:
    """Bands of remaining graph distance mapped to risk categories, e.g.
    0..2 high, 3..6 medium, 7..8 low."""

    bands: tuple[tuple[int, int, str], ...]

    def __post_init__(self):
        bands = tuple((int(lo), int(hi), str(cat)) for lo, hi, cat in self.bands)
        object.__setattr__(self, "bands", bands)
        if not bands:
            raise ValueError("no bands")
        covered = []
        for lo, hi, _ in bands:
            if lo < 0 or hi < lo:
                raise ValueError(f"bad band [{lo}, {hi}]")
            covered.extend(range(lo, hi + 1))
        if len(covered) != len(set(covered)):
            raise ValueError("bands overlap")
        top = max(covered)
        if sorted(covered) != list(range(0, top + 1)):
            raise ValueError("bands leave gaps in 0..max")

    @property
    def max_distance(self) -> int:
        return max(hi for _, hi, _ in self.bands)


def distance_to_risk(remaining_hops: int, risk_map: DistanceRiskMap) -> str:
    """Risk category for an attacker this many hops away from the goal."""
    if remaining_hops < 0 or remaining_hops > risk_map.max_distance:
        raise ValueError(
            f"distance {remaining_hops} outside the mapped range "
            f"0..{risk_map.max_distance}"
        )
    for lo, hi, category in risk_map.bands:
        if lo <= remaining_hops <= hi:
            return category
    raise AssertionError("exhaustive bands cannot miss")  # pragma: no cover


# ---------------------------------------------------------------------------
# graph document format
# ---------------------------------------------------------------------------


def parse_graph(text: str) -> AttackGraph:
    """Read a graph document: nodes [{id, label}], edges [{from, to}], root, goal."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}", location=f"line {exc.lineno}") from None
    if not isinstance(doc, dict):
        raise ParseError("graph document must be a JSON object")
    for field in ("nodes", "edges", "root", "goal"):
        if field not in doc:
            raise ParseError("missing field", location=field)
    nodes = []
    for idx, entry in enumerate(doc["nodes"]):
        if not isinstance(entry, dict) or "id" not in entry:
            raise ParseError("node needs an 'id'", location=f"nodes[{idx}]")
        nodes.append(GraphNode(id=entry["id"], label=entry.get("label", entry["id"])))
    edges = []
    for idx, entry in enumerate(doc["edges"]):
        if not isinstance(entry, dict) or "from" not in entry or "to" not in entry:
            raise ParseError("edge needs 'from' and 'to'", location=f"edges[{idx}]")
        edges.append((entry["from"], entry["to"]))
    try:
        return AttackGraph(
            nodes=tuple(nodes), edges=tuple(edges), root=doc["root"], goal=doc["goal"]
        )
    except ValueError as exc:
        raise ParseError(str(exc)) from None
