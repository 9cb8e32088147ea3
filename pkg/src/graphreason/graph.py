"""Text-attributed graphs and k-hop subgraph extraction."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional

from .errors import InputError


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    text: Optional[str] = None


@dataclass(frozen=True)
class TextGraph:
    """A graph whose nodes (and optionally edges) carry text.

    Undirected edges are canonicalised to ``src < dst`` and stored once.
    """

    nodes: tuple[tuple[int, str], ...]
    edges: tuple[Edge, ...] = ()
    directed: bool = False

    def __post_init__(self):
        nodes = tuple((int(i), str(t)) for i, t in self.nodes)
        ids = [i for i, _ in nodes]
        if len(set(ids)) != len(ids):
            seen = set()
            dup = next(i for i in ids if i in seen or seen.add(i))
            raise InputError(f"duplicate node id {dup}")
        known = set(ids)
        edges = []
        seen_edges = set()
        for e in self.edges:
            if not isinstance(e, Edge):
                e = Edge(*e)
            u, v = int(e.src), int(e.dst)
            for end in (u, v):
                if end not in known:
                    raise InputError(f"edge ({u}, {v}) references unknown node {end}")
            if u == v:
                raise InputError(f"self-loop on node {u} is not supported")
            if not self.directed and u > v:
                u, v = v, u
            if (u, v) in seen_edges:
                continue
            seen_edges.add((u, v))
            edges.append(Edge(u, v, e.text))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(edges))

    @cached_property
    def text_of(self) -> dict[int, str]:
        return dict(self.nodes)

    @cached_property
    def neighbors(self) -> dict[int, set[int]]:
        # undirected view, used for hop distances even on directed graphs
        adj: dict[int, set[int]] = {i: set() for i, _ in self.nodes}
        for e in self.edges:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
        return adj

    def __contains__(self, node_id) -> bool:
        return node_id in self.text_of

    def __len__(self) -> int:
        return len(self.nodes)

    @classmethod
    def from_dict(cls, data: dict) -> "TextGraph":
        try:
            nodes = [(n["id"], n["text"]) for n in data["nodes"]]
            edges = [Edge(e["src"], e["dst"], e.get("text")) for e in data.get("edges", [])]
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed graph record: {exc!r}") from exc
        return cls(tuple(nodes), tuple(edges), bool(data.get("directed", False)))

    def to_dict(self) -> dict:
        edges = []
        for e in self.edges:
            rec = {"src": e.src, "dst": e.dst}
            if e.text is not None:
                rec["text"] = e.text
            edges.append(rec)
        return {
            "directed": self.directed,
            "nodes": [{"id": i, "text": t} for i, t in self.nodes],
            "edges": edges,
        }


def load_graph(path) -> TextGraph:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read graph file {path}: {exc}") from exc
    return TextGraph.from_dict(data)


def save_graph(graph: TextGraph, path) -> None:
    Path(path).write_text(json.dumps(graph.to_dict(), indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class Subgraph:
    parent: TextGraph = field(repr=False, compare=False)
    targets: tuple[int, ...]
    members: frozenset[int]
    induced_edges: tuple[Edge, ...]
    hop_of: dict[int, int] = field(compare=False)
    local_id_of: dict[int, int] = field(default_factory=dict, compare=False)

    def local_name(self, node_id: int) -> str:
        return f"node{self.local_id_of[node_id]}"


def extract_khop(graph: TextGraph, targets: Iterable[int], h: int) -> Subgraph:
    """Collect every node within ``h`` undirected hops of any target.

    Distances come from a multi-source BFS, so ``hop_of`` is the distance to
    the nearest target. The result has local ids assigned.
    """
    targets = tuple(int(t) for t in targets)
    if h < 0:
        raise InputError(f"hop count must be non-negative, got {h}")
    for t in targets:
        if t not in graph:
            raise InputError(f"unknown target node id {t}")

    hop_of = {t: 0 for t in targets}
    queue = deque(targets)
    adj = graph.neighbors
    while queue:
        u = queue.popleft()
        if hop_of[u] == h:
            continue
        for v in adj[u]:
            if v not in hop_of:
                hop_of[v] = hop_of[u] + 1
                queue.append(v)

    members = frozenset(hop_of)
    induced = tuple(e for e in graph.edges if e.src in members and e.dst in members)
    return relabel_local(Subgraph(graph, targets, members, induced, hop_of))


def whole_graph(graph: TextGraph) -> Subgraph:
    """Subgraph covering the entire graph, for graph-level tasks."""
    return extract_khop(graph, sorted(graph.text_of), 0)


def is_trivial(sub: Subgraph, min_nodes: int = 2, min_edges: int = 1) -> bool:
    if min_nodes < 1 or min_edges < 0:
        raise InputError("min_nodes must be >= 1 and min_edges >= 0")
    return len(sub.members) < min_nodes or len(sub.induced_edges) < min_edges


def relabel_local(sub: Subgraph) -> Subgraph:
    """Targets get local ids first (in given order), then the rest by ascending id."""
    order = list(dict.fromkeys(sub.targets))
    order += sorted(sub.members.difference(order))
    return replace(sub, local_id_of={node: k for k, node in enumerate(order)})
