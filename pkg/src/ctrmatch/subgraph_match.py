"""Label-compatible subgraph monomorphism between contract graphs.

The search is a VF2-style backtracking matcher: required nodes are visited
in breadth-first order from the CONTRACT anchor, each new node is drawn
from the neighbours of an already-mapped node, and a partial map is
extended only when every edge to previously mapped nodes is present in
the candidate with the same kind. Names are ignored; only node kinds and
TYPE names must agree.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterator

from .contract_graph import EdgeKind, LabeledGraph, NodeKind, NodeRecord

__all__ = [
    "NodeMapping",
    "MatchReport",
    "SizeError",
    "node_compatible",
    "iter_embeddings",
    "find_embeddings",
    "brute_force_embeddings",
    "match_against_architecture",
    "check_mapping",
]

BRUTE_FORCE_LIMIT = 10


class SizeError(ValueError):
    pass


@dataclass
class NodeMapping:
    pairs: dict[int, int]
    method_substitution: dict[str, str] = field(default_factory=dict)
    # False when overloaded required methods map to differently named targets
    consistent: bool = True

    @classmethod
    def build(cls, pairs: dict[int, int], required: LabeledGraph, candidate: LabeledGraph) -> "NodeMapping":
        subst: dict[str, str] = {}
        consistent = True
        for r, c in sorted(pairs.items()):
            rec = required.nodes[r]
            if rec.kind is NodeKind.METHOD:
                target = candidate.nodes[c].name
                if subst.setdefault(rec.name, target) != target:
                    consistent = False
        return cls(dict(pairs), subst, consistent)


@dataclass
class MatchReport:
    candidate_component: str
    mappings: list[NodeMapping]

    @property
    def matched(self) -> bool:
        return bool(self.mappings)


def node_compatible(required: NodeRecord, candidate: NodeRecord) -> bool:
    if required.kind is not candidate.kind:
        return False
    if required.kind is NodeKind.TYPE:
        return required.dtype == candidate.dtype
    return True


def _label(rec: NodeRecord) -> tuple:
    return (rec.kind, rec.dtype) if rec.kind is NodeKind.TYPE else (rec.kind,)


class _Index:
    def __init__(self, g: LabeledGraph):
        self.out: dict[int, dict[EdgeKind, list[int]]] = defaultdict(lambda: defaultdict(list))
        self.inc: dict[int, dict[EdgeKind, list[int]]] = defaultdict(lambda: defaultdict(list))
        self.edges = set()
        for s, d, k in g.edges:
            if (s, d, k) in self.edges:
                continue
            self.edges.add((s, d, k))
            self.out[s][k].append(d)
            self.inc[d][k].append(s)
        for table in (self.out, self.inc):
            for per_kind in table.values():
                for lst in per_kind.values():
                    lst.sort()

    def degree_profile(self, nid: int) -> Counter:
        prof: Counter = Counter()
        for k, lst in self.out.get(nid, {}).items():
            prof[("out", k)] += len(lst)
        for k, lst in self.inc.get(nid, {}).items():
            prof[("in", k)] += len(lst)
        return prof


def _search_order(required: LabeledGraph, idx: _Index) -> list[tuple[int, tuple | None]]:
    """Visit order plus, per node, the (mapped neighbour, direction, kind) to expand from."""
    order: list[tuple[int, tuple | None]] = []
    placed: set[int] = set()
    anchors = required.nodes_of_kind(NodeKind.CONTRACT)
    seeds = anchors + sorted(required.nodes)
    for seed in seeds:
        if seed in placed:
            continue
        placed.add(seed)
        order.append((seed, None))
        queue = [seed]
        while queue:
            u = queue.pop(0)
            steps = []
            for k, lst in idx.out.get(u, {}).items():
                steps.extend((v, (u, "out", k)) for v in lst)
            for k, lst in idx.inc.get(u, {}).items():
                steps.extend((v, (u, "in", k)) for v in lst)
            for v, via in sorted(steps, key=lambda item: item[0]):
                if v not in placed:
                    placed.add(v)
                    order.append((v, via))
                    queue.append(v)
    return order


def iter_embeddings(required: LabeledGraph, candidate: LabeledGraph) -> Iterator[NodeMapping]:
    """Yield every subgraph monomorphism of ``required`` into ``candidate``."""
    if len(required.nodes) > len(candidate.nodes):
        return
    need = Counter(_label(r) for r in required.nodes.values())
    have = Counter(_label(r) for r in candidate.nodes.values())
    if any(have[label] < n for label, n in need.items()):
        return

    ridx, cidx = _Index(required), _Index(candidate)
    order = _search_order(required, ridx)
    all_candidates = sorted(candidate.nodes)
    rprof = {n: ridx.degree_profile(n) for n in required.nodes}
    cprof = {n: cidx.degree_profile(n) for n in candidate.nodes}

    # edges from each required node back to nodes earlier in the order
    position = {nid: i for i, (nid, _) in enumerate(order)}
    back_edges: dict[int, list[tuple[int, int, EdgeKind]]] = defaultdict(list)
    for s, d, k in ridx.edges:
        later = s if position[s] > position[d] else d
        back_edges[later].append((s, d, k))

    def feasible(r: int, c: int) -> bool:
        if not node_compatible(required.nodes[r], candidate.nodes[c]):
            return False
        cp = cprof[c]
        if any(cp[key] < n for key, n in rprof[r].items()):
            return False
        for s, d, k in back_edges[r]:
            cs = c if s == r else mapping[s]
            cd = c if d == r else mapping[d]
            if (cs, cd, k) not in cidx.edges:
                return False
        return True

    mapping: dict[int, int] = {}
    used: set[int] = set()

    def extend(depth: int) -> Iterator[NodeMapping]:
        if depth == len(order):
            yield NodeMapping.build(mapping, required, candidate)
            return
        r, via = order[depth]
        if via is None:
            pool = all_candidates
        else:
            parent, direction, kind = via
            table = cidx.out if direction == "out" else cidx.inc
            pool = table.get(mapping[parent], {}).get(kind, [])
        for c in pool:
            if c in used or not feasible(r, c):
                continue
            mapping[r] = c
            used.add(c)
            yield from extend(depth + 1)
            used.discard(c)
            del mapping[r]

    yield from extend(0)


def find_embeddings(required: LabeledGraph, candidate: LabeledGraph, limit: int | None = None) -> list[NodeMapping]:
    """Up to ``limit`` embeddings (all of them when ``limit`` is None)."""
    if limit is not None and limit < 1:
        raise ValueError("limit must be positive")
    return list(itertools.islice(iter_embeddings(required, candidate), limit))


def check_mapping(required: LabeledGraph, candidate: LabeledGraph, pairs: dict[int, int]) -> bool:
    """True iff ``pairs`` is total, injective, label-compatible and edge-preserving."""
    if set(pairs) != set(required.nodes) or len(set(pairs.values())) != len(pairs):
        return False
    if not all(c in candidate.nodes and node_compatible(required.nodes[r], candidate.nodes[c]) for r, c in pairs.items()):
        return False
    cedges = set(candidate.edges)
    return all((pairs[s], pairs[d], k) in cedges for s, d, k in required.edges)


def brute_force_embeddings(required: LabeledGraph, candidate: LabeledGraph) -> list[NodeMapping]:
    """Exhaustive enumeration over all label-compatible injective assignments.

    Test oracle only; refuses graphs with more than ten required nodes.
    """
    if len(required.nodes) > BRUTE_FORCE_LIMIT:
        raise SizeError(f"required graph has {len(required.nodes)} nodes (limit {BRUTE_FORCE_LIMIT})")
    rnodes = sorted(required.nodes)
    options = [
        [c for c in sorted(candidate.nodes) if node_compatible(required.nodes[r], candidate.nodes[c])]
        for r in rnodes
    ]
    cedges = set(candidate.edges)
    out = []
    for image in itertools.product(*options):
        if len(set(image)) != len(image):
            continue
        pairs = dict(zip(rnodes, image))
        if all((pairs[s], pairs[d], k) in cedges for s, d, k in required.edges):
            out.append(NodeMapping.build(pairs, required, candidate))
    return out


def match_against_architecture(required: LabeledGraph, aa: LabeledGraph, limit: int | None = 8) -> list[MatchReport]:
    """Match ``required`` against each component of an AA graph separately.

    Returned mappings use the AA graph's node ids.
    """
    roots = aa.nodes_of_kind(NodeKind.ROOT)
    if len(roots) != 1:
        raise ValueError("architecture graph must have exactly one ROOT node")
    children = sorted(d for s, d, k in aa.edges if s == roots[0] and k is EdgeKind.CONTAINS)
    reports = []
    for contract in children:
        keep = aa.descendants(contract)
        sub = aa.subgraph(keep)
        mappings = []
        for m in find_embeddings(required, sub, limit):
            m.pairs = {r: keep[c] for r, c in m.pairs.items()}
            mappings.append(m)
        reports.append(MatchReport(aa.nodes[contract].name, mappings))
    return reports
