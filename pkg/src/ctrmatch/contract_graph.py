"""Labeled directed graphs for contracts and the application architecture.

A contract graph is rooted at one CONTRACT node. Fields, methods, params
and return values hang off it, and each typed element points at a TYPE
node (shared within the contract). The application-architecture graph
adds a ROOT node named ``AA`` with a CONTAINS edge to every contract.
"""

from __future__ import annotations

import enum
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import BinaryIO, Iterable

from .contract_lang import ContractAst

__all__ = [
    "NodeKind",
    "EdgeKind",
    "NodeRecord",
    "LabeledGraph",
    "FormatError",
    "DuplicateComponentError",
    "EDGE_ENDPOINTS",
    "build_contract_graph",
    "build_aa_graph",
    "write_graphml",
    "read_graphml",
    "graphml_bytes",
]


class NodeKind(str, enum.Enum):
    ROOT = "ROOT"
    CONTRACT = "CONTRACT"
    FIELD = "FIELD"
    METHOD = "METHOD"
    PARAM = "PARAM"
    TYPE = "TYPE"
    RETURN = "RETURN"


class EdgeKind(str, enum.Enum):
    CONTAINS = "CONTAINS"
    HAS_FIELD = "HAS_FIELD"
    HAS_METHOD = "HAS_METHOD"
    HAS_PARAM = "HAS_PARAM"
    HAS_RETURN = "HAS_RETURN"
    OF_TYPE = "OF_TYPE"


# allowed (source kind, target kind) pairs per edge kind
EDGE_ENDPOINTS: dict[EdgeKind, frozenset[tuple[NodeKind, NodeKind]]] = {
    EdgeKind.CONTAINS: frozenset({(NodeKind.ROOT, NodeKind.CONTRACT)}),
    EdgeKind.HAS_FIELD: frozenset({(NodeKind.CONTRACT, NodeKind.FIELD)}),
    EdgeKind.HAS_METHOD: frozenset({(NodeKind.CONTRACT, NodeKind.METHOD)}),
    EdgeKind.HAS_PARAM: frozenset({(NodeKind.METHOD, NodeKind.PARAM)}),
    EdgeKind.HAS_RETURN: frozenset({(NodeKind.METHOD, NodeKind.RETURN)}),
    EdgeKind.OF_TYPE: frozenset(
        {(k, NodeKind.TYPE) for k in (NodeKind.FIELD, NodeKind.PARAM, NodeKind.RETURN)}
    ),
}


class FormatError(ValueError):
    pass


class DuplicateComponentError(ValueError):
    pass


@dataclass(frozen=True)
class NodeRecord:
    kind: NodeKind
    name: str = ""
    dtype: str = ""
    group: str = "none"


@dataclass(eq=False)
class LabeledGraph:
    """Directed graph with integer node ids and typed edges.

    Node ids are kept in insertion order; builders hand out 0, 1, 2, ...
    Equality compares node records by id and the edge set.
    """

    nodes: dict[int, NodeRecord] = field(default_factory=dict)
    edges: list[tuple[int, int, EdgeKind]] = field(default_factory=list)

    def add_node(self, record: NodeRecord) -> int:
        nid = len(self.nodes)
        while nid in self.nodes:
            nid += 1
        self.nodes[nid] = record
        return nid

    def add_edge(self, src: int, dst: int, kind: EdgeKind) -> None:
        if src not in self.nodes or dst not in self.nodes:
            raise KeyError(f"edge ({src}, {dst}) references a missing node")
        self.edges.append((src, dst, kind))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LabeledGraph):
            return NotImplemented
        return self.nodes == other.nodes and sorted(self.edges) == sorted(other.edges)

    def __repr__(self) -> str:
        return f"LabeledGraph({len(self.nodes)} nodes, {len(self.edges)} edges)"

    def successors(self, nid: int) -> list[tuple[int, EdgeKind]]:
        return [(d, k) for s, d, k in self.edges if s == nid]

    def nodes_of_kind(self, kind: NodeKind) -> list[int]:
        return [nid for nid, rec in self.nodes.items() if rec.kind is kind]

    def kind_counts(self) -> dict[NodeKind, int]:
        counts = {k: 0 for k in NodeKind}
        for rec in self.nodes.values():
            counts[rec.kind] += 1
        return counts

    def contract_node(self) -> int:
        found = self.nodes_of_kind(NodeKind.CONTRACT)
        if len(found) != 1:
            raise ValueError(f"expected exactly one CONTRACT node, found {len(found)}")
        return found[0]

    def component_name(self) -> str:
        return self.nodes[self.contract_node()].name

    def descendants(self, start: int) -> list[int]:
        """Node ids reachable from ``start`` (inclusive), in id order."""
        adjacency: dict[int, list[int]] = {}
        for s, d, _ in self.edges:
            adjacency.setdefault(s, []).append(d)
        seen = {start}
        stack = [start]
        while stack:
            for nxt in adjacency.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return sorted(seen)

    def subgraph(self, keep: Iterable[int]) -> "LabeledGraph":
        """Induced subgraph, renumbered 0..k-1 in ascending id order."""
        ids = sorted(set(keep))
        remap = {old: new for new, old in enumerate(ids)}
        sub = LabeledGraph({remap[i]: self.nodes[i] for i in ids})
        sub.edges = [
            (remap[s], remap[d], k) for s, d, k in self.edges if s in remap and d in remap
        ]
        return sub

    def canonical(self) -> "LabeledGraph":
        """Copy with ids renumbered 0..n-1 in ascending order and sorted edges."""
        sub = self.subgraph(self.nodes)
        sub.edges.sort()
        return sub


def build_contract_graph(ast: ContractAst) -> LabeledGraph:
    g = LabeledGraph()
    root = g.add_node(NodeRecord(NodeKind.CONTRACT, ast.component_class))
    type_nodes: dict[str, int] = {}

    def type_node(dtype: str) -> int:
        if dtype not in type_nodes:
            type_nodes[dtype] = g.add_node(NodeRecord(NodeKind.TYPE, dtype, dtype))
        return type_nodes[dtype]

    for f in ast.fields:
        dtype = str(f.dtype)
        fid = g.add_node(NodeRecord(NodeKind.FIELD, f.name, dtype))
        g.add_edge(root, fid, EdgeKind.HAS_FIELD)
        g.add_edge(fid, type_node(dtype), EdgeKind.OF_TYPE)
    for m in ast.methods:
        mid = g.add_node(NodeRecord(NodeKind.METHOD, m.name, group=m.group.value))
        g.add_edge(root, mid, EdgeKind.HAS_METHOD)
        for p in m.params:
            dtype = str(p.dtype)
            pid = g.add_node(NodeRecord(NodeKind.PARAM, p.name, dtype))
            g.add_edge(mid, pid, EdgeKind.HAS_PARAM)
            g.add_edge(pid, type_node(dtype), EdgeKind.OF_TYPE)
        if m.return_type is not None:
            dtype = str(m.return_type)
            rid = g.add_node(NodeRecord(NodeKind.RETURN, "", dtype))
            g.add_edge(mid, rid, EdgeKind.HAS_RETURN)
            g.add_edge(rid, type_node(dtype), EdgeKind.OF_TYPE)
    return g


def build_aa_graph(contract_graphs: Iterable[LabeledGraph]) -> LabeledGraph:
    aa = LabeledGraph()
    root = aa.add_node(NodeRecord(NodeKind.ROOT, "AA"))
    seen: set[str] = set()
    for cg in contract_graphs:
        name = cg.component_name()
        if name in seen:
            raise DuplicateComponentError(f"component {name!r} appears twice")
        seen.add(name)
        offset = len(aa.nodes)
        for nid in sorted(cg.nodes):
            aa.nodes[offset + nid] = cg.nodes[nid]
        for s, d, k in cg.edges:
            aa.edges.append((offset + s, offset + d, k))
        aa.add_edge(root, offset + cg.contract_node(), EdgeKind.CONTAINS)
    return aa


# ---------------------------------------------------------------------------
# GraphML

_NS = "http://graphml.graphdrawing.org/xmlns"
_NODE_KEYS = (("d0", "kind"), ("d1", "name"), ("d2", "dtype"), ("d3", "group"))
_EDGE_KEY = ("d4", "ekind")


def graphml_bytes(g: LabeledGraph) -> bytes:
    root = ET.Element("graphml", {"xmlns": _NS})
    for key_id, attr in _NODE_KEYS:
        ET.SubElement(
            root, "key", {"id": key_id, "for": "node", "attr.name": attr, "attr.type": "string"}
        )
    ET.SubElement(
        root, "key", {"id": _EDGE_KEY[0], "for": "edge", "attr.name": _EDGE_KEY[1], "attr.type": "string"}
    )
    graph = ET.SubElement(root, "graph", {"id": "G", "edgedefault": "directed"})
    order = {nid: i for i, nid in enumerate(sorted(g.nodes))}
    for nid in sorted(g.nodes):
        rec = g.nodes[nid]
        node = ET.SubElement(graph, "node", {"id": f"n{order[nid]}"})
        values = (rec.kind.value, rec.name, rec.dtype, "" if rec.group == "none" else rec.group)
        for (key_id, _), value in zip(_NODE_KEYS, values):
            if value:
                ET.SubElement(node, "data", {"key": key_id}).text = value
    for s, d, k in sorted((order[s], order[d], k.value) for s, d, k in g.edges):
        edge = ET.SubElement(graph, "edge", {"source": f"n{s}", "target": f"n{d}"})
        ET.SubElement(edge, "data", {"key": _EDGE_KEY[0]}).text = k
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def write_graphml(g: LabeledGraph, destination: BinaryIO) -> None:
    destination.write(graphml_bytes(g))


def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def read_graphml(source: BinaryIO) -> LabeledGraph:
    try:
        root = ET.parse(source).getroot()
    except ET.ParseError as exc:
        raise FormatError(f"not well-formed XML: {exc}") from exc
    if _local(root.tag) != "graphml":
        raise FormatError(f"root element is <{_local(root.tag)}>, expected <graphml>")
    keys: dict[str, tuple[str, str]] = {}
    graph_el = None
    for child in root:
        tag = _local(child.tag)
        if tag == "key":
            keys[child.get("id", "")] = (child.get("for", ""), child.get("attr.name", ""))
        elif tag == "graph":
            if graph_el is not None:
                raise FormatError("more than one <graph> element")
            graph_el = child
    if graph_el is None:
        raise FormatError("no <graph> element")
    if graph_el.get("edgedefault") != "directed":
        raise FormatError("graph must declare edgedefault='directed'")

    def attributes(el: ET.Element, domain: str) -> dict[str, str]:
        out = {}
        for data in el:
            if _local(data.tag) != "data":
                continue
            key = data.get("key", "")
            if key not in keys or keys[key][0] not in (domain, "all"):
                raise FormatError(f"undeclared {domain} key {key!r}")
            out[keys[key][1]] = data.text or ""
        return out

    g = LabeledGraph()
    ids: dict[str, int] = {}
    edge_els = []
    for el in graph_el:
        tag = _local(el.tag)
        if tag == "node":
            xml_id = el.get("id")
            if xml_id is None or xml_id in ids:
                raise FormatError(f"missing or duplicate node id {xml_id!r}")
            attrs = attributes(el, "node")
            if "kind" not in attrs:
                raise FormatError(f"node {xml_id} has no kind")
            try:
                kind = NodeKind(attrs["kind"])
            except ValueError:
                raise FormatError(f"node {xml_id} has unknown kind {attrs['kind']!r}") from None
            group = attrs.get("group") or "none"
            if kind is NodeKind.METHOD and group not in ("provided", "internal", "required"):
                raise FormatError(f"method node {xml_id} has invalid group {group!r}")
            ids[xml_id] = g.add_node(
                NodeRecord(kind, attrs.get("name", ""), attrs.get("dtype", ""), group)
            )
        elif tag == "edge":
            edge_els.append(el)
    for el in edge_els:
        src, dst = el.get("source"), el.get("target")
        if src not in ids or dst not in ids:
            raise FormatError(f"edge {src}->{dst} references an undeclared node")
        attrs = attributes(el, "edge")
        try:
            kind = EdgeKind(attrs.get("ekind", ""))
        except ValueError:
            raise FormatError(f"edge {src}->{dst} has missing or unknown ekind") from None
        g.add_edge(ids[src], ids[dst], kind)
    return g
