"""Call graphs and global-variable communication graphs, with DOT export.

Node complexity is statements + decision points: every assignment and call
statement counts once, and so does every IF, every ELSIF, every CASE branch
label and every loop header.  The metric is a deliberately simple proxy that
grows with both size and branching; swap it out here if a better one exists
for your codebase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import (
    Assignment,
    CallResolution,
    CallStatement,
    CaseStatement,
    ForStatement,
    IfStatement,
    Pou,
    PouKind,
    Project,
    Statement,
    WhileStatement,
)


def complexity(pou: Pou) -> int:
    """Statements + decision points over the body and all action bodies."""

    def count(stmts: tuple[Statement, ...]) -> int:
        total = 0
        for stmt in stmts:
            if isinstance(stmt, (Assignment, CallStatement)):
                total += 1
            elif isinstance(stmt, IfStatement):
                total += len(stmt.branches)
                for branch in stmt.branches:
                    total += count(branch.body)
                total += count(stmt.else_body)
            elif isinstance(stmt, CaseStatement):
                for branch in stmt.branches:
                    total += len(branch.labels)
                    total += count(branch.body)
                total += count(stmt.else_body)
            elif isinstance(stmt, ForStatement):
                total += 1 + count(stmt.body)
            elif isinstance(stmt, WhileStatement):
                total += 1 + count(stmt.body)
        return total

    total = count(pou.statements)
    for action in pou.actions:
        total += count(action.body)
    return total


@dataclass(frozen=True)
class CallGraphNode:
    name: str
    kind: PouKind | None
    complexity: int
    external: bool = False
    stub: bool = False
    group: str | None = None


@dataclass(frozen=True)
class CallEdge:
    caller: str
    callee: str
    multiplicity: int


@dataclass(frozen=True)
class CallGraph:
    nodes: tuple[CallGraphNode, ...]
    edges: tuple[CallEdge, ...]
    entries: tuple[str, ...]

    def node_map(self) -> dict[str, CallGraphNode]:
        return {n.name: n for n in self.nodes}

    def out_edges(self, name: str) -> list[CallEdge]:
        return [e for e in self.edges if e.caller == name]

    def in_edges(self, name: str) -> list[CallEdge]:
        return [e for e in self.edges if e.callee == name]


@dataclass(frozen=True)
class GlobalEdge:
    writer: str
    reader: str
    via: str


@dataclass(frozen=True)
class GlobalCommGraph:
    nodes: tuple[str, ...]
    edges: tuple[GlobalEdge, ...]


def build_call_graph(project: Project, per_instance: bool = False) -> CallGraph:
    """Directed call graph over POUs; unresolved callees become stub nodes.

    By default instance calls collapse onto the FB type, so two instances of
    one block yield a single edge with multiplicity two.  With
    ``per_instance`` every declared instance becomes its own node that
    inherits the type's complexity and outgoing calls.
    """
    nodes: dict[str, CallGraphNode] = {}
    order: list[str] = []
    for pou in project.pous:
        nodes[pou.name] = CallGraphNode(
            pou.name, pou.kind, complexity(pou), stub=pou.stub, group=pou.group
        )
        order.append(pou.name)
    canonical = {name.lower(): name for name in nodes}

    edge_count: dict[tuple[str, str], int] = {}
    externals: dict[str, str] = {}

    def external_name(text: str) -> str:
        key = text.lower()
        if key not in externals:
            externals[key] = text
        return externals[key]

    def add_edge(caller: str, callee: str) -> None:
        edge_count[(caller, callee)] = edge_count.get((caller, callee), 0) + 1

    type_targets: dict[str, list[str]] = {}

    for pou in project.pous:
        for site in pou.call_sites:
            if site.resolution is CallResolution.LOCAL_ACTION:
                continue  # intra-POU structure, not an inter-POU call
            if site.resolution is CallResolution.EXTERNAL:
                ext = external_name(site.callee_text)
                if ext.lower() not in canonical:
                    nodes.setdefault(
                        ext, CallGraphNode(ext, None, 0, external=True)
                    )
                    if ext not in order:
                        order.append(ext)
                add_edge(pou.name, ext)
                continue
            target = site.target or site.callee_text
            target = canonical.get(target.lower(), target)
            if per_instance and site.resolution is CallResolution.INSTANCE_OF_FB:
                instance = site.callee_text.split(".")[0]
                inst_node = f"{pou.name}.{instance}"
                if inst_node not in nodes:
                    base = nodes[target]
                    nodes[inst_node] = CallGraphNode(
                        inst_node, base.kind, base.complexity, stub=base.stub
                    )
                    order.append(inst_node)
                    type_targets.setdefault(inst_node, []).append(target)
                add_edge(pou.name, inst_node)
            else:
                add_edge(pou.name, target)

    if per_instance:
        # instance nodes continue into the type-level subgraph
        for inst_node, targets in type_targets.items():
            for target in targets:
                target_pou = project.pou(target)
                if target_pou is None:
                    continue
                for site in target_pou.call_sites:
                    if site.resolution is CallResolution.LOCAL_ACTION:
                        continue
                    if site.resolution is CallResolution.EXTERNAL:
                        add_edge(inst_node, external_name(site.callee_text))
                    else:
                        callee = canonical.get((site.target or "").lower())
                        if callee:
                            add_edge(inst_node, callee)

    edges = tuple(
        CallEdge(caller, callee, count)
        for (caller, callee), count in sorted(edge_count.items())
    )

    entries: list[str] = []
    for task in project.tasks:
        target = canonical.get(task.entry.lower())
        if target and target not in entries:
            entries.append(target)
    if not entries:
        called = {e.callee for e in edges}
        entries = [
            n for n in order if n not in called and not nodes[n].external
        ]

    node_tuple = tuple(nodes[name] for name in order)
    return CallGraph(node_tuple, edges, tuple(entries))


def build_global_comm_graph(project: Project) -> GlobalCommGraph:
    """Writer-to-reader edges through each global variable; no self edges."""
    writers: dict[str, list[str]] = {}
    readers: dict[str, list[str]] = {}
    for pou in project.pous:
        for g in sorted(pou.global_writes):
            writers.setdefault(g, []).append(pou.name)
        for g in sorted(pou.global_reads):
            readers.setdefault(g, []).append(pou.name)

    edges: list[GlobalEdge] = []
    for g in sorted(set(writers) | set(readers), key=str.lower):
        for writer in sorted(writers.get(g, []), key=str.lower):
            for reader in sorted(readers.get(g, []), key=str.lower):
                if reader.lower() != writer.lower():
                    edges.append(GlobalEdge(writer, reader, g))
    return GlobalCommGraph(tuple(p.name for p in project.pous), tuple(edges))


# --- DOT export ----------------------------------------------------------------


@dataclass(frozen=True)
class DotOptions:
    size_by_complexity: bool = False
    color_by_kind: bool = False
    min_width: float = 0.3
    graph_name: str = "pous"


_KIND_COLORS = {
    PouKind.PROGRAM: "lightblue",
    PouKind.FUNCTION_BLOCK: "palegoldenrod",
    PouKind.FUNCTION: "palegreen",
    None: "lightgray",
}


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def node_width(complexity_value: int, min_width: float) -> float:
    """Diameter proportional to sqrt(complexity): node area tracks complexity."""
    return max(min_width, min_width * math.sqrt(complexity_value))


def _node_line(node: CallGraphNode, options: DotOptions, indent: str) -> str:
    attrs: list[str] = [f"label={_quote(f'{node.name} ({node.complexity})')}"]
    if options.size_by_complexity:
        width = node_width(node.complexity, options.min_width)
        attrs.append(f"width={width:.2f}")
        attrs.append("fixedsize=true")
    if options.color_by_kind:
        attrs.append("style=filled")
        attrs.append(f"fillcolor={_quote(_KIND_COLORS[node.kind])}")
    if node.external:
        attrs.append("shape=box")
    return f"{indent}{_quote(node.name)} [{', '.join(attrs)}];"


def emit_dot(graph: CallGraph | GlobalCommGraph, options: DotOptions | None = None) -> str:
    """Render either graph type as deterministic Graphviz DOT text."""
    options = options or DotOptions()
    lines = [f"digraph {_quote(options.graph_name)} {{"]
    lines.append("  node [shape=circle];")

    if isinstance(graph, CallGraph):
        ordered = sorted(graph.nodes, key=lambda n: (n.name.lower(), n.name))
        grouped: dict[str, list[CallGraphNode]] = {}
        for node in ordered:
            if node.group:
                grouped.setdefault(node.group, []).append(node)
        for node in ordered:
            if not node.group:
                lines.append(_node_line(node, options, "  "))
        for group in sorted(grouped):
            lines.append(f"  subgraph {_quote('cluster_' + group)} {{")
            lines.append(f"    label={_quote(group)};")
            for node in grouped[group]:
                lines.append(_node_line(node, options, "    "))
            lines.append("  }")
        for entry in sorted(graph.entries, key=str.lower):
            lines.append(f"  {_quote(entry)} [penwidth=2];")
        for edge in sorted(graph.edges, key=lambda e: (e.caller.lower(), e.callee.lower())):
            lines.append(
                f"  {_quote(edge.caller)} -> {_quote(edge.callee)} "
                f"[label={_quote(str(edge.multiplicity))}];"
            )
    else:
        for name in sorted(graph.nodes, key=str.lower):
            lines.append(f"  {_quote(name)};")
        for edge in sorted(
            graph.edges, key=lambda e: (e.writer.lower(), e.reader.lower(), e.via.lower())
        ):
            lines.append(
                f"  {_quote(edge.writer)} -> {_quote(edge.reader)} "
                f"[label={_quote(edge.via)}];"
            )
    lines.append("}")
    return "\n".join(lines) + "\n"
