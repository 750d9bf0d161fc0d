"""Bisimulation equivalence on charts.

Two nodes are bisimilar when they can mimic each other's transitions forever
and agree on termination: whenever one side can do ``a`` and stop (a terminal
transition), so can the other.  The greatest such relation is computed by
partition refinement: nodes start grouped by their terminal-action sets, and
blocks are split by the multiset of ``(action, target-block)`` signatures
until stable.

:func:`collapse` quotients a chart by its greatest self-bisimulation; the
result has no two distinct bisimilar nodes, and the quotient map is returned
as a :class:`BisimMap` (a functional bisimulation).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

from .chart import Chart, Transition, TERMINATION, chart_of_nodes
from .errors import NotABisimulation, ParseError, UnknownNode

__all__ = [
    "Partition",
    "BisimMap",
    "CollapseResult",
    "bisimilarity",
    "bisimilarity_partition",
    "is_bisimulation",
    "collapse",
    "image",
]


@dataclass(frozen=True)
class Partition:
    """A partition of a chart's nodes into bisimilarity classes."""

    chart: Chart
    blocks: tuple

    def block_of(self, node):
        for b in self.blocks:
            if node in b:
                return b
        raise UnknownNode("unknown node %r" % (node,))


def _refine(nodes, outmap, term):
    """Partition refinement core.

    ``outmap[n]`` is the list of ``(action, dst)`` pairs of non-terminal
    transitions; ``term[n]`` the frozenset of terminal actions.  Returns a
    dict node -> block id.
    """
    # initial split: by terminal-action set
    sig0 = {}
    block = {}
    for n in sorted(nodes):
        key = term[n]
        if key not in sig0:
            sig0[key] = len(sig0)
        block[n] = sig0[key]
    while True:
        sigs = {}
        nxt = {}
        for n in sorted(nodes):
            moves = frozenset((a, block[d]) for a, d in outmap[n])
            key = (block[n], moves)
            if key not in sigs:
                sigs[key] = len(sigs)
            nxt[n] = sigs[key]
        if len(sigs) == len(set(block.values())):
            return nxt
        block = nxt


def _partition_map(chart):
    outmap = {
        n: [(t.action, t.dst) for t in chart.out(n) if not t.terminal] for n in chart.nodes
    }
    term = {n: chart.terminal_actions(n) for n in chart.nodes}
    return _refine(chart.nodes, outmap, term)


def bisimilarity_partition(chart):
    """The partition of ``chart``'s nodes into greatest-bisimulation classes."""
    block = _partition_map(chart)
    groups = {}
    for n, b in block.items():
        groups.setdefault(b, set()).add(n)
    blocks = tuple(sorted((frozenset(g) for g in groups.values()), key=lambda b: min(b)))
    return Partition(chart, blocks)


def _disjoint_union(g, h):
    """Namespaced union of two charts: nodes ``g:x`` and ``h:y``, no initial."""
    ts = [
        Transition("g:" + t.src, t.action, TERMINATION if t.terminal else "g:" + t.dst)
        for t in g.transitions
    ]
    ts += [
        Transition("h:" + t.src, t.action, TERMINATION if t.terminal else "h:" + t.dst)
        for t in h.transitions
    ]
    nodes = {"g:" + n for n in g.nodes} | {"h:" + n for n in h.nodes}
    return Chart(ts, nodes=nodes)


def bisimilarity(g, h):
    """The greatest bisimulation between two charts, as a set of node pairs.

    Computed by refining the namespaced disjoint union, so shared node names
    in ``g`` and ``h`` do not collide.
    """
    union = _disjoint_union(g, h)
    block = _partition_map(union)
    return frozenset(
        (x, y)
        for x in g.nodes
        for y in h.nodes
        if block["g:" + x] == block["h:" + y]
    )


def is_bisimulation(relation, g, h):
    """Check the transfer conditions for ``relation`` between ``g`` and ``h``.

    For every related pair ``(x, y)``: each ``x −a→ x'`` must be matched by
    some ``y −a→ y'`` with ``(x', y')`` related; symmetrically for ``y``'s
    moves; and ``x −a→ √`` exactly when ``y −a→ √``.  The empty relation
    passes vacuously.
    """
    rel = set(relation)
    for x, y in rel:
        if x not in g.nodes or y not in h.nodes:
            raise UnknownNode("pair (%r, %r) outside the charts" % (x, y))
    for x, y in rel:
        if g.terminal_actions(x) != h.terminal_actions(y):
            return False
        for t in g.out(x):
            if t.terminal:
                continue
            if not any(
                u.action == t.action and not u.terminal and (t.dst, u.dst) in rel
                for u in h.out(y)
            ):
                return False
        for u in h.out(y):
            if u.terminal:
                continue
            if not any(
                t.action == u.action and not t.terminal and (t.dst, u.dst) in rel
                for t in g.out(x)
            ):
                return False
    return True


@dataclass(frozen=True)
class BisimMap:
    """A functional bisimulation ``source -> target``.

    The graph of ``mapping`` must satisfy the transfer conditions, and when
    both charts carry initial nodes the initial must map to the initial.
    Construction validates both and raises :class:`NotABisimulation`.
    """

    source: Chart
    target: Chart
    mapping: dict

    def __post_init__(self):
        m = self.mapping
        if set(m) != set(self.source.nodes):
            raise NotABisimulation("mapping is not total on source nodes")
        bad = set(m.values()) - set(self.target.nodes)
        if bad:
            raise NotABisimulation("mapping hits non-nodes: %s" % ", ".join(sorted(bad)))
        if self.source.initial is not None and self.target.initial is not None:
            if m[self.source.initial] != self.target.initial:
                raise NotABisimulation("initial node does not map to the initial node")
        if not is_bisimulation(set(m.items()), self.source, self.target):
            raise NotABisimulation("mapping fails the transfer conditions")

    def __call__(self, node):
        try:
            return self.mapping[node]
        except KeyError:
            raise UnknownNode("unknown node %r" % (node,)) from None

    def __hash__(self):
        return hash((self.source, self.target, frozenset(self.mapping.items())))

    def __eq__(self, other):
        if not isinstance(other, BisimMap):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.mapping == other.mapping
        )

    # --- map text format ---------------------------------------------------

    @classmethod
    def from_text(cls, text, source, target):
        lines = text.splitlines()
        if not lines or lines[0].strip() != "map v1":
            raise ParseError("missing 'map v1' header")
        mapping = {}
        for i, raw in enumerate(lines[1:], start=2):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError("expected '<src-node> <dst-node>' on line %d" % i)
            if parts[0] in mapping:
                raise ParseError("duplicate source node %r on line %d" % (parts[0], i))
            mapping[parts[0]] = parts[1]
        return cls(source, target, mapping)

    def to_text(self):
        lines = ["map v1"]
        for x in sorted(self.mapping):
            lines.append("%s %s" % (x, self.mapping[x]))
        return "\n".join(lines) + "\n"

    def to_json_dict(self):
        return {"v": 1, "map": {x: self.mapping[x] for x in sorted(self.mapping)}}

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2)


def image(theta, a):
    """The image of a sub-chart under a bisimulation map.

    For a sub-chart ``a`` of ``theta.source``, the image is the induced
    sub-chart of ``theta.target`` over the mapped node set (the start, when
    present, maps along).  Monotone: sub-charts map to sub-charts.
    """
    if a.parent != theta.source:
        raise UnknownNode("sub-chart does not live in the map's source chart")
    nodes = frozenset(theta(n) for n in a.nodes)
    start = theta(a.start) if a.start is not None else None
    return chart_of_nodes(theta.target, nodes, start=start)


class CollapseResult(NamedTuple):
    chart: Chart
    theta: BisimMap


def collapse(chart):
    """Quotient ``chart`` by its greatest self-bisimulation.

    Each class is represented by its least node id.  Returns the quotient
    chart together with the quotient :class:`BisimMap`; the quotient has no
    two distinct bisimilar nodes and is bisimilar to the input.
    """
    part = bisimilarity_partition(chart)
    rep = {}
    for b in part.blocks:
        r = min(b)
        for n in b:
            rep[n] = r
    ts = set()
    for t in chart.transitions:
        ts.add(
            Transition(rep[t.src], t.action, TERMINATION if t.terminal else rep[t.dst])
        )
    quotient = Chart(
        ts,
        nodes=set(rep.values()),
        initial=None if chart.initial is None else rep[chart.initial],
    )
    theta = BisimMap(chart, quotient, rep)
    return CollapseResult(quotient, theta)
