"""Charts: finite labelled transition graphs with a termination marker.

A chart is a graph over named nodes whose transitions carry action labels.
A transition may either lead to another node or to the reserved termination
marker ``√`` (successful exit), which is *not* a node.  Charts may carry an
initial node; when they do, every node must be reachable from it.

The module also provides the process semantics of 1-free regular expressions:
:func:`step` yields the one-step behaviour of an expression and
:func:`interpret` closes it into a chart whose node ids are the printed
reachable expressions (printing is injective, so ids are canonical).

Sub-charts come in two flavours, both :class:`NodeSetChart`:

* *induced*: all parent transitions between the chosen nodes, with terminal
  transitions excluded (:func:`chart_of_nodes`);
* *explicit*: a fixed transition list, used by elimination machinery that
  needs sub-charts that are not induced (see :mod:`lleekit.lee`).

Text format (``chart v1``)::

    chart v1
    # comment lines and blanks are ignored
    init x
    x a x'
    x b !

where ``!`` stands for ``√``.  The ``init`` line is optional.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import cached_property

from .errors import ParentMismatch, ParseError, StateExplosion, UnknownNode
from . import expr as _expr
from .expr import Action, Plus, Seq, Star, Zero

__all__ = [
    "TERMINATION",
    "Transition",
    "Chart",
    "NodeSetChart",
    "chart_of_nodes",
    "union_chart",
    "simple_cycles",
    "cycle_nodes",
    "step",
    "interpret",
    "DEFAULT_STATE_CAP",
]

DEFAULT_STATE_CAP = 100000


class _Termination:
    """The reserved target ``√`` of terminal transitions.  A singleton."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "√"


TERMINATION = _Termination()


@dataclass(frozen=True)
class Transition:
    """A labelled transition.  ``dst`` is a node id or :data:`TERMINATION`."""

    src: str
    action: str
    dst: object

    @property
    def terminal(self):
        return self.dst is TERMINATION

    def sort_key(self):
        # "!" precedes every action/node character we allow, which keeps
        # terminal transitions first among a node's transitions.
        dst = "!" if self.terminal else self.dst
        return (self.src, self.action, dst)

    def __repr__(self):
        return "%s -%s-> %s" % (self.src, self.action, "√" if self.terminal else self.dst)


def _check_token(kind, value):
    if not isinstance(value, str) or not value or value == "!" or any(c.isspace() for c in value):
        raise ValueError("invalid %s token: %r" % (kind, value))


class Chart:
    """An immutable chart.

    ``transitions`` is any iterable of :class:`Transition`; ``nodes`` may add
    isolated nodes beyond transition endpoints; ``alphabet`` may add unused
    actions.  If ``initial`` is given, every node must be reachable from it.
    """

    def __init__(self, transitions, nodes=(), initial=None, alphabet=()):
        ts = frozenset(transitions)
        ns = set(nodes)
        ab = set(alphabet)
        for t in ts:
            if not isinstance(t, Transition):
                raise TypeError("not a Transition: %r" % (t,))
            _check_token("node", t.src)
            ns.add(t.src)
            if not t.terminal:
                _check_token("node", t.dst)
                ns.add(t.dst)
            if not _expr._ACTION_RE.fullmatch(t.action):
                raise ValueError("invalid action token: %r" % (t.action,))
            ab.add(t.action)
        for n in ns:
            _check_token("node", n)
        if initial is not None:
            if initial not in ns:
                raise UnknownNode("initial node %r is not a node" % (initial,))
        self.transitions = ts
        self.nodes = frozenset(ns)
        self.alphabet = frozenset(ab)
        self.initial = initial
        if initial is not None:
            missing = self.nodes - self.reachable([initial])
            if missing:
                raise ValueError(
                    "nodes unreachable from the initial node: %s" % ", ".join(sorted(missing))
                )

    @cached_property
    def _out(self):
        out = {n: [] for n in self.nodes}
        for t in self.transitions:
            out[t.src].append(t)
        return {n: tuple(sorted(ts, key=Transition.sort_key)) for n, ts in out.items()}

    def out(self, node):
        """All transitions with source ``node``, deterministically ordered."""
        try:
            return self._out[node]
        except KeyError:
            raise UnknownNode("unknown node %r" % (node,)) from None

    def terminal_actions(self, node):
        """Actions ``a`` with a terminal transition ``node −a→ √``."""
        return frozenset(t.action for t in self.out(node) if t.terminal)

    def reachable(self, roots):
        """Nodes reachable from ``roots`` (which are included if they are nodes)."""
        seen = set(r for r in roots if r in self.nodes)
        stack = list(seen)
        out = self._out if "_out" in self.__dict__ else None
        while stack:
            n = stack.pop()
            ts = out[n] if out is not None else [t for t in self.transitions if t.src == n]
            for t in ts:
                if not t.terminal and t.dst not in seen:
                    seen.add(t.dst)
                    stack.append(t.dst)
        return frozenset(seen)

    def has_cycle(self, within=None):
        """True if some non-terminal cycle exists (restricted to ``within`` if given)."""
        nodes = self.nodes if within is None else frozenset(within) & self.nodes
        color = {}

        def visit(n):
            stack = [(n, iter(self._edges_in(nodes, n)))]
            color[n] = 1
            while stack:
                node, it = stack[-1]
                advanced = False
                for m in it:
                    c = color.get(m)
                    if c == 1:
                        return True
                    if c is None:
                        color[m] = 1
                        stack.append((m, iter(self._edges_in(nodes, m))))
                        advanced = True
                        break
                if not advanced:
                    color[node] = 2
                    stack.pop()
            return False

        for n in sorted(nodes):
            if n not in color and visit(n):
                return True
        return False

    def _edges_in(self, nodes, n):
        return [t.dst for t in self.out(n) if not t.terminal and t.dst in nodes]

    def rooted_at(self, node):
        """The sub-chart reachable from ``node``, with ``node`` as initial."""
        if node not in self.nodes:
            raise UnknownNode("unknown node %r" % (node,))
        keep = self.reachable([node])
        return Chart(
            (t for t in self.transitions if t.src in keep),
            nodes=keep,
            initial=node,
        )

    def __eq__(self, other):
        if not isinstance(other, Chart):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.initial == other.initial
            and self.transitions == other.transitions
        )

    def __hash__(self):
        return hash((self.nodes, self.initial, self.transitions))

    def __repr__(self):
        return "Chart(%d nodes, %d transitions%s)" % (
            len(self.nodes),
            len(self.transitions),
            ", init=%s" % self.initial if self.initial else "",
        )

    # --- text format -------------------------------------------------------

    @classmethod
    def from_text(cls, text):
        lines = text.splitlines()
        if not lines or lines[0].strip() != "chart v1":
            raise ParseError("missing 'chart v1' header")
        initial = None
        transitions = []
        nodes = set()
        for i, raw in enumerate(lines[1:], start=2):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "init":
                if len(parts) != 2:
                    raise ParseError("malformed init line %d" % i)
                if initial is not None:
                    raise ParseError("duplicate init line %d" % i)
                initial = parts[1]
                continue
            if parts[0] == "node":
                # optional explicit node declaration (isolated nodes)
                if len(parts) != 2:
                    raise ParseError("malformed node line %d" % i)
                nodes.add(parts[1])
                continue
            if len(parts) != 3:
                raise ParseError("expected '<src> <action> <dst>' on line %d" % i)
            src, action, dst = parts
            transitions.append(
                Transition(src, action, TERMINATION if dst == "!" else dst)
            )
        return cls(transitions, nodes=nodes, initial=initial)

    def to_text(self):
        lines = ["chart v1"]
        if self.initial is not None:
            lines.append("init %s" % self.initial)
        touched = set()
        for t in sorted(self.transitions, key=Transition.sort_key):
            touched.add(t.src)
            if not t.terminal:
                touched.add(t.dst)
            lines.append("%s %s %s" % (t.src, t.action, "!" if t.terminal else t.dst))
        for n in sorted(self.nodes - touched):
            lines.append("node %s" % n)
        return "\n".join(lines) + "\n"

    # --- JSON --------------------------------------------------------------

    def to_json_dict(self):
        return {
            "v": 1,
            "nodes": sorted(self.nodes),
            "alphabet": sorted(self.alphabet),
            "init": self.initial,
            "transitions": [
                {"src": t.src, "act": t.action, "dst": None if t.terminal else t.dst}
                for t in sorted(self.transitions, key=Transition.sort_key)
            ],
        }

    @classmethod
    def from_json_dict(cls, doc):
        ts = [
            Transition(d["src"], d["act"], TERMINATION if d["dst"] is None else d["dst"])
            for d in doc.get("transitions", ())
        ]
        return cls(
            ts,
            nodes=doc.get("nodes", ()),
            initial=doc.get("init"),
            alphabet=doc.get("alphabet", ()),
        )

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json(cls, text):
        return cls.from_json_dict(json.loads(text))

    # --- DOT ---------------------------------------------------------------

    def to_dot(self, order=None, clusters=None):
        """GraphViz rendering.

        ``order`` is an optional mapping from non-terminal transitions to order
        numbers (a witness): positive-order transitions are coloured and their
        edge labels annotated ``[n]``.  ``clusters`` is an optional list of
        ``(name, node_set)`` pairs; each node is placed in the smallest cluster
        containing it (overlaps beyond nesting cannot be drawn as boxes and are
        noted in a comment).
        """
        out = ["digraph chart {", "  rankdir=LR;", '  node [shape=circle];']
        has_terminal = any(t.terminal for t in self.transitions)
        if has_terminal:
            out.append('  "√" [shape=doublecircle label="√"];')
        if self.initial is not None:
            out.append('  __init__ [shape=point style=invis];')
            out.append('  __init__ -> %s;' % _dot_id(self.initial))

        placed = {}
        if clusters:
            sized = sorted(clusters, key=lambda kv: (len(kv[1]), kv[0]))
            for name, nodes in sized:
                for n in nodes:
                    if n not in placed:
                        placed[n] = name
            covered = {}
            for name, nodes in sized:
                mine = sorted(n for n in nodes if placed.get(n) == name)
                covered[name] = mine
                extra = sorted(set(nodes) - set(mine))
                if extra:
                    out.append(
                        "  // image %s also contains: %s" % (name, ", ".join(extra))
                    )
            for name, mine in covered.items():
                out.append('  subgraph "cluster_%s" {' % name)
                out.append('    label="%s"; style=dotted;' % name)
                for n in mine:
                    out.append("    %s;" % _dot_id(n))
                out.append("  }")
        for n in sorted(self.nodes - set(placed)):
            out.append("  %s;" % _dot_id(n))

        for t in sorted(self.transitions, key=Transition.sort_key):
            label = t.action
            attrs = ""
            if order is not None and not t.terminal:
                n = order.get(t, 0)
                if n > 0:
                    label = "%s [%d]" % (t.action, n)
                    attrs = ' color="#b40000" fontcolor="#b40000"'
            dst = '"√"' if t.terminal else _dot_id(t.dst)
            out.append('  %s -> %s [label="%s"%s];' % (_dot_id(t.src), dst, label, attrs))
        out.append("}")
        return "\n".join(out) + "\n"


def _dot_id(name):
    return '"%s"' % name.replace("\\", "\\\\").replace('"', '\\"')


# --- sub-charts ------------------------------------------------------------


@dataclass(frozen=True)
class NodeSetChart:
    """A sub-chart of ``parent`` over ``nodes``.

    Without ``explicit`` transitions the sub-chart is *induced*: it has every
    parent transition with both endpoints in ``nodes`` and no terminal
    transitions.  With ``explicit`` it carries exactly the given transitions
    (which may include terminal ones).  ``start`` marks a distinguished node
    where that is meaningful (generated and looping-back charts).
    """

    parent: Chart
    nodes: frozenset
    start: str | None = None
    explicit: tuple | None = field(default=None)

    def __post_init__(self):
        missing = self.nodes - self.parent.nodes
        if missing:
            raise UnknownNode("not nodes of the parent: %s" % ", ".join(sorted(missing)))
        if self.start is not None and self.start not in self.nodes:
            raise UnknownNode("start %r is not in the node set" % (self.start,))

    @property
    def is_induced(self):
        return self.explicit is None

    @property
    def transitions(self):
        """The sub-chart's transitions, deterministically ordered."""
        if self.explicit is not None:
            return self.explicit
        return tuple(
            sorted(
                (
                    t
                    for t in self.parent.transitions
                    if not t.terminal and t.src in self.nodes and t.dst in self.nodes
                ),
                key=Transition.sort_key,
            )
        )

    def nonterminal_transitions(self):
        return tuple(t for t in self.transitions if not t.terminal)

    def out(self, node):
        if node not in self.nodes:
            raise UnknownNode("unknown node %r" % (node,))
        return tuple(t for t in self.transitions if t.src == node)

    def same_chart(self, other):
        """Chart identity: same parent, same nodes, same transitions."""
        self._check_parent(other)
        return self.nodes == other.nodes and set(self.transitions) == set(other.transitions)

    def subchart_of(self, other):
        self._check_parent(other)
        return self.nodes <= other.nodes and set(self.transitions) <= set(other.transitions)

    def proper_subchart_of(self, other):
        return self.subchart_of(other) and not self.same_chart(other)

    def _check_parent(self, other):
        if self.parent != other.parent:
            raise ParentMismatch("sub-charts of different parents")

    def has_cycle(self):
        adj = {}
        for t in self.transitions:
            if not t.terminal:
                adj.setdefault(t.src, []).append(t.dst)
        color = {}

        def visit(n):
            stack = [(n, iter(adj.get(n, ())))]
            color[n] = 1
            while stack:
                node, it = stack[-1]
                advanced = False
                for m in it:
                    c = color.get(m)
                    if c == 1:
                        return True
                    if c is None:
                        color[m] = 1
                        stack.append((m, iter(adj.get(m, ()))))
                        advanced = True
                        break
                if not advanced:
                    color[node] = 2
                    stack.pop()
            return False

        return any(n not in color and visit(n) for n in sorted(adj))

    def __repr__(self):
        kind = "induced" if self.is_induced else "explicit"
        start = ", start=%s" % self.start if self.start else ""
        return "NodeSetChart(%s, {%s}%s)" % (kind, ", ".join(sorted(self.nodes)), start)


def chart_of_nodes(parent, nodes, start=None):
    """The induced sub-chart of ``parent`` over ``nodes``.

    Terminal transitions are never part of an induced sub-chart.  Raises
    :class:`UnknownNode` if some requested node is not a parent node.
    """
    return NodeSetChart(parent, frozenset(nodes), start=start)


def union_chart(a, b):
    """Join of two sub-charts of the same parent (node-set union).

    For explicit sub-charts the union carries the union of the transition
    lists; for induced ones it is induced again.
    """
    if a.parent != b.parent:
        raise ParentMismatch("cannot join sub-charts of different parents")
    if a.explicit is None and b.explicit is None:
        return NodeSetChart(a.parent, a.nodes | b.nodes)
    merged = set(a.transitions) | set(b.transitions)
    return NodeSetChart(
        a.parent, a.nodes | b.nodes, explicit=tuple(sorted(merged, key=Transition.sort_key))
    )


# --- cycle enumeration -----------------------------------------------------


def simple_cycles(chart, distinct_nodes=False):
    """All simple cycles as tuples of transitions.

    A simple cycle visits each node at most once; parallel transitions between
    the same nodes yield distinct cycles (edge-distinct enumeration), which is
    what the image machinery needs.  Each cycle is reported exactly once,
    rotated to start at its least node id; self-loops are length-1 cycles.
    With ``distinct_nodes=True`` cycles are deduplicated by their node
    sequence (one representative per node cycle).

    ``chart`` may be a :class:`Chart` or a :class:`NodeSetChart`.
    """
    if isinstance(chart, NodeSetChart):
        trans = [t for t in chart.transitions if not t.terminal]
    else:
        trans = [t for t in chart.transitions if not t.terminal]
    out = {}
    for t in sorted(trans, key=Transition.sort_key):
        out.setdefault(t.src, []).append(t)
    cycles = []
    # Enumerate cycles whose minimal node is `s`, for each s: DFS over nodes
    # >= s only, so every cycle appears exactly once, already rotated to its
    # least node.
    for s in sorted(out):
        path = []
        on_path = set()

        def dfs(n):
            on_path.add(n)
            for t in out.get(n, ()):
                d = t.dst
                if d == s:
                    cycles.append(tuple(path) + (t,))
                elif d > s and d not in on_path:
                    path.append(t)
                    dfs(d)
                    path.pop()
            on_path.discard(n)

        dfs(s)
    if distinct_nodes:
        seen = set()
        unique = []
        for cyc in cycles:
            key = cycle_nodes(cyc)
            if key not in seen:
                seen.add(key)
                unique.append(cyc)
        cycles = unique
    return cycles


def cycle_nodes(cycle):
    """The node sequence of a cycle (sources of its transitions, in order)."""
    return tuple(t.src for t in cycle)


# --- process semantics -----------------------------------------------------


def step(e):
    """One-step behaviour of an expression.

    Returns a list of ``(action, target)`` pairs where the target is either an
    expression or :data:`TERMINATION`:

    * an action can do itself and terminate;
    * ``0`` has no behaviour;
    * choice offers the steps of both operands;
    * in ``e1.e2`` a terminating step of ``e1`` continues as ``e2``, any other
      step keeps ``e2`` pending;
    * in ``e1*e2`` a step of ``e1`` loops back into ``e1*e2`` (sequencing the
      remainder in front if ``e1`` did not finish its pass), while ``e2``'s
      steps exit the loop as they are.
    """
    if isinstance(e, Action):
        return [(e.name, TERMINATION)]
    if isinstance(e, Zero):
        return []
    if isinstance(e, Plus):
        return step(e.left) + step(e.right)
    if isinstance(e, Seq):
        result = []
        for a, t in step(e.left):
            result.append((a, e.right if t is TERMINATION else Seq(t, e.right)))
        return result
    if isinstance(e, Star):
        result = []
        for a, t in step(e.left):
            result.append((a, e if t is TERMINATION else Seq(t, e)))
        for a, t in step(e.right):
            result.append((a, t))
        return result
    raise TypeError("not an expression: %r" % (e,))


def interpret(e, cap=None):
    """The chart of all expressions reachable from ``e`` under :func:`step`.

    Node ids are the printed expressions; the initial node is ``unparse(e)``.
    Raises :class:`StateExplosion` if more than ``cap`` nodes appear
    (``cap`` defaults to the ``LLEEKIT_STATE_CAP`` environment variable, or
    100000).
    """
    if cap is None:
        cap = int(os.environ.get("LLEEKIT_STATE_CAP", DEFAULT_STATE_CAP))
    start = e
    seen = {start}
    queue = [start]
    transitions = []
    while queue:
        cur = queue.pop(0)
        src = _expr.unparse(cur)
        for action, tgt in step(cur):
            if tgt is TERMINATION:
                transitions.append(Transition(src, action, TERMINATION))
                continue
            if tgt not in seen:
                if len(seen) >= cap:
                    raise StateExplosion(
                        "more than %d states while interpreting %r" % (cap, _expr.unparse(e))
                    )
                seen.add(tgt)
                queue.append(tgt)
            transitions.append(Transition(src, action, _expr.unparse(tgt)))
    return Chart(
        transitions,
        nodes={_expr.unparse(x) for x in seen},
        initial=_expr.unparse(start),
    )
