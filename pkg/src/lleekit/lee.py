"""Loop elimination witnesses on charts.

A *loop chart* with start node ``X`` satisfies three conditions:

* (L1) some cycle passes through ``X``;
* (L2) no cycle avoids ``X``;
* (L3) the chart has no terminal transitions.

Eliminating a loop sub-chart means removing its *entry* transitions (the
transitions leaving the start that belong to the sub-chart) and then garbage
collecting whatever became unreachable.  A chart satisfies *loop existence
and elimination* (LEE) when repeating such eliminations can end in a chart
without infinite paths.  A :class:`Witness` records one elimination run by
assigning each non-terminal transition an order number: 0 marks body
transitions, ``n > 0`` marks entries removed at step ``n``.  The run is
*layered* (LLEE) when no step starts at a node lying in the body of an
earlier eliminated sub-chart.

The sub-chart eliminated from ``X`` with entries ``E`` is the
⟨X,E⟩-*generated chart*: the entries plus every transition reachable from
their targets without passing through ``X`` again (including terminal
transitions of those continuation nodes, so a possible exit to ``√`` shows up
as an L3 failure).  A self-loop entry contributes no continuation, and the
start's own terminal transitions never disqualify the sub-chart.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .chart import (
    Chart,
    NodeSetChart,
    TERMINATION,
    Transition,
    chart_of_nodes,
)
from .errors import (
    EmptyEntrySet,
    InvalidWitness,
    NotALoopChart,
    NotLEE,
    NotLLEE,
    ParseError,
    UnknownNode,
)

__all__ = [
    "Witness",
    "generated_chart",
    "is_loop_chart",
    "eliminate",
    "max_entry_set",
    "find_lee_witness",
    "is_llee_witness",
    "loops_back_to",
    "LoopingBackChart",
    "looping_back_chart",
    "all_looping_back_charts",
    "check_lbc_properties",
    "PropertyReport",
    "lee_to_llee",
]


# --- generated sub-charts and loop conditions ------------------------------


def generated_chart(parent, start, entries):
    """The ⟨start, entries⟩-generated sub-chart of ``parent``.

    ``entries`` must be non-empty transitions of ``parent`` leaving ``start``.
    The result carries an explicit transition set: the entries plus all
    transitions on paths from the entry targets that avoid ``start``; the
    continuation of a node includes its terminal transitions.  Targets equal
    to ``start`` close the loop and are not expanded further.
    """
    entries = tuple(sorted(set(entries), key=Transition.sort_key))
    if not entries:
        raise EmptyEntrySet("generated chart needs at least one entry transition")
    if start not in parent.nodes:
        raise UnknownNode("unknown node %r" % (start,))
    for t in entries:
        if t not in parent.transitions:
            raise UnknownNode("entry %r is not a transition of the parent" % (t,))
        if t.src != start:
            raise ValueError("entry %r does not leave the start node %r" % (t, start))
    trans = set(entries)
    seen = set()
    queue = [t.dst for t in entries if not t.terminal and t.dst != start]
    while queue:
        y = queue.pop()
        if y in seen:
            continue
        seen.add(y)
        for t in parent.out(y):
            trans.add(t)
            if not t.terminal and t.dst != start and t.dst not in seen:
                queue.append(t.dst)
    return NodeSetChart(
        parent,
        frozenset({start}) | frozenset(seen),
        start=start,
        explicit=tuple(sorted(trans, key=Transition.sort_key)),
    )


def is_loop_chart(sub, start):
    """Check conditions L1 - L3 for a sub-chart with the given start node.

    For sub-charts with an explicit transition set (generated charts) the
    terminal condition L3 inspects exactly those transitions.  For induced
    node-set charts, which never contain terminal transitions themselves, L3
    asks that no member node besides the start has a terminal transition in
    the parent.
    """
    if start not in sub.nodes:
        raise UnknownNode("start %r is not in the sub-chart" % (start,))
    trans = sub.transitions
    if sub.is_induced:
        # the start's own terminal transitions never disqualify a loop chart
        if any(sub.parent.terminal_actions(n) for n in sub.nodes if n != start):
            return False
    elif any(t.terminal for t in trans):
        return False
    adj = {}
    for t in trans:
        if not t.terminal:
            adj.setdefault(t.src, []).append(t.dst)
    # L1: a cycle through the start
    stack = [d for d in adj.get(start, ())]
    seen = set()
    found = start in stack
    while stack and not found:
        n = stack.pop()
        if n == start:
            found = True
            break
        if n in seen:
            continue
        seen.add(n)
        stack.extend(adj.get(n, ()))
    if not found:
        return False
    # L2: no cycle avoiding the start
    color = {}

    def cyclic_from(n):
        frames = [(n, iter(adj.get(n, ())))]
        color[n] = 1
        while frames:
            node, it = frames[-1]
            advanced = False
            for m in it:
                if m == start:
                    continue
                c = color.get(m)
                if c == 1:
                    return True
                if c is None:
                    color[m] = 1
                    frames.append((m, iter(adj.get(m, ()))))
                    advanced = True
                    break
            if not advanced:
                color[node] = 2
                frames.pop()
        return False

    return not any(
        n != start and n not in color and cyclic_from(n) for n in sorted(adj)
    )


def _remove_and_gc(chart, removed, roots):
    """Drop ``removed`` transitions, then keep only what ``roots`` can reach."""
    removed = set(removed)
    keep_t = [t for t in chart.transitions if t not in removed]
    adj = {}
    for t in keep_t:
        if not t.terminal:
            adj.setdefault(t.src, []).append(t.dst)
    seen = set(r for r in roots if r in chart.nodes)
    stack = list(seen)
    while stack:
        n = stack.pop()
        for d in adj.get(n, ()):
            if d not in seen:
                seen.add(d)
                stack.append(d)
    trans = [t for t in keep_t if t.src in seen]
    initial = chart.initial if chart.initial in seen else None
    if initial is not None:
        # the chart invariant needs full reachability from the initial node
        reach = {initial}
        stack = [initial]
        adj2 = {}
        for t in trans:
            if not t.terminal:
                adj2.setdefault(t.src, []).append(t.dst)
        while stack:
            n = stack.pop()
            for d in adj2.get(n, ()):
                if d not in reach:
                    reach.add(d)
                    stack.append(d)
        if reach != seen:
            initial = None
    return Chart(trans, nodes=seen, initial=initial)


def eliminate(chart, start, entries, roots):
    """Eliminate the loop sub-chart ⟨start, entries⟩ from ``chart``.

    Removes the entries, then garbage-collects nodes unreachable from
    ``roots``.  Raises :class:`NotALoopChart` if ⟨start, entries⟩ does not
    generate a loop sub-chart of ``chart``.
    """
    gen = generated_chart(chart, start, entries)
    if not is_loop_chart(gen, start):
        raise NotALoopChart(
            "⟨%s, {%s}⟩ does not generate a loop sub-chart"
            % (start, ", ".join(map(repr, entries)))
        )
    return _remove_and_gc(chart, entries, roots)


def _avoiding_closure(chart, source, avoid):
    """Nodes reachable from ``source`` without passing through ``avoid``.

    ``source`` itself is included (unless it equals ``avoid``); expansion
    stops at ``avoid``, which is never included.
    """
    if source == avoid:
        return frozenset()
    seen = {source}
    stack = [source]
    while stack:
        n = stack.pop()
        for t in chart.out(n):
            if not t.terminal and t.dst != avoid and t.dst not in seen:
                seen.add(t.dst)
                stack.append(t.dst)
    return frozenset(seen)


def max_entry_set(chart, node):
    """The largest valid entry set for eliminating a loop at ``node``.

    A non-terminal transition ``node −a→ Y`` qualifies when the node-avoiding
    reachable closure of ``Y`` has no terminal transitions and no cycles
    avoiding ``node`` (self-loops qualify trivially).  Qualification is
    per-entry: it does not depend on which other entries are chosen.  Returns
    the empty set when no qualifying subset generates a loop sub-chart, i.e.
    when no qualifying entry closes a cycle back through ``node``.
    """
    valid = []
    closes_loop = False
    for t in chart.out(node):
        if t.terminal:
            continue
        if t.dst == node:
            valid.append(t)
            closes_loop = True
            continue
        closure = _avoiding_closure(chart, t.dst, node)
        if any(chart.terminal_actions(y) for y in closure):
            continue
        if chart.has_cycle(within=closure):
            continue
        valid.append(t)
        if any(
            not u.terminal and u.dst == node for y in closure for u in chart.out(y)
        ):
            closes_loop = True
    if not valid or not closes_loop:
        return frozenset()
    return frozenset(valid)


# --- witnesses -------------------------------------------------------------


@dataclass(frozen=True)
class ReplayStep:
    """One elimination in a witness replay."""

    order: int
    start: str
    entries: tuple
    body: frozenset


@dataclass(frozen=True)
class ReplayResult:
    ok: bool
    reason: str | None
    steps: tuple
    final: Chart | None
    llee: bool
    llee_reason: str | None


class Witness:
    """An order assignment on a chart's non-terminal transitions.

    ``order`` must map every non-terminal transition to a non-negative
    integer, and the positive values used must form ``{1, …, m}`` with no
    gaps.  Replaying the witness (see :meth:`replay`) eliminates, for
    ``n = 1, 2, …``, the order-``n`` transitions grouped per start node; each
    group must generate a loop sub-chart of the chart as it then stands.
    Groups sharing an order number are independent eliminations: they are
    processed sequentially in any order that works (deferring a group whose
    sub-chart only becomes a loop chart after a sibling group is gone).
    Garbage collection keeps what the initial node reaches, or everything
    when the chart has no initial node.
    """

    def __init__(self, chart, order):
        nonterminal = frozenset(t for t in chart.transitions if not t.terminal)
        keys = frozenset(order)
        if keys != nonterminal:
            missing = nonterminal - keys
            extra = keys - nonterminal
            details = []
            if missing:
                details.append("missing %s" % ", ".join(map(repr, sorted(missing, key=Transition.sort_key))))
            if extra:
                details.append("spurious %s" % ", ".join(map(repr, sorted(extra, key=Transition.sort_key))))
            raise InvalidWitness(
                "order map must cover exactly the non-terminal transitions (%s)"
                % "; ".join(details)
            )
        for t, n in order.items():
            if not isinstance(n, int) or n < 0:
                raise InvalidWitness("order of %r must be a non-negative integer" % (t,))
        used = sorted(set(n for n in order.values() if n > 0))
        if used != list(range(1, len(used) + 1)):
            raise InvalidWitness(
                "positive orders must be 1..m without gaps, got %s" % used
            )
        self.chart = chart
        self.order = dict(order)
        self._replay = None
        self._lpb = None

    @property
    def max_order(self):
        return max([n for n in self.order.values()], default=0)

    def entries(self, node=None):
        """Positive-order transitions, optionally restricted to one source."""
        ts = [t for t, n in self.order.items() if n > 0]
        if node is not None:
            ts = [t for t in ts if t.src == node]
        return tuple(sorted(ts, key=Transition.sort_key))

    def body_transitions(self):
        return tuple(
            sorted(
                (t for t, n in self.order.items() if n == 0), key=Transition.sort_key
            )
        )

    def replay(self):
        """Run the recorded elimination; cached.  Never raises."""
        if self._replay is None:
            self._replay = _replay(self)
        return self._replay

    @property
    def is_lee(self):
        return self.replay().ok

    def __eq__(self, other):
        if not isinstance(other, Witness):
            return NotImplemented
        return self.chart == other.chart and self.order == other.order

    def __hash__(self):
        return hash((self.chart, frozenset(self.order.items())))

    def __repr__(self):
        return "Witness(%r, %d entries, max order %d)" % (
            self.chart,
            len(self.entries()),
            self.max_order,
        )

    # --- text format -------------------------------------------------------

    @classmethod
    def from_text(cls, text, chart):
        lines = text.splitlines()
        if not lines or lines[0].strip() != "witness v1":
            raise ParseError("missing 'witness v1' header")
        order = {}
        for i, raw in enumerate(lines[1:], start=2):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ParseError("expected '<src> <action> <dst> <order>' on line %d" % i)
            src, action, dst, num = parts
            t = Transition(src, action, TERMINATION if dst == "!" else dst)
            if t.terminal:
                raise ParseError("terminal transitions carry no order (line %d)" % i)
            if t not in chart.transitions:
                raise ParseError("unknown transition %r on line %d" % (t, i))
            if t in order:
                raise ParseError("duplicate transition %r on line %d" % (t, i))
            try:
                order[t] = int(num)
            except ValueError:
                raise ParseError("bad order number %r on line %d" % (num, i)) from None
        return cls(chart, order)

    def to_text(self):
        lines = ["witness v1"]
        for t in sorted(self.order, key=Transition.sort_key):
            lines.append("%s %s %s %d" % (t.src, t.action, t.dst, self.order[t]))
        return "\n".join(lines) + "\n"

    def to_json_dict(self):
        return {
            "v": 1,
            "chart": self.chart.to_json_dict(),
            "orders": [
                {"src": t.src, "act": t.action, "dst": t.dst, "order": self.order[t]}
                for t in sorted(self.order, key=Transition.sort_key)
            ],
        }

    def to_json(self):
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        chart = Chart.from_json_dict(doc["chart"])
        order = {
            Transition(d["src"], d["act"], d["dst"]): d["order"] for d in doc["orders"]
        }
        return cls(chart, order)

    def to_dot(self):
        return self.chart.to_dot(order=self.order)


def _witness_roots(chart):
    if chart.initial is not None:
        return frozenset([chart.initial])
    return frozenset(chart.nodes)


def _replay(w):
    chart = w.chart
    roots = _witness_roots(chart)
    cur = chart
    steps = []
    eliminated_bodies = set()
    llee = True
    llee_reason = None
    for n in range(1, w.max_order + 1):
        level = [t for t, o in w.order.items() if o == n]
        for t in level:
            if t not in cur.transitions:
                return ReplayResult(
                    False,
                    "order-%d transition %r was already garbage-collected" % (n, t),
                    tuple(steps),
                    None,
                    False,
                    None,
                )
        groups = {}
        for t in level:
            groups.setdefault(t.src, []).append(t)
        pending = {
            x: tuple(sorted(ts, key=Transition.sort_key)) for x, ts in groups.items()
        }
        while pending:
            progressed = False
            for x in sorted(pending):
                entries = pending[x]
                gen = generated_chart(cur, x, entries)
                if not is_loop_chart(gen, x):
                    continue
                if llee and x in eliminated_bodies:
                    llee = False
                    llee_reason = (
                        "step %d starts at %s, which lies in the body of an "
                        "earlier eliminated loop sub-chart" % (n, x)
                    )
                body = gen.nodes - {x}
                steps.append(ReplayStep(n, x, entries, frozenset(body)))
                eliminated_bodies |= body
                cur = _remove_and_gc(cur, entries, roots)
                del pending[x]
                progressed = True
                break
            if not progressed:
                x = sorted(pending)[0]
                return ReplayResult(
                    False,
                    "order-%d entries at %s do not span a loop sub-chart" % (n, x),
                    tuple(steps),
                    None,
                    False,
                    None,
                )
    if cur.has_cycle():
        return ReplayResult(
            False,
            "a cycle survives the recorded elimination",
            tuple(steps),
            cur,
            False,
            None,
        )
    return ReplayResult(True, None, tuple(steps), cur, llee, llee_reason)


def is_llee_witness(w):
    """Whether ``w`` replays as a layered elimination.

    Raises :class:`InvalidWitness` if the replay itself fails (the witness is
    not even an elimination run).
    """
    rep = w.replay()
    if not rep.ok:
        raise InvalidWitness(rep.reason)
    return rep.llee


# --- witness search --------------------------------------------------------


def find_lee_witness(chart):
    """Search for an elimination run ending without infinite paths.

    Greedy with backtracking: repeatedly eliminate the maximal entry set of
    the least node id that admits one; on a dead end (cycles remain but no
    node has a non-empty maximal entry set) backtrack over the node choice.
    Returns the :class:`Witness` (eliminated entries get their step number;
    everything else, including garbage-collected transitions, gets 0), or
    ``None`` when every elimination sequence gets stuck.
    """
    roots = _witness_roots(chart)
    assignment = {}
    failed = set()

    def search(cur, step_no):
        if not cur.has_cycle():
            return True
        key = cur.transitions
        if key in failed:
            return False
        for x in sorted(cur.nodes):
            entries = max_entry_set(cur, x)
            if not entries:
                continue
            for t in entries:
                assignment[t] = step_no
            nxt = _remove_and_gc(cur, entries, roots)
            if search(nxt, step_no + 1):
                return True
            for t in entries:
                del assignment[t]
        failed.add(key)
        return False

    if not search(chart, 1):
        return None
    order = {
        t: assignment.get(t, 0) for t in chart.transitions if not t.terminal
    }
    return Witness(chart, order)


# --- looping-back structure ------------------------------------------------


def loops_back_to(w):
    """The loops-back relation of a layered witness and its transitive closure.

    ``x ↘ y`` holds when some path leaves ``x`` by a positive-order (entry)
    transition and continues through body transitions to ``y`` without ever
    reaching ``x`` again — so every node after ``x`` on the path, including
    ``y``, differs from ``x``, and the relation's transitive closure is a
    strict order (its digraph is acyclic for layered witnesses).

    Returns ``(direct, closure)`` as frozensets of pairs.  Requires a layered
    witness (:class:`NotLLEE` otherwise).
    """
    if not is_llee_witness(w):
        raise NotLLEE("loops-back structure requires a layered witness")
    if w._lpb is not None:
        return w._lpb
    chart = w.chart
    direct = set()
    succ = {}
    for x in chart.nodes:
        reached = set()
        stack = [
            t.dst
            for t in chart.out(x)
            if not t.terminal and w.order[t] > 0 and t.dst != x
        ]
        while stack:
            y = stack.pop()
            if y in reached:
                continue
            reached.add(y)
            for t in chart.out(y):
                if (
                    not t.terminal
                    and w.order[t] == 0
                    and t.dst != x
                    and t.dst not in reached
                ):
                    stack.append(t.dst)
        succ[x] = reached
        direct.update((x, y) for y in reached)
    closure = set()
    for x in chart.nodes:
        reach = set()
        stack = list(succ[x])
        while stack:
            y = stack.pop()
            if y in reach:
                continue
            reach.add(y)
            stack.extend(succ[y])
        closure.update((x, y) for y in reach)
    w._lpb = (frozenset(direct), frozenset(closure))
    return w._lpb


@dataclass(frozen=True)
class LoopingBackChart:
    """The induced sub-chart over a node and everything it loops back through."""

    parent: Chart
    witness: Witness
    start: str
    nodes: frozenset

    @property
    def body(self):
        return self.nodes - {self.start}

    @property
    def chart(self):
        return chart_of_nodes(self.parent, self.nodes, start=self.start)

    def __repr__(self):
        return "LoopingBackChart(%s: {%s})" % (self.start, ", ".join(sorted(self.nodes)))


def looping_back_chart(w, node):
    """The looping-back chart of ``node``, or ``None`` if it contains no loop.

    Its node set is ``{node}`` plus the ↘⁺-successors of ``node``; the chart
    is the induced sub-chart over that set.  A node without entries (or whose
    induced sub-chart is acyclic) has no looping-back chart.
    """
    if node not in w.chart.nodes:
        raise UnknownNode("unknown node %r" % (node,))
    _, closure = loops_back_to(w)
    nodes = frozenset({node}) | frozenset(y for x, y in closure if x == node)
    sub = chart_of_nodes(w.chart, nodes, start=node)
    if not sub.has_cycle():
        return None
    return LoopingBackChart(w.chart, w, node, nodes)


def all_looping_back_charts(w):
    """Mapping from node to its looping-back chart (nodes without one omitted)."""
    result = {}
    for n in sorted(w.chart.nodes):
        lbc = looping_back_chart(w, n)
        if lbc is not None:
            result[n] = lbc
    return result


@dataclass(frozen=True)
class PropertyReport:
    ok: bool
    violations: tuple

    def __bool__(self):
        return self.ok


def check_lbc_properties(lbc):
    """Structural properties of a looping-back chart.

    (i) the looping-back chart of every body node is a proper sub-chart;
    (ii) no transition leaves a body node for a node outside the chart;
    (iii) no body node can reach ``√`` before coming back through the start
    (no terminal transition is reachable from a body node on a start-avoiding
    path).  Returns a :class:`PropertyReport` listing violations.
    """
    w = lbc.witness
    chart = lbc.parent
    violations = []
    for y in sorted(lbc.body):
        sub = looping_back_chart(w, y)
        if sub is not None and not (
            sub.nodes <= lbc.nodes and sub.nodes != lbc.nodes
        ):
            violations.append(
                ("i", "looping-back chart of body node %s is not a proper sub-chart" % y)
            )
    for y in sorted(lbc.body):
        for t in chart.out(y):
            if not t.terminal and t.dst not in lbc.nodes:
                violations.append(("ii", "body transition %r escapes the chart" % (t,)))
    for y in sorted(lbc.body):
        closure = _avoiding_closure(chart, y, lbc.start)
        for z in sorted(closure):
            if chart.terminal_actions(z):
                violations.append(
                    (
                        "iii",
                        "body node %s reaches a terminal transition at %s before %s"
                        % (y, z, lbc.start),
                    )
                )
                break
    return PropertyReport(not violations, tuple(violations))


# --- from plain witnesses to layered witnesses -----------------------------


def _loop_forming(chart, start, entry):
    """Whether the entry's continuation can return to the start in ``chart``."""
    if entry.dst == start:
        return True
    closure = _avoiding_closure(chart, entry.dst, start)
    return any(
        not t.terminal and t.dst == start for y in closure for t in chart.out(y)
    )


def _normalize(w):
    """Rewrite ``w`` so every entry has a unique order number.

    Groups are split into single-entry steps following the replayed order
    (deterministic within a step).  Entries whose continuation cannot come
    back to their start at their step are not loop sub-charts on their own;
    they are demoted to body transitions, which is sound: at that point their
    start-avoiding closure is terminal-free, acyclic and never reaches the
    start, so keeping them cannot create new loops or exits later.
    """
    rep = w.replay()
    chart = w.chart
    roots = _witness_roots(chart)
    labels = {t: 0 for t in w.order}
    cur = chart
    counter = 0
    for step in rep.steps:
        loopers = []
        for e in step.entries:
            if e not in cur.transitions:
                raise RuntimeError("normalization lost a scheduled entry %r" % (e,))
            if _loop_forming(cur, step.start, e):
                loopers.append(e)
        for e in loopers:
            counter += 1
            labels[e] = counter
        cur = _remove_and_gc(cur, loopers, roots)
    w1 = Witness(chart, labels)
    rep1 = w1.replay()
    if not rep1.ok:
        raise RuntimeError("normalized witness fails to replay: %s" % rep1.reason)
    return w1


def _zero_path(chart, labels, source, target):
    """Shortest path from ``source`` to ``target`` over order-0 transitions.

    Returns the transition list, ``[]`` when ``source == target``, or ``None``
    when no such path exists in ``chart``.
    """
    if source == target:
        return []
    prev = {source: None}
    queue = [source]
    while queue:
        n = queue.pop(0)
        for t in chart.out(n):
            if t.terminal or labels.get(t, 1) != 0:
                continue
            if t.dst not in prev:
                prev[t.dst] = t
                if t.dst == target:
                    path = []
                    cur = target
                    while prev[cur] is not None:
                        path.append(prev[cur])
                        cur = prev[cur].src
                    path.reverse()
                    return path
                queue.append(t.dst)
    return None


def lee_to_llee(w):
    """Transform a replay-valid witness into a layered one on the same chart.

    After normalizing to unique order numbers, the orders are walked from the
    smallest up, simulating the elimination.  At step ``n`` with entry
    ``R −[n]→ ·``, every entry with a larger order leaving a body node of the
    current ⟨R, ·⟩-generated loop sub-chart violates layering; it is demoted
    to a body transition, and each loop thereby left without entries must
    pass through ``R`` (otherwise it would be a cycle avoiding ``R`` inside a
    loop sub-chart), so the transition leaving ``R`` on that loop inherits
    the vacated order.  Positive orders are renumbered consecutively at the
    end and the result is checked to be a layered witness.

    Raises :class:`NotLEE` when ``w`` does not replay.  Already-layered
    witnesses come back with the same entry set, orders renumbered.
    """
    if not w.is_lee:
        raise NotLEE(w.replay().reason)
    w1 = _normalize(w)
    chart = w1.chart
    roots = _witness_roots(chart)
    labels = dict(w1.order)
    cur = chart
    processed = set()
    while True:
        remaining = sorted(k for k in set(labels.values()) if k > 0 and k not in processed)
        if not remaining:
            break
        n = remaining[0]
        processed.add(n)
        # Normalization makes order numbers unique, but a repair below may
        # promote several transitions of one start node to the same vacated
        # number; such a step is a single grouped elimination.
        step_entries = tuple(
            sorted((t for t, k in labels.items() if k == n), key=Transition.sort_key)
        )
        r = step_entries[0].src
        if any(t.src != r for t in step_entries):
            raise RuntimeError("order %d spans several start nodes" % n)
        for t in step_entries:
            if t not in cur.transitions:
                raise RuntimeError("entry %r vanished before its step" % (t,))
        gen = generated_chart(cur, r, step_entries)
        if not is_loop_chart(gen, r):
            raise RuntimeError(
                "⟨%s, %s⟩ stopped being a loop sub-chart during switching"
                % (r, list(step_entries))
            )
        body = gen.nodes - {r}
        demotions = sorted(
            (t for t, k in labels.items() if k > n and t.src in body and t in cur.transitions),
            key=lambda t: (labels[t],) + t.sort_key(),
        )
        for t in demotions:
            k = labels[t]
            labels[t] = 0
            while True:
                back = _zero_path(cur, labels, t.dst, t.src)
                if back is None:
                    break
                cycle = [t] + back
                pick = next((c for c in cycle if c.src == r), None)
                if pick is None:
                    raise RuntimeError(
                        "an entry-less loop avoided the eliminating node %s" % r
                    )
                labels[pick] = k
        cur = _remove_and_gc(cur, step_entries, roots)
    used = sorted(set(k for k in labels.values() if k > 0))
    renumber = {k: i for i, k in enumerate(used, start=1)}
    final = {t: renumber.get(k, 0) for t, k in labels.items()}
    w2 = Witness(chart, final)
    rep2 = w2.replay()
    if not rep2.ok:
        raise RuntimeError("switching produced a non-replayable witness: %s" % rep2.reason)
    if not rep2.llee:
        raise RuntimeError("switching failed to produce a layered witness: %s" % rep2.llee_reason)
    return w2
