"""Command-line interface.

Subcommands cover the whole pipeline: parsing, interpretation, collapse,
witness search and checking, layering, reflection through a collapse, and
solution extraction, plus the end-to-end ``equiv`` decision.

Exit codes: 0 on success (``equiv``: EQUAL), 1 on a failed check or
NOT_EQUAL, 2 on I/O, syntax, or usage errors.  Output is deterministic for
identical inputs.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
from dataclasses import dataclass

from . import expr as expr_mod
from .bisim import collapse
from .chart import DEFAULT_STATE_CAP, Chart, interpret
from .errors import LleekitError, ParseError
from .expr import Action, Plus, Seq, Star, Zero, parse, unparse
from .lee import Witness, find_lee_witness, lee_to_llee
from .reflect import check_lemma_conditions, collapse_lee_witness, images
from .solve import equiv, extract_solution, solution_check

__all__ = ["Config", "run", "main"]


@dataclass
class Config:
    """Resolved global options."""

    cap: int = DEFAULT_STATE_CAP
    seed: int = 0
    format: str = "text"
    certificate: str | None = None

    def __post_init__(self):
        if self.cap <= 0:
            raise ValueError("state cap must be positive")


def _read(path):
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def _load_chart(path):
    text = _read(path)
    if text.lstrip().startswith("{"):
        return Chart.from_json(text)
    return Chart.from_text(text)


def _load_witness(path, chart):
    text = _read(path)
    if text.lstrip().startswith("{"):
        w = Witness.from_json(text)
        if w.chart != chart:
            raise ParseError("witness file carries a different chart than %r" % path)
        return w
    return Witness.from_text(text, chart)


def _chart_or_expression(arg, cfg):
    if os.path.exists(arg):
        return _load_chart(arg)
    return interpret(parse(arg), cap=cfg.cap)


def _print(text):
    sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _expression_dot(e):
    """Syntax-tree rendering of an expression."""
    lines = ["digraph expression {", "  node [shape=plaintext];"]
    counter = [0]

    def visit(node):
        idx = counter[0]
        counter[0] += 1
        if isinstance(node, Action):
            label = node.name
            kids = []
        elif isinstance(node, Zero):
            label, kids = "0", []
        elif isinstance(node, Plus):
            label, kids = "+", [node.left, node.right]
        elif isinstance(node, Seq):
            label, kids = ".", [node.left, node.right]
        elif isinstance(node, Star):
            label, kids = "*", [node.left, node.right]
        else:
            raise TypeError("not an expression: %r" % (node,))
        lines.append('  n%d [label="%s"];' % (idx, label))
        for kid in kids:
            lines.append("  n%d -> n%d;" % (idx, visit(kid)))
        return idx

    visit(e)
    lines.append("}")
    return "\n".join(lines) + "\n"


def _solution_text(sol):
    lines = ["solution v1"]
    for x in sorted(sol.assign):
        lines.append("%s %s" % (x, unparse(sol.assign[x])))
    return "\n".join(lines) + "\n"


def _solution_json_dict(sol):
    return {
        "v": 1,
        "solution": {x: expr_mod.to_json_dict(sol.assign[x]) for x in sorted(sol.assign)},
    }


def _no_dot(what):
    sys.stderr.write("error: no dot rendering for %s\n" % what)
    return 2


# --- subcommands -----------------------------------------------------------


def _cmd_parse(args, cfg):
    e = parse(args.expr)
    if cfg.format == "json":
        _print(expr_mod.to_json(e))
    elif cfg.format == "dot":
        _print(_expression_dot(e))
    else:
        _print(unparse(e))
    return 0


def _cmd_chart(args, cfg):
    g = interpret(parse(args.expr), cap=cfg.cap)
    if cfg.format == "json":
        _print(g.to_json())
    elif cfg.format == "dot":
        _print(g.to_dot())
    else:
        _print(g.to_text())
    return 0


def _cmd_collapse(args, cfg):
    g = _chart_or_expression(args.target, cfg)
    res = collapse(g)
    if args.map:
        with open(args.map, "w", encoding="utf-8") as f:
            f.write(res.theta.to_text())
    if cfg.format == "json":
        doc = {"v": 1, "chart": res.chart.to_json_dict(), "map": res.theta.to_json_dict()}
        _print(json.dumps(doc, indent=2))
    elif cfg.format == "dot":
        _print(res.chart.to_dot())
    else:
        out = res.chart.to_text()
        if not args.map:
            out += "\n" + res.theta.to_text()
        _print(out)
    return 0


def _cmd_lee(args, cfg):
    g = _load_chart(args.chart)
    w = find_lee_witness(g)
    if w is None:
        _print("no LEE witness")
        return 1
    if cfg.format == "json":
        _print(w.to_json())
    elif cfg.format == "dot":
        _print(w.to_dot())
    else:
        _print(w.to_text())
    return 0


def _witness_verdict(w, require_llee):
    rep = w.replay()
    lines = ["replay: %s" % ("ok" if rep.ok else "failed (%s)" % rep.reason)]
    code = 0
    if not rep.ok:
        code = 1
    else:
        lines.append("lee: yes")
        if rep.llee:
            lines.append("llee: yes")
        else:
            lines.append("llee: no (%s)" % rep.llee_reason)
            if require_llee:
                code = 1
    return "\n".join(lines) + "\n", code


def _cmd_llee(args, cfg):
    g = _load_chart(args.chart)
    w = _load_witness(args.witness, g)
    text, code = _witness_verdict(w, require_llee=True)
    _print(text)
    return code


def _cmd_check_witness(args, cfg):
    g = _load_chart(args.chart)
    w = _load_witness(args.witness, g)
    text, code = _witness_verdict(w, require_llee=args.llee)
    _print(text)
    return code


def _cmd_lee2llee(args, cfg):
    g = _load_chart(args.chart)
    w = _load_witness(args.witness, g)
    result = lee_to_llee(w)
    if cfg.format == "json":
        _print(result.to_json())
    elif cfg.format == "dot":
        _print(result.to_dot())
    else:
        _print(result.to_text())
    return 0


def _layered(w):
    rep = w.replay()
    if not rep.ok:
        raise LleekitError("witness does not replay: %s" % rep.reason)
    return w if rep.llee else lee_to_llee(w)


def _image_report_lines(hierarchy):
    lines = []
    for rec in hierarchy.records:
        lines.append(
            "image {%s} start %s preimages %d wsp %s"
            % (
                ", ".join(sorted(rec.image.nodes)),
                rec.start,
                len(rec.preimages),
                rec.well_structured.start,
            )
        )
    return lines


def _cmd_reflect(args, cfg):
    g = _load_chart(args.chart)
    w = _layered(_load_witness(args.witness, g))
    res = collapse(g)
    theta = res.theta
    hierarchy = images(theta, w)
    report = check_lemma_conditions(theta, w)
    if not report.ok:
        for _, msg in report.violations:
            sys.stderr.write("lemma violation: %s\n" % msg)
        return 1
    w_h = collapse_lee_witness(theta, w)
    if cfg.format == "json":
        doc = {
            "v": 1,
            "chart": res.chart.to_json_dict(),
            "map": theta.to_json_dict(),
            "images": [
                {
                    "nodes": sorted(rec.image.nodes),
                    "start": rec.start,
                    "preimages": len(rec.preimages),
                    "wsp_start": rec.well_structured.start,
                }
                for rec in hierarchy.records
            ],
            "witness": w_h.to_json_dict(),
        }
        _print(json.dumps(doc, indent=2))
    elif cfg.format == "dot":
        clusters = [
            (", ".join(sorted(rec.image.nodes)), rec.image.nodes)
            for rec in hierarchy.records
        ]
        _print(res.chart.to_dot(order=w_h.order, clusters=clusters))
    else:
        parts = [res.chart.to_text(), theta.to_text()]
        parts.append("\n".join(_image_report_lines(hierarchy)) + "\n")
        parts.append(w_h.to_text())
        _print("\n".join(parts))
    return 0


def _cmd_solve(args, cfg):
    g = _load_chart(args.chart)
    w = _load_witness(args.witness, g)
    sol = extract_solution(w)
    bad = solution_check(sol, cap=cfg.cap)
    if bad:
        sys.stderr.write("solution check failed at: %s\n" % ", ".join(bad))
        return 1
    if cfg.format == "json":
        _print(json.dumps(_solution_json_dict(sol), indent=2))
    elif cfg.format == "dot":
        return _no_dot("solutions")
    else:
        _print(_solution_text(sol))
    return 0


def _write_certificate(cert, directory):
    os.makedirs(directory, exist_ok=True)

    def put(name, text):
        with open(os.path.join(directory, name), "w", encoding="utf-8") as f:
            f.write(text)

    put("h.chart", cert.collapse.to_text())
    put("g1_to_h.map", cert.map1.to_text())
    put("g2_to_h.map", cert.map2.to_text())
    put("h.witness", cert.witness.to_text())
    put("h.solution", _solution_text(cert.solution))


def _cmd_equiv(args, cfg):
    e1 = parse(args.expr1)
    e2 = parse(args.expr2)
    res = equiv(e1, e2, cap=cfg.cap)
    if res.equal:
        cert = res.certificate
        directory = args.certificate or cfg.certificate
        if directory:
            _write_certificate(cert, directory)
        if cfg.format == "json":
            doc = {
                "v": 1,
                "equal": True,
                "expression": expr_mod.to_json_dict(cert.expression),
                "chart": cert.collapse.to_json_dict(),
            }
            _print(json.dumps(doc, indent=2))
        elif cfg.format == "dot":
            _print(cert.collapse.to_dot(order=cert.witness.order))
        else:
            _print("EQUAL\n%s" % unparse(cert.expression))
        return 0
    dist = res.distinction
    if cfg.format == "json":
        doc = {
            "v": 1,
            "equal": False,
            "block1": sorted(dist.block1),
            "block2": sorted(dist.block2),
        }
        _print(json.dumps(doc, indent=2))
    elif cfg.format == "dot":
        return _no_dot("distinctions")
    else:
        _print(
            "NOT_EQUAL\nblock1: %s\nblock2: %s"
            % (" ".join(sorted(dist.block1)), " ".join(sorted(dist.block2)))
        )
    return 1


# --- driver ----------------------------------------------------------------


def _build_parser():
    top = argparse.ArgumentParser(
        prog="lleekit",
        description="Process semantics and loop elimination for star expressions without 1.",
    )
    top.add_argument(
        "--format", choices=("text", "json", "dot"), default="text", help="output format"
    )
    top.add_argument(
        "--cap",
        type=int,
        default=None,
        help="state cap for interpretation (default %d, env LLEEKIT_STATE_CAP)"
        % DEFAULT_STATE_CAP,
    )
    top.add_argument("--seed", type=int, default=0, help="random seed")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("parse", help="parse an expression and print it back")
    p.add_argument("expr")
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("chart", help="interpret an expression as a chart")
    p.add_argument("expr")
    p.set_defaults(func=_cmd_chart)

    p = sub.add_parser("collapse", help="collapse a chart (file) or an expression")
    p.add_argument("target", metavar="FILE|EXPR")
    p.add_argument("--map", metavar="PATH", help="write the collapse map to PATH")
    p.set_defaults(func=_cmd_collapse)

    p = sub.add_parser("lee", help="search a chart file for an elimination witness")
    p.add_argument("chart")
    p.set_defaults(func=_cmd_lee)

    p = sub.add_parser("llee", help="check that a witness is layered")
    p.add_argument("chart")
    p.add_argument("witness")
    p.set_defaults(func=_cmd_llee)

    p = sub.add_parser("lee2llee", help="layer an elimination witness")
    p.add_argument("chart")
    p.add_argument("witness")
    p.set_defaults(func=_cmd_lee2llee)

    p = sub.add_parser(
        "reflect", help="collapse a chart and reflect its witness onto the collapse"
    )
    p.add_argument("chart")
    p.add_argument("witness")
    p.set_defaults(func=_cmd_reflect)

    p = sub.add_parser("solve", help="extract and check a solution from a layered witness")
    p.add_argument("chart")
    p.add_argument("witness")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("equiv", help="decide bisimilarity of two expressions")
    p.add_argument("expr1")
    p.add_argument("expr2")
    p.add_argument("--certificate", metavar="DIR", help="write certificate files to DIR")
    p.set_defaults(func=_cmd_equiv)

    p = sub.add_parser("check-witness", help="replay-check a witness")
    p.add_argument("chart")
    p.add_argument("witness")
    p.add_argument("--llee", action="store_true", help="also require layering")
    p.set_defaults(func=_cmd_check_witness)

    return top


def run(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cap = args.cap
        if cap is None:
            # explicit flag beats the environment beats the default
            cap = int(os.environ.get("LLEEKIT_STATE_CAP", DEFAULT_STATE_CAP))
        cfg = Config(cap=cap, seed=args.seed, format=args.format)
    except ValueError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2
    random.seed(cfg.seed)
    try:
        return args.func(args, cfg)
    except ParseError as exc:
        sys.stderr.write("parse error: %s\n" % exc)
        return 2
    except OSError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 2
    except json.JSONDecodeError as exc:
        sys.stderr.write("error: invalid JSON input (%s)\n" % exc)
        return 2
    except ValueError as exc:
        # malformed tokens in input files surface as plain ValueError
        sys.stderr.write("error: %s\n" % exc)
        return 2
    except LleekitError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
