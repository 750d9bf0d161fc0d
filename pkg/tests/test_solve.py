"""Equation systems, solution extraction, axiom matching, and equivalence."""

import random

import pytest

from generators import random_expression
from lleekit.bisim import collapse
from lleekit.chart import Chart, TERMINATION, Transition, interpret
from lleekit.errors import NotLLEE
from lleekit.expr import Action, Plus, Seq, Star, Zero, parse, unparse
from lleekit.lee import Witness, find_lee_witness, is_llee_witness, lee_to_llee
from lleekit.reflect import collapse_lee_witness
from lleekit.solve import (
    Solution,
    equation_system,
    equiv,
    extract_solution,
    is_axiom_instance,
    solution_check,
)

T = Transition

A, B, C = Action("a"), Action("b"), Action("c")


# --- equation systems -------------------------------------------------------


def test_equation_system_h(chart_h):
    assert str(equation_system(chart_h)) == "X = a.<X> + b.<X>"


def test_equation_system_g(chart_g):
    assert str(equation_system(chart_g)) == (
        "x = a.<x'> + b.<x'>\nx' = a.<x'> + b.<x>"
    )


def test_equation_system_ci(chart_ci):
    lines = str(equation_system(chart_ci)).splitlines()
    assert lines[-1] == "Z = a1.<Z> + a2.<X> + a3.<Y> + a4.<K>"
    assert lines[0] == "K = d2.<X>"


def test_equation_system_terminals_last():
    g = Chart(
        [T("X", "a", "Y"), T("Y", "a", "X"), T("X", "b", TERMINATION), T("Y", "c", TERMINATION)]
    )
    assert str(equation_system(g)) == "X = a.<Y> + b\nY = a.<X> + c"


def test_equation_system_deadlock():
    g = Chart([], nodes={"u"})
    eq = equation_system(g)
    assert str(eq) == "u = 0"
    assert eq.chart == g


# --- solution extraction ----------------------------------------------------


def test_extract_solution_terminal_only():
    g = Chart([T("u", "a", TERMINATION)], initial="u")
    sol = extract_solution(Witness(g, {}))
    assert sol["u"] == A
    assert sol.initial_expression() == A


def test_extract_solution_no_initial():
    g = Chart([T("u", "a", TERMINATION)])
    sol = extract_solution(Witness(g, {}))
    with pytest.raises(ValueError):
        sol.initial_expression()


def test_extract_solution_h(witness_h_hat):
    sol = extract_solution(witness_h_hat)
    assert sol["X"] == parse("(a+b)*0")
    assert solution_check(sol) == []


def test_extract_solution_g(witness_g_hat):
    sol = extract_solution(witness_g_hat)
    assert sol["x"] == parse("(a.(a*b)+b.(a*b))*0")
    assert sol.initial_expression() == sol["x"]
    assert solution_check(sol) == []


def test_extract_solution_ci(witness_ci_hat_prime):
    sol = extract_solution(witness_ci_hat_prime)
    assert solution_check(sol) == []


def test_extract_solution_needs_layering(witness_ci_hat):
    with pytest.raises(NotLLEE):
        extract_solution(witness_ci_hat)


def test_solution_check_failure(chart_h):
    sol = Solution(chart_h, {"X": parse("a*0")})
    assert solution_check(sol) == ["X"]


def test_solution_check_identity_assignment():
    # interpretation nodes are printed expressions, so each node solves itself
    g = interpret(parse("((a+b).(a*b))*0"))
    sol = Solution(g, {n: parse(n) for n in g.nodes})
    assert solution_check(sol) == []


def test_extract_solution_random():
    rng = random.Random(79)
    for _ in range(25):
        e = random_expression(rng, rng.randint(1, 12))
        g = interpret(e)
        w = lee_to_llee(find_lee_witness(g))
        sol = extract_solution(w)
        assert solution_check(sol) == []
        assert sol.initial_expression() == sol[g.initial]


# --- axiom schema matching --------------------------------------------------


@pytest.mark.parametrize(
    "lhs,rhs,name",
    [
        (Plus(A, B), Plus(B, A), "A1"),
        (Plus(A, A), Plus(A, A), "A1"),
        (Plus(Plus(A, B), C), Plus(A, Plus(B, C)), "A2"),
        (Plus(A, A), A, "A3"),
        (Seq(Plus(A, B), C), Plus(Seq(A, C), Seq(B, C)), "A4"),
        (Seq(Seq(A, B), C), Seq(A, Seq(B, C)), "A5"),
        (Plus(A, Zero()), A, "A6"),
        (Seq(Zero(), A), Zero(), "A7"),
        (Star(A, B), Plus(Seq(A, Star(A, B)), B), "A8"),
        (Seq(Star(A, B), C), Star(A, Seq(B, C)), "A9"),
        (Plus(Seq(A, Star(A, B)), B), Star(A, B), "R1"),
        (A, A, None),
        (A, B, None),
        (Plus(A, B), Plus(A, B), None),
        (Star(A, B), Star(A, B), None),
    ],
)
def test_is_axiom_instance(lhs, rhs, name):
    assert is_axiom_instance(lhs, rhs) == name


def test_axiom_instances_are_sound():
    cases = [
        (Plus(A, B), Plus(B, A)),
        (Seq(Plus(A, B), C), Plus(Seq(A, C), Seq(B, C))),
        (Seq(Zero(), A), Zero()),
        (Star(A, B), Plus(Seq(A, Star(A, B)), B)),
        (Seq(Star(A, B), C), Star(A, Seq(B, C))),
    ]
    for lhs, rhs in cases:
        assert is_axiom_instance(lhs, rhs) is not None
        assert equiv(lhs, rhs).equal


# --- equivalence decision ---------------------------------------------------


def test_equiv_star_unfolding():
    res = equiv(parse("((a+b).(a*b))*0"), parse("(a+b)*0"))
    assert res.equal and bool(res)
    cert = res.certificate
    assert res.distinction is None
    assert len(cert.collapse.nodes) == 1
    (r,) = cert.collapse.nodes
    assert cert.collapse.transitions == {T(r, "a", r), T(r, "b", r)}
    assert cert.collapse.initial == r
    assert unparse(cert.expression) == "(a+b)*0"
    assert cert.expression == cert.solution.initial_expression()
    assert cert.map1.source == res.chart1 and cert.map1.target == cert.collapse
    assert cert.map2.source == res.chart2 and cert.map2.target == cert.collapse
    assert cert.witness.chart == cert.collapse
    assert is_llee_witness(cert.witness)
    assert solution_check(cert.solution) == []


def test_equiv_reflexive():
    e = parse("a.(b+c)")
    assert equiv(e, e).equal


def test_equiv_deadlocks():
    res = equiv(parse("0"), parse("0.a"))
    assert res.equal
    assert unparse(res.certificate.expression) == "0"


def test_equiv_distributivity():
    assert equiv(parse("(a+b).c"), parse("a.c+b.c")).equal


def test_equiv_branching_time():
    # a.(b+c) and a.b+a.c differ under bisimilarity
    res = equiv(parse("a.(b+c)"), parse("a.b+a.c"))
    assert not res.equal and not bool(res)
    assert res.certificate is None
    d = res.distinction
    assert "g:" + res.chart1.initial in d.block1
    assert "h:" + res.chart2.initial in d.block2
    assert d.block1 != d.block2
    assert not equiv(parse("a.b+a.c"), parse("a.(b+c)")).equal


def test_equiv_certificate_expression_closes_the_loop():
    # the extracted expression is itself equivalent to both inputs
    e1, e2 = parse("((a+b).(a*b))*0"), parse("(a+b)*0")
    cert = equiv(e1, e2).certificate
    assert equiv(cert.expression, e1).equal
    assert equiv(cert.expression, e2).equal


def test_equiv_random_self():
    rng = random.Random(83)
    for _ in range(20):
        e = random_expression(rng, rng.randint(1, 10))
        res = equiv(e, e)
        assert res.equal
        assert solution_check(res.certificate.solution) == []


# --- solution transfer through a collapse -----------------------------------


def test_solution_transfer():
    rng = random.Random(89)
    for _ in range(20):
        e = random_expression(rng, rng.randint(1, 12))
        g = interpret(e)
        w = lee_to_llee(find_lee_witness(g))
        res = collapse(g)
        w_h = lee_to_llee(collapse_lee_witness(res.theta, w))
        sol = extract_solution(w_h)
        assert solution_check(sol) == []
        composed = Solution(g, {v: sol[res.theta(v)] for v in g.nodes})
        assert solution_check(composed) == []
