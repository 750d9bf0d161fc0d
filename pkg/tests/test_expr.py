"""Expression syntax: parsing, printing, JSON, and basic measures."""

import json
import random

import pytest
from hypothesis import given, settings

from generators import expressions, random_expression
from lleekit.errors import AssocError, LleekitError, ParseError
from lleekit.expr import (
    Action,
    Plus,
    Seq,
    Star,
    Zero,
    actions_of,
    from_json,
    from_json_dict,
    parse,
    size,
    to_json,
    unparse,
)

A, B, C = Action("a"), Action("b"), Action("c")


def test_parse_atoms():
    assert parse("a") == A
    assert parse("0") == Zero()
    assert parse("ab1_x") == Action("ab1_x")
    assert parse(" a + b ") == Plus(A, B)
    assert parse("(a)") == A


def test_parse_precedence():
    # + binds weakest, then ., then *
    assert parse("a+b.c") == Plus(A, Seq(B, C))
    assert parse("a.b+c") == Plus(Seq(A, B), C)
    assert parse("a+b*c") == Plus(A, Star(B, C))
    assert parse("a.b*c") == Seq(A, Star(B, C))
    assert parse("a*b.c") == Seq(Star(A, B), C)
    assert parse("(a+b).c") == Seq(Plus(A, B), C)
    assert parse("(a+b)*c") == Star(Plus(A, B), C)


def test_parse_left_associativity():
    assert parse("a+b+c") == Plus(Plus(A, B), C)
    assert parse("a.b.c") == Seq(Seq(A, B), C)


def test_star_does_not_associate():
    with pytest.raises(AssocError) as info:
        parse("a*b*c")
    assert info.value.position == 3
    assert isinstance(info.value, ParseError)
    assert parse("(a*b)*c") == Star(Star(A, B), C)
    assert parse("a*(b*c)") == Star(A, Star(B, C))


@pytest.mark.parametrize(
    "text,position",
    [
        ("", 0),
        ("a+", 2),
        ("(a", 2),
        (")", 0),
        ("a b", 2),
        ("A", 0),
        ("a$b", 1),
        ("a..b", 2),
    ],
)
def test_parse_errors_carry_positions(text, position):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.position == position
    assert isinstance(info.value, LleekitError)
    assert isinstance(info.value, ValueError)


@pytest.mark.parametrize(
    "e,text",
    [
        (Plus(Plus(A, B), C), "a+b+c"),
        (Plus(A, Plus(B, C)), "a+(b+c)"),
        (Seq(Seq(A, B), C), "a.b.c"),
        (Seq(A, Seq(B, C)), "a.(b.c)"),
        (Seq(Plus(A, B), C), "(a+b).c"),
        (Plus(A, Seq(B, C)), "a+b.c"),
        (Star(Plus(A, B), C), "(a+b)*c"),
        (Star(A, Seq(B, C)), "a*(b.c)"),
        (Star(Star(A, B), C), "(a*b)*c"),
        (Star(A, Star(B, C)), "a*(b*c)"),
        (Seq(Star(A, B), C), "a*b.c"),
        (Seq(A, Star(B, C)), "a.b*c"),
        (Zero(), "0"),
        (Plus(Zero(), A), "0+a"),
        (Star(A, Zero()), "a*0"),
    ],
)
def test_unparse_minimal_parentheses(e, text):
    assert unparse(e) == text
    assert parse(text) == e


def test_str_is_unparse():
    assert str(Star(A, B)) == "a*b"
    assert str(Zero()) == "0"


def test_roundtrip_seeded():
    rng = random.Random(7)
    for _ in range(300):
        e = random_expression(rng, rng.randint(1, 30))
        assert parse(unparse(e)) == e


@settings(max_examples=80, deadline=None)
@given(expressions)
def test_roundtrip_hypothesis(e):
    assert parse(unparse(e)) == e


def test_json_roundtrip():
    e = parse("(a+b)*0.c")
    doc = json.loads(to_json(e))
    assert doc["v"] == 1
    assert from_json(to_json(e)) == e
    # the bare dictionary form round-trips too
    assert from_json(json.dumps(doc["expression"])) == e


@settings(max_examples=60, deadline=None)
@given(expressions)
def test_json_roundtrip_hypothesis(e):
    assert from_json(to_json(e)) == e


def test_json_unknown_op():
    with pytest.raises(ParseError):
        from_json_dict({"op": "loop"})


def test_size_and_actions():
    assert size(parse("a")) == 1
    assert size(parse("a.b+0")) == 5
    assert size(parse("(a*b)*c")) == 5
    assert actions_of(parse("a.(b+a)*c")) == {"a", "b", "c"}
    assert actions_of(Zero()) == set()


def test_action_name_validation():
    with pytest.raises(ValueError):
        Action("A")
    with pytest.raises(ValueError):
        Action("")
    with pytest.raises(ValueError):
        Action("1a")
    with pytest.raises(ValueError):
        Action("a b")
