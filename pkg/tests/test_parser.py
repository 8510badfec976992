import random
from types import SimpleNamespace

import pytest

from models.errors import IntervalArgError, ParseError, SortError
from models.formula import And, Atom, AtomKind, Call, Implies, Or, Ruq, render_formula
from models.terms import EMPTY, Pair, Sort, UrTerm, Var, num
from services.library import Definition
from services.parser import (
    Directive,
    SourceQuery,
    parse,
    parse_program,
    parse_raw,
    print_answer,
    tokenize,
)
from tests.conftest import PROPERTY_CASES
from utils.fresh import is_fresh_name


def test_tokenize_skips_comments_and_tracks_lines():
    tokens = tokenize("X =< 1 % 주석\nY neq a")
    texts = [t.text for t in tokens]
    assert texts == ["X", "=<", "1", "Y", "neq", "a", ""]
    assert tokens[3].line == 2
    assert tokens[3].column == 1


def test_equality_infers_integer_sort():
    f = parse_raw("X = 1")
    assert f == Atom(AtomKind.EQ, (Var("X"), num(1)))
    assert f.args[0].sort == Sort.INT


def test_set_tail_is_a_set_variable():
    f = parse_raw("X in {1,2/S}")
    elems = f.args[1]
    assert f.kind == AtomKind.IN
    assert elems.rest.rest == Var("S")
    assert elems.rest.rest.sort == Sort.SET


def test_connective_precedence():
    f = parse_raw("X = 1 & Y = 2 or Z = 3")
    assert isinstance(f, Or)
    assert isinstance(f.parts[0], And)
    g = parse_raw("(X = 1 or X = 2) & Y = 3")
    assert isinstance(g, And)
    assert isinstance(g.parts[0], Or)


def test_comparisons_become_calls_until_desugared():
    assert parse_raw("X =< 5") == Call("leq", (Var("X"), num(5)))
    assert parse_raw("X > 5") == Call("gt", (Var("X"), num(5)))
    assert parse_raw("X < 5") == Atom(AtomKind.LT, (Var("X"), num(5)))


def test_implies_is_kept_raw_and_removed_by_parse():
    assert isinstance(parse_raw("X = 1 implies Y = 2"), Implies)
    f = parse("X = 1 implies Y = 2")
    assert isinstance(f, Or)


def test_neg_of_true_is_false():
    assert str(parse("neg(true)")) == "false"


def test_pair_binder_foreach():
    f = parse_raw("foreach([X,Y] in A, Y = 1)")
    assert isinstance(f, Ruq)
    assert f.is_pair_binder
    assert f.binder[0].sort == Sort.INT
    assert f.domain.sort == Sort.SET


def test_multi_binding_foreach_nests():
    f = parse_raw("foreach([X in A, Y in B], X neq Y)")
    assert isinstance(f, Ruq)
    assert f.domain == Var("A")
    assert isinstance(f.body, Ruq)
    assert f.body.domain == Var("B")


def test_reused_binder_names_are_renamed():
    f = parse_raw("foreach(X in A, X neq 1) & foreach(X in B, X neq 2)")
    first, second = f.parts
    assert first.binder[0] == Var("X")
    assert is_fresh_name(second.binder[0].name)
    assert second.body.args[0] == second.binder[0]


def test_anonymous_variable_is_fresh():
    f = parse_raw("X = [1,_]")
    pair = f.args[1]
    assert isinstance(pair, Pair)
    assert is_fresh_name(pair.second.name)


def test_quoted_constants_are_ur_elements():
    f = parse_raw("X = 'hello world'")
    assert f.args[1] == UrTerm("hello world")


def test_sort_conflict_is_reported():
    with pytest.raises(SortError):
        parse_raw("X = 1 & X = {}")


def test_interval_rejects_compound_limits():
    with pytest.raises(IntervalArgError) as info:
        parse_raw("X in int(K+1,M)")
    assert "int(" in info.value.message


def test_reserved_fresh_names_are_rejected():
    with pytest.raises(ParseError):
        parse_raw("_N1 = 1")


def test_nonlinear_product_is_rejected():
    with pytest.raises(ParseError):
        parse_raw("X * Y = 1")


def test_primitive_arity_is_checked():
    with pytest.raises(ParseError):
        parse_raw("un(A,B)")


def test_error_position_uses_source_origin():
    src = SourceQuery("X = 1 &\n  = 2", origin="vc.slog", line=3)
    with pytest.raises(ParseError) as info:
        parse_raw(src)
    err = info.value
    assert (err.origin, err.line, err.column) == ("vc.slog", 4, 3)
    assert str(err).startswith("vc.slog:4:3:")


def test_trailing_tokens_are_rejected():
    with pytest.raises(ParseError):
        parse_raw("X = 1 . Y = 2")


def test_parse_program_reads_clauses_and_directives():
    items = parse_program("p(X) :- X neq 1.\n:- consult('more.slog').\n")
    definition, directive = items
    assert isinstance(definition, Definition)
    assert definition.name == "p"
    assert [v.name for v in definition.params] == ["X"]
    assert directive == Directive("consult", "more.slog", 2)


def test_parse_program_requires_variable_heads():
    with pytest.raises(ParseError):
        parse_program("p(1) :- true.")


def test_later_clause_can_call_earlier_one():
    items = parse_program("p(S) :- S = {}.\nq(S) :- p(S).")
    assert [d.name for d in items] == ["p", "q"]


def test_print_answer_forms():
    assert print_answer(None) == "no"
    assert print_answer(SimpleNamespace(bindings=[], residue=[])) == "true"
    answer = SimpleNamespace(
        bindings=[("X", num(1)), ("S", EMPTY)],
        residue=[Atom(AtomKind.NEQ, (Var("Y"), num(0)))],
    )
    assert print_answer(answer) == "X = 1,\nS = {}\nConstraint: Y neq 0"


# 정렬이 서로 맞는 원자들 (X Y N: 정수, E F G: 정수 집합, A: 순서쌍 집합)
ROUND_TRIP_ATOMS = [
    "X in E", "Y nin F", "E = {X / F}", "un(E,F,G)", "disj(E,F)", "X neq Y",
    "X < Y+1", "size(E,N)", "N > 2", "X =< Y", "E neq {}", "subset(F,G)",
    "E = int(1,N)", "foreach(Z in E, Z neq X)", "foreach([I,V] in A, I < N)",
    "neg(X in G)", "(X in E implies Y in F)",
]


@pytest.mark.parametrize("seed", range(PROPERTY_CASES))
def test_printed_formula_parses_back_to_itself(seed):
    rng = random.Random(seed)
    atoms = rng.sample(ROUND_TRIP_ATOMS, rng.randint(1, 4))
    if rng.random() < 0.4:
        other = rng.choice([p for p in ROUND_TRIP_ATOMS if p not in atoms])
        atoms[0] = f"({atoms[0]} or {other})"
    f = parse_raw(" & ".join(atoms))
    assert parse_raw(render_formula(f)) == f
