import pytest

from models.errors import SortError
from models.terms import (
    EMPTY,
    IntLin,
    Interval,
    Pair,
    SetCons,
    Sort,
    Substitution,
    UrTerm,
    Var,
    apply_subst,
    as_lin,
    lin_combine,
    make_lin,
    make_set,
    num,
    render,
    same_kind,
    set_elements,
    sort_of,
)
from utils.fresh import FreshSupply, is_fresh_name

X = Var("X", Sort.INT)
Y = Var("Y", Sort.INT)
E = Var("E", Sort.SET)


def test_make_lin_collapses_single_variable():
    assert make_lin({"X": 1}) == Var("X", Sort.INT)
    assert make_lin({"X": 0}, 3) == num(3)
    assert make_lin({"Y": 2, "X": 1}, -1) == IntLin((("X", 1), ("Y", 2)), -1)


def test_lin_combine_cancels_terms():
    t = lin_combine(lin_combine(X, Y), Y, -1)
    assert t == X
    assert as_lin(lin_combine(X, num(4))) == ({"X": 1}, 4)


def test_lin_combine_rejects_sets():
    with pytest.raises(SortError):
        lin_combine(X, EMPTY)


def test_sort_of_checks_constructor_arguments():
    assert sort_of(Pair(num(1), UrTerm("a"))) == Sort.PAIR
    assert sort_of(Interval(num(1), X)) == Sort.SET
    with pytest.raises(SortError):
        sort_of(Pair(E, num(1)))
    with pytest.raises(SortError):
        sort_of(SetCons(num(1), num(2)))
    with pytest.raises(SortError):
        sort_of(Interval(EMPTY, num(1)))


def test_same_kind_keeps_sets_apart():
    assert same_kind(Sort.UR, Sort.PAIR)
    assert same_kind(Sort.INT, Sort.UR)
    assert not same_kind(Sort.SET, Sort.UR)


def test_set_elements_and_make_set():
    s = make_set([num(1), UrTerm("a")], E)
    elems, tail = set_elements(s)
    assert elems == [num(1), UrTerm("a")]
    assert tail == E


def test_substitution_extend_stays_idempotent():
    s = Substitution({"A": Var("B")}).extend("B", UrTerm("c"))
    assert s.get("A") == UrTerm("c")
    assert s.get("B") == UrTerm("c")


def test_apply_subst_renormalizes_integers():
    t = IntLin((("X", 2), ("Y", 1)), 1)
    assert apply_subst({"X": num(3)}, t) == IntLin((("Y", 1),), 7)
    assert apply_subst({"X": num(3), "Y": num(-7)}, t) == num(0)


def test_render_forms():
    assert render(make_set([Pair(num(1), UrTerm("a")), num(2)])) == "{[1,a],2}"
    assert render(make_set([num(1)], E)) == "{1/E}"
    assert render(EMPTY) == "{}"
    assert render(Interval(num(1), X)) == "int(1,X)"
    assert render(IntLin((("X", 2), ("Y", -1)), 3)) == "2*X-Y+3"
    assert render(UrTerm("f", (num(1), Var("Z")))) == "f(1,Z)"


def test_fresh_supply_gives_distinct_sorted_vars():
    supply = FreshSupply()
    a, b = supply.fresh(Sort.SET), supply.fresh(Sort.SET)
    assert a != b
    assert a.sort == Sort.SET
    assert supply.fresh(Sort.INT).name == "_N3"
    assert all(is_fresh_name(v.name) for v in supply.fresh_many(Sort.UR, 2))
    assert not is_fresh_name("X")
