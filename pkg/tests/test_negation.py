import pytest

from models.errors import NotNegatable, UnknownDerived
from models.formula import FALSE, TRUE, And, Atom, AtomKind, Call, Implies, Neg, Or, Ruq
from models.terms import Pair, Sort, Var, num
from services.library import LibraryRegistry
from services.negation import desugar, negate, negate_qf
from services.parser import parse_program
from utils.fresh import FreshSupply, is_fresh_name

X = Var("X", Sort.INT)
Y = Var("Y", Sort.INT)
A = Var("A", Sort.SET)
B = Var("B", Sort.SET)
C = Var("C", Sort.SET)


def lt(a, b):
    return Atom(AtomKind.LT, (a, b))


def test_negate_qf_pushes_through_connectives():
    q = And((Atom(AtomKind.EQ, (X, Y)), lt(X, num(3))))
    assert negate_qf(q) == Or((
        Atom(AtomKind.NEQ, (X, Y)),
        lt(num(3), X),
        Atom(AtomKind.EQ, (X, num(3))),
    ))


def test_negate_qf_rejects_set_atoms():
    with pytest.raises(NotNegatable):
        negate_qf(Atom(AtomKind.UN, (A, B, C)))


def test_integer_equality_negates_to_strict_orders():
    f = negate(Atom(AtomKind.EQ, (X, Y)), FreshSupply())
    assert f == Or((lt(X, Y), lt(Y, X)))


def test_union_negation_introduces_a_witness():
    f = negate(Atom(AtomKind.UN, (A, B, C)), FreshSupply())
    assert isinstance(f, Or)
    assert len(f.parts) == 3
    witness = f.parts[0].parts[0].args[0]
    assert is_fresh_name(witness.name)


def test_size_negation_uses_a_fresh_count():
    f = negate(Atom(AtomKind.SIZE, (A, num(2))), FreshSupply())
    size, neq = f.parts
    assert size.kind == AtomKind.SIZE
    assert neq == Atom(AtomKind.NEQ, (size.args[1], num(2)))


def test_ruq_negation_is_a_counterexample():
    r = Ruq((Var("I", Sort.INT), Var("V", Sort.UR)), A, Atom(AtomKind.NEQ, (Var("V", Sort.UR), num(0))))
    f = negate(r, FreshSupply())
    member, body = f.parts
    assert member.kind == AtomKind.IN
    assert isinstance(member.args[0], Pair)
    assert member.args[1] == A
    assert body == Atom(AtomKind.EQ, (member.args[0].second, num(0)))


def test_truth_values():
    supply = FreshSupply()
    assert negate(TRUE, supply) == FALSE
    assert negate(Neg(TRUE), supply) == TRUE


def test_get_negates_to_non_membership():
    f = negate(Call("get", (A, X, Y)), FreshSupply())
    assert f == Atom(AtomKind.NIN, (Pair(X, Y), A))


def test_upd_has_no_negation():
    with pytest.raises(NotNegatable):
        negate(Call("upd", (A, X, Y, B)), FreshSupply())


def test_unknown_predicate():
    with pytest.raises(UnknownDerived):
        negate(Call("nosuch", (A,)), FreshSupply())


def test_user_predicate_with_locals_is_not_negatable():
    registry = LibraryRegistry()
    for d in parse_program("nonempty(S) :- X in S.\nempty(S) :- S = {}."):
        registry.define(d)
    with pytest.raises(NotNegatable):
        negate(Call("nonempty", (A,)), FreshSupply(), registry)
    f = negate(Call("empty", (A,)), FreshSupply(), registry)
    assert f.kind == AtomKind.NEQ


def test_desugar_removes_implies_inside_ruq_bodies():
    r = Ruq((X,), A, Implies(lt(X, num(3)), Atom(AtomKind.EQ, (X, num(1)))))
    f = desugar(r, FreshSupply())
    assert isinstance(f, Ruq)
    assert isinstance(f.body, Or)
    assert Atom(AtomKind.EQ, (X, num(1))) in f.body.parts
