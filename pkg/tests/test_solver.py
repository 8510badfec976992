import pytest

from tests.conftest import normalize_fresh
from models.errors import GroundSolutionExhausted, SolverError, SortError
from models.formula import Atom, AtomKind, Ruq
from models.schemas import SolverOptions
from models.terms import EMPTY, Interval, Sort, Var, num
from services.evaluator import eval_ground
from services.parser import parse, print_answer
from services.rewrite import ConstraintStore, RewriteContext, initial_store, rewrite_loop
from services.solver import Solver, get_default_solver, partition, tidy
from utils.fresh import FreshSupply

E, F, H = (Var(n, Sort.SET) for n in "EFH")
M = Var("M", Sort.INT)


def irreducible(text: str):
    ctx = RewriteContext(supply=FreshSupply())
    (store,) = list(rewrite_loop(initial_store(parse(text, ctx.supply), ctx), ctx))
    return store


# ---- partition ----

def test_partition_routes_atoms():
    part = partition(irreducible("un(E,F,G) & X nin E & foreach(Y in H, 0 < Y)"))
    assert [a.kind for a in part.set_atoms] == [AtomKind.UN]
    assert [a.kind for a in part.gamma2] == [AtomKind.NIN]
    assert len(part.gamma3) == 1 and part.gamma3[0].domain == H
    assert part.lia == []


def test_partition_turns_interval_subset_into_ruq():
    store = ConstraintStore(solved=(Atom(AtomKind.SUBSET, (E, Interval(num(1), M))),))
    part = partition(store)
    (r,) = part.gamma3
    assert r.domain == E
    assert not r.is_pair_binder
    assert part.set_atoms == [] and part.gamma2 == []


def test_partition_of_empty_store():
    part = partition(ConstraintStore())
    assert (part.set_atoms, part.lia, part.gamma2, part.gamma3) == ([], [], [], [])


def test_partition_requires_an_irreducible_store():
    with pytest.raises(SolverError):
        partition(ConstraintStore(todo=(Atom(AtomKind.IN, (M, E)),)))


def test_free_set_variable_in_ruq_body_is_rejected():
    y = Var("Y")
    r = Ruq((y,), E, Atom(AtomKind.NIN, (y, F)))
    with pytest.raises(SortError):
        partition(ConstraintStore(ruqs_solved=(r,)))


# ---- solve ----

def test_array_union_size(run):
    solved = run("arr(A,5) & arr(B,2) & un(A,B,C) & arr(C,N)")
    assert solved.sat
    assert solved.first.binding_map["N"] == num(5)


@pytest.mark.parametrize("query", [
    "arr(A,5) & arr(B,2) & un(A,B,C) & arr(C,N) & 5 < N",
    "arr(A,N) & 0 < N & 0 < M & M < N & foreach([X,Y] in A, X neq M)",
    "size(E,ME) & size(F,MF) & size(G,MG) & un(E,F,G) & ME + MF < MG",
    "neg(true)",
    "X in {}",
    "arr(A,2) & [3,Y] in A",
])
def test_unsatisfiable_queries(run, query):
    assert not run(query).sat


@pytest.mark.parametrize("query", [
    "{1,2} = {2,1}",
    "{1,2} = {1,2,1}",
    "{X,Y} = {Y,X}",
])
def test_absorption_and_commutativity(run, query):
    assert run(query).sat


def test_membership_answers_in_rule_order(run):
    solved = run("X in {1,2}", limit=5)
    assert [a.binding_map["X"] for a in solved.answers] == [num(1), num(2)]


def test_zero_size_forces_empty_set(run):
    assert run("size(E,0)").first.binding_map["E"] == EMPTY


def test_identity_array_is_fully_determined(run):
    solved = run("arr(A,5) & foreach([X,Y] in A, Y = X)")
    assert print_answer(solved.first) == "A = {[1,1],[2,2],[3,3],[4,4],[5,5]}"


@pytest.mark.parametrize("query", [
    "arr(A,5) & arr(B,2) & un(A,B,C) & arr(C,N)",
    "arr(A,3) & sorted(A)",
    "X nin E & size(E,K) & 1 < K",
    "E neq {} & foreach(X in E, 3 < X)",
    "un(A,B,C) & disj(A,B) & size(C,3) & size(A,1)",
    "pfun(R) & [1,a] in R & [2,b] in R",
])
def test_answers_check_out(solver, run, query):
    solved = run(query, limit=3)
    assert solved.sat
    for answer in solved.answers:
        assert solver.check_solution(solved.formula, answer)


@pytest.mark.parametrize("query", [
    "E neq F & E neq G & subset(E,G)",
    "X < Y & E neq F & E neq G & subset(E,G)",
    "size(E,N) & X < Y & size(G,N) & E neq F",
    "subset(E,G) & X < Y & size(G,N) & E neq F",
])
def test_inequality_next_to_busy_sets_checks_out(solver, run, query):
    solved = run(query, limit=4)
    assert solved.sat
    for answer in solved.answers:
        assert solver.check_solution(solved.formula, answer)


def test_minimum_path_leaves_no_size_atoms(run):
    solved = run("size(E,K) & 2 < K & foreach(X in E, 0 < X)")
    residue = [c for c in solved.first.residue if isinstance(c, Atom)]
    assert not any(a.kind == AtomKind.SIZE for a in residue)
    assert solved.first.binding_map["K"] == num(3)


def test_check_solution_of_missing_answer(solver):
    assert not solver.check_solution(parse("X = 1"), None)


def test_first_answer_is_deterministic(run):
    query = "arr(A,3) & sorted(A) & X in {1,2}"
    first = normalize_fresh(print_answer(run(query).first))
    again = normalize_fresh(print_answer(run(query).first))
    assert first == again


def test_tidy_sorts_closed_sets():
    s = parse("S = {3,1,2}").args[1]
    assert str(tidy(s)) == "{1,2,3}"


def test_default_solver_is_shared():
    assert get_default_solver() is get_default_solver()


# ---- groundsol ----

def _ground(solver: Solver, text: str):
    supply = FreshSupply()
    f = solver.parse(text, supply)
    return f, next(iter(solver.groundsol(f, supply)))


def test_groundsol_empty_set(solver):
    _, answer = _ground(solver, "size(E,0)")
    assert answer.ground
    assert answer.binding_map["E"] == EMPTY


def test_groundsol_prefers_small_integers(solver):
    _, answer = _ground(solver, "X > 5")
    assert answer.binding_map["X"] == num(6)


@pytest.mark.parametrize("query", [
    "arr(A,2) & sorted(A)",
    "arr(A,5) & sorted(A) & ipfun(A) & [1,X] in A",
])
def test_groundsol_answers_are_verified(solver, query):
    f, answer = _ground(solver, query)
    assert eval_ground(f, answer.subst)
    assert print_answer(answer).startswith("A = {[1,")


def test_groundsol_reports_exhausted_range():
    solver = Solver(SolverOptions(groundsol_min=0, groundsol_max=0))
    supply = FreshSupply()
    f = solver.parse("X > 5", supply)
    with pytest.raises(GroundSolutionExhausted):
        list(solver.groundsol(f, supply))
