import pytest

from models.errors import BudgetExceeded
from models.formula import And, Atom, AtomKind
from models.terms import Sort, Var, lin_combine, num
from services.lia import (
    EQ,
    LE,
    NE,
    LiaProblem,
    LiaStatus,
    LinCon,
    encode,
    gen_size_leq,
    lia_decide,
    lia_minimize,
    lincon_from_atom,
    normalize,
    propagate_bounds,
    relaxation_feasible,
    solve_size,
)

E, F, G = (Var(n, Sort.SET) for n in "EFG")
K, ME, MF, MG = (Var(n, Sort.INT) for n in ("K", "ME", "MF", "MG"))


def size(s, k):
    return Atom(AtomKind.SIZE, (s, k))


def lt(a, b):
    return Atom(AtomKind.LT, (a, b))


def test_normalize_divides_by_gcd():
    assert normalize({"x": 2, "y": 4}, LE, 5) == LinCon((("x", 1), ("y", 2)), LE, 2)
    assert normalize({"x": -2}, EQ, 4) == LinCon((("x", 1),), EQ, -2)


def test_normalize_decides_trivial_constraints():
    assert normalize({"x": 2}, EQ, 1) is False
    assert normalize({"x": 2}, NE, 1) is True
    assert normalize({}, LE, -1) is False
    assert normalize({"x": 0}, EQ, 0) is True


def test_strict_order_becomes_non_strict():
    assert lincon_from_atom(lt(K, num(3))) == LinCon((("K", 1),), LE, 2)
    assert lincon_from_atom(Atom(AtomKind.IN, (K, E))) is None


def test_propagate_bounds_detects_empty_interval():
    low = normalize({"x": -1}, LE, -3)
    high = normalize({"x": 1}, LE, 2)
    assert propagate_bounds([low]) == {"x": (3, None)}
    assert propagate_bounds([low, high]) is None


def test_parity_is_unsat():
    p = LiaProblem([
        LinCon((("x", 1), ("y", 1)), EQ, 1),
        LinCon((("x", 1), ("y", -1)), EQ, 0),
    ])
    assert lia_decide(p).status == LiaStatus.UNSAT


def test_disequalities_are_split():
    p = LiaProblem([
        normalize({"x": -1}, LE, 0),
        normalize({"x": 1}, LE, 2),
        normalize({"x": 1}, NE, 0),
        normalize({"x": 1}, NE, 1),
    ])
    result = lia_decide(p)
    assert result.feasible
    assert result.assignment == {"x": 2}


def test_pigeonhole_is_caught_by_bounds():
    cons = []
    for v in "abc":
        cons += [normalize({v: -1}, LE, 0), normalize({v: 1}, LE, 1)]
    for x, y in (("a", "b"), ("a", "c"), ("b", "c")):
        cons.append(normalize({x: 1, y: -1}, NE, 0))
    assert lia_decide(LiaProblem(cons)).status == LiaStatus.UNSAT


def test_minimize_and_unbounded():
    p = LiaProblem([normalize({"x": -1}, LE, -3)], {"x": 1})
    result = lia_minimize(p)
    assert result.status == LiaStatus.OPTIMAL
    assert (result.assignment, result.value) == ({"x": 3}, 3)
    q = LiaProblem([normalize({"x": 1}, LE, 5)], {"x": 1})
    assert lia_minimize(q).status == LiaStatus.UNBOUNDED


def test_node_limit_raises_budget_exceeded():
    p = LiaProblem([
        LinCon((("x", 1), ("y", 1)), EQ, 1),
        LinCon((("x", 1), ("y", -1)), EQ, 0),
    ])
    with pytest.raises(BudgetExceeded):
        lia_decide(p, node_limit=1)


def test_single_size_atom_encoding():
    problem, enc = encode([size(E, K)])
    assert enc.pattern_map == {"E": ["r#0.1"]}
    assert LinCon((("r#0.1", -1),), LE, 0) in problem.constraints
    assert LinCon((("K", 1), ("r#0.1", -1)), EQ, 0) in problem.constraints


def test_cardinality_union_bound_is_unsat():
    atoms = [size(E, ME), size(F, MF), size(G, MG), Atom(AtomKind.UN, (E, F, G))]
    extra = [lincon_from_atom(lt(lin_combine(ME, MF), MG))]
    assert not solve_size(atoms, extra).sat
    assert not solve_size(atoms, extra, minimize=True).sat


def test_minimum_size():
    result = solve_size([size(E, K)], [lincon_from_atom(lt(num(1), K))], minimize=True)
    assert result.sat
    assert result.value == 2
    assert result.assignment["K"] == 2
    assert result.set_cardinality("E") == 2


def test_minimum_over_a_union():
    atoms = [Atom(AtomKind.UN, (E, F, G)), size(G, num(2)), size(E, ME), size(F, MF)]
    result = solve_size(atoms, [], minimize=True)
    assert result.value == 4
    assert result.set_cardinality("G") == 2
    assert result.assignment["ME"] + result.assignment["MF"] == 2


def test_gen_size_leq_adds_non_negativity():
    assert gen_size_leq(size(E, K)) == And((size(E, K), lt(num(-1), K)))
    f = And((size(E, K), Atom(AtomKind.NEQ, (K, num(1)))))
    assert gen_size_leq(f) == And((size(E, K), lt(num(-1), K), Atom(AtomKind.NEQ, (K, num(1)))))


def test_constant_false_size_equation_is_infeasible():
    # 둘째 인자가 영역 변수와 상쇄되어 0 = 1 이 되는 경우
    k = lin_combine(Var("r#0.1", Sort.INT), num(1))
    problem, _ = encode([size(E, k)])
    assert all(d != 0 for c in problem.constraints for _, d in c.coeffs)
    assert propagate_bounds(problem.constraints) is None
    assert lia_decide(problem).status == LiaStatus.UNSAT
    assert not solve_size([size(E, k)], []).sat


def test_relaxation_catches_what_bounds_miss():
    x_lt_y = LinCon((("x", 1), ("y", -1)), LE, -1)
    y_lt_x = LinCon((("x", -1), ("y", 1)), LE, -1)
    assert propagate_bounds([x_lt_y, y_lt_x]) is not None
    assert not relaxation_feasible([x_lt_y, y_lt_x])
    assert relaxation_feasible([x_lt_y])
    assert relaxation_feasible([LinCon((("x", 1),), NE, 0)])
    assert relaxation_feasible([])
