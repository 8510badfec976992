"""작은 유한 범위를 전수 탐색하는 오라클과 비교하는 성질 테스트.

정수와 ur 변수는 몇 개의 작은 정수(와 순서쌍) 중에서, 집합 변수는 작은 전체 집합의
부분집합 중에서 값을 고른다. 새 변수는 존재 한정으로 보고 같은 범위에서 증인을 찾는다.
"""
import random
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Dict, Iterator, List, Sequence, Tuple

import pytest

from models.formula import Atom, AtomKind, Call, Formula, Or, Ruq, conj, disj, free_vars
from models.terms import Interval, Pair, SetCons, Sort, Term, Var, make_set, num
from services.evaluator import eval_ground
from services.library import expand_derived
from services.lia import EQ, LE, NE, LiaProblem, LinCon, lia_decide, normalize, solve_size
from services.negation import negate, negate_qf
from services.rewrite import RewriteContext, rewrite_atom
from tests.conftest import PROPERTY_CASES
from utils.fresh import FreshSupply

K = AtomKind

X, Y, Z = (Var(n, Sort.UR) for n in "XYZ")
N, M, I = (Var(n, Sort.INT) for n in "NMI")
E, F, G = (Var(n, Sort.SET) for n in "EFG")
R, S = Var("R", Sort.SET), Var("S", Sort.SET)


def a(kind, *args) -> Atom:
    return Atom(kind, args)


# ---- 유한 범위 오라클 ----

def _element(x) -> Term:
    return Pair(num(x[0]), num(x[1])) if isinstance(x, tuple) else num(x)


@lru_cache(maxsize=None)
def _subsets(universe: tuple) -> Tuple[Term, ...]:
    return tuple(
        make_set([_element(x) for x in chosen])
        for r in range(len(universe) + 1)
        for chosen in combinations(universe, r)
    )


@dataclass(frozen=True)
class Domain:
    """universe: 집합 원소 후보, ints: 정수 값 후보"""
    universe: tuple
    ints: Tuple[int, ...]

    def values(self, v: Var) -> Sequence[Term]:
        if v.sort == Sort.SET:
            return _subsets(self.universe)
        if v.sort == Sort.INT:
            return [num(i) for i in self.ints]
        return [num(i) for i in self.ints] + [_element(x) for x in self.universe if isinstance(x, tuple)]


SMALL = Domain((0, 1), (0, 1, 2))
BASIC = Domain((0, 1, 2), (0, 1, 2, 3))
INTERVALS = Domain((0, 1, 2), (0, 1, 2))
PAIRS = Domain(((1, 0), (1, 1), (2, 1), 0), (0, 1, 2))
# 순서쌍 4개 집합의 크기까지 담는 정수 범위
PAIRS_WIDE = Domain(((1, 0), (1, 1), (2, 1), 0), (0, 1, 2, 3, 4))


def assignments(variables: Sequence[Var], dom: Domain) -> Iterator[Dict[str, Term]]:
    pools = [dom.values(v) for v in variables]
    for combo in product(*pools):
        yield {v.name: t for v, t in zip(variables, combo)}


def satisfiable_under(f: Formula, sigma: Dict[str, Term], dom: Domain) -> bool:
    """σ 를 고정하고 남은 자유 변수의 값을 범위 안에서 찾는다"""
    if isinstance(f, Or):
        return any(satisfiable_under(p, sigma, dom) for p in f.parts)
    rest = [v for v in free_vars(f) if v.name not in sigma]
    return any(eval_ground(f, {**sigma, **tau}) for tau in assignments(rest, dom))


def bounded_sat(f: Formula, dom: Domain) -> bool:
    return satisfiable_under(f, {}, dom)


# ---- 원자 규칙: 대안들의 합이 원래 원자와 같은 만족 가능성 ----

RULE_CASES = [
    pytest.param(a(K.EQ, SetCons(X, E), SetCons(Y, F)), SMALL, id="set-eq"),
    pytest.param(a(K.IN, X, E), SMALL, id="in-var"),
    pytest.param(a(K.NEQ, SetCons(X, E), SetCons(Y, F)), SMALL, id="set-neq"),
    pytest.param(a(K.NIN, X, SetCons(Y, E)), SMALL, id="nin-cons"),
    pytest.param(a(K.UN, SetCons(X, E), F, G), SMALL, id="un-left-cons"),
    pytest.param(a(K.UN, E, F, SetCons(X, G)), SMALL, id="un-result-cons"),
    pytest.param(a(K.DISJ, SetCons(X, E), F), SMALL, id="disj-cons"),
    pytest.param(a(K.SIZE, SetCons(X, E), N), SMALL, id="size-cons"),
    pytest.param(a(K.SIZE, Interval(num(1), N), M), INTERVALS, id="size-interval"),
    pytest.param(a(K.UN, Interval(num(1), N), E, F), INTERVALS, id="un-interval"),
    pytest.param(a(K.DISJ, Interval(N, num(2)), E), INTERVALS, id="disj-interval"),
    pytest.param(a(K.EQ, SetCons(X, E), Interval(num(1), N)), INTERVALS, id="cons-eq-interval"),
    pytest.param(a(K.NIN, X, Interval(num(1), N)), INTERVALS, id="nin-interval"),
]


@pytest.mark.parametrize("atom, dom", RULE_CASES)
def test_rule_alternatives_are_equisatisfiable(atom, dom):
    alternatives = rewrite_atom(atom, RewriteContext(supply=FreshSupply()))
    for sigma in assignments(free_vars(atom), dom):
        expected = eval_ground(atom, sigma)
        found = any(satisfiable_under(alt, sigma, dom) for alt in alternatives)
        assert found == expected, f"{atom} / {sigma}"


# ---- 완전성: 작은 모델이 있으면 솔버도 답을 낸다 ----

COMPLETENESS_ATOMS = [
    "X in E", "Y nin E", "E = {X / F}", "un(E,F,G)", "disj(E,F)", "X neq Y",
    "F neq {}", "G = {}", "size(E,N)", "N < 2", "E neq F", "X in F",
]


def random_small_query(rng: random.Random) -> str:
    atoms = rng.sample(COMPLETENESS_ATOMS, rng.randint(2, 4))
    if rng.random() < 0.3:
        atoms[0] = f"({atoms[0]} or {rng.choice(COMPLETENESS_ATOMS)})"
    return " & ".join(atoms)


@pytest.mark.parametrize("seed", range(PROPERTY_CASES))
def test_solver_finds_an_answer_whenever_a_small_model_exists(solver, seed):
    text = random_small_query(random.Random(3000 + seed))
    supply = FreshSupply()
    f = solver.parse(text, supply)
    if bounded_sat(f, SMALL):
        assert next(iter(solver.solve(f, supply)), None) is not None, text


# ---- 기수 인코딩 ----

SETS = (E, F, G)
VENN_UNIVERSE = tuple(range(4))


def _venn_holds(atoms: Sequence[Atom], values: Dict[str, frozenset]) -> bool:
    for at in atoms:
        sets = [values[t.name] for t in at.args if isinstance(t, Var) and t.sort == Sort.SET]
        if at.kind == K.UN and sets[2] != sets[0] | sets[1]:
            return False
        if at.kind == K.DISJ and sets[0] & sets[1]:
            return False
        if at.kind == K.SIZE and len(sets[0]) != at.args[1].const:
            return False
    return True


def random_cardinality_system(rng: random.Random) -> List[Atom]:
    atoms = []
    for _ in range(rng.randint(1, 3)):
        if rng.random() < 0.6:
            atoms.append(a(K.UN, *rng.sample(SETS, 3)))
        else:
            atoms.append(a(K.DISJ, *rng.sample(SETS, 2)))
    # 크기 합이 4 이하이면 원소 4개 안에 모델이 있다
    for s in rng.sample(SETS, rng.randint(1, 2)):
        atoms.append(a(K.SIZE, s, num(rng.randint(0, 2))))
    return atoms


@pytest.mark.parametrize("seed", range(PROPERTY_CASES))
def test_cardinality_encoding_agrees_with_enumeration(seed):
    atoms = random_cardinality_system(random.Random(seed))
    subsets = [frozenset(c) for r in range(5) for c in combinations(VENN_UNIVERSE, r)]
    expected = any(
        _venn_holds(atoms, dict(zip("EFG", chosen)))
        for chosen in product(subsets, repeat=3)
    )
    assert solve_size(atoms, []).sat == expected, [str(x) for x in atoms]


@pytest.mark.parametrize("seed", range(PROPERTY_CASES // 2))
def test_minimum_cardinalities_cannot_be_lowered_one_at_a_time(seed):
    rng = random.Random(500 + seed)
    counts = [Var("K0", Sort.INT), Var("K1", Sort.INT)]
    sized = rng.sample(SETS, 2)
    atoms = [a(K.UN, *rng.sample(SETS, 3)) if rng.random() < 0.6 else a(K.DISJ, *rng.sample(SETS, 2))]
    atoms += [a(K.SIZE, s, k) for s, k in zip(sized, counts)]
    # K0 + K1 ≥ t
    lower = normalize({"K0": -1, "K1": -1}, LE, -rng.randint(1, 4))
    result = solve_size(atoms, [lower], minimize=True)
    if not result.sat:
        return
    values = [result.assignment["K0"], result.assignment["K1"]]
    for s, v in zip(sized, values):
        assert result.set_cardinality(s.name) == v
    for i, v in enumerate(values):
        if v == 0:
            continue
        fixed = [normalize({f"K{j}": 1}, EQ, values[j] - (1 if j == i else 0)) for j in range(2)]
        assert not solve_size(atoms, [lower] + fixed).sat


# ---- 선형 정수 결정 절차: 상자 안 전수 탐색과 비교 ----

BOX = 3
BOX_VARS = ("x", "y", "z")


def random_lia_system(rng: random.Random) -> List[LinCon]:
    cons: List[LinCon] = []
    for v in BOX_VARS:
        cons += [normalize({v: 1}, LE, BOX), normalize({v: -1}, LE, BOX)]
    for _ in range(rng.randint(1, 4)):
        coeffs = {v: rng.randint(-2, 2) for v in BOX_VARS}
        if not any(coeffs.values()):
            coeffs["x"] = 1
        c = normalize(coeffs, rng.choice([LE, LE, EQ, NE]), rng.randint(-3, 3))
        if isinstance(c, LinCon):
            cons.append(c)
    return cons


@pytest.mark.parametrize("seed", range(PROPERTY_CASES * 2))
def test_lia_decide_agrees_with_box_enumeration(seed):
    cons = random_lia_system(random.Random(seed))
    expected = any(
        all(c.holds(dict(zip(BOX_VARS, point))) for c in cons)
        for point in product(range(-BOX, BOX + 1), repeat=3)
    )
    result = lia_decide(LiaProblem(cons))
    assert result.feasible == expected, [str(c) for c in cons]
    if result.feasible:
        assert all(c.holds(result.assignment) for c in cons)


# ---- 부정 ----

QF_LITERALS = [
    a(K.EQ, N, M), a(K.NEQ, N, M), a(K.LT, N, M), a(K.LT, M, num(2)),
    a(K.IN, N, E), a(K.NIN, M, E), a(K.EQ, N, num(1)),
    Call("leq", (N, M)), Call("gt", (N, num(1))), Call("geq", (M, N)),
]


def random_qf(rng: random.Random, depth: int = 2) -> Formula:
    if depth == 0 or rng.random() < 0.3:
        return rng.choice(QF_LITERALS)
    parts = [random_qf(rng, depth - 1) for _ in range(rng.randint(2, 3))]
    return conj(*parts) if rng.random() < 0.5 else disj(*parts)


@pytest.mark.parametrize("seed", range(PROPERTY_CASES))
def test_negate_qf_is_a_complement_and_an_involution(seed):
    f = random_qf(random.Random(seed))
    once = negate_qf(f)
    twice = negate_qf(once)
    for sigma in assignments(free_vars(f), SMALL):
        value = eval_ground(f, sigma)
        assert eval_ground(once, sigma) == (not value)
        assert eval_ground(twice, sigma) == value


NEGATION_CASES = [
    pytest.param(a(K.UN, E, F, G), BASIC, id="un"),
    pytest.param(a(K.DISJ, E, F), BASIC, id="disj"),
    pytest.param(a(K.SIZE, E, M), BASIC, id="size"),
    pytest.param(a(K.SUBSET, E, Interval(num(1), M)), BASIC, id="subset-interval"),
    pytest.param(a(K.IN, X, E), BASIC, id="in"),
    pytest.param(a(K.EQ, N, M), BASIC, id="int-eq"),
    pytest.param(a(K.LT, N, M), BASIC, id="lt"),
    pytest.param(Ruq((X,), E, a(K.NEQ, X, Y)), BASIC, id="foreach"),
    pytest.param(Ruq((X,), E, Ruq((Z,), F, a(K.NEQ, X, Z))), BASIC, id="nested-foreach"),
    pytest.param(Call("subset", (E, F)), BASIC, id="subset"),
    pytest.param(Call("inters", (E, F, G)), BASIC, id="inters"),
    pytest.param(Call("diff", (E, F, G)), BASIC, id="diff"),
    pytest.param(Call("rel", (R,)), PAIRS, id="rel"),
    pytest.param(Call("pfun", (R,)), PAIRS, id="pfun"),
    pytest.param(Call("get", (R, I, Y)), PAIRS, id="get"),
    pytest.param(Call("sorted", (R,)), PAIRS, id="sorted"),
    pytest.param(Call("dres", (I, R, S)), PAIRS, id="dres-point"),
    pytest.param(Call("dares", (Interval(num(1), I), R, S)), PAIRS, id="dares-interval"),
    pytest.param(Call("arr", (R, M)), PAIRS_WIDE, id="arr"),
]


@pytest.mark.parametrize("f, dom", NEGATION_CASES)
def test_negation_holds_exactly_when_the_formula_fails(f, dom):
    neg = negate(f, FreshSupply())
    for sigma in assignments(free_vars(f), dom):
        assert satisfiable_under(neg, sigma, dom) != eval_ground(f, sigma), f"{f} / {sigma}"


# ---- 파생 제약 전개 ----

EXPANSION_CASES = [
    pytest.param(Call("inters", (E, F, G)), SMALL, id="inters"),
    pytest.param(Call("diff", (E, F, G)), SMALL, id="diff"),
    pytest.param(Call("subset", (E, F)), BASIC, id="subset"),
    pytest.param(Call("pfun", (R,)), PAIRS, id="pfun"),
    pytest.param(Call("dres_pt", (I, R, S)), PAIRS, id="dres-point"),
    pytest.param(Call("dares_pt", (I, R, S)), PAIRS, id="dares-point"),
    pytest.param(Call("dres_int", (Interval(num(1), M), R, S)), PAIRS, id="dres-interval"),
    pytest.param(Call("arr", (R, M)), PAIRS, id="arr"),
    pytest.param(Call("get", (R, I, Y)), PAIRS, id="get"),
    pytest.param(Call("sorted", (R,)), PAIRS, id="sorted"),
    pytest.param(Call("sorted", (R, N, I, M)), PAIRS, id="sorted-range"),
    pytest.param(Call("remove", (R, I, S)), PAIRS, id="remove"),
]


@pytest.mark.parametrize("call, dom", EXPANSION_CASES)
def test_expansion_means_the_same_as_the_constraint(call, dom):
    body = expand_derived(call.name, call.args, FreshSupply())
    for sigma in assignments(free_vars(call), dom):
        assert satisfiable_under(body, sigma, dom) == eval_ground(call, sigma), f"{call} / {sigma}"


def test_expansion_needs_its_fresh_witnesses():
    # inters 의 전개에는 새 집합 변수가 있고, 그 값을 고를 수 있어야 참이 된다
    body = expand_derived("inters", (E, F, G), FreshSupply())
    sigma = {"E": make_set([num(0), num(1)]), "F": make_set([num(1)]), "G": make_set([num(1)])}
    assert any(v.sort == Sort.SET and v.name not in sigma for v in free_vars(body))
    assert satisfiable_under(body, sigma, SMALL)
