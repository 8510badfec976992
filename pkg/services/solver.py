# ----------------------------------------------------------------------------------------------------
# 작성목적 : 질의 풀이 전체 흐름 (주 루프, gamma1/2/3 분할, 최소해 재풀이, 답 열거, groundsol, 해 검증)
# 작성일 : 2025-09-08

# 변경사항 내역 (날짜 | 변경목적 | 변경내용 | 작성자 순으로 기입)
# 2025-09-08 | 최초 구현 | solve / partition / check_solution | 구동빈
# 2025-09-13 | 최소해 경로 | size 원자 실체화 후 재풀이, 정수 라벨링 | 이주형
# 2025-09-15 | groundsol 추가 | 작은 절댓값 우선 정수 라벨링 + eval_ground 재검증 | 이주형
# 2025-09-19 | 출력 정리 | 닫힌 집합 원소 정렬, 답 바인딩 순서 고정 | 구동빈
# 2025-09-24 | 최소해 경로 정리 | gamma3 가 있으면 항상 최소해 경로, 재풀이 후 size 원자가 남으면 SolverError | 이주형
# ----------------------------------------------------------------------------------------------------

import logging
import random
import re
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from models.errors import CompletionFailure, GroundSolutionExhausted, NonGround, SolverError, SortError
from models.formula import (
    And,
    Atom,
    AtomKind,
    Call,
    Formula,
    Implies,
    Neg,
    Or,
    Ruq,
    atom,
    conj,
    formula_terms,
    free_vars,
)
from models.schemas import SolverOptions
from models.terms import (
    EmptySet,
    IntLin,
    Pair,
    SetCons,
    Sort,
    Substitution,
    Term,
    UrTerm,
    Var,
    apply_subst,
    as_lin,
    iter_vars,
    make_set,
    num,
    render,
    set_elements,
)
from services.evaluator import eval_ground, has_semantics
from services.lia import (
    EQ,
    LinCon,
    LiaProblem,
    SizeResult,
    encode,
    gen_size_leq,
    lia_decide,
    lia_minimize,
    lincon_from_atom,
    lincon_to_atom,
    normalize,
    solve_size,
)
from services.library import LibraryRegistry, comparison_atom, expand_all
from services.parser import SourceQuery, parse
from services.rewrite import (
    Budget,
    ConstraintStore,
    RewriteContext,
    extend_store,
    initial_store,
    lia_constraints,
    rewrite_loop,
)
from utils.fresh import FreshSupply, is_fresh_name

logger = logging.getLogger(__name__)

K = AtomKind

REGION_PREFIX = "r#"

_SET_KINDS = frozenset({K.UN, K.DISJ, K.SIZE})

_FRESH_INDEX = re.compile(r"^_N([0-9]+)$")


# ---- 분할 ----

@dataclass
class Partition:
    """기약 저장소의 분할.

    set_atoms 와 lia 를 합친 것이 gamma1 (정수 제약 전부 + un/disj/size),
    gamma2 는 정수와 무관한 ∉/=/≠/npair, gamma3 는 변수 정의역 RUQ 목록이다.
    """
    set_atoms: List[Atom] = field(default_factory=list)
    lia: List[LinCon] = field(default_factory=list)
    gamma2: List[Atom] = field(default_factory=list)
    gamma3: List[Ruq] = field(default_factory=list)

    @property
    def gamma1(self) -> List[Atom]:
        return self.set_atoms + [lincon_to_atom(c) for c in self.lia]

    @property
    def has_size(self) -> bool:
        return any(a.kind == K.SIZE for a in self.set_atoms)


def _interval_ruq(a: Atom, supply: FreshSupply) -> Ruq:
    """E ⊆ [k,m] → ∀x ∈ E: k ≤ x ∧ x ≤ m"""
    e, interval = a.args
    x = supply.fresh(Sort.INT)
    body = conj(comparison_atom(Call("leq", (interval.lo, x))),
                comparison_atom(Call("leq", (x, interval.hi))))
    return Ruq((x,), e, body)


def _body_set_vars(f: Formula, bound: frozenset) -> List[str]:
    """RUQ 본문 원자에 자유롭게 나타나는 집합 변수 (중첩 RUQ 정의역은 제외)"""
    if isinstance(f, Ruq):
        return _body_set_vars(f.body, bound | {b.name for b in f.binder})
    if isinstance(f, (And, Or)):
        return [n for p in f.parts for n in _body_set_vars(p, bound)]
    if isinstance(f, Atom):
        return [v.name for t in f.args for v in iter_vars(t) if v.sort == Sort.SET and v.name not in bound]
    return []


def _check_ruq_body(r: Ruq) -> None:
    free_sets = _body_set_vars(r, frozenset())
    if free_sets:
        raise SortError(f"RUQ 본문에 자유 집합 변수가 있습니다: {', '.join(dict.fromkeys(free_sets))}", r)


def partition(store: ConstraintStore, supply: Optional[FreshSupply] = None) -> Partition:
    """기약 저장소 → Partition. ⊆ 구간 원자는 RUQ 로 바꾸어 gamma3 에 넣는다"""
    if store.todo or store.ruqs or store.clauses or store.pending:
        raise SolverError("기약 저장소가 아닙니다 (남은 규칙 대상이 있음)")
    supply = supply or FreshSupply()
    out = Partition(lia=lia_constraints(store))
    numeric = set(out.lia)
    for a in store.solved:
        if a.kind in _SET_KINDS:
            out.set_atoms.append(a)
        elif a.kind == K.SUBSET:
            out.gamma3.append(_interval_ruq(a, supply))
        elif a.kind == K.NEQ and lincon_from_atom(a) in numeric:
            continue
        else:
            out.gamma2.append(a)
    out.gamma3 = list(store.ruqs_solved) + out.gamma3
    for r in out.gamma3:
        _check_ruq_body(r)
    return out


# ---- 답 ----

@dataclass
class Answer:
    """답 하나. bindings 는 질의 변수 (등장 순서) 와 그 항, residue 는 남은 기약 제약"""
    bindings: List[Tuple[str, Term]]
    residue: List[Formula]
    subst: Substitution
    store: Optional[ConstraintStore] = None
    query: Optional[Formula] = None
    prepared: Optional[Formula] = None
    partition: Partition = field(default_factory=Partition)
    ground: bool = False

    @property
    def binding_map(self) -> Dict[str, Term]:
        return dict(self.bindings)


def _order_key(t: Term) -> tuple:
    if isinstance(t, IntLin) and not t.coeffs:
        return (0, t.const, "")
    if isinstance(t, Pair):
        first = t.first.const if isinstance(t.first, IntLin) and not t.first.coeffs else 0
        return (1, first, render(t))
    return (2, 0, render(t))


def tidy(t: Term) -> Term:
    """닫힌 확장 집합의 원소를 정렬 (출력용, 의미는 같다)"""
    if isinstance(t, SetCons):
        elems, tail = set_elements(t)
        elems = [tidy(e) for e in elems]
        if isinstance(tail, EmptySet):
            elems.sort(key=_order_key)
        return make_set(elems, tail)
    if isinstance(t, Pair):
        return Pair(tidy(t.first), tidy(t.second))
    return t


def _query_vars(f: Formula) -> List[str]:
    return [v.name for v in free_vars(f) if not is_fresh_name(v.name)]


def _supply_after(f: Formula) -> FreshSupply:
    """f 에 이미 있는 _N 번호 다음부터 시작하는 공급기"""
    top = 0
    for t in formula_terms(f):
        for v in iter_vars(t):
            m = _FRESH_INDEX.match(v.name)
            if m:
                top = max(top, int(m.group(1)))
    return FreshSupply(top + 1)


def _call_names(f: Formula) -> Iterator[str]:
    if isinstance(f, Call):
        yield f.name
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            yield from _call_names(p)
    elif isinstance(f, Ruq):
        yield from _call_names(f.body)
    elif isinstance(f, Implies):
        yield from _call_names(f.left)
        yield from _call_names(f.right)
    elif isinstance(f, Neg):
        yield from _call_names(f.inner)


def _evaluable(f: Formula) -> bool:
    """내장 의미만으로 평가할 수 있는 식인지 (사용자 술어 호출이 없음)"""
    return all(has_semantics(name) for name in _call_names(f))


def _term_functors(t: Term, out: Set[str]) -> None:
    if isinstance(t, UrTerm):
        out.add(t.functor)
        for a in t.args:
            _term_functors(a, out)
    elif isinstance(t, Pair):
        _term_functors(t.first, out)
        _term_functors(t.second, out)
    elif isinstance(t, SetCons):
        _term_functors(t.elem, out)
        _term_functors(t.rest, out)


class _Constants:
    """완성용 ur 상수 c1, c2, ... (질의에 이미 있는 이름은 건너뛴다)"""

    def __init__(self, used: Set[str]):
        self.used = used
        self.counter = 0

    def next(self) -> UrTerm:
        while True:
            self.counter += 1
            name = f"c{self.counter}"
            if name not in self.used:
                return UrTerm(name)


def set_model(set_atoms: Sequence[Atom], constraints: Sequence[LinCon],
              node_limit: int) -> SizeResult:
    """gamma1 의 모델. 영역 원소 수 합을 최소화해서 가능한 한 빈 집합을 고른다"""
    problem, enc = encode(set_atoms, constraints)
    regions = [r for rs in enc.regions.values() for r, _ in rs]
    if regions:
        problem.objective = {r: 1 for r in regions}
        result = lia_minimize(problem, node_limit)
    else:
        result = lia_decide(problem, node_limit)
    return SizeResult(result.feasible, result.assignment, enc, result.value)


def _candidates(lo: int, hi: int) -> Iterator[int]:
    """0, 1, -1, 2, -2, ... 중 [lo, hi] 안의 값"""
    reach = max(abs(lo), abs(hi))
    for k in range(reach + 1):
        for value in ((0,) if k == 0 else (k, -k)):
            if lo <= value <= hi:
                yield value


# ---- 솔버 ----

class Solver:
    """L_QA 질의 솔버. 인스턴스 하나가 라이브러리 등록부와 옵션을 가진다"""

    def __init__(self, options: Optional[SolverOptions] = None, registry: Optional[LibraryRegistry] = None):
        self.options = options or SolverOptions()
        self.registry = registry if registry is not None else LibraryRegistry()

    def context(self, supply: FreshSupply) -> RewriteContext:
        o = self.options
        return RewriteContext(
            supply=supply,
            registry=self.registry,
            budget=Budget.from_timeout(o.max_steps, o.max_branches, o.timeout_ms),
            node_limit=o.lia_node_limit,
            symmetry=o.symmetry,
            trace=o.trace,
            rng=random.Random(o.seed) if o.seed is not None else None,
        )

    def parse(self, text: str, supply: Optional[FreshSupply] = None, origin: str = "<input>",
              line: int = 1) -> Formula:
        return parse(SourceQuery(text, origin, line), supply, self.registry)

    def prepare(self, f: Formula, supply: FreshSupply) -> Formula:
        """파생 제약 전개 + size 인자 비음수 제약"""
        return gen_size_leq(expand_all(f, self.registry, supply))

    # -- 풀이 --

    def solve(self, f: Formula, supply: Optional[FreshSupply] = None) -> Iterator[Answer]:
        """답을 깊이 우선 순서로 하나씩 내보낸다. 아무것도 나오지 않으면 불만족"""
        supply = supply or _supply_after(f)
        ctx = self.context(supply)
        prepared = self.prepare(f, supply)
        query_vars = _query_vars(f)
        logger.info(f"질의 풀이 시작: 변수 {len(query_vars)}개")
        store = initial_store(prepared, ctx, query_vars)
        count = 0
        if store is not None:
            for s in rewrite_loop(store, ctx):
                for answer in self._finish(s, ctx, f, prepared, False):
                    count += 1
                    yield answer
        logger.info(f"질의 풀이 종료: 답 {count}개, 단계 {ctx.budget.steps}, 분기 {ctx.budget.branches}")

    def solve_text(self, text: str) -> Iterator[Answer]:
        supply = FreshSupply()
        yield from self.solve(self.parse(text, supply), supply)

    def first(self, f: Formula, supply: Optional[FreshSupply] = None) -> Optional[Answer]:
        return next(iter(self.solve(f, supply)), None)

    def _finish(self, s: ConstraintStore, ctx: RewriteContext, f: Formula, prepared: Formula,
                minimized: bool) -> Iterator[Answer]:
        """gamma3 가 남아 있으면 최소해 경로, 아니면 solve_size 로 gamma1 을 결정"""
        part = partition(s, ctx.supply)
        if minimized and part.has_size:
            left = ", ".join(str(a) for a in part.set_atoms if a.kind == K.SIZE)
            raise SolverError(f"최소해 재풀이 후에도 size 원자가 남았습니다: {left}")
        if part.gamma3 and not minimized:
            yield from self._minimum(s, part, ctx, f, prepared)
            return
        result = solve_size(part.set_atoms, part.lia, node_limit=ctx.node_limit)
        if not result.sat:
            return
        if minimized and self.options.label_integers:
            labelled = self._label(s, ctx)
            if labelled is not None:
                s, part = labelled
        yield self._answer(s, f, prepared, part)

    def _minimum(self, s: ConstraintStore, part: Partition, ctx: RewriteContext, f: Formula,
                 prepared: Formula) -> Iterator[Answer]:
        """gamma1 의 최소해로 정수를 고정하고 size(E,k) 를 k 개의 서로 다른 새 원소로 실체화"""
        result = solve_size(part.set_atoms, part.lia, minimize=True, node_limit=ctx.node_limit)
        if not result.sat:
            return
        values = {n: v for n, v in result.assignment.items() if not n.startswith(REGION_PREFIX)}
        formulas: List[Formula] = [atom(K.EQ, Var(n, Sort.INT), num(v)) for n, v in sorted(values.items())]
        materialized: Set[str] = set()
        for a in part.set_atoms:
            if a.kind != K.SIZE or a.args[0].name in materialized:
                continue
            e = a.args[0]
            materialized.add(e.name)
            elems = ctx.supply.fresh_many(Sort.UR, result.set_cardinality(e.name))
            formulas.append(atom(K.EQ, e, make_set(elems)))
            formulas.extend(atom(K.NEQ, x, y) for i, x in enumerate(elems) for y in elems[i + 1:])
        logger.debug(f"최소해: 값 {result.value}, 정수 {len(values)}개 고정, 집합 {len(materialized)}개 실체화")
        base = replace(s, solved=tuple(a for a in s.solved if a.kind != K.SIZE), bounds=None)
        nxt = extend_store(base, ctx, *formulas)
        if nxt is None:
            return
        for s2 in rewrite_loop(nxt, ctx):
            yield from self._finish(s2, ctx, f, prepared, True)

    def _label(self, s: ConstraintStore, ctx: RewriteContext) -> Optional[Tuple[ConstraintStore, Partition]]:
        """남은 정수 변수에 LIA 증인 값을 준다. 실패하면 None (라벨 없는 답을 쓴다)"""
        constraints = lia_constraints(s)
        if not constraints:
            return None
        witness = lia_decide(LiaProblem(constraints), ctx.node_limit)
        if not witness.feasible:
            return None
        formulas = [atom(K.EQ, Var(n, Sort.INT), num(v)) for n, v in sorted(witness.assignment.items())]
        nxt = extend_store(s, ctx, *formulas)
        if nxt is None:
            return None
        for s2 in rewrite_loop(nxt, ctx):
            part = partition(s2, ctx.supply)
            if solve_size(part.set_atoms, part.lia, node_limit=ctx.node_limit).sat:
                return s2, part
        return None

    def _answer(self, s: ConstraintStore, f: Formula, prepared: Formula, part: Partition) -> Answer:
        bindings = []
        for name in s.query_vars:
            t = s.subst.get(name)
            if t is not None:
                bindings.append((name, tidy(t)))
        return Answer(bindings=bindings, residue=s.constraints(), subst=s.subst, store=s,
                      query=f, prepared=prepared, partition=part)

    # -- 해 완성 / 검증 --

    def _open_vars(self, answer: Answer, also: Sequence[Formula]) -> Dict[str, Var]:
        seen: Dict[str, Var] = {}
        formulas = [answer.query, answer.prepared, *answer.residue, *also]
        for g in formulas:
            if g is not None:
                for v in free_vars(g):
                    seen.setdefault(v.name, v)
        for _, t in answer.subst.items():
            for v in iter_vars(t):
                seen.setdefault(v.name, v)
        for name in answer.subst:
            seen.pop(name, None)
        return seen

    def complete(self, answer: Answer, int_values: Optional[Dict[str, int]] = None,
                 also: Sequence[Formula] = ()) -> Substitution:
        """답을 전체 기저 치환으로 완성.

        정수는 gamma1 모델 값 (int_values 가 있으면 우선), 집합은 영역 모델에 새 상수를 채운 것
        (≠ 의 변수 쪽 집합은 새 원소 하나), 나머지는 빈 집합 / 0 / 서로 다른 새 상수.
        """
        int_values = int_values or {}
        part = answer.partition
        fixed = [normalize({n: 1}, EQ, v) for n, v in int_values.items()]
        model = set_model(part.set_atoms, list(part.lia) + fixed, self.options.lia_node_limit)
        if not model.sat:
            raise CompletionFailure("잔여 정수/기수 제약의 모델을 찾지 못했습니다")
        ints = {n: v for n, v in model.assignment.items() if not n.startswith(REGION_PREFIX)}
        ints.update(int_values)

        used: Set[str] = set()
        for g in [answer.query, answer.prepared, *answer.residue, *also]:
            if g is not None:
                for t in formula_terms(g):
                    _term_functors(t, used)
        for _, t in answer.subst.items():
            _term_functors(t, used)
        consts = _Constants(used)

        region_elems: Dict[str, List[Term]] = {}
        sets: Dict[str, List[Term]] = {}
        for name, regions in model.region_model().items():
            elems: List[Term] = []
            for r, count in regions:
                if r not in region_elems:
                    region_elems[r] = [consts.next() for _ in range(count)]
                elems.extend(region_elems[r])
            sets[name] = elems
        distinct = {t.name for c in answer.residue if isinstance(c, Atom) and c.kind == K.NEQ
                    for t in c.args if isinstance(t, Var) and t.sort == Sort.SET}

        sigma0: Dict[str, Term] = {}
        for name, v in self._open_vars(answer, also).items():
            if name in ints:
                sigma0[name] = num(ints[name])
            elif v.sort == Sort.SET:
                elems = sets.get(name) or ([consts.next()] if name in distinct else [])
                sigma0[name] = make_set(elems)
            elif v.sort == Sort.INT:
                sigma0[name] = num(0)
            elif v.sort == Sort.PAIR:
                sigma0[name] = Pair(num(0), consts.next())
            else:
                sigma0[name] = consts.next()
        full = dict(sigma0)
        for name, t in answer.subst.items():
            full[name] = apply_subst(sigma0, t)
        return Substitution(full)

    def check_solution(self, f: Formula, answer: Optional[Answer]) -> bool:
        """답을 완성한 치환 아래에서 f 가 참인지"""
        if answer is None:
            return False
        sigma = answer.subst if answer.ground else self.complete(answer, also=(f,))
        target = f if _evaluable(f) else (answer.prepared or f)
        try:
            return eval_ground(target, sigma)
        except NonGround as e:
            raise CompletionFailure(f"완성된 치환이 기저가 아닙니다: {e}") from e

    # -- groundsol --

    def groundsol(self, f: Formula, supply: Optional[FreshSupply] = None) -> Iterator[Answer]:
        """검증된 기저 답만 내보낸다. 탐색 범위 때문에 하나도 못 찾으면 GroundSolutionExhausted"""
        exhausted: List[str] = []
        emitted = 0
        for answer in self.solve(f, supply):
            try:
                values = self._ground_ints(answer)
            except GroundSolutionExhausted as e:
                exhausted.append(str(e))
                continue
            sigma = self.complete(answer, values, also=(f,))
            ground = self._ground_answer(answer, sigma)
            if not self.check_solution(f, ground):
                logger.warning("groundsol: 검증에 실패한 후보를 건너뜁니다")
                continue
            emitted += 1
            yield ground
        if not emitted and exhausted:
            raise GroundSolutionExhausted(exhausted[0])

    def _ground_ints(self, answer: Answer) -> Dict[str, int]:
        """정수 변수를 이름 순으로 0, 1, -1, 2, ... 중 가능한 첫 값에 고정"""
        part = answer.partition
        lo, hi = self.options.groundsol_min, self.options.groundsol_max
        names = {v for c in part.lia for v in c.names}
        for a in part.set_atoms:
            if a.kind == K.SIZE:
                names.update(as_lin(a.args[1])[0])
        fixed: Dict[str, int] = {}
        extra: List[LinCon] = []
        for name in sorted(names):
            for value in _candidates(lo, hi):
                trial = extra + [normalize({name: 1}, EQ, value)]
                if solve_size(part.set_atoms, list(part.lia) + trial, node_limit=self.options.lia_node_limit).sat:
                    fixed[name] = value
                    extra = trial
                    break
            else:
                raise GroundSolutionExhausted(f"{name} 의 값을 [{lo}, {hi}] 범위에서 찾지 못했습니다")
        return fixed

    def _ground_answer(self, answer: Answer, sigma: Substitution) -> Answer:
        names = answer.store.query_vars if answer.store is not None else tuple(answer.binding_map)
        bindings = [(name, tidy(sigma.get(name))) for name in names if name in sigma]
        return Answer(bindings=bindings, residue=[], subst=sigma, store=answer.store, query=answer.query,
                      prepared=answer.prepared, partition=answer.partition, ground=True)


_default_solver: Optional[Solver] = None


def get_default_solver() -> Solver:
    """기본 옵션 솔버 인스턴스 반환"""
    global _default_solver
    if _default_solver is None:
        _default_solver = Solver()
    return _default_solver


def solve(f: Formula, supply: Optional[FreshSupply] = None) -> Iterator[Answer]:
    return get_default_solver().solve(f, supply)


def check_solution(f: Formula, answer: Optional[Answer]) -> bool:
    return get_default_solver().check_solution(f, answer)


def groundsol(f: Formula, supply: Optional[FreshSupply] = None) -> Iterator[Answer]:
    return get_default_solver().groundsol(f, supply)
