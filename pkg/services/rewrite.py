# ----------------------------------------------------------------------------------------------------
# 작성목적 : 제약 저장소와 재작성 규칙 (집합 통합, un/disj/size, RUQ, 구간, 절 분기)
# 작성일 : 2025-09-07

# 변경사항 내역 (날짜 | 변경목적 | 변경내용 | 작성자 순으로 기입)
# 2025-09-07 | 최초 구현 | 저장소 + 원자별 재작성 규칙, step / step_loop | 구동빈
# 2025-09-11 | 구간 규칙 | 구간 항 제거 규칙(등식/un/disj/RUQ) 추가 | 이주형
# 2025-09-15 | 성능 개선 | 닫힌 확장 집합 소속을 절로 변환, 단위 전파 + 이진 융해 | 구동빈
# 2025-09-17 | 성능 개선 | 절 분기 시 변수 교환 대칭 가지치기 | 구동빈
# 2025-09-24 | 성능 개선 | 분기마다 LP 완화 가지치기, 논리곱 논리합은 CNF 대신 직접 분기, 집합 ≠ 제거는 인자 하나만 바빠도 적용 | 구동빈
# ----------------------------------------------------------------------------------------------------

import logging
import random
import time
from collections import deque
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Deque, Dict, FrozenSet, Iterator, List, Optional, Sequence, Set, Tuple

from models.errors import BudgetExceeded, SolverError, SortError
from models.formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    AtomKind,
    Call,
    Clause,
    Formula,
    Or,
    Ruq,
    Truth,
    atom,
    conj,
    disj,
    free_vars,
    render_formula,
    subst_formula,
    to_clauses,
)
from models.terms import (
    EMPTY,
    EmptySet,
    IntLin,
    Interval,
    Pair,
    SetCons,
    Sort,
    Substitution,
    Term,
    UrTerm,
    Var,
    apply_subst,
    as_lin,
    is_ground,
    lin_combine,
    make_lin,
    num,
    occurs,
    render,
    set_elements,
    term_vars,
)
from services.evaluator import eval_ground, to_value
from services.lia import (
    DEFAULT_NODE_LIMIT,
    EQ,
    LE,
    NE,
    Bounds,
    LinCon,
    LiaProblem,
    lia_decide,
    lincon_from_atom,
    lincon_to_atom,
    normalize,
    propagate_bounds,
    relaxation_feasible,
    substitute,
)
from services.library import INT_COMPARISONS, LibraryRegistry, comparison_atom, expand_call
from services.negation import negate_qf
from utils.fresh import FreshSupply, is_fresh_name

logger = logging.getLogger(__name__)

K = AtomKind

# 절 리터럴로 허용되는 원자
CLAUSE_KINDS = frozenset({K.EQ, K.NEQ, K.LT, K.PAIR, K.NPAIR, K.IN, K.NIN})

# 원자 처리 우선순위 (작을수록 먼저)
_PRIORITY = {
    K.EQ: 0, K.PAIR: 1, K.NPAIR: 1, K.IN: 2, K.NIN: 3, K.SUBSET: 4,
    K.SIZE: 5, K.UN: 6, K.DISJ: 7, K.NEQ: 8,
}


# ---- 예산 ----

@dataclass
class Budget:
    """재작성 단계/분기 수와 마감 시각 제한"""
    max_steps: int = 200_000
    max_branches: int = 100_000
    deadline: Optional[float] = None
    steps: int = 0
    branches: int = 0

    @classmethod
    def from_timeout(cls, max_steps: int, max_branches: int, timeout_ms: Optional[int]) -> "Budget":
        deadline = time.monotonic() + timeout_ms / 1000 if timeout_ms else None
        return cls(max_steps=max_steps, max_branches=max_branches, deadline=deadline)

    def tick(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise BudgetExceeded(f"재작성 단계 한도 초과 ({self.max_steps})")
        if self.deadline is not None and self.steps % 64 == 0 and time.monotonic() > self.deadline:
            raise BudgetExceeded("시간 제한 초과")

    def branch(self, n: int) -> None:
        if n > 1:
            self.branches += n - 1
            if self.branches > self.max_branches:
                raise BudgetExceeded(f"분기 수 한도 초과 ({self.max_branches})")


@dataclass
class RewriteContext:
    supply: FreshSupply
    registry: Optional[LibraryRegistry] = None
    budget: Budget = field(default_factory=Budget)
    node_limit: int = DEFAULT_NODE_LIMIT
    symmetry: bool = True
    trace: bool = False
    # 같은 길이 절 중 분기 대상 선택 (없으면 첫 절)
    rng: Optional[random.Random] = None


# ---- 저장소 ----

@dataclass
class ConstraintStore:
    """재작성 중인 제약의 논리곱.

    todo 는 아직 규칙이 적용될 수 있는 원자, solved 는 (step 기준) 기약 원자다.
    정수 원자는 모두 lia 로, 단순 등식 X = t 는 subst 로 흡수된다.
    모든 항에는 subst 가 이미 적용되어 있다.
    """
    todo: Tuple[Atom, ...] = ()
    solved: Tuple[Atom, ...] = ()
    lia: Tuple[LinCon, ...] = ()
    clauses: Tuple[Clause, ...] = ()
    ruqs: Tuple[Ruq, ...] = ()
    ruqs_solved: Tuple[Ruq, ...] = ()
    pending: Tuple[Formula, ...] = ()
    subst: Substitution = field(default_factory=Substitution)
    query_vars: Tuple[str, ...] = ()
    failed: bool = False
    clauses_stale: bool = False
    bounds: Optional[Bounds] = None

    @property
    def atoms(self) -> Tuple[Atom, ...]:
        return self.todo + self.solved

    @property
    def is_empty(self) -> bool:
        return not (self.todo or self.solved or self.lia or self.clauses
                    or self.ruqs or self.ruqs_solved or self.pending)

    def constraints(self) -> List[Formula]:
        """subst 를 제외한 모든 제약을 식으로"""
        out: List[Formula] = list(self.atoms)
        out.extend(lincon_to_atom(c) for c in self.lia)
        out.extend(disj(*cl) for cl in self.clauses)
        out.extend(self.ruqs + self.ruqs_solved)
        out.extend(self.pending)
        return out


BranchSet = List[ConstraintStore]


# ---- 항 보조 ----

def _kind(t: Term) -> str:
    if isinstance(t, Var):
        return "var"
    if isinstance(t, IntLin):
        return "int"
    if isinstance(t, Pair):
        return "pair"
    if isinstance(t, UrTerm):
        return "ur"
    return "set"


def _lt(a: Term, b: Term) -> Atom:
    return atom(K.LT, a, b)


def _le(a: Term, b: Term) -> Atom:
    return atom(K.LT, a, lin_combine(b, num(1)))


def _eq(a: Term, b: Term) -> Atom:
    return atom(K.EQ, a, b)


def _neq(a: Term, b: Term) -> Atom:
    return atom(K.NEQ, a, b)


def _in(x: Term, s: Term) -> Atom:
    return atom(K.IN, x, s)


def _nin(x: Term, s: Term) -> Atom:
    return atom(K.NIN, x, s)


def _width(k: Term, m: Term) -> Term:
    """|[k,m]| = m - k + 1 (m ≥ k 일 때)"""
    return lin_combine(lin_combine(m, k, -1), num(1))


def _with_arg(a: Atom, index: int, t: Term) -> Atom:
    args = list(a.args)
    args[index] = t
    return Atom(a.kind, tuple(args))


def _set_var_like(t: Term) -> bool:
    return isinstance(t, Var) and t.sort != Sort.INT


def _sort_ok(var: Var, t: Term) -> bool:
    k = _kind(t)
    if var.sort == Sort.SET:
        return k in ("set", "var") and not (isinstance(t, Var) and t.sort == Sort.INT)
    if var.sort == Sort.INT:
        return k in ("int", "var") and not (isinstance(t, Var) and t.sort == Sort.SET)
    return True


# ---- 리터럴 키 (융해/포섭용) ----

@lru_cache(maxsize=65536)
def _lit_key(lit: Atom) -> tuple:
    if lit.kind in (K.LT, K.EQ, K.NEQ):
        c = lincon_from_atom(lit)
        if isinstance(c, LinCon):
            return ("lia", c)
    if lit.kind in (K.EQ, K.NEQ):
        return (lit.kind, tuple(sorted(lit.args, key=render)))
    return (lit.kind, lit.args)


_COMPLEMENT = {K.EQ: K.NEQ, K.NEQ: K.EQ, K.IN: K.NIN, K.NIN: K.IN, K.PAIR: K.NPAIR, K.NPAIR: K.PAIR}


def _lincon_complement(c: LinCon):
    if c.op == LE:
        return normalize({v: -d for v, d in c.coeffs}, LE, -c.bound - 1)
    return LinCon(c.coeffs, NE if c.op == EQ else EQ, c.bound)


def _complement_key(key: tuple) -> Optional[tuple]:
    if key[0] == "lia":
        c = _lincon_complement(key[1])
        return ("lia", c) if isinstance(c, LinCon) else None
    kind = _COMPLEMENT.get(key[0])
    return (kind, key[1]) if kind else None


@lru_cache(maxsize=65536)
def _clause_keys(clause: Clause) -> FrozenSet[tuple]:
    return frozenset(_lit_key(lit) for lit in clause)


# ---- 흡수 ----

def _calls_to_atoms(f: Formula) -> Formula:
    if isinstance(f, Call) and f.name in INT_COMPARISONS:
        return comparison_atom(f)
    if isinstance(f, And):
        return conj(*(_calls_to_atoms(p) for p in f.parts))
    if isinstance(f, Or):
        return disj(*(_calls_to_atoms(p) for p in f.parts))
    return f


def _clausable(f: Formula) -> bool:
    if isinstance(f, (And, Or)):
        return all(_clausable(p) for p in f.parts)
    if isinstance(f, Atom):
        return f.kind in CLAUSE_KINDS
    return isinstance(f, Truth)


class _Builder:
    """저장소 복사본에 식을 흡수시키는 작업 공간. drain 후 freeze 로 새 저장소를 만든다"""

    def __init__(self, store: ConstraintStore, ctx: RewriteContext):
        self.ctx = ctx
        self.todo: List[Atom] = list(store.todo)
        self.solved: List[Atom] = list(store.solved)
        self.lia: List[LinCon] = list(store.lia)
        self.clauses: List[Clause] = list(store.clauses)
        self.ruqs: List[Ruq] = list(store.ruqs)
        self.ruqs_solved: List[Ruq] = list(store.ruqs_solved)
        self.pending: List[Formula] = list(store.pending)
        self.subst = store.subst
        self.query_vars = store.query_vars
        self.failed = store.failed
        self.clauses_stale = store.clauses_stale
        self.bounds = store.bounds
        self.lia_dirty = store.bounds is None
        self.lia_vars: Set[str] = {v for c in self.lia for v in c.names}
        self.queue: Deque[Formula] = deque()

    def fail(self, why: str) -> None:
        if not self.failed and self.ctx.trace:
            logger.debug(f"가지 실패: {why}")
        self.failed = True

    def drain(self) -> bool:
        while self.queue and not self.failed:
            self._absorb(self.queue.popleft())
        if not self.failed:
            self.current_bounds()
        return not self.failed

    def freeze(self) -> ConstraintStore:
        return ConstraintStore(
            todo=tuple(self.todo),
            solved=tuple(self.solved),
            lia=tuple(self.lia),
            clauses=tuple(self.clauses),
            ruqs=tuple(self.ruqs),
            ruqs_solved=tuple(self.ruqs_solved),
            pending=tuple(self.pending),
            subst=self.subst,
            query_vars=self.query_vars,
            failed=self.failed,
            clauses_stale=self.clauses_stale,
            bounds=None if self.lia_dirty else self.bounds,
        )

    def current_bounds(self) -> Optional[Bounds]:
        if self.lia_dirty:
            self.bounds = propagate_bounds(self.lia)
            self.lia_dirty = False
            if self.bounds is None:
                self.fail("LIA 구간 전파 모순")
        return self.bounds

    # -- 식 --

    def _absorb(self, f: Formula) -> None:
        if isinstance(f, Truth):
            if not f.value:
                self.fail("false")
        elif isinstance(f, And):
            self.queue.extend(f.parts)
        elif isinstance(f, Or):
            self._add_or(f)
        elif isinstance(f, Atom):
            self._add_atom(f)
        elif isinstance(f, Ruq):
            self._add_ruq(f)
        elif isinstance(f, Call):
            if f.name in INT_COMPARISONS:
                self.queue.append(comparison_atom(f))
            else:
                self.queue.append(expand_call(f, self.ctx.registry, self.ctx.supply))
        else:
            raise SolverError(f"저장소에 넣을 수 없는 식: {f!r}")

    def _add_or(self, f: Or) -> None:
        try:
            g = _calls_to_atoms(subst_formula(self.subst, f))
        except SortError as e:
            self.fail(str(e))
            return
        if not isinstance(g, Or):
            self.queue.append(g)
            return
        if _clausable(g):
            clauses = to_clauses(g)
            if clauses is None:
                self.fail("거짓 논리합")
                return
            # 논리곱 항을 가진 논리합은 CNF 로 펼치지 않고 항 단위로 분기한다
            if len(clauses) <= len(g.parts):
                for cl in clauses:
                    self.add_clause(cl)
                return
        if g not in self.pending:
            self.pending.append(g)

    def _add_ruq(self, r: Ruq) -> None:
        try:
            r = subst_formula(self.subst, r)
        except SortError as e:
            self.fail(str(e))
            return
        if not isinstance(r, Ruq):
            self.queue.append(r)
            return
        if isinstance(r.domain, EmptySet) or r in self.ruqs or r in self.ruqs_solved:
            return
        if ruq_irreducible(r):
            self.ruqs_solved.append(r)
        else:
            self.ruqs.append(r)

    # -- 원자 --

    def _apply_atom(self, a: Atom) -> Optional[Atom]:
        try:
            return Atom(a.kind, tuple(apply_subst(self.subst, t) for t in a.args))
        except SortError:
            return None

    def _add_atom(self, a: Atom) -> None:
        applied = self._apply_atom(a)
        if applied is None:
            if a.kind not in (K.NEQ, K.NIN, K.NPAIR):
                self.fail(f"정렬 오류: {a}")
            return
        a = applied
        if a.kind in (K.LT, K.EQ, K.NEQ) and self._route_numeric(a):
            return
        if a.kind == K.EQ:
            self._add_eq(*a.args)
            return
        if a.kind == K.NEQ and a.args[0] == a.args[1]:
            self.fail(f"{a}")
            return
        if a in self.todo or a in self.solved:
            return
        if atom_irreducible(a):
            self.solved.append(a)
        else:
            self.todo.append(a)
        self.clauses_stale = True

    def _numeric(self, t: Term) -> bool:
        if isinstance(t, IntLin):
            return True
        return isinstance(t, Var) and (t.sort == Sort.INT or t.name in self.lia_vars)

    def _route_numeric(self, a: Atom) -> bool:
        """정수 원자이면 LIA 로 보내고 True"""
        x, y = a.args
        lx, ly = as_lin(x), as_lin(y)
        if a.kind == K.LT:
            if lx is None or ly is None:
                self.fail(f"정수가 아닌 비교: {a}")
                return True
        elif not (self._numeric(x) or self._numeric(y)):
            return False
        elif lx is None or ly is None:
            # 정수와 정수가 아닌 항
            if a.kind == K.EQ:
                self.fail(f"{a}")
            return True
        self.add_lincon(lincon_from_atom(a))
        return True

    def _add_eq(self, x: Term, y: Term) -> None:
        if x == y:
            return
        if not isinstance(x, Var) and isinstance(y, Var):
            x, y = y, x
        if isinstance(x, Var):
            if isinstance(y, Var) and is_fresh_name(y.name) and not is_fresh_name(x.name):
                x, y = y, x
            if occurs(x, y):
                elems, tail = set_elements(y)
                if elems and tail == x and not any(occurs(x, e) for e in elems):
                    # X = {t1,...,tn / X}
                    self.queue.append(conj(*(_in(e, x) for e in elems)))
                else:
                    self.fail(f"발생 검사: {x} = {render(y)}")
                return
            self.bind(x, y)
            return
        a = _eq(x, y)
        if a not in self.todo:
            self.todo.append(a)
            self.clauses_stale = True

    def bind(self, var: Var, t: Term) -> None:
        """var ↦ t 를 치환에 추가하고 var 가 나오는 제약을 다시 흡수"""
        name = var.name
        if not _sort_ok(var, t):
            self.fail(f"정렬 불일치: {name} = {render(t)}")
            return
        self.subst = self.subst.extend(name, t)
        self.clauses_stale = True

        def hit(a: Atom) -> bool:
            return any(occurs(name, x) for x in a.args)

        moved: List[Formula] = [a for a in self.todo + self.solved if hit(a)]
        if moved:
            self.todo = [a for a in self.todo if not hit(a)]
            self.solved = [a for a in self.solved if not hit(a)]

        def mentions(f: Formula) -> bool:
            return any(v.name == name for v in free_vars(f))

        for attr in ("ruqs", "ruqs_solved", "pending"):
            items = getattr(self, attr)
            if any(mentions(r) for r in items):
                moved.extend(r for r in items if mentions(r))
                setattr(self, attr, [r for r in items if not mentions(r)])
        self.queue.extend(moved)

        touched = [c for c in self.lia if name in c.names]
        if touched:
            self.lia = [c for c in self.lia if name not in c.names]
            self.lia_dirty = True
            lin = as_lin(t)
            for c in touched:
                if lin is None:
                    if c.op != NE:
                        self.fail(f"정수가 아닌 값: {name} = {render(t)}")
                        return
                    continue
                self.add_lincon(substitute(c, name, lin[0], lin[1]))

        stale = [cl for cl in self.clauses if any(hit(lit) for lit in cl)]
        if stale:
            self.clauses = [cl for cl in self.clauses if not any(hit(lit) for lit in cl)]
            for cl in stale:
                self.add_clause(cl)

    # -- LIA --

    def add_lincon(self, c) -> None:
        if c is True or c is None:
            return
        if c is False:
            self.fail("LIA 상수 모순")
            return
        if c.op == EQ:
            unit = [(v, d) for v, d in c.coeffs if abs(d) == 1]
            if unit:
                v, d = next(((v, d) for v, d in unit if is_fresh_name(v)), unit[0])
                rest = {u: -d * e for u, e in c.coeffs if u != v}
                self.bind(Var(v, Sort.INT), make_lin(rest, d * c.bound))
                return
        if c in self.lia:
            return
        self.lia.append(c)
        self.lia_dirty = True
        self.clauses_stale = True
        new = {v for v in c.names if v not in self.lia_vars}
        if new:
            self.lia_vars.update(new)
            self._reroute(new)

    def _reroute(self, names: Set[str]) -> None:
        """정수로 밝혀진 변수 사이의 ≠ 원자를 LIA 로 옮긴다"""
        def hit(a: Atom) -> bool:
            return (a.kind == K.NEQ and all(as_lin(t) is not None for t in a.args)
                    and any(term_vars(t) & names for t in a.args))

        moved = [a for a in self.todo + self.solved if hit(a)]
        if moved:
            self.todo = [a for a in self.todo if not hit(a)]
            self.solved = [a for a in self.solved if not hit(a)]
            self.queue.extend(moved)

    def lincon_value(self, c: LinCon) -> Optional[bool]:
        """현재 LIA 제약으로 c 의 참/거짓이 정해지면 그 값"""
        if c in self.lia:
            return True
        comp = _lincon_complement(c)
        if isinstance(comp, LinCon) and comp in self.lia:
            return False
        bounds = self.current_bounds()
        if bounds is None:
            return None
        lo: Optional[int] = 0
        hi: Optional[int] = 0
        for v, d in c.coeffs:
            vlo, vhi = bounds.get(v, (None, None))
            a, b = (vlo, vhi) if d > 0 else (vhi, vlo)
            lo = None if lo is None or a is None else lo + d * a
            hi = None if hi is None or b is None else hi + d * b
        if c.op == LE:
            if lo is not None and lo > c.bound:
                return False
            if hi is not None and hi <= c.bound:
                return True
            return None
        outside = (lo is not None and lo > c.bound) or (hi is not None and hi < c.bound)
        fixed = lo is not None and lo == hi == c.bound
        if outside or fixed:
            return fixed if c.op == EQ else outside
        return None

    # -- 절 --

    def add_clause(self, lits: Sequence[Atom]) -> None:
        out: List[Atom] = []
        for lit in lits:
            applied = self._apply_atom(lit)
            if applied is None:
                if lit.kind == K.NEQ:
                    return
                continue
            v = self.literal_value(applied)
            if v is True:
                return
            if v is False:
                continue
            if applied not in out:
                out.append(applied)
        if self.failed:
            return
        if not out:
            self.fail("빈 절")
        elif len(out) == 1:
            self.queue.append(out[0])
        else:
            self._insert_clause(tuple(out))

    def _insert_clause(self, clause: Clause) -> None:
        keys = _clause_keys(clause)
        if any(_clause_keys(d) <= keys for d in self.clauses):
            return
        for i, d in enumerate(self.clauses):
            dk = _clause_keys(d)
            if len(dk) != len(keys):
                continue
            extra = keys - dk
            if len(extra) != 1:
                continue
            (k,) = extra
            comp = _complement_key(k)
            if comp is None or comp not in dk or dk - {comp} != keys - {k}:
                continue
            # 이진 융해: (R ∨ l) ∧ (R ∨ ¬l) → R
            del self.clauses[i]
            self.add_clause(tuple(lit for lit in clause if _lit_key(lit) != k))
            return
        self.clauses = [d for d in self.clauses if not keys <= _clause_keys(d)]
        self.clauses.append(clause)

    def literal_value(self, lit: Atom) -> Optional[bool]:
        k, args = lit.kind, lit.args
        if all(is_ground(t) for t in args):
            try:
                return eval_ground(lit)
            except SolverError:
                return None
        if k in (K.EQ, K.NEQ):
            v = self._eq_value(*args)
            return None if v is None else (v if k == K.EQ else not v)
        if k == K.LT:
            c = lincon_from_atom(lit)
            if c is None:
                return False
            return c if isinstance(c, bool) else self.lincon_value(c)
        if k in (K.IN, K.NIN):
            v = self._in_value(*args)
            return None if v is None else (v if k == K.IN else not v)
        if k in (K.PAIR, K.NPAIR):
            v = self._pair_value(args[0])
            return None if v is None else (v if k == K.PAIR else not v)
        return None

    def _has(self, a: Atom) -> bool:
        return a in self.solved or a in self.todo

    def _eq_value(self, a: Term, b: Term) -> Optional[bool]:
        if a == b:
            return True
        la, lb = as_lin(a), as_lin(b)
        if la is not None and lb is not None:
            c = lincon_from_atom(_eq(a, b))
            if isinstance(c, bool):
                return c
            v = self.lincon_value(c)
            if v is not None:
                return v
        ka, kb = _kind(a), _kind(b)
        if ka != "var" and kb != "var":
            if ka != kb:
                return False
            if ka == "pair":
                return self._all_eq([(a.first, b.first), (a.second, b.second)])
            if ka == "ur":
                if a.functor != b.functor or len(a.args) != len(b.args):
                    return False
                return self._all_eq(list(zip(a.args, b.args)))
        else:
            var, other = (a, b) if ka == "var" else (b, a)
            if not _sort_ok(var, other):
                return False
            if _kind(other) in ("pair", "ur", "set") and occurs(var, other):
                return False
        if self._has(_neq(a, b)) or self._has(_neq(b, a)):
            return False
        return None

    def _all_eq(self, pairs: List[Tuple[Term, Term]]) -> Optional[bool]:
        values = [self._eq_value(x, y) for x, y in pairs]
        if any(v is False for v in values):
            return False
        if all(v is True for v in values):
            return True
        return None

    def _in_value(self, x: Term, s: Term) -> Optional[bool]:
        if isinstance(s, EmptySet):
            return False
        if isinstance(s, SetCons):
            elems, tail = set_elements(s)
            values = [self._eq_value(x, e) for e in elems]
            if any(v is True for v in values):
                return True
            if all(v is False for v in values):
                return self._in_value(x, tail)
            return None
        if isinstance(s, Interval):
            if as_lin(x) is None:
                return False
            lo = self.literal_value(_le(s.lo, x))
            hi = self.literal_value(_le(x, s.hi))
            if lo is False or hi is False:
                return False
            return True if lo and hi else None
        if self._has(_in(x, s)):
            return True
        if self._has(_nin(x, s)):
            return False
        return None

    def _pair_value(self, t: Term) -> Optional[bool]:
        if isinstance(t, Pair):
            return True
        if not isinstance(t, Var) or t.sort in (Sort.INT, Sort.SET):
            return False
        if self._has(atom(K.NPAIR, t)):
            return False
        return None


def extend_store(store: ConstraintStore, ctx: RewriteContext, *formulas: Formula) -> Optional[ConstraintStore]:
    """store ∧ formulas. 모순이면 None"""
    b = _Builder(store, ctx)
    b.queue.extend(formulas)
    return b.freeze() if b.drain() else None


def initial_store(f: Formula, ctx: RewriteContext, query_vars: Sequence[str] = ()) -> Optional[ConstraintStore]:
    return extend_store(ConstraintStore(query_vars=tuple(query_vars)), ctx, f)


# ---- 기약 판정 (step 기준) ----

def atom_irreducible(a: Atom) -> bool:
    """step 이 더 이상 바꾸지 않는 원자 형태인지 (집합 ≠ 제거는 remove_neq 에서 따로 다룬다)"""
    k, args = a.kind, a.args
    if k == K.NEQ:
        return any(isinstance(t, Var) for t in args)
    if k == K.NIN:
        x, s = args
        return isinstance(s, Var) and not occurs(s, x)
    if k == K.UN:
        e, f, g = args
        return all(isinstance(t, Var) for t in args) and e != f
    if k == K.DISJ:
        e, f = args
        return isinstance(e, Var) and isinstance(f, Var) and e != f
    if k == K.SIZE:
        e, m = args
        return isinstance(e, Var) and not (isinstance(m, IntLin) and not m.coeffs and m.const == 0)
    if k == K.NPAIR:
        return isinstance(args[0], Var) and args[0].sort not in (Sort.INT, Sort.SET)
    if k == K.SUBSET:
        return isinstance(args[0], Var)
    return False


def ruq_irreducible(r: Ruq) -> bool:
    if not isinstance(r.domain, Var):
        return False
    body = r.body
    if isinstance(body, Ruq):
        binders = {b.name for b in r.binder}
        movable = not isinstance(body.domain, Var) and not (term_vars(body.domain) & binders)
        return not movable and ruq_irreducible(body)
    return True


def _closed(t: Term) -> bool:
    return isinstance(set_elements(t)[1], EmptySet)


def _branching(a: Atom) -> bool:
    """이 원자의 규칙이 둘 이상의 가지를 만드는지"""
    k, args = a.kind, a.args
    if k == K.EQ:
        x, y = args
        if isinstance(x, Interval) and isinstance(y, Interval):
            return True
        if isinstance(x, SetCons) and isinstance(y, SetCons):
            if is_ground(x) and is_ground(y):
                return False
            if _closed(x) and _closed(y):
                return False
            return set_elements(x)[1] != set_elements(y)[1]
        return False
    if k == K.NEQ:
        x, y = args
        return _kind(x) == "set" and _kind(y) == "set" and not (is_ground(x) and is_ground(y))
    if k == K.UN:
        if any(isinstance(t, EmptySet) for t in args) or args[0] == args[1]:
            return False
        if all(isinstance(t, (EmptySet, SetCons)) and _closed(t) for t in args):
            return False
        return True
    if k == K.DISJ:
        return any(isinstance(t, Interval) for t in args)
    if k == K.SIZE:
        e = args[0]
        if isinstance(e, SetCons):
            return not is_ground(e) and not isinstance(e.rest, EmptySet)
        return isinstance(e, Interval)
    return False


# ---- 원자 규칙 ----

def rewrite_atom(a: Atom, ctx: RewriteContext) -> List[Formula]:
    """원자 하나에 규칙 적용. 결과는 대안 목록 (빈 목록이면 실패)"""
    handler = _RULES.get(a.kind)
    if handler is None:
        raise SolverError(f"규칙이 없는 원자: {a}")
    return handler(a.args, ctx)


def _ground_compare(x: Term, y: Term) -> List[Formula]:
    return [TRUE] if eval_ground(_eq(x, y)) else []


def _rule_eq(args, ctx: RewriteContext) -> List[Formula]:
    x, y = args
    if x == y:
        return [TRUE]
    if isinstance(x, Var) or isinstance(y, Var):
        # 저장소가 이미 처리한다. X = {../X} 꼴만 여기로 올 수 있다
        return [_eq(x, y)]
    kx, ky = _kind(x), _kind(y)
    if kx != ky:
        return []
    if kx == "pair":
        return [conj(_eq(x.first, y.first), _eq(x.second, y.second))]
    if kx == "ur":
        if x.functor != y.functor or len(x.args) != len(y.args):
            return []
        return [conj(*(_eq(p, q) for p, q in zip(x.args, y.args)))]
    if kx == "int":
        return [atom(K.EQ, x, y)]
    return _rule_set_eq(x, y, ctx)


def _rule_set_eq(x: Term, y: Term, ctx: RewriteContext) -> List[Formula]:
    if isinstance(y, (EmptySet, Interval)) and isinstance(x, SetCons):
        x, y = y, x
    if isinstance(x, EmptySet):
        if isinstance(y, EmptySet):
            return [TRUE]
        if isinstance(y, Interval):
            return [_lt(y.hi, y.lo)]
        return []
    if isinstance(x, Interval):
        if isinstance(y, EmptySet):
            return [_lt(x.hi, x.lo)]
        if isinstance(y, Interval):
            return [
                conj(_lt(x.hi, x.lo), _lt(y.hi, y.lo)),
                conj(_le(x.lo, x.hi), _eq(x.lo, y.lo), _eq(x.hi, y.hi)),
            ]
        # [k,m] = {t/E}: 원소가 모두 구간 안에 있고 크기가 같다
        return [conj(atom(K.SUBSET, y, x), atom(K.SIZE, y, _width(x.lo, x.hi)))]
    if is_ground(x) and is_ground(y):
        return _ground_compare(x, y)
    xs, xt = set_elements(x)
    ys, yt = set_elements(y)
    if xt == yt:
        # 꼬리가 같으면 서로의 원소가 상대 집합에 속하는 것과 같다
        if sorted(map(render, xs)) == sorted(map(render, ys)):
            return [TRUE]
        return [conj(*(_in(e, y) for e in xs), *(_in(e, x) for e in ys))]
    # {x/E} = {y/F}
    head_x, rest_x = x.elem, x.rest
    head_y, rest_y = y.elem, y.rest
    n = ctx.supply.fresh(Sort.SET)
    return [
        conj(_eq(head_x, head_y), _eq(rest_x, rest_y)),
        conj(_eq(head_x, head_y), _eq(x, rest_y)),
        conj(_eq(head_x, head_y), _eq(rest_x, y)),
        conj(_eq(rest_x, SetCons(head_y, n)), _eq(SetCons(head_x, n), rest_y)),
    ]


def _rule_neq(args, ctx: RewriteContext) -> List[Formula]:
    x, y = args
    if x == y:
        return []
    kx, ky = _kind(x), _kind(y)
    if kx != ky:
        return [TRUE]
    if kx == "pair":
        return [disj(_neq(x.first, y.first), _neq(x.second, y.second))]
    if kx == "ur":
        if x.functor != y.functor or len(x.args) != len(y.args):
            return [TRUE]
        return [disj(*(_neq(p, q) for p, q in zip(x.args, y.args)))]
    if kx == "int":
        return [atom(K.NEQ, x, y)]
    if is_ground(x) and is_ground(y):
        return [] if eval_ground(_eq(x, y)) else [TRUE]
    return _set_difference_witness(x, y, ctx)


def _set_difference_witness(x: Term, y: Term, ctx: RewriteContext) -> List[Formula]:
    """x ≠ y  ⇔  어떤 n 이 한쪽에만 속한다"""
    n = ctx.supply.fresh(Sort.UR)
    return [conj(_in(n, x), _nin(n, y)), conj(_in(n, y), _nin(n, x))]


def _rule_in(args, ctx: RewriteContext) -> List[Formula]:
    x, s = args
    if isinstance(s, EmptySet):
        return []
    if isinstance(s, SetCons):
        elems, tail = set_elements(s)
        if x in elems:
            return [TRUE]
        options = [_eq(x, e) for e in elems]
        if not isinstance(tail, EmptySet):
            options.append(_in(x, tail))
        return [disj(*options)]
    if isinstance(s, Interval):
        return [conj(_le(s.lo, x), _le(x, s.hi))]
    if isinstance(s, Var):
        n = ctx.supply.fresh(Sort.SET)
        return [conj(_eq(s, SetCons(x, n)), _nin(x, n))]
    return []


def _rule_nin(args, ctx: RewriteContext) -> List[Formula]:
    x, s = args
    if isinstance(s, Var):
        # 정초성: 자기 자신을 포함하는 항은 원소가 될 수 없다
        return [TRUE] if occurs(s, x) else [_nin(x, s)]
    if isinstance(s, EmptySet):
        return [TRUE]
    if isinstance(s, SetCons):
        elems, tail = set_elements(s)
        parts: List[Formula] = [_neq(x, e) for e in elems]
        if not isinstance(tail, EmptySet):
            parts.append(_nin(x, tail))
        return [conj(*parts)]
    if isinstance(s, Interval):
        if as_lin(x) is None:
            return [TRUE]
        return [disj(_lt(x, s.lo), _lt(s.hi, x))]
    return [TRUE]


def _rule_pair(args, ctx: RewriteContext) -> List[Formula]:
    (x,) = args
    if isinstance(x, Pair):
        return [TRUE]
    if isinstance(x, Var) and x.sort not in (Sort.INT, Sort.SET):
        return [_eq(x, Pair(ctx.supply.fresh(Sort.INT), ctx.supply.fresh(Sort.UR)))]
    return []


def _rule_npair(args, ctx: RewriteContext) -> List[Formula]:
    (x,) = args
    if isinstance(x, Pair):
        return []
    if isinstance(x, Var) and x.sort not in (Sort.INT, Sort.SET):
        return [atom(K.NPAIR, x)]
    return [TRUE]


def _rule_subset(args, ctx: RewriteContext) -> List[Formula]:
    """E ⊆ [k,m]"""
    e, interval = args
    k, m = interval.lo, interval.hi
    if isinstance(e, EmptySet):
        return [TRUE]
    if isinstance(e, SetCons):
        elems, tail = set_elements(e)
        parts: List[Formula] = [conj(_le(k, x), _le(x, m)) for x in elems]
        parts.append(atom(K.SUBSET, tail, interval))
        return [conj(*parts)]
    if isinstance(e, Interval):
        return [disj(_lt(e.hi, e.lo), conj(_le(k, e.lo), _le(e.hi, m)))]
    if isinstance(e, Var):
        return [atom(K.SUBSET, e, interval)]
    return []


def _rule_size(args, ctx: RewriteContext) -> List[Formula]:
    e, m = args
    if as_lin(m) is None:
        return []
    if isinstance(e, EmptySet):
        return [atom(K.EQ, m, num(0))]
    if isinstance(e, SetCons):
        if is_ground(e):
            return [atom(K.EQ, m, num(len(to_value(e))))]
        head, rest = e.elem, e.rest
        if isinstance(rest, EmptySet):
            return [atom(K.EQ, m, num(1))]
        elems, _ = set_elements(rest)
        if head in elems:
            return [atom(K.SIZE, rest, m)]
        return [
            conj(_nin(head, rest), atom(K.SIZE, rest, lin_combine(m, num(1), -1))),
            conj(_in(head, rest), atom(K.SIZE, rest, m)),
        ]
    if isinstance(e, Interval):
        return [
            conj(_lt(e.hi, e.lo), atom(K.EQ, m, num(0))),
            conj(_le(e.lo, e.hi), atom(K.EQ, m, _width(e.lo, e.hi))),
        ]
    if isinstance(e, Var):
        if isinstance(m, IntLin) and not m.coeffs and m.const == 0:
            return [_eq(e, EMPTY)]
        return [atom(K.SIZE, e, m)]
    return []


def _fresh_interval_set(interval: Interval, ctx: RewriteContext) -> Tuple[Var, Formula]:
    """구간과 같은 집합 변수 N: N ⊆ [k,m] ∧ |N| = m-k+1 (k ≤ m 일 때)"""
    n = ctx.supply.fresh(Sort.SET)
    k, m = interval.lo, interval.hi
    return n, conj(_le(k, m), atom(K.SUBSET, n, interval), atom(K.SIZE, n, _width(k, m)))


def _rule_un(args, ctx: RewriteContext) -> List[Formula]:
    e, f, g = args
    if any(_kind(t) not in ("set", "var") for t in args):
        return []
    if isinstance(e, EmptySet):
        return [_eq(f, g)]
    if isinstance(f, EmptySet):
        return [_eq(e, g)]
    if isinstance(g, EmptySet):
        return [conj(_eq(e, EMPTY), _eq(f, EMPTY))]
    if e == f:
        return [_eq(g, e)]
    for i, t in enumerate(args):
        if isinstance(t, Interval):
            n, same = _fresh_interval_set(t, ctx)
            a = atom(K.UN, e, f, g)
            return [
                conj(_lt(t.hi, t.lo), _with_arg(a, i, EMPTY)),
                conj(same, _with_arg(a, i, n)),
            ]
    if all(_closed(t) for t in args):
        # 닫힌 확장 집합: 원소별 소속 조건
        es = set_elements(e)[0] + set_elements(f)[0]
        gs = set_elements(g)[0]
        parts = [disj(*(_eq(x, y) for y in gs)) for x in es]
        parts += [disj(*(_eq(y, x) for x in es)) for y in gs]
        return [conj(*parts)]
    if isinstance(f, SetCons) and not isinstance(e, SetCons):
        e, f = f, e
    if isinstance(e, SetCons):
        t, c = e.elem, e.rest
        n, n2 = ctx.supply.fresh(Sort.SET), ctx.supply.fresh(Sort.SET)
        base = conj(_nin(t, c), _eq(g, SetCons(t, n)), _nin(t, n))
        return [
            conj(_in(t, c), atom(K.UN, c, f, g)),
            conj(base, _nin(t, f), atom(K.UN, c, f, n)),
            conj(base, _eq(f, SetCons(t, n2)), _nin(t, n2), atom(K.UN, c, n2, n)),
        ]
    if isinstance(g, SetCons):
        t, rest = g.elem, g.rest
        n1, n2 = ctx.supply.fresh(Sort.SET), ctx.supply.fresh(Sort.SET)
        fresh_t = _nin(t, rest)
        return [
            conj(_in(t, rest), atom(K.UN, e, f, rest)),
            conj(fresh_t, _eq(e, SetCons(t, n1)), _nin(t, n1), _nin(t, f), atom(K.UN, n1, f, rest)),
            conj(fresh_t, _nin(t, e), _eq(f, SetCons(t, n2)), _nin(t, n2), atom(K.UN, e, n2, rest)),
            conj(fresh_t, _eq(e, SetCons(t, n1)), _nin(t, n1), _eq(f, SetCons(t, n2)), _nin(t, n2),
                 atom(K.UN, n1, n2, rest)),
        ]
    return [atom(K.UN, e, f, g)]


def _rule_disj(args, ctx: RewriteContext) -> List[Formula]:
    e, f = args
    if any(_kind(t) not in ("set", "var") for t in args):
        return []
    if isinstance(e, EmptySet) or isinstance(f, EmptySet):
        return [TRUE]
    if e == f:
        return [_eq(e, EMPTY)]
    for i, t in enumerate(args):
        if isinstance(t, Interval):
            n, same = _fresh_interval_set(t, ctx)
            other = args[1 - i]
            return [_lt(t.hi, t.lo), conj(same, atom(K.DISJ, n, other))]
    if isinstance(f, SetCons) and not isinstance(e, SetCons):
        e, f = f, e
    if isinstance(e, SetCons):
        return [conj(_nin(e.elem, f), atom(K.DISJ, e.rest, f))]
    return [atom(K.DISJ, e, f)]


_RULES = {
    K.EQ: _rule_eq,
    K.NEQ: _rule_neq,
    K.IN: _rule_in,
    K.NIN: _rule_nin,
    K.PAIR: _rule_pair,
    K.NPAIR: _rule_npair,
    K.SUBSET: _rule_subset,
    K.SIZE: _rule_size,
    K.UN: _rule_un,
    K.DISJ: _rule_disj,
}


# ---- RUQ 규칙 ----

def subst_into_ruq(binder: Tuple[Var, ...], element: Term, body: Formula, supply: FreshSupply) -> Formula:
    """body[binder ↦ element]. 순서쌍 바인더에 변수 원소가 오면 원소를 순서쌍으로 펼친다"""
    if len(binder) == 1:
        return subst_formula({binder[0].name: element}, body)
    x, y = binder
    if isinstance(element, Pair):
        return subst_formula({x.name: element.first, y.name: element.second}, body)
    if isinstance(element, Var) and element.sort not in (Sort.INT, Sort.SET):
        i, v = supply.fresh(Sort.INT), supply.fresh(y.sort)
        return conj(_eq(element, Pair(i, v)), subst_formula({x.name: i, y.name: v}, body))
    return FALSE


def rewrite_ruq(r: Ruq, ctx: RewriteContext) -> Optional[List[Formula]]:
    """RUQ 하나에 규칙 적용. 기약이면 None"""
    d = r.domain
    if isinstance(d, EmptySet):
        return [TRUE]
    if isinstance(d, SetCons):
        elems, tail = set_elements(d)
        parts = [subst_into_ruq(r.binder, e, r.body, ctx.supply) for e in elems]
        if not isinstance(tail, EmptySet):
            parts.append(Ruq(r.binder, tail, r.body))
        return [conj(*parts)]
    if isinstance(d, Interval):
        n, same = _fresh_interval_set(d, ctx)
        return [conj(same, Ruq(r.binder, n, r.body)), _lt(d.hi, d.lo)]
    if isinstance(d, Var):
        inner = r.body
        if isinstance(inner, Ruq) and not isinstance(inner.domain, Var) \
                and not (term_vars(inner.domain) & {b.name for b in r.binder}):
            # ∀x∈D ∀y∈E: φ  ⇔  ∀y∈E ∀x∈D: φ
            return [Ruq(inner.binder, inner.domain, Ruq(r.binder, d, inner.body))]
        return None
    return [FALSE]


# ---- 대칭 가지치기 ----

def _canon_term(t: Term) -> str:
    """집합 원소 순서를 무시한 표기"""
    if isinstance(t, SetCons):
        elems, tail = set_elements(t)
        inner = ",".join(sorted(_canon_term(e) for e in elems))
        return "{" + inner + ("" if isinstance(tail, EmptySet) else "/" + _canon_term(tail)) + "}"
    if isinstance(t, Pair):
        return f"[{_canon_term(t.first)},{_canon_term(t.second)}]"
    if isinstance(t, UrTerm) and t.args:
        return f"{t.functor}(" + ",".join(_canon_term(a) for a in t.args) + ")"
    if isinstance(t, Interval):
        return f"int({_canon_term(t.lo)},{_canon_term(t.hi)})"
    return render(t)


def _canon_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        args = [_canon_term(t) for t in f.args]
        if f.kind in (K.EQ, K.NEQ):
            args.sort()
        return f"{f.kind}(" + ",".join(args) + ")"
    if isinstance(f, (And, Or)):
        op = "&" if isinstance(f, And) else "|"
        return op + "(" + ";".join(sorted(_canon_formula(p) for p in f.parts)) + ")"
    if isinstance(f, Ruq):
        names = ",".join(b.name for b in f.binder)
        return f"all([{names}]:{_canon_term(f.domain)}:{_canon_formula(f.body)})"
    if isinstance(f, Call):
        return f"{f.name}(" + ",".join(_canon_term(t) for t in f.args) + ")"
    return str(f)


def _store_key(store: ConstraintStore, mapping: Optional[Dict[str, Term]] = None) -> Tuple[str, ...]:
    """저장소 제약의 (순서 무시) 정규 표기. mapping 이 있으면 변수를 바꿔 적용한 뒤의 표기"""
    def fm(f: Formula) -> Formula:
        return subst_formula(mapping, f) if mapping else f

    items: List[str] = []
    for a in store.todo + store.solved:
        items.append("a" + _canon_formula(fm(a)))
    for c in store.lia:
        coeffs = {(mapping[v].name if mapping and v in mapping else v): d for v, d in c.coeffs}
        items.append(f"l{normalize(coeffs, c.op, c.bound)!r}")
    for cl in store.clauses:
        items.append("c" + "|".join(sorted(_canon_formula(fm(lit)) for lit in cl)))
    for r in store.ruqs + store.ruqs_solved + store.pending:
        items.append("r" + _canon_formula(fm(r)))
    for q in store.query_vars:
        v = store.subst.get(q)
        if v is not None:
            items.append(f"q{q}=" + _canon_term(apply_subst(mapping, v) if mapping else v))
    return tuple(sorted(items))


def _swap_map(l1: Atom, l2: Atom, frozen: Sequence[str]) -> Optional[Dict[str, Term]]:
    """l1 을 l2 로 보내는 변수 맞바꿈 (없으면 None). frozen 변수는 바꾸지 않는다"""
    if l1.kind != l2.kind or len(l1.args) != len(l2.args):
        return None
    pairs: Dict[str, Var] = {}

    def link(a: Var, b: Var) -> bool:
        if a.name in pairs:
            return pairs[a.name].name == b.name
        if b.name in pairs:
            return pairs[b.name].name == a.name
        pairs[a.name], pairs[b.name] = b, a
        return True

    def walk(a: Term, b: Term) -> bool:
        if a == b:
            return True
        if isinstance(a, Var) and isinstance(b, Var):
            return link(a, b)
        if type(a) is not type(b):
            return False
        if isinstance(a, IntLin):
            if a.const != b.const or len(a.coeffs) != len(b.coeffs):
                return False
            return all(c == d and (v == u or link(Var(v, Sort.INT), Var(u, Sort.INT)))
                       for (v, c), (u, d) in zip(a.coeffs, b.coeffs))
        if isinstance(a, Pair):
            return walk(a.first, b.first) and walk(a.second, b.second)
        if isinstance(a, UrTerm):
            return a.functor == b.functor and len(a.args) == len(b.args) \
                and all(walk(x, y) for x, y in zip(a.args, b.args))
        if isinstance(a, SetCons):
            return walk(a.elem, b.elem) and walk(a.rest, b.rest)
        if isinstance(a, Interval):
            return walk(a.lo, b.lo) and walk(a.hi, b.hi)
        return False

    if not all(walk(x, y) for x, y in zip(l1.args, l2.args)) or not pairs:
        return None
    if any(name in pairs for name in frozen):
        return None
    return dict(pairs)


def _symmetric_survivors(store: ConstraintStore, lits: Sequence[Atom]) -> List[int]:
    """저장소를 바꾸지 않는 변수 맞바꿈으로 앞선 리터럴과 겹치는 가지를 뺀다"""
    survivors = [0]
    base: Optional[Tuple[str, ...]] = None
    for i in range(1, len(lits)):
        pruned = False
        for j in range(i):
            m = _swap_map(lits[j], lits[i], store.query_vars)
            if m is None:
                continue
            if base is None:
                base = _store_key(store)
            if _store_key(store, m) == base:
                pruned = True
                break
        if not pruned:
            survivors.append(i)
    if len(survivors) < len(lits):
        logger.debug(f"대칭 가지치기: {len(lits)}개 중 {len(lits) - len(survivors)}개 가지 제거")
    return survivors


# ---- step ----

def _expand(store: ConstraintStore, alternatives: Sequence[Formula], ctx: RewriteContext) -> BranchSet:
    out = []
    for alt in alternatives:
        s = extend_store(store, ctx, alt)
        if s is None:
            continue
        if s.lia != store.lia and not relaxation_feasible(s.lia):
            if ctx.trace:
                logger.debug(f"가지 실패: LP 완화 불능 ({render_formula(alt)})")
            continue
        out.append(s)
    ctx.budget.branch(len(out))
    return out


def _propagate(store: ConstraintStore, ctx: RewriteContext) -> BranchSet:
    """절을 현재 저장소에 대해 다시 단순화 (단위 전파)"""
    b = _Builder(replace(store, clauses=()), ctx)
    b.clauses_stale = False
    for cl in store.clauses:
        b.add_clause(cl)
    if not b.drain():
        return []
    return [b.freeze()]


def _integer_literal(lit: Atom) -> bool:
    return lit.kind == K.LT or all(isinstance(t, IntLin) or (isinstance(t, Var) and t.sort == Sort.INT)
                                   for t in lit.args)


def _clause_rank(clause: Clause) -> Tuple[int, bool]:
    """짧은 절 먼저, 같은 길이면 집합 리터럴이 있는 절 먼저"""
    return len(clause), all(_integer_literal(lit) for lit in clause)


def _branch_clause(store: ConstraintStore, ctx: RewriteContext) -> BranchSet:
    best = min(_clause_rank(c) for c in store.clauses)
    candidates = [c for c in store.clauses if _clause_rank(c) == best]
    clause = ctx.rng.choice(candidates) if ctx.rng else candidates[0]
    rest = replace(store, clauses=tuple(c for c in store.clauses if c is not clause))
    lits = list(clause)
    keep = _symmetric_survivors(store, lits) if ctx.symmetry else range(len(lits))
    alternatives = [conj(lits[i], *(negate_qf(lits[j]) for j in range(i))) for i in keep]
    return _expand(rest, alternatives, ctx)


def step(store: ConstraintStore, ctx: RewriteContext) -> BranchSet:
    """규칙 하나를 적용한 가지 목록. 적용할 규칙이 없으면 [store] (같은 객체)"""
    if store.failed:
        return []
    if store.todo:
        ordered = sorted(store.todo, key=lambda a: _PRIORITY.get(a.kind, 9))
        chosen = next((a for a in ordered if not _branching(a)), ordered[0])
        if ctx.trace:
            logger.debug(f"step: {chosen}")
        rest = replace(store, todo=tuple(a for a in store.todo if a != chosen))
        return _expand(rest, rewrite_atom(chosen, ctx), ctx)
    if store.ruqs:
        r = store.ruqs[0]
        rest = replace(store, ruqs=store.ruqs[1:])
        alternatives = rewrite_ruq(r, ctx)
        if alternatives is None:
            return [replace(rest, ruqs_solved=store.ruqs_solved + (r,))]
        if ctx.trace:
            logger.debug(f"step: RUQ 정의역 {render(r.domain)}")
        return _expand(rest, alternatives, ctx)
    if store.clauses and store.clauses_stale:
        return _propagate(store, ctx)
    if store.pending:
        f = store.pending[0]
        rest = replace(store, pending=store.pending[1:])
        parts = list(f.parts) if isinstance(f, Or) else [f]
        return _expand(rest, parts, ctx)
    if store.clauses:
        return _branch_clause(store, ctx)
    return [store]


# ---- 집합 ≠ 제거 ----

def _busy_sets(store: ConstraintStore) -> Set[str]:
    """un/size 인자이거나 RUQ 정의역인 집합 변수"""
    busy: Set[str] = set()
    for a in store.solved:
        if a.kind == K.UN:
            busy.update(t.name for t in a.args if isinstance(t, Var))
        elif a.kind == K.SIZE and isinstance(a.args[0], Var):
            busy.add(a.args[0].name)
    for r in store.ruqs_solved:
        if isinstance(r.domain, Var):
            busy.add(r.domain.name)
    return busy


def _neq_elim_applies(a: Atom, busy: Set[str]) -> bool:
    if a.kind != K.NEQ:
        return False
    var_args = [t for t in a.args if isinstance(t, Var)]
    return any(v.name in busy and v.sort != Sort.INT for v in var_args)


def remove_neq(store: ConstraintStore, ctx: RewriteContext) -> BranchSet:
    """E ≠ t (E 가 un/size 인자 또는 RUQ 정의역) 를 n ∈ E ∧ n ∉ t ∨ n ∈ t ∧ n ∉ E 로 바꾼다"""
    busy = _busy_sets(store)
    qualifying = [a for a in store.solved if _neq_elim_applies(a, busy)]
    if not qualifying:
        return [store]
    base = replace(store, solved=tuple(a for a in store.solved if a not in qualifying))
    first, others = qualifying[0], qualifying[1:]
    extra = [disj(*_set_difference_witness(*a.args, ctx)) for a in others]
    alternatives = [conj(alt, *extra) for alt in _set_difference_witness(*first.args, ctx)]
    return _expand(base, alternatives, ctx)


def is_irreducible(c: Formula, store: ConstraintStore) -> bool:
    if isinstance(c, Atom):
        if c.kind == K.NEQ and _neq_elim_applies(c, _busy_sets(store)):
            return False
        return atom_irreducible(c)
    if isinstance(c, Ruq):
        return ruq_irreducible(c)
    return False


# ---- 루프 ----

def lia_constraints(store: ConstraintStore) -> List[LinCon]:
    """LIA 제약과 정수 변수 사이에 남은 ≠ 원자"""
    out = list(store.lia)
    names = {v for c in out for v in c.names}
    for a in store.solved:
        if a.kind == K.NEQ and all(as_lin(t) is not None for t in a.args) \
                and any(term_vars(t) & names for t in a.args):
            c = lincon_from_atom(a)
            if isinstance(c, LinCon):
                out.append(c)
    return out


def lia_feasible(store: ConstraintStore, ctx: RewriteContext) -> bool:
    constraints = lia_constraints(store)
    if not constraints:
        return True
    return lia_decide(LiaProblem(constraints), ctx.node_limit).feasible


def step_loop(store: ConstraintStore, ctx: RewriteContext) -> Iterator[ConstraintStore]:
    """step 고정점까지 깊이 우선으로 진행하여 기약 저장소를 차례로 내보낸다"""
    stack: List[ConstraintStore] = [store]
    while stack:
        s = stack.pop()
        ctx.budget.tick()
        out = step(s, ctx)
        if len(out) == 1 and out[0] is s:
            if lia_feasible(s, ctx):
                yield s
            continue
        stack.extend(reversed(out))


def rewrite_loop(store: ConstraintStore, ctx: RewriteContext) -> Iterator[ConstraintStore]:
    """step_loop 와 remove_neq 를 번갈아 고정점까지"""
    for s in step_loop(store, ctx):
        branches = remove_neq(s, ctx)
        if len(branches) == 1 and branches[0] is s:
            yield s
            continue
        for b in branches:
            yield from rewrite_loop(b, ctx)
