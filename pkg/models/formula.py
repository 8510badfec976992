# ----------------------------------------------------------------------------------------------------
# 작성목적 : 원자 제약, 제한 전칭 한정자(RUQ), 논리식 자료형 정의
# 작성일 : 2025-09-02

# 변경사항 내역 (날짜 | 변경목적 | 변경내용 | 작성자 순으로 기입)
# 2025-09-02 | 최초 구현 | Atom/Ruq/And/Or/Call 정의 | 구동빈
# 2025-09-11 | 절 변환 추가 | QF 본문을 절(clause) 목록으로 변환하는 to_clauses 추가 | 이주형
# ----------------------------------------------------------------------------------------------------

from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Tuple, Union

from models.errors import SortError
from models.terms import (
    Substitution,
    Term,
    Var,
    apply_subst,
    iter_vars,
    render,
)


class AtomKind:
    """원자 제약 종류"""
    EQ = "eq"
    NEQ = "neq"
    IN = "in"
    NIN = "nin"
    UN = "un"
    DISJ = "disj"
    SIZE = "size"
    LT = "lt"
    PAIR = "pair"
    NPAIR = "npair"
    # E ⊆ [k,m] (규칙 적용 중에만 생성됨)
    SUBSET = "subset"

    ARITY = {
        EQ: 2, NEQ: 2, IN: 2, NIN: 2, UN: 3, DISJ: 2,
        SIZE: 2, LT: 2, PAIR: 1, NPAIR: 1, SUBSET: 2,
    }

    # RUQ 본문에 허용되는 종류
    QF = frozenset({EQ, NEQ, LT, PAIR, NPAIR, NIN})


@dataclass(frozen=True)
class Atom:
    kind: str
    args: Tuple[Term, ...]

    def __str__(self) -> str:
        return render_formula(self)


@dataclass(frozen=True)
class Truth:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


TRUE = Truth(True)
FALSE = Truth(False)


@dataclass(frozen=True)
class And:
    parts: Tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: Tuple["Formula", ...]


@dataclass(frozen=True)
class Ruq:
    """∀ binder ∈ domain: body. binder 는 변수 하나 또는 서로 다른 두 변수 (순서쌍)"""
    binder: Tuple[Var, ...]
    domain: Term
    body: "Formula"

    def __post_init__(self):
        if len(self.binder) not in (1, 2):
            raise SortError("RUQ 바인더는 변수 또는 순서쌍이어야 합니다")
        if len(self.binder) == 2 and self.binder[0].name == self.binder[1].name:
            raise SortError(f"순서쌍 바인더의 두 변수는 달라야 합니다: {self.binder[0].name}")
        names = {b.name for b in self.binder}
        if any(v.name in names for v in iter_vars(self.domain)):
            raise SortError(f"바인더 변수가 정의역에 나타납니다: {render(self.domain)}")

    @property
    def is_pair_binder(self) -> bool:
        return len(self.binder) == 2


@dataclass(frozen=True)
class Call:
    """파생 제약 또는 라이브러리 술어 호출"""
    name: str
    args: Tuple[Term, ...]


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Neg:
    inner: "Formula"


Formula = Union[Atom, Truth, And, Or, Ruq, Call, Implies, Neg]


def atom(kind: str, *args: Term) -> Atom:
    return Atom(kind, tuple(args))


def conj(*parts: Formula) -> Formula:
    """평탄화된 논리곱. true 제거, false 흡수"""
    flat: List[Formula] = []
    for p in parts:
        if isinstance(p, Truth):
            if not p.value:
                return FALSE
            continue
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    """평탄화된 논리합"""
    flat: List[Formula] = []
    for p in parts:
        if isinstance(p, Truth):
            if p.value:
                return TRUE
            continue
        if isinstance(p, Or):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


# ---- 순회 ----

def formula_terms(f: Formula) -> Iterator[Term]:
    if isinstance(f, (Atom, Call)):
        yield from f.args
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            yield from formula_terms(p)
    elif isinstance(f, Ruq):
        yield f.domain
        yield from formula_terms(f.body)
    elif isinstance(f, Implies):
        yield from formula_terms(f.left)
        yield from formula_terms(f.right)
    elif isinstance(f, Neg):
        yield from formula_terms(f.inner)


def free_vars(f: Formula, bound: frozenset = frozenset()) -> List[Var]:
    """자유 변수 (첫 등장 순서, 중복 없음). RUQ 바인더는 제외"""
    seen: Dict[str, Var] = {}
    _collect_free(f, bound, seen)
    return list(seen.values())


def _collect_free(f: Formula, bound: frozenset, seen: Dict[str, Var]) -> None:
    def add_term(t: Term) -> None:
        for v in iter_vars(t):
            if v.name not in bound and v.name not in seen:
                seen[v.name] = v

    if isinstance(f, (Atom, Call)):
        for a in f.args:
            add_term(a)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            _collect_free(p, bound, seen)
    elif isinstance(f, Ruq):
        add_term(f.domain)
        _collect_free(f.body, bound | {b.name for b in f.binder}, seen)
    elif isinstance(f, Implies):
        _collect_free(f.left, bound, seen)
        _collect_free(f.right, bound, seen)
    elif isinstance(f, Neg):
        _collect_free(f.inner, bound, seen)


def subst_formula(s: Union[Substitution, Mapping[str, Term]], f: Formula) -> Formula:
    """식 전체에 치환 적용. RUQ 바인더는 가려진다 (바인더 이름은 질의 내에서 유일하다고 가정)"""
    mapping = s.as_dict() if isinstance(s, Substitution) else dict(s)
    if not mapping:
        return f
    return _subst(mapping, f)


def _subst(m: Dict[str, Term], f: Formula) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.kind, tuple(apply_subst(m, a) for a in f.args))
    if isinstance(f, Call):
        return Call(f.name, tuple(apply_subst(m, a) for a in f.args))
    if isinstance(f, And):
        return And(tuple(_subst(m, p) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_subst(m, p) for p in f.parts))
    if isinstance(f, Ruq):
        names = {b.name for b in f.binder}
        inner = {k: v for k, v in m.items() if k not in names}
        body = _subst(inner, f.body) if inner else f.body
        return Ruq(f.binder, apply_subst(m, f.domain), body)
    if isinstance(f, Implies):
        return Implies(_subst(m, f.left), _subst(m, f.right))
    if isinstance(f, Neg):
        return Neg(_subst(m, f.inner))
    return f


def map_atoms(f: Formula, fn: Callable[[Atom], Formula]) -> Formula:
    if isinstance(f, Atom):
        return fn(f)
    if isinstance(f, And):
        return conj(*(map_atoms(p, fn) for p in f.parts))
    if isinstance(f, Or):
        return disj(*(map_atoms(p, fn) for p in f.parts))
    if isinstance(f, Ruq):
        return Ruq(f.binder, f.domain, map_atoms(f.body, fn))
    return f


def iter_atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            yield from iter_atoms(p)
    elif isinstance(f, Ruq):
        yield from iter_atoms(f.body)
    elif isinstance(f, Implies):
        yield from iter_atoms(f.left)
        yield from iter_atoms(f.right)
    elif isinstance(f, Neg):
        yield from iter_atoms(f.inner)


# ---- QF 본문 ----

def is_qf(f: Formula) -> bool:
    if isinstance(f, Truth):
        return True
    if isinstance(f, Atom):
        return f.kind in AtomKind.QF
    if isinstance(f, (And, Or)):
        return all(is_qf(p) for p in f.parts)
    return False


def ruq_body_ok(f: Formula) -> bool:
    """RUQ 본문: QF 이거나 중첩 RUQ"""
    if isinstance(f, Ruq):
        return ruq_body_ok(f.body)
    return is_qf(f)


Clause = Tuple[Atom, ...]


def to_clauses(f: Formula) -> Optional[List[Clause]]:
    """QF 식을 CNF 절 목록으로 변환. false 이면 None, true 이면 []"""
    if isinstance(f, Truth):
        return [] if f.value else None
    if isinstance(f, Atom):
        return [(f,)]
    if isinstance(f, And):
        out: List[Clause] = []
        for p in f.parts:
            sub = to_clauses(p)
            if sub is None:
                return None
            out.extend(sub)
        return out
    if isinstance(f, Or):
        acc: List[Clause] = [()]
        satisfied = False
        for p in f.parts:
            sub = to_clauses(p)
            if sub is None:
                continue
            if not sub:
                satisfied = True
                break
            acc = [a + b for a in acc for b in sub]
        if satisfied:
            return []
        if acc == [()]:
            return None
        return [_dedupe(c) for c in acc]
    raise SortError(f"QF 식이 아닙니다: {render_formula(f)}")


def _dedupe(clause: Clause) -> Clause:
    seen = []
    for lit in clause:
        if lit not in seen:
            seen.append(lit)
    return tuple(seen)


# ---- 출력 ----

_INFIX = {
    AtomKind.EQ: "=",
    AtomKind.NEQ: "neq",
    AtomKind.IN: "in",
    AtomKind.NIN: "nin",
    AtomKind.LT: "<",
}


def render_formula(f: Formula) -> str:
    if isinstance(f, Atom):
        if f.kind in _INFIX:
            return f"{render(f.args[0])} {_INFIX[f.kind]} {render(f.args[1])}"
        if f.kind == AtomKind.SUBSET:
            return f"subset({render(f.args[0])},{render(f.args[1])})"
        return f"{f.kind}({','.join(render(a) for a in f.args)})"
    if isinstance(f, Truth):
        return str(f)
    if isinstance(f, And):
        return " & ".join(_paren(p, Or) for p in f.parts)
    if isinstance(f, Or):
        return " or ".join(_paren(p, And) for p in f.parts)
    if isinstance(f, Ruq):
        if f.is_pair_binder:
            head = f"[{f.binder[0].name},{f.binder[1].name}] in {render(f.domain)}"
        else:
            head = f"{f.binder[0].name} in {render(f.domain)}"
        return f"foreach({head}, {render_formula(f.body)})"
    if isinstance(f, Call):
        return f"{f.name}({','.join(render(a) for a in f.args)})"
    if isinstance(f, Implies):
        return f"({render_formula(f.left)}) implies ({render_formula(f.right)})"
    if isinstance(f, Neg):
        return f"neg({render_formula(f.inner)})"
    return repr(f)


def _paren(f: Formula, kind: type) -> str:
    text = render_formula(f)
    if isinstance(f, Implies) or (kind is Or and isinstance(f, Or)):
        return f"({text})"
    return text
