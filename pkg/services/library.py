# ----------------------------------------------------------------------------------------------------
# 작성목적 : 파생 제약 라이브러리 (관계, 함수, 배열, 해시테이블) 전개
# 작성일 : 2025-09-03

# 변경사항 내역 (날짜 | 변경목적 | 변경내용 | 작성자 순으로 기입)
# 2025-09-03 | 최초 구현 | 내장 파생 제약 전개 expand_derived 구현 | 구동빈
# 2025-09-10 | 사용자 정의 술어 | consult 절 등록/전개, 재귀 정의 거부 | 이주형
# 2025-09-18 | 해시테이블 연산 | put/remove 추가 | 구동빈
# ----------------------------------------------------------------------------------------------------

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from models.errors import ArityError, LibraryError, SortError, UnknownDerived
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
    disj,
    free_vars,
    subst_formula,
)
from models.terms import (
    Interval,
    Pair,
    SetCons,
    Sort,
    Term,
    Var,
    lin_combine,
    num,
)
from utils.fresh import FreshSupply

logger = logging.getLogger(__name__)

LIBRARY_DIR = Path(__file__).parent.parent / "libraries"

PRIMITIVES = {"un": 3, "disj": 2, "size": 2, "pair": 1, "npair": 1}

INT_COMPARISONS = ("leq", "gt", "geq")

# 내장 파생 제약과 인자 개수
BUILTIN_ARITY: Dict[str, Tuple[int, ...]] = {
    "leq": (2,), "gt": (2,), "geq": (2,),
    "inters": (3,), "diff": (3,), "subset": (2,),
    "rel": (1,), "pfun": (1,), "ipfun": (1,),
    "dres": (3,), "dares": (3,),
    "dres_pt": (3,), "dres_int": (3,), "dares_pt": (3,), "dares_int": (3,),
    "arr": (2,), "get": (3,), "upd": (4,),
    "sorted": (1, 4), "sorted_range": (4,),
    "put": (4,), "remove": (3,),
}


def _lt(a: Term, b: Term) -> Atom:
    return atom(AtomKind.LT, a, b)


def _le(a: Term, b: Term) -> Atom:
    """a ≤ b 를 정수 위에서 a < b+1 로 표현"""
    return atom(AtomKind.LT, a, lin_combine(b, num(1)))


def _eq(a: Term, b: Term) -> Atom:
    return atom(AtomKind.EQ, a, b)


def _neq(a: Term, b: Term) -> Atom:
    return atom(AtomKind.NEQ, a, b)


def _pair_binder(supply: FreshSupply, second: Sort = Sort.UR) -> Tuple[Var, Var]:
    return supply.fresh(Sort.INT), supply.fresh(second)


def _interval_limits(t: Term, name: str) -> Tuple[Term, Term]:
    if not isinstance(t, Interval):
        raise SortError(f"{name} 의 첫 인자는 구간이어야 합니다")
    return t.lo, t.hi


def _in_interval(x: Term, k: Term, m: Term) -> Formula:
    return conj(_le(k, x), _le(x, m))


def _outside_interval(x: Term, k: Term, m: Term) -> Formula:
    return disj(_lt(x, k), _lt(m, x))


def _restrict(R: Term, S: Term, supply: FreshSupply,
              inside: Callable[[Var], Formula], outside: Callable[[Var], Formula]) -> Formula:
    """un(S,N,R) ∧ ∀(x,y)∈S: inside(x) ∧ ∀(x,y)∈N: outside(x)"""
    n = supply.fresh(Sort.SET)
    x1, y1 = _pair_binder(supply)
    x2, y2 = _pair_binder(supply)
    return conj(
        atom(AtomKind.UN, S, n, R),
        Ruq((x1, y1), S, inside(x1)),
        Ruq((x2, y2), n, outside(x2)),
    )


def comparison_atom(c: Call) -> Atom:
    """leq/gt/geq 를 정수 위의 lt 원자 하나로"""
    i, j = c.args
    if c.name == "leq":
        return _le(i, j)
    if c.name == "gt":
        return _lt(j, i)
    return _le(j, i)


def expand_derived(name: str, args: Sequence[Term], supply: FreshSupply) -> Formula:
    """내장 파생 제약을 정의식으로 전개 (새 변수 사용)"""
    if name not in BUILTIN_ARITY:
        raise UnknownDerived(f"알 수 없는 파생 제약: {name}")
    if len(args) not in BUILTIN_ARITY[name]:
        raise ArityError(f"{name} 의 인자 개수가 맞지 않습니다: {len(args)}")
    a = list(args)

    if name == "leq":
        return disj(_lt(a[0], a[1]), _eq(a[0], a[1]))
    if name == "gt":
        return _lt(a[1], a[0])
    if name == "geq":
        return disj(_lt(a[1], a[0]), _eq(a[0], a[1]))

    if name == "inters":
        E, F, G = a
        n1, n2 = supply.fresh(Sort.SET), supply.fresh(Sort.SET)
        return conj(atom(AtomKind.UN, G, n1, E), atom(AtomKind.UN, G, n2, F), atom(AtomKind.DISJ, n1, n2))
    if name == "diff":
        E, F, G = a
        n1 = supply.fresh(Sort.SET)
        return conj(
            atom(AtomKind.UN, E, G, E),
            atom(AtomKind.UN, F, G, n1),
            atom(AtomKind.UN, E, n1, n1),
            atom(AtomKind.DISJ, F, G),
        )
    if name == "subset":
        return atom(AtomKind.UN, a[0], a[1], a[1])

    if name == "rel":
        x = supply.fresh(Sort.UR)
        return Ruq((x,), a[0], atom(AtomKind.PAIR, x))
    if name == "pfun":
        R = a[0]
        x1, y1 = _pair_binder(supply)
        x2, y2 = _pair_binder(supply)
        return Ruq((x1, y1), R, Ruq((x2, y2), R, disj(_neq(x1, x2), _eq(y1, y2))))
    if name == "ipfun":
        R = a[0]
        x1, y1 = _pair_binder(supply)
        x2, y2 = _pair_binder(supply)
        return conj(
            Call("pfun", (R,)),
            Ruq((x1, y1), R, Ruq((x2, y2), R, disj(_eq(x1, x2), _neq(y1, y2)))),
        )

    if name in ("dres", "dares"):
        variant = "_int" if isinstance(a[0], Interval) else "_pt"
        return expand_derived(name + variant, args, supply)
    if name == "dres_pt":
        z, R, S = a
        return _restrict(R, S, supply, lambda x: _eq(x, z), lambda x: _neq(x, z))
    if name == "dares_pt":
        z, R, S = a
        return _restrict(R, S, supply, lambda x: _neq(x, z), lambda x: _eq(x, z))
    if name == "dres_int":
        k, m = _interval_limits(a[0], name)
        return _restrict(a[1], a[2], supply,
                         lambda x: _in_interval(x, k, m), lambda x: _outside_interval(x, k, m))
    if name == "dares_int":
        k, m = _interval_limits(a[0], name)
        return _restrict(a[1], a[2], supply,
                         lambda x: _outside_interval(x, k, m), lambda x: _in_interval(x, k, m))

    if name == "arr":
        A, m = a
        i, y = _pair_binder(supply)
        return conj(
            Call("pfun", (A,)),
            atom(AtomKind.SIZE, A, m),
            Ruq((i, y), A, _in_interval(i, num(1), m)),
        )
    if name == "get":
        A, i, y = a
        n = supply.fresh(Sort.SET)
        p = Pair(i, y)
        return conj(_eq(A, SetCons(p, n)), atom(AtomKind.NIN, p, n))
    if name == "upd":
        A, i, y, B = a
        n = supply.fresh(Sort.SET)
        old = supply.fresh(Sort.UR)
        return conj(
            _eq(A, SetCons(Pair(i, old), n)),
            atom(AtomKind.NIN, Pair(i, old), n),
            _eq(B, SetCons(Pair(i, y), n)),
        )
    if name == "sorted":
        if len(a) == 4:
            return expand_derived("sorted_range", args, supply)
        A = a[0]
        i1, x1 = _pair_binder(supply, Sort.INT)
        i2, x2 = _pair_binder(supply, Sort.INT)
        return Ruq((i1, x1), A, Ruq((i2, x2), A, disj(_lt(i2, i1), _le(x1, x2))))
    if name == "sorted_range":
        A, n, k, m = a
        part = supply.fresh(Sort.SET)
        guard = conj(_le(num(1), k), _le(k, m), _le(m, n))
        return disj(
            conj(guard, Call("dres_int", (Interval(k, m), A, part)), Call("sorted", (part,))),
            _lt(k, num(1)),
            _lt(m, k),
            _lt(n, m),
        )
    if name == "put":
        H, k, v, T = a
        n = supply.fresh(Sort.SET)
        p = Pair(k, v)
        return conj(_eq(T, SetCons(p, n)), Call("dares_pt", (k, H, n)), atom(AtomKind.NIN, p, n))
    if name == "remove":
        H, k, T = a
        return Call("dares_pt", (k, H, T))
    raise UnknownDerived(f"알 수 없는 파생 제약: {name}")


# ---- 사용자 정의 술어 ----

@dataclass
class Definition:
    """pred(Args) :- Body. 형태의 라이브러리 절"""
    name: str
    params: Tuple[Var, ...]
    body: Formula
    origin: str = "<input>"


@dataclass
class LibraryRegistry:
    """consult / add_lib 로 적재된 정의 모음"""
    definitions: Dict[str, Definition] = field(default_factory=dict)
    loaded: List[str] = field(default_factory=list)

    def knows(self, name: str) -> bool:
        return name in self.definitions

    def arity(self, name: str) -> Optional[int]:
        d = self.definitions.get(name)
        return len(d.params) if d else None

    def define(self, d: Definition) -> None:
        """정의 등록. 내장 이름 재정의와 재귀는 거부"""
        if d.name in BUILTIN_ARITY or d.name in PRIMITIVES or d.name == "foreach":
            raise LibraryError(f"내장 제약 {d.name} 은(는) 재정의할 수 없습니다 ({d.origin})")
        names = [p.name for p in d.params]
        if len(set(names)) != len(names):
            raise LibraryError(f"{d.name} 의 머리 인자는 서로 다른 변수여야 합니다 ({d.origin})")
        existing = self.definitions.get(d.name)
        if existing is not None and existing != d:
            raise LibraryError(f"{d.name} 이(가) 이미 정의되어 있습니다 ({existing.origin})")
        self.definitions[d.name] = d
        if self._reaches(d.name, d.name, set()):
            del self.definitions[d.name]
            raise LibraryError(f"재귀 정의는 지원하지 않습니다: {d.name}")
        logger.debug(f"라이브러리 정의 등록: {d.name}/{len(d.params)}")

    def _reaches(self, target: str, name: str, seen: set) -> bool:
        d = self.definitions.get(name)
        if d is None:
            return False
        for callee in _called_names(d.body):
            if callee == target:
                return True
            if callee not in seen:
                seen.add(callee)
                if self._reaches(target, callee, seen):
                    return True
        return False

    def expand(self, name: str, args: Sequence[Term], supply: FreshSupply) -> Formula:
        d = self.definitions.get(name)
        if d is None:
            raise UnknownDerived(f"알 수 없는 술어: {name}")
        if len(args) != len(d.params):
            raise ArityError(f"{name} 의 인자 개수가 맞지 않습니다: {len(args)} (정의: {len(d.params)})")
        mapping: Dict[str, Term] = {p.name: t for p, t in zip(d.params, args)}
        for v in _all_vars(d.body):
            if v.name not in mapping:
                mapping[v.name] = supply.fresh(v.sort)
        return _rename_binders(subst_formula(mapping, d.body), mapping)

    def local_vars(self, name: str) -> List[Var]:
        """머리에 없는 본문 변수 (존재 한정)"""
        d = self.definitions[name]
        head = {p.name for p in d.params}
        return [v for v in _all_vars(d.body) if v.name not in head]


def _called_names(f: Formula) -> List[str]:
    out: List[str] = []
    if isinstance(f, Call):
        out.append(f.name)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            out.extend(_called_names(p))
    elif isinstance(f, Ruq):
        out.extend(_called_names(f.body))
    elif isinstance(f, Implies):
        out.extend(_called_names(f.left) + _called_names(f.right))
    elif isinstance(f, Neg):
        out.extend(_called_names(f.inner))
    return out


def _all_vars(f: Formula) -> List[Var]:
    """바인더를 포함한 모든 변수"""
    seen: Dict[str, Var] = {}
    for v in free_vars(f):
        seen.setdefault(v.name, v)
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Ruq):
            for b in g.binder:
                seen.setdefault(b.name, b)
            stack.append(g.body)
        elif isinstance(g, (And, Or)):
            stack.extend(g.parts)
        elif isinstance(g, Implies):
            stack.extend([g.left, g.right])
        elif isinstance(g, Neg):
            stack.append(g.inner)
    return list(seen.values())


def _rename_binders(f: Formula, mapping: Dict[str, Term]) -> Formula:
    """subst_formula 는 바인더를 가리므로 바인더 이름을 별도로 교체"""
    if isinstance(f, Ruq):
        binder = tuple(mapping.get(b.name, b) for b in f.binder)
        if not all(isinstance(b, Var) for b in binder):
            raise LibraryError("바인더 변수에 항이 바인딩되었습니다")
        names = {b.name: nb for b, nb in zip(f.binder, binder)}
        body = subst_formula(names, f.body)
        return Ruq(binder, f.domain, _rename_binders(body, mapping))
    if isinstance(f, And):
        return And(tuple(_rename_binders(p, mapping) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_rename_binders(p, mapping) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(_rename_binders(f.left, mapping), _rename_binders(f.right, mapping))
    if isinstance(f, Neg):
        return Neg(_rename_binders(f.inner, mapping))
    return f


def expand_call(call: Call, registry: Optional[LibraryRegistry], supply: FreshSupply) -> Formula:
    if call.name in BUILTIN_ARITY:
        return expand_derived(call.name, call.args, supply)
    if registry is not None and registry.knows(call.name):
        return registry.expand(call.name, call.args, supply)
    raise UnknownDerived(f"알 수 없는 술어: {call.name}/{len(call.args)}")


def expand_all(f: Formula, registry: Optional[LibraryRegistry], supply: FreshSupply) -> Formula:
    """Call 노드가 남지 않을 때까지 전개"""
    if isinstance(f, Call):
        if f.name in INT_COMPARISONS:
            return comparison_atom(f)
        return expand_all(expand_call(f, registry, supply), registry, supply)
    if isinstance(f, And):
        return conj(*(expand_all(p, registry, supply) for p in f.parts))
    if isinstance(f, Or):
        return disj(*(expand_all(p, registry, supply) for p in f.parts))
    if isinstance(f, Ruq):
        return Ruq(f.binder, f.domain, expand_all(f.body, registry, supply))
    return f


def bundled_library_path(name: str) -> Path:
    path = LIBRARY_DIR / name
    if not path.exists():
        raise LibraryError(f"번들 라이브러리를 찾을 수 없습니다: {name}")
    return path
