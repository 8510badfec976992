# ----------------------------------------------------------------------------------------------------
# 작성목적 : 논리식 부정 (원자/파생 제약별 부정형, RUQ 부정) 및 implies/neg 제거
# 작성일 : 2025-09-04

# 변경사항 내역 (날짜 | 변경목적 | 변경내용 | 작성자 순으로 기입)
# 2025-09-04 | 최초 구현 | negate, negate_qf, desugar 구현 | 구동빈
# 2025-09-12 | 파생 제약 부정 확장 | rel/pfun/ipfun/arr/get/sorted/dres 부정형 추가 | 이주형
# ----------------------------------------------------------------------------------------------------

import logging
from typing import Callable, Optional

from models.errors import NotNegatable, UnknownDerived
from models.formula import (
    FALSE,
    TRUE,
    And,
    Atom,
    AtomKind,
    Call,
    Formula,
    Implies,
    Neg,
    Or,
    Ruq,
    Truth,
    atom,
    conj,
    disj,
    subst_formula,
)
from models.terms import Interval, Pair, Sort, Term, is_int_term, lin_combine, num
from services.library import BUILTIN_ARITY, INT_COMPARISONS, LibraryRegistry, comparison_atom, expand_derived
from utils.fresh import FreshSupply

logger = logging.getLogger(__name__)


def _lt(a: Term, b: Term) -> Atom:
    return atom(AtomKind.LT, a, b)


def _le(a: Term, b: Term) -> Atom:
    return atom(AtomKind.LT, a, lin_combine(b, num(1)))


def _in(x: Term, s: Term) -> Atom:
    return atom(AtomKind.IN, x, s)


def _nin(x: Term, s: Term) -> Atom:
    return atom(AtomKind.NIN, x, s)


def negate_qf(q: Formula) -> Formula:
    """QF 식의 고전 부정 (리터럴까지 밀어넣기)"""
    if isinstance(q, Truth):
        return FALSE if q.value else TRUE
    if isinstance(q, And):
        return disj(*(negate_qf(p) for p in q.parts))
    if isinstance(q, Or):
        return conj(*(negate_qf(p) for p in q.parts))
    if isinstance(q, Atom):
        return _negate_literal(q)
    if isinstance(q, Call) and q.name in INT_COMPARISONS:
        return _negate_comparison(q)
    raise NotNegatable(f"QF 식이 아닌 본문은 부정할 수 없습니다: {q}")


def _negate_literal(a: Atom) -> Formula:
    k = a.kind
    if k == AtomKind.EQ:
        return atom(AtomKind.NEQ, *a.args)
    if k == AtomKind.NEQ:
        return atom(AtomKind.EQ, *a.args)
    if k == AtomKind.LT:
        i, j = a.args
        return disj(_lt(j, i), atom(AtomKind.EQ, i, j))
    if k == AtomKind.PAIR:
        return atom(AtomKind.NPAIR, *a.args)
    if k == AtomKind.NPAIR:
        return atom(AtomKind.PAIR, *a.args)
    if k == AtomKind.IN:
        return _nin(*a.args)
    if k == AtomKind.NIN:
        return _in(*a.args)
    raise NotNegatable(f"리터럴이 아닌 원자: {a}")


def _negate_comparison(c: Call) -> Formula:
    i, j = c.args
    if c.name == "leq":
        return _lt(j, i)
    if c.name == "gt":
        return disj(_lt(i, j), atom(AtomKind.EQ, i, j))
    return _lt(i, j)


def negate(f: Formula, supply: FreshSupply, registry: Optional[LibraryRegistry] = None) -> Formula:
    """¬f 와 동치인 식 (새 변수는 존재 한정)"""
    if isinstance(f, Truth):
        return FALSE if f.value else TRUE
    if isinstance(f, And):
        return disj(*(negate(p, supply, registry) for p in f.parts))
    if isinstance(f, Or):
        return conj(*(negate(p, supply, registry) for p in f.parts))
    if isinstance(f, Implies):
        return conj(desugar(f.left, supply, registry), negate(f.right, supply, registry))
    if isinstance(f, Neg):
        return desugar(f.inner, supply, registry)
    if isinstance(f, Atom):
        return _negate_atom(f, supply)
    if isinstance(f, Ruq):
        return _negate_ruq(f, supply, registry)
    if isinstance(f, Call):
        return _negate_call(f, supply, registry)
    raise NotNegatable(f"부정할 수 없는 식: {f!r}")


def _negate_atom(a: Atom, supply: FreshSupply) -> Formula:
    k, args = a.kind, a.args
    if k == AtomKind.EQ and is_int_term(args[0]) and is_int_term(args[1]):
        return disj(_lt(args[0], args[1]), _lt(args[1], args[0]))
    if k in (AtomKind.EQ, AtomKind.NEQ, AtomKind.LT, AtomKind.PAIR, AtomKind.NPAIR,
             AtomKind.IN, AtomKind.NIN):
        return _negate_literal(a)
    if k == AtomKind.UN:
        E, F, G = args
        n = supply.fresh(Sort.UR)
        return disj(
            conj(_in(n, E), _nin(n, G)),
            conj(_in(n, F), _nin(n, G)),
            conj(_in(n, G), _nin(n, E), _nin(n, F)),
        )
    if k == AtomKind.DISJ:
        E, F = args
        n = supply.fresh(Sort.UR)
        return conj(_in(n, E), _in(n, F))
    if k == AtomKind.SIZE:
        A, m = args
        n = supply.fresh(Sort.INT)
        return conj(atom(AtomKind.SIZE, A, n), atom(AtomKind.NEQ, n, m))
    if k == AtomKind.SUBSET:
        E, I = args
        n = supply.fresh(Sort.UR)
        return conj(_in(n, E), _nin(n, I))
    raise NotNegatable(f"부정형이 정의되지 않은 원자: {a}")


def _instantiate(r: Ruq, supply: FreshSupply):
    """RUQ 바인더 자리에 새 원소를 만들고 본문을 치환"""
    if r.is_pair_binder:
        x, y = r.binder
        i, v = supply.fresh(Sort.INT), supply.fresh(y.sort)
        element: Term = Pair(i, v)
        body = subst_formula({x.name: i, y.name: v}, r.body)
    else:
        x = r.binder[0]
        element = supply.fresh(x.sort)
        body = subst_formula({x.name: element}, r.body)
    return element, body


def _negate_ruq(r: Ruq, supply: FreshSupply, registry: Optional[LibraryRegistry]) -> Formula:
    element, body = _instantiate(Ruq(r.binder, r.domain, desugar_body(r.body, supply)), supply)
    if isinstance(body, Ruq):
        inner = _negate_ruq(body, supply, registry)
    else:
        inner = negate_qf(body)
    return conj(_in(element, r.domain), inner)


def _some_pair(supply: FreshSupply, second: Sort = Sort.UR):
    return supply.fresh(Sort.INT), supply.fresh(second)


def _negate_restriction(name: str, args, supply: FreshSupply) -> Formula:
    """dres/dares 부정: 비순서쌍 원소, S ⊄ R, 조건 위반 원소, 누락 원소"""
    sel, R, S = args
    if isinstance(sel, Interval):
        k, m = sel.lo, sel.hi
        inside: Callable[[Term], Formula] = lambda x: conj(_le(k, x), _le(x, m))
        outside: Callable[[Term], Formula] = lambda x: disj(_lt(x, k), _lt(m, x))
    else:
        inside = lambda x: atom(AtomKind.EQ, x, sel)
        outside = lambda x: atom(AtomKind.NEQ, x, sel)
    keep, drop = (inside, outside) if name.startswith("dres") else (outside, inside)
    n1, n2 = supply.fresh(Sort.UR), supply.fresh(Sort.UR)
    x1, y1 = _some_pair(supply)
    x2, y2 = _some_pair(supply)
    x3, y3 = _some_pair(supply)
    return disj(
        conj(_in(n1, R), atom(AtomKind.NPAIR, n1)),
        conj(_in(n2, S), atom(AtomKind.NPAIR, n2)),
        conj(_in(Pair(x1, y1), S), _nin(Pair(x1, y1), R)),
        conj(_in(Pair(x2, y2), S), drop(x2)),
        conj(_in(Pair(x3, y3), R), keep(x3), _nin(Pair(x3, y3), S)),
    )


def _not_pfun(R: Term, supply: FreshSupply) -> Formula:
    n = supply.fresh(Sort.UR)
    i = supply.fresh(Sort.INT)
    y1, y2 = supply.fresh(Sort.UR), supply.fresh(Sort.UR)
    return disj(
        conj(_in(n, R), atom(AtomKind.NPAIR, n)),
        conj(_in(Pair(i, y1), R), _in(Pair(i, y2), R), atom(AtomKind.NEQ, y1, y2)),
    )


def _negate_call(c: Call, supply: FreshSupply, registry: Optional[LibraryRegistry]) -> Formula:
    name, a = c.name, c.args
    if name in INT_COMPARISONS:
        return _negate_comparison(c)
    if name == "subset":
        n = supply.fresh(Sort.UR)
        return conj(_in(n, a[0]), _nin(n, a[1]))
    if name == "inters":
        E, F, G = a
        n1, n2 = supply.fresh(Sort.UR), supply.fresh(Sort.UR)
        return disj(
            conj(_in(n1, E), _in(n1, F), _nin(n1, G)),
            conj(_in(n2, G), disj(_nin(n2, E), _nin(n2, F))),
        )
    if name == "diff":
        E, F, G = a
        n1, n2 = supply.fresh(Sort.UR), supply.fresh(Sort.UR)
        return disj(
            conj(_in(n1, E), _nin(n1, F), _nin(n1, G)),
            conj(_in(n2, G), disj(_nin(n2, E), _in(n2, F))),
        )
    if name == "rel":
        n = supply.fresh(Sort.UR)
        return conj(_in(n, a[0]), atom(AtomKind.NPAIR, n))
    if name == "pfun":
        return _not_pfun(a[0], supply)
    if name == "ipfun":
        R = a[0]
        i1, i2 = supply.fresh(Sort.INT), supply.fresh(Sort.INT)
        y = supply.fresh(Sort.UR)
        return disj(
            _not_pfun(R, supply),
            conj(_in(Pair(i1, y), R), _in(Pair(i2, y), R), atom(AtomKind.NEQ, i1, i2)),
        )
    if name in ("dres", "dares"):
        variant = "_int" if isinstance(a[0], Interval) else "_pt"
        return _negate_restriction(name + variant, a, supply)
    if name in ("dres_pt", "dres_int", "dares_pt", "dares_int"):
        return _negate_restriction(name, a, supply)
    if name == "get":
        A, i, y = a
        return _nin(Pair(i, y), A)
    if name == "sorted" and len(a) == 1:
        A = a[0]
        n = supply.fresh(Sort.UR)
        i1, x1 = _some_pair(supply, Sort.INT)
        i2, x2 = _some_pair(supply, Sort.INT)
        return disj(
            conj(_in(n, A), atom(AtomKind.NPAIR, n)),
            conj(_in(Pair(i1, x1), A), _in(Pair(i2, x2), A), _le(i1, i2), _lt(x2, x1)),
        )
    if name == "arr":
        A, m = a
        expansion = expand_derived("arr", a, supply)
        parts = expansion.parts if isinstance(expansion, And) else (expansion,)
        return disj(*(negate(p, supply, registry) for p in parts))
    if name in BUILTIN_ARITY:
        raise NotNegatable(f"{name} 의 부정형은 정의되어 있지 않습니다")
    if registry is not None and registry.knows(name):
        if registry.local_vars(name):
            raise NotNegatable(f"{name} 은(는) 본문에 존재 변수가 있어 부정할 수 없습니다")
        return negate(registry.expand(name, a, supply), supply, registry)
    raise UnknownDerived(f"알 수 없는 술어: {name}/{len(a)}")


def desugar(f: Formula, supply: FreshSupply, registry: Optional[LibraryRegistry] = None) -> Formula:
    """implies / neg 제거. 최상위 implies 는 negate 로, RUQ 본문은 negate_qf 로"""
    if isinstance(f, Implies):
        return disj(negate(f.left, supply, registry), desugar(f.right, supply, registry))
    if isinstance(f, Neg):
        return negate(f.inner, supply, registry)
    if isinstance(f, And):
        return conj(*(desugar(p, supply, registry) for p in f.parts))
    if isinstance(f, Or):
        return disj(*(desugar(p, supply, registry) for p in f.parts))
    if isinstance(f, Ruq):
        return Ruq(f.binder, f.domain, desugar_body(f.body, supply))
    return f


def desugar_body(f: Formula, supply: FreshSupply) -> Formula:
    """RUQ 본문: 정수 비교는 바로 전개, implies 는 or(neg, ·)"""
    if isinstance(f, Ruq):
        return Ruq(f.binder, f.domain, desugar_body(f.body, supply))
    if isinstance(f, Implies):
        return disj(negate_qf(desugar_body(f.left, supply)), desugar_body(f.right, supply))
    if isinstance(f, Neg):
        return negate_qf(desugar_body(f.inner, supply))
    if isinstance(f, And):
        return conj(*(desugar_body(p, supply) for p in f.parts))
    if isinstance(f, Or):
        return disj(*(desugar_body(p, supply) for p in f.parts))
    if isinstance(f, Call) and f.name in INT_COMPARISONS:
        return comparison_atom(f)
    return f
