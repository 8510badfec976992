# ----------------------------------------------------------------------------------------------------
# 작성목적 : 기저(ground) 치환 아래에서 논리식의 참/거짓 평가 (테스트 오라클)
# 작성일 : 2025-09-04

# 변경사항 내역 (날짜 | 변경목적 | 변경내용 | 작성자 순으로 기입)
# 2025-09-04 | 최초 구현 | 항 → 값 변환, 원자/RUQ 평가 | 구동빈
# 2025-09-12 | 파생 제약 의미 | 내장 파생 제약을 정의 의미대로 직접 평가 | 이주형
# ----------------------------------------------------------------------------------------------------

from dataclasses import dataclass
from typing import Any, Callable, Dict, FrozenSet, Mapping, Tuple, Union

from models.errors import NonGround, SortError, UnknownDerived
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
    Truth,
)
from models.terms import (
    EmptySet,
    IntLin,
    Interval,
    Pair,
    SetCons,
    Substitution,
    Term,
    UrTerm,
    Var,
    apply_subst,
    iter_vars,
    render,
)

# 구간 값을 만들 때의 상한 (테스트 오라클용)
MAX_INTERVAL_WIDTH = 100_000


@dataclass(frozen=True)
class UrValue:
    """ur 항의 값"""
    functor: str
    args: Tuple[Any, ...] = ()

    def __repr__(self) -> str:
        if not self.args:
            return self.functor
        return f"{self.functor}({','.join(map(repr, self.args))})"


Value = Union[int, Tuple[Any, Any], UrValue, FrozenSet[Any]]


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def to_value(t: Term) -> Value:
    """기저 항 → 파이썬 값 (정수, 튜플(순서쌍), UrValue, frozenset)"""
    if isinstance(t, Var):
        raise NonGround(f"바인딩되지 않은 변수: {t.name}")
    if isinstance(t, IntLin):
        if t.coeffs:
            raise NonGround(f"바인딩되지 않은 변수: {render(t)}")
        return t.const
    if isinstance(t, Pair):
        return (to_value(t.first), to_value(t.second))
    if isinstance(t, UrTerm):
        return UrValue(t.functor, tuple(to_value(a) for a in t.args))
    if isinstance(t, EmptySet):
        return frozenset()
    if isinstance(t, SetCons):
        rest = to_value(t.rest)
        if not isinstance(rest, frozenset):
            raise SortError(f"집합 확장의 나머지가 집합이 아닙니다: {render(t)}")
        return rest | {to_value(t.elem)}
    if isinstance(t, Interval):
        lo, hi = to_value(t.lo), to_value(t.hi)
        if not (_is_int(lo) and _is_int(hi)):
            raise SortError(f"구간 한계가 정수가 아닙니다: {render(t)}")
        if hi - lo > MAX_INTERVAL_WIDTH:
            raise SortError(f"평가하기에 너무 큰 구간: {render(t)}")
        return frozenset(range(lo, hi + 1))
    raise SortError(f"알 수 없는 항: {t!r}")


def eval_ground(f: Formula, sigma: Union[Substitution, Mapping[str, Term], None] = None) -> bool:
    """치환 σ 아래에서 f 의 참/거짓. 자유 변수가 남으면 NonGround"""
    mapping = sigma.as_dict() if isinstance(sigma, Substitution) else dict(sigma or {})
    return _Evaluator(mapping).formula(f, {})


class _Evaluator:
    def __init__(self, sigma: Dict[str, Term]):
        self.sigma = sigma

    def value(self, t: Term, local: Dict[str, Value]) -> Value:
        if local:
            for v in iter_vars(t):
                if v.name in local:
                    return self._value_with_locals(t, local)
        return to_value(apply_subst(self.sigma, t))

    def _value_with_locals(self, t: Term, local: Dict[str, Value]) -> Value:
        if isinstance(t, Var):
            if t.name in local:
                return local[t.name]
            return to_value(apply_subst(self.sigma, t))
        if isinstance(t, IntLin):
            total = t.const
            for name, c in t.coeffs:
                v = local[name] if name in local else self.value(Var(name), {})
                if not _is_int(v):
                    raise _NotInt()
                total += c * v
            return total
        if isinstance(t, Pair):
            return (self.value(t.first, local), self.value(t.second, local))
        if isinstance(t, UrTerm):
            return UrValue(t.functor, tuple(self.value(a, local) for a in t.args))
        if isinstance(t, SetCons):
            return self.value(t.rest, local) | {self.value(t.elem, local)}
        if isinstance(t, Interval):
            lo, hi = self.value(t.lo, local), self.value(t.hi, local)
            return frozenset(range(lo, hi + 1))
        return to_value(t)

    def set_value(self, t: Term, local: Dict[str, Value]) -> FrozenSet[Any]:
        v = self.value(t, local)
        if not isinstance(v, frozenset):
            raise SortError(f"집합이 와야 할 자리에 다른 값: {render(t)}")
        return v

    def formula(self, f: Formula, local: Dict[str, Value]) -> bool:
        if isinstance(f, Truth):
            return f.value
        if isinstance(f, And):
            return all(self.formula(p, local) for p in f.parts)
        if isinstance(f, Or):
            return any(self.formula(p, local) for p in f.parts)
        if isinstance(f, Implies):
            return (not self.formula(f.left, local)) or self.formula(f.right, local)
        if isinstance(f, Neg):
            return not self.formula(f.inner, local)
        if isinstance(f, Atom):
            try:
                return self.atom(f, local)
            except _NotInt:
                return False
        if isinstance(f, Ruq):
            return self.ruq(f, local)
        if isinstance(f, Call):
            try:
                return self.call(f, local)
            except _NotInt:
                return False
        raise SortError(f"평가할 수 없는 식: {f!r}")

    def atom(self, a: Atom, local: Dict[str, Value]) -> bool:
        k = a.kind
        if k == AtomKind.EQ:
            return _equal(self.value(a.args[0], local), self.value(a.args[1], local))
        if k == AtomKind.NEQ:
            return not _equal(self.value(a.args[0], local), self.value(a.args[1], local))
        if k == AtomKind.IN:
            return self.value(a.args[0], local) in self.set_value(a.args[1], local)
        if k == AtomKind.NIN:
            return self.value(a.args[0], local) not in self.set_value(a.args[1], local)
        if k == AtomKind.UN:
            E, F, G = (self.set_value(x, local) for x in a.args)
            return G == E | F
        if k == AtomKind.DISJ:
            E, F = (self.set_value(x, local) for x in a.args)
            return not (E & F)
        if k == AtomKind.SIZE:
            E = self.set_value(a.args[0], local)
            n = self.value(a.args[1], local)
            return _is_int(n) and len(E) == n
        if k == AtomKind.LT:
            i, j = self.value(a.args[0], local), self.value(a.args[1], local)
            return _is_int(i) and _is_int(j) and i < j
        if k == AtomKind.PAIR:
            return isinstance(self.value(a.args[0], local), tuple)
        if k == AtomKind.NPAIR:
            return not isinstance(self.value(a.args[0], local), tuple)
        if k == AtomKind.SUBSET:
            return self.set_value(a.args[0], local) <= self.set_value(a.args[1], local)
        raise SortError(f"알 수 없는 원자: {k}")

    def ruq(self, r: Ruq, local: Dict[str, Value]) -> bool:
        domain = self.set_value(r.domain, local)
        for element in _ordered(domain):
            inner = dict(local)
            if r.is_pair_binder:
                if not isinstance(element, tuple):
                    return False
                inner[r.binder[0].name] = element[0]
                inner[r.binder[1].name] = element[1]
            else:
                inner[r.binder[0].name] = element
            if not self.formula(r.body, inner):
                return False
        return True

    def call(self, c: Call, local: Dict[str, Value]) -> bool:
        name = c.name
        if name in ("dres", "dares"):
            name += "_int" if isinstance(c.args[0], Interval) else "_pt"
        if name == "sorted" and len(c.args) == 4:
            name = "sorted_range"
        sem = _SEMANTICS.get(name)
        if sem is None:
            raise UnknownDerived(f"평가 의미가 정의되지 않은 술어: {c.name}")
        if name in ("dres_int", "dares_int"):
            sel = c.args[0]
            if not isinstance(sel, Interval):
                raise SortError(f"{name} 의 첫 인자는 구간이어야 합니다")
            args = [(self.value(sel.lo, local), self.value(sel.hi, local))]
            args += [self.value(t, local) for t in c.args[1:]]
        else:
            args = [self.value(t, local) for t in c.args]
        return sem(*args)


class _NotInt(Exception):
    """정수 산술에 정수가 아닌 값이 들어옴 (해당 원자는 거짓)"""


def _equal(a: Value, b: Value) -> bool:
    if _is_int(a) != _is_int(b):
        return False
    return a == b


def _ordered(values):
    return sorted(values, key=repr)


# ---- 파생 제약 의미 ----

def _ints(*xs) -> bool:
    return all(_is_int(x) for x in xs)


def _all_pairs(s) -> bool:
    return all(isinstance(p, tuple) for p in s)


def _pfun(R) -> bool:
    if not _all_pairs(R):
        return False
    seen: Dict[Any, Any] = {}
    for x, y in R:
        if x in seen and not _equal(seen[x], y):
            return False
        seen[x] = y
    return True


def _ipfun(R) -> bool:
    if not _pfun(R):
        return False
    images = [y for _, y in R]
    return len(images) == len(set(images))


def _restrict(R, S, keep: Callable[[Any], bool]) -> bool:
    if not (_all_pairs(R) and _all_pairs(S)):
        return False
    return S == frozenset(p for p in R if keep(p[0]))


def _in_range(bounds) -> Callable[[Any], bool]:
    k, m = bounds
    return lambda x: _ints(x, k, m) and k <= x <= m


def _sorted(A) -> bool:
    if not _all_pairs(A):
        return False
    for i1, x1 in A:
        for i2, x2 in A:
            if _ints(i1, i2) and i2 < i1:
                continue
            if not (_ints(x1, x2) and x1 <= x2):
                return False
    return True


def _sorted_range(A, n, k, m) -> bool:
    if not (_ints(n, k, m) and 1 <= k <= m <= n):
        return True
    if not _all_pairs(A):
        return False
    return _sorted(frozenset(p for p in A if _ints(p[0]) and k <= p[0] <= m))


def _arr(A, m) -> bool:
    return (_pfun(A) and _is_int(m) and len(A) == m
            and all(_is_int(i) and 1 <= i <= m for i, _ in A))


def _upd(A, i, y, B) -> bool:
    for p in A:
        if isinstance(p, tuple) and _equal(p[0], i):
            if B == (A - {p}) | {(i, y)}:
                return True
    return False


def _put(H, k, v, T) -> bool:
    return _all_pairs(H) and T == frozenset(p for p in H if not _equal(p[0], k)) | {(k, v)}


def _remove(H, k, T) -> bool:
    return _all_pairs(H) and T == frozenset(p for p in H if not _equal(p[0], k))


_SEMANTICS: Dict[str, Callable[..., bool]] = {
    "leq": lambda i, j: _ints(i, j) and i <= j,
    "gt": lambda i, j: _ints(i, j) and i > j,
    "geq": lambda i, j: _ints(i, j) and i >= j,
    "inters": lambda E, F, G: G == E & F,
    "diff": lambda E, F, G: G == E - F,
    "subset": lambda E, F: E <= F,
    "rel": _all_pairs,
    "pfun": _pfun,
    "ipfun": _ipfun,
    "dres_pt": lambda z, R, S: _restrict(R, S, lambda x: _equal(x, z)),
    "dares_pt": lambda z, R, S: _restrict(R, S, lambda x: not _equal(x, z)),
    "dres_int": lambda b, R, S: _restrict(R, S, _in_range(b)),
    "dares_int": lambda b, R, S: _restrict(R, S, lambda x: not _in_range(b)(x)),
    "arr": _arr,
    "get": lambda A, i, y: (i, y) in A,
    "upd": _upd,
    "sorted": _sorted,
    "sorted_range": _sorted_range,
    "put": _put,
    "remove": _remove,
}


def has_semantics(name: str) -> bool:
    return name in _SEMANTICS or name in ("dres", "dares")
