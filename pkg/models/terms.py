# ----------------------------------------------------------------------------------------------------
# 작성목적 : 정렬(sort)이 있는 항 언어 정의 (집합, 선형 정수식, 순서쌍, ur 항)
# 작성일 : 2025-09-02

# 변경사항 내역 (날짜 | 변경목적 | 변경내용 | 작성자 순으로 기입)
# 2025-09-02 | 최초 구현 | 항 생성자, 정렬 검사, 치환, 선형식 정규화 | 구동빈
# 2025-09-09 | 출력 추가 | 항 출력 함수 render 추가 | 구동빈
# ----------------------------------------------------------------------------------------------------

from dataclasses import dataclass, field
from enum import Enum
from math import gcd
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Set, Tuple, Union

from models.errors import SortError


class Sort(str, Enum):
    """항의 정렬"""
    SET = "set"
    INT = "int"
    PAIR = "pair"
    UR = "ur"


@dataclass(frozen=True)
class Var:
    """변수. 동일성은 이름으로만 판단"""
    name: str
    sort: Sort = field(default=Sort.UR, compare=False)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class IntLin:
    """선형 정수식: sum(c * x) + const. coeffs는 변수명 순 정렬, 0 계수 없음"""
    coeffs: Tuple[Tuple[str, int], ...] = ()
    const: int = 0

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Pair:
    first: "Term"
    second: "Term"

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class UrTerm:
    functor: str
    args: Tuple["Term", ...] = ()

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class EmptySet:
    def __str__(self) -> str:
        return "{}"


@dataclass(frozen=True)
class SetCons:
    """{elem / rest}"""
    elem: "Term"
    rest: "Term"

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Interval:
    lo: "Term"
    hi: "Term"

    def __str__(self) -> str:
        return render(self)


Term = Union[Var, IntLin, Pair, UrTerm, EmptySet, SetCons, Interval]

EMPTY = EmptySet()
ZERO = IntLin((), 0)
ONE = IntLin((), 1)


# ---- 선형식 ----

def num(value: int) -> IntLin:
    """정수 상수"""
    return IntLin((), int(value))


def make_lin(coeffs: Mapping[str, int], const: int = 0) -> Term:
    """정규형 선형식 생성. 단일 변수 x 는 Var 로 돌려준다"""
    items = tuple(sorted((v, c) for v, c in coeffs.items() if c != 0))
    if len(items) == 1 and items[0][1] == 1 and const == 0:
        return Var(items[0][0], Sort.INT)
    return IntLin(items, const)


def as_lin(t: Term) -> Optional[Tuple[Dict[str, int], int]]:
    """정수 항이면 (계수, 상수), 아니면 None"""
    if isinstance(t, IntLin):
        return dict(t.coeffs), t.const
    if isinstance(t, Var) and t.sort in (Sort.INT, Sort.UR):
        return {t.name: 1}, 0
    return None


def lin_combine(a: Term, b: Term, sign: int = 1) -> Term:
    """a + sign*b"""
    la, lb = as_lin(a), as_lin(b)
    if la is None or lb is None:
        raise SortError("정수 항이 아닌 값에 대한 산술 연산", (a, b))
    coeffs = dict(la[0])
    for v, c in lb[0].items():
        coeffs[v] = coeffs.get(v, 0) + sign * c
    return make_lin(coeffs, la[1] + sign * lb[1])


def lin_scale(a: Term, k: int) -> Term:
    la = as_lin(a)
    if la is None:
        raise SortError("정수 항이 아닌 값에 대한 곱셈", a)
    return make_lin({v: c * k for v, c in la[0].items()}, la[1] * k)


def int_value(t: Term) -> Optional[int]:
    """정수 상수이면 그 값"""
    if isinstance(t, IntLin) and not t.coeffs:
        return t.const
    return None


def is_int_term(t: Term) -> bool:
    return isinstance(t, IntLin) or (isinstance(t, Var) and t.sort == Sort.INT)


# ---- 집합 ----

def make_set(elems: Iterable[Term], tail: Term = EMPTY) -> Term:
    """{e1,...,en / tail}"""
    result = tail
    for e in reversed(list(elems)):
        result = SetCons(e, result)
    return result


def set_elements(t: Term) -> Tuple[List[Term], Term]:
    """SetCons 체인을 (원소 목록, 꼬리) 로 분해"""
    elems: List[Term] = []
    while isinstance(t, SetCons):
        elems.append(t.elem)
        t = t.rest
    return elems, t


def is_set_term(t: Term) -> bool:
    return isinstance(t, (EmptySet, SetCons, Interval)) or (isinstance(t, Var) and t.sort == Sort.SET)


# ---- 정렬 ----

def sort_of(t: Term) -> Sort:
    """정렬 계산. 생성자 인자의 정렬이 틀리면 SortError"""
    if isinstance(t, Var):
        return t.sort
    if isinstance(t, IntLin):
        return Sort.INT
    if isinstance(t, Pair):
        if sort_of(t.first) != Sort.INT:
            raise SortError(f"순서쌍의 첫 성분은 정수여야 합니다: {render(t.first)}", t.first)
        if sort_of(t.second) == Sort.SET:
            raise SortError(f"순서쌍의 둘째 성분은 정수 또는 ur 항이어야 합니다: {render(t.second)}", t.second)
        return Sort.PAIR
    if isinstance(t, UrTerm):
        for a in t.args:
            if sort_of(a) == Sort.SET:
                raise SortError(f"ur 항의 인자에 집합이 올 수 없습니다: {render(a)}", a)
        return Sort.UR
    if isinstance(t, EmptySet):
        return Sort.SET
    if isinstance(t, SetCons):
        sort_of(t.elem)
        if sort_of(t.rest) != Sort.SET:
            raise SortError(f"집합 확장의 나머지는 집합이어야 합니다: {render(t.rest)}", t.rest)
        return Sort.SET
    if isinstance(t, Interval):
        for limit in (t.lo, t.hi):
            if sort_of(limit) != Sort.INT:
                raise SortError(f"구간의 한계는 정수여야 합니다: {render(limit)}", limit)
        return Sort.SET
    raise SortError(f"알 수 없는 항: {t!r}", t)


def same_kind(a: Sort, b: Sort) -> bool:
    """두 정렬의 값이 같아질 수 있는지 (ur 영역은 순서쌍을 포함)"""
    if a == b:
        return True
    if Sort.SET in (a, b):
        return False
    return Sort.UR in (a, b)


# ---- 변수 ----

def iter_vars(t: Term) -> Iterator[Var]:
    """등장 순서대로 변수 열거 (중복 포함)"""
    if isinstance(t, Var):
        yield t
    elif isinstance(t, IntLin):
        for v, _ in t.coeffs:
            yield Var(v, Sort.INT)
    elif isinstance(t, Pair):
        yield from iter_vars(t.first)
        yield from iter_vars(t.second)
    elif isinstance(t, UrTerm):
        for a in t.args:
            yield from iter_vars(a)
    elif isinstance(t, SetCons):
        yield from iter_vars(t.elem)
        yield from iter_vars(t.rest)
    elif isinstance(t, Interval):
        yield from iter_vars(t.lo)
        yield from iter_vars(t.hi)


def term_vars(t: Term) -> Set[str]:
    return {v.name for v in iter_vars(t)}


def occurs(v: Union[Var, str], t: Term) -> bool:
    name = v.name if isinstance(v, Var) else v
    return any(x.name == name for x in iter_vars(t))


def is_ground(t: Term) -> bool:
    return next(iter_vars(t), None) is None


# ---- 치환 ----

class Substitution:
    """멱등 치환. 바인딩된 변수는 어떤 우변에도 나타나지 않는다"""

    __slots__ = ("_map",)

    def __init__(self, bindings: Optional[Mapping[str, Term]] = None):
        self._map: Dict[str, Term] = dict(bindings or {})

    def __contains__(self, name: str) -> bool:
        return name in self._map

    def __len__(self) -> int:
        return len(self._map)

    def __iter__(self):
        return iter(self._map)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Substitution) and self._map == other._map

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}↦{render(v)}" for k, v in self._map.items())
        return f"{{{inner}}}"

    def get(self, name: str) -> Optional[Term]:
        return self._map.get(name)

    def items(self):
        return self._map.items()

    def as_dict(self) -> Dict[str, Term]:
        return dict(self._map)

    def extend(self, name: str, term: Term) -> "Substitution":
        """name ↦ term 추가. term 은 현재 치환이 이미 적용된 상태여야 한다"""
        single = {name: term}
        updated = {k: _apply(single, v) for k, v in self._map.items()}
        updated[name] = term
        return Substitution(updated)

    def restrict(self, names: Iterable[str]) -> "Substitution":
        keep = set(names)
        return Substitution({k: v for k, v in self._map.items() if k in keep})


def apply_subst(s: Union[Substitution, Mapping[str, Term]], t: Term) -> Term:
    """동시 치환 적용. 정수식은 다시 정규화"""
    mapping = s._map if isinstance(s, Substitution) else s
    if not mapping:
        return t
    return _apply(mapping, t)


def _apply(m: Mapping[str, Term], t: Term) -> Term:
    if isinstance(t, Var):
        return m.get(t.name, t)
    if isinstance(t, IntLin):
        if not any(v in m for v, _ in t.coeffs):
            return t
        coeffs: Dict[str, int] = {}
        const = t.const
        for v, c in t.coeffs:
            if v in m:
                lin = as_lin(m[v])
                if lin is None:
                    raise SortError(f"정수 변수 {v} 에 정수가 아닌 값 바인딩: {render(m[v])}", m[v])
                for w, d in lin[0].items():
                    coeffs[w] = coeffs.get(w, 0) + c * d
                const += c * lin[1]
            else:
                coeffs[v] = coeffs.get(v, 0) + c
        return make_lin(coeffs, const)
    if isinstance(t, Pair):
        return Pair(_apply(m, t.first), _apply(m, t.second))
    if isinstance(t, UrTerm):
        if not t.args:
            return t
        return UrTerm(t.functor, tuple(_apply(m, a) for a in t.args))
    if isinstance(t, SetCons):
        return SetCons(_apply(m, t.elem), _apply(m, t.rest))
    if isinstance(t, Interval):
        return Interval(_apply(m, t.lo), _apply(m, t.hi))
    return t


# ---- 출력 ----

def render(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, IntLin):
        return _render_lin(t)
    if isinstance(t, Pair):
        return f"[{render(t.first)},{render(t.second)}]"
    if isinstance(t, UrTerm):
        if not t.args:
            return t.functor
        return f"{t.functor}({','.join(render(a) for a in t.args)})"
    if isinstance(t, EmptySet):
        return "{}"
    if isinstance(t, SetCons):
        elems, tail = set_elements(t)
        body = ",".join(render(e) for e in elems)
        if isinstance(tail, EmptySet):
            return "{" + body + "}"
        return "{" + body + "/" + render(tail) + "}"
    if isinstance(t, Interval):
        return f"int({render(t.lo)},{render(t.hi)})"
    return repr(t)


def _render_lin(t: IntLin) -> str:
    parts: List[str] = []
    for v, c in t.coeffs:
        if c == 1:
            mono = v
        elif c == -1:
            mono = f"-{v}"
        else:
            mono = f"{c}*{v}"
        if parts and not mono.startswith("-"):
            parts.append("+" + mono)
        else:
            parts.append(mono)
    if t.const or not parts:
        if parts and t.const > 0:
            parts.append(f"+{t.const}")
        else:
            parts.append(str(t.const))
    return "".join(parts)


def lin_gcd(coeffs: Iterable[int]) -> int:
    g = 0
    for c in coeffs:
        g = gcd(g, abs(c))
    return g
