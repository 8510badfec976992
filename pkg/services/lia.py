# ----------------------------------------------------------------------------------------------------
# 작성목적 : 선형 정수 산술(LIA) 결정 절차와 집합 기수(size/un/disj) 인코딩
# 작성일 : 2025-09-06

# 변경사항 내역 (날짜 | 변경목적 | 변경내용 | 작성자 순으로 기입)
# 2025-09-06 | 최초 구현 | 분수 심플렉스 + 분기한정, 부등식(≠) 지연 분할 | 구동빈
# 2025-09-08 | 벤 영역 인코딩 | 연결 요소별 영역 변수, 최소해 모드 | 이주형
# 2025-09-16 | 증분 검사 | 구간 전파 + 전부 다름(Hall) 검사 추가 | 구동빈
# 2025-09-24 | 분기 가지치기 | LP 완화 실행 가능성 검사 추가, 상수 거짓 size 등식을 불능 쌍으로 표시 | 구동빈
# ----------------------------------------------------------------------------------------------------

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from models.errors import BudgetExceeded, SolverError
from models.formula import And, Atom, AtomKind, Formula, Or, atom, conj, disj, render_formula
from models.terms import (
    Term,
    Var,
    as_lin,
    lin_gcd,
    make_lin,
    num,
)

logger = logging.getLogger(__name__)

LE, EQ, NE = "<=", "=", "!="

DEFAULT_NODE_LIMIT = 20000


@dataclass(frozen=True)
class LinCon:
    """sum(c * x) op bound, op ∈ {<=, =, !=}. 정규형(gcd 나눔, =/!= 는 첫 계수 양수)"""
    coeffs: Tuple[Tuple[str, int], ...]
    op: str
    bound: int

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(v for v, _ in self.coeffs)

    def value(self, assignment: Dict[str, int]) -> int:
        return sum(c * assignment.get(v, 0) for v, c in self.coeffs)

    def holds(self, assignment: Dict[str, int]) -> bool:
        lhs = self.value(assignment)
        if self.op == LE:
            return lhs <= self.bound
        if self.op == EQ:
            return lhs == self.bound
        return lhs != self.bound

    def __str__(self) -> str:
        return f"{render_lincon(self)}"


def normalize(coeffs: Dict[str, int], op: str, bound: int) -> Union[LinCon, bool]:
    """정규화. 변수가 없으면 참/거짓 값을 돌려준다"""
    items = tuple(sorted((v, c) for v, c in coeffs.items() if c != 0))
    if not items:
        if op == LE:
            return 0 <= bound
        if op == EQ:
            return bound == 0
        return bound != 0
    g = lin_gcd(c for _, c in items)
    if op == LE:
        return LinCon(tuple((v, c // g) for v, c in items), LE, floor(Fraction(bound, g)))
    if bound % g != 0:
        return op == NE
    items = tuple((v, c // g) for v, c in items)
    bound //= g
    if items[0][1] < 0:
        items = tuple((v, -c) for v, c in items)
        bound = -bound
    return LinCon(items, op, bound)


def lincon_from_atom(a: Atom) -> Union[LinCon, bool, None]:
    """lt/eq/neq 정수 원자 → LinCon. 정수 원자가 아니면 None"""
    if a.kind not in (AtomKind.LT, AtomKind.EQ, AtomKind.NEQ):
        return None
    la, lb = as_lin(a.args[0]), as_lin(a.args[1])
    if la is None or lb is None:
        return None
    coeffs = dict(la[0])
    for v, c in lb[0].items():
        coeffs[v] = coeffs.get(v, 0) - c
    rhs = lb[1] - la[1]
    if a.kind == AtomKind.LT:
        return normalize(coeffs, LE, rhs - 1)
    return normalize(coeffs, EQ if a.kind == AtomKind.EQ else NE, rhs)


def lincon_to_atom(c: LinCon) -> Atom:
    lhs = make_lin(dict(c.coeffs))
    if c.op == LE:
        return atom(AtomKind.LT, lhs, num(c.bound + 1))
    return atom(AtomKind.EQ if c.op == EQ else AtomKind.NEQ, lhs, num(c.bound))


def render_lincon(c: LinCon) -> str:
    return render_formula(lincon_to_atom(c))


def substitute(c: LinCon, name: str, coeffs: Dict[str, int], const: int) -> Union[LinCon, bool]:
    """c 안의 name 을 sum(coeffs) + const 로 대체"""
    k = dict(c.coeffs).get(name)
    if k is None:
        return c
    out = {v: d for v, d in c.coeffs if v != name}
    for v, d in coeffs.items():
        out[v] = out.get(v, 0) + k * d
    return normalize(out, c.op, c.bound - k * const)


def assign(c: LinCon, values: Dict[str, int]) -> Union[LinCon, bool]:
    out: Dict[str, int] = {}
    bound = c.bound
    for v, d in c.coeffs:
        if v in values:
            bound -= d * values[v]
        else:
            out[v] = d
    return normalize(out, c.op, bound)


# ---- 증분 검사: 구간 전파 + Hall 검사 ----

Bounds = Dict[str, Tuple[Optional[int], Optional[int]]]


def propagate_bounds(constraints: Sequence[LinCon], rounds: int = 12) -> Optional[Bounds]:
    """구간 전파. 모순이 발견되면 None"""
    bounds: Dict[str, List[Optional[int]]] = {}
    for c in constraints:
        for v in c.names:
            bounds.setdefault(v, [None, None])
    rows: List[Tuple[Tuple[Tuple[str, int], ...], int]] = []
    singles: List[Tuple[str, int, int]] = []
    for c in constraints:
        if c.op == LE:
            rows.append((c.coeffs, c.bound))
        elif c.op == EQ:
            rows.append((c.coeffs, c.bound))
            rows.append((tuple((v, -d) for v, d in c.coeffs), -c.bound))
        elif len(c.coeffs) == 1:
            singles.append((c.coeffs[0][0], c.coeffs[0][1], c.bound))

    for _ in range(rounds):
        changed = False
        for coeffs, b in rows:
            mins: List[Optional[int]] = []
            for v, d in coeffs:
                lo, hi = bounds[v]
                edge = lo if d > 0 else hi
                mins.append(None if edge is None else d * edge)
            unknown = sum(1 for m in mins if m is None)
            if unknown > 1:
                continue
            known = sum(m for m in mins if m is not None)
            for (v, d), m in zip(coeffs, mins):
                if m is None:
                    rest = known
                elif unknown == 0:
                    rest = known - m
                else:
                    continue
                room = b - rest
                lo, hi = bounds[v]
                if d > 0:
                    new_hi = floor(Fraction(room, d))
                    if hi is None or new_hi < hi:
                        bounds[v][1] = new_hi
                        changed = True
                else:
                    new_lo = ceil(Fraction(room, d))
                    if lo is None or new_lo > lo:
                        bounds[v][0] = new_lo
                        changed = True
                lo, hi = bounds[v]
                if lo is not None and hi is not None and lo > hi:
                    return None
        for v, d, b in singles:
            if b % d:
                continue
            forbidden = b // d
            lo, hi = bounds[v]
            if lo is not None and lo == forbidden:
                bounds[v][0] = lo + 1
                changed = True
            if hi is not None and hi == forbidden:
                bounds[v][1] = hi - 1
                changed = True
            lo, hi = bounds[v]
            if lo is not None and hi is not None and lo > hi:
                return None
        if not changed:
            break
    result = {v: (lo, hi) for v, (lo, hi) in bounds.items()}
    if not _hall_check(constraints, result):
        return None
    return result


def _distinct_pairs(constraints: Sequence[LinCon]) -> Dict[str, Set[str]]:
    graph: Dict[str, Set[str]] = {}
    for c in constraints:
        if c.op == NE and len(c.coeffs) == 2 and c.bound == 0:
            (x, a), (y, b) = c.coeffs
            if a == 1 and b == -1:
                graph.setdefault(x, set()).add(y)
                graph.setdefault(y, set()).add(x)
    return graph


def _cliques(graph: Dict[str, Set[str]], limit: int = 200) -> List[Set[str]]:
    """극대 클리크 (Bron–Kerbosch, 피벗)"""
    out: List[Set[str]] = []

    def expand(r: Set[str], p: Set[str], x: Set[str]) -> None:
        if len(out) >= limit:
            return
        if not p and not x:
            if len(r) > 2:
                out.append(r)
            return
        pivot = max(p | x, key=lambda u: len(graph[u] & p))
        for v in sorted(p - graph[pivot]):
            expand(r | {v}, p & graph[v], x & graph[v])
            p = p - {v}
            x = x | {v}

    expand(set(), set(graph), set())
    return out


def _hall_check(constraints: Sequence[LinCon], bounds: Bounds) -> bool:
    """전부 다른 변수 묶음이 값 구간보다 많으면 모순"""
    graph = _distinct_pairs(constraints)
    if not graph:
        return True
    for clique in _cliques(graph):
        doms = [bounds.get(v, (None, None)) for v in clique]
        doms = [d for d in doms if d[0] is not None and d[1] is not None]
        if len(doms) < 3:
            continue
        lows = sorted({d[0] for d in doms})
        highs = sorted({d[1] for d in doms})
        for a in lows:
            for b in highs:
                if b < a:
                    continue
                inside = sum(1 for lo, hi in doms if a <= lo and hi <= b)
                if inside > b - a + 1:
                    return False
    return True


# ---- 유리수 심플렉스 ----

class _Tableau:
    """min c·y, A y (<=,>=,=) b, y >= 0. 2단계 심플렉스, Bland 규칙"""

    def __init__(self, rows: List[List[Fraction]], senses: List[str], rhs: List[Fraction], n: int):
        self.n = n
        m = len(rows)
        norm_rows, norm_senses, norm_rhs = [], [], []
        for r, s, b in zip(rows, senses, rhs):
            if b < 0:
                r = [-x for x in r]
                b = -b
                s = {"<=": ">=", ">=": "<=", "=": "="}[s]
            norm_rows.append(r)
            norm_senses.append(s)
            norm_rhs.append(b)
        n_slack = sum(1 for s in norm_senses if s != "=")
        n_art = sum(1 for s in norm_senses if s != "<=")
        self.width = n + n_slack + n_art
        self.art_start = n + n_slack
        self.table: List[List[Fraction]] = []
        self.basis: List[int] = []
        slack, art = n, self.art_start
        for r, s, b in zip(norm_rows, norm_senses, norm_rhs):
            row = list(r) + [Fraction(0)] * (self.width - n) + [b]
            if s == "<=":
                row[slack] = Fraction(1)
                self.basis.append(slack)
                slack += 1
            else:
                if s == ">=":
                    row[slack] = Fraction(-1)
                    slack += 1
                row[art] = Fraction(1)
                self.basis.append(art)
                art += 1
            self.table.append(row)
        self.m = m

    def _objective_row(self, costs: List[Fraction]) -> List[Fraction]:
        obj = list(costs) + [Fraction(0)]
        for i, bcol in enumerate(self.basis):
            cb = costs[bcol]
            if cb:
                row = self.table[i]
                obj = [o - cb * x for o, x in zip(obj, row)]
        return obj

    def _pivot(self, r: int, c: int, obj: List[Fraction]) -> List[Fraction]:
        prow = self.table[r]
        pv = prow[c]
        if pv != 1:
            prow = [x / pv for x in prow]
            self.table[r] = prow
        nz = [j for j, x in enumerate(prow) if x]
        for i, row in enumerate(self.table):
            if i != r and row[c]:
                f = row[c]
                for j in nz:
                    row[j] -= f * prow[j]
        if obj[c]:
            f = obj[c]
            obj = list(obj)
            for j in nz:
                obj[j] -= f * prow[j]
        self.basis[r] = c
        return obj

    def _run(self, obj: List[Fraction], allowed: int) -> Tuple[str, List[Fraction]]:
        while True:
            enter = next((j for j in range(allowed) if obj[j] < 0), None)
            if enter is None:
                return "optimal", obj
            best, leave = None, None
            for i, row in enumerate(self.table):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[leave]):
                        best, leave = ratio, i
            if leave is None:
                return "unbounded", obj
            obj = self._pivot(leave, enter, obj)

    def solve(self, costs: Sequence[Fraction]) -> Tuple[str, Optional[List[Fraction]], Optional[Fraction]]:
        phase1 = [Fraction(0)] * self.width
        for j in range(self.art_start, self.width):
            phase1[j] = Fraction(1)
        obj = self._objective_row(phase1)
        status, obj = self._run(obj, self.width)
        if -obj[-1] != 0:
            return "infeasible", None, None
        # 기저에 남은 인공 변수를 몰아낸다 (값은 0)
        for i in range(len(self.table)):
            if self.basis[i] >= self.art_start:
                row = self.table[i]
                col = next((j for j in range(self.art_start) if row[j] != 0), None)
                if col is not None:
                    obj = self._pivot(i, col, obj)
        keep = [i for i in range(len(self.table)) if self.basis[i] < self.art_start]
        self.table = [self.table[i] for i in keep]
        self.basis = [self.basis[i] for i in keep]
        full = list(costs) + [Fraction(0)] * (self.width - self.n)
        obj = self._objective_row(full)
        status, obj = self._run(obj, self.art_start)
        if status == "unbounded":
            return "unbounded", None, None
        values = [Fraction(0)] * self.n
        for i, bcol in enumerate(self.basis):
            if bcol < self.n:
                values[bcol] = self.table[i][-1]
        return "optimal", values, -obj[-1]


def _solve_relaxation(names: List[str], constraints: Sequence[LinCon],
                      objective: Optional[Dict[str, int]]):
    """정수 조건을 뺀 LP. 자유 변수는 x = x⁺ - x⁻ 로 나눈다"""
    index = {v: i for i, v in enumerate(names)}
    n = 2 * len(names)
    rows, senses, rhs = [], [], []
    for c in constraints:
        row = [Fraction(0)] * n
        for v, d in c.coeffs:
            i = index[v]
            row[2 * i] = Fraction(d)
            row[2 * i + 1] = Fraction(-d)
        rows.append(row)
        senses.append("<=" if c.op == LE else "=")
        rhs.append(Fraction(c.bound))
    costs = [Fraction(0)] * n
    for v, d in (objective or {}).items():
        i = index[v]
        costs[2 * i] = Fraction(d)
        costs[2 * i + 1] = Fraction(-d)
    status, values, value = _Tableau(rows, senses, rhs, n).solve(costs)
    if status != "optimal":
        return status, None, None
    point = {v: values[2 * i] - values[2 * i + 1] for i, v in enumerate(names)}
    return status, point, value


# ---- 정수 문제 ----

class LiaStatus:
    SAT = "sat"
    UNSAT = "unsat"
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"


@dataclass
class LiaProblem:
    """선형 정수 제약과 선택적 최소화 목적식"""
    constraints: List[LinCon] = field(default_factory=list)
    objective: Optional[Dict[str, int]] = None

    @property
    def int_vars(self) -> List[str]:
        seen: Dict[str, None] = {}
        for c in self.constraints:
            for v in c.names:
                seen.setdefault(v)
        for v in (self.objective or {}):
            seen.setdefault(v)
        return sorted(seen)


@dataclass
class LiaResult:
    status: str
    assignment: Dict[str, int] = field(default_factory=dict)
    value: Optional[int] = None

    @property
    def feasible(self) -> bool:
        return self.status in (LiaStatus.SAT, LiaStatus.OPTIMAL)


def _branch_and_bound(p: LiaProblem, node_limit: int) -> LiaResult:
    names = p.int_vars
    base = [c for c in p.constraints if c.op != NE]
    diseqs = [c for c in p.constraints if c.op == NE]
    if not names:
        return LiaResult(LiaStatus.SAT if not p.objective else LiaStatus.OPTIMAL, {}, 0)
    stack: List[List[LinCon]] = [[]]
    best: Optional[Dict[str, int]] = None
    best_value: Optional[int] = None
    nodes = 0
    while stack:
        extra = stack.pop()
        nodes += 1
        if nodes > node_limit:
            raise BudgetExceeded(f"LIA 분기한정 노드 한도 초과 ({node_limit})")
        status, point, value = _solve_relaxation(names, base + extra, p.objective)
        if status == "infeasible":
            continue
        if status == "unbounded":
            return LiaResult(LiaStatus.UNBOUNDED)
        if best_value is not None and ceil(value) >= best_value:
            continue
        fractional = [(abs(x - floor(x) - Fraction(1, 2)), i, v)
                      for i, v in enumerate(names) for x in [point[v]] if x.denominator != 1]
        if fractional:
            _, _, v = min(fractional)
            x = point[v]
            up = normalize({v: -1}, LE, -ceil(x))
            down = normalize({v: 1}, LE, floor(x))
            stack.append(extra + [up])
            stack.append(extra + [down])
            continue
        solution = {v: int(point[v]) for v in names}
        broken = next((c for c in diseqs if not c.holds(solution)), None)
        if broken is not None:
            coeffs = dict(broken.coeffs)
            above = normalize({v: -d for v, d in coeffs.items()}, LE, -broken.bound - 1)
            below = normalize(coeffs, LE, broken.bound - 1)
            stack.append(extra + [above])
            stack.append(extra + [below])
            continue
        if p.objective is None:
            return LiaResult(LiaStatus.SAT, solution)
        obj_value = sum(d * solution[v] for v, d in p.objective.items())
        if best_value is None or obj_value < best_value:
            best, best_value = solution, obj_value
    if best is None:
        return LiaResult(LiaStatus.UNSAT)
    return LiaResult(LiaStatus.OPTIMAL, best, best_value)


def lia_decide(p: LiaProblem, node_limit: int = DEFAULT_NODE_LIMIT) -> LiaResult:
    """정수 해 존재 여부 (있으면 증인 포함)"""
    if p.objective:
        p = LiaProblem(p.constraints, None)
    if any(c is False for c in p.constraints):
        return LiaResult(LiaStatus.UNSAT)
    if propagate_bounds(p.constraints) is None:
        return LiaResult(LiaStatus.UNSAT)
    result = _branch_and_bound(p, node_limit)
    logger.debug(f"lia_decide: 제약 {len(p.constraints)}개 → {result.status}")
    return result


def lia_minimize(p: LiaProblem, node_limit: int = DEFAULT_NODE_LIMIT) -> LiaResult:
    """목적식을 최소화하는 정수 해"""
    if not p.objective:
        raise SolverError("lia_minimize 에는 목적식이 필요합니다")
    if propagate_bounds(p.constraints) is None:
        return LiaResult(LiaStatus.UNSAT)
    result = _branch_and_bound(p, node_limit)
    logger.debug(f"lia_minimize: 제약 {len(p.constraints)}개 → {result.status} (값 {result.value})")
    return result


def relaxation_feasible(constraints: Sequence[LinCon]) -> bool:
    """≠ 와 정수 조건을 뺀 LP 완화의 실행 가능 여부. False 이면 정수 해도 없다"""
    hard = [c for c in constraints if c.op != NE]
    if not hard:
        return True
    names = sorted({v for c in hard for v in c.names})
    status, _, _ = _solve_relaxation(names, hard, None)
    return status != "infeasible"


# ---- 집합 기수 인코딩 ----

@dataclass
class VennEncoding:
    """연결 요소별 벤 영역 변수. 영역 이름은 사용자 변수와 겹치지 않는 형태"""
    groups: List[List[str]] = field(default_factory=list)
    regions: Dict[str, List[Tuple[str, int]]] = field(default_factory=dict)
    pattern_map: Dict[str, List[str]] = field(default_factory=dict)

    def region_count(self, group_index: int) -> int:
        return (1 << len(self.groups[group_index])) - 1


def _set_name(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    raise SolverError(f"기수 인코딩에는 집합 변수만 올 수 있습니다: {t}")


def _groups(set_atoms: Sequence[Atom]) -> List[List[str]]:
    parent: Dict[str, str] = {}

    def find(x: str) -> str:
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    order: List[str] = []
    for a in set_atoms:
        names = [_set_name(t) for t in (a.args if a.kind != AtomKind.SIZE else a.args[:1])]
        for n in names:
            if n not in parent:
                order.append(n)
            find(n)
        for n in names[1:]:
            parent[find(n)] = find(names[0])
    buckets: Dict[str, List[str]] = {}
    for n in order:
        buckets.setdefault(find(n), []).append(n)
    return [sorted(b) for b in buckets.values()]


def encode(set_atoms: Sequence[Atom], constraints: Sequence[LinCon] = ()) -> Tuple[LiaProblem, VennEncoding]:
    """un/disj/size 원자와 LIA 제약 → LIA 문제 + 벤 인코딩"""
    enc = VennEncoding(groups=_groups(set_atoms))
    out: List[LinCon] = list(constraints)
    position: Dict[str, Tuple[int, int]] = {}
    for gi, group in enumerate(enc.groups):
        for bit, name in enumerate(group):
            position[name] = (gi, bit)
            enc.pattern_map[name] = []
        for mask in range(1, 1 << len(group)):
            rname = f"r#{gi}.{mask}"
            enc.regions.setdefault(str(gi), []).append((rname, mask))
            for bit, name in enumerate(group):
                if mask >> bit & 1:
                    enc.pattern_map[name].append(rname)
            out.append(LinCon(((rname, -1),), LE, 0))

    def members(name: str, mask: int) -> bool:
        return bool(mask >> position[name][1] & 1)

    for a in set_atoms:
        if a.kind == AtomKind.UN:
            e, f, g = (_set_name(t) for t in a.args)
            gi = position[e][0]
            for rname, mask in enc.regions[str(gi)]:
                if members(g, mask) != (members(e, mask) or members(f, mask)):
                    out.append(LinCon(((rname, 1),), EQ, 0))
        elif a.kind == AtomKind.DISJ:
            e, f = (_set_name(t) for t in a.args)
            gi = position[e][0]
            for rname, mask in enc.regions[str(gi)]:
                if members(e, mask) and members(f, mask):
                    out.append(LinCon(((rname, 1),), EQ, 0))
        elif a.kind == AtomKind.SIZE:
            e = _set_name(a.args[0])
            lin = as_lin(a.args[1])
            if lin is None:
                raise SolverError(f"size 의 둘째 인자가 정수가 아닙니다: {a}")
            coeffs = {r: 1 for r in enc.pattern_map[e]}
            for v, d in lin[0].items():
                coeffs[v] = coeffs.get(v, 0) - d
            c = normalize(coeffs, EQ, lin[1])
            if c is False:
                # 영역 변수 r ≥ 0 과 r ≤ -1 을 함께 두어 불능으로 표시
                out.append(LinCon(((enc.pattern_map[e][0], 1),), LE, -1))
            elif c is not True:
                out.append(c)
    # 중복 제거 (순서 유지)
    unique = list(dict.fromkeys(c for c in out if isinstance(c, LinCon)))
    return LiaProblem(unique), enc


def size_objective(set_atoms: Sequence[Atom], enc: VennEncoding) -> Dict[str, int]:
    """size 원자 기수의 합 (영역 변수로 표현)"""
    objective: Dict[str, int] = {}
    for a in set_atoms:
        if a.kind == AtomKind.SIZE:
            for r in enc.pattern_map[_set_name(a.args[0])]:
                objective[r] = objective.get(r, 0) + 1
    return objective


@dataclass
class SizeResult:
    """solve_size 결과. sat=False 이면 gamma1 이 불만족"""
    sat: bool
    assignment: Dict[str, int] = field(default_factory=dict)
    encoding: Optional[VennEncoding] = None
    value: Optional[int] = None

    def set_cardinality(self, name: str) -> int:
        if self.encoding is None or name not in self.encoding.pattern_map:
            return 0
        return sum(self.assignment.get(r, 0) for r in self.encoding.pattern_map[name])

    def region_model(self) -> Dict[str, List[Tuple[str, int]]]:
        """집합 변수 → (영역 이름, 원소 수) 목록"""
        out: Dict[str, List[Tuple[str, int]]] = {}
        if self.encoding is None:
            return out
        for name, regions in self.encoding.pattern_map.items():
            out[name] = [(r, self.assignment.get(r, 0)) for r in regions if self.assignment.get(r, 0) > 0]
        return out


def solve_size(set_atoms: Sequence[Atom], constraints: Sequence[LinCon], minimize: bool = False,
               node_limit: int = DEFAULT_NODE_LIMIT) -> SizeResult:
    """gamma1 의 결정 (minimize=True 이면 size 기수 합을 최소화)"""
    problem, enc = encode(set_atoms, constraints)
    if minimize:
        problem.objective = size_objective(set_atoms, enc)
    if problem.objective:
        result = lia_minimize(problem, node_limit)
    else:
        result = lia_decide(problem, node_limit)
    if not result.feasible:
        logger.debug(f"solve_size: 불만족 (집합 원자 {len(set_atoms)}개, 제약 {len(constraints)}개)")
        return SizeResult(False, encoding=enc)
    logger.debug(f"solve_size: 만족 (최소화={minimize}, 값={result.value})")
    return SizeResult(True, result.assignment, enc, result.value)


def gen_size_leq(f: Formula) -> Formula:
    """size(E,k) 마다 그 자리에 0 ≤ k 를 함께 둔다 (RUQ 본문 제외)"""
    if isinstance(f, Atom):
        if f.kind == AtomKind.SIZE:
            return conj(f, atom(AtomKind.LT, num(-1), f.args[1]))
        return f
    if isinstance(f, And):
        return conj(*(gen_size_leq(p) for p in f.parts))
    if isinstance(f, Or):
        return disj(*(gen_size_leq(p) for p in f.parts))
    return f
