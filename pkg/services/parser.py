# ----------------------------------------------------------------------------------------------------
# 작성목적 : 질의/라이브러리 구문 해석 및 답 출력
# 작성일 : 2025-09-05

# 변경사항 내역 (날짜 | 변경목적 | 변경내용 | 작성자 순으로 기입)
# 2025-09-05 | 최초 구현 | 토크나이저, 재귀 하강 파서, 정렬 추론 | 구동빈
# 2025-09-10 | 라이브러리 절 | pred(Args) :- Body. 절과 지시문 해석 추가 | 이주형
# 2025-09-17 | foreach 바인더 | 바인더 이름 충돌 시 새 변수로 교체 | 구동빈
# ----------------------------------------------------------------------------------------------------

import logging
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

from models.errors import ArityError, IntervalArgError, ParseError, SortError
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
    atom,
    disj,
    free_vars,
    render_formula,
    subst_formula,
)
from models.terms import (
    EMPTY,
    IntLin,
    Interval,
    Pair,
    SetCons,
    Sort,
    Term,
    UrTerm,
    Var,
    lin_combine,
    lin_scale,
    make_set,
    num,
    render,
    sort_of,
)
from services.library import BUILTIN_ARITY, PRIMITIVES, Definition, LibraryRegistry
from services.negation import desugar
from utils.fresh import FreshSupply, is_fresh_name

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(
    r"(?P<COMMENT>%[^\n]*)"
    r"|(?P<WS>\s+)"
    r"|(?P<NUM>\d+)"
    r"|(?P<VAR>[A-Z_][A-Za-z0-9_]*)"
    r"|(?P<NAME>[a-z][A-Za-z0-9_]*)"
    r"|(?P<QUOTED>'[^'\n]*')"
    r"|(?P<OP>=:=|=<|>=|:-|[<>=+\-*&(){}\[\],/.;])"
)

# 비교/소속 중위 연산자
_INFIX = {"=", "<", "=<", ">", ">=", "=:=", "neq", "in", "nin", "is"}

# 파생 제약 인자 정렬: S=집합, I=정수, ?=제약 없음
_SIGNATURES: Dict[str, Tuple[str, ...]] = {
    "leq": ("II",), "gt": ("II",), "geq": ("II",),
    "inters": ("SSS",), "diff": ("SSS",), "subset": ("SS",),
    "rel": ("S",), "pfun": ("S",), "ipfun": ("S",),
    "dres": ("?SS",), "dares": ("?SS",),
    "dres_pt": ("ISS",), "dares_pt": ("ISS",), "dres_int": ("SSS",), "dares_int": ("SSS",),
    "arr": ("SI",), "get": ("SI?",), "upd": ("SI?S",),
    "sorted": ("S", "SIII"), "sorted_range": ("SIII",),
    "put": ("S??S",), "remove": ("S?S",),
}

_PRIMITIVE_SIGNATURES = {"un": "SSS", "disj": "SS", "size": "SI", "pair": "?", "npair": "?"}


@dataclass(frozen=True)
class SourceQuery:
    """질의 원문과 출처 (REPL 줄 또는 파일 위치)"""
    text: str
    origin: str = "<repl>"
    line: int = 1


@dataclass
class Token:
    kind: str
    text: str
    line: int
    column: int


@dataclass
class Directive:
    """:- consult('file'). 형태의 지시문"""
    name: str
    argument: str
    line: int = 0


def tokenize(text: str, origin: str = "<input>", first_line: int = 1) -> List[Token]:
    tokens: List[Token] = []
    pos, line, line_start = 0, first_line, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"알 수 없는 문자 '{text[pos]}'", line, pos - line_start + 1, origin)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("WS", "COMMENT"):
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: List[Token], origin: str, supply: FreshSupply):
        self.tokens = tokens
        self.pos = 0
        self.origin = origin
        self.supply = supply

    # ---- 토큰 도우미 ----

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind in ("OP", "NAME") and self.tok.text == text

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"'{text}' 이(가) 필요합니다 ('{self.tok.text or 'EOF'}' 발견)")
        return self.advance()

    def error(self, message: str, token: Optional[Token] = None):
        t = token or self.tok
        raise ParseError(message, t.line, t.column, self.origin)

    # ---- 논리식 ----

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.at("implies"):
            self.advance()
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.at("or"):
            self.advance()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.at("&"):
            self.advance()
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Formula:
        t = self.tok
        if self.at("("):
            start = self.pos
            try:
                self.advance()
                inner = self.formula()
                self.expect(")")
                if not self._at_infix():
                    return inner
            except ParseError:
                pass
            self.pos = start
            return self.comparison()
        if t.kind == "NAME":
            if t.text in ("true", "false") and self.peek().text != "(":
                self.advance()
                return TRUE if t.text == "true" else FALSE
            if self.peek().text == "(" and t.text != "int":
                start = self.pos
                result = self.predicate()
                if not self._at_infix():
                    return result
                self.pos = start
        return self.comparison()

    def _at_infix(self) -> bool:
        return self.tok.kind in ("OP", "NAME") and self.tok.text in _INFIX

    def predicate(self) -> Formula:
        name_tok = self.advance()
        name = name_tok.text
        self.expect("(")
        if name == "neg":
            inner = self.formula()
            self.expect(")")
            return Neg(inner)
        if name == "foreach":
            return self.foreach(name_tok)
        args = self.term_list(")")
        self.expect(")")
        if name in PRIMITIVES:
            if len(args) != PRIMITIVES[name]:
                self.error(f"{name} 의 인자 개수가 맞지 않습니다: {len(args)}", name_tok)
            return Atom(name, tuple(args))
        if name in BUILTIN_ARITY and len(args) not in BUILTIN_ARITY[name]:
            self.error(f"{name} 의 인자 개수가 맞지 않습니다: {len(args)}", name_tok)
        return Call(name, tuple(args))

    def foreach(self, name_tok: Token) -> Formula:
        bindings: List[Tuple[Tuple[Var, ...], Term]] = []
        if self.at("[") and not self._pair_binder_ahead():
            self.advance()
            while True:
                bindings.append(self.binding())
                if self.at(","):
                    self.advance()
                    continue
                break
            self.expect("]")
        else:
            bindings.append(self.binding())
        self.expect(",")
        body = self.formula()
        self.expect(")")
        result = body
        for binder, domain in reversed(bindings):
            try:
                result = Ruq(binder, domain, result)
            except SortError as e:
                self.error(str(e), name_tok)
        return result

    def _pair_binder_ahead(self) -> bool:
        kinds = [self.peek(k) for k in range(0, 6)]
        return (kinds[0].text == "[" and kinds[1].kind == "VAR" and kinds[2].text == ","
                and kinds[3].kind == "VAR" and kinds[4].text == "]" and kinds[5].text == "in")

    def binding(self) -> Tuple[Tuple[Var, ...], Term]:
        if self.at("["):
            self.advance()
            x = self.binder_var()
            self.expect(",")
            y = self.binder_var()
            self.expect("]")
            binder: Tuple[Var, ...] = (x, y)
        else:
            binder = (self.binder_var(),)
        self.expect("in")
        return binder, self.term()

    def binder_var(self) -> Var:
        t = self.tok
        if t.kind != "VAR":
            self.error("foreach 바인더는 변수여야 합니다")
        self.advance()
        if t.text == "_":
            return self.supply.fresh(Sort.UR)
        return Var(t.text)

    def comparison(self) -> Formula:
        left = self.term()
        op_tok = self.tok
        if not self._at_infix():
            self.error(f"비교 연산자가 필요합니다 ('{op_tok.text or 'EOF'}' 발견)")
        op = self.advance().text
        right = self.term()
        if op in ("=", "is", "=:="):
            return atom(AtomKind.EQ, left, right)
        if op == "neq":
            return atom(AtomKind.NEQ, left, right)
        if op == "in":
            return atom(AtomKind.IN, left, right)
        if op == "nin":
            return atom(AtomKind.NIN, left, right)
        if op == "<":
            return atom(AtomKind.LT, left, right)
        return Call({"=<": "leq", ">": "gt", ">=": "geq"}[op], (left, right))

    # ---- 항 ----

    def term_list(self, closing: str) -> List[Term]:
        items: List[Term] = []
        if self.at(closing):
            return items
        while True:
            items.append(self.term())
            if not self.at(","):
                return items
            self.advance()

    def term(self) -> Term:
        t = self.tok
        negative = False
        if self.at("-"):
            self.advance()
            negative = True
        value = self.product()
        if negative:
            value = self._arith(lin_scale, value, -1, t)
        while self.at("+") or self.at("-"):
            sign = 1 if self.advance().text == "+" else -1
            rhs = self.product()
            value = self._arith(lambda a, b: lin_combine(a, b, sign), value, rhs, t)
        return value

    def product(self) -> Term:
        t = self.tok
        value = self.primary()
        while self.at("*"):
            self.advance()
            rhs = self.primary()
            if isinstance(value, IntLin) and not value.coeffs:
                value = self._arith(lin_scale, rhs, value.const, t)
            elif isinstance(rhs, IntLin) and not rhs.coeffs:
                value = self._arith(lin_scale, value, rhs.const, t)
            else:
                self.error("비선형 곱셈은 지원하지 않습니다", t)
        return value

    def _arith(self, fn, a, b, t: Token) -> Term:
        try:
            return fn(a, b)
        except SortError as e:
            self.error(str(e), t)

    def primary(self) -> Term:
        t = self.tok
        if t.kind == "NUM":
            self.advance()
            return num(int(t.text))
        if t.kind == "VAR":
            self.advance()
            if t.text == "_":
                return self.supply.fresh(Sort.UR)
            if is_fresh_name(t.text):
                self.error(f"{t.text} 형태의 이름은 새 변수용으로 예약되어 있습니다", t)
            return Var(t.text)
        if t.kind == "NAME":
            self.advance()
            if t.text == "int" and self.at("("):
                return self.interval(t)
            if self.at("("):
                self.advance()
                args = self.term_list(")")
                self.expect(")")
                return UrTerm(t.text, tuple(args))
            return UrTerm(t.text)
        if t.kind == "QUOTED":
            self.advance()
            return UrTerm(t.text[1:-1])
        if self.at("{"):
            self.advance()
            if self.at("}"):
                self.advance()
                return EMPTY
            elems = self.term_list("}")
            tail: Term = EMPTY
            if self.at("/"):
                self.advance()
                tail = self.term()
            self.expect("}")
            return make_set(elems, tail)
        if self.at("["):
            self.advance()
            first = self.term()
            self.expect(",")
            second = self.term()
            self.expect("]")
            return Pair(first, second)
        if self.at("("):
            self.advance()
            inner = self.term()
            self.expect(")")
            return inner
        self.error(f"항이 필요합니다 ('{t.text or 'EOF'}' 발견)")

    def interval(self, name_tok: Token) -> Term:
        self.expect("(")
        limits: List[Term] = []
        for closing in (",", ")"):
            start = self.tok
            limit = self.term()
            if not (isinstance(limit, Var) or (isinstance(limit, IntLin) and not limit.coeffs)):
                raise IntervalArgError(
                    f"구간의 인자는 숫자나 변수만 가능합니다: int({render(limit)},...). "
                    f"새 변수를 두고 'J is K+1 & int(J,M)' 형태로 작성하세요",
                    start.line, start.column, self.origin)
            limits.append(limit)
            self.expect(closing)
        return Interval(limits[0], limits[1])


# ---- 정렬 추론 ----

class _SortInference:
    """변수별 정렬 추론 (union-find). 정렬을 모르는 변수는 UR"""

    def __init__(self, registry: Optional[LibraryRegistry]):
        self.registry = registry
        self.parent: Dict[str, str] = {}
        self.sort: Dict[str, Optional[Sort]] = {}

    def find(self, name: str) -> str:
        self.parent.setdefault(name, name)
        self.sort.setdefault(name, None)
        while self.parent[name] != name:
            self.parent[name] = self.parent[self.parent[name]]
            name = self.parent[name]
        return name

    def _merge_sorts(self, a: Optional[Sort], b: Optional[Sort], where: str) -> Optional[Sort]:
        if a is None or a == b:
            return b
        if b is None:
            return a
        raise SortError(f"변수 {where} 의 정렬이 충돌합니다: {a.value} / {b.value}")

    def require(self, name: str, s: Optional[Sort]) -> None:
        root = self.find(name)
        self.sort[root] = self._merge_sorts(self.sort[root], s, name)

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        merged = self._merge_sorts(self.sort[ra], self.sort[rb], f"{a}={b}")
        self.parent[ra] = rb
        self.sort[rb] = merged

    def sort_for(self, name: str) -> Sort:
        return self.sort[self.find(name)] or Sort.UR

    # 항의 구조에서 알 수 있는 정렬 (UR 은 제약 없음으로 취급)
    def shape(self, t: Term) -> Optional[Sort]:
        if isinstance(t, IntLin):
            return Sort.INT
        if isinstance(t, (SetCons, Interval)) or t == EMPTY:
            return Sort.SET
        return None

    def expect(self, t: Term, s: Optional[Sort]) -> None:
        self.visit(t)
        if s is None:
            return
        if isinstance(t, Var):
            self.require(t.name, s)
            return
        have = self.shape(t)
        if isinstance(t, (Pair, UrTerm)):
            have = Sort.UR
        if have is not None and have != s and not (have == Sort.UR and s == Sort.UR):
            raise SortError(f"{render(t)} 자리에는 {s.value} 정렬의 항이 와야 합니다", t)

    def visit(self, t: Term) -> None:
        if isinstance(t, Var):
            self.find(t.name)
        elif isinstance(t, IntLin):
            for v, _ in t.coeffs:
                self.require(v, Sort.INT)
        elif isinstance(t, Pair):
            self.expect(t.first, Sort.INT)
            self.expect_element(t.second)
        elif isinstance(t, UrTerm):
            for a in t.args:
                self.expect_element(a)
        elif isinstance(t, SetCons):
            self.visit(t.elem)
            self.expect(t.rest, Sort.SET)
        elif isinstance(t, Interval):
            self.expect(t.lo, Sort.INT)
            self.expect(t.hi, Sort.INT)

    def expect_element(self, t: Term) -> None:
        self.visit(t)
        if self.shape(t) == Sort.SET or (isinstance(t, Var) and self.sort[self.find(t.name)] == Sort.SET):
            raise SortError(f"집합이 올 수 없는 자리: {render(t)}", t)

    def same(self, a: Term, b: Term) -> None:
        self.visit(a)
        self.visit(b)
        if isinstance(a, Var) and isinstance(b, Var):
            self.union(a.name, b.name)
        elif isinstance(a, Var):
            self.expect(a, self.shape(b))
        elif isinstance(b, Var):
            self.expect(b, self.shape(a))

    def signature(self, sig: str, args: Sequence[Term]) -> None:
        for code, arg in zip(sig, args):
            self.expect(arg, {"S": Sort.SET, "I": Sort.INT}.get(code))

    def formula(self, f: Formula) -> None:
        if isinstance(f, Atom):
            if f.kind in (AtomKind.EQ, AtomKind.NEQ):
                self.same(*f.args)
            elif f.kind in (AtomKind.IN, AtomKind.NIN):
                self.visit(f.args[0])
                self.expect(f.args[1], Sort.SET)
            elif f.kind == AtomKind.LT:
                self.signature("II", f.args)
            elif f.kind == AtomKind.SUBSET:
                self.signature("SS", f.args)
            else:
                self.signature(_PRIMITIVE_SIGNATURES[f.kind], f.args)
        elif isinstance(f, (And, Or)):
            for p in f.parts:
                self.formula(p)
        elif isinstance(f, Ruq):
            self.expect(f.domain, Sort.SET)
            if f.is_pair_binder:
                self.require(f.binder[0].name, Sort.INT)
            for b in f.binder:
                self.find(b.name)
            self.formula(f.body)
        elif isinstance(f, Implies):
            self.formula(f.left)
            self.formula(f.right)
        elif isinstance(f, Neg):
            self.formula(f.inner)
        elif isinstance(f, Call):
            self.call(f)

    def call(self, c: Call) -> None:
        if c.name in _SIGNATURES:
            for sig in _SIGNATURES[c.name]:
                if len(sig) == len(c.args):
                    self.signature(sig, c.args)
                    if c.name in ("dres", "dares") and not isinstance(c.args[0], Interval):
                        self.expect(c.args[0], Sort.INT)
            return
        d = self.registry.definitions.get(c.name) if self.registry else None
        if d is None:
            for a in c.args:
                self.visit(a)
            return
        if len(d.params) != len(c.args):
            raise ArityError(f"{c.name} 의 인자 개수가 맞지 않습니다: {len(c.args)} (정의: {len(d.params)})")
        for p, a in zip(d.params, c.args):
            self.expect(a, p.sort if p.sort in (Sort.SET, Sort.INT) else None)


def _retag_term(t: Term, inf: _SortInference) -> Term:
    if isinstance(t, Var):
        return Var(t.name, inf.sort_for(t.name))
    if isinstance(t, Pair):
        return Pair(_retag_term(t.first, inf), _retag_term(t.second, inf))
    if isinstance(t, UrTerm) and t.args:
        return UrTerm(t.functor, tuple(_retag_term(a, inf) for a in t.args))
    if isinstance(t, SetCons):
        return SetCons(_retag_term(t.elem, inf), _retag_term(t.rest, inf))
    if isinstance(t, Interval):
        return Interval(_retag_term(t.lo, inf), _retag_term(t.hi, inf))
    return t


def _retag(f: Formula, inf: _SortInference) -> Formula:
    if isinstance(f, Atom):
        return Atom(f.kind, tuple(_retag_term(a, inf) for a in f.args))
    if isinstance(f, Call):
        return Call(f.name, tuple(_retag_term(a, inf) for a in f.args))
    if isinstance(f, And):
        return And(tuple(_retag(p, inf) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_retag(p, inf) for p in f.parts))
    if isinstance(f, Ruq):
        binder = tuple(Var(b.name, inf.sort_for(b.name)) for b in f.binder)
        return Ruq(binder, _retag_term(f.domain, inf), _retag(f.body, inf))
    if isinstance(f, Implies):
        return Implies(_retag(f.left, inf), _retag(f.right, inf))
    if isinstance(f, Neg):
        return Neg(_retag(f.inner, inf))
    return f


def _check_sorts(f: Formula) -> None:
    if isinstance(f, (Atom, Call)):
        for a in f.args:
            sort_of(a)
    elif isinstance(f, (And, Or)):
        for p in f.parts:
            _check_sorts(p)
    elif isinstance(f, Ruq):
        sort_of(f.domain)
        _check_sorts(f.body)
    elif isinstance(f, Implies):
        _check_sorts(f.left)
        _check_sorts(f.right)
    elif isinstance(f, Neg):
        _check_sorts(f.inner)


def _unique_binders(f: Formula, used: set, supply: FreshSupply) -> Formula:
    """질의 안에서 foreach 바인더 이름이 겹치지 않도록 교체"""
    if isinstance(f, Ruq):
        mapping: Dict[str, Term] = {}
        binder: List[Var] = []
        for b in f.binder:
            if b.name in used:
                nb = supply.fresh(b.sort)
                mapping[b.name] = nb
                binder.append(nb)
            else:
                used.add(b.name)
                binder.append(b)
        body = subst_formula(mapping, f.body) if mapping else f.body
        return Ruq(tuple(binder), f.domain, _unique_binders(body, used, supply))
    if isinstance(f, And):
        return And(tuple(_unique_binders(p, used, supply) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_unique_binders(p, used, supply) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(_unique_binders(f.left, used, supply), _unique_binders(f.right, used, supply))
    if isinstance(f, Neg):
        return Neg(_unique_binders(f.inner, used, supply))
    return f


def _prepare(f: Formula, registry: Optional[LibraryRegistry], supply: FreshSupply) -> Formula:
    inf = _SortInference(registry)
    inf.formula(f)
    f = _retag(f, inf)
    _check_sorts(f)
    used = {v.name for v in free_vars(f)}
    return _unique_binders(f, used, supply)


def parse_raw(src: Union[str, SourceQuery], supply: Optional[FreshSupply] = None,
              registry: Optional[LibraryRegistry] = None) -> Formula:
    """implies/neg 를 남긴 채로 해석 (정렬 추론과 바인더 정리까지)"""
    if isinstance(src, str):
        src = SourceQuery(src)
    supply = supply or FreshSupply()
    p = _Parser(tokenize(src.text, src.origin, src.line), src.origin, supply)
    f = p.formula()
    if p.at("."):
        p.advance()
    if p.tok.kind != "EOF":
        p.error(f"질의 끝에 예상치 못한 토큰 '{p.tok.text}'")
    return _prepare(f, registry, supply)


def parse(src: Union[str, SourceQuery], supply: Optional[FreshSupply] = None,
          registry: Optional[LibraryRegistry] = None) -> Formula:
    """질의 → Formula (implies/neg 제거 완료)"""
    supply = supply or FreshSupply()
    f = parse_raw(src, supply, registry)
    return desugar(f, supply, registry)


def parse_program(text: str, origin: str = "<library>",
                  registry: Optional[LibraryRegistry] = None) -> List[Union[Definition, Directive]]:
    """라이브러리 파일: pred(Args) :- Body. 절과 :- directive. 의 나열"""
    p = _Parser(tokenize(text, origin), origin, FreshSupply())
    items: List[Union[Definition, Directive]] = []
    # 같은 파일의 앞선 정의를 뒤의 절에서 쓸 수 있도록 임시 등록부를 둔다
    scratch = LibraryRegistry(dict(registry.definitions) if registry else {})
    while p.tok.kind != "EOF":
        if p.at(":-"):
            head = p.advance()
            name = p.tok
            if name.kind != "NAME":
                p.error("지시문 이름이 필요합니다")
            p.advance()
            p.expect("(")
            arg = p.tok
            if arg.kind not in ("QUOTED", "NAME"):
                p.error("지시문 인자는 따옴표 문자열이어야 합니다")
            p.advance()
            p.expect(")")
            p.expect(".")
            items.append(Directive(name.text, arg.text.strip("'"), head.line))
            continue
        name_tok = p.tok
        if name_tok.kind != "NAME":
            p.error("절의 머리는 술어 이름이어야 합니다")
        p.advance()
        params: List[Var] = []
        if p.at("("):
            p.advance()
            for t in p.term_list(")"):
                if not isinstance(t, Var) or is_fresh_name(t.name):
                    p.error(f"{name_tok.text} 의 머리 인자는 변수여야 합니다", name_tok)
                params.append(t)
            p.expect(")")
        p.expect(":-")
        body = p.formula()
        p.expect(".")
        d = _definition(name_tok.text, params, body, f"{origin}:{name_tok.line}", scratch)
        scratch.definitions[d.name] = d
        items.append(d)
    return items


def _definition(name: str, params: List[Var], body: Formula, origin: str,
                registry: LibraryRegistry) -> Definition:
    inf = _SortInference(registry)
    for v in params:
        inf.find(v.name)
    inf.formula(body)
    body = _retag(body, inf)
    _check_sorts(body)
    supply = FreshSupply()
    body = desugar(body, supply, registry)
    typed = tuple(Var(v.name, inf.sort_for(v.name)) for v in params)
    return Definition(name, typed, body, origin)


# ---- 출력 ----

def print_answer(answer) -> str:
    """답 출력. None 이면 'no', 바인딩과 잔여 제약이 모두 없으면 'true'"""
    if answer is None:
        return "no"
    lines = [f"{name} = {render(term)}" for name, term in answer.bindings]
    residue = [render_formula(c) for c in answer.residue]
    if not lines and not residue:
        return "true"
    text = ",\n".join(lines)
    if residue:
        constraint = "Constraint: " + ", ".join(residue)
        text = f"{text}\n{constraint}" if text else constraint
    return text
