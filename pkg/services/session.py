# ----------------------------------------------------------------------------------------------------
# 작성목적 : REPL 세션 (지시문, 질의, 다음 답 요청) 과 배치 파일 문장 분리
# 작성일 : 2025-09-10

# 변경사항 내역 (날짜 | 변경목적 | 변경내용 | 작성자 순으로 기입)
# 2025-09-10 | 최초 구현 | consult / add_lib / halt / ';' 처리 | 이주형
# 2025-09-15 | groundsol 추가 | groundsol. 지시문으로 기저 해 모드 전환 | 이주형
# 2025-09-18 | 배치 모드 | 파일을 문장 단위로 나누어 출처 줄 번호 유지 | 구동빈
# ----------------------------------------------------------------------------------------------------

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, List, Optional, Union

from models.errors import GroundSolutionExhausted, LibraryError, SolverError
from models.schemas import SolverOptions
from services.library import Definition, LibraryRegistry, bundled_library_path
from services.parser import Directive, SourceQuery, parse, parse_program, print_answer
from services.solver import Answer, Solver
from utils.fresh import FreshSupply

logger = logging.getLogger(__name__)

_DIRECTIVE_RE = re.compile(r"^(consult|add_lib)\(\s*'([^']*)'\s*\)\s*\.?$")


class Verdict:
    SAT = "sat"
    UNSAT = "unsat"
    ERROR = "error"


@dataclass
class ReplResult:
    """한 줄 평가 결과. verdict 는 질의였을 때만 채워진다"""
    output: str
    halt: bool = False
    verdict: Optional[str] = None


def split_statements(text: str, origin: str = "<input>") -> List[SourceQuery]:
    """'.' 으로 끝나는 문장 단위로 나눈다 (% 주석과 따옴표 안은 건너뜀)"""
    out: List[SourceQuery] = []
    buf: List[str] = []
    line = 1
    start_line: Optional[int] = None
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "'":
            j = text.find("'", i + 1)
            j = n - 1 if j < 0 else j
            chunk = text[i:j + 1]
            if start_line is None:
                start_line = line
            buf.append(chunk)
            line += chunk.count("\n")
            i = j + 1
            continue
        if ch == "\n":
            line += 1
        if not ch.isspace() and start_line is None:
            start_line = line
        buf.append(ch)
        if ch == "." and (i + 1 == n or text[i + 1].isspace() or text[i + 1] == "%"):
            statement = "".join(buf).strip()
            if statement:
                out.append(SourceQuery(statement, origin, start_line or line))
            buf, start_line = [], None
        i += 1
    rest = "".join(buf).strip()
    if rest:
        out.append(SourceQuery(rest, origin, start_line or line))
    return out


@dataclass
class Session:
    """REPL 세션: 적재된 라이브러리, groundsol 모드, 대기 중인 답 스트림, 입력 기록"""
    options: SolverOptions = field(default_factory=SolverOptions)
    registry: LibraryRegistry = field(default_factory=LibraryRegistry)
    groundsol: bool = False
    history: List[str] = field(default_factory=list)
    base_dir: Path = field(default_factory=Path.cwd)
    _answers: Optional[Iterator[Answer]] = field(default=None, repr=False)

    @property
    def solver(self) -> Solver:
        return Solver(self.options, self.registry)

    # -- 라이브러리 --

    def consult(self, path: Union[str, Path]) -> int:
        """라이브러리 파일 적재. 등록한 정의 수를 돌려준다 (이미 적재된 파일은 0)"""
        file_path = Path(path)
        if not file_path.is_absolute():
            file_path = self.base_dir / file_path
        file_path = file_path.resolve()
        key = str(file_path)
        if key in self.registry.loaded:
            logger.info(f"이미 적재된 라이브러리: {file_path.name}")
            return 0
        try:
            text = file_path.read_text(encoding="utf-8")
        except OSError as e:
            raise LibraryError(f"라이브러리 파일을 읽을 수 없습니다: {path} ({e.strerror})") from e
        self.registry.loaded.append(key)
        count = 0
        for item in parse_program(text, str(file_path.name), self.registry):
            if isinstance(item, Directive):
                count += self._library_directive(item, file_path.parent)
            elif isinstance(item, Definition):
                self.registry.define(item)
                count += 1
        logger.info(f"라이브러리 적재 완료: {file_path.name} (정의 {count}개)")
        return count

    def add_lib(self, name: str) -> int:
        return self.consult(bundled_library_path(name))

    def _library_directive(self, d: Directive, folder: Path) -> int:
        if d.name == "consult":
            target = Path(d.argument)
            return self.consult(target if target.is_absolute() else folder / target)
        if d.name == "add_lib":
            return self.add_lib(d.argument)
        raise LibraryError(f"지원하지 않는 지시문: {d.name} ({d.line}행)")

    # -- 평가 --

    def eval(self, line: Union[str, SourceQuery]) -> ReplResult:
        source = line if isinstance(line, SourceQuery) else SourceQuery(line.strip())
        text = source.text.strip()
        if not text:
            return ReplResult("")
        self.history.append(text)
        if text == ";":
            return self._next()
        if text in ("halt.", "halt"):
            return ReplResult("", halt=True)
        if text in ("groundsol.", "groundsol"):
            self.groundsol = not self.groundsol
            logger.info(f"groundsol 모드: {'켜짐' if self.groundsol else '꺼짐'}")
            return ReplResult(f"groundsol: {'on' if self.groundsol else 'off'}")
        m = _DIRECTIVE_RE.match(text)
        if m:
            try:
                count = self.consult(m.group(2)) if m.group(1) == "consult" else self.add_lib(m.group(2))
            except SolverError as e:
                return ReplResult(f"error: {e}", verdict=Verdict.ERROR)
            return ReplResult(f"yes ({count} definitions)")
        return self.query(source)

    def query(self, source: SourceQuery) -> ReplResult:
        """질의를 풀고 첫 답을 출력. 나머지 답은 ';' 로 이어서 받는다"""
        self._answers = None
        try:
            supply = FreshSupply()
            solver = self.solver
            f = parse(source, supply, self.registry)
            stream = solver.groundsol(f, supply) if self.groundsol else solver.solve(f, supply)
            self._answers = iter(stream)
        except SolverError as e:
            logger.error(f"질의 해석 실패: {e}")
            return ReplResult(f"error: {e}", verdict=Verdict.ERROR)
        return self._next()

    def _next(self) -> ReplResult:
        if self._answers is None:
            return ReplResult("no", verdict=Verdict.UNSAT)
        try:
            answer = next(self._answers, None)
        except GroundSolutionExhausted as e:
            self._answers = None
            return ReplResult(f"error: groundsol 탐색 범위 소진: {e}", verdict=Verdict.ERROR)
        except SolverError as e:
            self._answers = None
            logger.error(f"풀이 실패: {e}")
            return ReplResult(f"error: {e}", verdict=Verdict.ERROR)
        if answer is None:
            self._answers = None
            return ReplResult("no", verdict=Verdict.UNSAT)
        return ReplResult(print_answer(answer), verdict=Verdict.SAT)

    def answers(self, source: Union[str, SourceQuery], limit: int) -> List[ReplResult]:
        """질의 하나에 대해 최대 limit 개의 답 (마지막 'no' 는 답이 하나도 없을 때만)"""
        if isinstance(source, str):
            source = SourceQuery(source)
        first = self.eval(source)
        results = [first]
        while first.verdict == Verdict.SAT and len(results) < limit:
            more = self._next()
            if more.verdict != Verdict.SAT:
                break
            results.append(more)
        return results


def repl_eval(line: str, session: Session) -> ReplResult:
    return session.eval(line)
