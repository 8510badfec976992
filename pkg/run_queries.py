# ----------------------------------------------------------------------------------------------------
# 작성목적 : 집합/배열 제약 솔버 REPL 및 배치 실행 (VC 검증, 테스트 생성)
# 작성일 : 2025-09-10

# 변경사항 내역 (날짜 | 변경목적 | 변경내용 | 작성자 순으로 기입)
# 2025-09-10 | 최초 구현 | 대화형 REPL, --consult | 이주형
# 2025-09-18 | 배치 모드 | --expect-sat / --expect-unsat, 실패 위치 보고 | 구동빈
# 2025-09-19 | 예산 인자 | --timeout / --budget / --seed / --trace / --max-answers | 구동빈
# ----------------------------------------------------------------------------------------------------

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from dotenv import load_dotenv

# --- 경로 설정 및 모듈 임포트 ---
project_root = Path(__file__).resolve().parent
sys.path.insert(0, str(project_root))

load_dotenv()

from models.errors import SolverError
from services.session import ReplResult, Session, Verdict, split_statements
from utils.config import apply_trace, load_options

# --- 로깅 설정 ---
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

PROMPT = "{log}=> "

# 지시문은 기대값 검사 대상이 아니다
_DIRECTIVES = ("consult(", "add_lib(", "groundsol", "halt")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="L_QA 집합/배열 제약 솔버 (파일이 없으면 REPL)")
    parser.add_argument("file", nargs="?", help="질의 파일 (문장마다 '.' 으로 끝남)")
    parser.add_argument("--consult", action="append", default=[], metavar="FILE",
                        help="라이브러리 파일 적재 (여러 번 지정 가능)")
    expect = parser.add_mutually_exclusive_group()
    expect.add_argument("--expect-sat", action="store_true", help="모든 질의가 만족 가능해야 함")
    expect.add_argument("--expect-unsat", action="store_true", help="모든 질의가 불만족이어야 함")
    parser.add_argument("--timeout", type=int, metavar="MS", help="질의당 시간 제한 (밀리초)")
    parser.add_argument("--budget", type=int, metavar="N", help="재작성 단계 한도")
    parser.add_argument("--groundsol", action="store_true", help="기저 해 모드로 시작")
    parser.add_argument("--seed", type=int, help="동률 분기 선택 시드 (기본: 결정적)")
    parser.add_argument("--trace", action="store_true", help="규칙 적용 DEBUG 로그")
    parser.add_argument("--max-answers", type=int, metavar="N", help="배치 모드에서 질의당 출력할 답 수")
    return parser


def make_session(args: argparse.Namespace) -> Session:
    options = load_options(max_steps=args.budget, timeout_ms=args.timeout, seed=args.seed,
                           trace=args.trace or None, max_answers=args.max_answers)
    apply_trace(options.trace)
    session = Session(options=options, groundsol=args.groundsol)
    for path in args.consult:
        session.consult(path)
    return session


def _is_directive(text: str) -> bool:
    return text.startswith(_DIRECTIVES)


def run_file(path: str, session: Session, expect: Optional[str] = None, out=None) -> int:
    """배치 실행. 기대값과 다른 질의가 하나라도 있으면 1"""
    out = out or sys.stdout
    file_path = Path(path)
    try:
        text = file_path.read_text(encoding="utf-8")
    except OSError as e:
        logger.error(f"질의 파일을 읽을 수 없습니다: {path} ({e.strerror})")
        return 2
    session.base_dir = file_path.resolve().parent
    failures: List[str] = []
    started = time.monotonic()
    for source in split_statements(text, file_path.name):
        is_query = not _is_directive(source.text)
        query_started = time.monotonic()
        results = session.answers(source, session.options.max_answers) if is_query else [session.eval(source)]
        elapsed = (time.monotonic() - query_started) * 1000
        out.write(f"% {source.origin}:{source.line}  {source.text}\n")
        for i, r in enumerate(results):
            if i:
                out.write(";\n")
            out.write(f"{r.output}\n")
        if is_query:
            logger.info(f"{source.origin}:{source.line} → {results[0].verdict} ({elapsed:.0f} ms)")
        verdict = results[0].verdict
        if verdict == Verdict.ERROR:
            failures.append(f"{source.origin}:{source.line}: 오류 - {results[0].output}")
        elif is_query and expect and verdict != expect:
            failures.append(f"{source.origin}:{source.line}: {expect} 기대, 결과 {verdict}")
        if results[-1].halt:
            break
    total = (time.monotonic() - started) * 1000
    logger.info(f"배치 실행 완료: {file_path.name} ({total:.0f} ms, 실패 {len(failures)}건)")
    for failure in failures:
        out.write(f"FAILED {failure}\n")
    return 1 if failures else 0


def repl(session: Session, stdin=None, out=None) -> int:
    """대화형 REPL. halt. 또는 EOF 에서 종료"""
    stdin = stdin or sys.stdin
    out = out or sys.stdout
    interactive = stdin.isatty()
    buf: List[str] = []
    while True:
        if interactive:
            out.write(PROMPT if not buf else "   ")
            out.flush()
        line = stdin.readline()
        if not line:
            return 0
        stripped = line.strip()
        if not stripped and not buf:
            continue
        buf.append(line.rstrip("\n"))
        joined = " ".join(buf).strip()
        if joined != ";" and not joined.endswith("."):
            continue
        buf = []
        result: ReplResult = session.eval(joined)
        if result.output:
            out.write(f"{result.output}\n")
        if result.halt:
            return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        session = make_session(args)
    except SolverError as e:
        logger.error(f"라이브러리 적재 실패: {e}")
        return 2
    if args.file:
        expect = Verdict.SAT if args.expect_sat else Verdict.UNSAT if args.expect_unsat else None
        return run_file(args.file, session, expect)
    return repl(session)


if __name__ == "__main__":
    sys.exit(main())
