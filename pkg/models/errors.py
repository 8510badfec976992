# ----------------------------------------------------------------------------------------------------
# 작성목적 : 솔버 전역에서 사용하는 예외 계층 정의
# 작성일 : 2025-09-02

# 변경사항 내역 (날짜 | 변경목적 | 변경내용 | 작성자 순으로 기입)
# 2025-09-02 | 최초 구현 | 파서/정렬/LIA/라이브러리 예외 분리 | 구동빈
# 2025-09-15 | groundsol 추가 | 탐색 범위 소진 예외 추가 | 이주형
# ----------------------------------------------------------------------------------------------------

from typing import Optional


class SolverError(Exception):
    """솔버 예외의 최상위 클래스"""


class SortError(SolverError):
    """항의 정렬(sort)이 맞지 않을 때"""

    def __init__(self, message: str, term: object = None):
        super().__init__(message)
        self.term = term


class ParseError(SolverError):
    """구문 오류 (위치 포함)"""

    def __init__(self, message: str, line: int = 0, column: int = 0, origin: Optional[str] = None):
        self.line = line
        self.column = column
        self.origin = origin
        where = f"{origin}:" if origin else ""
        super().__init__(f"{where}{line}:{column}: {message}")
        self.message = message


class IntervalArgError(ParseError):
    """구간 인자가 숫자나 변수가 아닐 때"""


class UnknownDerived(SolverError):
    """정의되지 않은 파생 제약"""


class ArityError(SolverError):
    """인자 개수가 맞지 않을 때"""


class NotNegatable(SolverError):
    """부정형이 정의되지 않은 제약"""


class NonGround(SolverError):
    """평가 시 바인딩되지 않은 변수가 남아있을 때"""


class BudgetExceeded(SolverError):
    """탐색 예산 초과 (불만족이 아님)"""


class CompletionFailure(SolverError):
    """잔여 제약을 완성하지 못했을 때 (솔버 버그 신호)"""


class LibraryError(SolverError):
    """라이브러리 정의 오류 (재정의, 재귀, 잘못된 절)"""


class GroundSolutionExhausted(SolverError):
    """groundsol 탐색 범위 소진"""
