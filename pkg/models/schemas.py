from pydantic import BaseModel, Field
from typing import Optional, Dict, List


class SolverOptions(BaseModel):
    """솔버 실행 옵션 (예산, groundsol 범위, 추적)"""
    max_steps: int = Field(200_000, description="재작성 단계 한도")
    max_branches: int = Field(100_000, description="분기(선택점) 한도")
    lia_node_limit: int = Field(20_000, description="LIA 분기한정 노드 한도")
    groundsol_min: int = Field(-10, description="groundsol 원소 값 탐색 하한")
    groundsol_max: int = Field(10, description="groundsol 원소 값 탐색 상한")
    max_answers: int = Field(1, description="배치/API 에서 열거할 최대 답 수")
    timeout_ms: Optional[int] = Field(None, description="질의당 시간 제한 (밀리초)")
    trace: bool = Field(False, description="규칙 적용 추적 로그 (DEBUG)")
    seed: Optional[int] = Field(None, description="동률 분기 순서를 섞을 때 쓰는 시드 (없으면 결정적)")
    label_integers: bool = Field(True, description="최소해 경로에서 남은 정수 변수에 증인 값 부여")
    symmetry: bool = Field(True, description="절 분기 시 대칭 가지치기 사용")


class SolveRequest(BaseModel):
    """제약 풀이 요청 스키마"""
    query: str = Field(..., description="L_QA 질의 (끝의 '.' 은 생략 가능)")
    groundsol: bool = Field(False, description="기저 해 모드")
    max_answers: int = Field(1, ge=1, le=100, description="돌려받을 최대 답 수")
    max_steps: Optional[int] = Field(None, ge=1, description="재작성 단계 한도 (없으면 설정값)")


class AnswerModel(BaseModel):
    """답 하나"""
    bindings: Dict[str, str] = Field(default_factory=dict, description="질의 변수 → 출력된 항")
    residue: List[str] = Field(default_factory=list, description="남은 기약 제약")
    text: str = Field(..., description="REPL 과 같은 형태의 출력")


class SolveResponse(BaseModel):
    """제약 풀이 응답 스키마"""
    query: str
    status: str = Field(..., description="sat 또는 unsat")
    answers: List[AnswerModel] = Field(default_factory=list)
    elapsed_ms: float = Field(..., description="풀이 시간 (밀리초)")


class HealthResponse(BaseModel):
    status: str
    libraries: List[str] = Field(default_factory=list, description="로드된 번들 라이브러리")
