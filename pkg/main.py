from fastapi import FastAPI, HTTPException
from contextlib import asynccontextmanager
from typing import List
import logging
import time
import uvicorn
from dotenv import load_dotenv

# .env 파일 로드
load_dotenv()

from models.errors import BudgetExceeded, GroundSolutionExhausted, ParseError, SolverError, SortError
from models.formula import render_formula
from models.schemas import AnswerModel, HealthResponse, SolveRequest, SolveResponse
from models.terms import render
from services.library import LibraryRegistry
from services.parser import parse, print_answer
from services.session import Session
from services.solver import Answer, Solver
from utils.config import bundled_libraries, load_options
from utils.fresh import FreshSupply

# 로깅 설정
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

# 서버 시작 시 적재한 라이브러리 정의 (요청마다 공유, 읽기 전용)
_registry = LibraryRegistry()
_libraries: List[str] = []


@asynccontextmanager
async def lifespan(app: FastAPI):
    # 시작 시 실행
    session = Session(registry=_registry)
    for name in bundled_libraries():
        try:
            session.add_lib(name)
            if name not in _libraries:
                _libraries.append(name)
        except SolverError as e:
            logger.warning(f"번들 라이브러리 적재 실패, 해당 술어는 사용할 수 없습니다: {name} ({str(e)})")
    logger.info(f"솔버 서버 시작 (라이브러리: {', '.join(_libraries) or '없음'})")

    yield

    # 종료 시 실행
    logger.info("서버 종료")

app = FastAPI(
    title="집합/배열 제약 풀이 API",
    description="L_QA 질의(집합, 정수, 배열 제약)의 만족 가능성을 판정하고 답을 돌려주는 시스템",
    version="1.0.0",
    lifespan=lifespan
)


def _answer_model(answer: Answer) -> AnswerModel:
    return AnswerModel(
        bindings={name: render(term) for name, term in answer.bindings},
        residue=[render_formula(c) for c in answer.residue],
        text=print_answer(answer),
    )


@app.get("/")
async def root():
    return {
        "message": "집합/배열 제약 풀이 API 서버",
        "version": "1.0.0",
        "status": "운영 중"
    }

@app.get("/health", response_model=HealthResponse)
async def health_check():
    return HealthResponse(status="healthy", libraries=list(_libraries))

@app.post("/solve", response_model=SolveResponse)
def solve_query(request: SolveRequest):
    """
    제약 풀이 API

    질의를 해석해 최대 max_answers 개의 답을 돌려줍니다.
    답이 없으면 status 는 unsat 입니다.
    """
    started = time.monotonic()
    try:
        options = load_options(max_steps=request.max_steps)
        solver = Solver(options, _registry)
        supply = FreshSupply()
        f = parse(request.query, supply, _registry)
        stream = solver.groundsol(f, supply) if request.groundsol else solver.solve(f, supply)
        answers = []
        for answer in stream:
            answers.append(_answer_model(answer))
            if len(answers) >= request.max_answers:
                break
    except (ParseError, SortError) as e:
        logger.error(f"질의 해석 오류: {str(e)}")
        raise HTTPException(status_code=400, detail=f"질의 해석 오류: {str(e)}")
    except (BudgetExceeded, GroundSolutionExhausted) as e:
        logger.error(f"탐색 한도 초과: {str(e)}")
        raise HTTPException(status_code=422, detail=f"탐색 한도 초과: {str(e)}")
    except Exception as e:
        logger.error(f"풀이 중 오류 발생: {str(e)}")
        raise HTTPException(status_code=500, detail=f"풀이 중 오류가 발생했습니다: {str(e)}")

    elapsed = (time.monotonic() - started) * 1000
    return SolveResponse(
        query=request.query,
        status="sat" if answers else "unsat",
        answers=answers,
        elapsed_ms=elapsed,
    )

if __name__ == "__main__":
    uvicorn.run(
        "main:app",
        host="0.0.0.0",
        port=8003,
        reload=True,
        log_level="info"
    )
