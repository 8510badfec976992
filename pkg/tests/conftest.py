import os
import re
import sys
from pathlib import Path
from typing import List

import pytest

project_root = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(project_root))

from models.schemas import SolverOptions
from services.session import Session
from services.solver import Answer, Solver
from utils.fresh import FreshSupply

_FRESH = re.compile(r"_N[0-9]+")

# 무작위 성질 테스트 사례 수 (SETLOG_PROPERTY_CASES 로 키울 수 있음)
PROPERTY_CASES = int(os.getenv("SETLOG_PROPERTY_CASES", "40"))


def normalize_fresh(text: str) -> str:
    """_N<k> 를 등장 순서대로 _V1, _V2, ... 로 바꾼다"""
    mapping = {}

    def rename(m):
        return mapping.setdefault(m.group(), f"_V{len(mapping) + 1}")

    return _FRESH.sub(rename, text)


@pytest.fixture
def options() -> SolverOptions:
    return SolverOptions()


@pytest.fixture
def solver(options) -> Solver:
    return Solver(options)


@pytest.fixture
def session(options) -> Session:
    return Session(options=options)


@pytest.fixture
def array_session(session) -> Session:
    session.add_lib("array.slog")
    return session


class Solved:
    """질의 하나의 풀이 결과 (해석된 식과 답 목록)"""

    def __init__(self, solver: Solver, text: str, limit: int):
        supply = FreshSupply()
        self.formula = solver.parse(text, supply)
        self.answers: List[Answer] = []
        for answer in solver.solve(self.formula, supply):
            self.answers.append(answer)
            if len(self.answers) >= limit:
                break

    @property
    def sat(self) -> bool:
        return bool(self.answers)

    @property
    def first(self) -> Answer:
        return self.answers[0]


@pytest.fixture
def run(solver):
    """run(text, limit=1) → Solved"""
    def _run(text: str, limit: int = 1) -> Solved:
        return Solved(solver, text, limit)
    return _run
