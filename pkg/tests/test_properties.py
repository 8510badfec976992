"""무작위 질의 성질 테스트 (사례 수는 SETLOG_PROPERTY_CASES)"""
import random

import pytest

from models.errors import GroundSolutionExhausted
from tests.conftest import PROPERTY_CASES
from utils.fresh import FreshSupply

# 정수: X Y N, 집합: E F G
ATOMS = [
    "X in E", "Y nin E", "E = {X / F}", "un(E,F,G)", "disj(E,F)", "X neq Y",
    "X < Y", "size(E,N)", "Y in {1,2,3}", "N =< 2", "F neq {}", "G = {}",
    "foreach(Z in E, Z neq 0)", "X = Y + 1", "E = int(1,3)", "E neq F", "subset(E,G)",
]


def random_query(rng: random.Random) -> str:
    atoms = rng.sample(ATOMS, rng.randint(1, 3))
    if rng.random() < 0.3:
        i = rng.randrange(len(atoms))
        atoms[i] = f"({atoms[i]} or {rng.choice(ATOMS)})"
    return " & ".join(atoms)


@pytest.mark.parametrize("seed", range(PROPERTY_CASES))
def test_answers_are_sound(solver, seed):
    text = random_query(random.Random(seed))
    supply = FreshSupply()
    f = solver.parse(text, supply)
    for i, answer in enumerate(solver.solve(f, supply)):
        assert solver.check_solution(f, answer), f"{text} → {answer}"
        if i >= 2:
            break


@pytest.mark.parametrize("seed", range(PROPERTY_CASES // 4))
def test_ground_answers_evaluate_true(solver, seed):
    text = random_query(random.Random(1000 + seed))
    supply = FreshSupply()
    f = solver.parse(text, supply)
    try:
        answer = next(iter(solver.groundsol(f, supply)), None)
    except GroundSolutionExhausted:
        pytest.skip("groundsol 탐색 범위 밖")
    if answer is not None:
        assert answer.ground
        assert solver.check_solution(f, answer)
