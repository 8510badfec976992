import itertools
import re
from models.terms import Sort, Var

FRESH_PATTERN = re.compile(r"^_N[0-9]+$")


class FreshSupply:
    """솔버 인스턴스(질의) 단위 새 변수 공급기. _N<k> 형태로 출력된다"""

    def __init__(self, start: int = 1):
        self._counter = itertools.count(start)

    def fresh(self, sort: Sort) -> Var:
        return Var(f"_N{next(self._counter)}", sort)

    def fresh_many(self, sort: Sort, n: int) -> list:
        return [self.fresh(sort) for _ in range(n)]


def is_fresh_name(name: str) -> bool:
    return bool(FRESH_PATTERN.match(name))
