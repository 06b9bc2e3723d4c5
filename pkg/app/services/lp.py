import logging
from fractions import Fraction
from typing import Optional, Sequence

logger = logging.getLogger(__name__)


class PhaseOneTableau:
    """
    Симплекс-таблица первой фазы для системы A·x = b, x >= 0

    Все вычисления в точной рациональной арифметике. Начальный базис образуют
    искусственные переменные; минимизируется их сумма. Выбор входящей и
    выходящей переменной по правилу Бленда, поэтому зацикливание невозможно.
    """

    def __init__(self, matrix: Sequence[Sequence], rhs: Sequence):
        self.m = len(matrix)
        self.n = len(matrix[0]) if matrix else 0
        self.rows: list[list[Fraction]] = []
        for row, b in zip(matrix, rhs):
            sign = -1 if b < 0 else 1
            self.rows.append([Fraction(sign * v) for v in row] + [Fraction(sign * b)])
        # искусственная переменная строки i имеет номер n + i
        self.basis = [self.n + i for i in range(self.m)]
        # приведенные стоимости и (последним элементом) -w, где w: сумма искусственных
        self.cost = [-sum((row[j] for row in self.rows), Fraction(0)) for j in range(self.n + 1)]
        self.pivots = 0

    def pivot(self, i: int, j: int) -> None:
        row = self.rows[i]
        piv = row[j]
        self.rows[i] = row = [v / piv for v in row]
        for k, other in enumerate(self.rows):
            if k != i and other[j]:
                factor = other[j]
                self.rows[k] = [a - factor * b for a, b in zip(other, row)]
        if self.cost[j]:
            factor = self.cost[j]
            self.cost = [a - factor * b for a, b in zip(self.cost, row)]
        self.basis[i] = j
        self.pivots += 1

    def step(self) -> bool:
        entering = next((j for j in range(self.n) if self.cost[j] < 0), None)
        if entering is None:
            return False
        candidates = [
            (row[-1] / row[entering], self.basis[i], i)
            for i, row in enumerate(self.rows)
            if row[entering] > 0
        ]
        # стоимость первой фазы ограничена снизу нулем, поэтому кандидат всегда есть
        _, _, leaving = min(candidates)
        self.pivot(leaving, entering)
        return True

    def solve(self) -> Optional[tuple[Fraction, ...]]:
        while self.step():
            pass
        logger.debug("Первая фаза: %d строк, %d переменных, %d поворотов", self.m, self.n, self.pivots)
        if self.cost[-1] != 0:
            return None
        solution = [Fraction(0)] * self.n
        for i, var in enumerate(self.basis):
            if var < self.n:
                solution[var] = self.rows[i][-1]
        return tuple(solution)


def feasible_point(matrix: Sequence[Sequence], rhs: Sequence) -> Optional[tuple[Fraction, ...]]:
    '''
    Допустимая точка системы A·x = b, x >= 0

    Returns:
        Optional[tuple[Fraction, ...]]: базисное допустимое решение или None
    '''
    if not matrix:
        return None
    return PhaseOneTableau(matrix, rhs).solve()


def strict_feasible(
    eq_rows: Sequence[Sequence[int]],
    strict_rows: Sequence[Sequence[int]],
    dim: int,
) -> Optional[tuple[Fraction, ...]]:
    '''
    Точка x со свойствами eq·x = 0 и strict·x >= 1

    Однородность системы делает условие strict·x >= 1 равносильным строгому
    strict·x > 0. Свободные переменные расщепляются x = x⁺ - x⁻, для строгих
    строк добавляются избыточные переменные.

    Args:
        eq_rows: строки-равенства
        strict_rows: строки, которые должны быть строго положительны
        dim: число переменных

    Returns:
        Optional[tuple[Fraction, ...]]: рациональный свидетель или None
    '''
    if not strict_rows:
        return tuple(Fraction(0) for _ in range(dim))
    s = len(strict_rows)
    matrix: list[list[int]] = []
    rhs: list[int] = []
    for row in eq_rows:
        matrix.append(list(row) + [-v for v in row] + [0] * s)
        rhs.append(0)
    for k, row in enumerate(strict_rows):
        surplus = [0] * s
        surplus[k] = -1
        matrix.append(list(row) + [-v for v in row] + surplus)
        rhs.append(1)
    solution = feasible_point(matrix, rhs)
    if solution is None:
        return None
    return tuple(solution[i] - solution[dim + i] for i in range(dim))


def in_convex_hull(point: Sequence[int], others: Sequence[Sequence[int]]) -> bool:
    '''
    Лежит ли точка в выпуклой оболочке других точек (точная проверка через ЛП)

    Ищется λ >= 0 с Σλ = 1 и Σ λ_i q_i = point.
    '''
    if not others:
        return False
    dim = len(point)
    matrix = [[q[c] for q in others] for c in range(dim)] + [[1] * len(others)]
    rhs = list(point) + [1]
    return feasible_point(matrix, rhs) is not None
