import logging
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
import sympy

from app.models.rational import primitive_vector

logger = logging.getLogger(__name__)

Vector = tuple[Fraction, ...]


def to_matrix(rows: Sequence[Sequence], ncols: int) -> sympy.Matrix:
    if not rows:
        return sympy.zeros(0, ncols)
    return sympy.Matrix([[sympy.Rational(Fraction(x).numerator, Fraction(x).denominator) for x in row] for row in rows])


def to_fraction(value) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


def rank(rows: Sequence[Sequence], ncols: int) -> int:
    '''Ранг рациональной матрицы (точно)'''
    if not rows:
        return 0
    return to_matrix(rows, ncols).rank()


def solution_space_dim(eq_rows: Sequence[Sequence], ncols: int) -> int:
    '''
    Размерность пространства решений однородной системы eq·x = 0

    Args:
        eq_rows: строки системы
        ncols: число переменных

    Returns:
        int: ncols - rank(eq_rows)
    '''
    return ncols - rank(eq_rows, ncols)


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[Vector]:
    '''Базис ядра матрицы над Q'''
    if not rows:
        return [tuple(Fraction(int(i == j)) for j in range(ncols)) for i in range(ncols)]
    return [tuple(to_fraction(x) for x in vector) for vector in to_matrix(rows, ncols).nullspace()]


def independent_rows(rows: Sequence[Sequence], ncols: int) -> list[int]:
    '''Номера строк, образующих базис пространства строк (жадно, в порядке следования)'''
    if not rows:
        return []
    _, pivots = to_matrix(rows, ncols).T.rref()
    return list(pivots)


def solve_square(matrix: Sequence[Sequence], rhs: Sequence) -> Vector:
    '''Решение невырожденной квадратной системы над Q'''
    n = len(matrix)
    solution = to_matrix(matrix, n).LUsolve(to_matrix([[x] for x in rhs], 1))
    return tuple(to_fraction(x) for x in solution)


def determinant(matrix: Sequence[Sequence[int]]) -> int:
    if not matrix:
        return 1
    return int(to_matrix(matrix, len(matrix)).det(method="bareiss"))


def integer_kernel(rows: Sequence[Sequence[int]], ncols: int) -> list[tuple[int, ...]]:
    '''
    Базис решетки Z^n ∩ ker(A)

    Приводит A к ступенчатому виду унимодулярными преобразованиями столбцов
    (алгоритм Евклида по строке) с накоплением матрицы преобразования U.
    Столбцы U, соответствующие нулевым столбцам AU, образуют базис решетки.

    Args:
        rows: целочисленные строки A
        ncols: число столбцов

    Returns:
        list[tuple[int, ...]]: базисные векторы решетки ядра
    '''
    work = [[int(x) for x in row] for row in rows]
    # U хранится по столбцам, basis[j] это j-й столбец
    basis = [[int(i == j) for i in range(ncols)] for j in range(ncols)]

    def column_axpy(target: int, source: int, factor: int) -> None:
        for row in work:
            row[target] -= factor * row[source]
        col_t, col_s = basis[target], basis[source]
        for i in range(ncols):
            col_t[i] -= factor * col_s[i]

    def swap(a: int, b: int) -> None:
        for row in work:
            row[a], row[b] = row[b], row[a]
        basis[a], basis[b] = basis[b], basis[a]

    pivot = 0
    for row in work:
        if pivot == ncols:
            break
        while True:
            nonzero = [j for j in range(pivot, ncols) if row[j]]
            if not nonzero:
                break
            smallest = min(nonzero, key=lambda j: (abs(row[j]), j))
            swap(pivot, smallest)
            if len(nonzero) == 1:
                pivot += 1
                break
            for j in range(pivot + 1, ncols):
                if row[j]:
                    column_axpy(j, pivot, row[j] // row[pivot])
    return [tuple(basis[j]) for j in range(pivot, ncols)]


def integer_orthogonal_complement(vectors: Sequence[Sequence[Fraction]], ncols: int) -> list[tuple[int, ...]]:
    '''Целочисленный базис (над Q) ортогонального дополнения к линейной оболочке векторов'''
    if not vectors:
        return [tuple(int(i == j) for j in range(ncols)) for i in range(ncols)]
    return [primitive_vector(v) for v in nullspace(vectors, ncols)]


def lattice_basis(directions: Sequence[Sequence[int]], ncols: int) -> list[tuple[int, ...]]:
    '''
    Базис решетки Z^n ∩ span_Q(directions)

    Ортогональное дополнение к направлениям задается целыми строками N,
    искомая решетка: Z^n ∩ ker(N).
    '''
    directions = [v for v in directions if any(v)]
    if not directions:
        return []
    normals = integer_orthogonal_complement(directions, ncols)
    return integer_kernel(normals, ncols)


def lattice_coordinates(points: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    '''
    Координаты точек в аффинной решетке Z^n ∩ aff(points) с началом в первой точке

    Returns:
        list[tuple[int, ...]]: по вектору длины dim(aff) на каждую точку
    '''
    if not points:
        return []
    origin = points[0]
    ncols = len(origin)
    differences = [tuple(a - b for a, b in zip(point, origin)) for point in points]
    basis = lattice_basis([d for d in differences if any(d)], ncols)
    k = len(basis)
    if k == 0:
        return [() for _ in points]
    # выбор k координат, по которым базис невырожден
    pivots = independent_rows([[vector[i] for vector in basis] for i in range(ncols)], k)
    square = [[vector[i] for vector in basis] for i in pivots]
    coordinates = []
    for difference in differences:
        solution = solve_square(square, [difference[i] for i in pivots])
        if any(x.denominator != 1 for x in solution):
            raise ArithmeticError("точка не лежит в решетке аффинной оболочки")
        coordinates.append(tuple(int(x) for x in solution))
    return coordinates


def gf2_rank(matrix: np.ndarray) -> int:
    '''Ранг матрицы над Z_2 (гауссово исключение с XOR строк)'''
    work = np.array(matrix, dtype=np.uint8) % 2
    if work.size == 0:
        return 0
    rows, cols = work.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        candidates = np.nonzero(work[r:, c])[0]
        if candidates.size == 0:
            continue
        pivot = r + candidates[0]
        if pivot != r:
            work[[r, pivot]] = work[[pivot, r]]
        below = np.nonzero(work[:, c])[0]
        for i in below:
            if i != r:
                work[i] ^= work[r]
        r += 1
    return r


def gf2_nullspace(matrix: np.ndarray) -> np.ndarray:
    '''
    Базис ядра матрицы над Z_2

    Returns:
        np.ndarray: базисные векторы ядра по строкам (uint8)
    '''
    work = np.array(matrix, dtype=np.uint8) % 2
    rows, cols = work.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        candidates = np.nonzero(work[r:, c])[0]
        if candidates.size == 0:
            continue
        pivot = r + candidates[0]
        if pivot != r:
            work[[r, pivot]] = work[[pivot, r]]
        for i in np.nonzero(work[:, c])[0]:
            if i != r:
                work[i] ^= work[r]
        pivots.append(c)
        r += 1
    pivot_set = set(pivots)
    free = [c for c in range(cols) if c not in pivot_set]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, c in enumerate(pivots):
            basis[k, c] = work[i, f]
    return basis


def gf2_in_rowspace(matrix: np.ndarray, vector: Iterable[int]) -> bool:
    vector = np.array(list(vector), dtype=np.uint8).reshape(1, -1)
    if matrix.size == 0:
        return not vector.any()
    return gf2_rank(np.vstack([matrix, vector])) == gf2_rank(matrix)
