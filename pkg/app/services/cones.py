import logging
from fractions import Fraction
from typing import TYPE_CHECKING, Optional, Sequence

from pydantic import ValidationError

from app.config import settings
from app.errors import LimitExceeded
from app.models.cone import ConeRays, RationalCone, Row
from app.models.rational import primitive_vector
from app.services import linalg

if TYPE_CHECKING:
    from app.cache import RayCache

logger = logging.getLogger(__name__)


def _evaluate(row: Row, ray: Row) -> int:
    return sum(a * b for a, b in zip(row, ray) if a)


def _insertion_order(rows: Sequence[Row]) -> list[int]:
    # строки с наибольшим числом нулей первыми, далее лексикографически
    return sorted(range(len(rows)), key=lambda k: (-rows[k].count(0), rows[k]))


def _canonical_rows(hrep: Sequence[Row]) -> list[Row]:
    return sorted({tuple(row) for row in hrep if any(row)})


def _row_space_basis(rows: Sequence[Row], dim: int) -> list[Row]:
    '''Целочисленный базис пространства строк: ненулевые строки ступенчатого вида'''
    reduced, pivots = linalg.to_matrix(rows, dim).rref()
    return [primitive_vector(linalg.to_fraction(x) for x in reduced.row(i)) for i in range(len(pivots))]


def _double_description(rows: list[Row], rank: int, max_rays: int) -> list[Row]:
    '''
    Метод двойного описания для заостренного конуса {y : B·y >= 0}, rank(B) = dim y

    Начальный симплициальный конус строится по rank независимым строкам, остальные
    строки вставляются по одной. Новые лучи порождаются только смежными парами
    (положительный, отрицательный); смежность проверяется комбинаторно по
    множествам обращающихся в нуль строк, которые хранятся битовыми масками.
    '''
    order = _insertion_order(rows)
    ordered = [rows[k] for k in order]
    initial = linalg.independent_rows(ordered, rank)
    basis_rows = [ordered[k] for k in initial]

    # лучи начального конуса: столбцы обратной матрицы
    rays: list[Row] = []
    zeros: list[int] = []
    for k in range(rank):
        unit = [Fraction(int(i == k)) for i in range(rank)]
        ray = primitive_vector(linalg.solve_square(basis_rows, unit))
        rays.append(ray)
        zeros.append(sum(1 << initial[i] for i in range(rank) if i != k))

    chosen = set(initial)
    remaining = [k for k in range(len(ordered)) if k not in chosen]
    for step, k in enumerate(remaining, start=1):
        row = ordered[k]
        values = [_evaluate(row, ray) for ray in rays]
        positive = [i for i, v in enumerate(values) if v > 0]
        negative = [i for i, v in enumerate(values) if v < 0]
        if not negative:
            zeros = [z | (1 << k) if values[i] == 0 else z for i, z in enumerate(zeros)]
            continue

        new_rays: list[Row] = []
        new_zeros: list[int] = []
        for p in positive:
            for q in negative:
                common = zeros[p] & zeros[q]
                if bin(common).count("1") < rank - 2:
                    continue
                if any(
                    t != p and t != q and common & zeros[t] == common
                    for t in range(len(rays))
                ):
                    continue
                vp, vq = values[p], values[q]
                combined = tuple(vp * b - vq * a for a, b in zip(rays[p], rays[q]))
                new_rays.append(primitive_vector(combined))
                new_zeros.append(common | (1 << k))

        kept = [i for i, v in enumerate(values) if v >= 0]
        rays = [rays[i] for i in kept] + new_rays
        zeros = [zeros[i] | (1 << k) if values[i] == 0 else zeros[i] for i in kept] + new_zeros
        logger.debug("Строка %d/%d: %d лучей", step, len(remaining), len(rays))
        if len(rays) > max_rays:
            raise LimitExceeded(f"Число промежуточных лучей {len(rays)} превысило предел {max_rays}")
    return rays


def extreme_rays(
    cone: RationalCone,
    max_rays: Optional[int] = None,
    max_rows: Optional[int] = None,
) -> ConeRays:
    '''
    Экстремальные лучи конуса {x : A·x >= 0} и базис пространства линейности

    Пространство линейности ker(A) отделяется заранее: двойное описание
    выполняется в координатах пространства строк, где конус заострен.
    Строки канонизируются, поэтому результат не зависит от их порядка.

    Args:
        cone: конус в H-представлении
        max_rays: предел числа промежуточных лучей (по умолчанию из настроек)
        max_rows: предел числа строк (по умолчанию из настроек)

    Returns:
        ConeRays: примитивные лучи в лексикографическом порядке и базис линейности

    Raises:
        LimitExceeded: превышен предел строк или лучей
    '''
    max_rays = settings.MAX_RAYS if max_rays is None else max_rays
    max_rows = settings.MAX_ROWS if max_rows is None else max_rows
    if len(cone.hrep) > max_rows:
        raise LimitExceeded(f"Число строк {len(cone.hrep)} превышает предел {max_rows}")

    dim = cone.dim
    rows = _canonical_rows(cone.hrep)
    lineality = tuple(sorted(primitive_vector(v) for v in linalg.nullspace(rows, dim)))
    if not rows:
        return ConeRays(rays=(), lineality=lineality)

    basis = _row_space_basis(rows, dim)
    rank = len(basis)
    projected = [tuple(_evaluate(row, w) for w in basis) for row in rows]
    reduced_rays = _double_description(projected, rank, max_rays)

    rays = set()
    for y in reduced_rays:
        x = [sum(y[i] * basis[i][c] for i in range(rank)) for c in range(dim)]
        rays.add(primitive_vector(x))
    logger.debug("Конус размерности %d: %d строк, %d лучей, линейность %d", dim, len(rows), len(rays), len(lineality))
    return ConeRays(rays=tuple(sorted(rays)), lineality=lineality)


class ConeService:
    """
    Вычисление экстремальных лучей с обращением к кешу по хешу H-представления
    """

    def __init__(
        self,
        cache: Optional["RayCache"] = None,
        max_rays: Optional[int] = None,
        max_rows: Optional[int] = None,
    ):
        self.cache = cache
        self.max_rays = max_rays
        self.max_rows = max_rows

    def rays(self, cone: RationalCone) -> ConeRays:
        '''
        Лучи конуса: из кеша, если запись есть и корректна, иначе вычисление и запись

        Args:
            cone: конус в H-представлении

        Returns:
            ConeRays: V-представление
        '''
        if self.cache is None:
            return extreme_rays(cone, max_rays=self.max_rays, max_rows=self.max_rows)

        key = self.cache.key_for(cone.hrep, cone.dim)
        cached = self.cache.get(key)
        if cached is not None:
            try:
                result = ConeRays.model_validate(cached)
                if self._consistent(cone, result):
                    logger.info("Лучи конуса взяты из кеша (%s)", key[:12])
                    return result
            except (ValidationError, TypeError):
                pass
            logger.warning("Запись кеша %s повреждена, выполняется пересчет", key[:12])

        result = extreme_rays(cone, max_rays=self.max_rays, max_rows=self.max_rows)
        self.cache.set(key, result.model_dump(mode="json"))
        logger.info("Лучи конуса вычислены и сохранены в кеш (%s)", key[:12])
        return result

    @staticmethod
    def _consistent(cone: RationalCone, result: ConeRays) -> bool:
        # запись должна описывать векторы нужной длины внутри конуса
        for ray in result.rays + result.lineality:
            if len(ray) != cone.dim:
                return False
        return all(_evaluate(row, ray) >= 0 for row in cone.hrep for ray in result.rays)
