from functools import cached_property
from typing import Iterable

from pydantic import BaseModel, ConfigDict, field_validator


class Corner(BaseModel):
    """
    Угол треугольника: треугольник и неупорядоченная пара его ребер-граней.
    Углу соответствует неравенство x_e1 + x_e2 - x_e3 >= 0.
    """
    model_config = ConfigDict(frozen=True)

    triangle: str
    edges: tuple[str, str]

    @field_validator("edges")
    @classmethod
    def _distinct_pair(cls, edges: tuple[str, str]) -> tuple[str, str]:
        if edges[0] == edges[1]:
            raise ValueError("угол задается двумя различными ребрами")
        return tuple(sorted(edges))

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.triangle,) + self.edges


class Marking(BaseModel):
    """
    Разметка: множество углов посета (без повторов, в каноническом порядке)
    """
    model_config = ConfigDict(frozen=True)

    corners: tuple[Corner, ...] = ()

    @field_validator("corners")
    @classmethod
    def _canonical(cls, corners: tuple[Corner, ...]) -> tuple[Corner, ...]:
        unique = {corner.key: corner for corner in corners}
        return tuple(unique[key] for key in sorted(unique))

    @classmethod
    def of(cls, corners: Iterable[tuple[str, Iterable[str]]]) -> "Marking":
        '''Разметка из пар (треугольник, [ребро, ребро])'''
        return cls(corners=tuple(Corner(triangle=t, edges=tuple(pair)) for t, pair in corners))

    @cached_property
    def by_triangle(self) -> dict[str, tuple[Corner, ...]]:
        grouped: dict[str, list[Corner]] = {}
        for corner in self.corners:
            grouped.setdefault(corner.triangle, []).append(corner)
        return {t: tuple(items) for t, items in grouped.items()}

    @cached_property
    def keys(self) -> frozenset[tuple[str, str, str]]:
        return frozenset(corner.key for corner in self.corners)

    def is_one_marking(self) -> bool:
        '''Не более одного размеченного угла в каждом треугольнике'''
        return all(len(items) <= 1 for items in self.by_triangle.values())


class DivergenceReport(BaseModel):
    """
    Сравнение минимальных локально допустимых и минимальных допустимых разметок
    """
    model_config = ConfigDict(frozen=True)

    locally_minimal_count: int
    feasible_minimal_count: int
    # минимальны среди локально допустимых, но недопустимы
    loc_not_feasible: tuple[Marking, ...] = ()
    # минимальны среди допустимых, но не среди локально допустимых
    feasible_not_loc: tuple[Marking, ...] = ()
