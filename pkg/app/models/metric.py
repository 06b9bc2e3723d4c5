from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.marking import Corner
from app.models.rational import Rational


class Walk(BaseModel):
    """
    Путь на посете: последовательность ребер e1..en и вершин v1..v(n+1),
    ребро e_i соединяет v_i и v_(i+1). Повторы ребер и вершин допускаются.
    """
    model_config = ConfigDict(frozen=True)

    edges: tuple[str, ...]
    vertices: tuple[str, ...]

    @model_validator(mode="after")
    def _check_lengths(self) -> "Walk":
        if not self.edges:
            raise ValueError("путь должен содержать хотя бы одно ребро")
        if len(self.vertices) != len(self.edges) + 1:
            raise ValueError(
                f"путь из {len(self.edges)} ребер должен проходить {len(self.edges) + 1} вершин, "
                f"указано {len(self.vertices)}"
            )
        return self

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def is_closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    def __add__(self, other: "Walk") -> "Walk":
        '''Конкатенация путей p ∪ p′'''
        if self.vertices[-1] != other.vertices[0]:
            raise ValueError("конец первого пути не совпадает с началом второго")
        return Walk(edges=self.edges + other.edges, vertices=self.vertices + other.vertices[1:])

    def reversed(self) -> "Walk":
        return Walk(edges=self.edges[::-1], vertices=self.vertices[::-1])


class PosetMetric(BaseModel):
    """
    Функция на ребрах посета с неотрицательными рациональными значениями
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    values: dict[str, Rational]

    @model_validator(mode="after")
    def _check_nonnegative(self) -> "PosetMetric":
        negative = sorted(e for e, v in self.values.items() if v < 0)
        if negative:
            raise ValueError(f"значения на ребрах {negative} отрицательны")
        return self

    def __getitem__(self, edge_id: str):
        return self.values[edge_id]

    def vector(self, edge_ids) -> tuple:
        return tuple(self.values[e] for e in edge_ids)

    def is_zero(self) -> bool:
        return not any(self.values.values())


class IcColoring(BaseModel):
    """
    Разбиение ребер подграфа на цветовые классы и журнал объединений
    """
    model_config = ConfigDict(frozen=True)

    classes: tuple[tuple[str, ...], ...]
    # пары противоположных ребер, объединенные процедурой, в отсортированном порядке
    merges: tuple[tuple[str, str], ...] = ()
    cycle_bound: int
    # рассмотрены все четные циклы подграфа (граница не меньше числа его вершин)
    complete: bool

    @property
    def count(self) -> int:
        return len(self.classes)


class ExtremalityCertificate(BaseModel):
    """
    Сертификат экстремальности метрики: набор обращающихся в равенство строк и
    размерность пространства решений соответствующей однородной системы
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    extreme: bool
    kernel_dim: int = Field(ge=0)
    tight_corners: tuple[Corner, ...] = ()
    tight_nonnegative: tuple[str, ...] = ()
    kernel_basis: Optional[tuple[tuple[Rational, ...], ...]] = None
