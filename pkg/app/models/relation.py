from functools import cached_property
from typing import Iterable, Sequence

from pydantic import BaseModel, ConfigDict, ValidationInfo, field_validator, model_validator

Triple = tuple[int, int, int]


class TernaryRelation(BaseModel):
    """
    Симметричное тернарное отношение: конечное множество элементов и набор
    неупорядоченных троек попарно различных элементов.

    Элементы хранятся как непрозрачные строковые идентификаторы, тройки: как
    отсортированные тройки плотных индексов без повторов.
    """
    model_config = ConfigDict(frozen=True)

    elements: tuple[str, ...]
    triples: tuple[Triple, ...] = ()

    @field_validator("elements")
    @classmethod
    def _unique_elements(cls, elements: tuple[str, ...]) -> tuple[str, ...]:
        if len(set(elements)) != len(elements):
            raise ValueError("идентификаторы элементов должны быть уникальны")
        return elements

    @field_validator("triples")
    @classmethod
    def _canonical_triples(cls, triples: tuple[Triple, ...], info: ValidationInfo) -> tuple[Triple, ...]:
        n = len(info.data.get("elements", ()))
        canonical = set()
        for triple in triples:
            if len(set(triple)) != 3:
                raise ValueError(f"тройка {list(triple)} содержит повторяющийся элемент")
            if any(i < 0 or i >= n for i in triple):
                raise ValueError(f"тройка {list(triple)} ссылается на несуществующий элемент")
            canonical.add(tuple(sorted(triple)))
        return tuple(sorted(canonical))

    @classmethod
    def from_named(cls, elements: Sequence[str], triples: Iterable[Sequence[str]]) -> "TernaryRelation":
        '''
        Создает отношение по тройкам, заданным идентификаторами элементов

        Args:
            elements: упорядоченный список идентификаторов
            triples: тройки идентификаторов

        Returns:
            TernaryRelation: отношение с канонически упорядоченными тройками
        '''
        index = {name: i for i, name in enumerate(elements)}
        indexed = []
        for triple in triples:
            missing = [name for name in triple if name not in index]
            if missing:
                raise ValueError(f"тройка {list(triple)} ссылается на неизвестные элементы {missing}")
            indexed.append(tuple(index[name] for name in triple))
        return cls(elements=tuple(elements), triples=tuple(indexed))

    @property
    def size(self) -> int:
        return len(self.elements)

    @cached_property
    def index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.elements)}

    @cached_property
    def degrees(self) -> tuple[int, ...]:
        '''Число троек, содержащих каждый элемент'''
        counts = [0] * self.size
        for triple in self.triples:
            for i in triple:
                counts[i] += 1
        return tuple(counts)

    def named_triples(self) -> list[tuple[str, str, str]]:
        return [tuple(self.elements[i] for i in triple) for triple in self.triples]


class GeneratorPoint(BaseModel):
    """
    Порождающая точка тернарного многогранника: 1_i + 1_j - 1_k для тройки [i, j, k]
    """
    model_config = ConfigDict(frozen=True)

    coords: tuple[int, ...]
    # (номер тройки, индекс элемента с коэффициентом -1)
    source: tuple[int, int]

    @model_validator(mode="after")
    def _check_shape(self) -> "GeneratorPoint":
        nonzero = [c for c in self.coords if c]
        if sorted(nonzero) != [-1, 1, 1]:
            raise ValueError("точка должна иметь две координаты 1 и одну координату -1")
        if self.coords[self.source[1]] != -1:
            raise ValueError("отрицательная позиция источника не совпадает с координатами")
        return self
