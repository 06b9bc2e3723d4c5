import sys
from typing import Any, Optional, Type, TypeVar

import ujson
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from app.errors import ValidationFailed
from app.models.cone import ConeRays, Row
from app.models.marking import Corner, Marking
from app.models.metric import PosetMetric, Walk
from app.models.rational import Rational
from app.models.relation import TernaryRelation

ModelT = TypeVar("ModelT", bound=BaseModel)


class RelationDocument(BaseModel):
    """
    Тернарное отношение в файле: тройки задаются идентификаторами элементов
    """
    model_config = ConfigDict(frozen=True)

    elements: list[str]
    triples: list[tuple[str, str, str]] = []

    @classmethod
    def from_relation(cls, rel: TernaryRelation) -> "RelationDocument":
        '''Канонический документ: элементы и тройки отсортированы лексикографически'''
        triples = sorted(tuple(sorted(triple)) for triple in rel.named_triples())
        return cls(elements=sorted(rel.elements), triples=triples)

    def to_relation(self) -> TernaryRelation:
        try:
            return TernaryRelation.from_named(self.elements, self.triples)
        except (ValueError, ValidationError) as exc:
            raise ValidationFailed(f"Некорректное отношение: {exc}") from exc


class ConeDocument(BaseModel):
    """Конус {x : A·x >= 0} в файле"""
    model_config = ConfigDict(frozen=True)

    dim: int = Field(ge=0)
    hrep: list[Row]


class RaysReport(BaseModel):
    dim: int
    count: int
    rays: list[Row]
    lineality: list[Row] = []

    @classmethod
    def from_rays(cls, dim: int, result: ConeRays) -> "RaysReport":
        return cls(dim=dim, count=len(result.rays), rays=list(result.rays), lineality=list(result.lineality))


class VerticesReport(BaseModel):
    dimension: int
    count: int
    vertices: list[Row]


class VolumeReport(BaseModel):
    dimension: int
    method: str
    normalized_volume: int


class FacetEntry(BaseModel):
    offset: int
    normal: Row
    vertices: list[int]


class FacetsReport(BaseModel):
    dimension: int
    count: int
    vertices: list[Row]
    # гиперграни в решеточных координатах аффинной оболочки
    facets: list[FacetEntry]


class MarkingEntry(BaseModel):
    marking: Marking
    # луч двойственного конуса или 0/1 коцикл, породивший разметку
    witness: list[int]


class MarkingsReport(BaseModel):
    count: int
    markings: list[MarkingEntry]


class MarkingCheckReport(BaseModel):
    one_marking: bool
    locally_feasible: bool
    feasible: bool
    witness: Optional[list[Rational]] = None
    cocycle: Optional[list[int]] = None


class CutsetsReport(BaseModel):
    basis: list[list[str]]
    minimal: list[list[str]]
    count: int


class DivergenceDocument(BaseModel):
    locally_minimal_count: int
    feasible_minimal_count: int
    loc_not_feasible: list[Marking]
    feasible_not_loc: list[Marking]


class GraphMetricReport(BaseModel):
    bypassing: bool
    metric: PosetMetric
    walks: Optional[dict[str, Walk]] = None


class ExtremalityReport(BaseModel):
    extreme: bool
    kernel_dim: int
    tight_corners: list[Corner]
    tight_nonnegative: list[str]
    kernel_basis: list[list[Rational]] = []


class IcColorReport(BaseModel):
    count: int
    complete: bool
    cycle_bound: int
    classes: list[list[str]]
    merges: list[tuple[str, str]]


class IsoReport(BaseModel):
    isomorphic: bool
    bijection: Optional[dict[str, str]] = None


def _location(error: dict) -> str:
    return ".".join(str(part) for part in error.get("loc", ())) or "<документ>"


def read_payload(path: Optional[str]) -> tuple[Any, str]:
    '''
    Читает JSON из файла или из stdin (path отсутствует или "-")

    Raises:
        ValidationFailed: файл не найден или не является JSON
    '''
    name = "<stdin>" if path in (None, "-") else path
    try:
        if name == "<stdin>":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as handle:
                text = handle.read()
    except OSError as exc:
        raise ValidationFailed(f"{name}: не удалось прочитать файл ({exc.strerror})") from exc
    try:
        return ujson.loads(text), name
    except ValueError as exc:
        raise ValidationFailed(f"{name}: некорректный JSON ({exc})") from exc


def parse_document(model: Type[ModelT], payload: Any, name: str) -> ModelT:
    '''
    Проверка данных моделью; ошибка pydantic превращается в ValidationFailed
    с именем файла, путем к полю и сообщением
    '''
    try:
        return model.model_validate(payload)
    except ValidationError as exc:
        details = "; ".join(f"{_location(error)}: {error['msg']}" for error in exc.errors())
        raise ValidationFailed(f"{name}: {details}") from exc


def load_document(model: Type[ModelT], path: Optional[str]) -> ModelT:
    payload, name = read_payload(path)
    return parse_document(model, payload, name)
