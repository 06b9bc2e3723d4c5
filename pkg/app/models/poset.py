from collections import defaultdict
from fractions import Fraction
from functools import cached_property
from typing import Iterable

from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from app.models.rational import Rational


class Edge(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    ends: tuple[str, str]


class Triangle(BaseModel):
    model_config = ConfigDict(frozen=True)

    id: str
    edges: tuple[str, str, str]


class SimplicialPoset2(BaseModel):
    """
    Двумерный симплициальный посет: вершины, ребра с концами и треугольники
    с тремя ребрами-гранями. Кратные ребра допускаются, петли: нет.

    Граф представляется посетом с пустым списком треугольников. Модель проверяет
    только форму данных; комбинаторные условия проверяет services.posets.validate.
    """
    model_config = ConfigDict(frozen=True)

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...] = ()
    triangles: tuple[Triangle, ...] = ()

    @cached_property
    def edge_map(self) -> dict[str, Edge]:
        return {edge.id: edge for edge in self.edges}

    @cached_property
    def triangle_map(self) -> dict[str, Triangle]:
        return {triangle.id: triangle for triangle in self.triangles}

    @cached_property
    def edge_ids(self) -> tuple[str, ...]:
        return tuple(edge.id for edge in self.edges)

    @cached_property
    def edge_index(self) -> dict[str, int]:
        return {edge.id: i for i, edge in enumerate(self.edges)}

    @cached_property
    def vertex_index(self) -> dict[str, int]:
        return {vertex: i for i, vertex in enumerate(self.vertices)}

    @cached_property
    def triangles_of_edge(self) -> dict[str, tuple[str, ...]]:
        '''Треугольники, для которых ребро является гранью'''
        incidence: dict[str, list[str]] = {edge.id: [] for edge in self.edges}
        for triangle in self.triangles:
            for edge_id in triangle.edges:
                incidence.setdefault(edge_id, []).append(triangle.id)
        return {edge_id: tuple(ids) for edge_id, ids in incidence.items()}

    @cached_property
    def edges_between(self) -> dict[frozenset[str], tuple[str, ...]]:
        '''Все (возможно кратные) ребра между парой вершин'''
        pairs: dict[frozenset[str], list[str]] = defaultdict(list)
        for edge in self.edges:
            pairs[frozenset(edge.ends)].append(edge.id)
        return {pair: tuple(ids) for pair, ids in pairs.items()}

    @cached_property
    def third_edges(self) -> dict[frozenset[str], tuple[tuple[str, str], ...]]:
        '''
        Для неупорядоченной пары ребер: список (треугольник, третье ребро)
        по всем треугольникам, содержащим оба ребра
        '''
        lookup: dict[frozenset[str], list[tuple[str, str]]] = defaultdict(list)
        for triangle in self.triangles:
            a, b, c = triangle.edges
            for x, y, z in ((a, b, c), (a, c, b), (b, c, a)):
                lookup[frozenset((x, y))].append((triangle.id, z))
        return {pair: tuple(items) for pair, items in lookup.items()}

    def ends(self, edge_id: str) -> tuple[str, str]:
        return self.edge_map[edge_id].ends

    def triangle_vertices(self, triangle_id: str) -> frozenset[str]:
        return frozenset(v for e in self.triangle_map[triangle_id].edges for v in self.ends(e))

    @property
    def is_graph(self) -> bool:
        return not self.triangles

    @cached_property
    def triangle_free_edges(self) -> tuple[str, ...]:
        return tuple(e for e in self.edge_ids if not self.triangles_of_edge.get(e))

    @property
    def is_pure(self) -> bool:
        '''Все максимальные симплексы имеют размерность посета'''
        if self.triangles:
            covered = {v for edge in self.edges if self.triangles_of_edge[edge.id] for v in edge.ends}
            return not self.triangle_free_edges and covered == set(self.vertices)
        if self.edges:
            return {v for edge in self.edges for v in edge.ends} == set(self.vertices)
        return True


class Subgraph(BaseModel):
    """
    Подграф одномерного остова посета: набор ребер и набор вершин. Если
    vertices не указаны, CLI берет концы ребер (Subgraph.from_edges).
    """
    model_config = ConfigDict(frozen=True)

    edges: tuple[str, ...]
    vertices: tuple[str, ...] = ()

    @field_validator("edges", "vertices")
    @classmethod
    def _sorted_unique(cls, values: tuple[str, ...]) -> tuple[str, ...]:
        return tuple(sorted(set(values)))

    @classmethod
    def from_edges(cls, poset: SimplicialPoset2, edges: Iterable[str]) -> "Subgraph":
        '''Подграф, вершины которого: концы переданных ребер'''
        edges = tuple(edges)
        unknown = [e for e in edges if e not in poset.edge_map]
        if unknown:
            raise ValueError(f"ребра {unknown} отсутствуют в посете")
        vertices = {v for e in edges for v in poset.ends(e)}
        return cls(edges=edges, vertices=tuple(vertices))

    @cached_property
    def edge_set(self) -> frozenset[str]:
        return frozenset(self.edges)


class VectorConfiguration(BaseModel):
    """
    Конфигурация векторов {±α_i}: каждый представитель пары ±α_i указан один раз
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dim: int
    vectors: dict[str, tuple[Rational, ...]]

    @model_validator(mode="after")
    def _check_vectors(self) -> "VectorConfiguration":
        if self.dim < 1:
            raise ValueError("размерность должна быть положительной")
        seen: dict[tuple[Fraction, ...], str] = {}
        for name, vector in self.vectors.items():
            if len(vector) != self.dim:
                raise ValueError(f"вектор {name} имеет длину {len(vector)}, ожидалось {self.dim}")
            if not any(vector):
                raise ValueError(f"вектор {name} нулевой")
            key = sign_class(vector)
            if key in seen:
                raise ValueError(f"векторы {seen[key]} и {name} совпадают или противоположны")
            seen[key] = name
        return self

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self.vectors)


def sign_class(vector: Iterable[Fraction]) -> tuple[Fraction, ...]:
    '''Представитель класса {v, -v}: первая ненулевая координата положительна'''
    vector = tuple(Fraction(x) for x in vector)
    for x in vector:
        if x:
            return vector if x > 0 else tuple(-y for y in vector)
    return vector
