import logging
from typing import Literal, Optional, Sequence

from pydantic import BaseModel, ConfigDict

from app.errors import ValidationFailed
from app.models.cone import LatticePolytope, RationalCone, Row
from app.models.relation import TernaryRelation
from app.services import linalg, lp
from app.services.cones import extreme_rays
from app.services.relations import generator_points

logger = logging.getLogger(__name__)


class Facet(BaseModel):
    """
    Гипергрань многогранника: неравенство offset + normal·x >= 0 и номера
    вершин (в списке вершин многогранника), на которых оно обращается в равенство
    """
    model_config = ConfigDict(frozen=True)

    offset: int
    normal: Row
    vertices: tuple[int, ...]


def ternary_polytope(rel: TernaryRelation) -> LatticePolytope:
    '''Тернарный многогранник P(T) как выпуклая оболочка порождающих точек'''
    points = tuple(point.coords for point in generator_points(rel))
    if not points:
        raise ValidationFailed("Отношение без троек не задает многогранник")
    return LatticePolytope(points=points)


def polytope_vertices(poly: LatticePolytope) -> list[Row]:
    '''
    Вершины многогранника: точка является вершиной, если она не лежит в выпуклой оболочке
    остальных (точное отделение через ЛП для каждой точки)

    Returns:
        List[Row]: вершины в лексикографическом порядке
    '''
    points = poly.distinct_points()
    vertices = []
    for k, point in enumerate(points):
        others = points[:k] + points[k + 1:]
        if not lp.in_convex_hull(point, others):
            vertices.append(point)
    logger.debug("Вершин %d из %d точек", len(vertices), len(points))
    return vertices


def dimension(poly: LatticePolytope) -> int:
    '''Размерность аффинной оболочки: ранг разностей с первой точкой'''
    points = poly.distinct_points()
    origin = points[0]
    differences = [tuple(a - b for a, b in zip(point, origin)) for point in points[1:]]
    return linalg.rank(differences, poly.ambient_dim)


def _lattice_vertices(poly: LatticePolytope) -> tuple[list[Row], list[Row]]:
    vertices = polytope_vertices(poly)
    return vertices, linalg.lattice_coordinates(vertices)


def _facets_full_dim(coords: Sequence[Row], max_rays: Optional[int] = None) -> list[Facet]:
    '''Гиперграни полноразмерного многогранника через лучи конуса над ним'''
    dim = len(coords[0])
    cone = RationalCone.from_rows([(1,) + tuple(c) for c in coords], dim=dim + 1)
    facets = []
    for ray in extreme_rays(cone, max_rays=max_rays).rays:
        offset, normal = ray[0], ray[1:]
        tight = tuple(i for i, c in enumerate(coords) if offset + sum(a * b for a, b in zip(normal, c)) == 0)
        facets.append(Facet(offset=offset, normal=normal, vertices=tight))
    return facets


def facets(poly: LatticePolytope, max_rays: Optional[int] = None) -> list[Facet]:
    '''
    Гиперграни многогранника в решеточных координатах его аффинной оболочки

    Returns:
        List[Facet]: номера вершин отсылают к polytope_vertices(poly)
    '''
    vertices, coords = _lattice_vertices(poly)
    if len(vertices) < 2:
        return []
    return _facets_full_dim(coords, max_rays=max_rays)


def _placing_volume(coords: list[Row]) -> int:
    '''
    Нормированный объем по размещающей триангуляции (beneath-beyond)

    Точки размещаются в лексикографическом порядке. Граница текущей оболочки
    хранится как набор ориентированных симплексов; новая точка образует симплексы
    со всеми видимыми из нее гранями границы.
    '''
    dim = len(coords[0])
    order = sorted(coords)

    start = [order[0]]
    for point in order[1:]:
        if len(start) == dim + 1:
            break
        candidate = start + [point]
        differences = [tuple(a - b for a, b in zip(q, candidate[0])) for q in candidate[1:]]
        if linalg.rank(differences, dim) == len(candidate) - 1:
            start.append(point)
    if len(start) < dim + 1:
        return 0

    def orientation(face: Sequence[Row], point: Sequence[int], scale: int = 1) -> int:
        base = face[0]
        matrix = [[a - b for a, b in zip(v, base)] for v in face[1:]]
        matrix.append([a - scale * b for a, b in zip(point, base)])
        return linalg.determinant(matrix)

    # центр начального симплекса (умноженный на dim + 1) остается внутри оболочки при ее росте
    scale = dim + 1
    inner = tuple(sum(col) for col in zip(*start))
    volume = abs(linalg.determinant([[a - b for a, b in zip(v, start[0])] for v in start[1:]]))
    boundary: list[tuple[Row, ...]] = [tuple(start[:i] + start[i + 1:]) for i in range(dim + 1)]
    inner_sign = {face: orientation(face, inner, scale) > 0 for face in boundary}

    placed = set(start)
    for point in order:
        if point in placed:
            continue
        placed.add(point)
        visible = []
        for face in boundary:
            value = orientation(face, point)
            if value != 0 and (value > 0) != inner_sign[face]:
                visible.append(face)
        if not visible:
            continue
        for face in visible:
            volume += abs(linalg.determinant([[a - b for a, b in zip(v, face[0])] for v in face[1:]] + [[a - b for a, b in zip(point, face[0])]]))

        visible_set = set(visible)
        ridge_count: dict[frozenset, int] = {}
        for face in visible:
            for i in range(len(face)):
                ridge = frozenset(face[:i] + face[i + 1:])
                ridge_count[ridge] = ridge_count.get(ridge, 0) + 1
        boundary = [face for face in boundary if face not in visible_set]
        for face in visible:
            for i in range(len(face)):
                ridge = face[:i] + face[i + 1:]
                if ridge_count[frozenset(ridge)] == 1:
                    new_face = ridge + (point,)
                    boundary.append(new_face)
                    inner_sign[new_face] = orientation(new_face, inner, scale) > 0
    return volume


def _pyramid_volume(
    coords: list[Row],
    ids: tuple[int, ...],
    memo: dict[frozenset, int],
    max_rays: Optional[int],
) -> int:
    '''
    Нормированный объем разбиением на пирамиды над гипергранями

    ν(P) = Σ h(c, F)·ν(F) по гиперграням F, не содержащим вершину c, где h:
    решеточное расстояние от c до гиперплоскости F. Объем грани не зависит от
    выбора координат, поэтому результаты кешируются по множеству вершин.
    '''
    key = frozenset(ids)
    if key in memo:
        return memo[key]
    dim = len(coords[0]) if coords else 0
    if dim == 0:
        result = 1
    elif dim == 1:
        values = [c[0] for c in coords]
        result = max(values) - min(values)
    else:
        apex = min(range(len(ids)), key=lambda i: ids[i])
        result = 0
        for facet in _facets_full_dim(coords, max_rays=max_rays):
            if apex in facet.vertices:
                continue
            height = facet.offset + sum(a * b for a, b in zip(facet.normal, coords[apex]))
            sub_points = [coords[i] for i in facet.vertices]
            sub_coords = linalg.lattice_coordinates(sub_points)
            sub_ids = tuple(ids[i] for i in facet.vertices)
            result += height * _pyramid_volume(sub_coords, sub_ids, memo, max_rays)
    memo[key] = result
    return result


def normalized_volume(
    poly: LatticePolytope,
    method: Literal["placing", "pyramid"] = "placing",
    max_rays: Optional[int] = None,
) -> int:
    '''
    Нормированный объем dim!·Vol в решетке Z^n ∩ aff(P)

    Вершины переводятся в координаты решетки аффинной оболочки (базис решетки
    строится целочисленной редукцией), после чего объем считается одним из
    двух независимых способов: размещающей триангуляцией или разбиением на
    пирамиды над гипергранями.

    Args:
        poly: решеточный многогранник
        method: "placing" или "pyramid"

    Returns:
        int: нормированный объем (для точки: 1)
    '''
    vertices, coords = _lattice_vertices(poly)
    if not coords or not coords[0]:
        return 1
    if method == "placing":
        return _placing_volume(coords)
    if method == "pyramid":
        return _pyramid_volume(coords, tuple(range(len(coords))), {}, max_rays)
    raise ValidationFailed(f"Неизвестный метод вычисления объема {method!r}")


def _facet_cycle(facet: Facet, vertex_facets: dict[int, set[int]]) -> list[int]:
    members = set(facet.vertices)
    neighbours = {
        v: sorted(u for u in members if u != v and len(vertex_facets[u] & vertex_facets[v]) >= 2)
        for v in members
    }
    start = min(members)
    cycle = [start]
    previous, current = None, start
    while True:
        nxt = next((u for u in neighbours[current] if u != previous), None)
        if nxt is None or nxt == start:
            break
        cycle.append(nxt)
        previous, current = current, nxt
    return cycle


def export_off(poly: LatticePolytope, max_rays: Optional[int] = None) -> str:
    '''
    Текст в формате OFF для трехмерного многогранника

    Вершины записываются в решеточных координатах аффинной оболочки. Вершины каждой
    гиперграни упорядочены по циклу ребер и ориентированы против часовой стрелки
    при взгляде снаружи.

    Raises:
        ValidationFailed: размерность многогранника не равна 3
    '''
    vertices, coords = _lattice_vertices(poly)
    if not coords or len(coords[0]) != 3:
        raise ValidationFailed(
            f"Экспорт OFF возможен только для трехмерных многогранников, размерность {len(coords[0]) if coords else 0}"
        )
    facet_list = _facets_full_dim(coords, max_rays=max_rays)
    vertex_facets: dict[int, set[int]] = {i: set() for i in range(len(coords))}
    for f, facet in enumerate(facet_list):
        for v in facet.vertices:
            vertex_facets[v].add(f)

    lines = ["OFF", f"{len(coords)} {len(facet_list)} 0"]
    lines += [" ".join(str(x) for x in c) for c in coords]
    for facet in facet_list:
        cycle = _facet_cycle(facet, vertex_facets)
        a, b, c = (coords[i] for i in cycle[:3])
        u = [y - x for x, y in zip(a, b)]
        v = [y - x for x, y in zip(a, c)]
        cross = (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])
        # внутренняя нормаль гиперграни: facet.normal
        if sum(x * y for x, y in zip(cross, facet.normal)) > 0:
            cycle = [cycle[0]] + cycle[1:][::-1]
        lines.append(" ".join([str(len(cycle))] + [str(i) for i in cycle]))
    return "\n".join(lines) + "\n"
