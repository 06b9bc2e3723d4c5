import logging
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence

import networkx as nx
import numpy as np

from app.config import settings
from app.errors import LimitExceeded, ValidationFailed
from app.models.cone import RationalCone, Row
from app.models.marking import Corner, DivergenceReport, Marking
from app.models.poset import SimplicialPoset2
from app.services import linalg, lp
from app.services.cones import ConeService
from app.services.posets import ensure_valid, skeleton_graph, ternary_relation
from app.services.relations import dual_cone_hrep

logger = logging.getLogger(__name__)

Cochain = tuple[int, ...]


@dataclass
class Z2Complex:
    """
    Цепной комплекс посета над Z_2: матрицы граничных операторов ∂2 (ребра × треугольники)
    и ∂1 (вершины × ребра); кограничные операторы: их транспонирования
    """
    poset: SimplicialPoset2
    boundary2: np.ndarray
    boundary1: np.ndarray

    @classmethod
    def from_poset(cls, p: SimplicialPoset2) -> "Z2Complex":
        ensure_valid(p)
        boundary2 = np.zeros((len(p.edges), len(p.triangles)), dtype=np.uint8)
        for j, triangle in enumerate(p.triangles):
            for edge_id in triangle.edges:
                boundary2[p.edge_index[edge_id], j] ^= 1
        boundary1 = np.zeros((len(p.vertices), len(p.edges)), dtype=np.uint8)
        for j, edge in enumerate(p.edges):
            for vertex in edge.ends:
                boundary1[p.vertex_index[vertex], j] ^= 1
        if ((boundary1.astype(np.int64) @ boundary2.astype(np.int64)) % 2).any():
            raise ValidationFailed("Граница границы не равна нулю: посет некорректен")
        return cls(poset=p, boundary2=boundary2, boundary1=boundary1)

    @property
    def coboundary0(self) -> np.ndarray:
        return self.boundary1.T

    @property
    def coboundary1(self) -> np.ndarray:
        return self.boundary2.T

    def cocycle_matrix(self) -> np.ndarray:
        '''
        Система, задающая рассматриваемые коциклы: строки ∂¹ и единичные строки
        ребер, не лежащих ни в одном треугольнике (на них коцикл равен нулю)
        '''
        p = self.poset
        free = np.zeros((len(p.triangle_free_edges), len(p.edges)), dtype=np.uint8)
        for k, edge_id in enumerate(p.triangle_free_edges):
            free[k, p.edge_index[edge_id]] = 1
        return np.vstack([self.coboundary1, free]) if free.size else self.coboundary1

    def cocycle_basis(self) -> np.ndarray:
        return linalg.gf2_nullspace(self.cocycle_matrix())

    def first_cohomology_rank(self) -> int:
        '''dim H¹(P, Z_2) = dim ker ∂¹ - rank ∂⁰'''
        n_edges = len(self.poset.edges)
        kernel = n_edges - linalg.gf2_rank(self.coboundary1)
        return kernel - linalg.gf2_rank(self.coboundary0)

    def is_cocycle(self, delta: Sequence[int]) -> bool:
        vector = np.array(delta, dtype=np.int64) % 2
        return not ((self.cocycle_matrix().astype(np.int64) @ vector) % 2).any()

    def is_minimal_cocycle(self, delta: Sequence[int]) -> bool:
        '''
        Ненулевой коцикл минимален по носителю, если столбцы системы на носителе
        имеют одномерное ядро (им является сам коцикл)
        '''
        support = [i for i, v in enumerate(delta) if v % 2]
        if not support:
            return False
        return linalg.gf2_rank(self.cocycle_matrix()[:, support]) == len(support) - 1


def all_corners(p: SimplicialPoset2) -> list[Corner]:
    return [
        Corner(triangle=triangle.id, edges=pair)
        for triangle in p.triangles
        for pair in combinations(triangle.edges, 2)
    ]


def _third_edge(p: SimplicialPoset2, corner: Corner) -> str:
    triangle = p.triangle_map[corner.triangle]
    return next(e for e in triangle.edges if e not in corner.edges)


def corner_row(p: SimplicialPoset2, corner: Corner) -> Row:
    '''Строка неравенства угла x_e1 + x_e2 - x_e3 >= 0 в координатах ребер посета'''
    row = [0] * len(p.edges)
    for edge_id in corner.edges:
        row[p.edge_index[edge_id]] += 1
    row[p.edge_index[_third_edge(p, corner)]] -= 1
    return tuple(row)


def check_marking(m: Marking, p: SimplicialPoset2) -> None:
    '''
    Raises:
        ValidationFailed: разметка содержит углы, которых нет в посете
    '''
    for corner in m.corners:
        triangle = p.triangle_map.get(corner.triangle)
        if triangle is None:
            raise ValidationFailed(f"Угол ссылается на неизвестный треугольник {corner.triangle}")
        if not set(corner.edges) <= set(triangle.edges):
            raise ValidationFailed(
                f"Ребра {list(corner.edges)} не являются гранями треугольника {corner.triangle}"
            )


def marked_along(m: Marking, p: SimplicialPoset2) -> dict[str, set[str]]:
    '''Для каждого ребра: треугольники, размеченные вдоль него'''
    along: dict[str, set[str]] = {e: set() for e in p.edge_ids}
    for corner in m.corners:
        for edge_id in corner.edges:
            along[edge_id].add(corner.triangle)
    return along


def is_locally_feasible(m: Marking, p: SimplicialPoset2) -> bool:
    '''
    Локальная допустимость: для каждого ребра e все треугольники, содержащие e,
    размечены вдоль e, либо ни один из них
    '''
    check_marking(m, p)
    for edge_id, triangles in marked_along(m, p).items():
        if triangles and triangles != set(p.triangles_of_edge[edge_id]):
            return False
    return True


def marked_edges(m: Marking, p: SimplicialPoset2) -> set[str]:
    return {edge_id for edge_id, triangles in marked_along(m, p).items() if triangles}


def is_feasible(m: Marking, p: SimplicialPoset2) -> Optional[tuple]:
    '''
    Допустимость разметки: строки размеченных углов строгие, остальные обращаются в равенства

    Returns:
        Optional[tuple]: рациональный свидетель из P(P)^∨_M или None
    '''
    check_marking(m, p)
    strict, eq = [], []
    for corner in all_corners(p):
        (strict if corner.key in m.keys else eq).append(corner_row(p, corner))
    return lp.strict_feasible(eq, strict, len(p.edges))


def marking_of_ray(ray: Sequence, p: SimplicialPoset2) -> Marking:
    '''Разметка луча: углы, неравенства которых строго положительны на луче'''
    if len(ray) != len(p.edges):
        raise ValidationFailed(f"Длина луча {len(ray)} не совпадает с числом ребер {len(p.edges)}")
    corners = [
        corner for corner in all_corners(p)
        if sum(a * b for a, b in zip(corner_row(p, corner), ray)) > 0
    ]
    return Marking(corners=tuple(corners))


def dual_cone(p: SimplicialPoset2) -> RationalCone:
    '''Двойственный конус P(P)^∨ в координатах ребер посета'''
    rel = ternary_relation(p)
    return RationalCone(dim=rel.size, hrep=dual_cone_hrep(rel))


def minimal_feasible_markings(
    p: SimplicialPoset2,
    service: Optional[ConeService] = None,
) -> list[tuple[Marking, Row]]:
    '''
    Минимальные допустимые разметки: разметки экстремальных лучей P(P)^∨

    Returns:
        List[tuple[Marking, Row]]: разметка и порождающий ее луч, в каноническом порядке
    '''
    service = service or ConeService()
    rays = service.rays(dual_cone(p)).rays
    found: dict[tuple, tuple[Marking, Row]] = {}
    for ray in rays:
        marking = marking_of_ray(ray, p)
        found.setdefault(_marking_key(marking), (marking, ray))
    return [found[key] for key in sorted(found)]


def _marking_key(m: Marking) -> tuple:
    return tuple(corner.key for corner in m.corners)


def marking_to_cocycle(m: Marking, p: SimplicialPoset2) -> Cochain:
    '''
    Отображение f: M¹_loc -> ker ∂¹, f(M): индикатор размеченных ребер

    Raises:
        ValidationFailed: разметка не из M¹_loc
    '''
    if not m.is_one_marking():
        raise ValidationFailed("Разметка содержит треугольник с несколькими размеченными углами")
    if not is_locally_feasible(m, p):
        raise ValidationFailed("Разметка не является локально допустимой")
    marked = marked_edges(m, p)
    return tuple(int(e in marked) for e in p.edge_ids)


def cocycle_to_marking(delta: Sequence[int], p: SimplicialPoset2, complex_: Optional[Z2Complex] = None) -> Marking:
    '''
    Обратное отображение f⁻¹: угол (Δ, [e1, e2]) размечен, если коцикл отличен
    от нуля ровно на e1 и e2 среди ребер Δ

    Raises:
        ValidationFailed: δ не является коциклом
    '''
    complex_ = complex_ or Z2Complex.from_poset(p)
    if len(delta) != len(p.edges) or not complex_.is_cocycle(delta):
        raise ValidationFailed("Коцепь не лежит в ker ∂¹ (или не равна нулю на ребрах вне треугольников)")
    corners = []
    for triangle in p.triangles:
        support = [e for e in triangle.edges if delta[p.edge_index[e]] % 2]
        if len(support) == 2:
            corners.append(Corner(triangle=triangle.id, edges=tuple(support)))
    return Marking(corners=tuple(corners))


def _iterate_kernel(basis: np.ndarray) -> Iterable[np.ndarray]:
    # код Грея: каждый следующий элемент отличается одним базисным вектором
    k = basis.shape[0]
    current = np.zeros(basis.shape[1], dtype=np.uint8)
    for i in range(1, 2 ** k):
        bit = (i & -i).bit_length() - 1
        current = current ^ basis[bit]
        yield current


def one_marking_minimals(
    p: SimplicialPoset2,
    limit: Optional[int] = None,
) -> list[tuple[Marking, Cochain]]:
    '''
    Минимальные разметки из M¹_loc через минимальные по носителю ненулевые коциклы

    При dim ker ≤ limit ядро перебирается полностью; иначе, если H¹ = 0 и все
    ребра лежат в треугольниках, минимальные коциклы: минимальные разрезы
    одномерного остова.

    Returns:
        List[tuple[Marking, Cochain]]: разметка и ее 0/1 свидетель f(M)

    Raises:
        LimitExceeded: пространство коциклов слишком велико для перебора
    '''
    limit = settings.KERNEL_ENUM_LIMIT if limit is None else limit
    complex_ = Z2Complex.from_poset(p)
    basis = complex_.cocycle_basis()
    dim = basis.shape[0]
    cocycles: list[Cochain] = []
    if dim <= limit:
        logger.debug("Перебор ядра размерности %d", dim)
        for delta in _iterate_kernel(basis):
            if complex_.is_minimal_cocycle(delta):
                cocycles.append(tuple(int(v) for v in delta))
    elif not p.triangle_free_edges and complex_.first_cohomology_rank() == 0:
        logger.debug("H¹ = 0: минимальные коциклы берутся из минимальных разрезов")
        for cutset in minimal_cutsets(p):
            members = set(cutset)
            cocycles.append(tuple(int(e in members) for e in p.edge_ids))
    else:
        raise LimitExceeded(
            f"Размерность пространства коциклов {dim} превышает предел перебора {limit}, а H¹ ≠ 0"
        )

    result = [(cocycle_to_marking(delta, p, complex_), delta) for delta in cocycles]
    return sorted(result, key=lambda item: _marking_key(item[0]))


def cutset_of(graph: SimplicialPoset2, side: Iterable[str]) -> tuple[str, ...]:
    '''Разрез H({S, S̄}): ребра с концами по разные стороны разбиения'''
    side = set(side)
    return tuple(sorted(e.id for e in graph.edges if (e.ends[0] in side) != (e.ends[1] in side)))


def cut_space(graph: SimplicialPoset2) -> list[tuple[str, ...]]:
    '''
    Базис пространства разрезов над Z_2: звезды всех вершин, кроме одной
    в каждой компоненте связности
    '''
    nx_graph = skeleton_graph(graph)
    basis = []
    for component in sorted(nx.connected_components(nx_graph), key=min):
        for vertex in sorted(component)[1:]:
            star = cutset_of(graph, [vertex])
            if star:
                basis.append(star)
    return basis


def _connected_sets(nx_graph: nx.MultiGraph, root: str, allowed: set[str]) -> Iterable[frozenset[str]]:
    '''Все связные множества вершин, содержащие root (каждое ровно один раз)'''

    def grow(current: frozenset, candidates: frozenset, excluded: frozenset):
        if not candidates:
            yield current
            return
        vertex = min(candidates)
        rest = candidates - {vertex}
        yield from grow(current, rest, excluded | {vertex})
        included = current | {vertex}
        fresh = {
            u for u in nx_graph.neighbors(vertex)
            if u in allowed and u not in included and u not in excluded
        }
        yield from grow(included, rest | fresh, excluded)

    start = frozenset({root})
    neighbours = frozenset(u for u in nx_graph.neighbors(root) if u in allowed and u != root)
    yield from grow(start, neighbours, frozenset())


def minimal_cutsets(graph: SimplicialPoset2) -> list[tuple[str, ...]]:
    '''
    Минимальные разрезы одномерного остова: H({S, S̄}) минимален, если G_S и G_S̄
    связны (для каждой компоненты связности отдельно)
    '''
    nx_graph = skeleton_graph(graph)
    cutsets = set()
    for component in nx.connected_components(nx_graph):
        if len(component) < 2:
            continue
        root = min(component)
        for side in _connected_sets(nx_graph, root, set(component)):
            other = set(component) - side
            if other and nx.is_connected(nx_graph.subgraph(other)):
                cutsets.add(cutset_of(graph, side))
    return sorted(cutsets)


def _admissible(chosen: set[str], p: SimplicialPoset2) -> bool:
    return all(sum(e in chosen for e in t.edges) != 1 for t in p.triangles)


def locally_minimal_markings(p: SimplicialPoset2, limit: int = 16) -> list[Marking]:
    '''
    Минимальные элементы множества непустых локально допустимых разметок

    Разметка определяется множеством размеченных ребер E' (ни один треугольник не
    содержит ровно одно ребро из E') и выбором двух углов в каждом треугольнике,
    целиком лежащем в E'. Минимальность проверяется как задача удовлетворения
    ограничений: каждое меньшее допустимое E'' должно быть исключено выбором углов.

    Raises:
        LimitExceeded: число ребер больше limit
    '''
    edges = list(p.edge_ids)
    if len(edges) > limit:
        raise LimitExceeded(f"Перебор множеств ребер: {len(edges)} ребер превышает предел {limit}")
    admissible = []
    for mask in range(1, 2 ** len(edges)):
        chosen = {edges[i] for i in range(len(edges)) if mask >> i & 1}
        if _admissible(chosen, p):
            admissible.append((mask, chosen))

    result = []
    for mask, chosen in admissible:
        partial, full = [], []
        for triangle in p.triangles:
            inside = tuple(sorted(e for e in triangle.edges if e in chosen))
            if len(inside) == 2:
                partial.append((triangle.id, inside))
            elif len(inside) == 3:
                full.append(triangle)
        full_index = {t.id: i for i, t in enumerate(full)}

        # для каждого меньшего E'': пары (номер полного треугольника, запрещенная к пропуску пара)
        constraints: list[list[tuple[int, tuple[str, str]]]] = []
        blocked = False
        for sub_mask, sub in admissible:
            if sub_mask == mask or sub_mask & ~mask:
                continue
            rules = []
            for t in full:
                inside = tuple(sorted(e for e in t.edges if e in sub))
                if len(inside) == 2:
                    rules.append((full_index[t.id], inside))
            if not rules:
                blocked = True
                break
            constraints.append(rules)
        if blocked:
            continue

        for omitted in _omission_choices(full, constraints):
            corners = [Corner(triangle=t, edges=pair) for t, pair in partial]
            for t, skip in zip(full, omitted):
                corners += [Corner(triangle=t.id, edges=pair) for pair in combinations(sorted(t.edges), 2) if pair != skip]
            result.append(Marking(corners=tuple(corners)))
    return sorted(result, key=_marking_key)


def _omission_choices(full, constraints):
    '''
    Перебор пропущенных углов в полных треугольниках с отсечением: ограничение E''
    снимается, если хотя бы в одном его треугольнике пропущена указанная пара
    '''
    last = [max(i for i, _ in rules) for rules in constraints]
    options = [list(combinations(sorted(t.edges), 2)) for t in full]
    chosen: list[tuple[str, str]] = []

    def killed(rules) -> bool:
        return any(i < len(chosen) and chosen[i] == pair for i, pair in rules)

    def search(depth: int):
        if depth == len(full):
            if all(killed(rules) for rules in constraints):
                yield tuple(chosen)
            return
        for option in options[depth]:
            chosen.append(option)
            if all(last[k] > depth or killed(rules) for k, rules in enumerate(constraints)):
                yield from search(depth + 1)
            chosen.pop()

    yield from search(0)


def marking_minimality_divergence(
    p: SimplicialPoset2,
    limit: int = 16,
    service: Optional[ConeService] = None,
) -> DivergenceReport:
    '''
    Сравнение M_loc^min и M_f^min: локально минимальные разметки, которые
    недопустимы, и минимальные допустимые разметки, не минимальные среди
    локально допустимых

    Минимальная локально допустимая разметка допустима тогда и только тогда,
    когда она минимальна среди допустимых, поэтому обе разности вычисляются
    сравнением с разметками экстремальных лучей.
    '''
    feasible = [m for m, _ in minimal_feasible_markings(p, service)]
    local = locally_minimal_markings(p, limit=limit)
    feasible_keys = {_marking_key(m) for m in feasible}
    local_keys = {_marking_key(m) for m in local}
    loc_not_f = tuple(m for m in local if _marking_key(m) not in feasible_keys)
    f_not_loc = tuple(m for m in feasible if _marking_key(m) not in local_keys)
    logger.info(
        "Минимальных локально допустимых: %d, минимальных допустимых: %d, расхождения: %d / %d",
        len(local), len(feasible), len(loc_not_f), len(f_not_loc),
    )
    return DivergenceReport(
        locally_minimal_count=len(local),
        feasible_minimal_count=len(feasible),
        loc_not_feasible=loc_not_f,
        feasible_not_loc=f_not_loc,
    )
