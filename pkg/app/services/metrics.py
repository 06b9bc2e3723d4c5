import heapq
import itertools
import logging
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import networkx as nx

from app.errors import ValidationFailed
from app.models.marking import Corner
from app.models.metric import ExtremalityCertificate, IcColoring, PosetMetric, Walk
from app.models.poset import SimplicialPoset2, Subgraph
from app.services import linalg
from app.services.markings import all_corners, corner_row
from app.services.posets import doubled_skeleton, ensure_valid, skeleton_graph

logger = logging.getLogger(__name__)

Distances = dict[str, Optional[int]]


def check_pure(p: SimplicialPoset2, allow_impure: bool = False) -> None:
    '''
    Метрические утверждения сформулированы для чистых посетов

    Raises:
        ValidationFailed: посет не чистый и проверка не отключена
    '''
    ensure_valid(p)
    if p.is_pure:
        return
    if not allow_impure:
        raise ValidationFailed("Посет не является чистым двумерным (используйте разрешение нечистых посетов)")
    logger.warning("Посет не является чистым двумерным, вычисления продолжаются")


def check_subgraph(g: Subgraph, p: SimplicialPoset2) -> None:
    unknown_edges = [e for e in g.edges if e not in p.edge_map]
    unknown_vertices = [v for v in g.vertices if v not in p.vertex_index]
    if unknown_edges or unknown_vertices:
        raise ValidationFailed(
            f"Подграф не лежит в остове посета: ребра {unknown_edges}, вершины {unknown_vertices}"
        )
    missing = sorted({v for e in g.edges for v in p.ends(e)} - set(g.vertices))
    if missing:
        raise ValidationFailed(f"Концы ребер подграфа {missing} не входят в его вершины")


def walk_from_edges(p: SimplicialPoset2, edges: Sequence[str], start: Optional[str] = None) -> Walk:
    '''
    Восстанавливает последовательность вершин пути по его ребрам

    Args:
        p: посет
        edges: ребра пути
        start: начальная вершина (по умолчанию выводится из первых двух ребер)

    Raises:
        ValidationFailed: соседние ребра не имеют общей вершины
    '''
    if not edges:
        raise ValidationFailed("Путь должен содержать хотя бы одно ребро")
    unknown = [e for e in edges if e not in p.edge_map]
    if unknown:
        raise ValidationFailed(f"Ребра {unknown} отсутствуют в посете")
    first = p.ends(edges[0])
    if start is None:
        start = first[0]
        if len(edges) > 1:
            shared = set(first) & set(p.ends(edges[1]))
            if len(shared) == 1 and first[0] in shared:
                start = first[1]
    vertices = [start]
    for edge_id in edges:
        u, w = p.ends(edge_id)
        if vertices[-1] == u:
            vertices.append(w)
        elif vertices[-1] == w:
            vertices.append(u)
        else:
            raise ValidationFailed(f"Ребро {edge_id} не инцидентно вершине {vertices[-1]}")
    return Walk(edges=tuple(edges), vertices=tuple(vertices))


def check_walk(w: Walk, p: SimplicialPoset2) -> None:
    for i, edge_id in enumerate(w.edges):
        if edge_id not in p.edge_map:
            raise ValidationFailed(f"Ребро {edge_id} отсутствует в посете")
        if set(p.ends(edge_id)) != {w.vertices[i], w.vertices[i + 1]}:
            raise ValidationFailed(
                f"Ребро {edge_id} не соединяет вершины {w.vertices[i]} и {w.vertices[i + 1]}"
            )


def contractions_of(w: Walk, p: SimplicialPoset2) -> set[str]:
    '''
    Все ребра, к которым стягивается путь

    Интервальная динамика: c[i][i+1] = {e_i}, c[i][j]: третьи ребра треугольников,
    две другие грани которых лежат в c[i][k] и c[k][j] для некоторого k.
    '''
    check_walk(w, p)
    n = w.length
    table: dict[tuple[int, int], set[str]] = {(i, i + 1): {w.edges[i]} for i in range(n)}
    for span in range(2, n + 1):
        for i in range(0, n - span + 1):
            j = i + span
            found: set[str] = set()
            for k in range(i + 1, j):
                left, right = table[(i, k)], table[(k, j)]
                if not left or not right:
                    continue
                for a in left:
                    for b in right:
                        for _, third in p.third_edges.get(frozenset((a, b)), ()):
                            found.add(third)
            table[(i, j)] = found
    return table[(0, n)]


def contracts_to(w: Walk, e: str, p: SimplicialPoset2) -> bool:
    '''
    Raises:
        ValidationFailed: концы пути не совпадают с концами ребра
    '''
    if e not in p.edge_map:
        raise ValidationFailed(f"Ребро {e} отсутствует в посете")
    if {w.vertices[0], w.vertices[-1]} != set(p.ends(e)):
        raise ValidationFailed(f"Путь соединяет {w.vertices[0]} и {w.vertices[-1]}, а не концы ребра {e}")
    return e in contractions_of(w, p)


def _distance_search(g: Subgraph, p: SimplicialPoset2) -> tuple[Distances, dict[str, tuple[str, str]]]:
    check_subgraph(g, p)
    best: dict[str, int] = {}
    witness: dict[str, tuple[str, str]] = {}
    finalized: dict[str, int] = {}
    queue: list[tuple[int, int, str]] = []
    counter = itertools.count()
    for edge_id in g.edges:
        best[edge_id] = 1
        heapq.heappush(queue, (1, next(counter), edge_id))

    while queue:
        distance, _, edge_id = heapq.heappop(queue)
        if edge_id in finalized:
            continue
        finalized[edge_id] = distance
        for triangle_id in p.triangles_of_edge.get(edge_id, ()):
            triangle = p.triangle_map[triangle_id]
            for other in triangle.edges:
                if other == edge_id or other not in finalized:
                    continue
                third = next(x for x in triangle.edges if x not in (edge_id, other))
                if third in finalized:
                    continue
                candidate = distance + finalized[other]
                if candidate < best.get(third, candidate + 1):
                    best[third] = candidate
                    witness[third] = (edge_id, other)
                    heapq.heappush(queue, (candidate, next(counter), third))

    distances = {e: finalized.get(e) for e in p.edge_ids}
    return distances, witness


def contraction_distance(g: Subgraph, p: SimplicialPoset2) -> Distances:
    '''
    Длины кратчайших стягиваемых путей в g для всех ребер посета

    d(e) = 1 для ребер g, иначе наименьшая неподвижная точка
    d(e) = min по треугольникам {e, a, b} величины d(a) + d(b). Вычисляется
    очередью с приоритетами: веса положительны, поэтому извлеченное значение
    окончательно.

    Returns:
        dict[str, Optional[int]]: расстояние или None, если стягиваемого пути нет
    '''
    distances, _ = _distance_search(g, p)
    return distances


def shortest_contractable_walk(e: str, g: Subgraph, p: SimplicialPoset2) -> Optional[Walk]:
    '''Один из кратчайших путей в g, стягиваемых к ребру e (восстановление по обратным ссылкам)'''
    distances, witness = _distance_search(g, p)
    if e not in p.edge_map:
        raise ValidationFailed(f"Ребро {e} отсутствует в посете")
    if distances[e] is None:
        return None

    def unfold(edge_id: str, start: str) -> Walk:
        if edge_id in g.edge_set:
            u, w = p.ends(edge_id)
            return Walk(edges=(edge_id,), vertices=(start, w if u == start else u))
        a, b = witness[edge_id]
        first, second = (a, b) if start in p.ends(a) else (b, a)
        middle = next(v for v in p.ends(first) if v != start)
        return unfold(first, start) + unfold(second, middle)

    return unfold(e, p.ends(e)[0])


def is_bypassing(g: Subgraph, p: SimplicialPoset2, distances: Optional[Distances] = None) -> bool:
    '''Подграф обходящий: содержит все вершины посета и любое ребро стягивается из g'''
    check_subgraph(g, p)
    if not set(p.vertices) <= set(g.vertices):
        return False
    distances = distances or contraction_distance(g, p)
    return all(d is not None for d in distances.values())


def metric_violations(d: PosetMetric, p: SimplicialPoset2) -> list[str]:
    '''Нарушенные неравенства треугольника (пустой список для корректной метрики)'''
    missing = sorted(set(p.edge_ids) - set(d.values))
    extra = sorted(set(d.values) - set(p.edge_ids))
    violations = []
    if missing:
        violations.append(f"не заданы значения на ребрах {missing}")
    if extra:
        violations.append(f"значения на неизвестных ребрах {extra}")
    if missing or extra:
        return violations
    for corner in all_corners(p):
        row = corner_row(p, corner)
        value = sum(a * d[e] for a, e in zip(row, p.edge_ids) if a)
        if value < 0:
            third = next(e for e in p.triangle_map[corner.triangle].edges if e not in corner.edges)
            violations.append(
                f"треугольник {corner.triangle}: d({corner.edges[0]}) + d({corner.edges[1]}) < d({third})"
            )
    return violations


def metric_is_valid(d: PosetMetric, p: SimplicialPoset2) -> bool:
    return not metric_violations(d, p)


def graph_metric(g: Subgraph, p: SimplicialPoset2, allow_impure: bool = False) -> PosetMetric:
    '''
    Графовая метрика обходящего подграфа, d(e) равно длине кратчайшего стягиваемого пути

    Raises:
        ValidationFailed: подграф не обходящий
    '''
    check_pure(p, allow_impure)
    distances = contraction_distance(g, p)
    if not is_bypassing(g, p, distances):
        unreachable = sorted(e for e, d in distances.items() if d is None)
        raise ValidationFailed(f"Подграф не является обходящим: недостижимы ребра {unreachable}")
    metric = PosetMetric(values={e: Fraction(d) for e, d in distances.items()})
    violations = metric_violations(metric, p)
    if violations:
        raise ValidationFailed("Графовая метрика нарушает неравенства: " + "; ".join(violations))
    return metric


def is_in_B(w: Walk, e: str, g: Subgraph, p: SimplicialPoset2, distances: Optional[Distances] = None) -> bool:
    '''Лежит ли путь в B_G(e): путь в g длины d(e), стягиваемый к e'''
    if not set(w.edges) <= g.edge_set:
        return False
    distances = distances or contraction_distance(g, p)
    if distances.get(e) is None or w.length != distances[e]:
        return False
    if {w.vertices[0], w.vertices[-1]} != set(p.ends(e)):
        return False
    return contracts_to(w, e, p)


def even_cycles(g: Subgraph, p: SimplicialPoset2, max_len: int) -> list[Walk]:
    '''
    Четные простые циклы длины от 4 до max_len в (мульти)графе g

    Циклы простого графа перечисляются networkx, затем раскрываются по всем
    кратным ребрам. Каждый цикл начинается в наименьшей вершине.
    '''
    check_subgraph(g, p)
    simple = nx.Graph()
    simple.add_nodes_from(g.vertices)
    parallel: dict[frozenset[str], list[str]] = {}
    for edge_id in g.edges:
        u, w = p.ends(edge_id)
        simple.add_edge(u, w)
        parallel.setdefault(frozenset((u, w)), []).append(edge_id)

    cycles = set()
    for cycle in nx.simple_cycles(simple, length_bound=max_len):
        if len(cycle) < 4 or len(cycle) % 2:
            continue
        start = cycle.index(min(cycle))
        forward = cycle[start:] + cycle[:start]
        backward = [forward[0]] + forward[1:][::-1]
        vertices = min(forward, backward)
        pairs = [frozenset((vertices[i], vertices[(i + 1) % len(vertices)])) for i in range(len(vertices))]
        for choice in itertools.product(*(sorted(parallel[pair]) for pair in pairs)):
            cycles.add((tuple(choice), tuple(vertices) + (vertices[0],)))
    return [Walk(edges=edges, vertices=vertices) for edges, vertices in sorted(cycles)]


def _half_walks(c: Walk, i: int) -> tuple[Walk, Walk]:
    n = c.length // 2
    size = c.length
    vertices = c.vertices[:-1]

    def forward_from(j: int) -> Walk:
        return Walk(
            edges=tuple(c.edges[(j + k) % size] for k in range(n)),
            vertices=tuple(vertices[(j + k) % size] for k in range(n + 1)),
        )

    # обратная половина от v_i: разворот прямой половины, которая кончается в v_i
    return forward_from(i), forward_from((i - n) % size).reversed()


def is_isometric_even_cycle(
    c: Walk,
    g: Subgraph,
    p: SimplicialPoset2,
    distances: Optional[Distances] = None,
) -> bool:
    '''
    Изометричность четного цикла v1..v2n в g ⊂ P

    Для каждой пары противоположных вершин v_i, v_(i+n) должно существовать
    ребро посета вне g, соединяющее их, для которого обе половины цикла лежат
    в B_G. Перебираются все кратные ребра-кандидаты.

    Raises:
        ValidationFailed: цикл нечетный, не замкнут или не лежит в g
    '''
    if not c.is_closed:
        raise ValidationFailed("Цикл должен быть замкнутым путем")
    if c.length % 2:
        raise ValidationFailed(f"Цикл длины {c.length} нечетный")
    if not set(c.edges) <= g.edge_set:
        raise ValidationFailed("Ребра цикла должны лежать в подграфе")
    check_walk(c, p)
    distances = distances or contraction_distance(g, p)
    n = c.length // 2
    for i in range(n):
        forward, backward = _half_walks(c, i)
        pair = frozenset((forward.vertices[0], forward.vertices[-1]))
        candidates = [e for e in p.edges_between.get(pair, ()) if e not in g.edge_set]
        if not any(
            is_in_B(forward, e, g, p, distances) and is_in_B(backward, e, g, p, distances)
            for e in candidates
        ):
            return False
    return True


class UnionFind:
    """
    Система непересекающихся множеств со сжатием путей; представитель класса:
    лексикографически наименьший элемент, поэтому результат не зависит от
    порядка объединений
    """

    def __init__(self, items: Iterable[str]):
        self.parents = {item: item for item in items}

    def __getitem__(self, item: str) -> str:
        path = [item]
        root = self.parents[item]
        while root != path[-1]:
            path.append(root)
            root = self.parents[root]
        for node in path:
            self.parents[node] = root
        return root

    def union(self, a: str, b: str) -> bool:
        root_a, root_b = self[a], self[b]
        if root_a == root_b:
            return False
        low, high = sorted((root_a, root_b))
        self.parents[high] = low
        return True

    def classes(self) -> list[tuple[str, ...]]:
        grouped: dict[str, list[str]] = {}
        for item in self.parents:
            grouped.setdefault(self[item], []).append(item)
        return sorted(tuple(sorted(items)) for items in grouped.values())


def ic_coloring(
    g: Subgraph,
    p: SimplicialPoset2,
    max_cycle_len: int = 4,
    allow_impure: bool = False,
) -> IcColoring:
    '''
    ic-раскраска: противоположные ребра каждого изометричного четного цикла
    длины не больше max_cycle_len получают один цвет

    Каждое объединение обосновано циклом; полнота гарантирована только при
    границе не меньше числа вершин g (флаг complete).

    Raises:
        ValidationFailed: подграф не обходящий
    '''
    check_pure(p, allow_impure)
    distances = contraction_distance(g, p)
    if not is_bypassing(g, p, distances):
        raise ValidationFailed("ic-раскраска определена только для обходящих подграфов")
    uf = UnionFind(g.edges)
    merges = set()
    for cycle in even_cycles(g, p, max_cycle_len):
        if not is_isometric_even_cycle(cycle, g, p, distances):
            continue
        n = cycle.length // 2
        for i in range(n):
            pair = tuple(sorted((cycle.edges[i], cycle.edges[i + n])))
            if pair[0] != pair[1]:
                merges.add(pair)
    for a, b in sorted(merges):
        uf.union(a, b)
    classes = uf.classes()
    complete = max_cycle_len >= len(g.vertices)
    logger.debug("ic-раскраска: %d классов, %d объединений, граница %d", len(classes), len(merges), max_cycle_len)
    return IcColoring(classes=tuple(classes), merges=tuple(sorted(merges)), cycle_bound=max_cycle_len, complete=complete)


def metric_cone_rows(p: SimplicialPoset2) -> list[tuple[Corner, tuple[int, ...]]]:
    return [(corner, corner_row(p, corner)) for corner in all_corners(p)]


def is_extreme_metric(d: PosetMetric, p: SimplicialPoset2, allow_impure: bool = False) -> ExtremalityCertificate:
    '''
    Экстремальность метрики в конусе метрик посета

    Строится подсистема обращающихся в равенство строк: неравенства углов и
    неотрицательность ребер, не лежащих в треугольниках. Метрика экстремальна,
    если пространство решений подсистемы одномерно.

    Raises:
        ValidationFailed: метрика некорректна или равна нулю
    '''
    check_pure(p, allow_impure)
    violations = metric_violations(d, p)
    if violations:
        raise ValidationFailed("Некорректная метрика: " + "; ".join(violations))
    if d.is_zero():
        raise ValidationFailed("Нулевая метрика не порождает луч")
    values = d.vector(p.edge_ids)
    tight_corners, rows = [], []
    for corner, row in metric_cone_rows(p):
        if sum(a * v for a, v in zip(row, values) if a) == 0:
            tight_corners.append(corner)
            rows.append(row)
    tight_nonnegative = [e for e in p.triangle_free_edges if d[e] == 0]
    for edge_id in tight_nonnegative:
        rows.append(tuple(int(e == edge_id) for e in p.edge_ids))
    kernel = linalg.nullspace(rows, len(p.edges))
    return ExtremalityCertificate(
        extreme=len(kernel) == 1,
        kernel_dim=len(kernel),
        tight_corners=tuple(tight_corners),
        tight_nonnegative=tuple(tight_nonnegative),
        kernel_basis=tuple(kernel),
    )


def cut_metric(s: Iterable[str], p: SimplicialPoset2) -> PosetMetric:
    '''Разрезная метрика: 1 на ребрах, разделяемых S, и 0 на остальных'''
    side = set(s)
    unknown = sorted(side - set(p.vertices))
    if unknown:
        raise ValidationFailed(f"Вершины {unknown} отсутствуют в посете")
    return PosetMetric(values={
        e.id: Fraction(int((e.ends[0] in side) != (e.ends[1] in side))) for e in p.edges
    })


def hamiltonian_cone_subgraph(h: SimplicialPoset2, n: int, cycle: Sequence[str]) -> tuple[SimplicialPoset2, Subgraph]:
    '''
    Подграф K̄_n⁺, изоморфный конусу над гамильтоновым графом H

    Вершины H нумеруются по гамильтонову циклу как v1..v(n-1), вершина конуса:
    vn. Ребра: e^i_j для ребер ij графа H и e^i_n для всех i.

    Returns:
        tuple[SimplicialPoset2, Subgraph]: K̄_n и подграф в нем

    Raises:
        ValidationFailed: n < 5, H не на n - 1 вершинах или цикл не гамильтонов
    '''
    ensure_valid(h)
    if n < 5:
        raise ValidationFailed(f"Семейство определено для n >= 5, получено n={n}")
    if len(h.vertices) != n - 1:
        raise ValidationFailed(f"Граф H должен иметь {n - 1} вершин, получено {len(h.vertices)}")
    if sorted(cycle) != sorted(h.vertices):
        raise ValidationFailed("Гамильтонов цикл должен проходить каждую вершину H ровно один раз")
    adjacency = {frozenset(e.ends) for e in h.edges}
    for i, vertex in enumerate(cycle):
        following = cycle[(i + 1) % len(cycle)]
        if frozenset((vertex, following)) not in adjacency:
            raise ValidationFailed(f"В H нет ребра между {vertex} и {following} гамильтонова цикла")
    if (n - 1) % 3 == 0:
        logger.warning("n - 1 = %d делится на 3: 1-ic-раскрашиваемость не гарантирована", n - 1)

    label = {vertex: i + 1 for i, vertex in enumerate(cycle)}
    doubled = doubled_skeleton(n)
    edges = set()
    for pair in adjacency:
        i, j = sorted(label[v] for v in pair)
        edges.add(f"e{i}+{j}")
    for i in range(1, n):
        edges.add(f"e{i}+{n}")
    return doubled, Subgraph(edges=tuple(edges), vertices=doubled.vertices)


def skeleton_subgraph(p: SimplicialPoset2) -> Subgraph:
    '''Весь одномерный остов как подграф'''
    return Subgraph(edges=p.edge_ids, vertices=p.vertices)


def connected_components(g: Subgraph, p: SimplicialPoset2) -> list[set[str]]:
    graph = skeleton_graph(p, g.edges).subgraph(g.vertices)
    return [set(c) for c in nx.connected_components(graph)]
