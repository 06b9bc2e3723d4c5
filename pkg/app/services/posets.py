import logging
from collections import Counter
from fractions import Fraction
from itertools import combinations
from typing import Literal

import networkx as nx

from app.errors import ValidationFailed
from app.models.poset import Edge, SimplicialPoset2, Triangle, VectorConfiguration, sign_class
from app.models.relation import TernaryRelation

logger = logging.getLogger(__name__)


def validate(p: SimplicialPoset2) -> list[str]:
    '''
    Проверка аксиом двумерного симплициального посета

    Для каждого треугольника проверяется, что интервал [0̂, Δ] изоморфен B_3:
    три попарно различных ребра, пары концов которых: ровно три пары
    трехэлементного множества вершин.

    Args:
        p: посет

    Returns:
        List[str]: описания нарушений (пустой список, если посет корректен)
    '''
    violations: list[str] = []

    counts = Counter(list(p.vertices) + [e.id for e in p.edges] + [t.id for t in p.triangles])
    for simplex_id, count in sorted(counts.items()):
        if count > 1:
            violations.append(f"идентификатор {simplex_id!r} использован {count} раз")

    vertices = set(p.vertices)
    for edge in p.edges:
        unknown = [v for v in edge.ends if v not in vertices]
        if unknown:
            violations.append(f"ребро {edge.id}: неизвестные вершины {unknown}")
        if edge.ends[0] == edge.ends[1]:
            violations.append(f"ребро {edge.id}: петля в вершине {edge.ends[0]}")

    for triangle in p.triangles:
        unknown = [e for e in triangle.edges if e not in p.edge_map]
        if unknown:
            violations.append(f"треугольник {triangle.id}: неизвестные ребра {unknown}")
            continue
        if len(set(triangle.edges)) != 3:
            violations.append(f"треугольник {triangle.id}: ребра-грани должны быть попарно различны")
            continue
        pairs = [frozenset(p.ends(e)) for e in triangle.edges]
        corners = set().union(*pairs)
        expected = {frozenset(pair) for pair in combinations(sorted(corners), 2)}
        if len(corners) != 3 or set(pairs) != expected or any(len(pair) != 2 for pair in pairs):
            violations.append(
                f"треугольник {triangle.id}: ребра задают {len(corners)} вершин, "
                "интервал [0̂, Δ] не изоморфен B_3"
            )
    return violations


def ensure_valid(p: SimplicialPoset2) -> None:
    violations = validate(p)
    if violations:
        raise ValidationFailed("Некорректный посет: " + "; ".join(violations))


def ternary_relation(p: SimplicialPoset2) -> TernaryRelation:
    '''
    Тернарное отношение посета; элементы это ребра, тройки это ребра-грани треугольников

    Raises:
        ValidationFailed: посет некорректен
    '''
    ensure_valid(p)
    return TernaryRelation.from_named(p.edge_ids, (t.edges for t in p.triangles))


def graph_relation(p: SimplicialPoset2) -> TernaryRelation:
    '''
    Космологическое отношение графа (одномерного остова посета):
    элементы V ⊔ E, тройки [v1, e, v2] для каждого ребра e с концами v1, v2
    '''
    ensure_valid(p)
    elements = list(p.vertices) + list(p.edge_ids)
    return TernaryRelation.from_named(elements, ((e.ends[0], e.id, e.ends[1]) for e in p.edges))


def cone_skeleton2(p: SimplicialPoset2, apex: str = "v0") -> SimplicialPoset2:
    '''
    Двумерный остов конуса CP = P × B_1

    Добавляет вершину-вершину конуса, по ребру-спице к каждой старой вершине и
    по треугольнику {спица(u), e, спица(w)} на каждое старое ребро e = uw.
    Все старые симплексы сохраняются. Для графа это в точности конус CG.

    Args:
        p: корректный посет или граф
        apex: идентификатор вершины конуса

    Returns:
        SimplicialPoset2: остов конуса
    '''
    ensure_valid(p)
    spoke = {v: f"{apex}-{v}" for v in p.vertices}
    edges = list(p.edges) + [Edge(id=spoke[v], ends=(apex, v)) for v in p.vertices]
    triangles = list(p.triangles) + [
        Triangle(id=f"{apex}-{e.id}", edges=(spoke[e.ends[0]], e.id, spoke[e.ends[1]]))
        for e in p.edges
    ]
    cone = SimplicialPoset2(vertices=(apex,) + p.vertices, edges=tuple(edges), triangles=tuple(triangles))
    ensure_valid(cone)
    return cone


def _minus(i: int, j: int) -> str:
    return f"e{min(i, j)}-{max(i, j)}"


def _plus(i: int, j: int) -> str:
    return f"e{min(i, j)}+{max(i, j)}"


def complete_skeleton(n: int) -> SimplicialPoset2:
    '''
    K_n = B_n^(2): двумерный остов стандартного симплекса на n вершинах

    Вершины v1..vn, ребра e{i}-{j}, треугольники t{i}-{j}-{k}.
    '''
    if n < 1:
        raise ValidationFailed(f"K_n определен для n >= 1, получено n={n}")
    labels = range(1, n + 1)
    vertices = tuple(f"v{i}" for i in labels)
    edges = tuple(Edge(id=_minus(i, j), ends=(f"v{i}", f"v{j}")) for i, j in combinations(labels, 2))
    triangles = tuple(
        Triangle(id=f"t{i}-{j}-{k}", edges=(_minus(i, j), _minus(j, k), _minus(i, k)))
        for i, j, k in combinations(labels, 3)
    )
    return SimplicialPoset2(vertices=vertices, edges=edges, triangles=triangles)


def doubled_skeleton(n: int) -> SimplicialPoset2:
    '''
    Удвоенный посет K̄_n

    Между каждой парой вершин два ребра: e_ij (e{i}-{j}) и e^i_j (e{i}+{j}).
    Треугольники Δ_ijk (t{i}-{j}-{k}) с гранями e_ij, e_jk, e_ik и Δ^i_jk
    (t{i}+{j}-{k}) с гранями e^i_j, e^i_k, e_jk.
    '''
    if n < 2:
        raise ValidationFailed(f"K̄_n определен для n >= 2, получено n={n}")
    labels = range(1, n + 1)
    vertices = tuple(f"v{i}" for i in labels)
    edges = [Edge(id=_minus(i, j), ends=(f"v{i}", f"v{j}")) for i, j in combinations(labels, 2)]
    edges += [Edge(id=_plus(i, j), ends=(f"v{i}", f"v{j}")) for i, j in combinations(labels, 2)]
    triangles = [
        Triangle(id=f"t{i}-{j}-{k}", edges=(_minus(i, j), _minus(j, k), _minus(i, k)))
        for i, j, k in combinations(labels, 3)
    ]
    for i in labels:
        others = [x for x in labels if x != i]
        for j, k in combinations(others, 2):
            triangles.append(Triangle(id=f"t{i}+{j}-{k}", edges=(_plus(i, j), _plus(i, k), _minus(j, k))))
    return SimplicialPoset2(vertices=vertices, edges=tuple(edges), triangles=tuple(triangles))


def from_vector_configuration(cfg: VectorConfiguration) -> TernaryRelation:
    '''
    Тернарное отношение конфигурации векторов {±α_i}

    Тройка [i, j, k] входит в отношение, если ±α_i ± α_j ± α_k = 0 при
    некотором выборе знаков. Для каждой пары (i, j) векторы α_i ± α_j ищутся
    среди классов {α_k, -α_k}; арифметика точная.
    '''
    names = cfg.names
    vectors = [tuple(Fraction(x) for x in cfg.vectors[name]) for name in names]
    by_class = {sign_class(v): k for k, v in enumerate(vectors)}
    triples = set()
    for i, j in combinations(range(len(vectors)), 2):
        for sign in (1, -1):
            combined = tuple(a + sign * b for a, b in zip(vectors[i], vectors[j]))
            if not any(combined):
                continue
            k = by_class.get(sign_class(combined))
            if k is not None and k not in (i, j):
                triples.add(tuple(sorted((i, j, k))))
    return TernaryRelation(elements=names, triples=tuple(sorted(triples)))


def root_system(kind: Literal["A", "B", "D"], n: int) -> VectorConfiguration:
    '''
    Системы корней A_n, B_n, D_n (по одному представителю каждой пары ±α)

    - A_n: ε_i - ε_j, 1 <= i < j <= n+1, в R^(n+1);
    - D_n: ε_i - ε_j и ε_i + ε_j, 1 <= i < j <= n, в R^n;
    - B_n: векторы D_n и ε_i, 1 <= i <= n.
    '''
    kind = kind.upper()
    if kind not in ("A", "B", "D"):
        raise ValidationFailed(f"неизвестный тип системы корней {kind!r}, ожидается A, B или D")
    if n < (1 if kind == "A" else 2):
        raise ValidationFailed(f"{kind}_n определена для n >= {1 if kind == 'A' else 2}, получено n={n}")

    dim = n + 1 if kind == "A" else n

    def unit(*signed: tuple[int, int]) -> tuple[str, ...]:
        vector = [0] * dim
        for index, sign in signed:
            vector[index - 1] += sign
        return tuple(str(x) for x in vector)

    pairs = list(combinations(range(1, dim + 1), 2))
    vectors: dict[str, tuple[str, ...]] = {_minus(i, j): unit((i, 1), (j, -1)) for i, j in pairs}
    if kind in ("B", "D"):
        vectors.update({_plus(i, j): unit((i, 1), (j, 1)) for i, j in pairs})
    if kind == "B":
        vectors.update({f"e{i}": unit((i, 1)) for i in range(1, dim + 1)})
    return VectorConfiguration(dim=dim, vectors=vectors)


def skeleton_graph(p: SimplicialPoset2, edges=None) -> nx.MultiGraph:
    '''
    Одномерный остов посета (или его подграф) как мультиграф networkx;
    ключ ребра: его идентификатор
    '''
    graph = nx.MultiGraph()
    graph.add_nodes_from(p.vertices)
    for edge_id in (p.edge_ids if edges is None else edges):
        u, w = p.ends(edge_id)
        graph.add_edge(u, w, key=edge_id)
    return graph
