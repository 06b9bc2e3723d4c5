import io
from itertools import combinations, product
from unittest.mock import MagicMock, patch

import networkx as nx
import pytest
import ujson

from app.cache import FileBackend, RayCache
from app.models.poset import Edge, SimplicialPoset2, Subgraph
from app.services.posets import complete_skeleton, doubled_skeleton
from main import run


def graph_poset(vertices, pairs, prefix="g"):
    '''Граф как посет без треугольников; ребра нумеруются по порядку'''
    edges = tuple(Edge(id=f"{prefix}{k}", ends=pair) for k, pair in enumerate(pairs))
    return SimplicialPoset2(vertices=tuple(vertices), edges=edges)


def small_connected_graphs(max_nodes, max_edges=None):
    '''Связные графы атласа networkx с 2..max_nodes вершинами'''
    for graph in nx.graph_atlas_g()[1:]:
        if graph.number_of_nodes() < 2 or graph.number_of_nodes() > max_nodes:
            continue
        if max_edges is not None and graph.number_of_edges() > max_edges:
            continue
        if nx.is_connected(graph):
            yield graph


def as_poset(graph):
    return graph_poset([f"u{v}" for v in graph.nodes], [(f"u{a}", f"u{b}") for a, b in graph.edges])


def connected_subgraph_count(graph):
    '''Перебор пар (непустое множество вершин, набор ребер на нем) со связным графом'''
    count = 0
    nodes = list(graph.nodes)
    for size in range(1, len(nodes) + 1):
        for subset in combinations(nodes, size):
            inner = [e for e in graph.edges if e[0] in subset and e[1] in subset]
            for k in range(len(inner) + 1):
                for chosen in combinations(inner, k):
                    sub = nx.Graph()
                    sub.add_nodes_from(subset)
                    sub.add_edges_from(chosen)
                    if nx.is_connected(sub):
                        count += 1
    return count


@pytest.fixture
def k3():
    return complete_skeleton(3)


@pytest.fixture
def k4():
    return complete_skeleton(4)


@pytest.fixture
def k5():
    return complete_skeleton(5)


@pytest.fixture
def doubled5():
    return doubled_skeleton(5)


@pytest.fixture
def path2():
    """Путь из двух ребер a - b - c"""
    return graph_poset(["a", "b", "c"], [("a", "b"), ("b", "c")])


@pytest.fixture
def k32(k5):
    """K_{3,2} ⊂ K_5: доли {v1, v2, v3} и {v4, v5}"""
    edges = [f"e{a}-{b}" for a, b in product((1, 2, 3), (4, 5))]
    return Subgraph(edges=tuple(edges), vertices=k5.vertices)


@pytest.fixture
def redis_mock():
    """Мок для Redis клиента"""
    with patch("app.cache.redis.Redis") as redis_mock:
        redis_client_mock = MagicMock()
        redis_mock.return_value = redis_client_mock
        yield redis_client_mock


@pytest.fixture
def file_cache(tmp_path):
    """Кеш лучей во временном каталоге"""
    return RayCache(FileBackend(str(tmp_path / "cache")))


@pytest.fixture
def write_json(tmp_path):
    """Записывает документ во временный файл и возвращает путь"""
    counter = iter(range(10 ** 6))

    def write(document, name=None):
        path = tmp_path / (name or f"doc{next(counter)}.json")
        if hasattr(document, "model_dump"):
            document = document.model_dump(mode="json")
        path.write_text(ujson.dumps(document, ensure_ascii=False), encoding="utf-8")
        return str(path)

    return write


@pytest.fixture
def cli(capsys, monkeypatch, tmp_path):
    """
    Запуск CLI в процессе: возвращает (код выхода, stdout, stderr);
    stdin подставляется строкой, кеш лучей: во временном каталоге
    """

    def invoke(*argv, stdin=None):
        if stdin is not None:
            monkeypatch.setattr("sys.stdin", io.StringIO(stdin))
        code = run(["--cache-dir", str(tmp_path / "cli-cache"), *argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err

    return invoke
