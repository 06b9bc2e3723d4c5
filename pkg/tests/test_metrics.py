import logging
import random
from fractions import Fraction
from itertools import permutations

import pytest
from pydantic import ValidationError

from app.errors import ValidationFailed
from app.models.metric import PosetMetric, Walk
from app.models.poset import SimplicialPoset2, Subgraph
from app.services.metrics import (
    UnionFind,
    connected_components,
    contraction_distance,
    contractions_of,
    contracts_to,
    cut_metric,
    even_cycles,
    graph_metric,
    hamiltonian_cone_subgraph,
    ic_coloring,
    is_bypassing,
    is_extreme_metric,
    is_in_B,
    is_isometric_even_cycle,
    metric_is_valid,
    metric_violations,
    shortest_contractable_walk,
    skeleton_subgraph,
    walk_from_edges,
)
from app.services.posets import complete_skeleton, doubled_skeleton
from tests.conftest import graph_poset

SQUARE = Walk(edges=("e1-4", "e2-4", "e2-5", "e1-5"), vertices=("v1", "v4", "v2", "v5", "v1"))


def cycle_graph(names):
    pairs = [(names[i], names[(i + 1) % len(names)]) for i in range(len(names))]
    return graph_poset(names, pairs, prefix="h")


def complete_graph(names):
    pairs = [(a, b) for i, a in enumerate(names) for b in names[i + 1:]]
    return graph_poset(names, pairs, prefix="h")


def brute_force_distances(g, p, max_len):
    '''Перебор всех путей в g длины не больше max_len с проверкой стягиваемости'''
    steps = {}
    for edge_id in g.edges:
        u, w = p.ends(edge_id)
        steps.setdefault(u, []).append((edge_id, w))
        steps.setdefault(w, []).append((edge_id, u))
    best = {}
    frontier = [((), (v,)) for v in g.vertices]
    for length in range(1, max_len + 1):
        extended = []
        for edges, vertices in frontier:
            for edge_id, nxt in steps.get(vertices[-1], ()):
                walk = (edges + (edge_id,), vertices + (nxt,))
                extended.append(walk)
                for e in contractions_of(Walk(edges=walk[0], vertices=walk[1]), p):
                    best.setdefault(e, length)
        frontier = extended
    return best


RANDOM_BASES = (complete_skeleton(5), doubled_skeleton(4), doubled_skeleton(5))


def random_poset(rng, max_edges=12):
    '''Случайный набор треугольников K_5, K̄_4 или K̄_5 (с кратными ребрами) и его ребер'''
    while True:
        base = rng.choice(RANDOM_BASES)
        triangles = tuple(rng.sample(base.triangles, rng.randint(1, 6)))
        used = {e for t in triangles for e in t.edges}
        if len(used) <= max_edges:
            break
    edges = tuple(e for e in base.edges if e.id in used)
    vertices = tuple(v for v in base.vertices if any(v in e.ends for e in edges))
    return SimplicialPoset2(vertices=vertices, edges=edges, triangles=triangles)


class TestWalks:
    """Тесты путей и стягивания"""

    def test_walk_from_edges(self, k4):
        walk = walk_from_edges(k4, ["e1-2", "e2-3", "e3-4"])

        assert walk.vertices == ("v1", "v2", "v3", "v4")

    def test_walk_from_edges_reversed_start(self, k4):
        walk = walk_from_edges(k4, ["e1-2", "e1-3"])

        assert walk.vertices == ("v2", "v1", "v3")

    def test_broken_walk(self, k4):
        with pytest.raises(ValidationFailed):
            walk_from_edges(k4, ["e1-2", "e3-4"])

    def test_walk_model(self):
        with pytest.raises(ValidationError):
            Walk(edges=("a",), vertices=("x",))
        first = Walk(edges=("a",), vertices=("x", "y"))
        second = Walk(edges=("b",), vertices=("y", "z"))
        assert (first + second).vertices == ("x", "y", "z")
        assert (first + second).reversed().edges == ("b", "a")

    def test_two_step_contraction(self, k3):
        walk = walk_from_edges(k3, ["e1-2", "e2-3"])

        assert contracts_to(walk, "e1-3", k3)
        assert contractions_of(walk, k3) == {"e1-3"}

    def test_single_edge_contracts_to_itself(self, k3):
        walk = walk_from_edges(k3, ["e1-3"])

        assert contracts_to(walk, "e1-3", k3)

    def test_three_step_contraction(self, k4):
        walk = walk_from_edges(k4, ["e1-2", "e2-3", "e3-4"])

        assert contracts_to(walk, "e1-4", k4)

    def test_endpoint_mismatch(self, k4):
        walk = walk_from_edges(k4, ["e1-2", "e2-3"])

        with pytest.raises(ValidationFailed):
            contracts_to(walk, "e1-4", k4)

    def test_doubled_spokes_contract_to_minus_edge(self, doubled5):
        walk = walk_from_edges(doubled5, ["e1+5", "e2+5"])

        assert walk.vertices == ("v1", "v5", "v2")
        assert contractions_of(walk, doubled5) == {"e1-2"}

    def test_walk_must_follow_edges(self, k4):
        with pytest.raises(ValidationFailed):
            contractions_of(Walk(edges=("e1-2",), vertices=("v1", "v3")), k4)


class TestContractionDistance:
    """Тесты расстояний стягивания"""

    def test_k32(self, k5, k32):
        distances = contraction_distance(k32, k5)

        for e in k32.edges:
            assert distances[e] == 1
        for e in ("e1-2", "e1-3", "e2-3", "e4-5"):
            assert distances[e] == 2

    def test_path_in_k4(self, k4):
        g = Subgraph.from_edges(k4, ["e1-2", "e2-3", "e3-4"])
        distances = contraction_distance(g, k4)

        assert distances == {"e1-2": 1, "e1-3": 2, "e1-4": 3, "e2-3": 1, "e2-4": 2, "e3-4": 1}
        walk = shortest_contractable_walk("e1-4", g, k4)
        assert walk.length == 3
        assert walk.vertices == ("v1", "v2", "v3", "v4")
        assert set(walk.edges) <= g.edge_set
        assert contracts_to(walk, "e1-4", k4)

    def test_unreachable(self, k4):
        g = Subgraph(edges=("e1-2", "e3-4"), vertices=k4.vertices)
        distances = contraction_distance(g, k4)

        assert distances["e1-3"] is None
        assert not is_bypassing(g, k4, distances)
        assert shortest_contractable_walk("e1-3", g, k4) is None

    def test_subgraph_outside_poset(self, k4):
        with pytest.raises(ValidationFailed):
            contraction_distance(Subgraph(edges=("e1-9",), vertices=("v1", "v9")), k4)

    def test_subgraph_missing_endpoint(self, k4):
        with pytest.raises(ValidationFailed):
            contraction_distance(Subgraph(edges=("e1-2",), vertices=("v1",)), k4)

    @pytest.mark.slow
    def test_matches_brute_force(self):
        """Очередь с приоритетами совпадает с перебором путей длины не больше 6"""
        rng = random.Random(4)
        multi = 0
        for _ in range(50):
            p = random_poset(rng)
            edges = rng.sample(p.edge_ids, rng.randint(1, min(3, len(p.edges))))
            g = Subgraph.from_edges(p, edges)
            distances = contraction_distance(g, p)
            brute = brute_force_distances(g, p, 6)
            multi += any(len(ids) > 1 for ids in p.edges_between.values())
            for e in p.edge_ids:
                if distances[e] is not None and distances[e] <= 6:
                    assert brute.get(e) == distances[e], e
                else:
                    assert e not in brute, e
        assert multi > 0


class TestBypassing:
    """Тесты обходящих подграфов и графовой метрики"""

    def test_spanning_star_of_k4(self, k4):
        g = Subgraph.from_edges(k4, ["e1-2", "e1-3", "e1-4"])

        assert is_bypassing(g, k4)
        assert graph_metric(g, k4).values == {
            "e1-2": 1, "e1-3": 1, "e1-4": 1, "e2-3": 2, "e2-4": 2, "e3-4": 2,
        }

    def test_missing_vertex(self, k4):
        g = Subgraph.from_edges(k4, ["e1-2", "e1-3"])

        assert not is_bypassing(g, k4)
        with pytest.raises(ValidationFailed):
            graph_metric(g, k4)

    def test_whole_skeleton(self, k4):
        metric = graph_metric(skeleton_subgraph(k4), k4)

        assert set(metric.values.values()) == {1}

    def test_impure_poset(self, k3):
        hanging = graph_poset(["v1", "v2", "v3", "v4"], [("v3", "v4")], prefix="x")
        p = SimplicialPoset2(vertices=hanging.vertices, edges=k3.edges + hanging.edges, triangles=k3.triangles)
        g = Subgraph(edges=("e1-2", "e1-3", "x0"), vertices=p.vertices)

        with pytest.raises(ValidationFailed):
            graph_metric(g, p)
        assert graph_metric(g, p, allow_impure=True)["e2-3"] == 2

    def test_components(self, k4):
        g = Subgraph(edges=("e1-2", "e3-4"), vertices=k4.vertices)

        assert sorted(map(sorted, connected_components(g, k4))) == [["v1", "v2"], ["v3", "v4"]]


class TestMetricValidity:
    """Тесты неравенств треугольника"""

    def test_violation(self, k3):
        d = PosetMetric(values={"e1-2": "3", "e1-3": "1", "e2-3": "1"})

        violations = metric_violations(d, k3)
        assert len(violations) == 1
        assert "e1-2" in violations[0]
        assert not metric_is_valid(d, k3)

    def test_missing_edge(self, k3):
        assert metric_violations(PosetMetric(values={"e1-2": 1}), k3)

    def test_rational_values(self, k3):
        d = PosetMetric(values={"e1-2": "1/2", "e1-3": "1/2", "e2-3": "1"})

        assert d["e1-2"] == Fraction(1, 2)
        assert metric_is_valid(d, k3)

    @pytest.mark.parametrize("n", [3, 4, 5])
    def test_matches_classical_triangle_inequalities(self, n):
        """На K_n корректность метрики посета равносильна неравенствам треугольника для d(i, j)"""
        p = complete_skeleton(n)
        rng = random.Random(n)
        outcomes = set()
        for k in range(200):
            low, high = (2, 3) if k % 2 else (0, 4)
            values = {e: rng.randint(low, high) for e in p.edge_ids}
            pair = {frozenset(p.ends(e)): values[e] for e in p.edge_ids}
            classical = all(
                pair[frozenset((a, b))] <= pair[frozenset((a, c))] + pair[frozenset((c, b))]
                for a, b, c in permutations(p.vertices, 3)
            )
            assert metric_is_valid(PosetMetric(values=values), p) == classical
            outcomes.add(classical)
        assert outcomes == {True, False}

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            PosetMetric(values={"e": "-1"})


class TestIsometricCycles:
    """Тесты изометричных четных циклов"""

    def test_square_in_k32(self, k5, k32):
        assert is_isometric_even_cycle(SQUARE, k32, k5)

    def test_chord_in_subgraph(self, k4):
        """Хорда из g: половина цикла длины 2 не равна d = 1"""
        g = Subgraph.from_edges(k4, ["e1-2", "e2-3", "e3-4", "e1-4", "e1-3"])
        square = Walk(edges=("e1-2", "e2-3", "e3-4", "e1-4"), vertices=("v1", "v2", "v3", "v4", "v1"))

        assert not is_isometric_even_cycle(square, g, k4)

    def test_half_walk_in_B(self, k5, k32):
        half = walk_from_edges(k5, ["e1-4", "e2-4"])

        assert is_in_B(half, "e1-2", k32, k5)
        assert not is_in_B(half, "e1-3", k32, k5)

    def test_odd_or_open_cycle_rejected(self, k4):
        g = skeleton_subgraph(k4)
        with pytest.raises(ValidationFailed):
            is_isometric_even_cycle(walk_from_edges(k4, ["e1-2", "e2-3", "e1-3"]), g, k4)
        with pytest.raises(ValidationFailed):
            is_isometric_even_cycle(walk_from_edges(k4, ["e1-2", "e2-3"]), g, k4)

    def test_even_cycles_of_k32(self, k5, k32):
        cycles = even_cycles(k32, k5, 4)

        assert len(cycles) == 3
        assert all(c.is_closed and c.length == 4 for c in cycles)
        assert all(c.vertices[0] in ("v1", "v2") for c in cycles)

    def test_parallel_edges_expand(self):
        p = graph_poset(["a", "b", "c", "d"], [("a", "b"), ("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")])
        g = skeleton_subgraph(p)

        assert len(even_cycles(g, p, 4)) == 2


class TestIcColoring:
    """Тесты ic-раскраски"""

    def test_k32_single_class(self, k5, k32):
        coloring = ic_coloring(k32, k5, max_cycle_len=4)

        assert coloring.count == 1
        assert coloring.classes == (tuple(sorted(k32.edges)),)
        assert not coloring.complete
        assert len(coloring.merges) == 6

    def test_star_is_not_one_colorable(self, k5):
        star = Subgraph.from_edges(k5, ["e1-2", "e1-3", "e1-4", "e1-5"])
        coloring = ic_coloring(star, k5)

        assert coloring.count == 4
        assert coloring.merges == ()

    def test_complete_flag(self, k4):
        star = Subgraph.from_edges(k4, ["e1-2", "e1-3", "e1-4"])

        assert ic_coloring(star, k4, max_cycle_len=4).complete

    def test_requires_bypassing(self, k4):
        with pytest.raises(ValidationFailed):
            ic_coloring(Subgraph(edges=("e1-2",), vertices=("v1", "v2")), k4)

    def test_union_find_is_order_independent(self):
        first = UnionFind(["c", "b", "a", "d"])
        first.union("c", "b")
        first.union("b", "a")
        second = UnionFind(["a", "b", "c", "d"])
        second.union("a", "b")
        second.union("c", "a")

        assert first.classes() == second.classes() == [("a", "b", "c"), ("d",)]
        assert first["c"] == "a"
        assert not first.union("a", "c")


class TestExtremality:
    """Тесты сертификата экстремальности"""

    def test_cut_on_k3(self, k3):
        certificate = is_extreme_metric(cut_metric(["v1"], k3), k3)

        assert certificate.extreme
        assert certificate.kernel_dim == 1
        assert len(certificate.tight_corners) == 2

    def test_all_ones_on_k4(self, k4):
        d = PosetMetric(values={e: 1 for e in k4.edge_ids})
        certificate = is_extreme_metric(d, k4)

        assert not certificate.extreme
        assert certificate.kernel_dim == 6
        assert certificate.tight_corners == ()

    def test_k32_metric(self, k5, k32):
        certificate = is_extreme_metric(graph_metric(k32, k5), k5)

        assert certificate.extreme
        assert certificate.kernel_dim == 1

    def test_zero_metric_rejected(self, k3):
        with pytest.raises(ValidationFailed):
            is_extreme_metric(cut_metric([], k3), k3)

    def test_invalid_metric_rejected(self, k3):
        with pytest.raises(ValidationFailed):
            is_extreme_metric(PosetMetric(values={"e1-2": 3, "e1-3": 1, "e2-3": 1}), k3)

    def test_triangle_free_edges_are_tight(self):
        p = graph_poset(["a", "b"], [("a", "b"), ("a", "b")])
        d = PosetMetric(values={"g0": 1, "g1": 0})
        certificate = is_extreme_metric(d, p)

        assert certificate.tight_nonnegative == ("g1",)
        assert certificate.extreme


class TestCutMetric:
    """Тесты разрезных метрик"""

    def test_single_vertex(self, k3):
        assert cut_metric(["v1"], k3).values == {"e1-2": 1, "e1-3": 1, "e2-3": 0}

    def test_empty_side(self, k3):
        assert cut_metric([], k3).is_zero()

    def test_complement(self, k5):
        assert cut_metric(["v1", "v4"], k5) == cut_metric(["v2", "v3", "v5"], k5)

    def test_unknown_vertex(self, k3):
        with pytest.raises(ValidationFailed):
            cut_metric(["v9"], k3)


class TestHamiltonianCone:
    """Семейство экстремальных метрик конусов над гамильтоновыми графами в K̄_n"""

    @pytest.mark.parametrize(
        "h, n, size",
        [
            (cycle_graph(["a", "b", "c", "d"]), 5, 8),
            (complete_graph(["a", "b", "c", "d"]), 5, 10),
            (cycle_graph(["a", "b", "c", "d", "e"]), 6, 10),
        ],
    )
    def test_family(self, h, n, size):
        p, g = hamiltonian_cone_subgraph(h, n, list(h.vertices))

        assert len(g.edges) == size
        assert all("+" in e for e in g.edges)
        distances = contraction_distance(g, p)
        assert is_bypassing(g, p, distances)
        assert all(distances[f"e{i}-{j}"] == 2 for i in range(1, n) for j in range(i + 1, n))

        assert ic_coloring(g, p, max_cycle_len=4).count == 1
        certificate = is_extreme_metric(graph_metric(g, p), p)
        assert certificate.extreme
        assert certificate.kernel_dim == 1

    def test_labels_follow_cycle(self):
        h = cycle_graph(["a", "b", "c", "d"])
        _, g = hamiltonian_cone_subgraph(h, 5, ["a", "b", "c", "d"])

        assert set(g.edges) == {"e1+2", "e2+3", "e3+4", "e1+4", "e1+5", "e2+5", "e3+5", "e4+5"}

    def test_warning_when_divisible_by_three(self, caplog):
        h = cycle_graph(["a", "b", "c", "d", "e", "f"])

        with caplog.at_level(logging.WARNING):
            _, g = hamiltonian_cone_subgraph(h, 7, list(h.vertices))
        assert len(g.edges) == 12
        assert any("делится на 3" in record.getMessage() for record in caplog.records)

    def test_not_hamiltonian(self):
        h = graph_poset(["a", "b", "c", "d"], [("a", "b"), ("b", "c"), ("c", "d")], prefix="h")

        with pytest.raises(ValidationFailed):
            hamiltonian_cone_subgraph(h, 5, ["a", "b", "c", "d"])

    def test_wrong_size(self):
        with pytest.raises(ValidationFailed):
            hamiltonian_cone_subgraph(cycle_graph(["a", "b", "c", "d"]), 6, ["a", "b", "c", "d"])
        with pytest.raises(ValidationFailed):
            hamiltonian_cone_subgraph(cycle_graph(["a", "b", "c"]), 4, ["a", "b", "c"])


class TestExtremalitySoundness:
    """Одноцветная ic-раскраска обходящего подграфа влечет экстремальность графовой метрики"""

    @pytest.mark.slow
    def test_one_class_implies_extreme(self, k5, k32):
        instances = [(k5, k32)]
        for h, n in (
            (cycle_graph(["a", "b", "c", "d"]), 5),
            (complete_graph(["a", "b", "c", "d"]), 5),
            (cycle_graph(["a", "b", "c", "d", "e"]), 6),
        ):
            instances.append(hamiltonian_cone_subgraph(h, n, list(h.vertices)))
        rng = random.Random(11)
        for p in (complete_skeleton(4), k5, doubled_skeleton(4)):
            for _ in range(40):
                edges = rng.sample(p.edge_ids, rng.randint(len(p.vertices) - 1, len(p.edges)))
                instances.append((p, Subgraph(edges=tuple(edges), vertices=p.vertices)))

        coupled = 0
        for p, g in instances:
            if not is_bypassing(g, p):
                continue
            if ic_coloring(g, p, max_cycle_len=4).count == 1:
                assert is_extreme_metric(graph_metric(g, p), p).extreme, g.edges
                coupled += 1
        assert coupled >= 4
