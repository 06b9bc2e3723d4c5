import pytest
import ujson

from app.services.posets import complete_skeleton
from tests.conftest import graph_poset


class TestRelationAndPolytope:
    """Тесты построения отношений и команд polytope"""

    def test_root_system_volume_through_stdin(self, cli):
        code, relation, _ = cli("relation", "build", "--root-system", "A", "2")
        assert code == 0

        code, out, err = cli("polytope", "nvolume", stdin=relation)

        assert code == 0, err
        assert ujson.loads(out) == {"dimension": 2, "method": "placing", "normalized_volume": 4}

    def test_pyramid_method(self, cli):
        _, relation, _ = cli("relation", "build", "--root-system", "A", "2")

        code, out, _ = cli("polytope", "nvolume", "--method", "pyramid", stdin=relation)

        assert code == 0
        assert ujson.loads(out)["normalized_volume"] == 4

    def test_vertices_and_dim(self, cli, write_json):
        _, relation, _ = cli("relation", "build", "--root-system", "B", "2")
        path = write_json(ujson.loads(relation))

        code, out, _ = cli("polytope", "vertices", path)
        report = ujson.loads(out)
        assert code == 0
        assert report["count"] == 6
        assert report["dimension"] == 3

        _, out, _ = cli("polytope", "dim", path)
        assert ujson.loads(out) == {"dimension": 3}

    def test_facets_report(self, cli):
        _, relation, _ = cli("relation", "build", "--root-system", "B", "2")

        code, out, _ = cli("polytope", "facets", stdin=relation)
        report = ujson.loads(out)

        assert code == 0
        assert report["count"] == 5
        assert sorted(len(f["vertices"]) for f in report["facets"]) == [3, 3, 4, 4, 4]

    def test_off_export_is_raw_text(self, cli):
        _, relation, _ = cli("relation", "build", "--root-system", "B", "2")

        code, out, _ = cli("polytope", "off", stdin=relation)

        assert code == 0
        assert out.splitlines()[:2] == ["OFF", "6 5 0"]

    def test_off_of_triangle_rejected(self, cli):
        _, relation, _ = cli("relation", "build", "--root-system", "A", "2")

        code, out, err = cli("polytope", "off", stdin=relation)

        assert code == 2
        assert out == ""
        assert err.startswith("ошибка:")

    def test_relation_document_is_canonical(self, cli, write_json, path2):
        code, out, _ = cli("relation", "build", "--graph", write_json(path2))

        assert code == 0
        assert ujson.loads(out) == {
            "elements": ["a", "b", "c", "g0", "g1"],
            "triples": [["a", "b", "g0"], ["b", "c", "g1"]],
        }

    def test_graph_and_cone_relations_are_isomorphic(self, cli, write_json, path2):
        graph_file = write_json(path2)
        _, graph_relation, _ = cli("relation", "build", "--graph", graph_file)
        _, cone, _ = cli("poset", "build", "--graph-cone", graph_file)
        _, cone_relation, _ = cli("relation", "build", "--poset", write_json(ujson.loads(cone)))

        code, out, _ = cli("iso", write_json(ujson.loads(graph_relation)), write_json(ujson.loads(cone_relation)))
        report = ujson.loads(out)

        assert code == 0
        assert report["isomorphic"] is True
        assert len(report["bijection"]) == 5

    def test_bad_root_system_rank(self, cli):
        code, _, err = cli("relation", "build", "--root-system", "A", "x")

        assert code == 2
        assert "'x'" in err


class TestPosetCommands:
    """Тесты команд poset"""

    def test_build_complete(self, cli):
        code, out, _ = cli("poset", "build", "--complete", "4")
        p = ujson.loads(out)

        assert code == 0
        assert (len(p["vertices"]), len(p["edges"]), len(p["triangles"])) == (4, 6, 4)

    def test_build_doubled(self, cli):
        _, out, _ = cli("poset", "build", "--doubled", "3")
        p = ujson.loads(out)

        assert (len(p["vertices"]), len(p["edges"]), len(p["triangles"])) == (3, 6, 4)

    def test_validate_valid(self, cli, write_json):
        code, out, _ = cli("poset", "validate", write_json(complete_skeleton(3)))

        assert code == 0
        assert ujson.loads(out) == {"valid": True, "violations": []}

    def test_validate_invalid_exits_with_2(self, cli, write_json):
        document = {"vertices": ["a"], "edges": [{"id": "loop", "ends": ["a", "a"]}]}

        code, out, _ = cli("poset", "validate", write_json(document))
        report = ujson.loads(out)

        assert code == 2
        assert report["valid"] is False
        assert any("loop" in v for v in report["violations"])

    def test_malformed_document_names_field(self, cli, write_json):
        code, out, err = cli("poset", "validate", write_json({"vertices": ["a"], "edges": [{"id": "e"}]}))

        assert code == 2
        assert out == ""
        assert "edges.0.ends" in err

    def test_invalid_poset_rejected_by_commands(self, cli, write_json):
        document = {"vertices": ["a"], "edges": [{"id": "loop", "ends": ["a", "a"]}]}

        code, _, _ = cli("relation", "build", "--poset", write_json(document))

        assert code == 2

    def test_missing_file(self, cli, tmp_path):
        code, _, err = cli("polytope", "dim", str(tmp_path / "absent.json"))

        assert code == 2
        assert "absent.json" in err

    def test_broken_json(self, cli):
        code, _, err = cli("polytope", "dim", stdin="{not json")

        assert code == 2
        assert "<stdin>" in err


class TestConeCommands:
    """Тесты команд cone и кеша лучей"""

    def test_met4_rays(self, cli, write_json, tmp_path):
        _, relation, _ = cli("relation", "build", "--poset", write_json(complete_skeleton(4)))

        code, out, _ = cli("cone", "rays", stdin=relation)
        report = ujson.loads(out)

        assert code == 0
        assert report["count"] == 7
        assert report["lineality"] == []
        assert any((tmp_path / "cli-cache").glob("*.json"))

    def test_count_from_rays_report(self, cli, write_json):
        _, relation, _ = cli("relation", "build", "--poset", write_json(complete_skeleton(4)))
        _, rays, _ = cli("cone", "rays", stdin=relation)

        code, out, _ = cli("cone", "count", stdin=rays)

        assert code == 0
        assert ujson.loads(out) == {"count": 7}

    def test_explicit_cone(self, cli, write_json):
        code, out, _ = cli("cone", "rays", write_json({"dim": 2, "hrep": [[1, 0], [0, 1]]}))

        assert code == 0
        assert ujson.loads(out)["rays"] == [[0, 1], [1, 0]]

    def test_ray_limit_exits_with_3(self, cli, write_json):
        _, relation, _ = cli("relation", "build", "--poset", write_json(complete_skeleton(4)))

        code, out, err = cli("--max-rays", "1", "cone", "rays", stdin=relation)

        assert code == 3
        assert out == ""
        assert err.startswith("ошибка:")

    def test_nonpositive_ray_limit(self, cli):
        code, _, _ = cli("--max-rays", "0", "poset", "build", "--complete", "3")

        assert code == 2

    def test_graph_cone_count(self, cli, write_json, path2):
        _, cone, _ = cli("poset", "build", "--graph-cone", write_json(path2))
        _, relation, _ = cli("relation", "build", "--poset", write_json(ujson.loads(cone)))

        code, out, _ = cli("cone", "count", stdin=relation)

        assert code == 0
        assert ujson.loads(out) == {"count": 6}


class TestMarkingCommands:
    """Тесты команд markings"""

    def test_minimal_on_graph_cone(self, cli, write_json, path2):
        _, cone, _ = cli("poset", "build", "--graph-cone", write_json(path2))

        code, out, _ = cli("markings", "minimal", stdin=cone)
        report = ujson.loads(out)

        assert code == 0
        assert report["count"] == 6
        assert len(report["markings"]) == 6

    def test_output_is_deterministic(self, cli, write_json):
        path = write_json(complete_skeleton(4))

        first = cli("markings", "minimal", "--poset", path)
        second = cli("markings", "minimal", "--poset", path)

        assert first == second

    def test_one_minimal_on_complete_skeleton(self, cli, write_json):
        code, out, _ = cli("markings", "one-minimal", "--poset", write_json(complete_skeleton(4)))

        assert code == 0
        assert ujson.loads(out)["count"] == 7

    def test_check_marking(self, cli, write_json):
        poset_file = write_json(complete_skeleton(3))
        marking_file = write_json({"corners": [{"triangle": "t1-2-3", "edges": ["e1-3", "e2-3"]}]})

        code, out, _ = cli("markings", "check", marking_file, "--poset", poset_file)
        report = ujson.loads(out)

        assert code == 0
        assert report["one_marking"] is True
        assert report["locally_feasible"] is True
        assert report["feasible"] is True
        assert report["cocycle"] is not None

    def test_cutsets(self, cli, write_json, path2):
        code, out, _ = cli("markings", "cutsets", "--poset", write_json(path2))
        report = ujson.loads(out)

        assert code == 0
        assert report["minimal"] == [["g0"], ["g1"]]


class TestMetricCommands:
    """Тесты команд metrics"""

    def test_k32_metric_is_extreme(self, cli, write_json, k5, k32):
        poset_file = write_json(k5)
        code, out, _ = cli("metrics", "graph-metric", "--poset", poset_file, "--subgraph", write_json(k32))
        report = ujson.loads(out)
        assert code == 0
        assert report["bypassing"] is True
        assert report["metric"]["values"]["e1-2"] == "2"

        code, out, _ = cli("metrics", "check-extreme", "--poset", poset_file, "--metric", write_json(report))
        certificate = ujson.loads(out)

        assert code == 0
        assert certificate["extreme"] is True
        assert certificate["kernel_dim"] == 1

    def test_bare_metric_document(self, cli, write_json, k5, k32):
        _, out, _ = cli("metrics", "graph-metric", "--poset", write_json(k5), "--subgraph", write_json(k32))

        metric_file = write_json(ujson.loads(out)["metric"])

        code, out, _ = cli("metrics", "check-extreme", "--poset", write_json(k5), "--metric", metric_file)

        assert code == 0
        assert ujson.loads(out)["extreme"] is True

    def test_malformed_metric_in_report(self, cli, write_json, k4):
        broken = write_json({"metric": {"values": {"e1-2": 0.5}}})

        code, _, err = cli("metrics", "check-extreme", "--poset", write_json(k4), "--metric", broken)

        assert code == 2
        assert ":metric" in err

    def test_walks(self, cli, write_json, k4):
        subgraph = {"edges": ["e1-2", "e2-3", "e3-4"], "vertices": ["v1", "v2", "v3", "v4"]}

        _, out, _ = cli("metrics", "graph-metric", "--walks", "--poset", write_json(k4), "--subgraph", write_json(subgraph))
        walks = ujson.loads(out)["walks"]

        assert set(walks) == {"e1-3", "e1-4", "e2-4"}
        assert len(walks["e1-4"]["edges"]) == 3

    def test_contract_walk(self, cli, write_json, k4):
        code, out, _ = cli("metrics", "contract", "--poset", write_json(k4), "--walk", "e1-2,e2-3,e3-4")
        report = ujson.loads(out)

        assert code == 0
        assert report["walk"]["vertices"] == ["v1", "v2", "v3", "v4"]
        assert "e1-4" in report["contractions"]

    def test_contract_broken_walk(self, cli, write_json, k4):
        code, _, _ = cli("metrics", "contract", "--poset", write_json(k4), "--walk", "e1-2,e3-4")

        assert code == 2

    def test_cut(self, cli):
        code, out, _ = cli("metrics", "cut", "--complete", "4", "--side", "v1")
        values = ujson.loads(out)["values"]

        assert code == 0
        assert values["e1-2"] == "1"
        assert values["e2-3"] == "0"

    def test_hamiltonian_cone_instance(self, cli, write_json):
        h = graph_poset(["a", "b", "c", "d"], [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a")], prefix="h")

        code, out, _ = cli("metrics", "hamiltonian-cone", "--graph", write_json(h), "--n", "5", "--cycle", "a,b,c,d")
        assert code == 0
        instance = write_json(ujson.loads(out))

        code, out, _ = cli("metrics", "ic-color", "--instance", instance)
        assert code == 0
        assert ujson.loads(out)["count"] == 1

        _, out, _ = cli("metrics", "graph-metric", "--instance", instance)
        assert ujson.loads(out)["bypassing"] is True

    def test_cycle_bound_option(self, cli, write_json, k5, k32):
        code, out, _ = cli("--cycle-bound", "6", "metrics", "ic-color", "--poset", write_json(k5), "--subgraph", write_json(k32))
        report = ujson.loads(out)

        assert code == 0
        assert report["cycle_bound"] == 6
        assert report["complete"] is True

    def test_subgraph_vertices_default_to_endpoints(self, cli, write_json, k4):
        star = write_json({"edges": ["e1-2", "e1-3", "e1-4"]})

        code, out, _ = cli("metrics", "graph-metric", "--poset", write_json(k4), "--subgraph", star)

        assert code == 0
        assert ujson.loads(out)["metric"]["values"]["e2-3"] == "2"

    def test_subgraph_with_unknown_edge(self, cli, write_json, k4):
        code, _, err = cli("metrics", "graph-metric", "--poset", write_json(k4), "--subgraph", write_json({"edges": ["e1-9"]}))

        assert code == 2
        assert "e1-9" in err

    def test_subgraph_required(self, cli, write_json, k4):
        code, _, _ = cli("metrics", "graph-metric", "--poset", write_json(k4))

        assert code == 2


class TestOutput:
    """Тесты форматов вывода, журнала и разбора аргументов"""

    def test_table_format(self, cli):
        code, out, _ = cli("--format", "table", "poset", "build", "--complete", "3")
        lines = out.splitlines()

        assert code == 0
        assert [line.split(":")[0] for line in lines] == ["edges", "triangles", "vertices"]
        assert lines[2] == 'vertices: ["v1","v2","v3"]'

    def test_off_format_only_for_off_command(self, cli):
        code, _, _ = cli("--format", "off", "poset", "build", "--complete", "3")

        assert code == 2

    def test_debug_log_goes_to_stderr(self, cli):
        code, out, err = cli("--log-level", "DEBUG", "--seed", "3", "poset", "build", "--complete", "3")

        assert code == 0
        assert "Зерно 3" in err
        assert "Зерно" not in out

    def test_unknown_command(self, cli):
        with pytest.raises(SystemExit) as exc_info:
            cli("polygon", "dim")
        assert exc_info.value.code == 2

    def test_missing_required_option(self, cli):
        with pytest.raises(SystemExit) as exc_info:
            cli("metrics", "hamiltonian-cone", "--n", "5")
        assert exc_info.value.code == 2
