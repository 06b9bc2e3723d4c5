import argparse
import logging
import sys
from typing import Any, Optional, Sequence

import ujson
from pydantic import BaseModel

from app.cache import get_cache
from app.config import Settings, settings
from app.errors import ToolError, ValidationFailed
from app.models.cone import RationalCone
from app.models.marking import Marking
from app.models.metric import PosetMetric
from app.models.poset import SimplicialPoset2, Subgraph, VectorConfiguration
from app.models.relation import TernaryRelation
from app.schemas.documents import (
    ConeDocument,
    CutsetsReport,
    DivergenceDocument,
    ExtremalityReport,
    FacetEntry,
    FacetsReport,
    GraphMetricReport,
    IcColorReport,
    IsoReport,
    MarkingCheckReport,
    MarkingEntry,
    MarkingsReport,
    RaysReport,
    RelationDocument,
    VerticesReport,
    VolumeReport,
    load_document,
    parse_document,
    read_payload,
)
from app.services import markings, metrics, polyhedra, posets
from app.services.cones import ConeService
from app.services.relations import dual_cone_hrep, relations_isomorphic

logger = logging.getLogger("app")

LOG_FORMAT = "%(asctime)s [%(levelname)8s] %(message)s (%(filename)s:%(lineno)s)"
LOG_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

_handler: Optional[logging.Handler] = None


def configure_logging(level: str) -> None:
    '''Журнал пакета app пишется в stderr; stdout остается только для результатов'''
    global _handler
    if _handler is not None:
        logger.removeHandler(_handler)
    _handler = logging.StreamHandler(sys.stderr)
    _handler.setFormatter(logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT))
    logger.addHandler(_handler)
    logger.setLevel(level.upper())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ternary",
        description="Тернарные многогранники, разметки двумерных посетов и экстремальные метрики",
    )
    parser.add_argument("--version", action="version", version=f"{settings.TOOL_TITLE} {settings.TOOL_VERSION}")
    parser.add_argument("--cache-dir", help="каталог файлового кеша лучей")
    parser.add_argument("--max-rays", type=int, help="предел числа промежуточных лучей")
    parser.add_argument("--cycle-bound", type=int, help="граница длины четных циклов ic-раскраски")
    parser.add_argument("--format", dest="output_format", choices=("json", "table", "off"), help="формат вывода")
    parser.add_argument("--seed", type=int, help="зерно для генераторов случайных проверок")
    parser.add_argument("--log-level", help="уровень журнала (DEBUG, INFO, WARNING, ...)")
    groups = parser.add_subparsers(dest="group", required=True)

    relation = groups.add_parser("relation", help="построение тернарных отношений").add_subparsers(dest="command", required=True)
    build = relation.add_parser("build", help="отношение графа, посета, системы корней или конфигурации векторов")
    source = build.add_mutually_exclusive_group(required=True)
    source.add_argument("--graph", help="граф (посет без треугольников): космологическое отношение")
    source.add_argument("--poset", help="двумерный посет: отношение треугольников")
    source.add_argument("--root-system", nargs=2, metavar=("TYPE", "N"), help="система корней A, B или D")
    source.add_argument("--vectors", help="конфигурация векторов {±α}")

    poset = groups.add_parser("poset", help="построение и проверка посетов").add_subparsers(dest="command", required=True)
    poset_build = poset.add_parser("build", help="именованные посеты")
    kind = poset_build.add_mutually_exclusive_group(required=True)
    kind.add_argument("--complete", type=int, metavar="N", help="K_n")
    kind.add_argument("--doubled", type=int, metavar="N", help="удвоенный K̄_n")
    kind.add_argument("--cone-over", metavar="FILE", help="двумерный остов конуса над посетом")
    kind.add_argument("--graph-cone", metavar="FILE", help="конус над графом")
    poset_build.add_argument("--apex", default="v0", help="вершина конуса")
    poset_validate = poset.add_parser("validate", help="проверка аксиом посета")
    poset_validate.add_argument("input", nargs="?")

    polytope = groups.add_parser("polytope", help="тернарный многогранник P(T)").add_subparsers(dest="command", required=True)
    for name in ("vertices", "dim", "nvolume", "facets", "off"):
        command = polytope.add_parser(name)
        command.add_argument("input", nargs="?", help="файл отношения (по умолчанию stdin)")
        if name == "nvolume":
            command.add_argument("--method", choices=("placing", "pyramid"), default="placing")

    cone = groups.add_parser("cone", help="двойственный конус").add_subparsers(dest="command", required=True)
    for name in ("rays", "count"):
        command = cone.add_parser(name)
        command.add_argument("input", nargs="?", help="отношение, конус или отчет о лучах (по умолчанию stdin)")

    marking = groups.add_parser("markings", help="разметки посета").add_subparsers(dest="command", required=True)
    for name in ("minimal", "one-minimal", "check", "cutsets", "divergence"):
        command = marking.add_parser(name)
        command.add_argument("--poset", help="файл посета (по умолчанию stdin)")
        if name == "check":
            command.add_argument("marking", help="файл разметки")
        if name == "divergence":
            command.add_argument("--limit", type=int, default=16, help="наибольшее число ребер для перебора")

    metric = groups.add_parser("metrics", help="метрики на посетах").add_subparsers(dest="command", required=True)
    for name in ("graph-metric", "check-extreme", "ic-color", "cut", "hamiltonian-cone", "contract"):
        command = metric.add_parser(name)
        if name == "contract":
            command.add_argument("--poset", help="файл посета (по умолчанию stdin)")
            command.add_argument("--walk", required=True, help="ребра пути через запятую")
            continue
        if name == "hamiltonian-cone":
            command.add_argument("--graph", help="гамильтонов граф H (по умолчанию stdin)")
            command.add_argument("--n", type=int, required=True)
            command.add_argument("--cycle", required=True, help="гамильтонов цикл H: вершины через запятую")
            continue
        command.add_argument("--allow-impure", action="store_true", help="разрешить нечистые посеты")
        if name == "cut":
            target = command.add_mutually_exclusive_group(required=True)
            target.add_argument("--complete", type=int, metavar="N")
            target.add_argument("--poset")
            command.add_argument("--side", default="", help="вершины множества S через запятую")
            continue
        command.add_argument("--instance", help="файл с полями poset и subgraph (вывод hamiltonian-cone)")
        command.add_argument("--poset")
        if name == "check-extreme":
            command.add_argument("--metric", required=True)
        else:
            command.add_argument("--subgraph")
        if name == "graph-metric":
            command.add_argument("--walks", action="store_true", help="добавить кратчайшие стягиваемые пути")

    iso = groups.add_parser("iso", help="изоморфизм двух отношений")
    iso.add_argument("first")
    iso.add_argument("second")
    return parser


def _config(args: argparse.Namespace) -> Settings:
    update = {
        "CACHE_DIR": args.cache_dir,
        "MAX_RAYS": args.max_rays,
        "CYCLE_BOUND": args.cycle_bound,
        "DEFAULT_FORMAT": args.output_format,
        "LOG_LEVEL": args.log_level,
    }
    config = settings.model_copy(update={k: v for k, v in update.items() if v is not None})
    if config.MAX_RAYS < 1:
        raise ValidationFailed("--max-rays должен быть положительным")
    if config.CYCLE_BOUND < 4:
        raise ValidationFailed("--cycle-bound должен быть не меньше 4")
    return config


def _service(config: Settings) -> ConeService:
    return ConeService(get_cache(config), max_rays=config.MAX_RAYS, max_rows=config.MAX_ROWS)


def _relation(path: Optional[str]) -> TernaryRelation:
    return load_document(RelationDocument, path).to_relation()


def _poset(path: Optional[str]) -> SimplicialPoset2:
    p = load_document(SimplicialPoset2, path)
    posets.ensure_valid(p)
    return p


def _with_endpoints(g: Subgraph, p: SimplicialPoset2) -> Subgraph:
    '''Без поля vertices вершинами подграфа считаются концы его ребер'''
    if "vertices" in g.model_fields_set:
        return g
    try:
        return Subgraph.from_edges(p, g.edges)
    except ValueError as exc:
        raise ValidationFailed(f"Некорректный подграф: {exc}") from exc


def _instance(args: argparse.Namespace) -> tuple[SimplicialPoset2, Subgraph]:
    if args.instance:
        payload, name = read_payload(args.instance)
        if not isinstance(payload, dict):
            raise ValidationFailed(f"{name}: ожидался объект с полями poset и subgraph")
        p = parse_document(SimplicialPoset2, payload.get("poset"), f"{name}:poset")
        g = parse_document(Subgraph, payload.get("subgraph"), f"{name}:subgraph")
        posets.ensure_valid(p)
        return p, _with_endpoints(g, p)
    if not args.subgraph:
        raise ValidationFailed("Нужно указать --subgraph или --instance")
    p = _poset(args.poset)
    return p, _with_endpoints(load_document(Subgraph, args.subgraph), p)


def _metric(path: Optional[str]) -> PosetMetric:
    '''Метрика из файла: сам документ метрики или отчет graph-metric с полем metric'''
    payload, name = read_payload(path)
    if isinstance(payload, dict) and "metric" in payload:
        return parse_document(PosetMetric, payload["metric"], f"{name}:metric")
    return parse_document(PosetMetric, payload, name)


def _split(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def relation_build(args: argparse.Namespace, config: Settings) -> BaseModel:
    if args.graph:
        rel = posets.graph_relation(_poset(args.graph))
    elif args.poset:
        rel = posets.ternary_relation(_poset(args.poset))
    elif args.vectors:
        rel = posets.from_vector_configuration(load_document(VectorConfiguration, args.vectors))
    else:
        kind, n = args.root_system
        try:
            n = int(n)
        except ValueError:
            raise ValidationFailed(f"Ранг системы корней должен быть целым, получено {n!r}") from None
        rel = posets.from_vector_configuration(posets.root_system(kind, n))
    return RelationDocument.from_relation(rel)


def poset_build(args: argparse.Namespace, config: Settings) -> BaseModel:
    if args.complete is not None:
        return posets.complete_skeleton(args.complete)
    if args.doubled is not None:
        return posets.doubled_skeleton(args.doubled)
    return posets.cone_skeleton2(_poset(args.cone_over or args.graph_cone), apex=args.apex)


def poset_validate(args: argparse.Namespace, config: Settings) -> dict:
    violations = posets.validate(load_document(SimplicialPoset2, args.input))
    return {"valid": not violations, "violations": violations}


def polytope_command(args: argparse.Namespace, config: Settings) -> Any:
    poly = polyhedra.ternary_polytope(_relation(args.input))
    dim = polyhedra.dimension(poly)
    if args.command == "vertices":
        vertices = polyhedra.polytope_vertices(poly)
        return VerticesReport(dimension=dim, count=len(vertices), vertices=vertices)
    if args.command == "dim":
        return {"dimension": dim}
    if args.command == "nvolume":
        volume = polyhedra.normalized_volume(poly, method=args.method, max_rays=config.MAX_RAYS)
        return VolumeReport(dimension=dim, method=args.method, normalized_volume=volume)
    if args.command == "facets":
        facet_list = polyhedra.facets(poly, max_rays=config.MAX_RAYS)
        return FacetsReport(
            dimension=dim,
            count=len(facet_list),
            vertices=polyhedra.polytope_vertices(poly),
            facets=[FacetEntry(offset=f.offset, normal=f.normal, vertices=list(f.vertices)) for f in facet_list],
        )
    return polyhedra.export_off(poly, max_rays=config.MAX_RAYS)


def _cone_from_payload(path: Optional[str]) -> tuple[Optional[RationalCone], Any, str]:
    payload, name = read_payload(path)
    if isinstance(payload, dict) and "hrep" in payload:
        document = parse_document(ConeDocument, payload, name)
        try:
            return RationalCone(dim=document.dim, hrep=tuple(tuple(row) for row in document.hrep)), payload, name
        except ValueError as exc:
            raise ValidationFailed(f"{name}: {exc}") from exc
    if isinstance(payload, dict) and "rays" in payload:
        return None, payload, name
    rel = parse_document(RelationDocument, payload, name).to_relation()
    return RationalCone(dim=rel.size, hrep=dual_cone_hrep(rel)), payload, name


def cone_command(args: argparse.Namespace, config: Settings) -> Any:
    cone, payload, name = _cone_from_payload(args.input)
    if cone is None:
        report = parse_document(RaysReport, payload, name)
    else:
        report = RaysReport.from_rays(cone.dim, _service(config).rays(cone))
    if args.command == "count":
        return {"count": report.count}
    return report


def markings_command(args: argparse.Namespace, config: Settings) -> Any:
    p = _poset(args.poset)
    if args.command == "minimal":
        found = markings.minimal_feasible_markings(p, _service(config))
        entries = [MarkingEntry(marking=m, witness=list(ray)) for m, ray in found]
        return MarkingsReport(count=len(entries), markings=entries)
    if args.command == "one-minimal":
        found = markings.one_marking_minimals(p, limit=config.KERNEL_ENUM_LIMIT)
        entries = [MarkingEntry(marking=m, witness=list(delta)) for m, delta in found]
        return MarkingsReport(count=len(entries), markings=entries)
    if args.command == "check":
        m = load_document(Marking, args.marking)
        markings.check_marking(m, p)
        local = markings.is_locally_feasible(m, p)
        witness = markings.is_feasible(m, p)
        cocycle = None
        if local and m.is_one_marking():
            cocycle = list(markings.marking_to_cocycle(m, p))
        return MarkingCheckReport(
            one_marking=m.is_one_marking(),
            locally_feasible=local,
            feasible=witness is not None,
            witness=list(witness) if witness is not None else None,
            cocycle=cocycle,
        )
    if args.command == "cutsets":
        minimal = markings.minimal_cutsets(p)
        return CutsetsReport(
            basis=[list(c) for c in markings.cut_space(p)],
            minimal=[list(c) for c in minimal],
            count=len(minimal),
        )
    report = markings.marking_minimality_divergence(p, limit=args.limit, service=_service(config))
    return DivergenceDocument(**report.model_dump())


def metrics_command(args: argparse.Namespace, config: Settings) -> Any:
    if args.command == "hamiltonian-cone":
        h = _poset(args.graph)
        doubled, g = metrics.hamiltonian_cone_subgraph(h, args.n, _split(args.cycle))
        return {"poset": doubled.model_dump(mode="json"), "subgraph": g.model_dump(mode="json")}
    if args.command == "contract":
        p = _poset(args.poset)
        walk = metrics.walk_from_edges(p, _split(args.walk))
        return {"walk": walk.model_dump(mode="json"), "contractions": sorted(metrics.contractions_of(walk, p))}
    if args.command == "cut":
        p = posets.complete_skeleton(args.complete) if args.complete is not None else _poset(args.poset)
        return metrics.cut_metric(_split(args.side), p)
    if args.command == "check-extreme":
        if args.instance:
            p, _ = _instance(args)
        else:
            p = _poset(args.poset)
        d = _metric(args.metric)
        certificate = metrics.is_extreme_metric(d, p, allow_impure=args.allow_impure)
        return ExtremalityReport(
            extreme=certificate.extreme,
            kernel_dim=certificate.kernel_dim,
            tight_corners=list(certificate.tight_corners),
            tight_nonnegative=list(certificate.tight_nonnegative),
            kernel_basis=[list(v) for v in certificate.kernel_basis or ()],
        )

    p, g = _instance(args)
    if args.command == "ic-color":
        coloring = metrics.ic_coloring(g, p, config.CYCLE_BOUND, allow_impure=args.allow_impure)
        return IcColorReport(
            count=coloring.count,
            complete=coloring.complete,
            cycle_bound=coloring.cycle_bound,
            classes=[list(c) for c in coloring.classes],
            merges=list(coloring.merges),
        )
    d = metrics.graph_metric(g, p, allow_impure=args.allow_impure)
    walks = None
    if args.walks:
        walks = {
            e: metrics.shortest_contractable_walk(e, g, p)
            for e in p.edge_ids if e not in g.edge_set
        }
    return GraphMetricReport(bypassing=True, metric=d, walks=walks)


def iso_command(args: argparse.Namespace, config: Settings) -> BaseModel:
    bijection = relations_isomorphic(_relation(args.first), _relation(args.second))
    return IsoReport(isomorphic=bijection is not None, bijection=bijection)


HANDLERS = {
    ("relation", "build"): relation_build,
    ("poset", "build"): poset_build,
    ("poset", "validate"): poset_validate,
    "polytope": polytope_command,
    "cone": cone_command,
    "markings": markings_command,
    "metrics": metrics_command,
    "iso": iso_command,
}


def _jsonable(report: Any) -> Any:
    if isinstance(report, BaseModel):
        return report.model_dump(mode="json")
    return report


def render(report: Any, output_format: str) -> str:
    '''
    Текст результата: JSON с отсортированными ключами (детерминированный вывод),
    таблица "ключ: значение" или готовый текст OFF
    '''
    if isinstance(report, str):
        return report
    data = _jsonable(report)
    if output_format == "table" and isinstance(data, dict):
        lines = []
        for key in sorted(data):
            value = data[key]
            if isinstance(value, (dict, list)):
                value = ujson.dumps(value, sort_keys=True, ensure_ascii=False, escape_forward_slashes=False)
            lines.append(f"{key}: {value}")
        return "\n".join(lines) + "\n"
    if output_format == "off":
        raise ValidationFailed("Формат off доступен только для команды polytope off")
    return ujson.dumps(data, sort_keys=True, indent=2, ensure_ascii=False, escape_forward_slashes=False) + "\n"


def run(argv: Optional[Sequence[str]] = None) -> int:
    '''
    Точка входа CLI

    Returns:
        int: 0 при успехе, 2 при ошибке входных данных, 3 при превышении пределов
    '''
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level or settings.LOG_LEVEL)
    try:
        config = _config(args)
        if args.seed is not None:
            logger.debug("Зерно %d не используется детерминированными алгоритмами", args.seed)
        handler = HANDLERS.get((args.group, getattr(args, "command", None))) or HANDLERS[args.group]
        report = handler(args, config)
        sys.stdout.write(render(report, config.DEFAULT_FORMAT))
    except ToolError as exc:
        sys.stderr.write(f"ошибка: {exc.detail}\n")
        return exc.exit_code
    if isinstance(report, dict) and report.get("valid") is False:
        return ValidationFailed.exit_code
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
