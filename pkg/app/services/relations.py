import logging
from collections import defaultdict
from typing import Optional

from app.models.relation import GeneratorPoint, TernaryRelation

logger = logging.getLogger(__name__)

Row = tuple[int, ...]


def generator_points(rel: TernaryRelation) -> list[GeneratorPoint]:
    '''
    Порождающие точки тернарного многогранника P(T)

    Для каждой тройки [i, j, k] добавляются точки 1_i + 1_j - 1_k и две ее
    перестановки. Совпадающие точки склеиваются, порядок лексикографический.

    Args:
        rel: тернарное отношение

    Returns:
        List[GeneratorPoint]: различные порождающие точки
    '''
    points: dict[Row, GeneratorPoint] = {}
    for t, triple in enumerate(rel.triples):
        for negative in triple:
            coords = [0] * rel.size
            for i in triple:
                coords[i] = -1 if i == negative else 1
            key = tuple(coords)
            if key not in points:
                points[key] = GeneratorPoint(coords=key, source=(t, negative))
    return [points[key] for key in sorted(points)]


def dual_cone_hrep(rel: TernaryRelation) -> tuple[Row, ...]:
    '''
    Система неравенств двойственного конуса P(T)^∨: x_i + x_j - x_k >= 0
    для каждой тройки и каждого выделенного элемента k

    Returns:
        tuple[Row, ...]: отсортированные строки без повторов (3·|R| строк)
    '''
    rows = set()
    for triple in rel.triples:
        for negative in triple:
            row = [0] * rel.size
            for i in triple:
                row[i] = -1 if i == negative else 1
            rows.add(tuple(row))
    return tuple(sorted(rows))


def _pair_codegrees(rel: TernaryRelation) -> dict[tuple[int, int], int]:
    codegree: dict[tuple[int, int], int] = defaultdict(int)
    for i, j, k in rel.triples:
        for pair in ((i, j), (i, k), (j, k)):
            codegree[pair] += 1
    return codegree


def _search_order(rel: TernaryRelation) -> list[int]:
    # обход в ширину по тройкам: каждый следующий элемент по возможности
    # связан с уже сопоставленными, что усиливает отсечения
    neighbours: dict[int, set[int]] = defaultdict(set)
    for triple in rel.triples:
        for i in triple:
            neighbours[i].update(j for j in triple if j != i)
    order: list[int] = []
    seen: set[int] = set()
    for start in range(rel.size):
        if start in seen:
            continue
        seen.add(start)
        queue = [start]
        while queue:
            current = queue.pop(0)
            order.append(current)
            for nxt in sorted(neighbours[current]):
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return order


def relations_isomorphic(a: TernaryRelation, b: TernaryRelation) -> Optional[dict[str, str]]:
    '''
    Поиск изоморфизма тернарных отношений перебором с возвратом

    Кандидаты отсекаются по степеням элементов и по числу общих троек для пар
    уже сопоставленных элементов. Результат детерминирован: элементы a
    сопоставляются в порядке обхода в ширину по тройкам (_search_order),
    кандидаты из b перебираются по возрастанию индекса; возвращается первая
    найденная биекция.

    Args:
        a: первое отношение
        b: второе отношение

    Returns:
        Optional[dict[str, str]]: биекция элементов a -> b или None
    '''
    if a.size != b.size or len(a.triples) != len(b.triples):
        return None
    if sorted(a.degrees) != sorted(b.degrees):
        return None

    codeg_a = _pair_codegrees(a)
    codeg_b = _pair_codegrees(b)
    triples_b = set(b.triples)
    triples_of_a: dict[int, list[tuple[int, int, int]]] = defaultdict(list)
    for triple in a.triples:
        for i in triple:
            triples_of_a[i].append(triple)

    order = _search_order(a)
    mapping: dict[int, int] = {}
    used = [False] * b.size

    def consistent(x: int, y: int) -> bool:
        for z, w in mapping.items():
            pair_a = (min(x, z), max(x, z))
            pair_b = (min(y, w), max(y, w))
            if codeg_a.get(pair_a, 0) != codeg_b.get(pair_b, 0):
                return False
        for triple in triples_of_a[x]:
            others = [i for i in triple if i != x]
            if all(i in mapping for i in others):
                image = tuple(sorted([y] + [mapping[i] for i in others]))
                if image not in triples_b:
                    return False
        return True

    def extend(depth: int) -> bool:
        if depth == len(order):
            return True
        x = order[depth]
        for y in range(b.size):
            if used[y] or a.degrees[x] != b.degrees[y]:
                continue
            if not consistent(x, y):
                continue
            mapping[x] = y
            used[y] = True
            if extend(depth + 1):
                return True
            del mapping[x]
            used[y] = False
        return False

    if not extend(0):
        logger.debug("Изоморфизм не найден (%d элементов, %d троек)", a.size, len(a.triples))
        return None
    return {a.elements[x]: b.elements[mapping[x]] for x in range(a.size)}
