from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Annotated, Any, Iterable, Sequence

from pydantic import PlainSerializer, PlainValidator


def parse_rational(value: Any) -> Fraction:
    '''
    Приводит значение к точному рациональному числу

    Допускаются int, Fraction и строки вида "3", "-3/2". Числа с плавающей
    точкой отклоняются: все вычисления в ядре точные.
    '''
    if isinstance(value, bool):
        raise ValueError("логическое значение не является рациональным числом")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"не удалось разобрать рациональное число {value!r}") from exc
    raise ValueError(f"ожидалась строка или целое число, получено {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    '''Строковое представление: "2" или "3/2"'''
    return str(Fraction(value))


# Рациональное число, которое в JSON всегда хранится строкой
Rational = Annotated[
    Fraction,
    PlainValidator(parse_rational),
    PlainSerializer(format_rational, return_type=str),
]


def primitive_vector(vector: Iterable[Any]) -> tuple[int, ...]:
    '''
    Примитивный целочисленный представитель луча, порожденного вектором

    Args:
        vector: рациональные или целые координаты

    Returns:
        tuple[int, ...]: целый вектор с НОД координат, равным 1 (нулевой вектор не меняется)
    '''
    values = [Fraction(v) for v in vector]
    denominator = reduce(lcm, (v.denominator for v in values), 1)
    scaled = [int(v * denominator) for v in values]
    divisor = reduce(gcd, scaled, 0)
    if divisor == 0:
        return tuple(scaled)
    return tuple(v // divisor for v in scaled)


def dot(row: Sequence[int], vector: Sequence[Any]) -> Any:
    return sum(a * b for a, b in zip(row, vector) if a)
