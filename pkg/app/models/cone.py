from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

Row = tuple[int, ...]


class RationalCone(BaseModel):
    """
    Полиэдральный конус {x : A·x >= 0}, заданный целочисленными строками
    """
    model_config = ConfigDict(frozen=True)

    dim: int = Field(ge=0)
    hrep: tuple[Row, ...]

    @model_validator(mode="after")
    def _check_rows(self) -> "RationalCone":
        for k, row in enumerate(self.hrep):
            if len(row) != self.dim:
                raise ValueError(f"строка {k} имеет длину {len(row)}, ожидалось {self.dim}")
        return self

    @classmethod
    def from_rows(cls, rows, dim: Optional[int] = None) -> "RationalCone":
        rows = tuple(tuple(int(v) for v in row) for row in rows)
        if dim is None:
            dim = len(rows[0]) if rows else 0
        return cls(dim=dim, hrep=rows)


class ConeRays(BaseModel):
    """
    V-представление конуса: примитивные целые экстремальные лучи в
    лексикографическом порядке и базис пространства линейности
    """
    model_config = ConfigDict(frozen=True)

    rays: tuple[Row, ...] = ()
    lineality: tuple[Row, ...] = ()


class LatticePolytope(BaseModel):
    """
    Решеточный многогранник: выпуклая оболочка конечного набора целых точек
    """
    model_config = ConfigDict(frozen=True)

    points: tuple[Row, ...]

    @model_validator(mode="after")
    def _check_points(self) -> "LatticePolytope":
        if not self.points:
            raise ValueError("многогранник должен содержать хотя бы одну точку")
        n = len(self.points[0])
        if any(len(point) != n for point in self.points):
            raise ValueError("все точки должны иметь одинаковую размерность")
        return self

    @property
    def ambient_dim(self) -> int:
        return len(self.points[0])

    def distinct_points(self) -> list[Row]:
        return sorted(set(self.points))
