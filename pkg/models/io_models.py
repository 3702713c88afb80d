from typing import List
from pydantic import BaseModel, Field, field_validator, model_validator


class PathModel(BaseModel):
    """Path JSON: {"n": int, "points": [[float, ...], ...]}"""

    n: int = Field(ge=1)
    points: List[List[float]] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_points(self) -> "PathModel":
        for point in self.points:
            if len(point) != self.n:
                raise ValueError(f"point {point} does not have {self.n} coordinates")
        return self


class SurfaceModel(BaseModel):
    """Surface JSON for p = 2: grid[s][t] is a point of R^n."""

    n: int = Field(ge=1)
    p: int = 2
    grid: List[List[List[float]]] = Field(min_length=2)

    @field_validator("p")
    @classmethod
    def _check_p(cls, value: int) -> int:
        if value != 2:
            raise ValueError("a nested grid is only accepted for p = 2")
        return value

    @model_validator(mode="after")
    def _check_grid(self) -> "SurfaceModel":
        columns = len(self.grid[0])
        if columns < 2:
            raise ValueError("each row needs at least two points")
        for row in self.grid:
            if len(row) != columns:
                raise ValueError("rows have different lengths")
            for point in row:
                if len(point) != self.n:
                    raise ValueError(f"point {point} does not have {self.n} coordinates")
        return self


class BraneModel(BaseModel):
    """Brane JSON: interval counts per axis and a flat row-major point array."""

    n: int = Field(ge=1)
    p: int = Field(ge=2)
    shape: List[int]
    points: List[float]

    @model_validator(mode="after")
    def _check_shape(self) -> "BraneModel":
        if len(self.shape) != self.p:
            raise ValueError(f"shape needs {self.p} entries, got {len(self.shape)}")
        if any(size < 1 for size in self.shape):
            raise ValueError("every axis needs at least one interval")
        expected = self.n
        for size in self.shape:
            expected *= size + 1
        if len(self.points) != expected:
            raise ValueError(f"expected {expected} coordinates, got {len(self.points)}")
        return self
