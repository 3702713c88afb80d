"""Sampled paths and branes in ℝⁿ, plus the reference geometries used to test holonomy.

A path function maps a parameter array ``t`` to points of shape ``t.shape + (n,)``;
a surface function maps broadcastable ``(s, t)`` the same way. The builders below
return such functions; ``sample_path``/``sample_surface``/``sample_brane`` turn them
into the grids the holonomy engine consumes. Grid axis order is
(b_1, …, b_{p−1}, t) with b_1 the outermost brane coordinate.
"""

import logging
import numpy as np

from pydantic import ValidationError
from typing import Callable, List, Optional, Sequence, Tuple

from config import MyConfig
from models.io_models import BraneModel, PathModel, SurfaceModel
from utils.exceptions import ConfigurationError, GlobeConditionError

logger = logging.getLogger(__name__)

PathFunction = Callable[[np.ndarray], np.ndarray]
SurfaceFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]

# s-fold traversal 0 → ¾ → ¼ → 1 at constant speed 2
FOLD_BREAKS = (0.375, 0.625)


class PLPath:
    """A piecewise-linear path through the given points, in order."""

    def __init__(self, n: int, points: Sequence[Sequence]):
        points = [tuple(point) for point in points]
        if n < 1:
            raise ConfigurationError(f"A path needs n >= 1, got {n}")
        if not points:
            raise ConfigurationError("A path needs at least one point")
        for point in points:
            if len(point) != n:
                raise ConfigurationError(f"Point {point} does not lie in R^{n}")
        self.n = n
        self.points = points

    @classmethod
    def from_array(cls, array: np.ndarray) -> "PLPath":
        array = np.asarray(array, dtype=float)
        if array.ndim != 2:
            raise ConfigurationError(f"Expected an (N, n) array of points, got shape {array.shape}")
        return cls(array.shape[1], [tuple(float(x) for x in row) for row in array])

    def __len__(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"<PLPath n={self.n} points={len(self.points)}>"

    @property
    def array(self) -> np.ndarray:
        return np.array([[float(x) for x in point] for point in self.points]).reshape(-1, self.n)

    @property
    def start(self) -> Tuple:
        return self.points[0]

    @property
    def end(self) -> Tuple:
        return self.points[-1]

    def increments(self) -> List[Tuple]:
        """Exact segment vectors (arithmetic of the stored coordinates)."""
        return [
            tuple(b - a for a, b in zip(first, second))
            for first, second in zip(self.points, self.points[1:])
        ]

    def to_dict(self) -> dict:
        return {"n": self.n, "points": [[float(x) for x in point] for point in self.points]}

    @classmethod
    def from_dict(cls, payload: dict) -> "PLPath":
        try:
            model = PathModel.model_validate(payload)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid path: {str(e)}") from e
        return cls(model.n, model.points)


class SampledBrane:
    """A p-brane sampled on a regular grid: ``grid`` has shape (N₁+1, …, N_p+1, n)."""

    def __init__(self, grid: np.ndarray, globe_tol: Optional[float] = MyConfig.GLOBE_TOL):
        grid = np.asarray(grid, dtype=float)
        if grid.ndim < 3:
            raise ConfigurationError(f"A brane grid needs at least two axes, got shape {grid.shape}")
        if min(grid.shape[:-1]) < 2:
            raise ConfigurationError(f"Degenerate grid of shape {grid.shape}: need 2 samples per axis")
        self.grid = grid
        self.n = grid.shape[-1]
        self.p = grid.ndim - 1
        self.globe_defect = self.check_globe(globe_tol)

    def __repr__(self) -> str:
        return f"<SampledBrane p={self.p} n={self.n} shape={self.grid.shape[:-1]}>"

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.grid.shape[:-1]

    def check_globe(self, tol: Optional[float]) -> float:
        """Largest violation of the globe conditions; raises above ``tol``.

        The t-faces are single points, and the faces {b_j = 0, 1} may only depend on
        the coordinates b_{j+1}, …, t.
        """
        defect = 0.0
        for end in (0, -1):
            face = self.grid[..., end, :]
            defect = max(defect, float(np.max(np.abs(face - face.reshape(-1, self.n)[0]))))
        for j in range(1, self.p - 1):
            for end in (0, -1):
                face = np.take(self.grid, end, axis=j)
                leading = face[(0,) * j]
                defect = max(defect, float(np.max(np.abs(face - leading))))
        if tol is not None and defect > tol:
            raise GlobeConditionError(
                f"Brane violates the globe conditions by {defect:.3e} (tolerance {tol:.1e})"
            )
        return defect

    def rows(self) -> np.ndarray:
        """The transgressed paths, one per grid point of the brane coordinates."""
        return self.grid.reshape(-1, self.grid.shape[-2], self.n)

    def face(self, end: int) -> "SampledBrane":
        """The (p−1)-brane {b_1 = 0} (end=0) or {b_1 = 1} (end=−1)."""
        if self.p < 3:
            raise ConfigurationError("Faces of a 2-brane are paths; use the rows instead")
        return SampledBrane(self.grid[end], globe_tol=None)

    def to_dict(self) -> dict:
        if self.p == 2:
            return {"n": self.n, "p": 2, "grid": self.grid.tolist()}
        return {
            "n": self.n,
            "p": self.p,
            "shape": [size - 1 for size in self.shape],
            "points": self.grid.reshape(-1).tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict, globe_tol: Optional[float] = MyConfig.GLOBE_TOL):
        try:
            if int(payload.get("p", 2)) == 2 and "grid" in payload:
                model = SurfaceModel.model_validate(payload)
                grid = np.array(model.grid, dtype=float)
            else:
                model = BraneModel.model_validate(payload)
                shape = tuple(size + 1 for size in model.shape) + (model.n,)
                grid = np.array(model.points, dtype=float).reshape(shape)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid brane: {str(e)}") from e
        if grid.shape[-1] != model.n:
            raise ConfigurationError(f"Grid points are not in R^{model.n}")
        return cls(grid, globe_tol=globe_tol)


##########################
# PATHS AND THEIR ALGEBRA #
##########################


def path_reverse(path: PLPath) -> PLPath:
    return PLPath(path.n, list(reversed(path.points)))


def path_concat(first: PLPath, second: PLPath, tol: float = 1e-12) -> PLPath:
    """``first`` followed by ``second``; the end of one must be the start of the other."""
    if first.n != second.n:
        raise ConfigurationError(f"Cannot concatenate paths in R^{first.n} and R^{second.n}")
    gap = max(abs(float(a) - float(b)) for a, b in zip(first.end, second.start))
    if gap > tol:
        raise ConfigurationError(f"Paths do not meet: gap {gap:.3e}")
    return PLPath(first.n, first.points + second.points[1:])


def smoothstep(a):
    return a * a * (3 - 2 * a)


def sample_path(path: PathFunction, samples: int, phi: Callable = None) -> PLPath:
    t = np.linspace(0.0, 1.0, samples)
    if phi is not None:
        t = phi(t)
    return PLPath.from_array(path(t))


def random_pl_path(
    rng: np.random.Generator, n: int, segments: int, start=None, end=None, spread: float = 0.5
) -> PLPath:
    """Seeded random polygon; ``start``/``end`` pin the endpoints."""
    points = rng.uniform(-spread, spread, size=(segments + 1, n))
    if start is not None:
        points[0] = np.asarray(start, dtype=float)
    if end is not None:
        points[-1] = np.asarray(end, dtype=float)
    return PLPath.from_array(points)


def lattice_path(axes: Sequence[int], n: int, scale: float = 1.0) -> PathFunction:
    """Unit steps along the given coordinate axes, each taking an equal share of time."""
    steps = len(axes)

    def path(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape + (n,))
        for j, axis in enumerate(axes):
            out[..., axis - 1] += scale * np.clip(t * steps - j, 0.0, 1.0)
        return out

    return path


def quarter_circle(t):
    theta = 0.5 * np.pi * np.asarray(t, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


############
# SURFACES #
############


def sweep(paths: Sequence[PathFunction]) -> SurfaceFunction:
    """Straight-line homotopies between consecutive paths, equal s-intervals."""
    if len(paths) < 2:
        raise ConfigurationError("A sweep needs at least two paths")
    pieces = len(paths) - 1

    def surface(s, t):
        s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        out = None
        for j, path in enumerate(paths):
            weight = np.maximum(0.0, 1.0 - np.abs(s * pieces - j))[..., None]
            term = weight * path(t)
            out = term if out is None else out + term
        return out

    return surface


def coordinate_square(n: int, i: int = 1, j: int = 2) -> SurfaceFunction:
    """Unit square in the (i, j)-plane swept from (e_j then e_i) to (e_i then e_j).

    In this orientation the Z_ij-coefficient of the 2-holonomy is +1.
    """
    if not 1 <= i < j <= n:
        raise ConfigurationError(f"Need 1 <= i < j <= n, got i={i}, j={j}, n={n}")
    return sweep([lattice_path([j, i], n), lattice_path([i, j], n)])


def bump_surface(n: int, height: float = 0.3, lift: float = 0.2) -> SurfaceFunction:
    """A smooth non-planar globe from 0 to e_1 + lift·e_3 (when n ≥ 3)."""
    if n < 2:
        raise ConfigurationError("bump_surface needs n >= 2")

    def surface(s, t):
        s, t = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(t, dtype=float))
        out = np.zeros(s.shape + (n,))
        bump = np.sin(np.pi * t)
        out[..., 0] = t + 0.5 * height * bump * np.sin(np.pi * s) * (1 - t)
        out[..., 1] = height * bump * (1 - 2 * s)
        if n >= 3:
            out[..., 2] = lift * t * t + height * bump * np.sin(np.pi * s) * (0.5 + t)
        return out

    return surface


def coordinate_cube(n: int = 3) -> Callable:
    """Positively oriented unit cube in the first three coordinates.

    The two faces {b_1 = 0, 1} sweep e1e2e3 to e3e2e1 through opposite sequences of
    adjacent transpositions; with a t-kink and an s-kink at every third, the brane is
    multilinear on grids whose sizes are multiples of 3.
    """
    if n < 3:
        raise ConfigurationError("coordinate_cube needs n >= 3")
    near = sweep([lattice_path(order, n) for order in ((1, 2, 3), (1, 3, 2), (3, 1, 2), (3, 2, 1))])
    far = sweep([lattice_path(order, n) for order in ((1, 2, 3), (2, 1, 3), (2, 3, 1), (3, 2, 1))])

    def brane(r, s, t):
        r, s, t = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (r, s, t)))
        return (1 - r)[..., None] * near(s, t) + r[..., None] * far(s, t)

    return brane


def reparametrize(surface: SurfaceFunction, phi: Callable = smoothstep) -> SurfaceFunction:
    def reparametrized(s, t):
        return surface(phi(np.asarray(s, dtype=float)), phi(np.asarray(t, dtype=float)))

    return reparametrized


def fold_map(u):
    """0 → ¾ → ¼ → 1 at constant speed 2; a thin backtrack over the middle half."""
    u = np.asarray(u, dtype=float)
    first, second = FOLD_BREAKS
    return np.where(
        u <= first,
        2 * u,
        np.where(u <= second, 0.75 - 2 * (u - first), 0.25 + 2 * (u - second)),
    )


def fold_insert(surface: SurfaceFunction, axis: str = "s") -> SurfaceFunction:
    """Insert a degenerate fold in the s or t direction.

    Sampled with twice as many intervals along the folded axis, the fold revisits
    exactly the rows (or columns) of the unfolded brane.
    """
    if axis not in ("s", "t"):
        raise ConfigurationError(f"Fold axis must be 's' or 't', got {axis}")

    def folded(s, t):
        if axis == "s":
            return surface(fold_map(s), t)
        return surface(s, fold_map(t))

    return folded


def sample_surface(
    surface: SurfaceFunction, strips: int, columns: int, globe_tol=MyConfig.GLOBE_TOL
) -> SampledBrane:
    s = np.linspace(0.0, 1.0, strips + 1)[:, None]
    t = np.linspace(0.0, 1.0, columns + 1)[None, :]
    return SampledBrane(surface(s, t), globe_tol=globe_tol)


def sample_brane(brane: Callable, shape: Sequence[int], globe_tol=MyConfig.GLOBE_TOL):
    """Sample a p-brane function on a grid with ``shape`` intervals per axis."""
    axes = [np.linspace(0.0, 1.0, size + 1) for size in shape]
    mesh = np.meshgrid(*axes, indexing="ij")
    return SampledBrane(brane(*mesh), globe_tol=globe_tol)


######################
# GRID COMPOSITIONS  #
######################


def stack_vertical(first: SampledBrane, second: SampledBrane, tol: float = 1e-12) -> SampledBrane:
    """``first`` swept before ``second``: rows of first, then rows of second."""
    if first.p != 2 or second.p != 2:
        raise ConfigurationError("Vertical stacking is implemented for 2-branes")
    if first.grid.shape[1:] != second.grid.shape[1:]:
        raise ConfigurationError("Stacked surfaces need the same t-sampling")
    gap = float(np.max(np.abs(first.grid[-1] - second.grid[0])))
    if gap > tol:
        raise ConfigurationError(f"Surfaces do not meet along a common path: gap {gap:.3e}")
    return SampledBrane(np.concatenate([first.grid, second.grid[1:]], axis=0))


def _check_joint(point_a, point_b, tol: float, what: str):
    gap = float(np.max(np.abs(np.asarray(point_a, dtype=float) - np.asarray(point_b, dtype=float))))
    if gap > tol:
        raise ConfigurationError(f"{what}: gap {gap:.3e}")


def whisker_path_after(surface: SampledBrane, path: PLPath, tol: float = 1e-12) -> SampledBrane:
    """Every row of ``surface`` continued by ``path``."""
    _check_joint(surface.grid[0, -1], path.start, tol, "Path does not start at the surface target")
    tail = np.broadcast_to(path.array[1:], (surface.shape[0],) + path.array[1:].shape)
    return SampledBrane(np.concatenate([surface.grid, tail], axis=1))


def whisker_path_before(path: PLPath, surface: SampledBrane, tol: float = 1e-12) -> SampledBrane:
    """``path`` followed by every row of ``surface``."""
    _check_joint(surface.grid[0, 0], path.end, tol, "Path does not end at the surface source")
    head = np.broadcast_to(path.array[:-1], (surface.shape[0],) + path.array[:-1].shape)
    return SampledBrane(np.concatenate([head, surface.grid], axis=1))


def reverse_s(surface: SampledBrane) -> SampledBrane:
    return SampledBrane(surface.grid[::-1].copy())


def split_s(surface: SampledBrane, row: int) -> Tuple[SampledBrane, SampledBrane]:
    """Cut a 2-brane along grid row ``row``; stack_vertical undoes the cut."""
    if not 1 <= row < surface.shape[0] - 1:
        raise ConfigurationError(f"Row {row} does not split a brane with {surface.shape[0]} rows")
    return SampledBrane(surface.grid[: row + 1].copy()), SampledBrane(surface.grid[row:].copy())
