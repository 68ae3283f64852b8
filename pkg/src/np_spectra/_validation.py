"""Input checks shared by the estimators and the CLI."""
from __future__ import annotations

import numpy as np

from .exceptions import InvalidArgumentError
from .geometry import BoundaryGeometry


def as_geometry(X) -> BoundaryGeometry:
    """Accept a geometry object or its JSON document."""
    if isinstance(X, BoundaryGeometry):
        return X
    if isinstance(X, dict):
        from .io import geometry_from_spec

        return geometry_from_spec(X)
    raise InvalidArgumentError(f"expected a BoundaryGeometry or geometry spec, got {type(X).__name__}")


def _grid_count(size) -> int:
    if np.isscalar(size):
        return int(size)
    n_theta, n_phi = size
    return int(n_theta) * int(n_phi)


def check_grid_sizes(sizes) -> list:
    """Grid sizes as a list, strictly increasing in node count."""
    sizes = [s if np.isscalar(s) else tuple(s) for s in sizes]
    if not sizes:
        raise InvalidArgumentError("at least one grid size is required")
    counts = [_grid_count(s) for s in sizes]
    if any(b <= a for a, b in zip(counts, counts[1:])):
        raise InvalidArgumentError(f"grid sizes must be strictly increasing, got {sizes}")
    return sizes


def check_window(window, j) -> tuple:
    j_min, j_max = window if window is not None else (4, None)
    if j_max is None:
        j_max = int(np.max(j))
    if j_min < 1 or j_max < j_min:
        raise InvalidArgumentError(f"bad window ({j_min}, {j_max})")
    return j_min, j_max
