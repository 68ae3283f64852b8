"""Quadrature grids and dense Nystrom matrices for K, K* and L_n.

All matrices carry the source measure in their columns: entry ``(i, j)``
is ``kernel(x_i, x_j) * measures[j]``.  The discrete K is the
measure-conjugated transpose of the discrete K*, so the two are similar and
satisfy the discrete duality ``<f, K* g>_m = <K f, g>_m`` exactly.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidArgumentError, UnsupportedOrderError
from .geometry import BoundaryGeometry, ParametricCurve
from .kernels import COMPOSED, NP, NP_STAR, KernelIdentity, diagonal_limit, sphere_area

__all__ = [
    "ROW_SUM",
    "DIAGONAL_LIMIT",
    "QuadratureGrid",
    "OperatorMatrix",
    "make_grid",
    "assemble",
    "assemble_composed",
    "discrete_adjoint",
]

ROW_SUM = "row_sum"
DIAGONAL_LIMIT = "diagonal_limit"
_BLOCK_ROWS = 256


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes in the parameter domain with weights and surface-measure elements.

    For ``d == 1`` nodes are parameters ``t``; for ``d == 2`` they are chart
    points ``(u, v)``.  ``points`` and ``normals`` cache the boundary sample.
    """

    d: int
    nodes: np.ndarray
    weights: np.ndarray
    measures: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    shape: tuple = ()

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def total_measure(self) -> float:
        return float(np.sum(self.measures))


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray
    grid: QuadratureGrid
    identity: KernelIdentity
    diagonal_rule: str
    metadata: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def kernel_values(self) -> np.ndarray:
        """Kernel samples ``L(x_i, x_j)``: the entries with the measure divided out."""
        return self.entries / self.grid.measures[None, :]

    def symmetrized(self) -> np.ndarray:
        """``D^{1/2} A D^{-1/2}``: the operator in the discrete L^2 orthonormal basis."""
        root = np.sqrt(self.grid.measures)
        return root[:, None] * self.entries / root[None, :]


def make_grid(geom: BoundaryGeometry, n_theta: int, n_phi: int | None = None
              ) -> QuadratureGrid:
    """Periodic trapezoid rule (curves) or Gauss-Legendre x trapezoid (surfaces).

    For surfaces ``n_theta`` counts Gauss-Legendre nodes in the polar angle
    and ``n_phi`` equispaced azimuthal nodes; no node lands on a pole.
    """
    if geom.dim_d == 1:
        if n_theta < 8:
            raise InvalidArgumentError(f"need at least 8 nodes, got {n_theta}")
        needed = getattr(geom, "metadata", {}).get("min_grid_nodes", 0)
        if n_theta < needed:
            warnings.warn(f"{geom.description}: {n_theta} nodes under-resolve the finest "
                          f"oscillation (advisory minimum {needed})", stacklevel=2)
        nodes = np.arange(n_theta) / n_theta
        weights = np.full(n_theta, 1.0 / n_theta)
        sample = geom.evaluate(nodes)
        return QuadratureGrid(1, nodes, weights, weights * sample.speed, sample.point,
                              sample.unit_normal, (n_theta,))

    if n_phi is None:
        n_phi = 2 * n_theta
    if n_theta < 4 or n_phi < 8:
        raise InvalidArgumentError(f"grid {n_theta}x{n_phi} is too coarse")
    x, w = np.polynomial.legendre.leggauss(n_theta)
    v, wv = 0.5 * (x + 1.0), 0.5 * w
    u = np.arange(n_phi) / n_phi
    vv, uu = np.meshgrid(v, u, indexing="ij")
    nodes = np.stack([uu.ravel(), vv.ravel()], axis=1)
    weights = np.outer(wv, np.full(n_phi, 1.0 / n_phi)).ravel()
    sample = geom.evaluate(nodes)
    return QuadratureGrid(2, nodes, weights, weights * sample.speed, sample.point,
                          sample.unit_normal, (n_theta, n_phi))


def _np_block(grid: QuadratureGrid, rows: slice) -> np.ndarray:
    """Off-diagonal K entries for a block of rows; the diagonal is left at zero."""
    d = grid.d
    diff = grid.points[rows, None, :] - grid.points[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", diff, diff)
    num = np.einsum("ijk,jk->ij", diff, grid.normals)
    idx = np.arange(rows.start, rows.stop)
    r2[idx - rows.start, idx] = 1.0
    num[idx - rows.start, idx] = 0.0
    if np.any(r2 == 0.0):
        raise InvalidArgumentError("duplicate quadrature nodes")
    block = -num / (sphere_area(d) * r2 ** ((d + 1) / 2))
    return block * grid.measures[None, :]


def assemble(geom: BoundaryGeometry, grid: QuadratureGrid,
             identity: KernelIdentity | str = NP_STAR, rule: str = ROW_SUM) -> OperatorMatrix:
    """Nystrom matrix of K (``"np"``) or K* (``"np_star"``).

    ROW_SUM fixes the diagonal of K so every row sums to 1/2 (the value of
    K on constants).  DIAGONAL_LIMIT uses the curvature limit of the kernel
    and is available for curves only.  K* is always built as
    ``D^{-1} A_K^T D`` with ``D = diag(measures)``.
    """
    if isinstance(identity, str):
        identity = KernelIdentity(identity, geom.dim_d)
    if identity.which == COMPOSED:
        raise InvalidArgumentError("use assemble_composed for L_n")
    if rule not in (ROW_SUM, DIAGONAL_LIMIT):
        raise InvalidArgumentError(f"unknown diagonal rule {rule!r}")
    if rule == DIAGONAL_LIMIT:
        if not isinstance(geom, ParametricCurve):
            raise InvalidArgumentError("DIAGONAL_LIMIT is defined for curves only")
        if geom.derivative_order < 2:
            raise UnsupportedOrderError("DIAGONAL_LIMIT needs two derivatives")

    n = grid.size
    a_k = np.empty((n, n))
    for start in range(0, n, _BLOCK_ROWS):
        rows = slice(start, min(start + _BLOCK_ROWS, n))
        a_k[rows] = _np_block(grid, rows)
    diag = np.arange(n)
    if rule == ROW_SUM:
        a_k[diag, diag] = 0.5 - np.sum(a_k, axis=1)
    else:
        a_k[diag, diag] = diagonal_limit(geom, grid.nodes) * grid.measures

    m = grid.measures
    entries = a_k if identity.which == NP else (a_k.T * m[None, :]) / m[:, None]
    meta = {"geometry": geom.description, "n_nodes": n, "grid_shape": list(grid.shape),
            "rule": rule, "kernel": identity.label, "d": geom.dim_d}
    return OperatorMatrix(entries, grid, identity, rule, meta)


def discrete_adjoint(entries: np.ndarray, measures: np.ndarray) -> np.ndarray:
    """Measure-conjugated transpose ``D^{-1} A^T D``."""
    return (entries.T * measures[None, :]) / measures[:, None]


def assemble_composed(a_star: OperatorMatrix, n: int) -> OperatorMatrix:
    """Discrete ``L_n``: ``K*(K K*)^((n-1)/2)`` for odd ``n``, ``(K K*)^(n/2)`` for even."""
    if n < 1 or int(n) != n:
        raise InvalidArgumentError(f"n must be an integer >= 1, got {n!r}")
    if a_star.identity.which != NP_STAR:
        raise InvalidArgumentError("assemble_composed expects a K* matrix")
    if n == 1:
        return a_star
    ks = a_star.entries
    k = discrete_adjoint(ks, a_star.grid.measures)
    kks = k @ ks
    out = np.linalg.matrix_power(kks, n // 2)
    if n % 2:
        out = ks @ out
    identity = KernelIdentity(COMPOSED, a_star.identity.d, n)
    meta = dict(a_star.metadata, kernel=identity.label)
    return OperatorMatrix(out, a_star.grid, identity, a_star.diagonal_rule, meta)
