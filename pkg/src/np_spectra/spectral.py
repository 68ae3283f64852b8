"""Eigenvalues, singular values and Schatten sums of Nystrom matrices.

Singular values are those of the operator in the discrete L^2 geometry,
``svd(D^{1/2} A D^{-1/2})`` with ``D = diag(measures)``.  Eigenvalues are
invariant under that similarity and are taken from ``A`` directly.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import mpmath
import numpy as np
import scipy.linalg

from .discretize import OperatorMatrix
from .exceptions import InvalidArgumentError, NumericFailureError

__all__ = [
    "Spectrum",
    "WeylResult",
    "sort_eigenvalues",
    "eigen_spectrum",
    "singular_spectrum",
    "spectrum",
    "resolved_count",
    "with_resolution",
    "schatten_partial_sum",
    "weyl_check",
    "power_identity_error",
    "extended_singular_values",
    "cluster_moduli",
]

RESOLVED_TOL = 0.01


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ordered eigenvalues and singular values of one matrix.

    ``j_resolved`` defaults to the full length until a refinement
    comparison (:func:`with_resolution`) narrows it.
    """

    eigenvalues: np.ndarray
    singular_values: np.ndarray
    j_resolved: int
    source: dict = field(default_factory=dict)
    eps_floor: float = 1e-12

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.eigenvalues)

    @property
    def realness_defect(self) -> float:
        """``max |Im l| / (|l| + floor)`` over the resolved leading eigenvalues."""
        lead = self.eigenvalues[: self.j_resolved]
        if lead.size == 0:
            return 0.0
        floor = self.eps_floor * np.abs(lead[0])
        return float(np.max(np.abs(lead.imag) / (np.abs(lead) + floor)))


class WeylResult(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


def sort_eigenvalues(values) -> np.ndarray:
    """Descending modulus, then descending real part, then ascending imaginary part."""
    values = np.asarray(values, dtype=complex)
    order = np.lexsort((values.imag, -values.real, -np.abs(values)))
    return values[order]


def _checked(matrix: OperatorMatrix) -> np.ndarray:
    if not np.all(np.isfinite(matrix.entries)):
        raise NumericFailureError("matrix has non-finite entries", matrix.metadata)
    return matrix.entries


def eigen_spectrum(matrix: OperatorMatrix) -> Spectrum:
    entries = _checked(matrix)
    try:
        lam = scipy.linalg.eigvals(entries, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericFailureError(f"eigensolver failed: {exc}", matrix.metadata) from exc
    lam = sort_eigenvalues(lam)
    return Spectrum(lam, np.empty(0), len(lam), dict(matrix.metadata))


def singular_spectrum(matrix: OperatorMatrix, base: Spectrum | None = None) -> Spectrum:
    """Singular values of ``D^{1/2} A D^{-1/2}``, added to ``base`` when given."""
    _checked(matrix)
    if np.any(matrix.grid.measures <= 0):
        raise InvalidArgumentError("all measures must be positive")
    try:
        s = scipy.linalg.svdvals(matrix.symmetrized(), check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericFailureError(f"SVD failed: {exc}", matrix.metadata) from exc
    if base is None:
        return Spectrum(np.empty(0, dtype=complex), s, len(s), dict(matrix.metadata))
    return replace(base, singular_values=s)


def spectrum(matrix: OperatorMatrix) -> Spectrum:
    """Both eigenvalues and singular values."""
    return singular_spectrum(matrix, eigen_spectrum(matrix))


def resolved_count(coarse, fine, tol: float = RESOLVED_TOL) -> int:
    """Length of the leading run of moduli that move by less than ``tol`` (relative)
    between a grid and its refinement."""
    a = np.abs(np.asarray(coarse))
    b = np.abs(np.asarray(fine))
    n = min(len(a), len(b))
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.abs(a[:n] - b[:n]) / b[:n]
    bad = np.nonzero(~(rel < tol))[0]
    return int(bad[0]) if bad.size else n


def with_resolution(fine: Spectrum, coarse: Spectrum, tol: float = RESOLVED_TOL) -> Spectrum:
    """Copy of ``fine`` whose ``j_resolved`` comes from comparison with ``coarse``."""
    j = resolved_count(coarse.eigenvalues, fine.eigenvalues, tol)
    source = dict(fine.source, j_resolved=j, coarse_n_nodes=len(coarse.eigenvalues))
    return replace(fine, j_resolved=j, source=source)


def _check_len(values, J):
    if J < 0 or J > len(values):
        raise InvalidArgumentError(f"J={J} outside 0..{len(values)}")


def schatten_partial_sum(spec: Spectrum, p: float, J: int) -> float:
    if p <= 0:
        raise InvalidArgumentError("p must be positive")
    _check_len(spec.singular_values, J)
    return float(np.sum(spec.singular_values[:J] ** p))


def weyl_check(spec: Spectrum, p: float, J: int) -> WeylResult:
    """Compare ``sum_{j<=J} |lambda_j|^p`` with ``sum_{j<=J} s_j^p``."""
    if p <= 0:
        raise InvalidArgumentError("p must be positive")
    _check_len(spec.eigenvalues, J)
    _check_len(spec.singular_values, J)
    lhs = float(np.sum(np.abs(spec.eigenvalues[:J]) ** p))
    rhs = float(np.sum(spec.singular_values[:J] ** p))
    return WeylResult(lhs, rhs, lhs <= rhs * (1 + 1e-12))


def extended_singular_values(matrix, dps: int = 50) -> list:
    """Singular values of a (square) float matrix in ``dps``-digit arithmetic."""
    with mpmath.workdps(dps):
        return list(mpmath.svd_r(mpmath.matrix(np.asarray(matrix).tolist()),
                                 compute_uv=False))


def power_identity_error(a_star: OperatorMatrix, n: int, j_max: int = 20,
                         precision: str = "extended", dps: int | None = None) -> float:
    """``max_j |s_j(L_n) - s_j(K*)^n| / s_j(K*)^n`` over ``j <= j_max``.

    The two sides come from separate SVDs: one of K*, one of the composed
    matrix.  With ``precision="extended"`` the composition and both SVDs run
    in ``dps``-digit arithmetic, which keeps tiny singular values (such as
    the rounding-level tail of a rank-one matrix) meaningful after the n-th
    power.  Values below the working floor count as exact zeros.
    """
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    jm = min(j_max, a_star.size)
    if precision == "double":
        from .discretize import assemble_composed

        s = singular_spectrum(a_star).singular_values[:jm]
        sl = singular_spectrum(assemble_composed(a_star, n)).singular_values[:jm]
        return float(np.max(np.abs(sl - s ** n) / s ** n))
    if precision != "extended":
        raise InvalidArgumentError(f"unknown precision {precision!r}")

    dps = dps or 25 * n + 30
    sym = a_star.symmetrized()
    with mpmath.workdps(dps):
        m = mpmath.matrix(sym.tolist())
        s = mpmath.svd_r(m, compute_uv=False)
        power = (m.T * m) ** (n // 2) if n > 1 else mpmath.eye(m.rows)
        comp = m * power if n % 2 else power
        sl = mpmath.svd_r(comp, compute_uv=False)
        floor = mpmath.mpf(10) ** (-(dps - 10)) * max(s[0] ** n, 1)
        worst = mpmath.mpf(0)
        for j in range(jm):
            ref, got = s[j] ** n, sl[j]
            if ref < floor and got < floor:
                continue
            worst = max(worst, abs(got - ref) / ref if ref >= floor else mpmath.inf)
        return float(worst)


def cluster_moduli(values, rel_tol: float = 0.01) -> list:
    """Group sorted positive values whose neighbours differ by less than ``rel_tol``.

    Returns ``(center, multiplicity)`` pairs in descending order.
    """
    vals = np.sort(np.asarray(values, dtype=float))[::-1]
    out = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or abs(vals[i] - vals[i - 1]) > rel_tol * abs(vals[i - 1]):
            group = vals[start:i]
            out.append((float(np.mean(group)), len(group)))
            start = i
    return out
