"""Pointwise Neumann-Poincare kernels.

``np_kernel_star`` is the kernel of K* (normal taken at the target ``x``),
``np_kernel`` the kernel of its adjoint K (normal at the source ``y``,
leading minus sign).  Both accept arrays whose last axis is the ambient
coordinate and broadcast over the leading axes.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .exceptions import InvalidArgumentError, SingularPointError, UnsupportedOrderError
from .geometry import BoundaryGeometry, ParametricCurve

__all__ = [
    "KernelIdentity",
    "sphere_area",
    "np_kernel_star",
    "np_kernel",
    "diagonal_limit",
    "tangential_derivative_L1",
]

NP_STAR = "np_star"
NP = "np"
COMPOSED = "composed"


@dataclass(frozen=True)
class KernelIdentity:
    """Which operator a matrix discretizes: K*, K, or the composition L_n."""

    which: str
    d: int
    n: int = 1

    def __post_init__(self):
        if self.which not in (NP_STAR, NP, COMPOSED):
            raise InvalidArgumentError(f"unknown kernel identity {self.which!r}")
        if self.d not in (1, 2):
            raise InvalidArgumentError(f"d must be 1 or 2, got {self.d!r}")
        if self.which == COMPOSED and self.n < 1:
            raise InvalidArgumentError("composed operators need n >= 1")
        # L_1 is K* itself
        if self.which == COMPOSED and self.n == 1:
            object.__setattr__(self, "which", NP_STAR)

    @property
    def label(self) -> str:
        return f"L_{self.n}" if self.which == COMPOSED else self.which


def sphere_area(d: int) -> float:
    """Area of the unit sphere in R^{d+1}."""
    if d == 1:
        return 2.0 * np.pi
    if d == 2:
        return 4.0 * np.pi
    raise InvalidArgumentError(f"d must be 1 or 2, got {d!r}")


def _separation(x, y):
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    r2 = np.sum(diff * diff, axis=-1)
    if np.any(r2 == 0.0):
        raise SingularPointError("kernel evaluated at coincident points")
    return diff, r2


def np_kernel_star(x, nx, y, d: int):
    """``(x - y) . nu_x / (omega_{d+1} |x - y|^{d+1})``."""
    diff, r2 = _separation(x, y)
    num = np.sum(diff * np.asarray(nx, dtype=float), axis=-1)
    return num / (sphere_area(d) * r2 ** ((d + 1) / 2))


def np_kernel(x, y, ny, d: int):
    """``-(x - y) . nu_y / (omega_{d+1} |x - y|^{d+1})``."""
    diff, r2 = _separation(x, y)
    num = np.sum(diff * np.asarray(ny, dtype=float), axis=-1)
    return -num / (sphere_area(d) * r2 ** ((d + 1) / 2))


def _require_curve(geom):
    if not isinstance(geom, ParametricCurve):
        raise InvalidArgumentError("operation defined for planar curves (d = 1) only")


def diagonal_limit(geom: BoundaryGeometry, t):
    """Continuous extension of the 2D kernel onto the diagonal.

    Equals ``-gamma''(t) . nu(t) / (4 pi |gamma'(t)|^2)``, i.e. curvature
    over ``4 pi``; positive on convex curves.
    """
    _require_curve(geom)
    if geom.derivative_order < 2:
        raise UnsupportedOrderError("diagonal limit needs two derivatives")
    der = geom.derivatives(np.atleast_1d(np.asarray(t, dtype=float)), 2)
    normal = -1j * der[1] / np.abs(der[1])
    proj = np.real(der[2] * np.conj(normal))
    return -proj / (4.0 * np.pi * np.abs(der[1]) ** 2)


def tangential_derivative_L1(geom: BoundaryGeometry, t: float, s, l: int,
                             method: str = "analytic"):
    """``d^l/ds^l L_1(gamma(t), gamma(s))`` in the parameter ``s``.

    ``method="analytic"`` differentiates the quotient exactly using the
    geometry's derivatives; ``method="richardson"`` uses Richardson-extrapolated
    central differences with a step proportional to ``|t - s|``.
    """
    _require_curve(geom)
    if l < 0:
        raise InvalidArgumentError("l must be non-negative")
    if l > geom.derivative_order - 2:
        raise UnsupportedOrderError(
            f"l={l} exceeds derivative order {geom.derivative_order} - 2")
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(np.mod(s - t, 1.0) == 0.0):
        raise SingularPointError("t and s coincide")
    if method == "analytic":
        return _dl_analytic(geom, t, s, l)
    if method == "richardson":
        return _dl_richardson(geom, t, s, l)
    raise InvalidArgumentError(f"unknown method {method!r}")


def _kernel_on_curve(geom, t, s):
    xt = geom.derivatives(np.atleast_1d(float(t)), 1)
    x, nx = xt[0, 0], -1j * xt[1, 0] / abs(xt[1, 0])
    diff = x - geom.derivatives(s, 0)[0]
    return np.real(diff * np.conj(nx)) / (2.0 * np.pi * np.abs(diff) ** 2)


def _dl_analytic(geom, t, s, l):
    xt = geom.derivatives(np.atleast_1d(float(t)), 1)
    x, nx = xt[0, 0], -1j * xt[1, 0] / abs(xt[1, 0])
    gs = geom.derivatives(s, l)
    delta = -gs
    delta[0] += x

    def dot(a, b):
        return np.real(a * np.conj(b))

    num = [dot(delta[p], nx) for p in range(l + 1)]
    den = [sum(comb(p, q) * dot(delta[q], delta[p - q]) for q in range(p + 1))
           for p in range(l + 1)]
    f = []
    for p in range(l + 1):
        acc = num[p] - sum(comb(p, q) * f[q] * den[p - q] for q in range(p))
        f.append(acc / den[0])
    return f[l] / (2.0 * np.pi)


def _central(fun, s, l, h):
    acc = 0.0
    for i in range(l + 1):
        acc = acc + (-1) ** i * comb(l, i) * fun(s + (l / 2 - i) * h)
    return acc / h ** l


def _dl_richardson(geom, t, s, l):
    fun = lambda u: _kernel_on_curve(geom, t, u)  # noqa: E731
    if l == 0:
        return fun(s)
    sep = np.abs((s - t + 0.5) % 1.0 - 0.5)
    h = 1e-4 * sep * max(1, l)
    return (4.0 * _central(fun, s, l, h / 2) - _central(fun, s, l, h)) / 3.0
