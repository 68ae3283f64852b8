"""Closed boundary parameterizations in 2D and 3D.

Curves (``dim_d == 1``) are parameterized by ``t`` in ``[0, 1)`` and
evaluated through complex arithmetic: a point ``(x, y)`` is stored as
``x + iy``.  Surfaces (``dim_d == 2``) are star-shaped graphs over the unit
sphere, charted by ``(u, v)`` with azimuth ``2*pi*u`` and polar angle
``pi*v``; the chart poles sit at ``v = 0`` and ``v = 1``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from math import comb
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special

from .exceptions import InvalidArgumentError, UnsupportedOrderError

__all__ = [
    "RegularityClass",
    "BoundaryGeometry",
    "Ellipse",
    "WeierstrassCurve",
    "PerturbedSphere",
    "GeometrySample",
    "make_circle",
    "make_ellipse",
    "make_weierstrass_curve",
    "make_perturbed_sphere",
    "make_lacunary_sphere",
    "evaluate",
    "random_phases",
    "signed_area",
    "curvature",
    "holder_quotient",
]

SMOOTH_ORDER = 64  # stand-in for "any order" on analytic generators
TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class RegularityClass:
    """Declared ``C^{k, alpha}`` class; ``k = inf`` marks a C^infinity family."""

    k: float
    alpha: float = 1.0

    def __post_init__(self):
        if not (self.k == math.inf or (float(self.k).is_integer() and self.k >= 1)):
            raise InvalidArgumentError(f"k must be an integer >= 1 or inf, got {self.k!r}")
        if not 0.0 < self.alpha <= 1.0:
            raise InvalidArgumentError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if self.k != math.inf:
            object.__setattr__(self, "k", int(self.k))

    @classmethod
    def smooth(cls) -> "RegularityClass":
        return cls(math.inf, 1.0)

    @property
    def is_smooth(self) -> bool:
        return self.k == math.inf

    @property
    def order(self) -> float:
        """``k + alpha``."""
        return self.k + self.alpha


class GeometrySample(NamedTuple):
    point: np.ndarray
    unit_normal: np.ndarray
    speed: np.ndarray
    derivatives: list


class BoundaryGeometry:
    """Base class for boundary parameterizations.

    Subclasses are immutable once built and expose :meth:`evaluate`.
    """

    dim_d: int
    derivative_order: int
    regularity: RegularityClass
    description: str

    @property
    def ambient_dim(self) -> int:
        return self.dim_d + 1

    def evaluate(self, t, order: int = 0) -> GeometrySample:
        raise NotImplementedError

    def to_spec(self) -> dict:
        raise NotImplementedError

    def _check_order(self, order):
        if order < 0 or order > self.derivative_order:
            raise UnsupportedOrderError(
                f"derivative order {order} exceeds the available order "
                f"{self.derivative_order} of {self.description!r}"
            )


class ParametricCurve(BoundaryGeometry):
    """Closed planar curve ``t -> gamma(t)``, period 1."""

    dim_d = 1

    def derivatives(self, t, order: int) -> np.ndarray:
        """Complex array of shape ``(order + 1, len(t))`` holding gamma^(p)(t)."""
        raise NotImplementedError

    def evaluate(self, t, order: int = 0) -> GeometrySample:
        self._check_order(max(order, 1))
        t = np.atleast_1d(np.asarray(t, dtype=float))
        der = self.derivatives(t, max(order, 1))
        gp = der[1]
        speed = np.abs(gp)
        tangent = gp / speed
        normal = -1j * tangent
        return GeometrySample(
            point=_c2r(der[0]),
            unit_normal=_c2r(normal),
            speed=speed,
            derivatives=[_c2r(der[p]) for p in range(order + 1)],
        )


@dataclass(frozen=True, eq=False)
class Ellipse(ParametricCurve):
    """``(a cos 2 pi t, b sin 2 pi t)``; the circle is ``a == b``."""

    a: float
    b: float
    description: str = ""
    regularity: RegularityClass = field(default_factory=RegularityClass.smooth)
    derivative_order: int = SMOOTH_ORDER

    def derivatives(self, t, order):
        t = np.asarray(t, dtype=float)
        phase = np.exp(1j * TWO_PI * t)
        plus, minus = 0.5 * (self.a + self.b), 0.5 * (self.a - self.b)
        out = np.empty((order + 1, t.size), dtype=complex)
        for p in range(order + 1):
            if minus == 0.0:
                out[p] = plus * (1j * TWO_PI) ** p * phase
            else:
                out[p] = (plus * (1j * TWO_PI) ** p * phase
                          + minus * (-1j * TWO_PI) ** p * np.conj(phase))
        return out

    def to_spec(self):
        kind = "circle" if self.a == self.b else "ellipse"
        params = {"radius": self.a} if kind == "circle" else {"a": self.a, "b": self.b}
        return _spec_dict(kind, params, self.regularity, self.description)


@dataclass(frozen=True, eq=False)
class WeierstrassCurve(ParametricCurve):
    """Circle perturbed radially by a lacunary cosine series.

    The radius is ``1 + rho(t)`` with
    ``rho(t) = amplitude * sum_n base**(-n (k + alpha)) cos(2 pi base**n t + phase_n)``.
    """

    regularity: RegularityClass
    levels: int
    amplitude: float
    base: int
    phases: tuple
    description: str = ""
    metadata: dict = field(default_factory=dict)

    @property
    def derivative_order(self):
        return int(self.regularity.k) + 2

    @property
    def coefficients(self) -> np.ndarray:
        n = np.arange(1, self.levels + 1)
        return self.amplitude * float(self.base) ** (-n * self.regularity.order)

    def radial(self, t, order: int = 0) -> np.ndarray:
        """``rho^(q)(t)`` for ``q = 0..order``, shape ``(order + 1, len(t))``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((order + 1, t.size))
        for n, c in enumerate(self.coefficients, start=1):
            freq = self.base ** n
            # reduce before scaling by 2 pi so large frequencies stay periodic
            arg = TWO_PI * np.mod(freq * t, 1.0) + self.phases[n - 1]
            w = TWO_PI * freq
            for q in range(order + 1):
                out[q] += c * w ** q * np.cos(arg + q * np.pi / 2)
        return out

    def derivatives(self, t, order):
        t = np.asarray(t, dtype=float)
        rad = self.radial(t, order)
        rad[0] += 1.0
        phase = np.exp(1j * TWO_PI * t)
        out = np.zeros((order + 1, t.size), dtype=complex)
        for p in range(order + 1):
            for q in range(p + 1):
                out[p] += comb(p, q) * rad[q] * (1j * TWO_PI) ** (p - q)
            out[p] *= phase
        return out

    def to_spec(self):
        spec = _spec_dict("weierstrass", {}, self.regularity, self.description)
        spec.update(levels=self.levels, amplitude=self.amplitude, base=self.base,
                    phases=list(self.phases))
        return spec


@dataclass(frozen=True, eq=False)
class PerturbedSphere(BoundaryGeometry):
    """Star-shaped surface ``r(omega) omega`` with ``r = 1 + sum c_lm Y_lm``."""

    coeffs: tuple
    description: str = ""
    regularity: RegularityClass = field(default_factory=RegularityClass.smooth)
    derivative_order: int = 1
    dim_d = 2

    def radius(self, theta, phi):
        """Radius and its partial derivatives in (theta, phi)."""
        theta = np.asarray(theta, dtype=float)
        phi = np.asarray(phi, dtype=float)
        r = np.ones(np.broadcast(theta, phi).shape)
        r_t = np.zeros_like(r)
        r_p = np.zeros_like(r)
        for l, m, c in self.coeffs:
            y, yt, yp = real_sph_harm(l, m, theta, phi)
            r += c * y
            r_t += c * yt
            r_p += c * yp
        return r, r_t, r_p

    def evaluate(self, uv, order: int = 0) -> GeometrySample:
        """Evaluate at chart points ``uv`` of shape ``(n, 2)``.

        ``speed`` holds the chart Jacobian with respect to ``(u, v)``;
        ``derivatives`` is ``[x, x_u, x_v]`` truncated to ``order``.
        """
        self._check_order(order)
        uv = np.atleast_2d(np.asarray(uv, dtype=float))
        phi, theta = TWO_PI * uv[:, 0], np.pi * uv[:, 1]
        r, r_t, r_p = self.radius(theta, phi)
        st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
        e_r = np.stack([st * cp, st * sp, ct], axis=1)
        e_t = np.stack([ct * cp, ct * sp, -st], axis=1)
        e_p = np.stack([-sp, cp, np.zeros_like(sp)], axis=1)
        point = r[:, None] * e_r

        # r_phi / sin(theta) has a finite limit at the poles; evaluate it just off them
        theta_c = np.clip(theta, 1e-9, np.pi - 1e-9)
        _, _, r_pc = self.radius(theta_c, phi)
        grad_phi = r_pc / np.sin(theta_c)
        nvec = r[:, None] * e_r - r_t[:, None] * e_t - grad_phi[:, None] * e_p
        normal = nvec / np.linalg.norm(nvec, axis=1)[:, None]
        jac = r * np.sqrt(r ** 2 + r_t ** 2 + grad_phi ** 2) * st * (TWO_PI * np.pi)

        ders = [point]
        if order >= 1:
            x_t = r_t[:, None] * e_r + r[:, None] * e_t
            x_p = r_p[:, None] * e_r + (r * st)[:, None] * e_p
            ders += [TWO_PI * x_p, np.pi * x_t]
        return GeometrySample(point, normal, jac, ders)

    def to_spec(self):
        coeffs = [[int(l), int(m), float(c)] for l, m, c in self.coeffs]
        return _spec_dict("perturbed_sphere", {"coeffs": coeffs}, self.regularity,
                          self.description)


def real_sph_harm(l: int, m: int, theta, phi):
    """Orthonormal real spherical harmonic with its theta/phi derivatives."""
    y, grad = special.sph_harm_y(l, abs(m), theta, phi, diff_n=1)[:2]
    if m == 0:
        return y.real, grad[..., 0].real, grad[..., 1].real
    sign = math.sqrt(2.0) * (-1) ** m
    part = np.real if m > 0 else np.imag
    return sign * part(y), sign * part(grad[..., 0]), sign * part(grad[..., 1])


def make_circle(radius: float = 1.0) -> Ellipse:
    if not radius > 0:
        raise InvalidArgumentError(f"radius must be positive, got {radius!r}")
    return Ellipse(float(radius), float(radius), description=f"circle(r={radius:g})")


def make_ellipse(a: float, b: float) -> Ellipse:
    if not (b > 0 and a >= b):
        raise InvalidArgumentError(f"need a >= b > 0, got a={a!r}, b={b!r}")
    return Ellipse(float(a), float(b), description=f"ellipse(a={a:g}, b={b:g})")


def random_phases(levels: int, seed: int) -> list:
    """Seeded uniform phases in ``[0, 2 pi)`` for robustness sweeps."""
    rng = np.random.default_rng(seed)
    return list(rng.uniform(0.0, TWO_PI, size=levels))


def make_weierstrass_curve(reg: RegularityClass, levels: int, amplitude: float = 0.1,
                           lacunarity_base: int = 2, phases: Sequence[float] | None = None,
                           description: str | None = None) -> ParametricCurve:
    """Radially perturbed circle whose perturbation saturates ``C^{k, alpha}``.

    ``levels == 0`` returns the unit circle.  The metadata records the grid
    size needed to resolve the finest oscillation (eight nodes per period).
    """
    if levels < 0 or int(levels) != levels:
        raise InvalidArgumentError(f"levels must be a non-negative integer, got {levels!r}")
    if amplitude < 0:
        raise InvalidArgumentError("amplitude must be non-negative")
    if int(lacunarity_base) != lacunarity_base or lacunarity_base < 2:
        raise InvalidArgumentError("lacunarity_base must be an integer >= 2")
    if reg.is_smooth:
        raise InvalidArgumentError("a Weierstrass curve needs a finite regularity class")
    if levels == 0:
        return make_circle(1.0)
    phases = [0.0] * levels if phases is None else [float(p) for p in phases]
    if len(phases) < levels:
        raise InvalidArgumentError(f"need at least {levels} phases, got {len(phases)}")

    min_nodes = 8 * lacunarity_base ** levels
    metadata = {"min_grid_nodes": min_nodes, "resolution_warning": min_nodes > 4096}
    if description is None:
        description = (f"weierstrass(k={reg.k}, alpha={reg.alpha:g}, levels={levels}, "
                       f"amplitude={amplitude:g}, base={lacunarity_base})")
    curve = WeierstrassCurve(reg, int(levels), float(amplitude), int(lacunarity_base),
                             tuple(phases[:levels]), description, metadata)
    if metadata["resolution_warning"]:
        warnings.warn(f"{description}: resolving base**levels needs "
                      f"{min_nodes} nodes, beyond the dense range", stacklevel=2)

    t = np.linspace(0.0, 1.0, max(4 * min_nodes, 1 << 14), endpoint=False)
    if np.min(1.0 + curve.radial(t)[0]) < 0.5:
        raise InvalidArgumentError("perturbation drives the radius below 1/2")
    return curve


def make_perturbed_sphere(coeffs: Sequence[tuple] = (), description: str | None = None,
                          regularity: RegularityClass | None = None) -> PerturbedSphere:
    """Unit sphere with radius ``1 + sum c_lm Y_lm``; ``coeffs=()`` is the sphere.

    ``regularity`` declares the class of the family a truncated expansion
    stands for (C^infinity by default).
    """
    coeffs = tuple((int(l), int(m), float(c)) for l, m, c in coeffs)
    for l, m, _ in coeffs:
        if l < 0 or abs(m) > l:
            raise InvalidArgumentError(f"invalid spherical harmonic index (l={l}, m={m})")
    if description is None:
        description = "sphere" if not coeffs else f"perturbed_sphere({list(coeffs)})"
    surf = PerturbedSphere(coeffs, description, regularity or RegularityClass.smooth())
    if coeffs:
        theta, phi = np.meshgrid(np.linspace(0, np.pi, 181), np.linspace(0, TWO_PI, 360))
        if np.min(surf.radius(theta, phi)[0]) < 0.5:
            raise InvalidArgumentError("radius drops below 1/2 somewhere on the sphere")
    return surf


def make_lacunary_sphere(reg: RegularityClass, levels: int, amplitude: float = 0.1,
                         lacunarity_base: int = 2) -> PerturbedSphere:
    """Surface analogue of the Weierstrass curve: zonal harmonics of degree
    ``base**n`` with coefficients ``amplitude * base**(-n (k + alpha))``."""
    if reg.is_smooth:
        raise InvalidArgumentError("a lacunary sphere needs a finite regularity class")
    coeffs = [(lacunarity_base ** n, 0, amplitude * float(lacunarity_base) ** (-n * reg.order))
              for n in range(1, levels + 1)]
    description = (f"lacunary_sphere(k={reg.k}, alpha={reg.alpha:g}, levels={levels}, "
                   f"amplitude={amplitude:g}, base={lacunarity_base})")
    return make_perturbed_sphere(coeffs, description, reg)


def evaluate(geom: BoundaryGeometry, t, order: int = 0) -> GeometrySample:
    return geom.evaluate(t, order)


def signed_area(geom: ParametricCurve, n: int = 4096) -> float:
    """Enclosed area ``(1/2) \\oint x dy - y dx`` by the periodic trapezoid rule."""
    t = np.arange(n) / n
    der = geom.derivatives(t, 1)
    return 0.5 * float(np.mean(np.imag(np.conj(der[0]) * der[1])))


def curvature(geom: ParametricCurve, t) -> np.ndarray:
    der = geom.derivatives(np.atleast_1d(t), 2)
    return np.imag(np.conj(der[1]) * der[2]) / np.abs(der[1]) ** 3


def holder_quotient(geom: WeierstrassCurve, m_values: Sequence[int],
                    n_samples: int = 1 << 16) -> np.ndarray:
    """Sup of ``|rho^(k)(t+h) - rho^(k)(t)| / h**alpha`` for ``h = 2**-m``.

    Sampled on a uniform grid of ``n_samples`` points; ``h`` must be a
    multiple of the sample spacing.
    """
    k, alpha = int(geom.regularity.k), geom.regularity.alpha
    t = np.arange(n_samples) / n_samples
    f = geom.radial(t, k)[k]
    out = []
    for m in m_values:
        shift = n_samples >> m
        if shift < 1:
            raise InvalidArgumentError(f"separation 2**-{m} is below the sample spacing")
        h = shift / n_samples
        out.append(np.max(np.abs(np.roll(f, -shift) - f)) / h ** alpha)
    return np.array(out)


def _c2r(z):
    return np.stack([z.real, z.imag], axis=-1)


def _spec_dict(kind, params, reg, description):
    k = None if reg.is_smooth else int(reg.k)
    return {"type": kind, "parameters": params,
            "regularity": {"k": k, "alpha": reg.alpha}, "description": description}
