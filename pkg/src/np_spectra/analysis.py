"""Decay-exponent fitting and numerical probes of kernel and operator estimates.

Every bound probed here is an upper bound with an unspecified constant, so
the pass criteria are one-sided with an explicit slack recorded in the
report.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, stats

from .discretize import OperatorMatrix, assemble, assemble_composed, discrete_adjoint, make_grid
from .exceptions import InsufficientDataError, InvalidArgumentError
from .geometry import (BoundaryGeometry, ParametricCurve, PerturbedSphere, RegularityClass,
                       make_weierstrass_curve)
from .kernels import NP, NP_STAR, np_kernel_star, tangential_derivative_L1
from .spectral import Spectrum

__all__ = [
    "DecayFit",
    "ProbeReport",
    "critical_exponent",
    "fit_power_law",
    "fit_decay",
    "convolution_integral",
    "probe_convolution_bound",
    "probe_kernel_singularity",
    "probe_holder_difference",
    "probe_sobolev_seminorm",
    "sobolev_refinement_ratio",
    "probe_sobolev_threshold",
    "probe_tangential_derivatives",
    "probe_smoothing",
    "smoothing_report",
]

PLAUSIBLE_R2 = 0.98
MIN_FIT_POINTS = 8
DEFAULT_J_MIN = 4


@dataclass
class DecayFit:
    q_hat: float
    c_hat: float
    window: tuple
    r_squared: float
    q_predicted: float | None = None
    slack_delta: float = 0.3
    power_law_plausible: bool = False

    @property
    def consistent(self) -> bool | None:
        """One-sided check ``q_hat >= q_predicted - slack``; None without a prediction."""
        if self.q_predicted is None:
            return None
        return self.q_hat >= self.q_predicted - self.slack_delta

    def to_dict(self) -> dict:
        out = asdict(self)
        out["window"] = list(self.window)
        out["consistent"] = self.consistent
        return out


@dataclass
class ProbeReport:
    probe_name: str
    fitted_exponent: float | None
    predicted_exponent: float | None
    max_ratio: float
    samples: int
    passed: bool
    details: dict = field(default_factory=dict)
    scatter: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "probe_name": self.probe_name,
            "fitted_exponent": _json_float(self.fitted_exponent),
            "predicted_exponent": _json_float(self.predicted_exponent),
            "max_ratio": _json_float(self.max_ratio),
            "samples": self.samples,
            "pass": bool(self.passed),
            "details": {k: _json_float(v) if isinstance(v, float) else v
                        for k, v in self.details.items()},
        }


def _json_float(x):
    if x is None or not math.isfinite(x):
        return None
    return float(x)


def critical_exponent(d: int, k, alpha: float) -> float:
    """Critical eigenvalue decay exponent: ``alpha/2`` in 3D, ``k - 1 + alpha`` in 2D."""
    if d not in (1, 2):
        raise InvalidArgumentError(f"d must be 1 or 2, got {d!r}")
    if not (k == math.inf or (k >= 1 and float(k).is_integer())):
        raise InvalidArgumentError(f"k must be an integer >= 1, got {k!r}")
    if not 0.0 < alpha <= 1.0:
        raise InvalidArgumentError(f"alpha must lie in (0, 1], got {alpha!r}")
    if d == 2:
        return alpha / 2.0
    return k - 1 + alpha


def fit_power_law(x, y) -> tuple:
    """Least-squares line through ``(log x, log y)``; returns ``(slope, intercept, r2)``."""
    res = stats.linregress(np.log(x), np.log(y))
    return float(res.slope), float(res.intercept), float(res.rvalue ** 2)


def fit_decay(spec: Spectrum | np.ndarray, window: tuple | None = None, use: str = "eigen",
              q_predicted: float | None = None, slack_delta: float = 0.3) -> DecayFit:
    """Fit ``|lambda_j| ~ C j^{-q}`` on a 1-based inclusive index window.

    ``spec`` may also be a plain array of values.  The default window runs
    from ``j = 4`` to the resolved count of the spectrum.
    """
    if isinstance(spec, Spectrum):
        if use == "eigen":
            values = np.abs(spec.eigenvalues)
        elif use == "singular":
            values = np.asarray(spec.singular_values)
        else:
            raise InvalidArgumentError(f"use must be 'eigen' or 'singular', got {use!r}")
        j_res = spec.j_resolved
    else:
        values = np.abs(np.asarray(spec))
        j_res = len(values)
    j_min, j_max = window if window is not None else (DEFAULT_J_MIN, j_res)
    j_max = min(j_max, len(values))
    if j_min < 1 or j_max < j_min:
        raise InvalidArgumentError(f"bad window ({j_min}, {j_max})")
    j = np.arange(j_min, j_max + 1)
    y = values[j - 1]
    keep = y > np.finfo(float).tiny
    if keep.sum() < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"{keep.sum()} usable points in window ({j_min}, {j_max}); need {MIN_FIT_POINTS}")
    slope, intercept, r2 = fit_power_law(j[keep], y[keep])
    return DecayFit(-slope, math.exp(intercept), (int(j_min), int(j_max)), r2, q_predicted,
                    slack_delta, r2 >= PLAUSIBLE_R2)


# -- convolution integrals ---------------------------------------------------------


def _curve_chord_ratio(curve, t0, t, speed0):
    """``|gamma(t) - gamma(t0)| / |t - t0|`` with its limit at ``t = t0``."""
    dt = np.abs(t - t0)
    chord = np.abs(curve.derivatives(t, 0)[0] - curve.derivatives(np.atleast_1d(t0), 0)[0, 0])
    # below this the chord is lost to rounding and the ratio is the speed to O(dt)
    close = dt < 1e-9
    return np.where(close, speed0, chord / np.where(close, 1.0, dt))


def _convolution_curve(curve: ParametricCurve, t_x, t_y, a, b):
    """``int |x-z|^{-a} |z-y|^{-b} dsigma(z)`` on a curve.

    Panels touching ``x`` or ``y`` use QUADPACK's algebraic-weight rule with
    the singular factor written as ``|t - t_s|^{-e}`` times a smooth chord
    ratio; the rest of the long arc is smooth and goes to composite
    Gauss-Legendre.
    """
    t_y = t_x + np.mod(t_y - t_x, 1.0)
    speed = lambda t: np.abs(curve.derivatives(np.atleast_1d(t), 1)[1])  # noqa: E731
    anchors = {t_x: (a, speed(t_x)[0]), t_y: (b, speed(t_y)[0]),
               t_x + 1.0: (a, speed(t_x)[0])}
    x_pt, y_pt = curve.derivatives(np.array([t_x, t_y]), 0)[0]

    def factor(t, pt, expo, anchor, singular):
        if singular:
            return _curve_chord_ratio(curve, anchor, t, anchors[anchor][1]) ** -expo
        return np.abs(curve.derivatives(t, 0)[0] - pt) ** -expo

    def panel(left, right, sing_left, sing_right):
        e_l = anchors[left][0] if sing_left else 0.0
        e_r = anchors[right][0] if sing_right else 0.0

        def g(t):
            t = np.atleast_1d(t)
            # the anchor at each end is x or y; the other point is the far one
            val = speed(t)
            for anchor, pt, expo in ((t_x, x_pt, a), (t_y, y_pt, b)):
                sing = None
                if sing_left and np.isclose(left % 1.0, anchor % 1.0):
                    sing = left
                elif sing_right and np.isclose(right % 1.0, anchor % 1.0):
                    sing = right
                val = val * (factor(t, pt, expo, sing, True) if sing is not None
                             else factor(t, pt, expo, None, False))
            return float(val[0])

        val, _ = integrate.quad(g, left, right, weight="alg", wvar=(-e_l, -e_r),
                                limit=2000, epsabs=0.0, epsrel=1e-10)
        return val

    near = panel(t_x, t_y, True, True)
    w = 0.05 * (t_x + 1.0 - t_y)
    ends = panel(t_y, t_y + w, True, False) + panel(t_x + 1.0 - w, t_x + 1.0, False, True)
    edges = np.linspace(t_y + w, t_x + 1.0 - w, 257)
    z, wz = np.polynomial.legendre.leggauss(16)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    t = (mid[:, None] + half[:, None] * z[None, :]).ravel()
    der = curve.derivatives(t, 1)
    f = np.abs(der[0] - x_pt) ** -a * np.abs(der[0] - y_pt) ** -b * np.abs(der[1])
    middle = float(np.sum(f * (half[:, None] * wz[None, :]).ravel()))
    return near + ends + middle


def _convolution_surface(surf: PerturbedSphere, w_x, w_y, a, b, n_chi=192, n_psi=24):
    """Same integral on a star-shaped surface, in polar coordinates about each singular
    direction, split by the great circle bisecting ``w_x`` and ``w_y``."""
    total = 0.0
    for w_c, w_o, e_c, e_o in ((w_x, w_y, a, b), (w_y, w_x, b, a)):
        c = float(np.clip(np.dot(w_c, w_o), -1.0, 1.0))
        sep = math.acos(c)
        e1 = w_o - c * w_c
        e1 /= np.linalg.norm(e1)
        e2 = np.cross(w_c, e1)
        chi = (np.arange(n_chi) + 0.5) * (2 * np.pi / n_chi)
        psi_max = np.arctan2(1.0 - c, math.sin(sep) * np.cos(chi))
        x_c = surf_point(surf, w_c[None, :])[0]
        x_o = surf_point(surf, w_o[None, :])[0]
        for k, chi_k in enumerate(chi):
            psi, wpsi = _graded_nodes(psi_max[k], sep / 4, e_c, n_psi)
            dirs = (np.cos(psi)[:, None] * w_c[None, :]
                    + np.sin(psi)[:, None] * (math.cos(chi_k) * e1 + math.sin(chi_k) * e2))
            z, jac = surf_point(surf, dirs, with_jacobian=True)
            f = (np.linalg.norm(z - x_c, axis=1) ** -e_c
                 * np.linalg.norm(z - x_o, axis=1) ** -e_o * jac * np.sin(psi))
            total += np.dot(wpsi, f) * (2 * np.pi / n_chi)
    return total


def _graded_nodes(length, h0, sing, n):
    """Quadrature on ``[0, length]`` for integrands ~ ``psi^(1 - sing)`` at 0: a
    Gauss-Jacobi panel of width ``min(h0, length)`` then geometric Gauss-Legendre panels."""
    from scipy.special import roots_jacobi

    h0 = min(h0, length)
    beta = 1.0 - sing
    x, w = roots_jacobi(n, 0.0, beta)
    # int_0^h0 psi^beta g dpsi with psi = h0 (x + 1) / 2
    nodes = [h0 * (x + 1) / 2]
    weights = [w * (h0 / 2) ** (beta + 1) / (nodes[0] ** beta)]
    xg, wg = np.polynomial.legendre.leggauss(n)
    lo = h0
    while lo < length * (1 - 1e-14):
        hi = min(2 * lo, length)
        nodes.append(lo + (hi - lo) * (xg + 1) / 2)
        weights.append(wg * (hi - lo) / 2)
        lo = hi
    return np.concatenate(nodes), np.concatenate(weights)


def surf_point(surf: PerturbedSphere, dirs, with_jacobian=False):
    """Surface point over unit directions, optionally with ``dsigma / domega``."""
    theta = np.arccos(np.clip(dirs[:, 2], -1.0, 1.0))
    phi = np.arctan2(dirs[:, 1], dirs[:, 0])
    r, r_t, r_p = surf.radius(theta, phi)
    z = r[:, None] * dirs
    if not with_jacobian:
        return z
    st = np.maximum(np.sin(theta), 1e-300)
    return z, r * np.sqrt(r ** 2 + r_t ** 2 + (r_p / st) ** 2)


def _direction_of(surf, uv):
    theta, phi = np.pi * uv[1], 2 * np.pi * uv[0]
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi),
                     math.cos(theta)])


def convolution_integral(geom: BoundaryGeometry, x_param, y_param, alpha: float, beta: float):
    """``int |x - z|^{-(d - alpha)} |z - y|^{-(d - beta)} dsigma(z)``.

    ``x_param``/``y_param`` are curve parameters (d = 1) or chart points (d = 2).
    """
    d = geom.dim_d
    if isinstance(geom, ParametricCurve):
        return _convolution_curve(geom, float(x_param), float(y_param), d - alpha, d - beta)
    if isinstance(geom, PerturbedSphere):
        return _convolution_surface(geom, _direction_of(geom, x_param),
                                    _direction_of(geom, y_param), d - alpha, d - beta)
    raise InvalidArgumentError(f"unsupported geometry {type(geom).__name__}")


def probe_convolution_bound(geom: BoundaryGeometry, grid, alpha: float, beta: float,
                            pair_sample: int = 12, separations: tuple = (1e-4, 3e-2),
                            slack: float | None = None) -> ProbeReport:
    """Growth of the convolution integral as ``|x - y| -> 0``.

    Pairs start at ``pair_sample`` base nodes of ``grid`` with parameter
    separations log-spaced over ``separations`` (at least 1.5 decades).
    For ``alpha + beta < d`` the log-log slope is compared with
    ``-d + alpha + beta``; for ``alpha + beta == d`` a straight line in
    ``log(1/|x - y|)`` must fit with ``r^2 >= 0.95``.
    """
    d = geom.dim_d
    if not (0 < alpha <= d and 0 < beta <= d and alpha + beta <= d + 1e-12):
        raise InvalidArgumentError(f"need alpha, beta in (0, {d}] with alpha + beta <= {d}")
    lo, hi = separations
    if math.log10(hi / lo) < 1.5:
        raise InvalidArgumentError("separations must span at least 1.5 decades")
    if slack is None:
        slack = 0.1 if d == 1 else 0.15
    seps = np.geomspace(lo, hi, pair_sample)
    base = grid.nodes[(np.arange(pair_sample) * grid.size) // pair_sample]
    dist, vals = [], []
    for b, s in zip(base, seps):
        if d == 1:
            x_p, y_p = b, b + s
            pts = geom.derivatives(np.array([x_p, y_p]), 0)[0]
            r = abs(pts[0] - pts[1])
        else:
            # keep away from the chart poles
            x_p = np.array([b[0], 0.5 * (b[1] + 0.5)])
            y_p = x_p + np.array([0.0, s])
            pts = geom.evaluate(np.array([x_p, y_p])).point
            r = float(np.linalg.norm(pts[0] - pts[1]))
        dist.append(r)
        vals.append(convolution_integral(geom, x_p, y_p, alpha, beta))
    dist, vals = np.array(dist), np.array(vals)
    predicted = -d + alpha + beta
    scatter = [(float(r), float(v)) for r, v in zip(dist, vals)]
    if predicted < -1e-12:
        slope, _, r2 = fit_power_law(dist, vals)
        ratio = vals / dist ** predicted
        return ProbeReport("convolution_bound", slope, predicted, float(ratio.max() / np.median(ratio)),
                           len(vals), slope >= predicted - slack,
                           {"alpha": alpha, "beta": beta, "r_squared": r2, "slack": slack,
                            "deviation": float(abs(slope - predicted)), "case": "power"},
                           scatter)
    res = stats.linregress(np.log(1.0 / dist), vals)
    r2 = float(res.rvalue ** 2)
    ratio = vals / np.log(1.0 / dist)
    slope_ll, _, _ = fit_power_law(dist, vals)
    return ProbeReport("convolution_bound", slope_ll, 0.0, float(ratio.max() / np.median(ratio)),
                       len(vals), bool(r2 >= 0.95 and res.slope > 0),
                       {"alpha": alpha, "beta": beta, "r_squared": r2,
                        "log_slope": float(res.slope), "case": "log"}, scatter)


# -- kernel probes -------------------------------------------------------------------


def _declared(geom, regularity):
    reg = regularity or geom.regularity
    if reg.is_smooth:
        return RegularityClass(math.inf, 1.0)
    return reg


def probe_kernel_singularity(geom: BoundaryGeometry, pair_sample: int = 2048,
                             separations: tuple = (1e-3, 1e-1), n_sep: int = 24,
                             slack: float = 0.15, regularity: RegularityClass | None = None,
                             seed: int = 0) -> ProbeReport:
    """Log-log slope of ``sup |L_1(x, y)|`` against the parameter separation.

    Compared one-sidedly with ``-(d - alpha)``.  Curves use a uniform grid of
    base points; surfaces draw base points and directions from ``seed``.
    """
    reg = _declared(geom, regularity)
    d = geom.dim_d
    seps = np.geomspace(*separations, n_sep)
    sup = np.empty(n_sep)
    if isinstance(geom, ParametricCurve):
        t = np.arange(pair_sample) / pair_sample
        x = geom.evaluate(t)
        for i, s in enumerate(seps):
            vals = [np.abs(np_kernel_star(x.point, x.unit_normal, geom.evaluate(t + sgn * s).point, 1))
                    for sgn in (1, -1)]
            sup[i] = max(v.max() for v in vals)
    else:
        rng = np.random.default_rng(seed)
        uv = np.column_stack([rng.uniform(0, 1, pair_sample), rng.uniform(0.1, 0.9, pair_sample)])
        x = geom.evaluate(uv)
        ang = rng.uniform(0, 2 * np.pi, pair_sample)
        for i, s in enumerate(seps):
            y = geom.evaluate(uv + s * np.column_stack([np.cos(ang), np.sin(ang)]))
            sup[i] = np.abs(np_kernel_star(x.point, x.unit_normal, y.point, 2)).max()
    predicted = -(d - reg.alpha)
    slope, _, r2 = fit_power_law(seps, sup)
    ratio = sup / seps ** predicted
    return ProbeReport("kernel_singularity", slope, predicted, float(ratio.max() / np.median(ratio)),
                       pair_sample * n_sep, slope >= predicted - slack,
                       {"r_squared": r2, "slack": slack, "alpha": reg.alpha},
                       [(float(s), float(v), float(s ** predicted)) for s, v in zip(seps, sup)])


def probe_holder_difference(geom: BoundaryGeometry, a_star: OperatorMatrix, n: int = 1,
                            triple_sample: int = 1000, seed: int = 0, max_offset: int = 8,
                            slack: float = 0.2, regularity: RegularityClass | None = None
                            ) -> ProbeReport:
    """Ratio of ``|L_n(x, y) - L_n(x, y')|`` to its bound at grid-node triples.

    The bound is ``|y - y'| / |x - y|^{d + 1 - alpha}`` for ``n = 1`` and
    ``|y - y'|^alpha / |x - y|^{d - (n - 1) alpha}`` for ``n >= 2``.  The
    ratios pass when they show no growth as ``|y - y'|`` shrinks towards the
    node spacing (log-log slope of the per-offset maximum >= ``-slack``).
    """
    reg = _declared(geom, regularity)
    d, alpha = geom.dim_d, reg.alpha
    if n < 1:
        raise InvalidArgumentError("n must be >= 1")
    matrix = assemble_composed(a_star, n)
    kern = matrix.kernel_values()
    pts = a_star.grid.points
    size = a_star.size
    rng = np.random.default_rng(seed)
    factor = 2.0 if n == 1 else 4.0
    if n == 1:
        a_eff, expo = 1.0, d + 1 - alpha
    else:
        a_eff, expo = alpha, d - (n - 1) * alpha
    hypothesis_ok = n == 1 or (alpha <= d / 2 and n <= d / alpha)

    scale = np.abs(kern).max()
    rows = []
    attempts = 0
    while len(rows) < triple_sample and attempts < 50 * triple_sample:
        attempts += 1
        i, j = rng.integers(0, size, 2)
        if d == 1:
            jp = (j + rng.integers(1, max_offset + 1)) % size
        else:
            jp = _nearby_node(a_star.grid, j, rng, max_offset)
        r_xy = np.linalg.norm(pts[i] - pts[j])
        r_yy = np.linalg.norm(pts[j] - pts[jp])
        if i in (j, jp) or jp == j or not factor * r_yy < r_xy:
            continue
        diff = abs(kern[i, j] - kern[i, jp])
        if diff < 1e-13 * scale:
            diff = 0.0
        rows.append((r_yy, r_xy, diff, diff * r_xy ** expo / r_yy ** a_eff))
    if not rows:
        raise InsufficientDataError("no triples satisfy the separation condition")
    rows = np.array(rows)
    ratios = rows[:, 3]
    max_ratio = float(ratios.max())
    slope = None
    passed = math.isfinite(max_ratio)
    if max_ratio > 0:
        bins = np.unique(np.round(np.log2(rows[:, 0]), 0))
        centers, peaks = [], []
        for bval in bins:
            sel = np.round(np.log2(rows[:, 0]), 0) == bval
            if sel.sum() >= 5 and ratios[sel].max() > 0:
                centers.append(2.0 ** bval)
                peaks.append(ratios[sel].max())
        if len(centers) >= 2:
            slope = fit_power_law(centers, peaks)[0]
            passed = passed and slope >= -slack
    return ProbeReport(f"holder_difference_n{n}", slope, 0.0, max_ratio, len(rows), passed,
                       {"n": n, "alpha": alpha, "bound_exponent": expo, "difference_exponent": a_eff,
                        "hypothesis_ok": hypothesis_ok, "exploratory": not hypothesis_ok,
                        "slack": slack},
                       [tuple(map(float, r[[0, 1, 2]])) + (float(r[0] ** a_eff / r[1] ** expo),)
                        for r in rows])


def _nearby_node(grid, j, rng, max_offset):
    n_t, n_p = grid.shape
    it, ip = divmod(int(j), n_p)
    dt, dp = rng.integers(-max_offset, max_offset + 1, 2)
    if dt == 0 and dp == 0:
        dp = 1
    return int(np.clip(it + dt, 0, n_t - 1) * n_p + (ip + dp) % n_p)


def probe_sobolev_seminorm(geom: BoundaryGeometry, a_star: OperatorMatrix, n: int, nu: float
                           ) -> float:
    """Discrete ``H^{0, nu}`` size of the L_n kernel.

    Triple sum of ``|L_n(x, y) - L_n(x, y')|^2 / |y - y'|^{2 nu + d}`` over
    grid nodes, plus the ``L^2`` part.  Pairs ``(y, y')`` closer than one node
    spacing are excluded.
    """
    if nu < 0:
        raise InvalidArgumentError("nu must be non-negative")
    matrix = assemble_composed(a_star, n)
    kern = matrix.kernel_values()
    grid = a_star.grid
    m = grid.measures
    d = grid.d
    pts = grid.points
    dist = np.sqrt(np.maximum(np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1), 0.0))
    if d == 1:
        idx = np.arange(grid.size)
        keep = idx[:, None] != idx[None, :]
    else:
        h = np.sqrt(m)
        keep = dist >= 0.5 * np.minimum(h[:, None], h[None, :])
    weights = np.where(keep, np.outer(m, m) / np.where(keep, dist, 1.0) ** (2 * nu + d), 0.0)
    rowsum = weights.sum(axis=1)
    # sum_{j,j'} (a_j - a_j')^2 W_jj' = 2 sum_j a_j^2 c_j - 2 a^T W a
    per_x = (kern ** 2) @ rowsum - np.einsum("ij,ij->i", kern @ weights, kern)
    seminorm = 2.0 * np.dot(m, per_x)
    l2 = np.dot(m, (kern ** 2) @ m)
    return float(seminorm + l2)


def sobolev_refinement_ratio(reg: RegularityClass, nu: float, n: int = 1,
                             settings: tuple = ((6, 512), (7, 1024)), amplitude: float = 0.2,
                             base: int = 2) -> float:
    """Ratio of the discrete Sobolev size between two ``(levels, N)`` settings of the
    Weierstrass family, refined jointly so each grid resolves its finest oscillation."""
    values = []
    for levels, size in settings:
        geom = make_weierstrass_curve(reg, levels, amplitude, base)
        a_star = assemble(geom, make_grid(geom, size), NP_STAR)
        values.append(probe_sobolev_seminorm(geom, a_star, n, nu))
    return values[1] / values[0]


def probe_sobolev_threshold(coarse: OperatorMatrix, fine: OperatorMatrix, n: int, nus,
                            regularity: RegularityClass, stable_max: float = 1.2,
                            growth_min: float = 1.5, geoms: tuple = (None, None)) -> ProbeReport:
    """Refinement ratios of the discrete Sobolev size on either side of ``(2 n alpha - d) / 2``.

    Below the threshold the ratio fine/coarse must stay at most
    ``stable_max``; above it the ratio must reach ``growth_min``.  Values of
    ``nu`` equal to the threshold are reported but not judged.
    """
    d = coarse.grid.d
    threshold = (2 * n * regularity.alpha - d) / 2
    rows, passed = [], True
    details = {"n": n, "threshold": threshold, "stable_max": stable_max, "growth_min": growth_min,
               "coarse_nodes": coarse.size, "fine_nodes": fine.size}
    worst = 0.0
    for nu in sorted(float(v) for v in nus):
        lo = probe_sobolev_seminorm(geoms[0], coarse, n, nu)
        hi = probe_sobolev_seminorm(geoms[1], fine, n, nu)
        ratio = hi / lo
        if nu < threshold:
            ok = ratio <= stable_max
        elif nu > threshold:
            ok = ratio >= growth_min
        else:
            ok = True
        passed = passed and ok
        worst = max(worst, ratio)
        details[f"ratio_nu_{nu:g}"] = ratio
        details[f"pass_nu_{nu:g}"] = bool(ok)
        rows.append((nu, lo, hi, ratio))
    return ProbeReport("sobolev_seminorm", None, threshold, worst, len(rows), passed, details, rows)


def probe_tangential_derivatives(geom: BoundaryGeometry, l: int, pair_sample: int = 512,
                                 separations: tuple = (1e-3, 1e-1), n_sep: int = 16,
                                 slack: float = 0.2, regularity: RegularityClass | None = None
                                 ) -> ProbeReport:
    """Slope of ``sup |d^l/ds^l L_1|`` against ``|t - s|``, compared one-sidedly with
    ``min(0, -(2 - k + l - alpha))``."""
    if not isinstance(geom, ParametricCurve):
        raise InvalidArgumentError("tangential derivative probe is defined for curves only")
    reg = _declared(geom, regularity)
    if l < 0 or (not reg.is_smooth and l > reg.k) or l > geom.derivative_order - 2:
        raise InvalidArgumentError(f"unsupported derivative order l={l}")
    seps = np.geomspace(*separations, n_sep)
    t = np.arange(pair_sample) / pair_sample
    sup = np.zeros(n_sep)
    for t0 in t:
        vals = tangential_derivative_L1(geom, t0, np.concatenate([t0 + seps, t0 - seps]), l)
        sup = np.maximum(sup, np.maximum(np.abs(vals[:n_sep]), np.abs(vals[n_sep:])))
    # a negative bound exponent would force the kernel to vanish on the
    # diagonal, which it does not (its limit is the curvature); cap at bounded
    predicted = min(0.0, -(2 - reg.k + l - reg.alpha))
    # the quotient recurrence loses about one factor of 1/|t - s| per order
    speed = float(np.max(geom.evaluate(t).speed))
    noise = 1e3 * np.finfo(float).eps * speed ** l / (speed * seps) ** (l + 2)
    if np.all(sup <= noise):
        return ProbeReport(f"tangential_derivative_l{l}", None, predicted, 0.0,
                           pair_sample * n_sep, True, {"identically_zero": True, "slack": slack})
    slope, _, r2 = fit_power_law(seps, sup)
    ratio = sup / seps ** predicted if math.isfinite(predicted) else sup
    return ProbeReport(f"tangential_derivative_l{l}", slope, predicted,
                       float(ratio.max() / np.median(ratio)), pair_sample * n_sep,
                       slope >= predicted - slack, {"r_squared": r2, "slack": slack, "l": l},
                       [(float(s), float(v)) for s, v in zip(seps, sup)])


def probe_smoothing(geom: BoundaryGeometry, matrix: OperatorMatrix, s: float = 0.0,
                    source_decay: float = 1.0, seed: int = 0, floor: float = 1e-10) -> dict:
    """Fourier-coefficient gain of the discrete K on a random-sign source.

    The source has ``|f^(m)| = m^{-source_decay}`` on all resolvable modes.
    The gain is the output decay exponent minus the source exponent, fitted
    on modes ``2 .. N/8`` whose transfer ``|g^(m)| / |f^(m)|`` stays above
    ``floor``.  With no such mode (rank-one output, e.g. the circle) the gain
    is ``inf``.
    """
    if geom.dim_d != 1:
        raise InvalidArgumentError("smoothing probe is defined for curves only")
    size = matrix.size
    k_mat = matrix.entries if matrix.identity.which == NP else discrete_adjoint(
        matrix.entries, matrix.grid.measures)
    rng = np.random.default_rng(seed)
    modes = np.arange(1, size // 2)
    amp = modes ** (-float(source_decay))
    signs = rng.choice([-1.0, 1.0], size=(2, modes.size))
    t = matrix.grid.nodes
    arg = 2 * np.pi * np.outer(t, modes)
    f = np.cos(arg) @ (signs[0] * amp) + np.sin(arg) @ (signs[1] * amp)
    g = k_mat @ f
    f_hat = np.abs(np.fft.rfft(f))
    g_hat = np.abs(np.fft.rfft(g))
    band = np.arange(2, size // 8 + 1)
    transfer = g_hat[band] / f_hat[band]
    use = band[transfer >= floor]
    if use.size < 2:
        return {"gain": math.inf, "source_decay": source_decay, "s": s, "band": [], "modes_used": 0}
    out_slope = fit_power_law(use, g_hat[use])[0]
    in_slope = fit_power_law(use, f_hat[use])[0]
    return {"gain": float(in_slope - out_slope), "output_decay": float(-out_slope),
            "source_decay": source_decay, "s": s, "band": [int(use[0]), int(use[-1])],
            "modes_used": int(use.size)}


def smoothing_report(geom: BoundaryGeometry, matrix: OperatorMatrix, source_decay: float = 1.0,
                     seed: int = 0, slack: float = 0.2, regularity: RegularityClass | None = None
                     ) -> ProbeReport:
    """:func:`probe_smoothing` as a pass/fail report: gain >= alpha - slack."""
    reg = _declared(geom, regularity)
    out = probe_smoothing(geom, matrix, source_decay=source_decay, seed=seed)
    gain = out["gain"]
    details = dict(out, slack=slack)
    details["band"] = list(out["band"])
    return ProbeReport("smoothing", gain, reg.alpha, gain, out["modes_used"],
                       bool(gain >= reg.alpha - slack), details)
