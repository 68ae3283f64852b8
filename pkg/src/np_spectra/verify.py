"""Built-in oracle suite behind ``np-spectra verify``.

Each check compares a computed quantity with a value known in closed form
(circle, ellipse, sphere) or with an inequality/identity that must hold for
every matrix (Weyl, singular-value powers).  Result files carry numbers and
verdicts only; timings go to the terminal so repeated runs stay
byte-identical.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analysis import fit_decay
from .discretize import ROW_SUM, assemble, make_grid
from .geometry import make_circle, make_ellipse, make_perturbed_sphere
from .io import write_json, write_rows
from .kernels import NP, NP_STAR
from .spectral import (cluster_moduli, eigen_spectrum, power_identity_error, spectrum,
                       weyl_check, with_resolution)

__all__ = ["CheckResult", "CHECKS", "QUICK_CHECKS", "run_checks", "write_results", "format_table"]

WEYL_P = (0.25, 0.5, 1.0, 2.0)


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_dict(self) -> dict:
        return {"name": self.name, "pass": bool(self.passed), "measured": self.measured,
                "tolerance": self.tolerance, "details": self.details}


def check_circle() -> CheckResult:
    geom = make_circle(1.0)
    mat = assemble(geom, make_grid(geom, 16), NP, ROW_SUM)
    lam = eigen_spectrum(mat).eigenvalues
    expected = np.zeros(16)
    expected[0] = 0.5
    dev = float(np.max(np.abs(lam - expected)))
    row_dev = float(np.max(np.abs(mat.entries.sum(axis=1) - 0.5)))
    return CheckResult("circle", dev <= 1e-12 and row_dev <= 1e-15, dev, 1e-12,
                       {"row_sum_deviation": row_dev, "n_nodes": 16})


def ellipse_pair_error(lam, pairs: int = 8) -> float:
    """Worst relative error of the leading ``+-(1/2) 3^-n`` pairs after the eigenvalue 1/2."""
    worst = 0.0
    for n in range(1, pairs + 1):
        pair = np.sort(lam[2 * n - 1: 2 * n + 1].real)
        target = 0.5 * 3.0 ** (-n)
        worst = max(worst, abs(pair[1] - target) / target, abs(pair[0] + target) / target)
    return float(worst)


def check_ellipse() -> CheckResult:
    geom = make_ellipse(2.0, 1.0)
    coarse = eigen_spectrum(assemble(geom, make_grid(geom, 256), NP_STAR))
    fine = with_resolution(eigen_spectrum(assemble(geom, make_grid(geom, 512), NP_STAR)), coarse)
    err = ellipse_pair_error(fine.eigenvalues)
    fit = fit_decay(fine)
    return CheckResult("ellipse", err <= 1e-5 and not fit.power_law_plausible, err, 1e-5,
                       {"r_squared": fit.r_squared, "power_law_plausible": fit.power_law_plausible,
                        "j_resolved": fine.j_resolved, "n_nodes": 512})


def check_sphere() -> CheckResult:
    geom = make_perturbed_sphere()
    lam = eigen_spectrum(assemble(geom, make_grid(geom, 48, 96), NP_STAR)).eigenvalues
    clusters = cluster_moduli(np.abs(lam[1:16]), 0.01)
    expected = [(1 / 6, 3), (1 / 10, 5), (1 / 14, 7)]
    ok = len(clusters) >= 3
    worst = 0.0
    for (center, mult), (target, m_exp) in zip(clusters, expected):
        worst = max(worst, abs(center - target) / target)
        ok = ok and mult == m_exp
    return CheckResult("sphere", ok and worst <= 0.02, worst, 0.02,
                       {"clusters": [[c, m] for c, m in clusters[:3]], "grid": [48, 96]})


def _corpus():
    circle, ellipse = make_circle(1.0), make_ellipse(2.0, 1.0)
    yield "circle", assemble(circle, make_grid(circle, 16), NP_STAR)
    yield "ellipse_np_star", assemble(ellipse, make_grid(ellipse, 256), NP_STAR)
    yield "ellipse_np", assemble(ellipse, make_grid(ellipse, 256), NP)


def check_weyl() -> CheckResult:
    worst, failures, count = 0.0, [], 0
    for name, mat in _corpus():
        spec = spectrum(mat)
        for p in WEYL_P:
            lhs = np.cumsum(np.abs(spec.eigenvalues) ** p)
            rhs = np.cumsum(spec.singular_values ** p)
            # every J at once; weyl_check on the last J confirms the scalar path
            ok = lhs <= rhs * (1 + 1e-12)
            count += ok.size
            worst = max(worst, float(np.max((lhs - rhs) / rhs)))
            if not ok.all() or not weyl_check(spec, p, mat.size).holds:
                failures.append(f"{name}:p={p:g}")
    return CheckResult("weyl", not failures, worst, 1e-12,
                       {"cases": count, "failures": failures})


def check_power_identity(quick: bool = False) -> CheckResult:
    circle, ellipse = make_circle(1.0), make_ellipse(2.0, 1.0)
    cases = [("circle", assemble(circle, make_grid(circle, 16), NP_STAR))]
    if not quick:
        cases.append(("ellipse", assemble(ellipse, make_grid(ellipse, 64), NP_STAR)))
    errors = {}
    for name, mat in cases:
        for n in (2, 3):
            errors[f"{name}_n{n}"] = power_identity_error(mat, n, 20)
    worst = max(errors.values())
    return CheckResult("power_identity", worst <= 1e-8, worst, 1e-8, errors)


CHECKS = {
    "circle": check_circle,
    "ellipse": check_ellipse,
    "sphere": check_sphere,
    "weyl": check_weyl,
    "power_identity": check_power_identity,
}
QUICK_CHECKS = ("circle",)


def run_checks(names=None, quick: bool = False) -> list:
    names = QUICK_CHECKS if quick and names is None else (names or tuple(CHECKS))
    results = []
    for name in names:
        start = time.perf_counter()
        res = CHECKS[name]()
        res.seconds = time.perf_counter() - start
        results.append(res)
    return results


def write_results(results, out_dir) -> list:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path, csv_path = out_dir / "verify_results.json", out_dir / "verify_results.csv"
    write_json(json_path, {"checks": [r.to_dict() for r in results],
                           "all_pass": all(r.passed for r in results)})
    write_rows(csv_path, ("check", "pass", "measured", "tolerance"),
               [(r.name, "pass" if r.passed else "FAIL", r.measured, r.tolerance) for r in results])
    return [json_path, csv_path]


def format_table(results) -> str:
    lines = [f"{'check':<16}{'result':<8}{'measured':>14}{'tolerance':>12}{'time [s]':>10}"]
    for r in results:
        lines.append(f"{r.name:<16}{'pass' if r.passed else 'FAIL':<8}{r.measured:>14.3e}"
                     f"{r.tolerance:>12.1e}{r.seconds:>10.2f}")
    return "\n".join(lines)
