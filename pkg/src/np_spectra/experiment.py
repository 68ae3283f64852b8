"""Config-driven experiment runner behind ``np-spectra run``.

A run assembles the operator on every grid of a refinement sequence, writes
each spectrum, fits the decay of the finest one on its resolved window, runs
the requested probes and records every emitted file in ``manifest.json``.
"""
from __future__ import annotations

import hashlib
import json
import os
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import analysis
from .discretize import DIAGONAL_LIMIT, ROW_SUM, assemble, make_grid
from .exceptions import InsufficientDataError, InvalidArgumentError, NumericFailureError
from .io import GEOMETRY_TYPES, geometry_from_spec, write_json, write_rows, write_spectrum
from .kernels import NP, NP_STAR
from .spectral import eigen_spectrum, singular_spectrum, with_resolution

__all__ = ["CONFIG_SCHEMA", "ConfigError", "RunResult", "load_config", "run_experiment",
           "worker_count", "SAMPLING_PROBES", "PROBE_NAMES"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_STRICT = 0, 2, 3, 4
PROBE_NAMES = ("convolution_bound", "kernel_singularity", "holder_difference", "sobolev_seminorm",
               "tangential_derivatives", "smoothing")
SAMPLING_PROBES = ("kernel_singularity", "holder_difference", "smoothing")
THREADS_ENV = "NP_SPECTRA_THREADS"

_grid_size = {"oneOf": [{"type": "integer", "minimum": 8},
                        {"type": "array", "items": {"type": "integer", "minimum": 4},
                         "minItems": 2, "maxItems": 2}]}
_seed = {"type": "integer", "minimum": 0}
_count = {"type": "integer", "minimum": 1}


def _probe(props):
    return {"type": "object", "properties": props, "additionalProperties": False}


CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["geometry", "grid_sizes"],
    "additionalProperties": False,
    "properties": {
        "geometry": {"oneOf": [
            {"type": "object", "required": ["file"], "additionalProperties": False,
             "properties": {"file": {"type": "string"}}},
            {"type": "object", "required": ["type"],
             "properties": {
                 "type": {"enum": list(GEOMETRY_TYPES)},
                 "parameters": {"type": "object"},
                 "regularity": {"type": "object", "properties": {
                     "k": {"oneOf": [{"type": "integer", "minimum": 1}, {"type": "null"}]},
                     "alpha": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}}},
                 "levels": {"type": "integer", "minimum": 0},
                 "amplitude": {"type": "number", "minimum": 0},
                 "base": {"type": "integer", "minimum": 2},
                 "phases": {"type": "array", "items": {"type": "number"}},
                 "description": {"type": "string"}}},
        ]},
        "grid_sizes": {"type": "array", "items": _grid_size, "minItems": 1},
        "levels": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "rule": {"enum": [ROW_SUM, DIAGONAL_LIMIT]},
        "operator": {"enum": [NP_STAR, NP]},
        "operations": {"type": "array", "minItems": 1, "uniqueItems": True,
                       "items": {"enum": ["spectrum", "decay", "probes", "all"]}},
        "decay": _probe({
            "window": {"type": "array", "minItems": 2, "maxItems": 2,
                       "items": {"oneOf": [{"type": "integer", "minimum": 2}, {"type": "null"}]}},
            "use": {"enum": ["eigen", "singular"]},
            "slack_delta": {"type": "number", "exclusiveMinimum": 0}}),
        "probes": _probe({
            "convolution_bound": _probe({"alpha": {"type": "number"}, "beta": {"type": "number"},
                                         "pair_sample": _count}),
            "kernel_singularity": _probe({"pair_sample": _count, "seed": _seed}),
            "holder_difference": _probe({"n": _count, "triple_sample": _count, "seed": _seed}),
            "sobolev_seminorm": _probe({"n": _count,
                                        "nu": {"type": "array", "minItems": 1,
                                               "items": {"type": "number", "minimum": 0}}}),
            "tangential_derivatives": _probe({"l": {"type": "integer", "minimum": 0},
                                              "pair_sample": _count}),
            "smoothing": _probe({"source_decay": {"type": "number"}, "seed": _seed}),
        }),
        "seed": _seed,
        "output_dir": {"type": "string"},
        "formats": {"type": "array", "uniqueItems": True,
                    "items": {"enum": ["csv", "json", "svg"]}},
    },
}


class ConfigError(InvalidArgumentError):
    """Schema or consistency violation, anchored to a line of the config file."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _line_of(text: str, path) -> int | None:
    """Best-effort line number of a JSON path: follows the object keys in order."""
    pos, line = 0, 1
    for key in path:
        if isinstance(key, int):
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(str(key))).search(text, pos)
        if m is None:
            break
        pos = m.start()
        line = text.count("\n", 0, pos) + 1
    return line


def load_config(path) -> dict:
    """Read, parse and validate a config; raises :class:`ConfigError`."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno) from exc
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        err = errors[0]
        where = "/".join(map(str, err.absolute_path)) or "<root>"
        raise ConfigError(f"{where}: {err.message}", _line_of(text, list(err.absolute_path)))
    _check_semantics(config, text)
    geom = config["geometry"]
    if "file" in geom:
        ref = (path.parent / geom["file"])
        try:
            config["geometry"] = json.loads(ref.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"geometry file {geom['file']}: {exc}",
                              _line_of(text, ["geometry", "file"])) from exc
    return config


def _count_of(size) -> int:
    return size if isinstance(size, int) else size[0] * size[1]


def _check_semantics(config, text):
    sizes = config["grid_sizes"]
    counts = [_count_of(s) for s in sizes]
    if any(b <= a for a, b in zip(counts, counts[1:])):
        raise ConfigError("grid_sizes must be strictly increasing", _line_of(text, ["grid_sizes"]))
    levels = config.get("levels")
    if levels is not None and len(levels) != len(sizes):
        raise ConfigError(f"levels has {len(levels)} entries for {len(sizes)} grid sizes",
                          _line_of(text, ["levels"]))
    probes = config.get("probes", {})
    for name in SAMPLING_PROBES:
        if name in probes and "seed" not in probes[name] and "seed" not in config:
            raise ConfigError(f"probe {name} samples randomly and needs a seed",
                              _line_of(text, ["probes", name]))


def worker_count() -> int:
    """Worker cap from ``NP_SPECTRA_THREADS`` (0 or unset means one per CPU)."""
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError as exc:
        raise InvalidArgumentError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if n < 0:
        raise InvalidArgumentError(f"{THREADS_ENV} must be >= 0")
    return n or (os.cpu_count() or 1)


@dataclass
class RunResult:
    exit_code: int
    output_dir: Path
    files: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    messages: list = field(default_factory=list)


def _size_label(size) -> str:
    return str(size) if isinstance(size, int) else f"{size[0]}x{size[1]}"


def _geometries(config) -> list:
    spec = config["geometry"]
    levels = config.get("levels")
    if levels is None:
        geom = geometry_from_spec(spec)
        return [geom] * len(config["grid_sizes"])
    if spec.get("type") not in ("weierstrass", "lacunary_sphere"):
        raise InvalidArgumentError("joint levels refinement needs a weierstrass or lacunary geometry")
    out = []
    for lv in levels:
        item = {k: v for k, v in spec.items() if k != "description"}
        item["levels"] = lv
        out.append(geometry_from_spec(item))
    return out


def _predicted_q(geom):
    reg = geom.regularity
    if reg.is_smooth:
        return 0.5 if geom.dim_d == 2 else None
    return analysis.critical_exponent(geom.dim_d, reg.k, reg.alpha)


def _run_probe(name, params, seed, geoms, matrices):
    geom, a_star = geoms[-1], matrices[-1]
    seed = params.get("seed", seed)
    if name == "convolution_bound":
        d = geom.dim_d
        return analysis.probe_convolution_bound(geom, a_star.grid, params.get("alpha", d / 2),
                                                params.get("beta", d / 2),
                                                params.get("pair_sample", 12))
    if name == "kernel_singularity":
        return analysis.probe_kernel_singularity(geom, params.get("pair_sample", 2048), seed=seed)
    if name == "holder_difference":
        return analysis.probe_holder_difference(geom, a_star, params.get("n", 1),
                                                params.get("triple_sample", 1000), seed)
    if name == "sobolev_seminorm":
        if len(matrices) < 2:
            raise InvalidArgumentError("the Sobolev probe needs at least two grid sizes")
        return analysis.probe_sobolev_threshold(matrices[-2], matrices[-1], params.get("n", 1),
                                                params.get("nu", [0.05, 0.3]), geom.regularity)
    if name == "tangential_derivatives":
        return analysis.probe_tangential_derivatives(geom, params.get("l", 1),
                                                     params.get("pair_sample", 512))
    if name == "smoothing":
        return analysis.smoothing_report(geom, a_star, params.get("source_decay", 1.0), seed)
    raise InvalidArgumentError(f"unknown probe {name!r}")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out_dir: Path, files: list) -> Path:
    """``manifest.json`` listing every file with its size and SHA-256, then a re-read check."""
    entries = [{"path": f.relative_to(out_dir).as_posix(), "bytes": f.stat().st_size,
                "sha256": _sha256(f)} for f in sorted(files)]
    manifest = out_dir / "manifest.json"
    write_json(manifest, {"files": entries})
    for entry in json.loads(manifest.read_text())["files"]:
        if _sha256(out_dir / entry["path"]) != entry["sha256"]:
            raise NumericFailureError(f"manifest mismatch for {entry['path']}")
    return manifest


def _plot(out_dir, spectra, labels, fit):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "np-spectra"
    fig, ax = plt.subplots(figsize=(6, 4))
    for spec, label in zip(spectra, labels):
        mod = spec.moduli[spec.moduli > 0]
        ax.loglog(np.arange(1, mod.size + 1), mod, ".", ms=3, label=f"N={label}")
    if fit is not None:
        j = np.arange(fit.window[0], fit.window[1] + 1)
        ax.loglog(j, fit.c_hat * j ** (-fit.q_hat), "k-", lw=1, label=f"q_hat={fit.q_hat:.3f}")
    ax.set_xlabel("j")
    ax.set_ylabel("|lambda_j|")
    ax.legend()
    path = out_dir / "spectrum.svg"
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def run_experiment(config: dict, output_dir=None, strict: bool = False) -> RunResult:
    """Execute a validated config.  Returns the exit code and emitted files."""
    out_dir = Path(output_dir or config.get("output_dir") or "np-spectra-output")
    out_dir.mkdir(parents=True, exist_ok=True)
    result = RunResult(EXIT_OK, out_dir)
    ops = set(config.get("operations", ["all"]))
    if "all" in ops:
        ops = {"spectrum", "decay", "probes"}
    formats = set(config.get("formats", ["csv", "json"]))
    rule = config.get("rule", ROW_SUM)
    operator = config.get("operator", NP_STAR)
    sizes = config["grid_sizes"]
    labels = [_size_label(s) for s in sizes]
    workers = worker_count()

    geoms = _geometries(config)

    def build(i):
        size = sizes[i]
        n_theta, n_phi = (size, None) if isinstance(size, int) else size
        grid = make_grid(geoms[i], n_theta, n_phi)
        a_star = assemble(geoms[i], grid, NP_STAR, rule)
        shown = a_star if operator == NP_STAR else assemble(geoms[i], grid, NP, rule)
        spec = eigen_spectrum(shown)
        if i == len(sizes) - 1:
            spec = singular_spectrum(shown, spec)
        return a_star, spec

    with ThreadPoolExecutor(max_workers=min(workers, len(sizes))) as pool:
        built = list(pool.map(build, range(len(sizes))))
    matrices = [b[0] for b in built]
    spectra = [b[1] for b in built]
    if len(spectra) > 1:
        spectra[-1] = with_resolution(spectra[-1], spectra[-2])
    finest = spectra[-1]

    if "spectrum" in ops or "decay" in ops:
        for spec, label, geom in zip(spectra, labels, geoms):
            csv_path = out_dir / f"spectrum_N{label}.csv"
            side = write_spectrum(spec, csv_path, {"geometry_spec": geom.to_spec()})
            result.files += [csv_path, side]

    fit = None
    if "decay" in ops:
        dcfg = config.get("decay", {})
        window = dcfg.get("window", [None, None])
        j_min = window[0] or analysis.DEFAULT_J_MIN
        j_max = min(window[1] or finest.j_resolved, finest.j_resolved)
        payload = {"j_resolved": finest.j_resolved, "n_nodes": finest.source.get("n_nodes"),
                   "geometry": finest.source.get("geometry")}
        try:
            fit = analysis.fit_decay(finest, (j_min, j_max), dcfg.get("use", "eigen"),
                                     _predicted_q(geoms[-1]), dcfg.get("slack_delta", 0.3))
            payload.update(fit.to_dict())
            rows = [(j, abs(finest.eigenvalues[j - 1]) if dcfg.get("use", "eigen") == "eigen"
                     else finest.singular_values[j - 1]) for j in range(j_min, j_max + 1)]
            write_rows(out_dir / "decay_points.csv", ("j", "abs_lambda"), rows)
            result.files.append(out_dir / "decay_points.csv")
            if fit.consistent is False:
                result.failures.append("decay")
        except InsufficientDataError as exc:
            payload["error"] = str(exc)
            result.failures.append("decay")
        write_json(out_dir / "decay.json", payload)
        result.files.append(out_dir / "decay.json")

    if "probes" in ops and config.get("probes"):
        seed = config.get("seed", 0)
        names = sorted(config["probes"])
        with ThreadPoolExecutor(max_workers=min(workers, len(names))) as pool:
            futures = {n: pool.submit(_run_probe, n, config["probes"][n], seed, geoms, matrices)
                       for n in names}
            reports = [futures[n].result() for n in names]
        # emission is serialized and ordered by probe name
        write_json(out_dir / "probes.json", [r.to_dict() for r in reports])
        result.files.append(out_dir / "probes.json")
        for name, rep in zip(names, reports):
            if rep.scatter:
                width = len(rep.scatter[0])
                header = ("separation", "measured", "bound")[:width] if width <= 3 else \
                    ("separation", "distance", "measured", "bound")
                if name == "sobolev_seminorm":
                    header = ("nu", "coarse", "fine", "ratio")
                path = out_dir / f"probe_{name}.csv"
                write_rows(path, header, rep.scatter)
                result.files.append(path)
            if not rep.passed:
                result.failures.append(name)

    if "svg" in formats:
        result.files.append(_plot(out_dir, spectra, labels, fit))

    write_manifest(out_dir, result.files)
    result.files.append(out_dir / "manifest.json")
    if strict and result.failures:
        result.exit_code = EXIT_STRICT
    return result
