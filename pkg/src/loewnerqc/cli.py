"""Command-line front end: declarative configuration, pipeline
orchestration, and bit-stable export of grids, fields, and reports.

Every subcommand assembles a RunConfig (config file merged with flags,
flags winning), dispatches to one library operation, and emits a
ReportEnvelope as JSON: to stdout, or atomically to --output.  With
LOEWNERQC_THREADS=1 the envelope is byte-identical across reruns of the
same config (the timing block is omitted); with more threads, grid
fills run concurrently and a timing block is included.

Exit codes: 0 success, 2 invalid input or configuration, 3 numerical
failure (the envelope then carries structured diagnostics).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from .analysis import BeltramiField, GridSampler, beltrami_field, oracle, schwarzian_bounds
from .becker import (DEFAULT_CLASSIFICATION_RADII, BoundarySettings,
                     becker_extend, classify_becker, recover_herglotz_from_mu)
from .chains import ChainEvaluator, ChainSettings, range_diagnostic
from .core import PolarGrid
from .errors import NumericalError, ToolkitError, ValidationError
from .evolution import EvolutionTrajectory, SolverSettings, assemble_vector_field
from .herglotz import check_becker_condition

THREADS_ENV = "LOEWNERQC_THREADS"

_COMMANDS = ("evolve", "chain", "extend", "beltrami", "classify",
             "recover", "range", "schwarzian", "demo")

# every legal config key with a short description (doubles as the grammar doc)
_KEYS = {
    "command": "subcommand name",
    "driving.tau": "driving spec: complex literal or essential:rho=NAME[,t_max=T]",
    "driving.p": "Herglotz spec: const:V | koebe:k=K[,n=N] | sigma:sigma=S | essential:rho=NAME",
    "time.s": "start time (>= 0)",
    "time.t": "end time (>= s)",
    "point.z": "complex point 're,im' (or a plain real)",
    "evolve.derivative": "true to also evolve d/dz through the variational flow",
    "chain.mode": "radial | general | auto",
    "chain.horizon": "largest time the chain limit monitor may use",
    "chain.step": "monitor ladder step",
    "chain.tolerance": "chain limit certificate tolerance",
    "grid.radii": "comma list of grid radii",
    "grid.angular_count": "angular samples per circle (power of two)",
    "becker.k": "declared Becker bound k in [0, 1)",
    "boundary.delta": "outermost distance from |z| = 1 for boundary extrapolation",
    "boundary.levels": "number of extrapolation refinements",
    "boundary.tolerance": "largest accepted boundary-extrapolation residual",
    "field.circles": "comma list of circle radii (> 1) for dilatation traces",
    "field.h": "finite-difference step for Wirtinger derivatives",
    "classify.tolerance": "classifier tolerance override",
    "input.path": "input file (.json envelope/payload or .csv trace)",
    "map.catalog": "closed-form map: f1:k=K | f2:k=K | fn:k=K,n=N | fsigma:sigma=S",
    "range.horizon": "diagnostic horizon T",
    "range.step": "diagnostic sample step",
    "solver.rtol": "ODE relative tolerance",
    "solver.atol": "ODE absolute tolerance",
    "demo.name": "demo pipeline name (koebe)",
    "output.path": "envelope (json) or data file (csv) destination",
    "output.format": "json | csv",
    "output.figures": "directory for optional figures (rendering is opt-in)",
}


# -- RunConfig ----------------------------------------------------------------------

class RunConfig:
    """Flat key = value configuration with dotted sections.

    Values stay strings in canonical (stripped) form so that
    parse -> serialize -> parse is idempotent; typed accessors validate
    ranges at the point of use.
    """

    def __init__(self, command: str, settings: dict):
        if command not in _COMMANDS:
            raise ValidationError(
                f"unknown command {command!r}; choose one of {', '.join(_COMMANDS)}")
        for key in settings:
            if key not in _KEYS or key == "command":
                raise ValidationError(f"unknown config key {key!r}")
        self.command = command
        self.settings = {k: str(v).strip() for k, v in settings.items()}

    # parsing / serialization

    @classmethod
    def parse(cls, text: str, command: str | None = None) -> "RunConfig":
        settings = {}
        found = None
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, eq, value = line.partition("=")
            if not eq:
                raise ValidationError(f"config line {ln}: expected key = value")
            key, value = key.strip(), value.strip()
            if key == "command":
                found = value
            else:
                settings[key] = value
        cmd = command or found
        if cmd is None:
            raise ValidationError("config does not name a command")
        if found is not None and command is not None and found != command:
            raise ValidationError(
                f"config file says command = {found}, but {command} was invoked")
        return cls(cmd, settings)

    def serialize(self) -> str:
        lines = [f"command = {self.command}"]
        lines += [f"{k} = {self.settings[k]}" for k in sorted(self.settings)]
        return "\n".join(lines) + "\n"

    def echo(self) -> dict:
        return {"command": self.command, "settings": dict(sorted(self.settings.items()))}

    def __eq__(self, other):
        return (isinstance(other, RunConfig)
                and self.command == other.command
                and self.settings == other.settings)

    # typed accessors

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.settings.get(key, default)

    def require(self, key: str) -> str:
        value = self.settings.get(key)
        if value is None or value == "":
            raise ValidationError(f"missing required setting {key!r} ({_KEYS[key]})")
        return value

    def get_float(self, key: str, default: float | None = None,
                  lo: float = -np.inf, hi: float = np.inf) -> float:
        raw = self.settings.get(key)
        if raw is None:
            if default is None:
                raise ValidationError(f"missing required setting {key!r}")
            return float(default)
        try:
            value = float(raw)
        except ValueError:
            raise ValidationError(f"{key} = {raw!r} is not a number") from None
        if not lo <= value <= hi:
            raise ValidationError(f"{key} = {value} outside [{lo}, {hi}]")
        return value

    def get_int(self, key: str, default: int | None = None,
                lo: int = -2**62, hi: int = 2**62) -> int:
        raw = self.settings.get(key)
        if raw is None:
            if default is None:
                raise ValidationError(f"missing required setting {key!r}")
            return int(default)
        try:
            value = int(raw)
        except ValueError:
            raise ValidationError(f"{key} = {raw!r} is not an integer") from None
        if not lo <= value <= hi:
            raise ValidationError(f"{key} = {value} outside [{lo}, {hi}]")
        return value

    def get_bool(self, key: str, default: bool = False) -> bool:
        raw = self.settings.get(key)
        if raw is None:
            return default
        low = raw.lower()
        if low in ("true", "1", "yes"):
            return True
        if low in ("false", "0", "no"):
            return False
        raise ValidationError(f"{key} = {raw!r} is not a boolean")

    def get_complex(self, key: str, default: complex | None = None) -> complex:
        raw = self.settings.get(key)
        if raw is None:
            if default is None:
                raise ValidationError(f"missing required setting {key!r}")
            return complex(default)
        return _parse_complex(key, raw)

    def get_floats(self, key: str, default: tuple | None = None) -> tuple:
        raw = self.settings.get(key)
        if raw is None:
            if default is None:
                raise ValidationError(f"missing required setting {key!r}")
            return tuple(default)
        try:
            items = tuple(float(part) for part in raw.split(",") if part.strip())
        except ValueError:
            raise ValidationError(f"{key} = {raw!r} is not a comma list of numbers") from None
        if not items:
            raise ValidationError(f"{key} must list at least one number")
        return items


def _parse_complex(key: str, raw: str) -> complex:
    parts = [p.strip() for p in raw.split(",")]
    try:
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
        if len(parts) == 1:
            return complex(parts[0].replace(" ", ""))
    except ValueError:
        pass
    raise ValidationError(f"{key} = {raw!r} is not a complex number ('re,im')")


def _parse_catalog(text: str):
    """'f1:k=0.5' | 'fn:k=0.5,n=3' | 'fsigma:sigma=1.5' -> ClosedFormMap."""
    name, _, body = str(text).partition(":")
    name = name.strip().lower()
    params = {}
    for item in body.split(","):
        item = item.strip()
        if not item:
            continue
        pkey, eq, pval = item.partition("=")
        if not eq:
            raise ValidationError(f"catalog parameter {item!r} is not key=value")
        try:
            value = float(pval)
        except ValueError:
            raise ValidationError(f"catalog parameter {item!r} is not numeric") from None
        params[pkey.strip()] = int(value) if pkey.strip() == "n" else value
    return oracle(name, **params)


# -- serialization helpers ----------------------------------------------------------

def _pair(z: complex) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def _pairs(arr) -> list:
    a = np.asarray(arr, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _grid_payload(radii, angular_count: int, rows) -> dict:
    """The grid export schema: values row-major in rho then theta."""
    rows = np.asarray(rows, dtype=complex).reshape(len(radii), angular_count)
    flat = rows.reshape(-1)
    return {"grid": {"radii": [float(r) for r in radii],
                     "angular_count": int(angular_count)},
            "values": _pairs(flat)}


def _grid_csv(radii, rows) -> str:
    rows = np.asarray(rows, dtype=complex)
    out = ["rho,theta_index,re,im"]
    for r, row in zip(radii, rows):
        out += [f"{float(r):.17g},{j},{v.real:.17g},{v.imag:.17g}"
                for j, v in enumerate(row)]
    return "\n".join(out) + "\n"


def _read_trace_csv(path: str):
    """Read the trace format (rho,theta_index,re,im; legacy column names
    re_mu/im_mu accepted) into (radii, rows)."""
    try:
        with open(path, newline="") as handle:
            reader = csv.reader(handle)
            table = [row for row in reader if row and any(c.strip() for c in row)]
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    if not table:
        raise ValidationError(f"{path} is empty")
    header = [c.strip().lower() for c in table[0]]
    names = {"re_mu": "re", "im_mu": "im"}
    header = [names.get(c, c) for c in header]
    for col in ("rho", "theta_index", "re", "im"):
        if col not in header:
            raise ValidationError(f"{path} lacks column {col!r}")
    idx = {c: header.index(c) for c in ("rho", "theta_index", "re", "im")}
    groups: dict = {}
    try:
        for row in table[1:]:
            rho = float(row[idx["rho"]])
            j = int(row[idx["theta_index"]])
            val = complex(float(row[idx["re"]]), float(row[idx["im"]]))
            groups.setdefault(rho, {})[j] = val
    except (ValueError, IndexError) as exc:
        raise ValidationError(f"{path}: malformed row ({exc})") from None
    radii = sorted(groups)
    if not radii:
        raise ValidationError(f"{path} holds no samples")
    counts = {len(groups[r]) for r in radii}
    if len(counts) != 1:
        raise ValidationError(f"{path}: circles disagree on sample count")
    n = counts.pop()
    rows = np.empty((len(radii), n), dtype=complex)
    for i, r in enumerate(radii):
        circle = groups[r]
        if sorted(circle) != list(range(n)):
            raise ValidationError(
                f"{path}: circle rho = {r} does not cover theta_index 0..{n - 1}")
        rows[i] = [circle[j] for j in range(n)]
    return radii, rows


def _read_json_payload(path: str) -> dict:
    try:
        with open(path) as handle:
            obj = json.load(handle)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from None
    if isinstance(obj, dict) and "payload" in obj:
        obj = obj["payload"]
    if not isinstance(obj, dict):
        raise ValidationError(f"{path} does not hold a result payload")
    return obj


def _complex_grid_from_payload(payload: dict, path: str):
    try:
        radii = [float(r) for r in payload["grid"]["radii"]]
        count = int(payload["grid"]["angular_count"])
        vals = np.asarray(payload["values"], dtype=float)
    except (KeyError, TypeError, ValueError):
        raise ValidationError(
            f"{path} lacks the grid schema (grid.radii, grid.angular_count, values)") from None
    if not radii:
        raise ValidationError(f"{path}: empty radii list")
    if vals.ndim != 2 or vals.shape != (len(radii) * count, 2):
        raise ValidationError(
            f"{path}: values must hold {len(radii) * count} [re, im] pairs")
    rows = (vals[:, 0] + 1j * vals[:, 1]).reshape(len(radii), count)
    return radii, rows


def _field_from_parts(radii, rows, source: str, error_estimate: float) -> BeltramiField:
    mags = np.abs(rows)
    return BeltramiField(tuple(radii), rows,
                         max_dilatation=float(np.max(mags)) if rows.size else 0.0,
                         jacobian_sign_ok=bool(np.all(mags < 1.0)),
                         source=source, error_estimate=float(error_estimate))


def _load_field(cfg: RunConfig, threads: int) -> BeltramiField:
    """A BeltramiField from --input (csv trace, json field, json grid)
    or from --catalog plus trace circles."""
    path = cfg.get("input.path")
    catalog = cfg.get("map.catalog")
    count = cfg.get_int("grid.angular_count", 256, lo=2)
    h = cfg.get_float("field.h", 1e-5, lo=1e-12, hi=0.1)
    if path and catalog:
        raise ValidationError("pass either input.path or map.catalog, not both")

    if catalog:
        circles = cfg.get_floats("field.circles", DEFAULT_CLASSIFICATION_RADII)
        return beltrami_field(_parse_catalog(catalog), circles, count, h=h)

    if not path:
        raise ValidationError("need input.path or map.catalog "
                              "to obtain a Beltrami field")
    if path.lower().endswith(".csv"):
        radii, rows = _read_trace_csv(path)
        return _field_from_parts(radii, rows, "imported", 0.0)

    payload = _read_json_payload(path)
    kind = payload.get("kind")
    if kind == "beltrami" or "traces" in payload:
        try:
            radii = [float(r) for r in payload["radii"]]
            tr = np.asarray(payload["traces"], dtype=float)
            rows = tr[..., 0] + 1j * tr[..., 1]
        except (KeyError, TypeError, ValueError, IndexError):
            raise ValidationError(f"{path}: malformed Beltrami payload") from None
        return _field_from_parts(radii, rows, "imported",
                                 float(payload.get("error_estimate", 0.0)))

    # otherwise: a value grid; interpolate the exterior and differentiate
    radii, rows = _complex_grid_from_payload(payload, path)
    keep = [i for i, r in enumerate(radii) if r > 1.0]
    if len(keep) < 4:
        raise ValidationError(
            f"{path}: need at least 4 exterior radii to interpolate, got {len(keep)}")
    sampler = GridSampler([radii[i] for i in keep], rows[keep])
    sampler.error_estimate = max(sampler.error_estimate,
                                 float(payload.get("error_estimate", 0.0)))
    r_lo, r_hi = radii[keep[0]], radii[keep[-1]]
    margin = 0.02 * (r_hi - r_lo)
    default = tuple(
        float(r) for r in np.geomspace(r_lo + margin, r_hi - margin, 3))
    circles = cfg.get_floats("field.circles", default)
    return beltrami_field(sampler, circles, count, h=h)


# -- envelope and output ------------------------------------------------------------

def _thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return max(1, os.cpu_count() or 1)
    try:
        value = int(raw)
    except ValueError:
        raise ValidationError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if value < 1:
        raise ValidationError(f"{THREADS_ENV} must be >= 1, got {value}")
    return value


def _atomic_write(path: str, data: str) -> None:
    """Complete files only: write to a temp name, then rename over."""
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target) or ".",
                               prefix=".loewnerqc.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(data)
        os.replace(tmp, target)
    except OSError:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _envelope(cfg: RunConfig, payload: dict, threads: int, seconds: float) -> str:
    env = {
        "artifact": {"name": "loewnerqc", "version": __version__},
        "config": cfg.echo(),
        "timing": None if threads == 1 else {"threads": threads,
                                             "seconds": seconds},
        "payload": payload,
    }
    return json.dumps(env, sort_keys=True, indent=2) + "\n"


def _emit(cfg: RunConfig, payload: dict, threads: int, seconds: float,
          csv_text: str | None = None) -> None:
    out = cfg.get("output.path")
    fmt = cfg.get("output.format", "json")
    if fmt not in ("json", "csv"):
        raise ValidationError(f"output.format must be json or csv, got {fmt!r}")
    if fmt == "csv":
        if csv_text is None:
            raise ValidationError(
                f"command {cfg.command!r} has no csv form; use output.format = json")
        if not out:
            raise ValidationError("csv output needs output.path")
        _atomic_write(out, csv_text)
        print(f"wrote {out}")
        return
    text = _envelope(cfg, payload, threads, seconds)
    if out:
        _atomic_write(out, text)
        print(f"wrote {out}")
    else:
        sys.stdout.write(text)


def _figures(cfg: RunConfig, payload: dict) -> None:
    out_dir = cfg.get("output.figures")
    if not out_dir:
        return
    from . import plots
    os.makedirs(out_dir, exist_ok=True)
    kind = payload.get("kind")
    written = []
    if kind == "extension":
        written.append(plots.save_extension_figure(payload, out_dir))
    elif kind == "beltrami":
        written.append(plots.save_field_figure(payload, out_dir))
    elif kind == "becker-report":
        written.append(plots.save_coefficients_figure(payload, out_dir))
    elif kind == "range-report":
        written.append(plots.save_range_figure(payload, out_dir))
    elif kind == "demo":
        written.append(plots.save_extension_figure(payload["extension"], out_dir))
        written.append(plots.save_coefficients_figure(payload["classification"], out_dir))
    for path in written:
        print(f"figure: {path}", file=sys.stderr)


# -- shared assembly ----------------------------------------------------------------

def _solver_settings(cfg: RunConfig) -> SolverSettings:
    return SolverSettings(
        rtol=cfg.get_float("solver.rtol", 1e-10, lo=1e-13, hi=1e-2),
        atol=cfg.get_float("solver.atol", 1e-30, lo=0.0, hi=1e-2))


def _vector_field(cfg: RunConfig):
    return assemble_vector_field(cfg.get("driving.tau", "0"),
                                 cfg.require("driving.p"))


def _chain_settings(cfg: RunConfig) -> ChainSettings:
    return ChainSettings(
        horizon=cfg.get_float("chain.horizon", 40.0, lo=1.0, hi=1e4),
        step=cfg.get_float("chain.step", 1.0, lo=1e-3, hi=100.0),
        tolerance=cfg.get_float("chain.tolerance", 1e-9, lo=0.0, hi=1.0))


def _chain_evaluator(cfg: RunConfig) -> ChainEvaluator:
    trajectory = EvolutionTrajectory(_vector_field(cfg), _solver_settings(cfg))
    mode = cfg.get("chain.mode", "auto")
    if mode not in ("auto", "radial", "general"):
        raise ValidationError(f"chain.mode must be auto|radial|general, got {mode!r}")
    return ChainEvaluator(trajectory, None if mode == "auto" else mode,
                          _chain_settings(cfg))


def _polar_grid(cfg: RunConfig) -> PolarGrid:
    return PolarGrid(cfg.get_floats("grid.radii"),
                     cfg.get_int("grid.angular_count", None, lo=1))


def _boundary_settings(cfg: RunConfig) -> BoundarySettings:
    return BoundarySettings(
        delta=cfg.get_float("boundary.delta", 0.02, lo=1e-8, hi=0.5),
        levels=cfg.get_int("boundary.levels", 4, lo=1, hi=12),
        tolerance=cfg.get_float("boundary.tolerance", 1e-5, lo=0.0, hi=1.0))


# -- subcommands --------------------------------------------------------------------

def _cmd_evolve(cfg: RunConfig, threads: int):
    trajectory = EvolutionTrajectory(_vector_field(cfg), _solver_settings(cfg))
    s = cfg.get_float("time.s", 0.0, lo=0.0)
    t = cfg.get_float("time.t", None, lo=0.0)
    z = cfg.get_complex("point.z")
    payload = {"kind": "evolution", "s": s, "t": t, "z": _pair(z)}
    if cfg.get_bool("evolve.derivative", False):
        pair = trajectory.evolve_with_derivative(s, t, z)
        value = pair.value
        payload["derivative"] = _pair(pair.dz)
    else:
        value = trajectory.evolve_point(s, t, z)
    payload["value"] = _pair(value)
    return payload, None


def _cmd_chain(cfg: RunConfig, threads: int):
    evaluator = _chain_evaluator(cfg)
    s = cfg.get_float("time.s", 0.0, lo=0.0)
    if cfg.get("grid.radii") is not None:
        grid = _polar_grid(cfg)
        points = grid.nodes()
        values = evaluator.eval_batch(s, points)
        payload = {"kind": "chain", "s": s, "mode": evaluator.mode,
                   **_grid_payload(grid.radii, grid.angular_count, values)}
        csv_text = _grid_csv(grid.radii, values.reshape(len(grid.radii), -1))
    else:
        z = cfg.get_complex("point.z")
        value = evaluator.eval(s, z)
        payload = {"kind": "chain", "s": s, "mode": evaluator.mode,
                   "z": _pair(z), "value": _pair(value)}
        csv_text = None
    return payload, csv_text


def _cmd_extend(cfg: RunConfig, threads: int):
    evaluator = _chain_evaluator(cfg)
    if evaluator.mode != "radial":
        raise ValidationError("extend needs chain.mode = radial (or a radial field)")
    grid = _polar_grid(cfg)
    raw_k = cfg.get("becker.k")
    k = cfg.get_float("becker.k", lo=0.0, hi=1.0 - 1e-15) if raw_k else None
    ext = becker_extend(evaluator, grid, _boundary_settings(cfg), k=k,
                        threads=threads)
    all_rows = np.vstack([ext.interior, ext.exterior])
    payload = {"kind": "extension",
               **_grid_payload(list(ext.interior_radii) + list(ext.exterior_radii),
                               ext.angular_count, all_rows),
               "seam": {"interior": _pairs(ext.seam_interior),
                        "exterior": _pairs(ext.seam_exterior),
                        "discrepancy": float(ext.seam_discrepancy)},
               "error_estimate": float(ext.error_estimate),
               "k_declared": float(ext.k_declared)}
    csv_text = _grid_csv(list(ext.interior_radii) + list(ext.exterior_radii),
                         all_rows)
    return payload, csv_text


def _field_payload(field: BeltramiField) -> dict:
    return {"kind": "beltrami",
            "radii": [float(r) for r in field.radii],
            "angular_count": int(field.angular_count),
            "traces": _pairs(field.traces),
            "max_dilatation": float(field.max_dilatation),
            "jacobian_sign_ok": bool(field.jacobian_sign_ok),
            "source": field.source,
            "error_estimate": float(field.error_estimate)}


def _cmd_beltrami(cfg: RunConfig, threads: int):
    field = _load_field(cfg, threads)
    payload = _field_payload(field)
    return payload, _grid_csv(field.radii, field.traces)


def _cmd_classify(cfg: RunConfig, threads: int):
    field = _load_field(cfg, threads)
    raw = cfg.get("classify.tolerance")
    tolerance = cfg.get_float("classify.tolerance", lo=0.0, hi=1.0) if raw else None
    report = classify_becker(field, tolerance=tolerance)
    return {"kind": "becker-report", **report.to_dict(),
            "source": field.source}, None


def _cmd_recover(cfg: RunConfig, threads: int):
    field = _load_field(cfg, threads)
    raw = cfg.get("classify.tolerance")
    tolerance = cfg.get_float("classify.tolerance", lo=0.0, hi=1.0) if raw else None
    spec = recover_herglotz_from_mu(field, tolerance=tolerance)
    k_obs = spec.tail_sup()
    condition = check_becker_condition(spec, k_obs)
    return {"kind": "herglotz-table",
            "times": [float(t) for t in spec.times],
            "rows": _pairs(spec.rows),
            "k_observed": float(k_obs),
            "becker_condition_satisfied": bool(condition.satisfied),
            "note": spec.note}, None


def _cmd_range(cfg: RunConfig, threads: int):
    field = _vector_field(cfg)
    report = range_diagnostic(
        field,
        cfg.get_float("range.horizon", 40.0, lo=1.0, hi=1e5),
        settings=_solver_settings(cfg),
        sample_step=cfg.get_float("range.step", 0.25, lo=1e-4, hi=10.0))
    return {"kind": "range-report", **report.to_dict()}, None


def _cmd_schwarzian(cfg: RunConfig, threads: int):
    f = _parse_catalog(cfg.require("map.catalog"))
    raw_k = cfg.get("becker.k")
    k = cfg.get_float("becker.k", lo=0.0, hi=1.0 - 1e-15) if raw_k else f.k_value
    report = schwarzian_bounds(f, k)
    payload = {"kind": "schwarzian-report", **report.to_dict(),
               "map": cfg.require("map.catalog")}
    raw_z = cfg.get("point.z")
    if raw_z:
        from .analysis import schwarzian as _schwarzian
        z = cfg.get_complex("point.z")
        if abs(z) >= 1.0:
            raise ValidationError("schwarzian evaluation point must satisfy |z| < 1")
        payload["z"] = _pair(z)
        payload["value"] = _pair(_schwarzian(f, z))
    return payload, None


def _cmd_demo(cfg: RunConfig, threads: int):
    name = cfg.get("demo.name", "koebe")
    if name != "koebe":
        raise ValidationError(f"unknown demo {name!r}; available: koebe")
    k = cfg.get_float("becker.k", 0.5, lo=0.0, hi=1.0 - 1e-15)

    def step(msg):
        print(f"demo: {msg}", file=sys.stderr)

    step(f"chain for the koebe-type Herglotz function, k = {k:g}")
    sub = RunConfig(cfg.command, dict(cfg.settings))
    sub.settings.setdefault("driving.tau", "0")
    sub.settings["driving.p"] = f"koebe:k={k:.17g}"
    evaluator = _chain_evaluator(sub)
    angles = PolarGrid((1.0,), 128).angles
    probe = 0.9 * np.exp(1j * angles)
    values = evaluator.eval_batch(0.0, probe)
    exact = probe / (1.0 - k * probe) ** 2
    chain_err = float(np.max(np.abs(values - exact)))
    step(f"chain sup error vs closed form on |z| = 0.9: {chain_err:.3e}")

    step("extension across the unit circle")
    grid = PolarGrid((0.45, 0.9, 1.2, 1.6, 2.0, 2.4), 128)
    ext = becker_extend(evaluator, grid, _boundary_settings(sub),
                        threads=threads)
    step(f"seam discrepancy {ext.seam_discrepancy:.3e}, "
         f"boundary residual {ext.error_estimate:.3e}")

    step("Beltrami field of the extension")
    field = beltrami_field(ext.sampler(), (1.3, 1.5, 1.8), 128)
    step(f"max dilatation {field.max_dilatation:.6f}")

    step("classification by circle Fourier coefficients")
    report = classify_becker(field)
    step(f"is_becker = {report.is_becker}")

    ext_payload = {"kind": "extension",
                   **_grid_payload(list(ext.interior_radii) + list(ext.exterior_radii),
                                   ext.angular_count,
                                   np.vstack([ext.interior, ext.exterior])),
                   "seam": {"interior": _pairs(ext.seam_interior),
                            "exterior": _pairs(ext.seam_exterior),
                            "discrepancy": float(ext.seam_discrepancy)},
                   "error_estimate": float(ext.error_estimate),
                   "k_declared": float(ext.k_declared)}
    payload = {"kind": "demo", "name": name, "k": k,
               "chain_sup_error": chain_err,
               "extension": ext_payload,
               "beltrami": _field_payload(field),
               "classification": {"kind": "becker-report", **report.to_dict()}}
    return payload, None


_DISPATCH = {
    "evolve": _cmd_evolve,
    "chain": _cmd_chain,
    "extend": _cmd_extend,
    "beltrami": _cmd_beltrami,
    "classify": _cmd_classify,
    "recover": _cmd_recover,
    "range": _cmd_range,
    "schwarzian": _cmd_schwarzian,
    "demo": _cmd_demo,
}


# -- argument parsing ---------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="loewnerqc",
        description="Loewner chains, Becker quasiconformal extensions, "
                    "Beltrami classification, and range diagnostics.")
    parser.add_argument("--version", action="version",
                        version=f"loewnerqc {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, flags):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="key = value config file; flags override")
        p.add_argument("--output", dest="output.path",
                       help=_KEYS["output.path"])
        p.add_argument("--format", dest="output.format",
                       help=_KEYS["output.format"])
        p.add_argument("--figures", dest="output.figures",
                       help=_KEYS["output.figures"])
        for flag, key in flags:
            if key == "evolve.derivative":
                p.add_argument(flag, dest=key, action="store_const",
                               const="true", help=_KEYS[key])
            else:
                p.add_argument(flag, dest=key, help=_KEYS[key])
        return p

    solver = [("--rtol", "solver.rtol"), ("--atol", "solver.atol")]
    driving = [("--tau", "driving.tau"), ("--p", "driving.p")]
    chainy = [("--mode", "chain.mode"), ("--horizon", "chain.horizon"),
              ("--step", "chain.step"), ("--chain-tolerance", "chain.tolerance")]
    grid = [("--radii", "grid.radii"), ("--angular-count", "grid.angular_count")]
    fieldy = [("--catalog", "map.catalog"), ("--input", "input.path"),
              ("--circles", "field.circles"), ("--h", "field.h"),
              ("--angular-count", "grid.angular_count")]

    add("evolve", "flow one point between two times",
        driving + solver + [("--s", "time.s"), ("--t", "time.t"),
                            ("--z", "point.z"),
                            ("--derivative", "evolve.derivative")])
    add("chain", "normalized chain element at time s",
        driving + solver + chainy + grid + [("--s", "time.s"),
                                            ("--z", "point.z")])
    add("extend", "quasiconformal extension on a polar grid",
        driving + solver + chainy + grid
        + [("--k", "becker.k"), ("--delta", "boundary.delta"),
           ("--levels", "boundary.levels"),
           ("--boundary-tolerance", "boundary.tolerance")])
    add("beltrami", "dilatation traces on circles", fieldy)
    add("classify", "Becker / non-Becker verdict for a field",
        fieldy + [("--tolerance", "classify.tolerance")])
    add("recover", "Herglotz function from a Becker field",
        fieldy + [("--tolerance", "classify.tolerance")])
    add("range", "plane vs disk-like diagnostics for a driving pair",
        driving + solver + [("--horizon", "range.horizon"),
                            ("--step", "range.step")])
    add("schwarzian", "Schwarzian norm and extension bounds for a catalog map",
        [("--catalog", "map.catalog"), ("--k", "becker.k"),
         ("--z", "point.z")])
    demo = add("demo", "end-to-end pipeline on a named example",
               [("--k", "becker.k")])
    demo.add_argument("name", nargs="?", default=None, help=_KEYS["demo.name"])
    return parser


def _merge_config(args: argparse.Namespace) -> RunConfig:
    command = args.command
    if getattr(args, "config", None):
        try:
            with open(args.config) as handle:
                text = handle.read()
        except OSError as exc:
            raise ValidationError(f"cannot read config {args.config}: {exc}") from None
        cfg = RunConfig.parse(text, command=command)
    else:
        cfg = RunConfig(command, {})
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        if key == "name":
            key = "demo.name"
        cfg.settings[key] = str(value).strip()
    return RunConfig(cfg.command, cfg.settings)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _merge_config(args)
        threads = _thread_count()
        start = time.time()
        payload, csv_text = _DISPATCH[cfg.command](cfg, threads)
        _emit(cfg, payload, threads, time.time() - start, csv_text)
        _figures(cfg, payload)
        return 0
    except NumericalError as exc:
        diag = {"kind": "error", "type": type(exc).__name__, "message": str(exc)}
        for attr in ("time", "last_time", "worst_theta", "residual"):
            value = getattr(exc, attr, None)
            if value is not None:
                diag[attr] = float(value)
        iterates = getattr(exc, "last_iterates", None)
        if iterates is not None:
            diag["last_iterates"] = [_pairs(arr) for arr in iterates]
        try:
            _emit(cfg, diag, threads, time.time() - start, None)
        except ToolkitError:
            print(f"error: {exc}", file=sys.stderr)
        else:
            print(f"error: {exc}", file=sys.stderr)
        return 3
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
