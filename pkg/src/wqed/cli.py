"""Command-line front end.

    wqed transmission --setup gs --gamma-g 0.015625 --out t.csv
    wqed poles --setup gg --delta 2.0
    wqed flux --config run.json --points 101
    wqed reproduce fig2c --out fig2c.csv

All rates are in units of the setup's reference rate.  A JSON config given
with ``--config`` supplies defaults; command-line flags override it.  Output
is CSV (header row, comma separated, LF endings, shortest round-trip floats)
written to ``--out`` or stdout.  Failures print one JSON object to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import jsonschema
import numpy as np

from . import figures, lindblad, scattering, setups, spectroscopy
from .model import InvalidSpecError, SystemSpec
from .setups import SetupKind

log = logging.getLogger("wqed")

TASKS = ("transmission", "poles", "flux", "spectrum", "population", "reproduce")
RATE_KEYS = ("gamma", "g", "delta", "gamma_s", "gamma_g", "gamma_20", "gamma_21",
             "omega_c", "omega_p", "gamma_2phi", "gamma_1phi")
PARAM_KEYS = RATE_KEYS + ("delta_c",)

_rate = {"type": "number", "minimum": 0}
SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "task": {"enum": list(TASKS)},
        "setup": {"enum": [k.value for k in SetupKind] + ["smsm"]},
        "target": {"enum": list(figures.TARGETS)},
        "system": {
            "type": "object",
            "required": ["atoms"],
            "properties": {
                "k0": {"type": "number", "exclusiveMinimum": 0},
                "phase_mode": {"enum": ["markov", "exact"]},
                "atoms": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "required": ["points"],
                        "properties": {
                            "label": {"type": "string"},
                            "detuning": {"type": "number"},
                            "points": {
                                "type": "array",
                                "minItems": 1,
                                "items": {
                                    "type": "object",
                                    "required": ["position", "strength"],
                                    "properties": {
                                        "position": {"type": "number"},
                                        "strength": _rate,
                                    },
                                },
                            },
                        },
                    },
                },
                "dipole_couplings": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "required": ["atoms", "g"],
                        "properties": {
                            "atoms": {"type": "array", "items": {"type": "integer"},
                                      "minItems": 2, "maxItems": 2},
                            "g": {"type": "number"},
                        },
                    },
                },
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "min": {"type": "number"},
                "max": {"type": "number"},
                "points": {"type": "integer", "minimum": 2},
            },
        },
        "drive": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"power": _rate, "frequency": {"type": "number"}},
        },
        "method": {"enum": ["scattering", "analytic", "master"]},
        "out": {"type": "string"},
        "phase_mode": {"enum": ["markov", "exact"]},
        "k0": {"type": "number", "exclusiveMinimum": 0},
        **{k: _rate for k in RATE_KEYS},
        "delta_c": {"type": "number"},
    },
}


class ConfigError(ValueError):
    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(message)


@dataclass
class Grid:
    min: float | None = None
    max: float | None = None
    points: int | None = None


@dataclass
class Drive:
    power: float | None = None
    frequency: float | None = None


@dataclass
class RunConfig:
    task: str
    setup: str | None = None
    params: dict[str, float] = field(default_factory=dict)
    system: dict[str, Any] | None = None
    target: str | None = None
    grid: Grid = field(default_factory=Grid)
    drive: Drive = field(default_factory=Drive)
    method: str | None = None
    out: str | None = None
    phase_mode: str | None = None
    k0: float | None = None

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"task": self.task}
        for key in ("setup", "system", "target", "method", "out", "phase_mode", "k0"):
            if getattr(self, key) is not None:
                doc[key] = getattr(self, key)
        doc.update(self.params)
        for key, sub in (("grid", self.grid), ("drive", self.drive)):
            values = {k: v for k, v in asdict(sub).items() if v is not None}
            if values:
                doc[key] = values
        return doc


def serialize(config: RunConfig) -> str:
    return json.dumps(config.to_dict(), sort_keys=True)


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path)


def config_from_dict(doc: dict[str, Any]) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object", "")
    validator = jsonschema.Draft202012Validator(SCHEMA)
    error = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if error is not None:
        path = list(error.absolute_path)
        if error.validator == "additionalProperties":
            extra = sorted(set(error.instance) - set(error.schema.get("properties", {})))
            path += extra[:1]
        raise ConfigError(error.message, _pointer(path))
    if "task" not in doc:
        raise ConfigError("no task given", "/task")
    if doc["task"] == "reproduce" and "target" not in doc:
        raise ConfigError("reproduce needs a target", "/target")
    if doc["task"] != "reproduce" and "setup" not in doc and "system" not in doc:
        raise ConfigError("either a setup or a system must be given", "/setup")
    if "setup" in doc and "system" in doc:
        raise ConfigError("give either a setup or a system, not both", "/system")
    grid = Grid(**doc.get("grid", {}))
    if grid.min is not None and grid.max is not None and grid.max <= grid.min:
        raise ConfigError("grid max must exceed grid min", "/grid/max")
    setup = SetupKind.parse(doc["setup"]).value if "setup" in doc else None
    params = {k: float(doc[k]) for k in PARAM_KEYS if k in doc}
    if setup is not None:
        try:
            setups.make_params(setup, **params)
        except ValueError as exc:
            bad = sorted(set(params) - set(setups.default_params(setup).to_dict()))
            raise ConfigError(str(exc), _pointer([bad[0]]) if bad else "") from None
    elif params:
        raise ConfigError("setup parameters given without a setup",
                          _pointer([sorted(params)[0]]))
    return RunConfig(
        task=doc["task"],
        setup=setup,
        params=params,
        system=doc.get("system"),
        target=doc.get("target"),
        grid=grid,
        drive=Drive(**doc.get("drive", {})),
        method=doc.get("method"),
        out=doc.get("out"),
        phase_mode=doc.get("phase_mode"),
        k0=doc.get("k0"),
    )


def parse_config(text: str, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Parse a JSON config; ``overrides`` (from flags) win over file values."""
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", "") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object", "")
    for key, value in (overrides or {}).items():
        if isinstance(value, dict):
            sub = dict(doc.get(key, {}))
            for k, v in value.items():
                if k in sub and sub[k] != v:
                    log.warning("flag overrides config value %s/%s: %r -> %r", key, k, sub[k], v)
                sub[k] = v
            doc[key] = sub
        else:
            if key in doc and doc[key] != value:
                log.warning("flag overrides config value %s: %r -> %r", key, doc[key], value)
            doc[key] = value
    return config_from_dict(doc)


# -- execution ---------------------------------------------------------------

def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(stream, header: Sequence[str], rows) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def _kind_and_params(cfg: RunConfig):
    kind = SetupKind.parse(cfg.setup)
    return kind, setups.make_params(kind, **cfg.params)


def _custom_spec(cfg: RunConfig) -> SystemSpec:
    doc = dict(cfg.system)
    if cfg.k0 is not None:
        doc["k0"] = cfg.k0
    if cfg.phase_mode is not None:
        doc["phase_mode"] = cfg.phase_mode
    return SystemSpec.from_dict(doc)


def _scale(cfg: RunConfig) -> float:
    if cfg.setup:
        return _kind_and_params(cfg)[1].scale
    spec = _custom_spec(cfg)
    return max((p.strength for a in spec.atoms for p in a.coupling_points), default=1.0) or 1.0


def _grid(cfg: RunConfig, lo: float = -2.0, hi: float = 2.0, n: int = 401) -> np.ndarray:
    scale = _scale(cfg)
    g = cfg.grid
    return np.linspace(g.min if g.min is not None else lo * scale,
                       g.max if g.max is not None else hi * scale,
                       g.points if g.points is not None else n)


def _model(cfg: RunConfig, delta_p: float) -> lindblad.DrivenModel:
    if cfg.setup:
        kind, params = _kind_and_params(cfg)
        return lindblad.build_setup_me(kind, params, delta_p, cfg.drive.power)
    power = cfg.drive.power if cfg.drive.power is not None else 0.1 * _scale(cfg)
    return lindblad.build_array_me(_custom_spec(cfg), delta_p, power=power)


def _rows_transmission(cfg: RunConfig):
    grid = _grid(cfg)
    method = cfg.method
    if cfg.setup:
        kind, params = _kind_and_params(cfg)
        method = method or ("analytic" if kind is SetupKind.LAMBDA else "scattering")
        if method == "analytic":
            t = np.asarray(setups.analytic_t(kind, params, grid))
        elif method == "scattering":
            spec = setups.make_spec(kind, params, cfg.k0 or setups.DEFAULT_K0)
            if cfg.phase_mode:
                spec = spec.with_phase_mode(cfg.phase_mode)
            t = scattering.transmission(spec, grid)
        else:
            t = np.array([lindblad.transmission(_model(cfg, x)) for x in grid])
    else:
        method = method or "scattering"
        if method == "analytic":
            raise ConfigError("closed forms exist only for named setups", "/method")
        if method == "scattering":
            t = scattering.transmission(_custom_spec(cfg), grid)
        else:
            t = np.array([lindblad.transmission(_model(cfg, x)) for x in grid])
    rows = [(float(x), float(abs(v)), float(v.real), float(v.imag)) for x, v in zip(grid, t)]
    return ("delta_p", "abs_t", "re_t", "im_t"), rows


def _rows_poles(cfg: RunConfig):
    if not cfg.setup:
        raise ConfigError("poles are available only for named setups", "/setup")
    kind, params = _kind_and_params(cfg)
    rep = setups.poles(kind, params)
    rows = [
        (name, float(z.real), float(z.imag), rep.regime.value, rep.threshold,
         float(rep.value), float(rep.critical))
        for name, z in (("z_plus", rep.z_plus), ("z_minus", rep.z_minus))
    ]
    return ("pole", "re", "im", "regime", "threshold", "value", "critical"), rows


def _rows_flux(cfg: RunConfig):
    grid = _grid(cfg)
    from .parallel import parallel_map

    flux = parallel_map(lambda x: spectroscopy.spectrum(_model(cfg, x)).flux, list(grid))
    return ("delta_p", "flux"), [(float(x), float(f)) for x, f in zip(grid, flux)]


def _rows_spectrum(cfg: RunConfig):
    if cfg.drive.frequency is not None:
        freq = cfg.drive.frequency
    elif cfg.setup:
        kind, params = _kind_and_params(cfg)
        try:
            freq = setups.eit_frequency(kind, params)
        except ValueError:
            freq = 0.0
    else:
        freq = 0.0
    model = _model(cfg, freq)
    omega = None
    if cfg.grid.min is not None or cfg.grid.max is not None or cfg.grid.points is not None:
        omega = _grid(cfg, -20.0, 20.0, 2001)
    res = spectroscopy.spectrum(model, omega=omega)
    return ("omega", "s"), [(float(w), float(s)) for w, s in zip(res.omega, res.s)]


def _rows_population(cfg: RunConfig):
    grid = _grid(cfg)
    first = _model(cfg, float(grid[0]))
    labels = ("gg", "S", "A", "ee") if first.dim == 4 else first.labels
    rows = []
    for x in grid:
        st = lindblad.steady_state(_model(cfg, float(x)))
        if first.dim == 4 or first.dim == 3:
            pops = [lindblad.population(st, l) for l in labels]
        else:
            pops = list(np.real(np.diag(st.rho)))
        rows.append((float(x), *map(float, pops)))
    return ("delta_p", *(f"p_{l}" for l in labels)), rows


def _rows_reproduce(cfg: RunConfig):
    table = figures.reproduce(cfg.target)
    return table.header, table.rows


RUNNERS = {
    "transmission": _rows_transmission,
    "poles": _rows_poles,
    "flux": _rows_flux,
    "spectrum": _rows_spectrum,
    "population": _rows_population,
    "reproduce": _rows_reproduce,
}


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute a config and write its CSV; returns the exit status."""
    header, rows = RUNNERS[cfg.task](cfg)
    buf = io.StringIO()
    write_csv(buf, header, rows)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        (stdout or sys.stdout).write(buf.getvalue())
    return 0


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="CSV output path (default stdout)")
    common.add_argument("--setup", help="lambda | ss | s-s | gs | gg")
    for key in PARAM_KEYS:
        common.add_argument("--" + key.replace("_", "-"), dest=key, type=float)
    common.add_argument("--grid-min", type=float)
    common.add_argument("--grid-max", type=float)
    common.add_argument("--points", type=int)
    common.add_argument("--power", type=float, help="drive power |alpha|^2")
    common.add_argument("--frequency", type=float, help="drive detuning")
    common.add_argument("--method", choices=["scattering", "analytic", "master"])
    common.add_argument("--phase-mode", choices=["markov", "exact"])
    common.add_argument("--k0", type=float)

    parser = argparse.ArgumentParser(prog="wqed", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task, parents=[common])
        if task == "reproduce":
            p.add_argument("target", choices=figures.TARGETS)
    return parser


def _overrides(ns: argparse.Namespace) -> dict[str, Any]:
    out: dict[str, Any] = {"task": ns.task}
    for key in ("setup", "out", "method", "phase_mode", "k0", *PARAM_KEYS):
        if getattr(ns, key, None) is not None:
            out[key] = getattr(ns, key)
    if getattr(ns, "target", None):
        out["target"] = ns.target
    grid = {k: v for k, v in (("min", ns.grid_min), ("max", ns.grid_max),
                              ("points", ns.points)) if v is not None}
    drive = {k: v for k, v in (("power", ns.power), ("frequency", ns.frequency))
             if v is not None}
    if grid:
        out["grid"] = grid
    if drive:
        out["drive"] = drive
    return out


def _fail(kind: str, message: str, code: int, path: str | None = None) -> int:
    record = {"error": kind, "message": message}
    if path is not None:
        record["path"] = path
    sys.stderr.write(json.dumps(record) + "\n")
    return code


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="wqed: %(levelname)s: %(message)s")
    ns = _parser().parse_args(argv)
    try:
        text = ""
        if ns.config:
            with open(ns.config, encoding="utf-8") as fh:
                text = fh.read()
        cfg = parse_config(text, _overrides(ns))
        return run(cfg)
    except ConfigError as exc:
        return _fail("ConfigError", str(exc), 2, exc.path)
    except InvalidSpecError as exc:
        return _fail("InvalidSpecError", str(exc), 2, "/system")
    except OSError as exc:
        return _fail("IOError", str(exc), 3)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        return _fail(type(exc).__name__, str(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
