"""CSV/JSON input and output plus the strict run-config schema."""

import csv
import json
import math
import os
import tempfile
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .errors import ConfigError, DataError
from .units import parse_quantity

SCHEMA_VERSION = 1

_Q = {"type": "string"}
_Q_LIST = {"type": "array", "items": _Q, "minItems": 1}
_POS_INT = {"type": "integer", "minimum": 1}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_RATE_MODEL = _obj({"C": {"type": "number", "minimum": 0}, "n": {"type": "number", "exclusiveMinimum": 0},
                    "tau0_inv": _Q, "E_a": _Q}, ("C", "n", "tau0_inv", "E_a"))

CONFIG_SCHEMA = _obj({
    "schema": {"const": SCHEMA_VERSION},
    "output_dir": {"type": "string"},
    "verbosity": {"type": "integer", "minimum": 0},
    "bath": _obj({
        "tau_c": _Q,
        "rate_model": {"oneOf": [{"const": "bulk"}, _RATE_MODEL]},
        "B_rms": _Q,
        "temperature": _Q,
    }),
    "filters": _obj({
        "echo_tau": _Q,
        "T2_star": _Q,
        "B0": _Q,
        "axis_projection": {"type": "number", "minimum": -1, "maximum": 1},
        "resonances": {"type": "array", "items": _Q, "minItems": 2, "maxItems": 2},
    }),
    "intrinsic": _obj({"T1": _Q, "T2": _Q}),
    "measured": _obj({"T1": _Q, "T2": _Q}),
    "sweep": _obj({"temperatures": _Q_LIST}, ("temperatures",)),
    "nsd": _obj({"f_min": _Q, "f_max": _Q, "points": _POS_INT, "temperatures": _Q_LIST}),
    "decay_grid": _obj({"t_max": _Q, "points": _POS_INT}),
    "mc": _obj({
        "preset": {"enum": ["validation", "zero-field"]},
        "tau_c": _Q,
        "B_rms": _Q,
        "delta": _Q,
        "dt": _Q,
        "n_trajectories": {"type": "integer", "minimum": 2},
        "taus": _Q_LIST,
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "workers": _POS_INT,
        "dump_trajectory": {"type": "boolean"},
    }),
    "fit": _obj({
        "mode": {"enum": ["decay", "extract", "rate_model", "table"]},
        "beta_bounds": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0},
                        "minItems": 2, "maxItems": 2},
        "echo_tau": _Q,
        "branch": {"enum": ["slow", "fast"]},
        "points": {"type": "array", "items": {"type": "array", "items": _Q, "minItems": 2, "maxItems": 2}},
        "free": {"type": "array", "items": {"enum": ["C", "n", "tau0_inv", "E_a"]}, "uniqueItems": True},
        "fixed": _obj({"C": {"type": "number"}, "n": {"type": "number"}, "tau0_inv": _Q, "E_a": _Q}),
        "temp_tol": _Q,
    }),
    "geometry": _obj({
        "nv_depth": _Q,
        "sensing_radius": _Q,
        "cap_radius": _Q,
        "cap_height": _Q,
        "concentration": _Q,
        "moment_muB": {"type": "number", "exclusiveMinimum": 0},
        "n_samples": {"type": "integer", "minimum": 10000},
        "dipolar": {"type": "boolean"},
        "target_count": {"type": "number", "minimum": 0},
    }),
})

_VALIDATOR = jsonschema.Draft7Validator(CONFIG_SCHEMA)


def _pointer(path):
    return "/" + "/".join(str(p) for p in path) if path else "/"


def validate_config(doc):
    """Raise :class:`ConfigError` at the first schema violation, with its JSON pointer."""
    errors = sorted(_VALIDATOR.iter_errors(doc), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = errors[0]
        raise ConfigError(err.message, pointer=_pointer(err.absolute_path))
    return doc


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"invalid JSON in {path}: {err}") from None
    return validate_config(doc)


def quantity(block, key, kind, pointer, default=None):
    """Parse ``block[key]`` as a quantity, attaching a JSON pointer to errors."""
    if key not in block:
        if default is None:
            raise ConfigError(f"missing required key {key!r}", pointer=pointer)
        return default
    try:
        return parse_quantity(block[key], kind)
    except ConfigError as err:
        raise ConfigError(str(err), pointer=f"{pointer}/{key}") from None


# --- output -----------------------------------------------------------------

def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, command, config, result):
    """Write a result document embedding the resolved config and tool version."""
    doc = {"schema": SCHEMA_VERSION, "tool": "nvbath", "version": __version__,
           "command": command, "config": config, "result": result}
    _atomic_write(path, json.dumps(_clean(doc), indent=2, sort_keys=True) + "\n")


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


# --- curves -----------------------------------------------------------------

def read_curve_csv(path):
    """Read a ``t_us,signal[,sigma]`` CSV; returns times in seconds, signal, sigma or None."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if header[:2] != ["t_us", "signal"] or len(header) > 3 or (len(header) == 3 and header[2] != "sigma"):
            raise DataError(f"{path}: header must be 't_us,signal[,sigma]', got {','.join(header)!r}")
        rows = [r for r in reader if r and any(c.strip() for c in r)]
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as err:
        raise DataError(f"{path}: {err}") from None
    if data.ndim != 2 or data.shape[0] == 0 or data.shape[1] != len(header):
        raise DataError(f"{path}: malformed rows")
    sigma = data[:, 2] if data.shape[1] == 3 else None
    return data[:, 0] * 1e-6, data[:, 1], sigma


def read_curve_metadata(path):
    """Sidecar JSON: nv_id, kind, temperature, field, smm_present (quantities with units)."""
    if not os.path.exists(path):
        return {}
    with open(path, encoding="utf-8") as fh:
        try:
            md = json.load(fh)
        except json.JSONDecodeError as err:
            raise ConfigError(f"{path}: {err}") from None
    allowed = {"nv_id", "kind", "temperature", "field", "smm_present"}
    extra = set(md) - allowed
    if extra:
        raise ConfigError(f"{path}: unknown metadata keys {sorted(extra)}")
    out = {k: md[k] for k in ("nv_id", "kind", "smm_present") if k in md}
    if "temperature" in md:
        out["temperature_K"] = parse_quantity(md["temperature"], "temperature")
    if "field" in md:
        out["field_T"] = parse_quantity(md["field"], "field")
    return out
