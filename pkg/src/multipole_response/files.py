"""Model files (JSON) and plot-ready CSV tables."""
from __future__ import annotations

import csv
import io
import json
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ModelValidationError
from .model import DEFAULT_ETA, STRENGTHS, MediumModel, MultipoleTransition, validate_model

SPECTRUM_HEADER = ("omega", "re_eps", "im_eps", "re_mu", "im_mu", "re_chi", "im_chi", "im_epsmu")
POLES_HEADER = ("re_omega", "im_omega", "re_residue", "im_residue")
KERNEL_HEADER = ("t", "g")
BUNDLED_MODELS = ("vacuum", "diamagnetic", "paramagnetic")

_TRANSITION_KEYS = ("omega_eg", "gamma_e") + STRENGTHS


def bundled_model_path(name: str) -> Path:
    """Filesystem path of a model shipped with the package."""
    if name not in BUNDLED_MODELS:
        raise KeyError(f"no bundled model named {name!r}")
    return Path(str(resources.files("multipole_response") / "data" / f"{name}.json"))


def _number(value, where):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ModelValidationError(f"{where} must be a number, got {value!r}")
    return float(value)


def model_from_dict(doc) -> MediumModel:
    """Build and validate a model from the decoded JSON document."""
    if not isinstance(doc, dict):
        raise ModelValidationError("model file must contain a JSON object")
    unknown = set(doc) - {"eta", "transitions"}
    if unknown:
        raise ModelValidationError(f"unknown top-level keys: {sorted(unknown)}")
    eta = _number(doc.get("eta", DEFAULT_ETA), "eta")
    items = doc.get("transitions")
    if not isinstance(items, list):
        raise ModelValidationError("'transitions' must be an array")
    transitions = []
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise ModelValidationError("transition entries must be objects", i)
        unknown = set(item) - set(_TRANSITION_KEYS)
        if unknown:
            raise ModelValidationError(f"unknown keys {sorted(unknown)}", i)
        for key in ("omega_eg", "gamma_e"):
            if key not in item:
                raise ModelValidationError(f"missing required key {key!r}", i)
        values = {key: _number(item.get(key, 0.0), key) for key in _TRANSITION_KEYS}
        transitions.append(MultipoleTransition(**values))
    return validate_model(MediumModel(tuple(transitions), eta))


def model_to_dict(model: MediumModel) -> dict:
    return {
        "eta": model.hierarchy_ratio,
        "transitions": [{key: getattr(t, key) for key in _TRANSITION_KEYS}
                        for t in model.transitions],
    }


def load_model(path) -> MediumModel:
    """Read a model file.

    ``OSError`` propagates for unreadable files; malformed content raises
    :class:`ModelValidationError`.
    """
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelValidationError(f"invalid JSON: {exc}") from None
    return model_from_dict(doc)


def dump_model(model: MediumModel, path) -> None:
    Path(path).write_text(json.dumps(model_to_dict(model), indent=2) + "\n", encoding="utf-8")


def format_number(value: float) -> str:
    # 17 significant digits: exact round trip for binary64.
    return f"{float(value):.16e}"


def write_csv(path, header, columns) -> None:
    """Write equal-length numeric ``columns`` under ``header``."""
    cols = [np.asarray(c, dtype=float) for c in columns]
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in zip(*cols):
        buf.write(",".join(format_number(v) for v in row) + "\n")
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_csv(path) -> tuple[tuple[str, ...], np.ndarray]:
    """Return the header and a ``(rows, columns)`` float array."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        rows = [[float(v) for v in row] for row in reader]
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return header, data
