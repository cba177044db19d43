"""JSON model and data files.

Model file::

    {"shape": [2, 2],
     "mu": [0, 0, 0, 0],
     "factors": [[[1, 0], [0, 1]], [[2, 0.5], [0.5, 1]]],
     "family": {"name": "student_t", "params": {"nu": 5}}}

``family`` may also be a grammar string such as ``"student_t nu=5"``.

Data file::

    {"shape": [2, 2], "n": 3, "rows": [[...], [...], [...]],
     "provenance": {"seed": 42, "mode": "representation", "version": "0.1.0"}}

Arrays are in vec order (last index fastest).  Floats are written with
``repr`` precision, so reading a file back reproduces the values exactly.
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from .errors import DomainError
from .generators import Custom, GeneratorFamily, parse_family
from .sampling import TEModel
from .tensor_core import TensorShape

MODEL_FIELDS = {"shape", "mu", "factors", "family"}
DATA_FIELDS = {"shape", "n", "rows", "provenance"}


class FileFormatError(DomainError):
    """A model or data file is malformed."""


def family_to_dict(family: GeneratorFamily) -> dict:
    if isinstance(family, Custom):
        raise FileFormatError("custom families cannot be serialised")
    params = {f.name: getattr(family, f.name) for f in dataclasses.fields(family)}
    return {"name": family.name, "params": params}


def model_to_dict(model: TEModel) -> dict:
    return {
        "shape": list(model.shape.dims),
        "mu": model.mu.tolist(),
        "factors": [f.tolist() for f in model.cov.factors],
        "family": family_to_dict(model.family),
    }


def model_from_dict(obj) -> TEModel:
    if not isinstance(obj, dict):
        raise FileFormatError("model file must contain a JSON object")
    unknown = set(obj) - MODEL_FIELDS
    if unknown:
        raise FileFormatError(f"unknown model fields {sorted(unknown)}")
    missing = MODEL_FIELDS - set(obj)
    if missing:
        raise FileFormatError(f"missing model fields {sorted(missing)}")
    try:
        return TEModel(obj["shape"], obj["mu"], [np.asarray(f, float) for f in obj["factors"]],
                       parse_family(obj["family"]))
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"invalid model: {exc}") from None


def data_to_dict(shape, rows, provenance=None) -> dict:
    rows = np.asarray(rows, dtype=float)
    out = {"shape": list(TensorShape(shape).dims), "n": int(rows.shape[0]), "rows": rows.tolist()}
    if provenance is not None:
        out["provenance"] = provenance
    return out


def data_from_dict(obj):
    """Return ``(shape, rows, provenance)``."""
    if not isinstance(obj, dict):
        raise FileFormatError("data file must contain a JSON object")
    unknown = set(obj) - DATA_FIELDS
    if unknown:
        raise FileFormatError(f"unknown data fields {sorted(unknown)}")
    for key in ("shape", "n", "rows"):
        if key not in obj:
            raise FileFormatError(f"missing data field {key!r}")
    try:
        shape = TensorShape(obj["shape"])
        rows = np.asarray(obj["rows"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise FileFormatError(f"invalid data: {exc}") from None
    if rows.size == 0:
        rows = rows.reshape(0, shape.pstar)
    if rows.ndim != 2 or rows.shape[1] != shape.pstar:
        raise FileFormatError(f"every row must have length p* = {shape.pstar}")
    if int(obj["n"]) != rows.shape[0]:
        raise FileFormatError(f"n = {obj['n']} but {rows.shape[0]} rows present")
    if not np.all(np.isfinite(rows)):
        raise FileFormatError("data contain non-finite values")
    return shape, rows, obj.get("provenance")


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, allow_nan=False) + "\n"


def _load(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise FileFormatError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise FileFormatError(f"{path} is not valid JSON: {exc}") from None


def read_model(path) -> TEModel:
    return model_from_dict(_load(path))


def write_model(path, model: TEModel) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(model_to_dict(model)))


def read_data(path):
    return data_from_dict(_load(path))


def write_data(path, shape, rows, provenance=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(data_to_dict(shape, rows, provenance)))
