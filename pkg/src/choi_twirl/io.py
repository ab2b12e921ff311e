"""JSON encodings of matrices, channels, Choi operators and designs.

Matrices are lists of rows, each entry a ``[re, im]`` pair. Floats go through
``json``'s shortest round-trip repr, so decoding returns the exact doubles.

Schemas::

    channel  {"d": int, "t_in": int, "t_out": int, "kraus": [matrix, ...]}
    choi     {"d": int, "t_in": int, "t_out": int, "matrix": matrix}
    design   {"t": int, "group": str, "elements": [matrix, ...], "weights": [float, ...]}
             (+ "measure": {"nodes": [[...]], "weights": [...]} for non-compact groups)
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .cartan import AbelianMeasure
from .channels import ChoiOperator, KrausChannel, choi_from_kraus
from .designs import WeightedDesign


class MalformedInput(ValueError):
    """Input JSON does not follow the expected schema."""


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MalformedInput(f"matrix is not a nested list of numbers: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise MalformedInput(f"matrix must be rows of [re, im] pairs, got array of shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def encode_choi(j: ChoiOperator) -> dict:
    out = {"d": j.d, "t_in": j.t_in, "t_out": j.t_out, "matrix": encode_matrix(j.matrix)}
    if j.notes:
        out["notes"] = list(j.notes)
    return out


def encode_channel(ch: KrausChannel) -> dict:
    return {"d": ch.d, "t_in": ch.t_in, "t_out": ch.t_out, "kraus": [encode_matrix(k) for k in ch.kraus_ops]}


def _dims(data: dict) -> tuple[int, int, int]:
    try:
        return int(data["d"]), int(data["t_in"]), int(data["t_out"])
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"missing or invalid d/t_in/t_out: {exc}") from exc


def decode_choi(data: dict) -> ChoiOperator:
    """Accept a Choi object, a Kraus channel object, or a CLI result wrapping ``"choi"``."""
    if not isinstance(data, dict):
        raise MalformedInput("expected a JSON object")
    if "choi" in data and isinstance(data["choi"], dict):
        data = data["choi"]
    d, t_in, t_out = _dims(data)
    if "matrix" in data:
        return ChoiOperator(d, t_in, t_out, decode_matrix(data["matrix"]))
    if "kraus" in data:
        if not isinstance(data["kraus"], list):
            raise MalformedInput("'kraus' must be a list of matrices")
        ops = tuple(decode_matrix(k) for k in data["kraus"])
        return choi_from_kraus(KrausChannel(d, t_in, t_out, ops))
    raise MalformedInput("channel JSON needs either 'matrix' (Choi) or 'kraus'")


def encode_design(design: WeightedDesign) -> dict:
    out = {
        "t": design.t,
        "group": design.group,
        "elements": [encode_matrix(g) for g in design.elements],
        "weights": design.weights.tolist(),
    }
    if design.measure is not None:
        out["measure"] = design.measure.to_json()
    return out


def decode_design(data: dict, name: str = "file") -> WeightedDesign:
    try:
        elements = np.stack([decode_matrix(g) for g in data["elements"]])
        weights = np.asarray(data["weights"], dtype=float)
        t = int(data["t"])
        group = str(data.get("group", "U"))
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedInput(f"design JSON is malformed: {exc}") from exc
    measure = AbelianMeasure.from_json(data["measure"]) if "measure" in data else None
    return WeightedDesign(elements, weights, t, group, measure=measure, name=name)


def read_json(path: str | Path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise MalformedInput(f"cannot read JSON from {path}: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=False) + "\n"
