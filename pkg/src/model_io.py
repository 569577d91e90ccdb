"""
Model, report and trajectory files.

Model files are versioned JSON. The dynamic tensor is stored flat in
first-index-fastest order; matrices are stored row-major. Python's float
repr round-trips exactly, so write -> read reproduces every entry bit for
bit. Trajectories are CSV with 17 significant digits.
"""

import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .errors import HpdsError, InputError
from .hpds import InputOutputHPDS
from .tensor_core import from_flat, to_flat

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
LAYOUT = "first-index-fastest"


@dataclass(frozen=True, eq=False)
class ModelFile:
    model: InputOutputHPDS
    projection: Optional[np.ndarray] = None
    reduction: dict = field(default_factory=dict)


def _matrix_to_json(M):
    return {"rows": int(M.shape[0]), "cols": int(M.shape[1]),
            "data_row_major": [float(v) for v in np.ravel(M, order="C")]}


def _matrix_from_json(block, name):
    try:
        rows, cols = int(block["rows"]), int(block["cols"])
        data = np.asarray(block["data_row_major"], dtype=float)
    except (KeyError, TypeError, ValueError) as err:
        raise InputError(f"{name} block is malformed: {err}") from err
    if data.ndim != 1 or rows < 0 or cols < 0 or data.size != rows * cols:
        raise InputError(f"{name} declares {rows}x{cols} but holds {data.size} numbers")
    if not np.all(np.isfinite(data)):
        raise InputError(f"{name} entries must be finite")
    return data.reshape((rows, cols), order="C")


def _object_block(doc, key):
    block = doc.get(key)
    if block is None:
        return {}
    if not isinstance(block, dict):
        raise InputError(f"{key} must be a JSON object, got {type(block).__name__}")
    return block


def model_to_document(model, projection=None, reduction=None):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "order": model.k,
        "dim": model.n,
        "dynamic_tensor": {
            "dims": list(model.A.shape),
            "layout": LAYOUT,
            "data": [float(v) for v in to_flat(model.A)],
        },
    }
    if model.B is not None:
        doc["input_matrix"] = _matrix_to_json(model.B)
    if model.C is not None:
        doc["output_matrix"] = _matrix_to_json(model.C)
    if projection is not None:
        doc["projection"] = _matrix_to_json(projection)
    if reduction:
        doc["reduction"] = reduction
    doc["metadata"] = model.metadata
    return doc


def document_to_model(doc):
    if not isinstance(doc, dict):
        raise InputError("model file must hold a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {version!r}, expected {SCHEMA_VERSION}")
    tensor = doc.get("dynamic_tensor")
    if not isinstance(tensor, dict):
        raise InputError("model file has no dynamic_tensor block")
    if tensor.get("layout") != LAYOUT:
        raise InputError(f"dynamic_tensor layout must be {LAYOUT!r}, got {tensor.get('layout')!r}")
    A = from_flat(tensor.get("dims", []), tensor.get("data", []))
    if A.ndim < 2:
        raise InputError(f"dynamic tensor must have order >= 2, got dims {list(A.shape)}")
    if doc.get("order") != A.ndim or doc.get("dim") != A.shape[0]:
        raise InputError(
            f"declared order/dim ({doc.get('order')}, {doc.get('dim')}) do not match "
            f"tensor dims {list(A.shape)}"
        )

    B = _matrix_from_json(doc["input_matrix"], "input_matrix") if "input_matrix" in doc else None
    C = _matrix_from_json(doc["output_matrix"], "output_matrix") if "output_matrix" in doc else None
    model = InputOutputHPDS(A=A, B=B, C=C, metadata=_object_block(doc, "metadata"))

    projection = None
    if "projection" in doc:
        projection = _matrix_from_json(doc["projection"], "projection")
        if projection.shape[1] != model.n or projection.shape[0] < model.n:
            raise InputError(
                f"projection is {projection.shape[0]}x{projection.shape[1]}, expected N x {model.n} "
                f"with N >= {model.n}"
            )
    return ModelFile(model=model, projection=projection, reduction=_object_block(doc, "reduction"))


def read_model(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as err:
        logger.error("cannot read model file %s: %s", path, err)
        raise InputError(f"cannot read model file {path}: {err.strerror}") from err
    except json.JSONDecodeError as err:
        logger.error("model file %s is not valid JSON: %s", path, err)
        raise InputError(f"model file {path} is not valid JSON: {err}") from err
    try:
        return document_to_model(doc)
    except HpdsError as err:
        logger.error("model file %s rejected: %s", path, err)
        raise


def _dump(doc, path):
    text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as err:
        logger.error("cannot write %s: %s", path, err)
        raise InputError(f"cannot write {path}: {err.strerror}") from err


def write_model(path, model, projection=None, reduction=None):
    _dump(model_to_document(model, projection, reduction), path)
    logger.info("wrote model n=%d k=%d to %s", model.n, model.k, path or "stdout")


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return None
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def build_report(command, args, result, wall_clock):
    return {
        "command": command,
        "arguments": _jsonable(args),
        "result": _jsonable(result),
        "tool_version": __version__,
        "wall_clock_seconds": round(float(wall_clock), 6),
    }


def write_report(path, report):
    _dump(report, path)


def _fmt(value):
    return format(float(value), ".17g")


def write_trajectory_csv(path, trajectory):
    """Columns t, x_1..x_n and y_1..y_l when the model has outputs."""
    n = trajectory.states.shape[1]
    header = ["t"] + [f"x_{i + 1}" for i in range(n)]
    blocks = [trajectory.times[:, None], trajectory.states]
    if trajectory.outputs is not None:
        header += [f"y_{i + 1}" for i in range(trajectory.outputs.shape[1])]
        blocks.append(trajectory.outputs)
    write_columns_csv(path, header, np.hstack(blocks))


def write_columns_csv(path, header, table):
    def rows():
        for row in table:
            yield [_fmt(v) for v in row]

    if path is None or path == "-":
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows())
        return
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows())
    except OSError as err:
        logger.error("cannot write %s: %s", path, err)
        raise InputError(f"cannot write {path}: {err.strerror}") from err


def read_trajectory_csv(path):
    """(header, times, values) from a trajectory CSV."""
    try:
        with open(path, "r", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            data = np.array([[float(v) for v in row] for row in reader])
    except (OSError, StopIteration, ValueError) as err:
        raise InputError(f"cannot read trajectory {path}: {err}") from err
    return header, data[:, 0], data[:, 1:]
