"""Model JSON files and dataset CSV files."""
from __future__ import annotations

import csv
import io
import json
import os
from pathlib import Path
from typing import TextIO, Union

import numpy as np

from .catalog import EXAMPLES, example_model
from .errors import CountError, IoError, UnknownExample, ValidationError
from .markov import MarkovDataset
from .model import Dataset, DistributionModel, validate_model

__all__ = [
    "model_to_spec",
    "dump_model",
    "load_model",
    "dataset_to_csv",
    "write_dataset",
    "read_dataset",
]

Sample = Union[Dataset, MarkovDataset]


def model_to_spec(model: DistributionModel) -> dict:
    """JSON-ready description that validates back to an equal model."""
    spec = {
        "p": model.p,
        "marginal": {
            "atoms": [{"point": list(pt), "mass": m} for pt, m in model.marginal.atoms],
            "pieces": [{"lower": lo, "upper": hi, "mass": m} for lo, hi, m in model.marginal.pieces],
        },
        "conditional": {
            "atom_laws": {str(i): law.to_dict() for i, law in enumerate(model.conditional.atom_laws)},
            "continuous_components": [
                {
                    "weight": c.weight,
                    "lower": {"alpha": c.lower.alpha, "beta": c.lower.beta},
                    "upper": {"alpha": c.upper.alpha, "beta": c.upper.beta},
                    "piece": j,
                }
                for j, comps in enumerate(model.conditional.piece_components)
                for c in comps
            ],
        },
    }
    if model.truncation_tail_mass > 0:
        spec["truncation_tail_mass"] = model.truncation_tail_mass
    if model.notes:
        spec["notes"] = list(model.notes)
    return spec


def dump_model(model: DistributionModel, path) -> None:
    try:
        Path(path).write_text(json.dumps(model_to_spec(model), indent=2) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def load_model(source: str) -> DistributionModel:
    """A catalog id or the path of a model JSON file."""
    if source in EXAMPLES:
        return example_model(source)
    if not os.path.exists(source):
        raise UnknownExample(f"{source!r} is neither a catalog id ({', '.join(EXAMPLES)}) nor a file")
    try:
        text = Path(source).read_text()
    except OSError as exc:
        raise IoError(f"cannot read {source}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{source} is not valid JSON: {exc}") from exc
    return validate_model(raw)


def dataset_to_csv(data: Sample) -> str:
    buf = io.StringIO()
    _write_csv(data, buf)
    return buf.getvalue()


def _write_csv(data: Sample, fh: TextIO) -> None:
    p = data.x.shape[1]
    header = [f"x{j + 1}" for j in range(p)] + ["y"]
    cols = [data.x[:, j] for j in range(p)] + [data.y]
    markov = isinstance(data, MarkovDataset)
    if markov:
        header.append("yprime")
        cols.append(data.yprime)
    fh.write(",".join(header) + "\n")
    if markov and data.transformed:
        fh.write("# transformed=true\n")
    rows = np.column_stack(cols).tolist()
    fh.writelines(",".join(repr(v) for v in row) + "\n" for row in rows)


def write_dataset(data: Sample, path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            _write_csv(data, fh)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_dataset(path, transformed: bool | None = None) -> Sample:
    """Read a CSV written by :func:`write_dataset` (or any file with the same
    header). A ``yprime`` column yields a :class:`MarkovDataset`."""
    try:
        with open(path, newline="") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise CountError(f"{path} is empty")
    header = [h.strip() for h in lines[0].split(",")]
    flagged = False
    body = []
    for line in lines[1:]:
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            flagged = flagged or s.replace(" ", "").lower() == "#transformed=true"
            continue
        body.append(s)
    xcols = [i for i, h in enumerate(header) if h.startswith("x")]
    if "y" not in header or not xcols:
        raise ValidationError(f"{path}: header must be x1,...,xp,y[,yprime]")
    try:
        values = np.array([[float(v) for v in row] for row in csv.reader(body)], dtype=float)
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric entry ({exc})") from exc
    if values.size == 0:
        raise CountError(f"{path} has no rows")
    if values.ndim != 2 or values.shape[1] != len(header):
        raise ValidationError(f"{path}: every row needs {len(header)} fields")
    x = values[:, xcols]
    y = values[:, header.index("y")]
    if "yprime" in header:
        t = flagged if transformed is None else transformed
        return MarkovDataset(x, y, values[:, header.index("yprime")], bool(t))
    return Dataset(x, y)
