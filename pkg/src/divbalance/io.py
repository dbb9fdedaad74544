"""File formats: dataset/embedding CSVs, params and selection JSON, report JSONL.

Floats are written with ``repr`` so they read back bit-identical.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path
from typing import Iterable, List

import numpy as np

from divbalance.datagen import LabeledDataset
from divbalance.embedder import EmbedderParams
from divbalance.errors import ConfigError, ShapeError
from divbalance.selection import SelectionResult


def _fmt(x) -> str:
    return repr(float(x))


def _parse_id(raw: str):
    try:
        return int(raw)
    except ValueError:
        return raw


def write_dataset(dataset: LabeledDataset, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "label"] + [f"f{j}" for j in range(dataset.dim)])
        for rid, lab, row in zip(dataset.ids, dataset.labels, dataset.features):
            w.writerow([rid, "" if lab is None else lab] + [_fmt(v) for v in row])


def read_dataset(path) -> LabeledDataset:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[:2] != ["id", "label"] or len(header) < 3:
            raise ConfigError(str(path), "expected header 'id,label,f0,...'")
        dim = len(header) - 2
        ids, labels, rows = [], [], []
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != dim + 2:
                raise ShapeError(f"{path}:{lineno}: expected {dim + 2} fields, got {len(rec)}")
            ids.append(_parse_id(rec[0]))
            labels.append(int(rec[1]) if rec[1] != "" else None)
            rows.append([float(v) for v in rec[2:]])
    features = np.array(rows, dtype=np.float64).reshape(len(rows), dim)
    return LabeledDataset(features, labels, ids)


def metadata_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_metadata(csv_path, generator: str, config) -> Path:
    cfg = dataclasses.asdict(config)
    out = metadata_path(csv_path)
    out.write_text(json.dumps({"generator": generator, "seed": cfg.get("seed"), "config": cfg}, indent=2) + "\n")
    return out


def write_embeddings(ids, embeddings, path) -> None:
    embeddings = np.asarray(embeddings)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id"] + [f"e{j}" for j in range(embeddings.shape[1])])
        for rid, row in zip(ids, embeddings):
            w.writerow([rid] + [_fmt(v) for v in row])


def read_embeddings(path):
    """Returns ``(ids, matrix)``."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "id" or len(header) < 2:
            raise ConfigError(str(path), "expected header 'id,e0,...'")
        ids, rows = [], []
        for rec in reader:
            if len(rec) != len(header):
                raise ShapeError(f"{path}: row has {len(rec)} fields, header has {len(header)}")
            ids.append(_parse_id(rec[0]))
            rows.append([float(v) for v in rec[1:]])
    return ids, np.array(rows, dtype=np.float64).reshape(len(rows), len(header) - 1)


def params_to_dict(params: EmbedderParams) -> dict:
    return {
        "layer_dims": list(params.layer_dims),
        "activation": params.activation,
        "bottleneck_index": params.bottleneck_index,
        "weights": [w.tolist() for w in params.weights],
        "biases": [b.tolist() for b in params.biases],
    }


def params_from_dict(d: dict) -> EmbedderParams:
    dims = d["layer_dims"]
    weights = [np.array(w, dtype=np.float64).reshape(dims[l + 1], dims[l]) for l, w in enumerate(d["weights"])]
    return EmbedderParams(dims, weights, d["biases"], d["activation"], d["bottleneck_index"])


def write_params(params: EmbedderParams, path) -> None:
    Path(path).write_text(json.dumps(params_to_dict(params)) + "\n")


def read_params(path) -> EmbedderParams:
    return params_from_dict(json.loads(Path(path).read_text()))


def _encode_float(v: float):
    if math.isinf(v) and v > 0:
        return "inf"
    return v


def selection_to_dict(result: SelectionResult) -> dict:
    return {
        "seed": result.seed,
        "indices": list(result.indices),
        "minmax_trace": [_encode_float(v) for v in result.minmax_trace],
    }


def selection_from_dict(d: dict) -> SelectionResult:
    trace = [float("inf") if v == "inf" else float(v) for v in d["minmax_trace"]]
    return SelectionResult(d["indices"], trace, d["seed"])


def write_selection(result: SelectionResult, path) -> None:
    Path(path).write_text(json.dumps(selection_to_dict(result)) + "\n")


def read_selection(path) -> SelectionResult:
    return selection_from_dict(json.loads(Path(path).read_text()))


def write_jsonl(records: Iterable[dict], path) -> None:
    with Path(path).open("w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_jsonl(path) -> List[dict]:
    with Path(path).open() as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_csv(header, rows, path, append: bool = False) -> None:
    path = Path(path)
    fresh = not (append and path.exists() and path.stat().st_size > 0)
    with path.open("w" if fresh else "a", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if fresh:
            w.writerow(header)
        w.writerows(rows)
