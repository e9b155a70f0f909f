"""Model persistence: a line-oriented text format so weight diffs are
reviewable, plus ensemble directories and the embedding CSV export.

Floats are written with ``repr`` and therefore reload bit-identically.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from ..core import HtType, Variant
from .ensemble import TrojanEnsemble
from .gcn import GcnModel, GcnParams, TrainingMeta

_MAGIC = "GCNMODEL v1"
_MATRIX_ORDER = ("W1", "b1", "W2", "b2", "Wout", "bout")


class ModelFormatError(ValueError):
    pass


def save_model(model: GcnModel, path) -> None:
    lines: List[str] = [_MAGIC, f"ht {model.trained_for.name}"]
    meta = model.training_meta
    lines.append(f"meta epochs {meta.epochs}")
    lines.append(f"meta final_train_loss {meta.final_train_loss!r}")
    lines.append(f"meta final_val_loss {meta.final_val_loss!r}")
    lines.append("meta lr_history " + " ".join(repr(v) for v in meta.lr_history))
    for name in _MATRIX_ORDER:
        arr = np.atleast_2d(model.params.arrays()[name])
        lines.append(f"{name} {arr.shape[0]} {arr.shape[1]}")
        for row in arr:
            lines.append(" ".join(repr(float(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path) -> GcnModel:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != _MAGIC:
        raise ModelFormatError(f"{path}: not a {_MAGIC} file")
    if len(lines) < 2 or not lines[1].startswith("ht "):
        raise ModelFormatError(f"{path}: missing ht line")
    try:
        ht = HtType[lines[1].split()[1]]
    except KeyError as exc:
        raise ModelFormatError(f"{path}: unknown HT type {lines[1]!r}") from exc

    meta = TrainingMeta()
    pos = 2
    while pos < len(lines) and lines[pos].startswith("meta "):
        _, key, *values = lines[pos].split()
        if key == "epochs":
            meta.epochs = int(values[0])
        elif key == "final_train_loss":
            meta.final_train_loss = float(values[0])
        elif key == "final_val_loss":
            meta.final_val_loss = float(values[0])
        elif key == "lr_history":
            meta.lr_history = [float(v) for v in values]
        else:
            raise ModelFormatError(f"{path}: unknown meta key {key!r}")
        pos += 1

    arrays: Dict[str, np.ndarray] = {}
    for name in _MATRIX_ORDER:
        if pos >= len(lines):
            raise ModelFormatError(f"{path}: missing section {name}")
        head = lines[pos].split()
        if len(head) != 3 or head[0] != name:
            raise ModelFormatError(f"{path}: expected '{name} rows cols' at "
                                   f"line {pos + 1}, got {lines[pos]!r}")
        rows, cols = int(head[1]), int(head[2])
        pos += 1
        data = np.zeros((rows, cols))
        for r in range(rows):
            values = lines[pos].split()
            if len(values) != cols:
                raise ModelFormatError(
                    f"{path}: line {pos + 1} has {len(values)} values, "
                    f"expected {cols}")
            data[r] = [float(v) for v in values]
            pos += 1
        arrays[name] = data

    params = GcnParams(W1=arrays["W1"], b1=arrays["b1"][0],
                       W2=arrays["W2"], b2=arrays["b2"][0],
                       Wout=arrays["Wout"], bout=arrays["bout"][0])
    return GcnModel(params=params, trained_for=ht, training_meta=meta)


def save_ensemble(directory, ensemble: TrojanEnsemble) -> None:
    root = Path(directory)
    root.mkdir(parents=True, exist_ok=True)
    for ht, model in ensemble.models.items():
        save_model(model, root / f"{ht.name}.model")
    (root / "threshold").write_text(repr(ensemble.threshold) + "\n",
                                    encoding="utf-8")


def load_ensemble(directory) -> TrojanEnsemble:
    root = Path(directory)
    models = {}
    for ht in HtType:
        path = root / f"{ht.name}.model"
        if not path.exists():
            raise ModelFormatError(f"missing model file {path}")
        models[ht] = load_model(path)
    threshold = 0.5
    threshold_file = root / "threshold"
    if threshold_file.exists():
        threshold = float(threshold_file.read_text().strip())
    return TrojanEnsemble(models=models, threshold=threshold)


def write_embeddings(path, rows: Iterable[Tuple[str, Variant, HtType,
                                                Sequence[float]]]) -> int:
    """CSV export ``design_id,variant,ht_model,dim0..``; returns row count."""
    materialized = list(rows)
    if not materialized:
        Path(path).write_text("design_id,variant,ht_model\n", encoding="utf-8")
        return 0
    dim = len(materialized[0][3])
    header = "design_id,variant,ht_model," + ",".join(
        f"dim{i}" for i in range(dim))
    out = [header]
    for design_id, variant, ht, vector in materialized:
        if len(vector) != dim:
            raise ValueError(f"embedding for {design_id} has {len(vector)} "
                             f"dims, expected {dim}")
        out.append(f"{design_id},{variant.value},{ht.name},"
                   + ",".join(repr(float(v)) for v in vector))
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")
    return len(materialized)
