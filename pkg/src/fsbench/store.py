"""Embedding dataset container and its binary wire format.

File layout (all integers little-endian), extension ``.fseb``:

    bytes 0-3    magic "FSEB"
    bytes 4-7    u32 format version (currently 1)
    bytes 8-11   u32 J, byte length of the metadata block
    next J       UTF-8 JSON object with exactly the keys
                 {dataset, backbone, dim, count, class_names,
                  image_size, preprocess}
    next 4*count u32 label ids, one per record
    next 4*count*dim
                 f32 row-major vectors

Vectors are stored in 32 bits; evaluation code promotes to 64 bits after
load. A CSV export exists for debugging only and is never read back.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from .errors import (
    CorruptionError,
    EmptyResultError,
    FormatError,
    MappingError,
    ValidationError,
)
from .mapping import LabelMapping, normalize_class_name

MAGIC = b"FSEB"
FORMAT_VERSION = 1
FILE_EXTENSION = ".fseb"

_METADATA_KEYS = ("dataset", "backbone", "dim", "count", "class_names", "image_size", "preprocess")

PathOrIO = Union[str, Path, BinaryIO]


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


@dataclass(frozen=True, eq=False)
class EmbeddingDataset:
    """Labeled matrix of per-image feature vectors plus provenance.

    ``class_names`` fixes the label order: label id i means
    ``class_names[i]``. Vectors are float32, one row per record, in the
    extraction order of the source (never sorted).
    """

    dataset_name: str
    backbone_name: str
    dim: int
    class_names: tuple
    labels: np.ndarray
    vectors: np.ndarray
    image_size: int = 128
    preprocess: str = ""

    def __post_init__(self) -> None:
        names = tuple(self.class_names)
        if not names or any(not isinstance(n, str) or not n for n in names):
            raise ValidationError("class_names must be non-empty strings")
        if len(set(names)) != len(names):
            raise ValidationError("class_names must be unique")
        if not _is_int(self.dim) or self.dim < 1:
            raise ValidationError(f"dim must be a positive integer, got {self.dim!r}")
        if not _is_int(self.image_size) or self.image_size < 1:
            raise ValidationError(f"image_size must be a positive integer, got {self.image_size!r}")
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        vectors = np.ascontiguousarray(self.vectors, dtype=np.float32)
        if labels.ndim != 1:
            raise ValidationError("labels must be a 1-d sequence")
        if vectors.ndim != 2:
            raise ValidationError("vectors must be a 2-d matrix")
        count = vectors.shape[0]
        if count < 1:
            raise ValidationError("dataset must contain at least one record")
        if vectors.shape[1] != self.dim:
            raise ValidationError(
                f"vectors have dim {vectors.shape[1]}, declared dim is {self.dim}"
            )
        if labels.shape[0] != count:
            raise ValidationError(
                f"{labels.shape[0]} labels for {count} vector rows"
            )
        if labels.size and (labels.min() < 0 or labels.max() >= len(names)):
            bad = int(labels[(labels < 0) | (labels >= len(names))][0])
            raise ValidationError(f"label id {bad} outside [0, {len(names)})")
        if not np.all(np.isfinite(vectors)):
            raise ValidationError("vectors contain NaN or infinity")
        object.__setattr__(self, "class_names", names)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "vectors", vectors)

    @property
    def count(self) -> int:
        return self.vectors.shape[0]

    def class_counts(self) -> tuple:
        """Per-class record counts, ordered by label id."""
        counts = np.bincount(self.labels, minlength=len(self.class_names))
        return tuple(int(c) for c in counts)

    def __eq__(self, other) -> bool:
        if not isinstance(other, EmbeddingDataset):
            return NotImplemented
        return (
            self.dataset_name == other.dataset_name
            and self.backbone_name == other.backbone_name
            and self.dim == other.dim
            and self.class_names == other.class_names
            and self.image_size == other.image_size
            and self.preprocess == other.preprocess
            and np.array_equal(self.labels, other.labels)
            # vector equality is bitwise, so -0.0 vs 0.0 or payload bit
            # flips never pass as equal
            and self.vectors.tobytes() == other.vectors.tobytes()
        )


@dataclass(frozen=True)
class DatasetManifest:
    """Summary view of a dataset: identity, extraction settings, counts."""

    dataset_name: str
    backbone_name: str
    class_counts: tuple
    image_size: int
    preprocess: str

    @property
    def total(self) -> int:
        return sum(count for _, count in self.class_counts)


def manifest(ds: EmbeddingDataset) -> DatasetManifest:
    counts = tuple(zip(ds.class_names, ds.class_counts()))
    m = DatasetManifest(
        dataset_name=ds.dataset_name,
        backbone_name=ds.backbone_name,
        class_counts=counts,
        image_size=ds.image_size,
        preprocess=ds.preprocess,
    )
    if m.total != ds.count:
        raise ValidationError("manifest counts do not sum to the record count")
    return m


def _serialize(ds: EmbeddingDataset) -> bytes:
    meta = {
        "dataset": ds.dataset_name,
        "backbone": ds.backbone_name,
        "dim": ds.dim,
        "count": ds.count,
        "class_names": list(ds.class_names),
        "image_size": ds.image_size,
        "preprocess": ds.preprocess,
    }
    meta_bytes = json.dumps(meta, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
    parts = [
        MAGIC,
        struct.pack("<I", FORMAT_VERSION),
        struct.pack("<I", len(meta_bytes)),
        meta_bytes,
        ds.labels.astype("<u4").tobytes(),
        ds.vectors.astype("<f4", copy=False).tobytes(),
    ]
    return b"".join(parts)


def write_dataset(ds: EmbeddingDataset, destination: PathOrIO) -> int:
    """Write a dataset in the binary wire format; returns bytes written.

    Path destinations are written atomically (temp file + rename) so a
    failed write never leaves a partial file behind.
    """
    if not isinstance(ds, EmbeddingDataset):
        raise ValidationError("write_dataset expects an EmbeddingDataset")
    payload = _serialize(ds)
    if isinstance(destination, (str, Path)):
        path = Path(destination)
        fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(payload)
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise
    else:
        destination.write(payload)
    return len(payload)


def read_dataset(source: PathOrIO) -> EmbeddingDataset:
    """Read and validate a dataset from the binary wire format.

    Every malformed input raises a typed error: FormatError for an
    unrecognizable header, CorruptionError for truncated or inconsistent
    bytes, ValidationError when decoded content breaks an invariant.
    """
    if isinstance(source, (str, Path)):
        with open(source, "rb") as fh:
            data = fh.read()
    else:
        data = source.read()
    size = len(data)

    def need(offset: int, nbytes: int, what: str) -> None:
        if size < offset + nbytes:
            raise CorruptionError(
                f"truncated file: need {offset + nbytes} bytes for {what}, have {size}"
            )

    need(0, 4, "magic")
    if data[:4] != MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    need(4, 4, "version")
    version = struct.unpack_from("<I", data, 4)[0]
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")
    need(8, 4, "metadata length")
    meta_len = struct.unpack_from("<I", data, 8)[0]
    need(12, meta_len, "metadata block")
    try:
        meta = json.loads(data[12 : 12 + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptionError(f"metadata block is not valid UTF-8 JSON: {exc}") from exc
    if not isinstance(meta, dict):
        raise CorruptionError("metadata block is not a JSON object")
    if set(meta) != set(_METADATA_KEYS):
        raise FormatError(
            f"metadata keys {sorted(meta)} do not match {sorted(_METADATA_KEYS)}"
        )
    if not isinstance(meta["dataset"], str) or not isinstance(meta["backbone"], str):
        raise FormatError("metadata 'dataset' and 'backbone' must be strings")
    if not isinstance(meta["preprocess"], str):
        raise FormatError("metadata 'preprocess' must be a string")
    for key in ("dim", "count", "image_size"):
        if not _is_int(meta[key]) or meta[key] < 1:
            raise FormatError(f"metadata {key!r} must be a positive integer")
    names = meta["class_names"]
    if not isinstance(names, list) or not names or not all(isinstance(n, str) for n in names):
        raise FormatError("metadata 'class_names' must be a non-empty list of strings")
    count = meta["count"]
    dim = meta["dim"]

    offset = 12 + meta_len
    need(offset, 4 * count, "label block")
    labels = np.frombuffer(data, dtype="<u4", count=count, offset=offset).astype(np.int64)
    offset += 4 * count
    need(offset, 4 * count * dim, "vector block")
    vectors = (
        np.frombuffer(data, dtype="<f4", count=count * dim, offset=offset)
        .reshape(count, dim)
        .astype(np.float32)
    )
    offset += 4 * count * dim
    if size != offset:
        raise CorruptionError(f"trailing data: {size - offset} bytes past the vector block")

    if not np.all(np.isfinite(vectors)):
        raise ValidationError("vectors contain NaN or infinity")
    if labels.size and labels.max() >= len(names):
        raise ValidationError(
            f"label id {int(labels.max())} outside [0, {len(names)})"
        )
    return EmbeddingDataset(
        dataset_name=meta["dataset"],
        backbone_name=meta["backbone"],
        dim=dim,
        class_names=tuple(names),
        labels=labels,
        vectors=vectors,
        image_size=meta["image_size"],
        preprocess=meta["preprocess"],
    )


def remap_labels(ds: EmbeddingDataset, mapping: LabelMapping) -> EmbeddingDataset:
    """Apply a label mapping, dropping unmapped records.

    Retained vectors are copied bitwise and keep their relative order.
    New label ids index into the mapping's evaluation class list, which
    becomes the result's class_names (classes left empty by the mapping
    are retained with zero records).
    """
    table = mapping.table_for(ds.dataset_name)
    known = {normalize_class_name(name) for name in ds.class_names}
    for source in table:
        if source not in known:
            raise MappingError(
                f"mapping references unknown source class {source!r} "
                f"for dataset {ds.dataset_name!r}"
            )
    new_id_by_old = {}
    for old_id, name in enumerate(ds.class_names):
        key = normalize_class_name(name)
        if key not in table:
            raise MappingError(
                f"source class {name!r} of dataset {ds.dataset_name!r} "
                "is neither mapped nor dropped"
            )
        target = table[key]
        if target is not None:
            new_id_by_old[old_id] = mapping.target_id(target)
    keep = np.isin(ds.labels, list(new_id_by_old))
    if not keep.any():
        raise EmptyResultError(
            f"mapping drops every record of dataset {ds.dataset_name!r}"
        )
    old_labels = ds.labels[keep]
    lut = np.zeros(len(ds.class_names), dtype=np.int64)
    for old_id, new_id in new_id_by_old.items():
        lut[old_id] = new_id
    return EmbeddingDataset(
        dataset_name=ds.dataset_name,
        backbone_name=ds.backbone_name,
        dim=ds.dim,
        class_names=tuple(mapping.evaluation_classes),
        labels=lut[old_labels],
        vectors=ds.vectors[keep].copy(),
        image_size=ds.image_size,
        preprocess=ds.preprocess,
    )


def export_csv(ds: EmbeddingDataset, destination) -> None:
    """Debug-only CSV dump; never read back by this package."""
    header = "id,label,class_name," + ",".join(f"v{i}" for i in range(ds.dim))
    lines = [header]
    for i in range(ds.count):
        label = int(ds.labels[i])
        values = ",".join(repr(float(v)) for v in ds.vectors[i])
        lines.append(f"{i},{label},{ds.class_names[label]},{values}")
    text = "\n".join(lines) + "\n"
    if isinstance(destination, (str, Path)):
        Path(destination).write_text(text, encoding="utf-8")
    else:
        destination.write(text)
