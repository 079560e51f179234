"""Folder-to-embeddings extraction.

Layout contract: one subdirectory per class under the root; the
subdirectory name is the class name. Classes and files are visited in
sorted order so two runs over the same tree produce rows in the same
order. Inference is batched; the output file is written once at the end.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import torch

from fsbench import EmbeddingDataset, write_dataset

from .errors import ImageReadError, ImageRootError
from .models import Trunk, build_trunk, forward_feature_maps, pool_feature_maps
from .preprocess import image_to_tensor, load_image
from .recipes import DEFAULT_IMAGE_SIZE, get_recipe

log = logging.getLogger("fsextract")

IMAGE_EXTENSIONS = frozenset({".jpg", ".jpeg", ".png", ".bmp", ".webp"})


def scan_image_root(root):
    """Walk a class-per-subdirectory tree.

    Returns (class_names, records) where records is a sorted list of
    (path, label) pairs. Non-image files are ignored; whether an image
    file actually decodes is the extraction loop's business.
    """
    root = Path(root)
    if not root.is_dir():
        raise ImageRootError(f"image root {root} is not a directory")
    class_dirs = sorted(d for d in root.iterdir() if d.is_dir())
    if not class_dirs:
        raise ImageRootError(f"image root {root} has no class subdirectories")
    class_names = tuple(d.name for d in class_dirs)
    records = []
    for label, d in enumerate(class_dirs):
        files = sorted(
            f for f in d.iterdir()
            if f.is_file() and f.suffix.lower() in IMAGE_EXTENSIONS
        )
        records.extend((f, label) for f in files)
    if not records:
        raise ImageRootError(f"image root {root} contains no image files")
    return class_names, records


def extract_dataset(
    root,
    backbone: str,
    *,
    image_size: int = DEFAULT_IMAGE_SIZE,
    weights: str = "imagenet",
    batch_size: int = 32,
    device: str = "cpu",
    fail_fast: bool = False,
    dataset_name: str = "",
    trunk: Trunk = None,
) -> EmbeddingDataset:
    """Embed every readable image under root; rows follow scan order.

    Unreadable files are skipped with a log line unless fail_fast is
    set, in which case the first one raises. Pass a prebuilt trunk to
    reuse weights across several roots.
    """
    if batch_size < 1:
        raise ImageRootError(f"batch_size must be >= 1, got {batch_size}")
    class_names, records = scan_image_root(root)
    if trunk is None:
        trunk = build_trunk(get_recipe(backbone, image_size=image_size, weights=weights), device)
    recipe = trunk.recipe

    rows = []
    labels = []
    pending = []  # (tensor, label) pairs waiting for a full batch
    skipped = 0

    def flush():
        if not pending:
            return
        batch = torch.stack([t for t, _ in pending]).to(device)
        rows.append(pool_feature_maps(forward_feature_maps(trunk, batch)))
        labels.extend(lbl for _, lbl in pending)
        pending.clear()

    for path, label in records:
        try:
            tensor = image_to_tensor(load_image(path), recipe)
        except ImageReadError as exc:
            if fail_fast:
                raise
            skipped += 1
            log.warning("skipping %s: %s", path, exc)
            continue
        pending.append((tensor, label))
        if len(pending) >= batch_size:
            flush()
    flush()

    if not rows:
        raise ImageRootError(f"no readable images under {root} ({skipped} skipped)")
    if skipped:
        log.warning("%d unreadable files skipped", skipped)

    vectors = np.concatenate(rows, axis=0)
    return EmbeddingDataset(
        dataset_name=dataset_name or Path(root).resolve().name,
        backbone_name=recipe.backbone,
        dim=vectors.shape[1],
        class_names=class_names,
        labels=np.asarray(labels, dtype=np.int64),
        vectors=vectors,
        image_size=recipe.image_size,
        preprocess=recipe.describe(),
    )


def extract_to_file(root, backbone: str, out, **kwargs) -> EmbeddingDataset:
    """extract_dataset plus a single atomic write of the result."""
    ds = extract_dataset(root, backbone, **kwargs)
    write_dataset(ds, out)
    return ds
