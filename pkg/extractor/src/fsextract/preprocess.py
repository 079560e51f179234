"""Image loading and tensor preparation.

Decode, force RGB, bilinear-resize to a square, scale to [0, 1], and
normalize with the shared channel statistics. No augmentation of any
kind happens here.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .errors import ImageReadError, RecipeError
from .recipes import ExtractionRecipe

_RESAMPLING = {
    "bilinear": Image.Resampling.BILINEAR,
    "bicubic": Image.Resampling.BICUBIC,
    "nearest": Image.Resampling.NEAREST,
}


def load_image(path) -> Image.Image:
    """Decode an image file fully; RGB output, file handle closed."""
    try:
        with Image.open(path) as im:
            return im.convert("RGB")
    except ImageReadError:
        raise
    except Exception as exc:  # PIL raises a zoo of types for bad bytes
        raise ImageReadError(f"cannot read image {Path(path)}: {exc}") from exc


def image_to_tensor(image: Image.Image, recipe: ExtractionRecipe) -> torch.Tensor:
    """PIL image -> normalized float32 (3, S, S) tensor."""
    try:
        resampling = _RESAMPLING[recipe.interpolation]
    except KeyError:
        raise RecipeError(
            f"unsupported interpolation {recipe.interpolation!r}"
            f" (known: {', '.join(sorted(_RESAMPLING))})"
        ) from None
    side = recipe.image_size
    resized = image.resize((side, side), resampling)
    arr = np.asarray(resized, dtype=np.float32) / 255.0
    arr = arr.transpose(2, 0, 1)
    mean = np.asarray(recipe.mean, dtype=np.float32).reshape(3, 1, 1)
    std = np.asarray(recipe.std, dtype=np.float32).reshape(3, 1, 1)
    return torch.from_numpy((arr - mean) / std)


def load_image_tensor(path, recipe: ExtractionRecipe) -> torch.Tensor:
    return image_to_tensor(load_image(path), recipe)
