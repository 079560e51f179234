"""Extraction recipes: what each supported backbone is and how images
are prepared for it.

A recipe is the full, serializable description of one extraction run:
backbone, input side, resize interpolation, channel normalization, tap
point, pooling, and weight source. The description string is stored in
the output file's metadata so a file always says how it was made.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .errors import RecipeError

# Channel statistics shared by all six model zoo entries.
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

DEFAULT_IMAGE_SIZE = 128

# Embedding width and tap point per backbone. The tap is the layer whose
# output feeds global average pooling.
_BACKBONES = {
    "vgg16": (512, "features"),
    "inceptionv3": (2048, "Mixed_7c"),
    "resnet50": (2048, "layer4"),
    "densenet121": (1024, "features+relu"),
    "mobilenetv2_100": (1280, "features"),
    "efficientnet_b1": (1280, "features"),
}

# Nominal fused multiply-add counts (millions) at each publisher's native
# input size. Carried as static metadata: counting conventions differ
# between tools, so these are reported, never recomputed.
STATIC_FLOPS_M = {
    "mobilenetv2_100": 186.42,
    "vgg16": 10060.0,
    "efficientnet_b1": 365.04,
    "densenet121": 1872.64,
    "resnet50": 2700.0,
    "inceptionv3": 1468.72,
}

BACKBONE_NAMES = tuple(sorted(_BACKBONES))


@dataclass(frozen=True)
class ExtractionRecipe:
    """One frozen extraction configuration.

    ``weights`` is either "imagenet" (pretrained zoo weights) or
    "random:SEED" (seeded fresh initialization, for offline or
    plumbing-level work where downloads are unavailable or unwanted).
    """

    backbone: str
    dim: int
    tap: str
    flops_m: float
    image_size: int = DEFAULT_IMAGE_SIZE
    interpolation: str = "bilinear"
    mean: tuple = IMAGENET_MEAN
    std: tuple = IMAGENET_STD
    weights: str = "imagenet"

    def __post_init__(self) -> None:
        if self.image_size < 32:
            raise RecipeError(f"image_size must be >= 32, got {self.image_size}")
        parse_weights(self.weights)  # validate eagerly

    def describe(self) -> str:
        """Compact recipe string stored in output metadata."""
        return (
            f"resize={self.image_size}x{self.image_size}:{self.interpolation}"
            f"|norm=imagenet|tap={self.tap}|pool=gap|weights={self.weights}"
        )

    def with_options(self, **changes) -> "ExtractionRecipe":
        return replace(self, **changes)


def get_recipe(backbone: str, *, image_size: int = DEFAULT_IMAGE_SIZE,
               weights: str = "imagenet") -> ExtractionRecipe:
    """Look up a backbone by name; unknown names list what exists."""
    try:
        dim, tap = _BACKBONES[backbone]
    except KeyError:
        raise RecipeError(
            f"unknown backbone {backbone!r} (known: {', '.join(BACKBONE_NAMES)})"
        ) from None
    return ExtractionRecipe(
        backbone=backbone,
        dim=dim,
        tap=tap,
        flops_m=STATIC_FLOPS_M[backbone],
        image_size=image_size,
        weights=weights,
    )


def parse_weights(spec: str):
    """Split a weights spec into ("imagenet", None) or ("random", seed)."""
    if spec == "imagenet":
        return ("imagenet", None)
    if spec.startswith("random:"):
        tail = spec[len("random:"):]
        try:
            seed = int(tail, 0)
        except ValueError:
            raise RecipeError(f"bad random weights seed {tail!r}") from None
        if not 0 <= seed < (1 << 64):
            raise RecipeError("random weights seed must fit in 64 bits")
        return ("random", seed)
    raise RecipeError(
        f"weights must be 'imagenet' or 'random:SEED', got {spec!r}"
    )
