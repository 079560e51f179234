"""fsextract: frozen-backbone image embeddings in the fsbench format."""

__version__ = "0.1.0"

from .bench import EfficiencyReport, measure_latency_ms, report_efficiency
from .errors import ExtractError, ImageReadError, ImageRootError, RecipeError
from .extract import IMAGE_EXTENSIONS, extract_dataset, extract_to_file, scan_image_root
from .models import Trunk, build_trunk, forward_feature_maps, pool_feature_maps
from .preprocess import image_to_tensor, load_image, load_image_tensor
from .recipes import (
    BACKBONE_NAMES,
    DEFAULT_IMAGE_SIZE,
    IMAGENET_MEAN,
    IMAGENET_STD,
    STATIC_FLOPS_M,
    ExtractionRecipe,
    get_recipe,
    parse_weights,
)

__all__ = [
    "BACKBONE_NAMES",
    "DEFAULT_IMAGE_SIZE",
    "EfficiencyReport",
    "ExtractError",
    "ExtractionRecipe",
    "IMAGENET_MEAN",
    "IMAGENET_STD",
    "IMAGE_EXTENSIONS",
    "ImageReadError",
    "ImageRootError",
    "RecipeError",
    "STATIC_FLOPS_M",
    "Trunk",
    "__version__",
    "build_trunk",
    "extract_dataset",
    "extract_to_file",
    "forward_feature_maps",
    "get_recipe",
    "image_to_tensor",
    "load_image",
    "load_image_tensor",
    "measure_latency_ms",
    "parse_weights",
    "pool_feature_maps",
    "report_efficiency",
    "scan_image_root",
]
