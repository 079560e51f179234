"""Backbone trunks: build each supported network, cut it at the tap
point, freeze it, and count the parameters it is reported with.

The reported parameter count covers the convolutional body. For the two
mobile-family networks (mobilenetv2_100, efficientnet_b1) the trailing
1x1 expansion that widens the last bottleneck to the embedding width
runs in the forward pass but is tallied with the pooling head, not the
body; the other four report exactly the module that runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn
from torchvision import models as tv
from torchvision.models.feature_extraction import create_feature_extractor

from .errors import RecipeError
from .recipes import ExtractionRecipe, parse_weights


@dataclass(frozen=True)
class Trunk:
    """A frozen feature trunk plus its reporting facts."""

    recipe: ExtractionRecipe
    module: nn.Module = field(repr=False)
    reported_parameters: int

    @property
    def backbone(self) -> str:
        return self.recipe.backbone

    @property
    def dim(self) -> int:
        return self.recipe.dim


def _nparams(module: nn.Module) -> int:
    return sum(p.numel() for p in module.parameters())


class _DenseNetTap(nn.Module):
    # the zoo's own forward applies ReLU between the last norm and pooling
    def __init__(self, features: nn.Module) -> None:
        super().__init__()
        self.features = features

    def forward(self, x):
        return torch.relu(self.features(x))


class _InceptionTap(nn.Module):
    # wrap the traced graph so the trunk returns a tensor, not a dict
    def __init__(self, extractor: nn.Module) -> None:
        super().__init__()
        self.extractor = extractor

    def forward(self, x):
        return self.extractor(x)["Mixed_7c"]


def _build_vgg16(weights):
    m = tv.vgg16(weights=weights)
    return m.features, _nparams(m.features)


def _build_resnet50(weights):
    m = tv.resnet50(weights=weights)
    trunk = nn.Sequential(
        m.conv1, m.bn1, m.relu, m.maxpool, m.layer1, m.layer2, m.layer3, m.layer4
    )
    return trunk, _nparams(trunk)


def _build_densenet121(weights):
    m = tv.densenet121(weights=weights)
    return _DenseNetTap(m.features), _nparams(m.features)


def _build_inceptionv3(weights):
    if weights is None:
        # no checkpoint to satisfy, so skip the auxiliary head entirely
        m = tv.inception_v3(weights=None, aux_logits=False, init_weights=False)
    else:
        m = tv.inception_v3(weights=weights)
    m.eval()  # trace the inference graph; the aux branch is pruned away
    extractor = create_feature_extractor(m, ["Mixed_7c"])
    return _InceptionTap(extractor), _nparams(extractor)


def _build_mobilenetv2_100(weights):
    m = tv.mobilenet_v2(weights=weights)
    # body only: the final 1x1 expansion (320 -> 1280) is the pooling head
    return m.features, _nparams(m.features) - _nparams(m.features[-1])


def _build_efficientnet_b1(weights):
    m = tv.efficientnet_b1(weights=weights)
    return m.features, _nparams(m.features) - _nparams(m.features[-1])


_BUILDERS = {
    "vgg16": _build_vgg16,
    "resnet50": _build_resnet50,
    "densenet121": _build_densenet121,
    "inceptionv3": _build_inceptionv3,
    "mobilenetv2_100": _build_mobilenetv2_100,
    "efficientnet_b1": _build_efficientnet_b1,
}


def build_trunk(recipe: ExtractionRecipe, device: str = "cpu") -> Trunk:
    """Instantiate a recipe's backbone, frozen and in inference mode."""
    try:
        builder = _BUILDERS[recipe.backbone]
    except KeyError:
        raise RecipeError(f"no builder for backbone {recipe.backbone!r}") from None
    kind, seed = parse_weights(recipe.weights)
    if kind == "imagenet":
        module, reported = builder("IMAGENET1K_V1")
    else:
        torch.manual_seed(seed)
        module, reported = builder(None)
    module = module.to(device)
    module.eval()
    for p in module.parameters():
        p.requires_grad_(False)
    return Trunk(recipe=recipe, module=module, reported_parameters=reported)


def forward_feature_maps(trunk: Trunk, batch: torch.Tensor) -> torch.Tensor:
    """Run a (B, 3, H, W) batch up to the tap point: (B, C, H', W')."""
    if batch.ndim != 4 or batch.shape[1] != 3:
        raise RecipeError(f"expected a (B, 3, H, W) batch, got {tuple(batch.shape)}")
    with torch.inference_mode():
        maps = trunk.module(batch)
    if maps.shape[1] != trunk.dim:
        raise RecipeError(
            f"{trunk.backbone} produced {maps.shape[1]} channels, expected {trunk.dim}"
        )
    return maps


def pool_feature_maps(maps: torch.Tensor) -> np.ndarray:
    """Global average pooling: (B, C, H', W') -> float32 (B, C)."""
    return maps.mean(dim=(2, 3)).cpu().numpy().astype(np.float32)
