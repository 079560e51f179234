"""Efficiency reporting: exact parameter counts, nominal compute, and
measured single-image latency."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import torch

from .errors import RecipeError
from .models import Trunk, build_trunk, forward_feature_maps
from .recipes import DEFAULT_IMAGE_SIZE, get_recipe


@dataclass(frozen=True)
class EfficiencyReport:
    backbone: str
    parameters: int
    flops_m: float
    latency_ms: float
    repeats: int
    warmups: int
    device: str

    @property
    def parameters_m(self) -> float:
        return self.parameters / 1e6


def measure_latency_ms(trunk: Trunk, *, repeats: int, warmups: int,
                       device: str = "cpu") -> float:
    """Median wall time of a single-image forward pass, in ms."""
    if repeats < 1:
        raise RecipeError(f"repeats must be >= 1, got {repeats}")
    if warmups < 0:
        raise RecipeError(f"warmups must be >= 0, got {warmups}")
    side = trunk.recipe.image_size
    torch.manual_seed(0)
    image = torch.randn(1, 3, side, side).to(device)
    for _ in range(warmups):
        forward_feature_maps(trunk, image)
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        forward_feature_maps(trunk, image)
        samples.append((time.perf_counter() - start) * 1000.0)
    return statistics.median(samples)


def report_efficiency(
    backbone: str,
    *,
    device: str = "cpu",
    repeats: int = 100,
    warmups: int = 10,
    weights: str = "imagenet",
    image_size: int = DEFAULT_IMAGE_SIZE,
    trunk: Trunk = None,
) -> EfficiencyReport:
    """Build (or reuse) a trunk and report its efficiency numbers.

    Parameter count and nominal compute are device-independent; the
    latency column is measured on this machine and only its ordering
    between backbones is meaningful across reports.
    """
    if trunk is None:
        trunk = build_trunk(get_recipe(backbone, image_size=image_size, weights=weights), device)
    latency = measure_latency_ms(trunk, repeats=repeats, warmups=warmups, device=device)
    return EfficiencyReport(
        backbone=trunk.backbone,
        parameters=trunk.reported_parameters,
        flops_m=trunk.recipe.flops_m,
        latency_ms=latency,
        repeats=repeats,
        warmups=warmups,
        device=device,
    )
