import numpy as np
import pytest
from PIL import Image

from fsextract import build_trunk, get_recipe


@pytest.fixture(scope="session")
def mobilenet_trunk():
    # one shared frozen trunk keeps the suite fast; weights are seeded,
    # not pretrained, because tests must run offline
    return build_trunk(get_recipe("mobilenetv2_100", weights="random:0"))


def make_image_tree(root, classes=("lesion_a", "lesion_b"), per_class=3, seed=0):
    """Class-per-subdirectory tree of small random PNGs."""
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    for cls in classes:
        d = root / cls
        d.mkdir()
        for i in range(per_class):
            arr = rng.integers(0, 255, (20, 16, 3), dtype=np.uint8)
            Image.fromarray(arr).save(d / f"img{i:02d}.png")
    return root


@pytest.fixture
def image_tree(tmp_path):
    return make_image_tree(tmp_path / "toy")


@pytest.fixture
def image_tree_factory(tmp_path):
    def build(name="toy", **kwargs):
        return make_image_tree(tmp_path / name, **kwargs)

    return build
