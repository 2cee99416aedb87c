import numpy as np
import pytest
import torch
from PIL import Image
from torch import nn


def make_dataset(root, counts, size=(36, 28)):
    """Write deterministic PNGs, one subdirectory per class.

    Pixel values are pure index arithmetic so the tree is identical on
    every run without touching an RNG.
    """
    w, h = size
    for c, name in enumerate(sorted(counts)):
        sub = root / name
        sub.mkdir(parents=True)
        for i in range(counts[name]):
            y, x = np.mgrid[0:h, 0:w]
            base = x * 7 + y * 3 + i * 13 + c * 41
            rgb = np.stack([base % 256, (base + 85) % 256, (base + 170) % 256], axis=-1)
            Image.fromarray(rgb.astype(np.uint8)).save(sub / f"img_{i:03d}.png")
    return root


@pytest.fixture(scope="session")
def pets_dir(tmp_path_factory):
    return make_dataset(tmp_path_factory.mktemp("data") / "pets", {"cats": 7, "dogs": 7})


def build_toy_net():
    # 3*8*5*5 + 8 = 608 parameters, 8-wide output
    torch.manual_seed(1234)
    return nn.Sequential(
        nn.Conv2d(3, 8, 5, stride=4),
        nn.ReLU(),
        nn.AdaptiveAvgPool2d(1),
        nn.Flatten(),
    ).eval()


@pytest.fixture(scope="session")
def toy_script(tmp_path_factory):
    """TorchScript archive of a tiny fixed-weight feature extractor."""
    traced = torch.jit.trace(build_toy_net(), torch.zeros(1, 3, 32, 32))
    path = tmp_path_factory.mktemp("models") / "toy_d8.pt"
    torch.jit.save(traced, str(path))
    return path
