"""Backbone loading and frozen-feature inference."""

from pathlib import Path

import numpy as np
import torch
from torch import nn
from torchvision import models

from .errors import JobError, ModelLoadError

# attribute holding the classification head, by torchvision convention
HEAD_ATTRS = ("fc", "classifier", "heads", "head")

IMAGENET_NAME = "ilsvrc-2012"
IMAGENET_SIZE = 1281167


class BackboneMeta(dict):
    """Metadata known about a loaded backbone; keys mirror the manifest."""


def load_backbone(model_ref: str, weights_path=None) -> tuple[nn.Module, BackboneMeta]:
    """Resolve a model reference to an eval-mode feature module.

    An existing file is loaded as a TorchScript archive and used as-is
    (export the feature extractor, not the classifier). Any other string is
    a torchvision model name; its classification head is replaced with
    Identity. --weights supplies a local state dict for a named model,
    otherwise the published default weights are fetched.
    """
    meta = BackboneMeta(
        imagenet_accuracy=None,
        upstream_dataset_name="",
        upstream_dataset_size=None,
    )
    ref_path = Path(model_ref)
    if ref_path.is_file():
        if weights_path is not None:
            raise JobError("--weights applies to hub model names, not TorchScript paths")
        try:
            module = torch.jit.load(str(ref_path), map_location="cpu")
        except (RuntimeError, ValueError, OSError) as exc:
            raise ModelLoadError(
                f"cannot load {ref_path} as a TorchScript archive ({exc}); "
                "for a bare state dict use --model <hub name> --weights <path>"
            ) from None
        return module.eval(), meta

    if weights_path is not None:
        try:
            module = models.get_model(model_ref, weights=None)
        except (ValueError, KeyError) as exc:
            raise ModelLoadError(f"unknown model name {model_ref!r}: {exc}") from None
        try:
            state = torch.load(weights_path, map_location="cpu", weights_only=True)
            module.load_state_dict(state)
        except Exception as exc:
            raise ModelLoadError(f"cannot apply weights {weights_path}: {exc}") from None
    else:
        try:
            weights = models.get_model_weights(model_ref).DEFAULT
        except (ValueError, KeyError) as exc:
            raise ModelLoadError(f"unknown model name {model_ref!r}: {exc}") from None
        try:
            module = models.get_model(model_ref, weights=weights)
        except Exception as exc:
            raise ModelLoadError(f"cannot fetch weights for {model_ref!r}: {exc}") from None
        meta.update(_weights_meta(weights))
    strip_head(module)
    return module.eval(), meta


def _weights_meta(weights) -> dict:
    out = {}
    info = getattr(weights, "meta", None) or {}
    metrics = info.get("_metrics", {}).get("ImageNet-1K", {})
    if "acc@1" in metrics:
        out["imagenet_accuracy"] = float(metrics["acc@1"]) / 100.0
    if "IMAGENET1K" in getattr(weights, "name", ""):
        out["upstream_dataset_name"] = IMAGENET_NAME
        out["upstream_dataset_size"] = IMAGENET_SIZE
    return out


def strip_head(module: nn.Module) -> str:
    """Replace the classification head with Identity; returns the attr name."""
    for attr in HEAD_ATTRS:
        if isinstance(getattr(module, attr, None), nn.Module):
            setattr(module, attr, nn.Identity())
            return attr
    raise ModelLoadError(
        f"no classification head found on {type(module).__name__} "
        f"(looked for {', '.join(HEAD_ATTRS)})"
    )


def param_count(module: nn.Module) -> int:
    return sum(int(p.numel()) for p in module.parameters())


def embed(module: nn.Module, batch: np.ndarray) -> np.ndarray:
    """Forward one NCHW float32 batch; output flattened to (N, d)."""
    with torch.no_grad():
        out = module(torch.from_numpy(batch))
    if isinstance(out, (tuple, list)):
        out = out[0]
    out = out.reshape(out.shape[0], -1)
    return out.cpu().numpy().astype(np.float32, copy=False)
